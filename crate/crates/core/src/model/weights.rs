use super::instance::{Pattern, UnknownPattern};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WeightError {
    #[error("line {line}: expected `pattern = weight`")]
    Syntax { line: usize },
    #[error("line {line}: {source}")]
    Pattern { line: usize, source: UnknownPattern },
    #[error("line {line}: weight `{text}` must be a decimal in (0, 1]")]
    Value { line: usize, text: String },
    #[error("weight {0} given twice")]
    Duplicate(Pattern),
}

/// Suspicion weight per pattern. A table may be partial; scoring requires
/// a complete one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightConfig<T> {
    weights: [Option<T>; 8],
}

impl<T: Scalar> WeightConfig<T> {
    pub fn empty() -> Self {
        WeightConfig { weights: [None; 8] }
    }

    /// Default levels: low 0.3, medium 0.5, high 0.7, with bidding ratio
    /// carried at 0.7.
    pub fn defaults() -> Self {
        let tenths = |p: Pattern| match p {
            Pattern::BidderTendency => 5,
            Pattern::EarlyBidding => 3,
            Pattern::BiddingRatio => 7,
            Pattern::LastBidding => 5,
            Pattern::AuctionStartingPrice => 3,
            Pattern::SuccessiveOutbidding => 7,
            Pattern::WinningRatio => 7,
            Pattern::AuctionBids => 3,
        };
        let mut cfg = Self::empty();
        for p in Pattern::ALL {
            cfg.weights[p.index()] = Some(T::ratio(tenths(p), 10));
        }
        cfg
    }

    /// Parses `pattern = weight` lines. Blank lines and `#` comments are
    /// ignored. Pattern names may be codes (`SOB`) or column names.
    pub fn parse(text: &str) -> Result<Self, WeightError> {
        let mut cfg = Self::empty();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(WeightError::Syntax { line })?;
            let pattern: Pattern = key.parse().map_err(|source| WeightError::Pattern { line, source })?;
            let weight = T::parse_decimal(value)
                .filter(|w| *w > T::zero() && *w <= T::one())
                .ok_or_else(|| WeightError::Value { line, text: value.trim().to_string() })?;
            if cfg.weights[pattern.index()].replace(weight).is_some() {
                return Err(WeightError::Duplicate(pattern));
            }
        }
        Ok(cfg)
    }

    /// Entries of `self` override `base`.
    pub fn over(self, base: &WeightConfig<T>) -> Self {
        let mut weights = base.weights;
        for (slot, w) in weights.iter_mut().zip(self.weights) {
            if w.is_some() {
                *slot = w;
            }
        }
        WeightConfig { weights }
    }

    pub fn get(&self, pattern: Pattern) -> Option<T> {
        self.weights[pattern.index()]
    }

    /// Sets a weight; values outside (0, 1] are refused.
    pub fn set(&mut self, pattern: Pattern, weight: T) -> bool {
        if weight > T::zero() && weight <= T::one() {
            self.weights[pattern.index()] = Some(weight);
            true
        } else {
            false
        }
    }

    pub fn missing(&self) -> Option<Pattern> {
        Pattern::ALL.into_iter().find(|p| self.weights[p.index()].is_none())
    }

    /// Uniformly rescales every weight. Used to check ranking stability;
    /// the result may leave (0, 1].
    pub fn scaled(&self, factor: T) -> Self {
        WeightConfig { weights: self.weights.map(|w| w.map(|w| w * factor)) }
    }
}

impl<T: Scalar> Default for WeightConfig<T> {
    fn default() -> Self {
        Self::defaults()
    }
}
