use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use serde::Serialize;

use crate::model::{winner_of, AuctionView, Pattern, SbInstance};
use crate::scalar::Scalar;

/// Thresholds for the summary statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsConfig<T> {
    /// A metric counts as high when strictly above this.
    pub threshold: T,
    /// Aggressive participation: successive outbidding at least this...
    pub aggressive_sob: T,
    /// ...and bidding ratio strictly above this.
    pub aggressive_br: T,
    /// Early bidder: early bidding strictly above this.
    pub early_eb: T,
}

impl<T: Scalar> Default for StatsConfig<T> {
    fn default() -> Self {
        StatsConfig {
            threshold: T::ratio(7, 10),
            aggressive_sob: T::half(),
            aggressive_br: T::ratio(1, 10),
            early_eb: T::ratio(7, 10),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BucketCount {
    pub count: usize,
    /// `count / total_instances`.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighValueCount {
    pub pattern: Pattern,
    pub code: &'static str,
    pub label: &'static str,
    pub count: usize,
    pub share: f64,
}

/// Winner/aggression cross-tabulation over instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Buckets {
    pub winners_not_aggressive: BucketCount,
    pub non_winners_aggressive: BucketCount,
    pub non_winners_not_aggressive: BucketCount,
    pub winners_aggressive: BucketCount,
    pub early_aggressive_non_winners: BucketCount,
}

/// Average bidders per auction, split on whether the starting price is
/// below the dataset mean (a positive starting-price metric).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StartingPriceBidders {
    pub low_auctions: usize,
    pub low_avg_bidders: Option<f64>,
    pub regular_auctions: usize,
    pub regular_avg_bidders: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternStats {
    pub total_instances: usize,
    pub total_auctions: usize,
    pub total_bidders: usize,
    /// What shares are computed over.
    pub percentage_base: &'static str,
    pub threshold: f64,
    pub high_value: Vec<HighValueCount>,
    /// Present only when auction winners are known.
    pub buckets: Option<Buckets>,
    pub starting_price: StartingPriceBidders,
}

/// Winner bidder id per auction id.
pub fn winners_by_auction(auctions: &[AuctionView]) -> HashMap<u64, String> {
    auctions
        .iter()
        .filter_map(|a| winner_of(a).ok().map(|w| (a.info.auction_id, w.bidder_id.clone())))
        .collect()
}

/// Summary counts over instances. The result does not depend on instance
/// order.
pub fn pattern_stats<T: Scalar>(
    instances: &[SbInstance<T>],
    config: &StatsConfig<T>,
    winners: Option<&HashMap<u64, String>>,
) -> PatternStats {
    let total = instances.len();
    let share = |count: usize| if total == 0 { 0.0 } else { count as f64 / total as f64 };
    let bucket = |count: usize| BucketCount { count, share: share(count) };

    let high_value = Pattern::ALL
        .iter()
        .map(|&p| {
            let count = instances.iter().filter(|i| i.value(p) > config.threshold).count();
            HighValueCount { pattern: p, code: p.code(), label: p.label(), count, share: share(count) }
        })
        .collect();

    let buckets = winners.map(|winners| {
        let (mut wa, mut wn, mut na, mut nn, mut early) = (0, 0, 0, 0, 0);
        for inst in instances {
            let aggressive =
                inst.successive_outbidding >= config.aggressive_sob && inst.bidding_ratio > config.aggressive_br;
            let winner = winners.get(&inst.auction_id).is_some_and(|w| *w == inst.bidder_id);
            match (winner, aggressive) {
                (true, true) => wa += 1,
                (true, false) => wn += 1,
                (false, true) => {
                    na += 1;
                    if inst.early_bidding > config.early_eb {
                        early += 1;
                    }
                }
                (false, false) => nn += 1,
            }
        }
        Buckets {
            winners_not_aggressive: bucket(wn),
            non_winners_aggressive: bucket(na),
            non_winners_not_aggressive: bucket(nn),
            winners_aggressive: bucket(wa),
            early_aggressive_non_winners: bucket(early),
        }
    });

    // bidders per auction and whether its starting price is below the mean
    let mut per_auction: BTreeMap<u64, (usize, bool)> = BTreeMap::new();
    for inst in instances {
        let e = per_auction.entry(inst.auction_id).or_insert((0, false));
        e.0 += 1;
        e.1 |= inst.auction_starting_price > T::zero();
    }
    let avg = |sel: bool| {
        let sizes: Vec<usize> = per_auction.values().filter(|(_, low)| *low == sel).map(|(n, _)| *n).collect();
        let avg = (!sizes.is_empty()).then(|| sizes.iter().sum::<usize>() as f64 / sizes.len() as f64);
        (sizes.len(), avg)
    };
    let (low_auctions, low_avg_bidders) = avg(true);
    let (regular_auctions, regular_avg_bidders) = avg(false);

    PatternStats {
        total_instances: total,
        total_auctions: per_auction.len(),
        total_bidders: instances.iter().map(|i| i.bidder_id.as_str()).collect::<BTreeSet<_>>().len(),
        percentage_base: "instances",
        threshold: config.threshold.to_f64_lossy(),
        high_value,
        buckets,
        starting_price: StartingPriceBidders { low_auctions, low_avg_bidders, regular_auctions, regular_avg_bidders },
    }
}

fn pct(share: f64) -> String {
    format!("{:.1}%", share * 100.0)
}

/// Aligned plain-text rendering of [`PatternStats`].
pub fn format_stats_table(stats: &PatternStats) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Instances: {} (auctions: {}, bidders: {}); percentages over {}",
        stats.total_instances, stats.total_auctions, stats.total_bidders, stats.percentage_base
    );
    let _ = writeln!(out);
    let head = format!("High value (> {})", stats.threshold);
    let _ = writeln!(out, "{head:<34} {:>4} {:>9} {:>8}", "Code", "Count", "Percent");
    for h in &stats.high_value {
        let _ = writeln!(out, "{:<34} {:>4} {:>9} {:>8}", h.label, h.code, h.count, pct(h.share));
    }
    if let Some(b) = &stats.buckets {
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<39} {:>9} {:>8}", "Behavior", "Count", "Percent");
        for (name, c) in [
            ("Winners, not aggressive", b.winners_not_aggressive),
            ("Non-winners, aggressive", b.non_winners_aggressive),
            ("Non-winners, not aggressive", b.non_winners_not_aggressive),
            ("Winners, aggressive", b.winners_aggressive),
            ("Early and aggressive non-winners", b.early_aggressive_non_winners),
        ] {
            let _ = writeln!(out, "{name:<39} {:>9} {:>8}", c.count, pct(c.share));
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<39} {:>9} {:>8}", "Starting price", "Auctions", "Bidders");
    let sp = &stats.starting_price;
    let fmt_avg = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
    let _ = writeln!(out, "{:<39} {:>9} {:>8}", "Low (below mean)", sp.low_auctions, fmt_avg(sp.low_avg_bidders));
    let _ = writeln!(out, "{:<39} {:>9} {:>8}", "Regular", sp.regular_auctions, fmt_avg(sp.regular_avg_bidders));
    out
}
