use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::scalar::Scalar;

/// The eight shill-bidding patterns, in feature-column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    BidderTendency,
    EarlyBidding,
    BiddingRatio,
    LastBidding,
    AuctionStartingPrice,
    SuccessiveOutbidding,
    WinningRatio,
    AuctionBids,
}

impl Pattern {
    pub const ALL: [Pattern; 8] = [
        Pattern::BidderTendency,
        Pattern::EarlyBidding,
        Pattern::BiddingRatio,
        Pattern::LastBidding,
        Pattern::AuctionStartingPrice,
        Pattern::SuccessiveOutbidding,
        Pattern::WinningRatio,
        Pattern::AuctionBids,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn code(self) -> &'static str {
        match self {
            Pattern::BidderTendency => "BT",
            Pattern::EarlyBidding => "EB",
            Pattern::BiddingRatio => "BR",
            Pattern::LastBidding => "LB",
            Pattern::AuctionStartingPrice => "ASP",
            Pattern::SuccessiveOutbidding => "SOB",
            Pattern::WinningRatio => "WR",
            Pattern::AuctionBids => "AB",
        }
    }

    /// CSV column name.
    pub fn column(self) -> &'static str {
        match self {
            Pattern::BidderTendency => "bidder_tendency",
            Pattern::EarlyBidding => "early_bidding",
            Pattern::BiddingRatio => "bidding_ratio",
            Pattern::LastBidding => "last_bidding",
            Pattern::AuctionStartingPrice => "auction_starting_price",
            Pattern::SuccessiveOutbidding => "successive_outbidding",
            Pattern::WinningRatio => "winning_ratio",
            Pattern::AuctionBids => "auction_bids",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Pattern::BidderTendency => "Bidder Tendency",
            Pattern::EarlyBidding => "Early Bidding",
            Pattern::BiddingRatio => "Bidding Ratio",
            Pattern::LastBidding => "Last Bidding",
            Pattern::AuctionStartingPrice => "Auction Starting Price",
            Pattern::SuccessiveOutbidding => "Successive Outbidding",
            Pattern::WinningRatio => "Winning Ratio",
            Pattern::AuctionBids => "Auction Bids",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown pattern `{0}`")]
pub struct UnknownPattern(pub String);

/// Accepts the short code (`SOB`) or the column name
/// (`successive_outbidding`), case-insensitively.
impl FromStr for Pattern {
    type Err = UnknownPattern;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let needle = s.trim();
        Pattern::ALL
            .into_iter()
            .find(|p| p.code().eq_ignore_ascii_case(needle) || p.column().eq_ignore_ascii_case(needle))
            .ok_or_else(|| UnknownPattern(s.to_string()))
    }
}

/// Feature vector for one (auction, bidder) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SbInstance<T> {
    pub auction_id: u64,
    pub bidder_id: String,
    pub bidder_tendency: T,
    pub early_bidding: T,
    pub bidding_ratio: T,
    pub last_bidding: T,
    pub auction_starting_price: T,
    pub successive_outbidding: T,
    pub winning_ratio: T,
    pub auction_bids: T,
}

impl<T: Scalar> SbInstance<T> {
    pub fn from_values(auction_id: u64, bidder_id: impl Into<String>, values: [T; 8]) -> Self {
        let [bt, eb, br, lb, asp, sob, wr, ab] = values;
        SbInstance {
            auction_id,
            bidder_id: bidder_id.into(),
            bidder_tendency: bt,
            early_bidding: eb,
            bidding_ratio: br,
            last_bidding: lb,
            auction_starting_price: asp,
            successive_outbidding: sob,
            winning_ratio: wr,
            auction_bids: ab,
        }
    }

    pub fn values(&self) -> [T; 8] {
        [
            self.bidder_tendency,
            self.early_bidding,
            self.bidding_ratio,
            self.last_bidding,
            self.auction_starting_price,
            self.successive_outbidding,
            self.winning_ratio,
            self.auction_bids,
        ]
    }

    pub fn value(&self, pattern: Pattern) -> T {
        self.values()[pattern.index()]
    }

    pub fn value_mut(&mut self, pattern: Pattern) -> &mut T {
        match pattern {
            Pattern::BidderTendency => &mut self.bidder_tendency,
            Pattern::EarlyBidding => &mut self.early_bidding,
            Pattern::BiddingRatio => &mut self.bidding_ratio,
            Pattern::LastBidding => &mut self.last_bidding,
            Pattern::AuctionStartingPrice => &mut self.auction_starting_price,
            Pattern::SuccessiveOutbidding => &mut self.successive_outbidding,
            Pattern::WinningRatio => &mut self.winning_ratio,
            Pattern::AuctionBids => &mut self.auction_bids,
        }
    }

    /// Patterns whose value lies outside `[0, 1]` (NaN included).
    pub fn out_of_range(&self) -> impl Iterator<Item = (Pattern, T)> + '_ {
        Pattern::ALL.into_iter().map(|p| (p, self.value(p))).filter(|(_, v)| !v.in_unit_interval())
    }
}
