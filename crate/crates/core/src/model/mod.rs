//! Domain types shared by every pipeline stage.

mod instance;
mod money;
mod weights;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

pub use instance::{Pattern, SbInstance};
pub use money::{Money, MoneyParseError};
pub use weights::{WeightConfig, WeightError};

/// Seconds in one day; durations are whole days on the scraped site.
pub const SECONDS_PER_DAY: u64 = 86_400;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("auction {auction_id} has no bids")]
    EmptyAuction { auction_id: u64 },
    #[error("{context}: {detail}")]
    Invariant { context: String, detail: String },
    #[error("auction {auction_id}: rows disagree on `{field}`")]
    ConflictingAuction { auction_id: u64, field: &'static str },
}

fn violation(context: String, detail: impl Into<String>) -> ModelError {
    ModelError::Invariant { context, detail: detail.into() }
}

/// One cleaned bid row. Timestamps are countdown seconds: the number of
/// seconds between the event and a fixed reference epoch, so later events
/// have smaller values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BidRecord {
    pub record_id: u64,
    pub auction_id: u64,
    pub seller_id: String,
    pub bidder_id: String,
    pub bid_amount: Money,
    pub bid_submit_time_sec: u64,
    pub num_bidders: u32,
    pub num_bids: u32,
    pub starting_price: Money,
    pub winning_bid: Money,
    pub auction_duration_sec: u64,
    pub start_time_sec: u64,
    pub end_time_sec: u64,
}

impl BidRecord {
    pub fn from_parts(record_id: u64, info: &AuctionInfo, bid: &Bid) -> Self {
        BidRecord {
            record_id,
            auction_id: info.auction_id,
            seller_id: info.seller_id.clone(),
            bidder_id: bid.bidder_id.clone(),
            bid_amount: bid.amount,
            bid_submit_time_sec: bid.submit_time_sec,
            num_bidders: info.num_bidders,
            num_bids: info.num_bids,
            starting_price: info.starting_price,
            winning_bid: info.winning_bid,
            auction_duration_sec: info.auction_duration_sec,
            start_time_sec: info.start_time_sec,
            end_time_sec: info.end_time_sec,
        }
    }

    pub fn info(&self) -> AuctionInfo {
        AuctionInfo {
            auction_id: self.auction_id,
            seller_id: self.seller_id.clone(),
            num_bidders: self.num_bidders,
            num_bids: self.num_bids,
            starting_price: self.starting_price,
            winning_bid: self.winning_bid,
            auction_duration_sec: self.auction_duration_sec,
            start_time_sec: self.start_time_sec,
            end_time_sec: self.end_time_sec,
        }
    }

    pub fn bid(&self) -> Bid {
        Bid {
            record_id: self.record_id,
            bidder_id: self.bidder_id.clone(),
            amount: self.bid_amount,
            submit_time_sec: self.bid_submit_time_sec,
        }
    }

    /// Row-local invariants. Cross-row agreement is checked by
    /// [`AuctionView::from_records`].
    pub fn validate(&self) -> Result<(), ModelError> {
        let ctx = || format!("record {}", self.record_id);
        if self.record_id == 0 {
            return Err(violation(ctx(), "record_id must be positive"));
        }
        if self.auction_id == 0 {
            return Err(violation(ctx(), "auction_id must be positive"));
        }
        if self.seller_id.trim().is_empty() || self.bidder_id.trim().is_empty() {
            return Err(violation(ctx(), "empty seller or bidder id"));
        }
        if self.num_bids == 0 || self.num_bidders == 0 || self.auction_duration_sec == 0 {
            return Err(violation(ctx(), "counts and duration must be positive"));
        }
        self.info().validate_prices_and_window()?;
        if self.bid_amount > self.winning_bid {
            return Err(violation(ctx(), "bid amount exceeds winning bid"));
        }
        if self.bid_submit_time_sec < self.end_time_sec || self.bid_submit_time_sec > self.start_time_sec {
            return Err(violation(ctx(), "bid submitted outside the auction window"));
        }
        Ok(())
    }
}

/// Auction-level attributes repeated on every bid row of an auction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AuctionInfo {
    pub auction_id: u64,
    pub seller_id: String,
    pub num_bidders: u32,
    pub num_bids: u32,
    pub starting_price: Money,
    pub winning_bid: Money,
    pub auction_duration_sec: u64,
    pub start_time_sec: u64,
    pub end_time_sec: u64,
}

impl AuctionInfo {
    fn validate_prices_and_window(&self) -> Result<(), ModelError> {
        let ctx = || format!("auction {}", self.auction_id);
        if self.starting_price < Money::ZERO {
            return Err(violation(ctx(), "negative starting price"));
        }
        if self.winning_bid <= Money::ZERO {
            return Err(violation(ctx(), "winning bid must be positive"));
        }
        if self.starting_price > self.winning_bid {
            return Err(violation(ctx(), "starting price exceeds winning bid"));
        }
        if self.start_time_sec.checked_sub(self.end_time_sec) != Some(self.auction_duration_sec) {
            return Err(violation(ctx(), "start_time_sec - end_time_sec != auction_duration_sec"));
        }
        Ok(())
    }

    fn first_conflict(&self, other: &AuctionInfo) -> Option<&'static str> {
        if self.seller_id != other.seller_id {
            Some("seller_id")
        } else if self.num_bidders != other.num_bidders {
            Some("num_bidders")
        } else if self.num_bids != other.num_bids {
            Some("num_bids")
        } else if self.starting_price != other.starting_price {
            Some("starting_price")
        } else if self.winning_bid != other.winning_bid {
            Some("winning_bid")
        } else if self.auction_duration_sec != other.auction_duration_sec {
            Some("auction_duration_sec")
        } else if self.start_time_sec != other.start_time_sec {
            Some("start_time_sec")
        } else if self.end_time_sec != other.end_time_sec {
            Some("end_time_sec")
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bid {
    pub record_id: u64,
    pub bidder_id: String,
    pub amount: Money,
    pub submit_time_sec: u64,
}

/// Chronological order under the countdown convention: larger countdown
/// first, then ascending amount, then record id.
pub fn chronological(a: &Bid, b: &Bid) -> Ordering {
    b.submit_time_sec
        .cmp(&a.submit_time_sec)
        .then(a.amount.cmp(&b.amount))
        .then(a.record_id.cmp(&b.record_id))
}

/// All bids of one auction in chronological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuctionView {
    pub info: AuctionInfo,
    bids: Vec<Bid>,
}

impl AuctionView {
    pub fn new(info: AuctionInfo, mut bids: Vec<Bid>) -> Self {
        bids.sort_by(chronological);
        AuctionView { info, bids }
    }

    pub fn bids(&self) -> &[Bid] {
        &self.bids
    }

    pub fn distinct_bidders(&self) -> usize {
        self.bids.iter().map(|b| b.bidder_id.as_str()).collect::<HashSet<_>>().len()
    }

    /// Groups records by auction id (ascending). Rows of one auction must
    /// agree on every auction-level field.
    pub fn from_records(records: &[BidRecord]) -> Result<Vec<AuctionView>, ModelError> {
        let mut grouped: BTreeMap<u64, (AuctionInfo, Vec<Bid>)> = BTreeMap::new();
        for record in records {
            let info = record.info();
            match grouped.get_mut(&record.auction_id) {
                Some((existing, bids)) => {
                    if let Some(field) = existing.first_conflict(&info) {
                        return Err(ModelError::ConflictingAuction { auction_id: record.auction_id, field });
                    }
                    bids.push(record.bid());
                }
                None => {
                    grouped.insert(record.auction_id, (info, vec![record.bid()]));
                }
            }
        }
        Ok(grouped.into_values().map(|(info, bids)| AuctionView::new(info, bids)).collect())
    }

    /// Flattens back into records in canonical order.
    pub fn to_records(&self) -> Vec<BidRecord> {
        self.bids.iter().map(|b| BidRecord::from_parts(b.record_id, &self.info, b)).collect()
    }

    /// Auction-level invariants: reconciled counts match the bid list and
    /// the chronologically last bid carries the winning price.
    pub fn validate(&self) -> Result<(), ModelError> {
        let ctx = || format!("auction {}", self.info.auction_id);
        self.info.validate_prices_and_window()?;
        if self.bids.len() != self.info.num_bids as usize {
            return Err(violation(ctx(), format!("num_bids {} but {} bid rows", self.info.num_bids, self.bids.len())));
        }
        let distinct = self.distinct_bidders();
        if distinct != self.info.num_bidders as usize {
            return Err(violation(ctx(), format!("num_bidders {} but {distinct} distinct bidders", self.info.num_bidders)));
        }
        let last = self.bids.last().ok_or(ModelError::EmptyAuction { auction_id: self.info.auction_id })?;
        if last.amount != self.info.winning_bid {
            return Err(violation(ctx(), "last bid amount differs from winning bid"));
        }
        for bid in &self.bids {
            if bid.amount > self.info.winning_bid {
                return Err(violation(ctx(), format!("record {} bids above the winning price", bid.record_id)));
            }
            if bid.submit_time_sec < self.info.end_time_sec || bid.submit_time_sec > self.info.start_time_sec {
                return Err(violation(ctx(), format!("record {} lies outside the auction window", bid.record_id)));
            }
        }
        Ok(())
    }
}

/// The winner of an open ascending auction holds the chronologically last
/// bid.
pub fn winner_of(auction: &AuctionView) -> Result<&Bid, ModelError> {
    auction.bids.last().ok_or(ModelError::EmptyAuction { auction_id: auction.info.auction_id })
}
