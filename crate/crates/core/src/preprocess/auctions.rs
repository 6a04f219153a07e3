//! Auction-level stages over typed rows: grouping, count reconciliation,
//! activity and consistency filters, identifier assignment.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::PreprocessError;
use crate::model::{AuctionInfo, Bid, BidRecord, Money};

/// A typed bid row before identifiers exist. `auction_key` is the auction
/// URL (or a zero-padded id when re-processing cleaned data).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedBid {
    /// Source row index or prior record id; last tie-break only.
    pub source_row: u64,
    pub auction_key: String,
    pub seller_id: String,
    pub bidder_id: String,
    pub bid_amount: Money,
    pub bid_submit_time_sec: u64,
    pub scraped_num_bids: Option<u32>,
    pub scraped_num_bidders: Option<u32>,
    pub starting_price: Money,
    pub winning_bid: Money,
    pub auction_duration_sec: u64,
    pub start_time_sec: u64,
    pub end_time_sec: u64,
}

fn staged_order(a: &StagedBid, b: &StagedBid) -> Ordering {
    b.bid_submit_time_sec
        .cmp(&a.bid_submit_time_sec)
        .then(a.bid_amount.cmp(&b.bid_amount))
        .then_with(|| a.bidder_id.cmp(&b.bidder_id))
        .then(a.scraped_num_bids.cmp(&b.scraped_num_bids))
        .then(a.scraped_num_bidders.cmp(&b.scraped_num_bidders))
        .then(a.source_row.cmp(&b.source_row))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedBidLine {
    pub bidder_id: String,
    pub amount: Money,
    pub submit_time_sec: u64,
}

/// Rows of one auction. `num_bids`/`num_bidders` hold the scraped values
/// until [`reconcile_counts`] replaces them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedAuction {
    pub key: String,
    pub seller_id: String,
    pub starting_price: Money,
    pub winning_bid: Money,
    pub auction_duration_sec: u64,
    pub start_time_sec: u64,
    pub end_time_sec: u64,
    pub num_bids: Option<u32>,
    pub num_bidders: Option<u32>,
    /// Chronological order.
    pub bids: Vec<StagedBidLine>,
}

fn common<T: PartialEq + Copy>(values: impl Iterator<Item = Option<T>>) -> Option<T> {
    let mut out: Option<Option<T>> = None;
    for v in values {
        match out {
            None => out = Some(v),
            Some(prev) if prev != v => return None,
            _ => {}
        }
    }
    out.flatten()
}

/// Groups rows by auction key (ascending). Rows of one auction must agree
/// on seller, prices, duration and window; scraped counts may disagree and
/// are left for reconciliation.
pub fn group_auctions(mut rows: Vec<StagedBid>) -> Result<Vec<StagedAuction>, PreprocessError> {
    rows.sort_by(|a, b| a.auction_key.cmp(&b.auction_key).then_with(|| staged_order(a, b)));
    let mut out: Vec<StagedAuction> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let key = &rows[start].auction_key;
        let end = start + rows[start..].iter().take_while(|r| &r.auction_key == key).count();
        let group = &rows[start..end];
        let first = &group[0];
        for r in &group[1..] {
            let field = if r.seller_id != first.seller_id {
                Some("seller_id")
            } else if r.starting_price != first.starting_price {
                Some("starting_price")
            } else if r.winning_bid != first.winning_bid {
                Some("winning_price")
            } else if r.auction_duration_sec != first.auction_duration_sec {
                Some("duration")
            } else if r.start_time_sec != first.start_time_sec {
                Some("start_time")
            } else if r.end_time_sec != first.end_time_sec {
                Some("end_time")
            } else {
                None
            };
            if let Some(field) = field {
                return Err(PreprocessError::ConflictingAuction { key: key.clone(), field });
            }
        }
        out.push(StagedAuction {
            key: key.clone(),
            seller_id: first.seller_id.clone(),
            starting_price: first.starting_price,
            winning_bid: first.winning_bid,
            auction_duration_sec: first.auction_duration_sec,
            start_time_sec: first.start_time_sec,
            end_time_sec: first.end_time_sec,
            num_bids: common(group.iter().map(|r| r.scraped_num_bids)),
            num_bidders: common(group.iter().map(|r| r.scraped_num_bidders)),
            bids: group
                .iter()
                .map(|r| StagedBidLine {
                    bidder_id: r.bidder_id.clone(),
                    amount: r.bid_amount,
                    submit_time_sec: r.bid_submit_time_sec,
                })
                .collect(),
        });
        start = end;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountAdjustment {
    pub num_bids: bool,
    pub num_bidders: bool,
}

/// Replaces scraped counts with the actual number of bid rows and distinct
/// bidders.
pub fn reconcile_counts(auction: &mut StagedAuction) -> CountAdjustment {
    let actual_bids = auction.bids.len() as u32;
    let actual_bidders = auction.bids.iter().map(|b| b.bidder_id.as_str()).collect::<HashSet<_>>().len() as u32;
    let adj = CountAdjustment {
        num_bids: auction.num_bids != Some(actual_bids),
        num_bidders: auction.num_bidders != Some(actual_bidders),
    };
    auction.num_bids = Some(actual_bids);
    auction.num_bidders = Some(actual_bidders);
    adj
}

/// Splits off auctions with fewer than `min_bids` bid rows.
pub fn filter_low_activity_auctions(auctions: Vec<StagedAuction>, min_bids: usize) -> (Vec<StagedAuction>, Vec<StagedAuction>) {
    auctions.into_iter().partition(|a| a.bids.len() >= min_bids)
}

/// Why an auction's attributes are incompatible with its bids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inconsistency {
    LastBidAboveWinningPrice,
    StartingPriceAboveWinningPrice,
    NonPositiveWinningPrice,
    LastBidBelowWinningPrice,
    BidAboveWinningPrice,
    DurationMismatch,
    BidOutsideWindow,
}

/// First inconsistency found, checked in declaration order. The first two
/// are the primary rules (strict `>`); the rest guard the invariants the
/// cleaned data must satisfy.
pub fn inconsistency(auction: &StagedAuction) -> Option<Inconsistency> {
    let last = auction.bids.last()?;
    if last.amount > auction.winning_bid {
        return Some(Inconsistency::LastBidAboveWinningPrice);
    }
    if auction.starting_price > auction.winning_bid {
        return Some(Inconsistency::StartingPriceAboveWinningPrice);
    }
    if auction.winning_bid <= Money::ZERO {
        return Some(Inconsistency::NonPositiveWinningPrice);
    }
    if last.amount < auction.winning_bid {
        return Some(Inconsistency::LastBidBelowWinningPrice);
    }
    if auction.bids.iter().any(|b| b.amount > auction.winning_bid) {
        return Some(Inconsistency::BidAboveWinningPrice);
    }
    if auction.start_time_sec.checked_sub(auction.end_time_sec) != Some(auction.auction_duration_sec) {
        return Some(Inconsistency::DurationMismatch);
    }
    if auction
        .bids
        .iter()
        .any(|b| b.submit_time_sec < auction.end_time_sec || b.submit_time_sec > auction.start_time_sec)
    {
        return Some(Inconsistency::BidOutsideWindow);
    }
    None
}

/// Splits off inconsistent auctions, tagged with the reason.
pub fn filter_inconsistent_auctions(
    auctions: Vec<StagedAuction>,
) -> (Vec<StagedAuction>, Vec<(StagedAuction, Inconsistency)>) {
    let mut kept = Vec::with_capacity(auctions.len());
    let mut removed = Vec::new();
    for a in auctions {
        match inconsistency(&a) {
            Some(reason) => removed.push((a, reason)),
            None => kept.push(a),
        }
    }
    (kept, removed)
}

/// Numbers auctions 1..N, earliest start first (largest countdown), ties by
/// key; then numbers rows 1..M in auction order and chronological order
/// within each auction.
pub fn assign_identifiers(mut auctions: Vec<StagedAuction>) -> Result<Vec<BidRecord>, PreprocessError> {
    auctions.sort_by(|a, b| b.start_time_sec.cmp(&a.start_time_sec).then_with(|| a.key.cmp(&b.key)));
    let mut seen: HashMap<&str, ()> = HashMap::with_capacity(auctions.len());
    for a in &auctions {
        if seen.insert(a.key.as_str(), ()).is_some() {
            return Err(PreprocessError::DuplicateAuctionKey(a.key.clone()));
        }
    }
    let total: usize = auctions.iter().map(|a| a.bids.len()).sum();
    let mut out = Vec::with_capacity(total);
    let mut record_id = 0u64;
    for (idx, a) in auctions.iter().enumerate() {
        let info = AuctionInfo {
            auction_id: idx as u64 + 1,
            seller_id: a.seller_id.clone(),
            num_bidders: a.num_bidders.unwrap_or(0),
            num_bids: a.num_bids.unwrap_or(0),
            starting_price: a.starting_price,
            winning_bid: a.winning_bid,
            auction_duration_sec: a.auction_duration_sec,
            start_time_sec: a.start_time_sec,
            end_time_sec: a.end_time_sec,
        };
        for line in &a.bids {
            record_id += 1;
            let bid = Bid {
                record_id,
                bidder_id: line.bidder_id.clone(),
                amount: line.amount,
                submit_time_sec: line.submit_time_sec,
            };
            out.push(BidRecord::from_parts(record_id, &info, &bid));
        }
    }
    Ok(out)
}
