use std::collections::{BTreeMap, HashMap};

use super::MetricsError;
use crate::model::{winner_of, AuctionView};
use crate::scalar::Scalar;

/// One bidder's activity inside one auction. Times are countdown seconds,
/// so the first bid has the larger value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BidderParticipation {
    pub bidder_id: String,
    pub first_bid_time_sec: u64,
    pub last_bid_time_sec: u64,
    pub bid_count: u32,
    /// Longest stretch of chronologically adjacent bids by this bidder.
    pub longest_run: u32,
}

/// Participants of an auction, ordered by bidder id.
pub fn participation(auction: &AuctionView) -> Vec<BidderParticipation> {
    let mut by_bidder: BTreeMap<&str, BidderParticipation> = BTreeMap::new();
    let mut run_owner: Option<&str> = None;
    let mut run = 0u32;
    for bid in auction.bids() {
        let who = bid.bidder_id.as_str();
        run = if run_owner == Some(who) { run + 1 } else { 1 };
        run_owner = Some(who);
        let p = by_bidder.entry(who).or_insert_with(|| BidderParticipation {
            bidder_id: who.to_string(),
            first_bid_time_sec: bid.submit_time_sec,
            last_bid_time_sec: bid.submit_time_sec,
            bid_count: 0,
            longest_run: 0,
        });
        p.bid_count += 1;
        p.last_bid_time_sec = bid.submit_time_sec;
        p.longest_run = p.longest_run.max(run);
    }
    by_bidder.into_values().collect()
}

/// More than a tenth of the auction's bids, checked without division.
pub fn is_high_participation(bid_count: u32, num_bids: u32) -> bool {
    10 * u64::from(bid_count) > u64::from(num_bids)
}

/// Cross-auction counts for one bidder.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BidderTotals {
    pub participate_all: u32,
    pub per_seller: BTreeMap<String, u32>,
    pub auctions_won: u32,
    /// Auctions where the bidder placed more than 10% of the bids.
    pub high_part: u32,
    /// Wins among `high_part` auctions.
    pub high_part_won: u32,
}

impl BidderTotals {
    pub fn participate_with_seller(&self, seller_id: &str) -> u32 {
        self.per_seller.get(seller_id).copied().unwrap_or(0)
    }
}

/// Dataset-wide means and per-bidder indexes. Sums are kept as integers so
/// strict comparisons against the means are exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalAggregates {
    num_auctions: i64,
    starting_price_cents_sum: i64,
    num_bids_sum: i64,
    bidders: HashMap<String, BidderTotals>,
}

impl GlobalAggregates {
    pub fn num_auctions(&self) -> i64 {
        self.num_auctions
    }

    pub fn starting_price_cents_sum(&self) -> i64 {
        self.starting_price_cents_sum
    }

    pub fn num_bids_sum(&self) -> i64 {
        self.num_bids_sum
    }

    /// Mean starting price in dollars.
    pub fn avg_auctions_start_price<T: Scalar>(&self) -> T {
        T::ratio(self.starting_price_cents_sum, self.num_auctions * 100)
    }

    pub fn avg_bid_all_auctions<T: Scalar>(&self) -> T {
        T::ratio(self.num_bids_sum, self.num_auctions)
    }

    pub fn bidder(&self, bidder_id: &str) -> Result<&BidderTotals, MetricsError> {
        self.bidders.get(bidder_id).ok_or_else(|| MetricsError::UnknownBidder(bidder_id.to_string()))
    }

    pub fn bidder_count(&self) -> usize {
        self.bidders.len()
    }
}

/// Sequential reduction over validated auctions.
pub fn compute_global_aggregates(auctions: &[AuctionView]) -> Result<GlobalAggregates, MetricsError> {
    if auctions.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    let mut agg = GlobalAggregates {
        num_auctions: auctions.len() as i64,
        starting_price_cents_sum: 0,
        num_bids_sum: 0,
        bidders: HashMap::new(),
    };
    for auction in auctions {
        let info = &auction.info;
        agg.starting_price_cents_sum += info.starting_price.cents();
        agg.num_bids_sum += i64::from(info.num_bids);
        let winner = winner_of(auction)?.bidder_id.as_str();
        for p in participation(auction) {
            let won = p.bidder_id == winner;
            let high = is_high_participation(p.bid_count, info.num_bids);
            let t = agg.bidders.entry(p.bidder_id).or_default();
            t.participate_all += 1;
            *t.per_seller.entry(info.seller_id.clone()).or_default() += 1;
            t.auctions_won += u32::from(won);
            t.high_part += u32::from(high);
            t.high_part_won += u32::from(high && won);
        }
    }
    Ok(agg)
}
