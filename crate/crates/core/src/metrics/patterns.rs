//! The eight metric formulas. Each value is produced by a single integer
//! ratio where possible, so `f64` results are correctly rounded and exact
//! scalars are exact.

use super::{BidderParticipation, GlobalAggregates, MetricsError};
use crate::model::{AuctionInfo, AuctionView, SbInstance};
use crate::scalar::Scalar;

/// Share of the bidder's auctions held by `seller_id`; 0 for bidders seen
/// in only one auction.
pub fn bidder_tendency<T: Scalar>(agg: &GlobalAggregates, bidder_id: &str, seller_id: &str) -> Result<T, MetricsError> {
    let totals = agg.bidder(bidder_id)?;
    if totals.participate_all <= 1 {
        return Ok(T::zero());
    }
    Ok(T::ratio(i64::from(totals.participate_with_seller(seller_id)), i64::from(totals.participate_all)).clamp_unit())
}

/// 1 when the bidder's first bid lands at the opening, 0 at the close.
pub fn early_bidding<T: Scalar>(info: &AuctionInfo, p: &BidderParticipation) -> T {
    let duration = info.auction_duration_sec as i64;
    let elapsed = info.start_time_sec as i64 - p.first_bid_time_sec as i64;
    T::ratio(duration - elapsed, duration).clamp_unit()
}

pub fn bidding_ratio<T: Scalar>(info: &AuctionInfo, p: &BidderParticipation) -> T {
    T::ratio(i64::from(p.bid_count), i64::from(info.num_bids)).clamp_unit()
}

/// Fraction of the duration still remaining at the bidder's last bid.
pub fn last_bidding<T: Scalar>(info: &AuctionInfo, p: &BidderParticipation) -> T {
    let remaining = p.last_bid_time_sec as i64 - info.end_time_sec as i64;
    T::ratio(remaining, info.auction_duration_sec as i64).clamp_unit()
}

/// `1 - start / mean` when the starting price is strictly below the mean.
pub fn auction_starting_price<T: Scalar>(info: &AuctionInfo, agg: &GlobalAggregates) -> T {
    let n = agg.num_auctions();
    let sum = agg.starting_price_cents_sum();
    let scaled = info.starting_price.cents() * n;
    if scaled < sum {
        T::ratio(sum - scaled, sum).clamp_unit()
    } else {
        T::zero()
    }
}

/// Banded on the longest run of consecutive bids: 4 or more gives 1,
/// exactly 3 gives 0.5.
pub fn successive_outbidding<T: Scalar>(longest_run: u32) -> T {
    match longest_run {
        r if r >= 4 => T::one(),
        3 => T::half(),
        _ => T::zero(),
    }
}

/// `1 - won / high` over the bidder's high-participation auctions; 0 when
/// there are none.
pub fn winning_ratio<T: Scalar>(agg: &GlobalAggregates, bidder_id: &str) -> Result<T, MetricsError> {
    let t = agg.bidder(bidder_id)?;
    if t.high_part == 0 {
        return Ok(T::zero());
    }
    let high = i64::from(t.high_part);
    Ok(T::ratio(high - i64::from(t.high_part_won), high).clamp_unit())
}

/// `1 - mean / num_bids` when the auction has strictly more bids than the
/// mean.
pub fn auction_bids<T: Scalar>(info: &AuctionInfo, agg: &GlobalAggregates) -> T {
    let n = agg.num_auctions();
    let sum = agg.num_bids_sum();
    let scaled = i64::from(info.num_bids) * n;
    if scaled > sum {
        T::ratio(scaled - sum, scaled).clamp_unit()
    } else {
        T::zero()
    }
}

/// All eight metrics for one participant of `auction`.
pub fn instance_for<T: Scalar>(
    auction: &AuctionView,
    p: &BidderParticipation,
    agg: &GlobalAggregates,
) -> Result<SbInstance<T>, MetricsError> {
    let info = &auction.info;
    Ok(SbInstance::from_values(
        info.auction_id,
        p.bidder_id.clone(),
        [
            bidder_tendency(agg, &p.bidder_id, &info.seller_id)?,
            early_bidding(info, p),
            bidding_ratio(info, p),
            last_bidding(info, p),
            auction_starting_price(info, agg),
            successive_outbidding(p.longest_run),
            winning_ratio(agg, &p.bidder_id)?,
            auction_bids(info, agg),
        ],
    ))
}

/// Metrics for `bidder_id` in `auction`.
pub fn sb_instance<T: Scalar>(
    auction: &AuctionView,
    bidder_id: &str,
    agg: &GlobalAggregates,
) -> Result<SbInstance<T>, MetricsError> {
    let p = super::participation(auction)
        .into_iter()
        .find(|p| p.bidder_id == bidder_id)
        .ok_or_else(|| MetricsError::NotInAuction { auction_id: auction.info.auction_id, bidder_id: bidder_id.into() })?;
    instance_for(auction, &p, agg)
}
