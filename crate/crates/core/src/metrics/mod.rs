//! Global aggregates and the eight per-(auction, bidder) behavioral metrics.

mod aggregates;
mod patterns;
mod weighted;

pub use aggregates::{
    compute_global_aggregates, is_high_participation, participation, BidderParticipation, BidderTotals,
    GlobalAggregates,
};
pub use patterns::{
    auction_bids, auction_starting_price, bidder_tendency, bidding_ratio, early_bidding, instance_for, last_bidding,
    sb_instance, successive_outbidding, winning_ratio,
};
pub use weighted::{weighted_score, weighted_scores};

use crate::model::{ModelError, Pattern};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("no auctions to aggregate")]
    EmptyDataset,
    #[error("unknown bidder `{0}`")]
    UnknownBidder(String),
    #[error("bidder `{bidder_id}` placed no bid in auction {auction_id}")]
    NotInAuction { auction_id: u64, bidder_id: String },
    #[error("weight table has no entry for {0}")]
    MissingWeight(Pattern),
    #[error(transparent)]
    Model(#[from] ModelError),
}
