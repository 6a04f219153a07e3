//! SB dataset assembly, outlier scanning and summary statistics.

mod stats;

use rayon::prelude::*;
use serde::Serialize;

pub use stats::{
    format_stats_table, pattern_stats, winners_by_auction, BucketCount, Buckets, HighValueCount, PatternStats,
    StartingPriceBidders, StatsConfig,
};

use crate::ingest::validate_records;
use crate::metrics::{compute_global_aggregates, instance_for, participation, GlobalAggregates, MetricsError};
use crate::model::{AuctionView, BidRecord, ModelError, Pattern, SbInstance};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("no auctions in input")]
    Empty,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{} metric value(s) outside [0, 1]; first: {first}", .count)]
    Outliers { count: usize, first: Outlier },
}

/// One metric value outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outlier {
    pub auction_id: u64,
    pub bidder_id: String,
    pub pattern: Pattern,
    pub value: f64,
}

impl std::fmt::Display for Outlier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "auction {}, bidder {}: {} = {}", self.auction_id, self.bidder_id, self.pattern.code(), self.value)
    }
}

/// Every `(instance, metric)` whose value lies outside `[0, 1]`, in input
/// order.
pub fn scan_outliers<T: Scalar>(instances: &[SbInstance<T>]) -> Vec<Outlier> {
    instances
        .iter()
        .flat_map(|inst| {
            inst.out_of_range().map(move |(pattern, value)| Outlier {
                auction_id: inst.auction_id,
                bidder_id: inst.bidder_id.clone(),
                pattern,
                value: value.to_f64_lossy(),
            })
        })
        .collect()
}

/// One instance per distinct (auction, bidder), ordered by auction id then
/// bidder id. Auctions are evaluated in parallel; the output order does not
/// depend on the worker count.
pub fn build_sb_dataset<T: Scalar>(
    auctions: &[AuctionView],
    agg: &GlobalAggregates,
) -> Result<Vec<SbInstance<T>>, DatasetError> {
    let per_auction: Vec<Result<Vec<SbInstance<T>>, MetricsError>> = auctions
        .par_iter()
        .map(|a| participation(a).iter().map(|p| instance_for(a, p, agg)).collect())
        .collect();
    let mut out = Vec::new();
    for chunk in per_auction {
        out.extend(chunk?);
    }
    let outliers = scan_outliers(&out);
    if let Some(first) = outliers.first() {
        return Err(DatasetError::Outliers { count: outliers.len(), first: first.clone() });
    }
    Ok(out)
}

/// Validated auctions, their aggregates and the feature instances.
#[derive(Debug, Clone)]
pub struct Features<T> {
    pub auctions: Vec<AuctionView>,
    pub aggregates: GlobalAggregates,
    pub instances: Vec<SbInstance<T>>,
}

/// Validates preprocessed records and computes every instance.
pub fn features_from_records<T: Scalar>(records: &[BidRecord]) -> Result<Features<T>, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    let auctions = validate_records(records)?;
    let aggregates = compute_global_aggregates(&auctions)?;
    let instances = build_sb_dataset(&auctions, &aggregates)?;
    Ok(Features { auctions, aggregates, instances })
}
