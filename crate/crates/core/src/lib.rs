//! Shill-bidding feature extraction for online auction data.
//!
//! The crate turns a raw scrape of auction bid histories into a cleaned,
//! typed bid table ([`preprocess`]), computes eight behavioral metrics for
//! every (auction, bidder) pair ([`metrics`], [`dataset`]) and can generate
//! synthetic corpora with planted shill bidders ([`synth`]).
//!
//! Metric code is generic over [`Scalar`]; the aliases below fix it to
//! `f64`, `f32` or an exact rational.

pub mod dataset;
mod error;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod preprocess;
pub mod scalar;
pub mod synth;

pub use error::{Error, ErrorKind};
pub use scalar::{Rational, Scalar};

pub type SbInstanceF64 = model::SbInstance<f64>;
pub type SbInstanceF32 = model::SbInstance<f32>;
pub type SbInstanceExact = model::SbInstance<Rational>;
pub type WeightConfigF64 = model::WeightConfig<f64>;
pub type WeightConfigExact = model::WeightConfig<Rational>;
pub type StatsConfigF64 = dataset::StatsConfig<f64>;
pub type FeaturesF64 = dataset::Features<f64>;

pub type Result<T, E = Error> = std::result::Result<T, E>;
