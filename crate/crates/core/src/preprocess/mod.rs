//! Cleansing and transformation of a raw scrape into the preprocessed bid
//! table.
//!
//! Stages run in a fixed order: column projection, exact-duplicate removal,
//! missing-bidder removal, field conversion, grouping, the optional
//! winning-price filter, the low-activity filter, the consistency filter,
//! count reconciliation and identifier assignment. Every removal is counted
//! in a [`CleansingReport`].

mod auctions;
mod clean;
mod convert;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

pub use auctions::{
    assign_identifiers, filter_inconsistent_auctions, filter_low_activity_auctions, group_auctions, inconsistency,
    reconcile_counts, CountAdjustment, Inconsistency, StagedAuction, StagedBid, StagedBidLine,
};
pub use clean::{dedup_records, drop_irrelevant_columns, drop_missing_bidder};
pub use convert::{
    duration_days_to_seconds, merge_datetime, parse_count, parse_duration_days, parse_money, to_countdown_seconds,
    ParseError, ReferenceEpoch, STANDARD_DURATIONS,
};

use crate::ingest::{
    read_preprocessed_from, read_raw_from, validate_records, IngestError, RawField, RawRecord, RawSchema, RawTable,
    SchemaReport, PREPROCESSED_HEADER,
};
use crate::model::{BidRecord, ModelError, Money, SECONDS_PER_DAY};

#[derive(Debug, thiserror::Error)]
pub enum PreprocessError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("row {row}, {field} `{value}`: {source}")]
    Field { row: u64, field: RawField, value: String, source: ParseError },
    #[error("auction `{key}`: rows disagree on {field}")]
    ConflictingAuction { key: String, field: &'static str },
    #[error("auction key `{0}` maps to two bid sets")]
    DuplicateAuctionKey(String),
    #[error("cleaned data violates an invariant: {0}")]
    Invariant(#[from] ModelError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub schema: RawSchema,
    pub epoch: ReferenceEpoch,
    /// Auctions with fewer bid rows are removed.
    pub min_bids: usize,
    /// Optional scrape filter: auctions selling below this are removed.
    pub min_winning_price: Option<Money>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            schema: RawSchema::default(),
            epoch: ReferenceEpoch::default(),
            min_bids: 5,
            min_winning_price: None,
        }
    }
}

/// Descriptive totals of a dataset, taken before and after cleansing.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DatasetTotals {
    pub auctions: usize,
    pub records: usize,
    pub bidder_ids: usize,
    pub seller_ids: usize,
    pub attributes: usize,
    pub avg_winning_price: Option<f64>,
    pub mean_duration_days: Option<f64>,
    /// Most frequent duration; ties go to the shorter one.
    pub mode_duration_days: Option<i64>,
}

impl DatasetTotals {
    fn from_auctions<'a>(
        auctions: usize,
        records: usize,
        bidder_ids: usize,
        seller_ids: usize,
        attributes: usize,
        per_auction: impl Iterator<Item = (Option<Money>, Option<i64>)> + 'a,
    ) -> Self {
        let mut price_sum = 0i128;
        let mut price_n = 0usize;
        let mut durations: BTreeMap<i64, usize> = BTreeMap::new();
        for (price, days) in per_auction {
            if let Some(p) = price {
                price_sum += p.cents() as i128;
                price_n += 1;
            }
            if let Some(d) = days {
                *durations.entry(d).or_default() += 1;
            }
        }
        let dur_n: usize = durations.values().sum();
        let dur_sum: i64 = durations.iter().map(|(d, n)| d * *n as i64).sum();
        let mode = durations.iter().fold(None, |best: Option<(i64, usize)>, (&d, &n)| match best {
            Some((_, bn)) if bn >= n => best,
            _ => Some((d, n)),
        });
        DatasetTotals {
            auctions,
            records,
            bidder_ids,
            seller_ids,
            attributes,
            avg_winning_price: (price_n > 0).then(|| price_sum as f64 / price_n as f64 / 100.0),
            mean_duration_days: (dur_n > 0).then(|| dur_sum as f64 / dur_n as f64),
            mode_duration_days: mode.map(|(d, _)| d),
        }
    }

    /// Totals of a raw table read with `schema`. Unparseable prices and
    /// durations are left out of the averages.
    pub fn of_raw(table: &RawTable, schema: &RawSchema) -> Self {
        let idx = |f: RawField| table.column_index(schema.header(f));
        let (url, bidder, seller, winning, duration) = (
            idx(RawField::AuctionUrl),
            idx(RawField::BidderId),
            idx(RawField::SellerId),
            idx(RawField::WinningPrice),
            idx(RawField::DurationDays),
        );
        let get = |r: &'_ RawRecord, i: Option<usize>| -> Option<String> {
            i.and_then(|i| r.get(i)).map(str::trim).filter(|v| !v.is_empty()).map(str::to_string)
        };
        let mut first_row: BTreeMap<String, &RawRecord> = BTreeMap::new();
        let mut bidders = HashSet::new();
        let mut sellers = HashSet::new();
        for r in table.rows() {
            if let Some(u) = get(r, url) {
                first_row.entry(u).or_insert(r);
            }
            if let Some(b) = get(r, bidder) {
                bidders.insert(b);
            }
            if let Some(s) = get(r, seller) {
                sellers.insert(s);
            }
        }
        let per_auction = first_row.values().map(|r| {
            let price = get(r, winning).and_then(|v| parse_money(&v).ok());
            let days = get(r, duration).and_then(|v| parse_duration_days(&v).ok()).filter(|d| *d > 0);
            (price, days)
        });
        Self::from_auctions(
            first_row.len(),
            table.len(),
            bidders.len(),
            sellers.len(),
            table.columns().len(),
            per_auction,
        )
    }

    pub fn of_records(records: &[BidRecord]) -> Self {
        let mut auctions: BTreeMap<u64, &BidRecord> = BTreeMap::new();
        let mut bidders = HashSet::new();
        let mut sellers = HashSet::new();
        for r in records {
            auctions.entry(r.auction_id).or_insert(r);
            if !clean::is_missing(&r.bidder_id) {
                bidders.insert(r.bidder_id.as_str());
            }
            sellers.insert(r.seller_id.as_str());
        }
        let per_auction = auctions.values().map(|r| {
            let days = (r.auction_duration_sec / SECONDS_PER_DAY) as i64;
            (Some(r.winning_bid), (days > 0).then_some(days))
        });
        Self::from_auctions(
            auctions.len(),
            records.len(),
            bidders.len(),
            sellers.len(),
            PREPROCESSED_HEADER.len(),
            per_auction,
        )
    }
}

/// Counts for every cleansing rule plus before/after totals.
///
/// Conservation holds by construction:
/// `before.records = after.records + duplicate + missing_bidder + low_bid +
/// inconsistent + scrape_filter` rows, and the same for auctions (auctions
/// left without any row by the row-level rules count as low-bid removals).
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CleansingReport {
    pub irrelevant_columns_dropped: usize,
    pub duplicate_records_removed: usize,
    pub missing_bidder_rows_removed: usize,
    pub low_bid_auctions_removed: usize,
    pub low_bid_rows_removed: usize,
    pub inconsistent_auctions_removed: usize,
    pub inconsistent_rows_removed: usize,
    pub inconsistent_reasons: BTreeMap<Inconsistency, usize>,
    pub scrape_filter_auctions_removed: usize,
    pub scrape_filter_rows_removed: usize,
    pub num_bids_adjusted: usize,
    pub num_bidders_adjusted: usize,
    pub before: DatasetTotals,
    pub after: DatasetTotals,
}

impl CleansingReport {
    pub fn rows_removed(&self) -> usize {
        self.duplicate_records_removed
            + self.missing_bidder_rows_removed
            + self.low_bid_rows_removed
            + self.inconsistent_rows_removed
            + self.scrape_filter_rows_removed
    }

    pub fn auctions_removed(&self) -> usize {
        self.low_bid_auctions_removed + self.inconsistent_auctions_removed + self.scrape_filter_auctions_removed
    }

    /// True when no row or auction was removed and no count was adjusted.
    /// Column projection is not a removal.
    pub fn is_clean(&self) -> bool {
        self.rows_removed() == 0 && self.auctions_removed() == 0 && self.num_bids_adjusted == 0 && self.num_bidders_adjusted == 0
    }

    pub fn is_conserved(&self) -> bool {
        self.before.records == self.after.records + self.rows_removed()
            && self.before.auctions == self.after.auctions + self.auctions_removed()
    }
}

/// Cleansed records plus the report; `schema` is present for raw input.
#[derive(Debug, Clone)]
pub struct PreprocessOutcome {
    pub records: Vec<BidRecord>,
    pub report: CleansingReport,
    pub schema: Option<SchemaReport>,
}

fn stage_row(rec: &RawRecord, epoch: &ReferenceEpoch) -> Result<StagedBid, PreprocessError> {
    let get = |f: RawField| rec.get(f as usize).unwrap_or("").trim();
    let fail = |f: RawField, source: ParseError| PreprocessError::Field {
        row: rec.row(),
        field: f,
        value: get(f).to_string(),
        source,
    };
    let required = |f: RawField| -> Result<String, PreprocessError> {
        let v = get(f);
        if v.is_empty() {
            Err(fail(f, ParseError::Missing))
        } else {
            Ok(v.to_string())
        }
    };
    let money = |f: RawField| parse_money(get(f)).map_err(|e| fail(f, e));
    let moment = |d: RawField, t: RawField| {
        merge_datetime(get(d), get(t)).and_then(|ts| epoch.countdown(ts)).map_err(|e| fail(d, e))
    };
    let days = parse_duration_days(get(RawField::DurationDays)).map_err(|e| fail(RawField::DurationDays, e))?;
    Ok(StagedBid {
        source_row: rec.row(),
        auction_key: required(RawField::AuctionUrl)?,
        seller_id: required(RawField::SellerId)?,
        bidder_id: get(RawField::BidderId).to_string(),
        bid_amount: money(RawField::BidAmount)?,
        bid_submit_time_sec: moment(RawField::BidDate, RawField::BidTime)?,
        scraped_num_bids: parse_count(get(RawField::NumBids)).ok(),
        scraped_num_bidders: parse_count(get(RawField::NumBidders)).ok(),
        starting_price: money(RawField::StartingPrice)?,
        winning_bid: money(RawField::WinningPrice)?,
        auction_duration_sec: duration_days_to_seconds(days).map_err(|e| fail(RawField::DurationDays, e))?,
        start_time_sec: moment(RawField::StartDate, RawField::StartTime)?,
        end_time_sec: moment(RawField::EndDate, RawField::EndTime)?,
    })
}

/// Runs every stage on a raw table read with `config.schema`.
pub fn run_pipeline(table: RawTable, config: &PipelineConfig) -> Result<(Vec<BidRecord>, CleansingReport), PreprocessError> {
    let mut report = CleansingReport { before: DatasetTotals::of_raw(&table, &config.schema), ..Default::default() };
    let width = table.columns().len();
    let table = drop_irrelevant_columns(table, &config.schema.keep_list())?;
    report.irrelevant_columns_dropped = width - table.columns().len();
    let (table, dups) = dedup_records(table);
    report.duplicate_records_removed = dups;
    let (table, missing) = drop_missing_bidder(table, config.schema.header(RawField::BidderId))?;
    report.missing_bidder_rows_removed = missing;

    let staged: Vec<Result<StagedBid, PreprocessError>> =
        table.rows().par_iter().map(|r| stage_row(r, &config.epoch)).collect();
    drop(table);
    let staged = staged.into_iter().collect::<Result<Vec<_>, _>>()?;
    finish(staged, config, report)
}

/// Re-applies the pipeline to already-preprocessed records. Auction and
/// record ids of clean input are reproduced exactly.
pub fn reprocess(records: Vec<BidRecord>, config: &PipelineConfig) -> Result<(Vec<BidRecord>, CleansingReport), PreprocessError> {
    let mut report = CleansingReport {
        before: DatasetTotals::of_records(&records),
        ..Default::default()
    };
    let mut seen: HashSet<&BidRecord> = HashSet::with_capacity(records.len());
    let mut staged = Vec::with_capacity(records.len());
    for r in &records {
        if !seen.insert(r) {
            report.duplicate_records_removed += 1;
            continue;
        }
        if clean::is_missing(&r.bidder_id) {
            report.missing_bidder_rows_removed += 1;
            continue;
        }
        staged.push(StagedBid {
            source_row: r.record_id,
            auction_key: format!("{:020}", r.auction_id),
            seller_id: r.seller_id.clone(),
            bidder_id: r.bidder_id.clone(),
            bid_amount: r.bid_amount,
            bid_submit_time_sec: r.bid_submit_time_sec,
            scraped_num_bids: Some(r.num_bids),
            scraped_num_bidders: Some(r.num_bidders),
            starting_price: r.starting_price,
            winning_bid: r.winning_bid,
            auction_duration_sec: r.auction_duration_sec,
            start_time_sec: r.start_time_sec,
            end_time_sec: r.end_time_sec,
        });
    }
    drop(seen);
    finish(staged, config, report)
}

fn finish(
    staged: Vec<StagedBid>,
    config: &PipelineConfig,
    mut report: CleansingReport,
) -> Result<(Vec<BidRecord>, CleansingReport), PreprocessError> {
    let auctions = group_auctions(staged)?;
    // auctions whose every row was dropped above
    report.low_bid_auctions_removed += report.before.auctions.saturating_sub(auctions.len());

    let odd: BTreeSet<u64> = auctions
        .iter()
        .map(|a| a.auction_duration_sec / SECONDS_PER_DAY)
        .filter(|d| !STANDARD_DURATIONS.contains(&(*d as i64)))
        .collect();
    for d in odd {
        log::warn!("non-standard auction duration of {d} days");
    }

    let auctions = match config.min_winning_price {
        Some(min) => {
            let (kept, removed): (Vec<_>, Vec<_>) = auctions.into_iter().partition(|a| a.winning_bid >= min);
            report.scrape_filter_auctions_removed = removed.len();
            report.scrape_filter_rows_removed = removed.iter().map(|a| a.bids.len()).sum();
            kept
        }
        None => auctions,
    };

    let (auctions, thin) = filter_low_activity_auctions(auctions, config.min_bids);
    report.low_bid_auctions_removed += thin.len();
    report.low_bid_rows_removed = thin.iter().map(|a| a.bids.len()).sum();

    let (mut auctions, bad) = filter_inconsistent_auctions(auctions);
    report.inconsistent_auctions_removed = bad.len();
    report.inconsistent_rows_removed = bad.iter().map(|(a, _)| a.bids.len()).sum();
    for (_, reason) in &bad {
        *report.inconsistent_reasons.entry(*reason).or_default() += 1;
    }

    for a in &mut auctions {
        let adj = reconcile_counts(a);
        report.num_bids_adjusted += adj.num_bids as usize;
        report.num_bidders_adjusted += adj.num_bidders as usize;
    }

    let records = assign_identifiers(auctions)?;
    validate_records(&records)?;
    report.after = DatasetTotals::of_records(&records);
    Ok((records, report))
}

/// Which format a CSV file holds, judged from its header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Raw,
    Preprocessed,
}

pub fn detect_input(path: &Path) -> Result<InputKind, IngestError> {
    let file = std::fs::File::open(path).map_err(crate::ingest::io_err(path))?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first).map_err(crate::ingest::io_err(path))?;
    let header = first.trim_end_matches(['\r', '\n']).trim_start_matches('\u{feff}');
    Ok(if header == PREPROCESSED_HEADER.join(",") { InputKind::Preprocessed } else { InputKind::Raw })
}

/// Preprocesses a file of either format. Raw input goes through every
/// stage; preprocessed input is re-cleansed (a fixed point when clean).
pub fn preprocess_file(path: &Path, config: &PipelineConfig) -> Result<PreprocessOutcome, PreprocessError> {
    let open = || std::fs::File::open(path).map_err(crate::ingest::io_err(path));
    match detect_input(path)? {
        InputKind::Preprocessed => {
            let records = read_preprocessed_from(BufReader::with_capacity(1 << 20, open()?), path)?;
            let (records, report) = reprocess(records, config)?;
            Ok(PreprocessOutcome { records, report, schema: None })
        }
        InputKind::Raw => {
            let (table, schema) = read_raw_from(BufReader::with_capacity(1 << 20, open()?), path, &config.schema)?;
            let (records, report) = run_pipeline(table, config)?;
            Ok(PreprocessOutcome { records, report, schema: Some(schema) })
        }
    }
}

/// Same as [`preprocess_file`] but over in-memory raw CSV bytes.
pub fn preprocess_raw_bytes(bytes: &[u8], config: &PipelineConfig) -> Result<PreprocessOutcome, PreprocessError> {
    let (table, schema) = read_raw_from(bytes, Path::new("<memory>"), &config.schema)?;
    let (records, report) = run_pipeline(table, config)?;
    Ok(PreprocessOutcome { records, report, schema: Some(schema) })
}
