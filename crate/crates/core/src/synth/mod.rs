//! Synthetic raw auction corpora with planted shill bidders and injected
//! data defects, for exercising the pipeline against known truth.
//!
//! Generation is single-threaded and driven by one seeded ChaCha stream, so
//! a seed fully determines the output bytes.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use chrono::Duration;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ingest::{RawField, RawRecord, RawTable};
use crate::model::{Money, SECONDS_PER_DAY};
use crate::preprocess::{ReferenceEpoch, STANDARD_DURATIONS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
}

/// Per-corpus defect injection probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectRates {
    /// Each original row is emitted twice with this probability.
    pub duplicate_rows: f64,
    /// Each original row gets an extra copy with the bidder id blanked.
    pub missing_bidder: f64,
    /// An auction receives only 1 to 4 bids.
    pub thin_auctions: f64,
    /// A non-thin auction gets a starting price above its winning price or
    /// a winning price below its last bid.
    pub inconsistent_prices: f64,
    /// A clean auction has its scraped bid and bidder counts inflated.
    pub count_mismatch: f64,
}

impl DefectRates {
    pub const NONE: DefectRates = DefectRates {
        duplicate_rows: 0.0,
        missing_bidder: 0.0,
        thin_auctions: 0.0,
        inconsistent_prices: 0.0,
        count_mismatch: 0.0,
    };
}

impl Default for DefectRates {
    fn default() -> Self {
        DefectRates {
            duplicate_rows: 0.05,
            missing_bidder: 0.01,
            thin_auctions: 0.10,
            inconsistent_prices: 0.05,
            count_mismatch: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub num_auctions: usize,
    /// Relative weights of 1, 3, 5, 7 and 10 day auctions.
    pub duration_weights: [u32; 5],
    pub honest_pool: usize,
    pub num_sellers: usize,
    /// Fraction of sellers that collude with one bound shill bidder.
    pub shill_fraction: f64,
    /// Consecutive bids each shill places in each of its auctions.
    pub shill_run_length: u32,
    /// Shill runs fall inside this leading fraction of the duration.
    pub shill_entry_fraction: f64,
    /// Inclusive range of bids per regular auction.
    pub bids_per_auction: (u32, u32),
    /// Inclusive starting-price range in cents.
    pub starting_price_cents: (i64, i64),
    pub min_increment: Money,
    /// Largest extra amount added on top of the minimum increment, cents.
    pub max_extra_increment_cents: i64,
    pub epoch: ReferenceEpoch,
    /// Auctions start no earlier than this many days before the epoch.
    pub window_days: u32,
    pub defects: DefectRates,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig::scaled(42, 200)
    }
}

impl SynthConfig {
    /// Defaults with the bidder pool and seller count sized for
    /// `num_auctions`.
    pub fn scaled(seed: u64, num_auctions: usize) -> Self {
        SynthConfig {
            seed,
            num_auctions,
            duration_weights: [166, 187, 131, 309, 14],
            honest_pool: (num_auctions * 3 / 2).max(20),
            num_sellers: (num_auctions / 3).max(1),
            shill_fraction: 0.1,
            shill_run_length: 4,
            shill_entry_fraction: 0.25,
            bids_per_auction: (5, 30),
            starting_price_cents: (99, 60_000),
            min_increment: Money::from_dollars(5),
            max_extra_increment_cents: 2_500,
            epoch: ReferenceEpoch::default(),
            window_days: 128,
            defects: DefectRates::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::Infeasible(msg));
        let (lo, hi) = self.bids_per_auction;
        let probs = [
            ("shill fraction", self.shill_fraction),
            ("shill entry fraction", self.shill_entry_fraction),
            ("duplicate rate", self.defects.duplicate_rows),
            ("missing bidder rate", self.defects.missing_bidder),
            ("thin auction rate", self.defects.thin_auctions),
            ("inconsistent price rate", self.defects.inconsistent_prices),
            ("count mismatch rate", self.defects.count_mismatch),
        ];
        if self.num_auctions == 0 {
            return bad("at least one auction is required".into());
        }
        if let Some((name, p)) = probs.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
            return bad(format!("{name} {p} is not a probability"));
        }
        if self.shill_run_length < 2 {
            return bad(format!("shill run length {} is below 2", self.shill_run_length));
        }
        if lo > hi || lo == 0 {
            return bad(format!("bids per auction range {lo}..={hi} is empty"));
        }
        if self.shill_fraction > 0.0 && self.shill_run_length + 1 > lo {
            return bad(format!(
                "shill run length {} leaves no room for a later honest bid in a {lo}-bid auction",
                self.shill_run_length
            ));
        }
        if self.honest_pool < 2 {
            return bad("honest bidder pool needs at least two bidders".into());
        }
        if self.num_sellers == 0 {
            return bad("at least one seller is required".into());
        }
        if self.duration_weights.iter().all(|w| *w == 0) {
            return bad("duration weights are all zero".into());
        }
        let (p_lo, p_hi) = self.starting_price_cents;
        if p_lo < 0 || p_lo > p_hi {
            return bad(format!("starting price range {p_lo}..={p_hi} cents is invalid"));
        }
        if self.min_increment <= Money::ZERO || self.max_extra_increment_cents < 0 {
            return bad("bid increments must be positive".into());
        }
        let longest = STANDARD_DURATIONS[4] as u64 * SECONDS_PER_DAY;
        if u64::from(self.window_days) * SECONDS_PER_DAY < longest + 3600 {
            return bad(format!("a {}-day window cannot hold a 10-day auction", self.window_days));
        }
        // countdown seconds must be distinct within an auction
        if u64::from(hi) > SECONDS_PER_DAY / 4 {
            return bad(format!("{hi} bids per auction is too many"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Shill,
    Honest,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Shill => "shill",
            Label::Honest => "honest",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TruthLabel {
    pub auction_url: String,
    pub bidder_id: String,
    pub label: Label,
}

/// Exactly what was injected; a cleansing run over the corpus reports the
/// same numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DefectManifest {
    pub duplicate_rows: usize,
    pub missing_bidder_rows: usize,
    pub thin_auctions: usize,
    pub thin_rows: usize,
    pub inconsistent_auctions: usize,
    pub inconsistent_rows: usize,
    pub count_mismatch_auctions: usize,
    pub shill_bidders: usize,
    pub total_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub table: RawTable,
    /// Sorted by URL, then bidder id.
    pub truth: Vec<TruthLabel>,
    pub defects: DefectManifest,
}

/// Columns emitted besides the logical fields; the pipeline drops them.
const EXTRA_COLUMNS: [&str; 13] = [
    "Item Title",
    "Item Condition",
    "Item Location",
    "Product ID",
    "Seller Feedback Score",
    "Seller Positive Rate",
    "Bidder Feedback Score",
    "Shipping Cost",
    "Returns Accepted",
    "Category",
    "Payment Methods",
    "Watchers",
    "Listing Views",
];

const CONDITIONS: [&str; 4] = ["New", "Open box", "Used", "For parts or not working"];
const LOCATIONS: [&str; 6] = ["Toronto, ON", "Austin, TX", "Miami, FL", "Seattle, WA", "Chicago, IL", "Denver, CO"];

struct AuctionPlan {
    url: String,
    seller: String,
    duration_days: i64,
    start: u64,
    end: u64,
    starting_price: Money,
    winning: Money,
    scraped_bids: u32,
    scraped_bidders: u32,
    /// (bidder, amount, countdown) in chronological order.
    bids: Vec<(String, Money, u64)>,
    extras: Vec<String>,
}

pub fn generate(config: &SynthConfig) -> Result<SynthCorpus, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let durations = WeightedIndex::new(config.duration_weights).expect("validated weights");

    let sellers: Vec<String> = (0..config.num_sellers).map(|i| format!("seller{:05}", i + 1)).collect();
    let honest: Vec<String> = (0..config.honest_pool).map(|i| format!("bidder{:06}", i + 1)).collect();
    let colluding = ((config.shill_fraction * config.num_sellers as f64).round() as usize).min(config.num_sellers);
    let shill_of: Vec<Option<String>> = {
        let chosen: HashSet<usize> =
            index::sample(&mut rng, config.num_sellers, colluding).into_iter().collect();
        (0..config.num_sellers).map(|i| chosen.contains(&i).then(|| format!("partner{:05}", i + 1))).collect()
    };

    let mut manifest = DefectManifest {
        shill_bidders: colluding,
        ..Default::default()
    };
    let mut urls = HashSet::new();
    let mut truth = BTreeSet::new();
    let mut plans = Vec::with_capacity(config.num_auctions);
    for _ in 0..config.num_auctions {
        let url = loop {
            let u = format!("https://www.ebay.com/itm/{}", rng.gen_range(100_000_000_000u64..1_000_000_000_000));
            if urls.insert(u.clone()) {
                break u;
            }
        };
        let seller_idx = rng.gen_range(0..config.num_sellers);
        let days = STANDARD_DURATIONS[durations.sample(&mut rng)];
        let duration = days as u64 * SECONDS_PER_DAY;
        let latest_start = u64::from(config.window_days) * SECONDS_PER_DAY;
        let start = rng.gen_range(duration + 3600..=latest_start);
        let end = start - duration;

        let thin = rng.gen_bool(config.defects.thin_auctions);
        let shill = if thin { None } else { shill_of[seller_idx].clone() };
        let n = if thin { rng.gen_range(1..=4) } else { rng.gen_range(config.bids_per_auction.0..=config.bids_per_auction.1) };
        let run = if shill.is_some() { config.shill_run_length } else { 0 };
        let honest_bids = n - run;

        // honest bidders, never bidding twice in a row
        let k = ((f64::from(honest_bids) * rng.gen_range(0.35..0.6)).round() as usize)
            .clamp(usize::from(honest_bids >= 2) + 1, honest_bids as usize)
            .min(config.honest_pool);
        let participants: Vec<&String> = index::sample(&mut rng, config.honest_pool, k).into_iter().map(|i| &honest[i]).collect();
        let mut sequence: Vec<&String> = participants.clone();
        sequence.shuffle(&mut rng);
        while sequence.len() < honest_bids as usize {
            let prev = *sequence.last().expect("k >= 1");
            let next = loop {
                let c = participants[rng.gen_range(0..k)];
                if c != prev || k == 1 {
                    break c;
                }
            };
            sequence.push(next);
        }

        // timestamps: shill run plus any leading honest bids inside the
        // entry window, the rest after it
        let entry = ((duration as f64 * config.shill_entry_fraction) as u64).max(u64::from(run) + 2);
        let lead = if run > 0 { rng.gen_range(0..=honest_bids.saturating_sub(1).min(2)) } else { 0 };
        let early_count = (lead + run) as usize;
        let late_count = n as usize - early_count;
        let mut times: Vec<u64> = Vec::with_capacity(n as usize);
        if run > 0 {
            let mut early: Vec<u64> =
                index::sample(&mut rng, entry as usize, early_count).into_iter().map(|i| start - i as u64).collect();
            early.sort_unstable_by(|a, b| b.cmp(a));
            let span = (duration - entry) as usize;
            let mut late: Vec<u64> =
                index::sample(&mut rng, span, late_count).into_iter().map(|i| end + i as u64).collect();
            late.sort_unstable_by(|a, b| b.cmp(a));
            times.extend(early);
            times.extend(late);
        } else {
            let mut all: Vec<u64> =
                index::sample(&mut rng, duration as usize, n as usize).into_iter().map(|i| end + i as u64).collect();
            all.sort_unstable_by(|a, b| b.cmp(a));
            times = all;
        }

        let mut who: Vec<String> = Vec::with_capacity(n as usize);
        who.extend(sequence[..lead as usize].iter().map(|s| s.to_string()));
        if let Some(s) = &shill {
            who.extend((0..run).map(|_| s.clone()));
        }
        who.extend(sequence[lead as usize..].iter().map(|s| s.to_string()));

        let starting_price = Money::from_cents(rng.gen_range(config.starting_price_cents.0..=config.starting_price_cents.1));
        let mut amount = starting_price;
        let bids: Vec<(String, Money, u64)> = who
            .into_iter()
            .zip(times)
            .map(|(b, t)| {
                let extra = rng.gen_range(0..=config.max_extra_increment_cents);
                amount = Money::from_cents(amount.cents() + config.min_increment.cents() + extra);
                (b, amount, t)
            })
            .collect();
        let mut winning = amount;
        let mut starting = starting_price;
        let distinct = bids.iter().map(|b| b.0.as_str()).collect::<HashSet<_>>().len() as u32;
        let (mut scraped_bids, mut scraped_bidders) = (n, distinct);

        if thin {
            manifest.thin_auctions += 1;
            manifest.thin_rows += n as usize;
        } else if rng.gen_bool(config.defects.inconsistent_prices) {
            manifest.inconsistent_auctions += 1;
            manifest.inconsistent_rows += n as usize;
            if rng.gen_bool(0.5) {
                starting = Money::from_cents(winning.cents() + rng.gen_range(100..=10_000));
            } else {
                winning = Money::from_cents(winning.cents() - config.min_increment.cents());
            }
        } else if rng.gen_bool(config.defects.count_mismatch) {
            manifest.count_mismatch_auctions += 1;
            scraped_bids += rng.gen_range(1..=3);
            scraped_bidders += rng.gen_range(1..=2);
        }

        for (b, _, _) in &bids {
            let label = if Some(b) == shill.as_ref() { Label::Shill } else { Label::Honest };
            truth.insert(TruthLabel { auction_url: url.clone(), bidder_id: b.clone(), label });
        }

        let extras = vec![
            "Apple iPhone 7 32GB".to_string(),
            CONDITIONS.choose(&mut rng).expect("non-empty").to_string(),
            LOCATIONS.choose(&mut rng).expect("non-empty").to_string(),
            format!("{}", rng.gen_range(100_000u32..999_999)),
            format!("{}", rng.gen_range(0u32..5_000)),
            format!("{:.1}%", rng.gen_range(90.0f64..100.0)),
            String::new(),
            format!("{} $", Money::from_cents(rng.gen_range(0..=2_500))),
            if rng.gen_bool(0.5) { "Yes" } else { "No" }.to_string(),
            "Cell Phones & Accessories".to_string(),
            "PayPal".to_string(),
            format!("{}", rng.gen_range(0u32..300)),
            String::new(),
        ];
        plans.push(AuctionPlan {
            url,
            seller: sellers[seller_idx].clone(),
            duration_days: days,
            start,
            end,
            starting_price: starting,
            winning,
            scraped_bids,
            scraped_bidders,
            bids,
            extras,
        });
    }

    let mut rows: Vec<RawRecord> = Vec::new();
    for plan in plans {
        for (bidder, amount, t) in &plan.bids {
            let mut row = format_row(&plan, bidder, *amount, *t, &config.epoch, &mut rng);
            // per-row noise in the dropped columns
            row[RawField::ALL.len() + 6] = format!("{}", rng.gen_range(0u32..2_000));
            row[RawField::ALL.len() + 12] = format!("{}", rng.gen_range(0u32..10_000));
            rows.push(RawRecord::new(0, &row));
        }
    }
    let originals = rows.len();
    let bidder_col = RawField::BidderId as usize;
    for i in 0..originals {
        if rng.gen_bool(config.defects.duplicate_rows) {
            rows.push(rows[i].clone());
            manifest.duplicate_rows += 1;
        }
        if rng.gen_bool(config.defects.missing_bidder) {
            let blank = rows[i].iter().enumerate().map(|(c, v)| if c == bidder_col { "" } else { v });
            rows.push(RawRecord::new(0, blank));
            manifest.missing_bidder_rows += 1;
        }
    }
    rows.shuffle(&mut rng);
    manifest.total_rows = rows.len();

    let columns: Vec<String> = RawField::ALL
        .iter()
        .map(|f| f.default_header().to_string())
        .chain(EXTRA_COLUMNS.iter().map(|c| c.to_string()))
        .collect();
    let records = rows.into_iter().enumerate().map(|(i, r)| r.renumbered(i as u64 + 1)).collect();
    Ok(SynthCorpus { table: RawTable::new(columns, records), truth: truth.into_iter().collect(), defects: manifest })
}

fn format_row(
    plan: &AuctionPlan,
    bidder: &str,
    amount: Money,
    countdown: u64,
    epoch: &ReferenceEpoch,
    rng: &mut ChaCha8Rng,
) -> Vec<String> {
    let at = |c: u64| epoch.local() - Duration::seconds(c as i64);
    let date = |c: u64| at(c).format("%b-%d-%y").to_string();
    let time = |c: u64| at(c).format("%H:%M:%S PDT").to_string();
    let price = |m: Money, rng: &mut ChaCha8Rng| match rng.gen_range(0..4) {
        0 => format!("US ${}", with_commas(m)),
        _ => format!("{m} $"),
    };
    let mut row = Vec::with_capacity(RawField::ALL.len() + EXTRA_COLUMNS.len());
    for f in RawField::ALL {
        row.push(match f {
            RawField::AuctionUrl => plan.url.clone(),
            RawField::SellerId => plan.seller.clone(),
            RawField::BidderId => bidder.to_string(),
            RawField::BidAmount => price(amount, rng),
            RawField::BidDate => date(countdown),
            RawField::BidTime => time(countdown),
            RawField::StartDate => date(plan.start),
            RawField::StartTime => time(plan.start),
            RawField::EndDate => date(plan.end),
            RawField::EndTime => time(plan.end),
            RawField::DurationDays => format!("{} days", plan.duration_days),
            RawField::StartingPrice => price(plan.starting_price, rng),
            RawField::WinningPrice => price(plan.winning, rng),
            RawField::NumBids => plan.scraped_bids.to_string(),
            RawField::NumBidders => plan.scraped_bidders.to_string(),
        });
    }
    row.extend(plan.extras.iter().cloned());
    row
}

fn with_commas(m: Money) -> String {
    let text = m.to_string();
    let (whole, frac) = text.split_once('.').expect("two decimals");
    let mut grouped = String::new();
    for (i, c) in whole.chars().enumerate() {
        if i > 0 && (whole.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(c);
    }
    format!("{grouped}.{frac}")
}

/// Sidecar paths for a corpus written to `out`.
pub fn sidecar_paths(out: &Path) -> (PathBuf, PathBuf) {
    (out.with_extension("truth.csv"), out.with_extension("defects.json"))
}

impl SynthCorpus {
    pub fn truth_csv(&self) -> Vec<u8> {
        let mut w = crate::ingest::csv_writer(Vec::new());
        w.write_record(["auction_url", "bidder_id", "label"]).expect("in-memory write");
        for t in &self.truth {
            w.write_record([t.auction_url.as_str(), &t.bidder_id, t.label.as_str()]).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// Writes the corpus to `out` and the truth and defect sidecars next to
    /// it.
    pub fn write(&self, out: &Path) -> Result<(), crate::ingest::IngestError> {
        let (truth, defects) = sidecar_paths(out);
        self.table.write_csv(out)?;
        crate::ingest::write_bytes(&truth, &self.truth_csv())?;
        let json = serde_json::to_vec_pretty(&self.defects).expect("plain struct serializes");
        crate::ingest::write_bytes(&defects, &json)
    }

    /// Truth labels keyed by (URL, bidder).
    pub fn label_of(&self, url: &str, bidder: &str) -> Option<Label> {
        self.truth
            .binary_search_by(|t| (t.auction_url.as_str(), t.bidder_id.as_str()).cmp(&(url, bidder)))
            .ok()
            .map(|i| self.truth[i].label)
    }
}
