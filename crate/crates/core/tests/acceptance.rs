//! Acceptance run: one line per criterion, non-zero exit when any fails.

mod common;

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shillbid_core::dataset::{features_from_records, scan_outliers};
use shillbid_core::ingest::{encode_preprocessed, encode_sb_dataset, write_preprocessed, RawTable};
use shillbid_core::metrics::{participation, successive_outbidding};
use shillbid_core::model::{AuctionView, BidRecord, Money, Pattern, SECONDS_PER_DAY};
use shillbid_core::preprocess::{
    merge_datetime, parse_money, preprocess_file, preprocess_raw_bytes, reprocess, run_pipeline, CleansingReport,
    PipelineConfig, ReferenceEpoch,
};
use shillbid_core::synth::{generate, Label, SynthConfig};
use shillbid_core::Rational;

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1", "metric range on random corpora", ac1_range),
        ("AC2", "oracle equivalence on micro-auctions", ac2_oracle),
        ("AC3", "bidding ratio partition", ac3_partition),
        ("AC4", "countdown invariant", ac4_countdown),
        ("AC5", "worked examples and run-length banding", ac5_examples),
        ("AC6", "idempotence and determinism", ac6_determinism),
        ("AC7", "defect accounting", ac7_defects),
        ("AC8", "planted shill separation", ac8_separation),
        ("AC9", "golden pipeline", ac9_golden),
        ("AC10", "throughput at one million rows", ac10_throughput),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn clean(table: RawTable) -> Result<(Vec<BidRecord>, CleansingReport), String> {
    run_pipeline(table, &PipelineConfig::default()).map_err(|e| e.to_string())
}

fn outputs(records: &[BidRecord]) -> Result<(Vec<u8>, Vec<u8>), String> {
    let pre = encode_preprocessed(records).map_err(|e| e.to_string())?;
    let features = features_from_records::<f64>(records).map_err(|e| e.to_string())?;
    let sb = encode_sb_dataset(&features.instances, None).map_err(|e| e.to_string())?;
    Ok((pre, sb))
}

fn window_ok(records: &[BidRecord]) -> Result<usize, String> {
    let auctions = AuctionView::from_records(records).map_err(|e| e.to_string())?;
    for a in &auctions {
        let i = &a.info;
        ensure!(
            i.start_time_sec - i.end_time_sec == i.auction_duration_sec && i.auction_duration_sec % SECONDS_PER_DAY == 0,
            "auction {} window {}..{} vs duration {}",
            i.auction_id,
            i.end_time_sec,
            i.start_time_sec,
            i.auction_duration_sec
        );
    }
    Ok(auctions.len())
}

fn partition_ok(records: &[BidRecord]) -> Result<usize, String> {
    let features = features_from_records::<f64>(records).map_err(|e| e.to_string())?;
    let mut sums: HashMap<u64, f64> = HashMap::new();
    for inst in &features.instances {
        *sums.entry(inst.auction_id).or_default() += inst.bidding_ratio;
    }
    for (id, s) in &sums {
        ensure!((s - 1.0).abs() <= 1e-9, "auction {id}: bidding ratios sum to {s}");
    }
    Ok(sums.len())
}

fn corpus_records(seed: u64, auctions: usize) -> Result<Vec<BidRecord>, String> {
    let corpus = generate(&SynthConfig::scaled(seed, auctions)).map_err(|e| e.to_string())?;
    Ok(clean(corpus.table)?.0)
}

fn ac1_range() -> Check {
    let started = Instant::now();
    let mut instances = 0;
    for seed in 0..25 {
        let records = corpus_records(1_000 + seed, 80)?;
        let features = features_from_records::<f64>(&records).map_err(|e| e.to_string())?;
        for inst in &features.instances {
            for (p, v) in Pattern::ALL.iter().zip(inst.values()) {
                ensure!((0.0..=1.0).contains(&v), "seed {seed}: {} {} {p:?} = {v}", inst.auction_id, inst.bidder_id);
            }
        }
        let outliers = scan_outliers(&features.instances);
        ensure!(outliers.is_empty(), "seed {seed}: {} outliers, first {}", outliers.len(), outliers[0]);
        instances += features.instances.len();
    }
    let secs = started.elapsed().as_secs_f64();
    ensure!(instances >= 10_000, "only {instances} instances");
    ensure!(secs < 60.0, "took {secs:.1}s");
    Ok(format!("{instances} instances over 25 corpora, none outside [0, 1], {secs:.1}s"))
}

fn ac2_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut compared = 0;
    for round in 0..100 {
        let rows = common::micro_dataset(&mut rng, 5, 6);
        let records: Vec<BidRecord> = rows.iter().map(common::Row::to_record).collect();
        let mut expected = common::metrics(&rows);
        expected.sort_by(|a, b| (a.auction_id, &a.bidder).cmp(&(b.auction_id, &b.bidder)));
        let mut exact = features_from_records::<Rational>(&records).map_err(|e| e.to_string())?.instances;
        let mut float = features_from_records::<f64>(&records).map_err(|e| e.to_string())?.instances;
        ensure!(
            exact.len() == expected.len() && float.len() == expected.len(),
            "round {round}: {} instances, oracle {}",
            exact.len(),
            expected.len()
        );
        exact.sort_by(|a, b| (a.auction_id, &a.bidder_id).cmp(&(b.auction_id, &b.bidder_id)));
        float.sort_by(|a, b| (a.auction_id, &a.bidder_id).cmp(&(b.auction_id, &b.bidder_id)));
        for ((o, e), f) in expected.iter().zip(&exact).zip(&float) {
            ensure!(o.auction_id == e.auction_id && o.bidder == e.bidder_id, "round {round}: key mismatch");
            for p in Pattern::ALL {
                let want = o.values[p.index()];
                let got = e.value(p);
                ensure!(
                    want.same_value(*got.numer(), *got.denom()),
                    "round {round} auction {} bidder {} {p:?}: {got} vs oracle {}/{}",
                    o.auction_id,
                    o.bidder,
                    want.num,
                    want.den
                );
                let diff = (f.value(p) - want.to_f64()).abs();
                let tolerance = if p == Pattern::SuccessiveOutbidding { 0.0 } else { 1e-12 };
                ensure!(diff <= tolerance, "round {round} {p:?}: f64 off by {diff}");
            }
            compared += 1;
        }
    }
    Ok(format!("500 micro-auctions, {compared} instances identical to the brute-force oracle"))
}

fn ac3_partition() -> Check {
    let mut auctions = 0;
    for seed in 0..25 {
        auctions += partition_ok(&corpus_records(1_000 + seed, 80)?)?;
    }
    for seed in 0..10 {
        auctions += partition_ok(&corpus_records(7_000 + seed, 150)?)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let rows = common::micro_dataset(&mut rng, 5, 6);
        let records: Vec<BidRecord> = rows.iter().map(common::Row::to_record).collect();
        let features = features_from_records::<Rational>(&records).map_err(|e| e.to_string())?;
        let mut sums: HashMap<u64, Rational> = HashMap::new();
        for inst in &features.instances {
            *sums.entry(inst.auction_id).or_default() += inst.bidding_ratio;
        }
        ensure!(sums.values().all(|s| *s == Rational::from_integer(1)), "exact bidding ratios do not sum to 1");
        auctions += sums.len();
    }
    Ok(format!("{auctions} auctions, every bidding-ratio sum within 1e-9 of 1"))
}

fn five_day_fixture() -> String {
    let mut text = common::HEADERS.join(",");
    text.push('\n');
    let bids = [
        ("b1", "600.00 $", "Jun-19-17", "21:00:00 PDT"),
        ("b2", "610.00 $", "Jun-20-17", "08:30:10 PDT"),
        ("b1", "620.00 $", "Jun-21-17", "11:00:00 PDT"),
        ("b3", "640.00 $", "Jun-22-17", "14:15:00 PDT"),
        ("b2", "650.50 $", "Jun-24-17", "20:11:19 PDT"),
    ];
    for (bidder, amount, date, time) in bids {
        text.push_str(&format!(
            "https://www.ebay.com/itm/fixture-5day,seller_a,{bidder},{amount},{date},{time},\
             Jun-19-17,20:11:19 PDT,Jun-24-17,20:11:19 PDT,5 days,500.00 $,650.50 $,5,3\n"
        ));
    }
    text
}

fn ac4_countdown() -> Check {
    let outcome = preprocess_raw_bytes(five_day_fixture().as_bytes(), &PipelineConfig::default())
        .map_err(|e| e.to_string())?;
    let r = outcome.records.first().ok_or("five-day fixture was removed")?;
    ensure!(outcome.records.len() == 5, "five-day fixture kept {} rows", outcome.records.len());
    ensure!(
        r.start_time_sec - r.end_time_sec == 432_000 && r.auction_duration_sec == 432_000,
        "five-day fixture: start {} end {} duration {}",
        r.start_time_sec,
        r.end_time_sec,
        r.auction_duration_sec
    );
    let epoch = ReferenceEpoch::default().local();
    let end = (epoch - common::timestamp("Jun-24-17", "20:11:19 PDT")).num_seconds() as u64;
    ensure!(r.end_time_sec == end, "end countdown {} vs {end}", r.end_time_sec);

    let mut auctions = window_ok(&outcome.records)?;
    for seed in 0..25 {
        auctions += window_ok(&corpus_records(1_000 + seed, 80)?)?;
    }
    Ok(format!("{auctions} auctions with start - end = duration; five-day fixture spans 432000 s"))
}

fn ac5_examples() -> Check {
    let money = parse_money("650.50 $").map_err(|e| e.to_string())?;
    ensure!(money == Money::from_cents(65_050), "parse_money gave {money}");
    let table3 = [("Jun-01-17", "19:24:55 PDT", (2017, 6, 1)), ("Jun-03-17", "19:24:55 PDT", (2017, 6, 3))];
    for (date, time, (y, m, d)) in table3 {
        let want = NaiveDate::from_ymd_opt(y, m, d).unwrap().and_hms_opt(19, 24, 55).unwrap();
        let got = merge_datetime(date, time).map_err(|e| e.to_string())?;
        ensure!(got == want, "{date} {time} -> {got}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bands = [0usize; 3];
    for n in 0..1000 {
        let len = rng.gen_range(1..=14);
        let rows = common::micro_dataset(&mut rng, 1, len);
        let records: Vec<BidRecord> = rows.iter().map(common::Row::to_record).collect();
        let view = &AuctionView::from_records(&records).map_err(|e| e.to_string())?[0];
        let mut ordered = rows.clone();
        ordered.sort_by_key(|r| (std::cmp::Reverse(r.t), r.amount, r.record_id));
        let seq: Vec<&str> = ordered.iter().map(|r| r.bidder.as_str()).collect();
        for p in participation(view) {
            let run = common::longest_run(&seq, &p.bidder_id);
            ensure!(p.longest_run == run, "sequence {n} {seq:?}: run {} vs oracle {run}", p.longest_run);
            let want = common::sob_band(run);
            let got: Rational = successive_outbidding(p.longest_run);
            ensure!(want.same_value(*got.numer(), *got.denom()), "sequence {n}: band {got} for run {run}");
            bands[(want.num * 2 / want.den) as usize] += 1;
        }
    }
    Ok(format!(
        "650.50 $ -> 650.50, both date rows exact, 1000 sequences with 0 mismatches (bands 0/0.5/1: {}/{}/{})",
        bands[0], bands[1], bands[2]
    ))
}

fn ac6_determinism() -> Check {
    let corpus = generate(&SynthConfig::scaled(606, 150)).map_err(|e| e.to_string())?;
    let (records, _) = clean(corpus.table.clone())?;
    let (pre, sb) = outputs(&records)?;

    let (again, report) = reprocess(records.clone(), &PipelineConfig::default()).map_err(|e| e.to_string())?;
    ensure!(report.is_clean(), "second pass removed or adjusted data: {report:?}");
    ensure!(encode_preprocessed(&again).map_err(|e| e.to_string())? == pre, "second pass changed the bytes");

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("pre.csv");
    write_preprocessed(&records, &path).map_err(|e| e.to_string())?;
    let from_file = preprocess_file(&path, &PipelineConfig::default()).map_err(|e| e.to_string())?;
    ensure!(outputs(&from_file.records)?.0 == pre, "re-reading the preprocessed file changed the bytes");

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..3 {
        let (columns, mut rows) = corpus.table.clone().into_parts();
        rows.shuffle(&mut rng);
        let (shuffled, _) = clean(RawTable::new(columns, rows))?;
        ensure!(outputs(&shuffled)? == (pre.clone(), sb.clone()), "shuffle {k} changed the output");
    }

    for jobs in [1, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| e.to_string())?;
        let got = pool.install(|| clean(corpus.table.clone()).and_then(|(r, _)| outputs(&r)))?;
        ensure!(got == (pre.clone(), sb.clone()), "jobs = {jobs} changed the output");
    }
    Ok(format!("{} rows: fixed point on re-run, 3 shuffles and jobs 1/4 byte-identical", records.len()))
}

fn ac7_defects() -> Check {
    let mut totals = [0usize; 4];
    for seed in 0..10 {
        let corpus = generate(&SynthConfig::scaled(7_000 + seed, 150)).map_err(|e| e.to_string())?;
        let m = corpus.defects;
        let (_, r) = clean(corpus.table)?;
        let pairs = [
            ("duplicates", m.duplicate_rows, r.duplicate_records_removed),
            ("missing bidder", m.missing_bidder_rows, r.missing_bidder_rows_removed),
            ("thin auctions", m.thin_auctions, r.low_bid_auctions_removed),
            ("thin rows", m.thin_rows, r.low_bid_rows_removed),
            ("inconsistent auctions", m.inconsistent_auctions, r.inconsistent_auctions_removed),
            ("inconsistent rows", m.inconsistent_rows, r.inconsistent_rows_removed),
            ("count mismatches (bids)", m.count_mismatch_auctions, r.num_bids_adjusted),
            ("count mismatches (bidders)", m.count_mismatch_auctions, r.num_bidders_adjusted),
        ];
        for (name, injected, reported) in pairs {
            ensure!(injected == reported, "seed {seed}: {name} injected {injected}, reported {reported}");
        }
        ensure!(r.is_conserved(), "seed {seed}: report does not conserve rows and auctions");
        totals[0] += m.duplicate_rows;
        totals[1] += m.missing_bidder_rows;
        totals[2] += m.thin_auctions;
        totals[3] += m.inconsistent_auctions;
    }
    Ok(format!(
        "10 corpora, exact match ({} duplicates, {} missing ids, {} thin auctions, {} inconsistent auctions)",
        totals[0], totals[1], totals[2], totals[3]
    ))
}

fn ac8_separation() -> Check {
    let config = SynthConfig::default();
    ensure!(
        config.num_auctions == 200 && config.shill_fraction == 0.1 && config.shill_run_length == 4,
        "default synthetic corpus is not 200 auctions / 10% / run 4"
    );
    let corpus = generate(&config).map_err(|e| e.to_string())?;
    let mut labels: HashMap<&str, Label> = HashMap::new();
    for t in &corpus.truth {
        let prev = labels.insert(&t.bidder_id, t.label);
        ensure!(prev.is_none() || prev == Some(t.label), "bidder {} carries both labels", t.bidder_id);
    }
    let (records, _) = clean(corpus.table.clone())?;
    let features = features_from_records::<f64>(&records).map_err(|e| e.to_string())?;
    let (mut shill, mut shill_sob1, mut wr_sum, mut honest, mut honest_sob0) = (0, 0, 0.0, 0, 0);
    for inst in &features.instances {
        match labels.get(inst.bidder_id.as_str()) {
            Some(Label::Shill) => {
                shill += 1;
                shill_sob1 += usize::from(inst.successive_outbidding == 1.0);
                wr_sum += inst.winning_ratio;
            }
            Some(Label::Honest) => {
                honest += 1;
                honest_sob0 += usize::from(inst.successive_outbidding == 0.0);
            }
            None => return Err(format!("bidder {} has no truth label", inst.bidder_id)),
        }
    }
    ensure!(shill > 0, "no shill instances survived preprocessing");
    let mean_wr = wr_sum / shill as f64;
    ensure!(shill_sob1 == shill, "{shill_sob1} of {shill} shill instances have SOB = 1");
    ensure!(mean_wr >= 0.9, "mean shill winning ratio {mean_wr:.4}");
    ensure!(honest_sob0 == honest, "{honest_sob0} of {honest} honest instances have SOB = 0");
    Ok(format!(
        "{shill}/{shill} shill instances SOB = 1, mean WR {mean_wr:.3}; {honest}/{honest} honest instances SOB = 0"
    ))
}

const GOLDEN_RAW: &str = include_str!("fixtures/golden_raw.csv");
const GOLDEN_PRE: &str = include_str!("fixtures/golden_preprocessed.csv");
const GOLDEN_SB: &str = include_str!("fixtures/golden_sb.csv");

fn ac9_golden() -> Check {
    let oracle_rows = common::preprocess(GOLDEN_RAW, ReferenceEpoch::default().local(), 5);
    ensure!(common::preprocessed_csv(&oracle_rows) == GOLDEN_PRE, "oracle disagrees with the preprocessed golden");
    ensure!(common::sb_csv(&common::metrics(&oracle_rows)) == GOLDEN_SB, "oracle disagrees with the feature golden");

    let outcome =
        preprocess_raw_bytes(GOLDEN_RAW.as_bytes(), &PipelineConfig::default()).map_err(|e| e.to_string())?;
    let (pre, sb) = outputs(&outcome.records)?;
    ensure!(pre == GOLDEN_PRE.as_bytes(), "preprocessed output differs from the golden file");
    ensure!(sb == GOLDEN_SB.as_bytes(), "feature output differs from the golden file");
    let auctions = outcome.report.before.auctions;
    ensure!(auctions == 20, "fixture holds {auctions} auctions");
    Ok(format!(
        "20-auction fixture -> {} rows / {} instances, byte-exact",
        GOLDEN_PRE.lines().count() - 1,
        GOLDEN_SB.lines().count() - 1
    ))
}

fn ac10_throughput() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let raw = dir.path().join("raw.csv");
    let rows = {
        let corpus = generate(&SynthConfig::scaled(10, 62_000)).map_err(|e| e.to_string())?;
        corpus.table.write_csv(&raw).map_err(|e| e.to_string())?;
        corpus.table.len()
    };
    ensure!(rows >= 1_000_000, "generated only {rows} rows");

    let started = Instant::now();
    let outcome = preprocess_file(&raw, &PipelineConfig::default()).map_err(|e| e.to_string())?;
    write_preprocessed(&outcome.records, &dir.path().join("pre.csv")).map_err(|e| e.to_string())?;
    let features = features_from_records::<f64>(&outcome.records).map_err(|e| e.to_string())?;
    let sb = encode_sb_dataset(&features.instances, None).map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("sb.csv"), sb).map_err(|e| e.to_string())?;
    let secs = started.elapsed().as_secs_f64();
    let threads = rayon::current_num_threads();
    ensure!(secs < 60.0, "{rows} rows took {secs:.1}s on {threads} thread(s)");
    Ok(format!(
        "{rows} raw rows -> {} instances in {secs:.1}s on {threads} thread(s)",
        features.instances.len()
    ))
}
