use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use chrono::FixedOffset;
use serde::Serialize;
use shillbid_core::dataset::{
    features_from_records, format_stats_table, pattern_stats, scan_outliers, winners_by_auction, StatsConfig,
};
use shillbid_core::ingest::{
    encode_preprocessed, encode_sb_dataset, read_preprocessed, read_raw, read_sb_dataset, validate_records,
    write_rejects, IngestError, RawSchema, SchemaReport, SB_HEADER,
};
use shillbid_core::metrics::weighted_scores;
use shillbid_core::model::WeightConfig;
use shillbid_core::preprocess::{
    detect_input, parse_money, preprocess_file, CleansingReport, InputKind, PipelineConfig, ReferenceEpoch,
};
use shillbid_core::synth::{generate, sidecar_paths, DefectRates, SynthConfig};
use shillbid_core::{Error, Result};

use crate::{EpochArgs, FeaturesArgs, PreprocessArgs, StatsArgs, SynthArgs, ValidateArgs};

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| IngestError::Io { path: path.to_path_buf(), source }.into())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source }.into())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

fn parse_offset(text: &str) -> Result<FixedOffset> {
    let bad = || Error::Config(format!("invalid --tz-offset `{text}` (expected e.g. -07:00)"));
    let text = text.trim();
    if let Ok(hours) = text.parse::<i32>() {
        return FixedOffset::east_opt(hours * 3600).ok_or_else(bad);
    }
    text.parse::<FixedOffset>().map_err(|_| bad())
}

fn epoch(args: &EpochArgs) -> Result<ReferenceEpoch> {
    Ok(ReferenceEpoch::parse(&args.epoch, parse_offset(&args.tz_offset)?)?)
}

fn threshold(text: &str) -> Result<f64> {
    match text.trim().parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(Error::Config(format!("--threshold `{text}` is not a number in [0, 1]"))),
    }
}

fn schema(path: Option<&PathBuf>) -> Result<RawSchema> {
    Ok(match path {
        Some(p) => RawSchema::load(p)?,
        None => RawSchema::default(),
    })
}

#[derive(Serialize)]
struct PreprocessReport<'a> {
    input: String,
    input_kind: &'static str,
    schema: Option<&'a SchemaReport>,
    cleansing: &'a CleansingReport,
}

pub fn preprocess(a: PreprocessArgs) -> Result<()> {
    let min_winning_price = match &a.min_winning_price {
        Some(text) => Some(parse_money(text)?),
        None => None,
    };
    let config = PipelineConfig {
        schema: schema(a.schema.as_ref())?,
        epoch: epoch(&a.epoch)?,
        min_bids: a.min_bids,
        min_winning_price,
    };
    let outcome = preprocess_file(&a.input, &config)?;
    let bytes = encode_preprocessed(&outcome.records)?;
    write_file(&a.out, &bytes)?;

    let report_path = a.report.clone().unwrap_or_else(|| a.out.with_extension("report.json"));
    let report = PreprocessReport {
        input: a.input.display().to_string(),
        input_kind: if outcome.schema.is_some() { "raw" } else { "preprocessed" },
        schema: outcome.schema.as_ref(),
        cleansing: &outcome.report,
    };
    write_json(&report_path, &report)?;
    if let Some(s) = outcome.schema.as_ref().filter(|s| !s.rejections.is_empty()) {
        let rejects = a.out.with_extension("rejects.csv");
        log::warn!("{} malformed row(s) rejected; see {}", s.rejected_row_count, rejects.display());
        write_rejects(&rejects, s)?;
    }
    let r = &outcome.report;
    log::info!(
        "{} -> {} records in {} auctions ({} rows removed)",
        r.before.records,
        r.after.records,
        r.after.auctions,
        r.rows_removed()
    );
    Ok(())
}

pub fn features(a: FeaturesArgs) -> Result<()> {
    let records = read_preprocessed(&a.input)?;
    let f = features_from_records::<f64>(&records)?;
    let scores = match &a.weights {
        Some(path) => {
            let overrides = WeightConfig::<f64>::parse(&read_text(path)?)?;
            Some(weighted_scores(&f.instances, &overrides.over(&WeightConfig::defaults()))?)
        }
        None => None,
    };
    let bytes = encode_sb_dataset(&f.instances, scores.as_deref())?;
    write_file(&a.out, &bytes)?;
    if let Some(report) = &a.report {
        let config = StatsConfig { threshold: threshold(&a.threshold)?, ..StatsConfig::default() };
        let stats = pattern_stats(&f.instances, &config, Some(&winners_by_auction(&f.auctions)));
        write_json(report, &stats)?;
    }
    log::info!("{} instances from {} auctions", f.instances.len(), f.auctions.len());
    Ok(())
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let mut config = SynthConfig::scaled(a.seed, a.auctions);
    config.shill_fraction = a.shill_fraction;
    config.shill_run_length = a.run_length;
    config.bids_per_auction = (a.min_auction_bids, a.max_auction_bids);
    config.epoch = epoch(&a.epoch)?;
    if let Some(n) = a.bidders {
        config.honest_pool = n;
    }
    if let Some(n) = a.sellers {
        config.num_sellers = n;
    }
    if a.clean {
        config.defects = DefectRates::NONE;
    }
    let d = &mut config.defects;
    for (slot, value) in [
        (&mut d.duplicate_rows, a.duplicate_rate),
        (&mut d.missing_bidder, a.missing_bidder_rate),
        (&mut d.thin_auctions, a.thin_rate),
        (&mut d.inconsistent_prices, a.inconsistent_rate),
        (&mut d.count_mismatch, a.count_mismatch_rate),
    ] {
        if let Some(v) = value {
            *slot = v;
        }
    }
    let corpus = generate(&config)?;
    corpus.write(&a.out)?;
    let (truth, defects) = sidecar_paths(&a.out);
    log::info!(
        "{} rows, truth in {}, defects in {}",
        corpus.table.len(),
        truth.display(),
        defects.display()
    );
    Ok(())
}

pub fn stats(a: StatsArgs) -> Result<()> {
    let instances = read_sb_dataset::<f64>(&a.input)?;
    let winners = match &a.auctions {
        Some(path) => {
            let records = read_preprocessed(path)?;
            Some(winners_by_auction(&validate_records(&records)?))
        }
        None => None,
    };
    let config = StatsConfig { threshold: threshold(&a.threshold)?, ..StatsConfig::default() };
    let stats = pattern_stats(&instances, &config, winners.as_ref());
    let table = format_stats_table(&stats);
    print!("{table}");
    if let Some(out) = &a.out {
        write_file(out, table.as_bytes())?;
    }
    if let Some(report) = &a.report {
        write_json(report, &stats)?;
    }
    Ok(())
}

fn first_line(path: &Path) -> Result<String> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    let mut line = String::new();
    BufReader::new(file)
        .read_line(&mut line)
        .map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    Ok(line.trim_end_matches(['\r', '\n']).to_string())
}

pub fn validate(a: ValidateArgs) -> Result<()> {
    let header = first_line(&a.input)?;
    if header.starts_with(&SB_HEADER.join(",")) {
        let instances = read_sb_dataset::<f64>(&a.input)?;
        let outliers = scan_outliers(&instances);
        for o in &outliers {
            println!("outlier: {o}");
        }
        println!("{} instances, {} outlier value(s)", instances.len(), outliers.len());
        let count = outliers.len();
        if let Some(first) = outliers.into_iter().next() {
            return Err(shillbid_core::dataset::DatasetError::Outliers { count, first }.into());
        }
        return Ok(());
    }
    match detect_input(&a.input)? {
        InputKind::Preprocessed => {
            let records = read_preprocessed(&a.input)?;
            let auctions = validate_records(&records)?;
            println!("{} records in {} auctions; all invariants hold", records.len(), auctions.len());
            Ok(())
        }
        InputKind::Raw => {
            let (_, report) = read_raw(&a.input, &schema(a.schema.as_ref())?)?;
            println!(
                "{} rows: {} accepted, {} rejected",
                report.row_count, report.accepted_row_count, report.rejected_row_count
            );
            for r in &report.rejections {
                println!("row {}: {}", r.row, r.reason);
            }
            if report.rejected_row_count > 0 {
                return Err(Error::Config(format!("{} malformed row(s)", report.rejected_row_count)));
            }
            Ok(())
        }
    }
}
