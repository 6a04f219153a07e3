use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use csv::StringRecord;

use super::{csv_writer, io_err, write_bytes, IngestError};
use crate::model::{Pattern, SbInstance};
use crate::scalar::Scalar;

pub const SB_HEADER: [&str; 10] = [
    "auction_id",
    "bidder_id",
    "bidder_tendency",
    "early_bidding",
    "bidding_ratio",
    "last_bidding",
    "auction_starting_price",
    "successive_outbidding",
    "winning_ratio",
    "auction_bids",
];

/// Optional eleventh column carrying the weighted suspicion score.
pub const SCORE_COLUMN: &str = "weighted_score";

fn fixed6<T: Scalar>(v: T) -> String {
    // + 0.0 folds a negative zero into zero
    format!("{:.6}", v.to_f64_lossy() + 0.0)
}

/// CSV bytes sorted by (auction_id, bidder_id). When `scores` is given it
/// must be parallel to `instances` and is written as a trailing column.
pub fn encode_sb_dataset<T: Scalar>(instances: &[SbInstance<T>], scores: Option<&[T]>) -> Result<Vec<u8>, IngestError> {
    if let Some(s) = scores {
        if s.len() != instances.len() {
            return Err(IngestError::ScoreCount(s.len(), instances.len()));
        }
    }
    for inst in instances {
        if let Some((pattern, value)) = inst.out_of_range().next() {
            return Err(IngestError::Outlier {
                auction_id: inst.auction_id,
                bidder_id: inst.bidder_id.clone(),
                pattern,
                value: value.to_f64_lossy(),
            });
        }
    }
    let mut order: Vec<usize> = (0..instances.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&instances[a], &instances[b]);
        x.auction_id.cmp(&y.auction_id).then_with(|| x.bidder_id.cmp(&y.bidder_id))
    });

    let mut w = csv_writer(Vec::with_capacity(instances.len() * 96));
    let mut header: Vec<&str> = SB_HEADER.to_vec();
    if scores.is_some() {
        header.push(SCORE_COLUMN);
    }
    w.write_record(&header).expect("in-memory write");
    let mut row: Vec<String> = Vec::with_capacity(11);
    for i in order {
        let inst = &instances[i];
        row.clear();
        row.push(inst.auction_id.to_string());
        row.push(inst.bidder_id.clone());
        row.extend(inst.values().into_iter().map(fixed6));
        if let Some(s) = scores {
            row.push(fixed6(s[i]));
        }
        w.write_record(&row).expect("in-memory write");
    }
    Ok(w.into_inner().expect("in-memory flush"))
}

/// Writes the ten-column feature file; aborts before writing if any metric
/// leaves `[0, 1]`.
pub fn write_sb_dataset<T: Scalar>(instances: &[SbInstance<T>], path: &Path) -> Result<(), IngestError> {
    write_bytes(path, &encode_sb_dataset(instances, None)?)
}

pub fn read_sb_dataset<T: Scalar>(path: &Path) -> Result<Vec<SbInstance<T>>, IngestError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_sb_dataset_from(BufReader::new(file), path)
}

/// Reads a feature file, with or without the score column. Values are not
/// range-checked so that outliers can be reported by the caller.
pub fn read_sb_dataset_from<T: Scalar, R: Read>(input: R, path: &Path) -> Result<Vec<SbInstance<T>>, IngestError> {
    let csv_err = |source: csv::Error| IngestError::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut record = StringRecord::new();
    if !reader.read_record(&mut record).map_err(csv_err)? {
        return Err(IngestError::MissingHeader { path: path.to_path_buf() });
    }
    let width = record.len();
    let header_ok = record.iter().take(SB_HEADER.len()).eq(SB_HEADER)
        && (width == SB_HEADER.len() || (width == SB_HEADER.len() + 1 && &record[SB_HEADER.len()] == SCORE_COLUMN));
    if !header_ok {
        return Err(IngestError::UnexpectedHeader { path: path.to_path_buf(), expected: SB_HEADER.join(",") });
    }
    let mut out = Vec::new();
    let mut row = 0u64;
    while reader.read_record(&mut record).map_err(csv_err)? {
        row += 1;
        let bad = |message: String| IngestError::Row { path: path.to_path_buf(), row, message };
        if record.len() != width {
            return Err(bad(format!("expected {width} columns, found {}", record.len())));
        }
        let auction_id: u64 = record[0].parse().map_err(|_| bad(format!("bad auction_id `{}`", &record[0])))?;
        let mut values = [T::zero(); 8];
        for p in Pattern::ALL {
            let text = &record[2 + p.index()];
            values[p.index()] = T::parse_decimal(text).ok_or_else(|| bad(format!("bad {} `{text}`", p.column())))?;
        }
        out.push(SbInstance::from_values(auction_id, &record[1], values));
    }
    Ok(out)
}
