use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use csv::StringRecord;

use super::{csv_writer, io_err, write_bytes, IngestError};
use crate::model::{AuctionView, BidRecord, ModelError};

pub const PREPROCESSED_HEADER: [&str; 13] = [
    "record_id",
    "auction_id",
    "seller_id",
    "bidder_id",
    "bid_amount",
    "bid_submit_time_sec",
    "num_bidders",
    "num_bids",
    "starting_price",
    "winning_bid",
    "auction_duration_sec",
    "start_time_sec",
    "end_time_sec",
];

/// Checks every row and auction invariant and returns the auctions in
/// ascending id order.
pub fn validate_records(records: &[BidRecord]) -> Result<Vec<AuctionView>, ModelError> {
    let mut ids = HashSet::with_capacity(records.len());
    for r in records {
        r.validate()?;
        if !ids.insert(r.record_id) {
            return Err(ModelError::Invariant {
                context: format!("record {}", r.record_id),
                detail: "duplicate record_id".into(),
            });
        }
    }
    let auctions = AuctionView::from_records(records)?;
    for a in &auctions {
        a.validate()?;
    }
    Ok(auctions)
}

/// Canonical CSV bytes: fixed header, rows ordered by auction id, then
/// descending submit time, then record id.
pub fn encode_preprocessed(records: &[BidRecord]) -> Result<Vec<u8>, IngestError> {
    validate_records(records)?;
    let mut sorted: Vec<&BidRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.auction_id
            .cmp(&b.auction_id)
            .then(b.bid_submit_time_sec.cmp(&a.bid_submit_time_sec))
            .then(a.record_id.cmp(&b.record_id))
    });
    let mut w = csv_writer(Vec::with_capacity(records.len() * 96));
    w.write_record(PREPROCESSED_HEADER).expect("in-memory write");
    for r in sorted {
        w.write_record([
            r.record_id.to_string().as_str(),
            &r.auction_id.to_string(),
            &r.seller_id,
            &r.bidder_id,
            &r.bid_amount.to_string(),
            &r.bid_submit_time_sec.to_string(),
            &r.num_bidders.to_string(),
            &r.num_bids.to_string(),
            &r.starting_price.to_string(),
            &r.winning_bid.to_string(),
            &r.auction_duration_sec.to_string(),
            &r.start_time_sec.to_string(),
            &r.end_time_sec.to_string(),
        ])
        .expect("in-memory write");
    }
    Ok(w.into_inner().expect("in-memory flush"))
}

/// Validates, then writes. Nothing is written when validation fails.
pub fn write_preprocessed(records: &[BidRecord], path: &Path) -> Result<(), IngestError> {
    let bytes = encode_preprocessed(records)?;
    write_bytes(path, &bytes)
}

pub fn read_preprocessed(path: &Path) -> Result<Vec<BidRecord>, IngestError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_preprocessed_from(BufReader::with_capacity(1 << 20, file), path)
}

/// Parses the preprocessed format. Field syntax is checked here;
/// cross-row invariants are left to [`validate_records`].
pub fn read_preprocessed_from<R: Read>(input: R, path: &Path) -> Result<Vec<BidRecord>, IngestError> {
    let csv_err = |source: csv::Error| IngestError::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut record = StringRecord::new();
    if !reader.read_record(&mut record).map_err(csv_err)? {
        return Err(IngestError::MissingHeader { path: path.to_path_buf() });
    }
    if record.iter().ne(PREPROCESSED_HEADER) {
        return Err(IngestError::UnexpectedHeader { path: path.to_path_buf(), expected: PREPROCESSED_HEADER.join(",") });
    }
    let mut out = Vec::new();
    let mut row = 0u64;
    while reader.read_record(&mut record).map_err(csv_err)? {
        row += 1;
        let bad = |message: String| IngestError::Row { path: path.to_path_buf(), row, message };
        if record.len() != PREPROCESSED_HEADER.len() {
            return Err(bad(format!("expected {} columns, found {}", PREPROCESSED_HEADER.len(), record.len())));
        }
        fn field<T: FromStr>(rec: &StringRecord, i: usize) -> Result<T, String> {
            rec[i].parse().map_err(|_| format!("bad {} `{}`", PREPROCESSED_HEADER[i], &rec[i]))
        }
        let parsed = (|| -> Result<BidRecord, String> {
            Ok(BidRecord {
                record_id: field(&record, 0)?,
                auction_id: field(&record, 1)?,
                seller_id: record[2].to_string(),
                bidder_id: record[3].to_string(),
                bid_amount: field(&record, 4)?,
                bid_submit_time_sec: field(&record, 5)?,
                num_bidders: field(&record, 6)?,
                num_bids: field(&record, 7)?,
                starting_price: field(&record, 8)?,
                winning_bid: field(&record, 9)?,
                auction_duration_sec: field(&record, 10)?,
                start_time_sec: field(&record, 11)?,
                end_time_sec: field(&record, 12)?,
            })
        })();
        out.push(parsed.map_err(bad)?);
    }
    Ok(out)
}
