use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, Read};
use std::path::Path;
use std::str::FromStr;

use csv::{ByteRecord, StringRecord};
use serde::Serialize;

use super::{csv_writer, io_err, IngestError};

/// Logical fields the pipeline reads from a raw scrape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RawField {
    AuctionUrl,
    SellerId,
    BidderId,
    BidAmount,
    BidDate,
    BidTime,
    StartDate,
    StartTime,
    EndDate,
    EndTime,
    DurationDays,
    StartingPrice,
    WinningPrice,
    NumBids,
    NumBidders,
}

impl RawField {
    pub const ALL: [RawField; 15] = [
        RawField::AuctionUrl,
        RawField::SellerId,
        RawField::BidderId,
        RawField::BidAmount,
        RawField::BidDate,
        RawField::BidTime,
        RawField::StartDate,
        RawField::StartTime,
        RawField::EndDate,
        RawField::EndTime,
        RawField::DurationDays,
        RawField::StartingPrice,
        RawField::WinningPrice,
        RawField::NumBids,
        RawField::NumBidders,
    ];

    /// Key used in schema configuration files.
    pub fn key(self) -> &'static str {
        match self {
            RawField::AuctionUrl => "auction_url",
            RawField::SellerId => "seller_id",
            RawField::BidderId => "bidder_id",
            RawField::BidAmount => "bid_amount",
            RawField::BidDate => "bid_date",
            RawField::BidTime => "bid_time",
            RawField::StartDate => "start_date",
            RawField::StartTime => "start_time",
            RawField::EndDate => "end_date",
            RawField::EndTime => "end_time",
            RawField::DurationDays => "duration_days",
            RawField::StartingPrice => "starting_price",
            RawField::WinningPrice => "winning_price",
            RawField::NumBids => "num_bids",
            RawField::NumBidders => "num_bidders",
        }
    }

    pub fn default_header(self) -> &'static str {
        match self {
            RawField::AuctionUrl => "Auction URL",
            RawField::SellerId => "Seller Name",
            RawField::BidderId => "Bidder ID",
            RawField::BidAmount => "Bid Amount",
            RawField::BidDate => "Bid Date",
            RawField::BidTime => "Bid Time",
            RawField::StartDate => "Auction Start Date",
            RawField::StartTime => "Auction Start Time",
            RawField::EndDate => "Auction End Date",
            RawField::EndTime => "Auction End Time",
            RawField::DurationDays => "Auction Duration",
            RawField::StartingPrice => "Starting Price",
            RawField::WinningPrice => "Winning Price",
            RawField::NumBids => "Number of Bids",
            RawField::NumBidders => "Number of Bidders",
        }
    }
}

impl fmt::Display for RawField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Mapping from logical field to the raw column header that carries it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSchema {
    headers: [String; 15],
}

impl Default for RawSchema {
    fn default() -> Self {
        RawSchema { headers: RawField::ALL.map(|f| f.default_header().to_string()) }
    }
}

impl RawSchema {
    pub fn header(&self, field: RawField) -> &str {
        &self.headers[field as usize]
    }

    pub fn set(&mut self, field: RawField, header: impl Into<String>) {
        self.headers[field as usize] = header.into();
    }

    /// Configured headers in [`RawField::ALL`] order; this is the keep-list
    /// for column projection.
    pub fn keep_list(&self) -> Vec<&str> {
        self.headers.iter().map(String::as_str).collect()
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        text.parse()
    }
}

/// `field = Raw Column Header` lines; `#` starts a comment. Fields not
/// listed keep their default header.
impl FromStr for RawSchema {
    type Err = IngestError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut schema = RawSchema::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let bad = |message: String| IngestError::SchemaConfig { line, message };
            let (key, header) = content.split_once('=').ok_or_else(|| bad("expected `field = header`".into()))?;
            let key = key.trim();
            let field = RawField::ALL
                .into_iter()
                .find(|f| f.key() == key)
                .ok_or_else(|| bad(format!("unknown field `{key}`")))?;
            let header = header.trim();
            if header.is_empty() {
                return Err(bad(format!("empty header for `{key}`")));
            }
            if !seen.insert(field) {
                return Err(bad(format!("`{key}` mapped twice")));
            }
            schema.set(field, header);
        }
        let mut headers = HashSet::new();
        for h in &schema.headers {
            if !headers.insert(h.as_str()) {
                return Err(IngestError::SchemaConfig { line: 0, message: format!("header `{h}` used for two fields") });
            }
        }
        Ok(schema)
    }
}

/// One scraped row. Values are untyped text and may be empty or malformed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    row: u64,
    fields: StringRecord,
}

impl RawRecord {
    /// `row` is the 1-based data row index in the source file.
    pub fn new<I, S>(row: u64, fields: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut rec = StringRecord::new();
        for f in fields {
            rec.push_field(f.as_ref());
        }
        RawRecord { row, fields: rec }
    }

    pub fn row(&self) -> u64 {
        self.row
    }

    pub fn get(&self, index: usize) -> Option<&str> {
        self.fields.get(index)
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.fields.iter()
    }

    pub(crate) fn renumbered(mut self, row: u64) -> RawRecord {
        self.row = row;
        self
    }

    pub(crate) fn project(&self, indices: &[usize]) -> RawRecord {
        let mut rec = StringRecord::with_capacity(self.fields.as_slice().len(), indices.len());
        for &i in indices {
            rec.push_field(&self.fields[i]);
        }
        RawRecord { row: self.row, fields: rec }
    }
}

/// Raw rows sharing one header.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawTable {
    columns: Vec<String>,
    rows: Vec<RawRecord>,
}

impl RawTable {
    /// Panics if a row's width differs from the header; readers reject such
    /// rows before they get here.
    pub fn new(columns: Vec<String>, rows: Vec<RawRecord>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), columns.len(), "row {} width does not match header", r.row);
        }
        RawTable { columns, rows }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[RawRecord] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn value(&self, row: usize, column: &str) -> Option<&str> {
        self.rows.get(row)?.get(self.column_index(column)?)
    }

    pub fn into_parts(self) -> (Vec<String>, Vec<RawRecord>) {
        (self.columns, self.rows)
    }

    /// Writes the table as CSV with its header.
    pub fn write_csv(&self, path: &Path) -> Result<(), IngestError> {
        let mut w = csv_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(&r.fields).expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        std::fs::write(path, bytes).map_err(io_err(path))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub row: u64,
    pub reason: String,
    #[serde(skip)]
    pub fields: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnMissing {
    pub column: String,
    pub missing: usize,
}

/// Outcome of reading a raw file: accepted and rejected row accounting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct SchemaReport {
    pub row_count: usize,
    pub accepted_row_count: usize,
    pub rejected_row_count: usize,
    pub missing_values: Vec<ColumnMissing>,
    pub rejections: Vec<Rejection>,
}

/// Reads a raw scrape. Rows whose column count differs from the header, or
/// that are not valid UTF-8, are rejected and listed in the report.
pub fn read_raw(path: &Path, schema: &RawSchema) -> Result<(RawTable, SchemaReport), IngestError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_raw_from(io::BufReader::with_capacity(1 << 20, file), path, schema)
}

pub fn read_raw_from<R: Read>(input: R, path: &Path, schema: &RawSchema) -> Result<(RawTable, SchemaReport), IngestError> {
    let csv_err = |source: csv::Error| IngestError::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut header = ByteRecord::new();
    if !reader.read_byte_record(&mut header).map_err(csv_err)? {
        return Err(IngestError::MissingHeader { path: path.to_path_buf() });
    }
    let header = StringRecord::from_byte_record(header)
        .map_err(|_| IngestError::MissingHeader { path: path.to_path_buf() })?;
    let columns: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    let missing: Vec<String> = schema
        .keep_list()
        .into_iter()
        .filter(|h| columns.iter().filter(|c| c == h).count() != 1)
        .map(str::to_string)
        .collect();
    if !missing.is_empty() {
        return Err(IngestError::HeaderMismatch { path: path.to_path_buf(), missing });
    }

    let mut report = SchemaReport::default();
    let mut missing_counts = vec![0usize; columns.len()];
    let mut rows = Vec::new();
    let mut record = ByteRecord::new();
    let mut row: u64 = 0;
    while reader.read_byte_record(&mut record).map_err(csv_err)? {
        row += 1;
        if std::str::from_utf8(record.as_slice()).is_err() {
            let lossy = record.iter().map(|f| String::from_utf8_lossy(f).into_owned()).collect();
            report.rejections.push(Rejection { row, reason: "invalid utf-8".into(), fields: lossy });
            continue;
        }
        let fields = StringRecord::from_byte_record(std::mem::replace(&mut record, ByteRecord::new()))
            .expect("validated utf-8");
        if fields.len() != columns.len() {
            report.rejections.push(Rejection {
                row,
                reason: format!("column count: expected {}, found {}", columns.len(), fields.len()),
                fields: fields.iter().map(str::to_string).collect(),
            });
            continue;
        }
        for (count, value) in missing_counts.iter_mut().zip(fields.iter()) {
            if value.trim().is_empty() {
                *count += 1;
            }
        }
        rows.push(RawRecord { row, fields });
    }
    report.row_count = row as usize;
    report.accepted_row_count = rows.len();
    report.rejected_row_count = report.rejections.len();
    report.missing_values = columns
        .iter()
        .zip(missing_counts)
        .map(|(column, missing)| ColumnMissing { column: column.clone(), missing })
        .collect();
    Ok((RawTable { columns, rows }, report))
}

/// Sidecar listing rejected rows: `row,reason,raw` where `raw` is the
/// original row re-encoded as one CSV line.
pub fn write_rejects(path: &Path, report: &SchemaReport) -> Result<(), IngestError> {
    let mut w = csv_writer(Vec::new());
    w.write_record(["row", "reason", "raw"]).expect("in-memory write");
    for r in &report.rejections {
        let mut inner = csv_writer(Vec::new());
        inner.write_record(&r.fields).expect("in-memory write");
        let raw = String::from_utf8(inner.into_inner().expect("in-memory flush")).expect("utf-8 fields");
        w.write_record([r.row.to_string().as_str(), r.reason.as_str(), raw.trim_end_matches('\n')])
            .expect("in-memory write");
    }
    std::fs::write(path, w.into_inner().expect("in-memory flush")).map_err(io_err(path))
}
