//! Field-level conversions from scraped text to typed values.

use chrono::{DateTime, FixedOffset, NaiveDate, NaiveDateTime, NaiveTime};

use crate::model::{Money, SECONDS_PER_DAY};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("unknown month `{0}`")]
    Month(String),
    #[error("malformed date `{0}` (expected e.g. Jun-01-17)")]
    Date(String),
    #[error("malformed clock time `{0}` (expected e.g. 19:24:55 PDT)")]
    Clock(String),
    #[error("malformed timestamp `{0}`")]
    Timestamp(String),
    #[error("event {event} is after the reference epoch {epoch}")]
    AfterEpoch { event: NaiveDateTime, epoch: NaiveDateTime },
    #[error("no digits in amount `{0}`")]
    NoDigits(String),
    #[error("more than one number in `{0}`")]
    MultipleNumbers(String),
    #[error("amount `{0}` has more than two fractional digits or misplaced separators")]
    Amount(String),
    #[error("negative amount `{0}`")]
    Negative(String),
    #[error("duration must be a positive number of days, got `{0}`")]
    Duration(String),
    #[error("expected a non-negative integer, got `{0}`")]
    Integer(String),
    #[error("required value is empty")]
    Missing,
}

const MONTHS: [&str; 12] = ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"];
const MONTH_NAMES: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september", "october", "november",
    "december",
];

fn month_number(name: &str) -> Option<u32> {
    let lower = name.to_ascii_lowercase();
    MONTHS
        .iter()
        .zip(MONTH_NAMES)
        .position(|(abbr, full)| lower == *abbr || lower == full || (lower == "sept" && *abbr == "sep"))
        .map(|i| i as u32 + 1)
}

/// Combines a scraped date (`Jun-01-17`) and clock time (`19:24:55 PDT`)
/// into one local timestamp. The month name becomes a number and the zone
/// suffix is consumed; every timestamp is read in one configured zone.
pub fn merge_datetime(date: &str, time: &str) -> Result<NaiveDateTime, ParseError> {
    let date_err = || ParseError::Date(date.to_string());
    let mut parts = date.trim().split('-');
    let (month, day, year) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(m), Some(d), Some(y), None) => (m, d, y),
        _ => return Err(date_err()),
    };
    let month = month_number(month).ok_or_else(|| ParseError::Month(month.to_string()))?;
    let day: u32 = day.parse().map_err(|_| date_err())?;
    let year: i32 = match year.len() {
        2 => 2000 + year.parse::<i32>().map_err(|_| date_err())?,
        4 => year.parse().map_err(|_| date_err())?,
        _ => return Err(date_err()),
    };
    let date = NaiveDate::from_ymd_opt(year, month, day).ok_or_else(date_err)?;

    let clock_err = || ParseError::Clock(time.to_string());
    let mut tokens = time.split_whitespace();
    let clock = tokens.next().ok_or_else(clock_err)?;
    match (tokens.next(), tokens.next()) {
        (None, _) => {}
        (Some(zone), None) if zone.chars().all(|c| c.is_ascii_alphabetic()) => {}
        _ => return Err(clock_err()),
    }
    let fields: Vec<&str> = clock.split(':').collect();
    if fields.len() != 3 || fields.iter().any(|f| f.len() != 2 || !f.bytes().all(|b| b.is_ascii_digit())) {
        return Err(clock_err());
    }
    let num = |s: &str| s.parse::<u32>().map_err(|_| clock_err());
    let clock = NaiveTime::from_hms_opt(num(fields[0])?, num(fields[1])?, num(fields[2])?).ok_or_else(clock_err)?;
    Ok(date.and_time(clock))
}

/// Reference instant that countdown seconds are measured back from, held as
/// a local time in the working zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceEpoch {
    local: NaiveDateTime,
    offset: FixedOffset,
}

impl ReferenceEpoch {
    /// UTC-7, the zone the scraped timestamps are printed in (PDT).
    pub fn default_offset() -> FixedOffset {
        FixedOffset::west_opt(7 * 3600).expect("valid offset")
    }

    pub fn new(local: NaiveDateTime, offset: FixedOffset) -> Self {
        ReferenceEpoch { local, offset }
    }

    /// Accepts `YYYY-MM-DD HH:MM:SS` (read in `offset`) or an RFC 3339
    /// timestamp with its own offset, converted into `offset`.
    pub fn parse(text: &str, offset: FixedOffset) -> Result<Self, ParseError> {
        let text = text.trim();
        if let Ok(local) = NaiveDateTime::parse_from_str(text, "%Y-%m-%d %H:%M:%S") {
            return Ok(ReferenceEpoch { local, offset });
        }
        let dt = DateTime::parse_from_rfc3339(text).map_err(|_| ParseError::Timestamp(text.to_string()))?;
        Ok(ReferenceEpoch { local: dt.with_timezone(&offset).naive_local(), offset })
    }

    pub fn local(&self) -> NaiveDateTime {
        self.local
    }

    pub fn offset(&self) -> FixedOffset {
        self.offset
    }

    pub fn countdown(&self, event: NaiveDateTime) -> Result<u64, ParseError> {
        to_countdown_seconds(event, self.local)
    }
}

impl Default for ReferenceEpoch {
    /// 2017-07-07 00:00:00 local.
    fn default() -> Self {
        let local = NaiveDate::from_ymd_opt(2017, 7, 7).unwrap().and_hms_opt(0, 0, 0).unwrap();
        ReferenceEpoch { local, offset: Self::default_offset() }
    }
}

/// Whole seconds from `event` forward to `epoch`. Both are local times in
/// the same fixed-offset zone, so the offset cancels.
pub fn to_countdown_seconds(event: NaiveDateTime, epoch: NaiveDateTime) -> Result<u64, ParseError> {
    let secs = (epoch - event).num_seconds();
    u64::try_from(secs).map_err(|_| ParseError::AfterEpoch { event, epoch })
}

/// Extracts the single decimal number from scraped price text such as
/// `650.50 $` or `US $1,299.99`. Currency symbols and whitespace are
/// dropped, comma thousands separators are removed.
pub fn parse_money(text: &str) -> Result<Money, ParseError> {
    let bytes = text.as_bytes();
    let is_num = |b: u8| b.is_ascii_digit() || b == b'.' || b == b',';
    let mut number: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < bytes.len() {
        if !is_num(bytes[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && is_num(bytes[i]) {
            i += 1;
        }
        if !bytes[start..i].iter().any(u8::is_ascii_digit) {
            continue;
        }
        if number.replace((start, i)).is_some() {
            return Err(ParseError::MultipleNumbers(text.to_string()));
        }
    }
    let (start, end) = number.ok_or_else(|| ParseError::NoDigits(text.to_string()))?;
    if text[..start].trim_end().ends_with('-') {
        return Err(ParseError::Negative(text.to_string()));
    }
    let run = &text[start..end];
    let amount_err = || ParseError::Amount(text.to_string());
    let (int_part, frac_part) = run.split_once('.').unwrap_or((run, ""));
    if frac_part.contains(['.', ',']) || frac_part.len() > 2 || int_part.starts_with(',') || int_part.ends_with(',') {
        return Err(amount_err());
    }
    let groups: Vec<&str> = int_part.split(',').collect();
    if groups.len() > 1 && (groups[0].len() > 3 || groups[1..].iter().any(|g| g.len() != 3)) {
        return Err(amount_err());
    }
    let whole: String = groups.concat();
    let canonical = if whole.is_empty() { "0".to_string() } else { whole };
    let canonical = if frac_part.is_empty() { canonical } else { format!("{canonical}.{frac_part}") };
    canonical.parse::<Money>().map_err(|_| amount_err())
}

/// First integer in duration text such as `5`, `5 days` or `7-day`.
pub fn parse_duration_days(text: &str) -> Result<i64, ParseError> {
    let err = || ParseError::Duration(text.to_string());
    let trimmed = text.trim();
    let negative = trimmed.starts_with('-');
    let digits: String = trimmed.chars().skip_while(|c| !c.is_ascii_digit()).take_while(char::is_ascii_digit).collect();
    let days: i64 = digits.parse().map_err(|_| err())?;
    Ok(if negative { -days } else { days })
}

/// Durations listed by the scraped site. Others are accepted; the pipeline
/// logs a warning once per distinct value.
pub const STANDARD_DURATIONS: [i64; 5] = [1, 3, 5, 7, 10];

pub fn duration_days_to_seconds(days: i64) -> Result<u64, ParseError> {
    if days <= 0 {
        return Err(ParseError::Duration(days.to_string()));
    }
    (days as u64).checked_mul(SECONDS_PER_DAY).ok_or_else(|| ParseError::Duration(days.to_string()))
}

/// Scraped bid/bidder counts. Tolerates surrounding whitespace and a
/// trailing word (`12 bids`).
pub fn parse_count(text: &str) -> Result<u32, ParseError> {
    let t = text.trim();
    let digits: &str = t.split_whitespace().next().unwrap_or("");
    digits.replace(',', "").parse().map_err(|_| ParseError::Integer(text.to_string()))
}
