//! Row-level cleansing over raw text rows.

use std::collections::HashSet;

use super::PreprocessError;
use crate::ingest::{RawRecord, RawTable};

/// Keeps only the listed columns, in keep-list order.
pub fn drop_irrelevant_columns(table: RawTable, keep: &[&str]) -> Result<RawTable, PreprocessError> {
    let indices = keep
        .iter()
        .map(|name| table.column_index(name).ok_or_else(|| PreprocessError::UnknownColumn(name.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let identity = indices.len() == table.columns().len() && indices.iter().enumerate().all(|(i, &j)| i == j);
    if identity {
        return Ok(table);
    }
    let (columns, rows) = table.into_parts();
    let columns = indices.iter().map(|&i| columns[i].clone()).collect();
    let rows = rows.iter().map(|r| r.project(&indices)).collect();
    Ok(RawTable::new(columns, rows))
}

/// Collapses rows equal on every column to their first occurrence. Returns
/// the number of rows removed.
pub fn dedup_records(table: RawTable) -> (RawTable, usize) {
    let mut keep = vec![true; table.len()];
    {
        let mut seen: HashSet<Vec<&str>> = HashSet::with_capacity(table.len());
        for (flag, row) in keep.iter_mut().zip(table.rows()) {
            *flag = seen.insert(row.iter().collect());
        }
    }
    retain_flagged(table, &keep)
}

/// Removes rows whose bidder id is empty or whitespace.
pub fn drop_missing_bidder(table: RawTable, bidder_column: &str) -> Result<(RawTable, usize), PreprocessError> {
    let idx = table
        .column_index(bidder_column)
        .ok_or_else(|| PreprocessError::UnknownColumn(bidder_column.to_string()))?;
    let keep: Vec<bool> = table.rows().iter().map(|r| !is_missing(r.get(idx).unwrap_or(""))).collect();
    Ok(retain_flagged(table, &keep))
}

pub(crate) fn is_missing(value: &str) -> bool {
    value.trim().is_empty()
}

fn retain_flagged(table: RawTable, keep: &[bool]) -> (RawTable, usize) {
    let removed = keep.iter().filter(|k| !**k).count();
    if removed == 0 {
        return (table, 0);
    }
    let (columns, rows) = table.into_parts();
    let rows: Vec<RawRecord> = rows.into_iter().zip(keep).filter(|(_, k)| **k).map(|(r, _)| r).collect();
    (RawTable::new(columns, rows), removed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn table(cols: &[&str], rows: &[&[&str]]) -> RawTable {
        RawTable::new(
            cols.iter().map(|c| c.to_string()).collect(),
            rows.iter().enumerate().map(|(i, r)| RawRecord::new(i as u64 + 1, r.iter())).collect(),
        )
    }

    #[test]
    fn projection_to_keep_list() {
        let cols: Vec<String> = (0..28).map(|i| format!("c{i}")).collect();
        let row: Vec<String> = (0..28).map(|i| format!("v{i}")).collect();
        let t = RawTable::new(cols.clone(), vec![RawRecord::new(1, &row), RawRecord::new(2, &row)]);
        let keep: Vec<&str> = cols.iter().step_by(2).map(String::as_str).collect();
        assert_eq!(keep.len(), 14);
        let out = drop_irrelevant_columns(t, &keep).unwrap();
        assert_eq!(out.columns().len(), 14);
        assert_eq!(out.len(), 2);
        assert_eq!(out.value(0, "c4"), Some("v4"));
    }

    #[test]
    fn projection_identity_and_unknown() {
        let t = table(&["a", "b"], &[&["1", "2"]]);
        assert_eq!(drop_irrelevant_columns(t.clone(), &["a", "b"]).unwrap(), t);
        assert!(matches!(drop_irrelevant_columns(t, &["a", "foo"]), Err(PreprocessError::UnknownColumn(c)) if c == "foo"));
    }

    #[test]
    fn dedup_twice_captured_history() {
        let rows: Vec<Vec<String>> = (0..10).map(|i| vec!["bidder".into(), format!("{i}")]).collect();
        let mut all: Vec<&[String]> = rows.iter().map(Vec::as_slice).collect();
        all.extend(rows.iter().map(Vec::as_slice));
        let t = RawTable::new(
            vec!["who".into(), "n".into()],
            all.iter().enumerate().map(|(i, r)| RawRecord::new(i as u64 + 1, r.iter())).collect(),
        );
        let (out, removed) = dedup_records(t);
        assert_eq!((out.len(), removed), (10, 10));
        // first occurrences kept, order preserved
        assert_eq!(out.rows().iter().map(|r| r.row()).collect::<Vec<_>>(), (1..=10).collect::<Vec<_>>());
    }

    #[test]
    fn dedup_matches_set_semantics() {
        let t = table(&["a", "b"], &[&["x", "1"], &["x", "1"], &["y", "1"], &["x", "1"], &["x,1", ""]]);
        let distinct: BTreeSet<Vec<String>> =
            t.rows().iter().map(|r| r.iter().map(str::to_string).collect()).collect();
        let (out, removed) = dedup_records(t);
        assert_eq!(out.len(), distinct.len());
        assert_eq!(removed, 2);
        let (same, zero) = dedup_records(out.clone());
        assert_eq!((same, zero), (out, 0));
    }

    #[test]
    fn missing_bidder_rows() {
        let t = table(&["bidder", "x"], &[&["", "1"], &["  ", "2"], &["b1", "3"]]);
        let (out, removed) = drop_missing_bidder(t, "bidder").unwrap();
        assert_eq!((out.len(), removed), (1, 2));
        let (same, zero) = drop_missing_bidder(out.clone(), "bidder").unwrap();
        assert_eq!((same, zero), (out, 0));
    }
}
