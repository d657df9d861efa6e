//! Header row and core column detection for vertical relational tables.

use serde::{Deserialize, Serialize};

use crate::table::{DataType, Table};

pub const HEADER_LOW_QUANTILE: f64 = 0.05;
pub const HEADER_HIGH_QUANTILE: f64 = 0.95;
pub const CORE_MIN_MEAN_LEN: f64 = 3.5;
pub const CORE_MAX_MEAN_LEN: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureAnnotation {
    pub header_row: Option<usize>,
    pub core_column: usize,
    /// Majority type per column over the data rows.
    pub column_dtypes: Vec<DataType>,
    pub uniqueness_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("no textual column qualifies as core attribute")]
    NoTextualColumn,
}

/// Majority over non-empty cells; Empty only when every cell is empty.
/// A textual/numerical tie counts as textual.
pub fn majority_dtype<'a>(types: impl IntoIterator<Item = &'a DataType>) -> DataType {
    let (mut text, mut num) = (0usize, 0usize);
    for t in types {
        match t {
            DataType::Textual => text += 1,
            DataType::Numerical => num += 1,
            DataType::Empty => {}
        }
    }
    match (text, num) {
        (0, 0) => DataType::Empty,
        (t, n) if t >= n => DataType::Textual,
        _ => DataType::Numerical,
    }
}

fn data_rows(table: &Table, header: Option<usize>) -> impl Iterator<Item = usize> + '_ {
    (0..table.n_rows).filter(move |&r| Some(r) != header)
}

fn column_majorities(table: &Table, header: Option<usize>) -> Vec<DataType> {
    (0..table.n_cols).map(|c| majority_dtype(data_rows(table, header).map(|r| &table.rows[r][c].dtype))).collect()
}

/// Mean cleaned length of the non-empty cells of a row; 0 for an empty row.
fn row_mean_len(table: &Table, row: usize) -> f64 {
    let lens: Vec<usize> = table.rows[row].iter().filter(|c| !c.is_empty()).map(|c| c.len()).collect();
    if lens.is_empty() {
        0.0
    } else {
        lens.iter().sum::<usize>() as f64 / lens.len() as f64
    }
}

/// Empirical quantile by the nearest-rank method: the `ceil(q * n)`-th
/// smallest value (1-based, at least the first).
pub fn nearest_rank_quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    // guard against q * n landing a hair above an integer
    let rank = ((q * sorted.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Row 0 is a header when its cell types disagree with the column
/// majorities of the remaining rows, or when its mean cell length falls
/// outside the 5%-95% quantile band of the remaining rows.
pub fn annotate_header(table: &Table) -> Option<usize> {
    if table.n_rows < 2 {
        return None;
    }
    let majorities = column_majorities(table, Some(0));
    let type_mismatch = table.rows[0]
        .iter()
        .zip(&majorities)
        .any(|(cell, &maj)| cell.dtype != DataType::Empty && maj != DataType::Empty && cell.dtype != maj);
    if type_mismatch {
        return Some(0);
    }

    let rest: Vec<f64> = (1..table.n_rows).map(|r| row_mean_len(table, r)).collect();
    let candidate = row_mean_len(table, 0);
    let low = nearest_rank_quantile(&rest, HEADER_LOW_QUANTILE);
    let high = nearest_rank_quantile(&rest, HEADER_HIGH_QUANTILE);
    (candidate < low || candidate > high).then_some(0)
}

/// Uniqueness of one column over the data rows:
/// distinct non-empty values / n minus empty cells / n.
pub fn uniqueness(table: &Table, col: usize, header: Option<usize>) -> f64 {
    let mut values: Vec<&str> = Vec::new();
    let mut empties = 0usize;
    let mut n = 0usize;
    for r in data_rows(table, header) {
        n += 1;
        let cell = &table.rows[r][col];
        if cell.is_empty() {
            empties += 1;
        } else {
            values.push(&cell.clean);
        }
    }
    if n == 0 {
        return 0.0;
    }
    values.sort_unstable();
    values.dedup();
    values.len() as f64 / n as f64 - empties as f64 / n as f64
}

fn mean_cell_len(table: &Table, col: usize, header: Option<usize>) -> f64 {
    let lens: Vec<usize> =
        data_rows(table, header).map(|r| &table.rows[r][col]).filter(|c| !c.is_empty()).map(|c| c.len()).collect();
    if lens.is_empty() {
        0.0
    } else {
        lens.iter().sum::<usize>() as f64 / lens.len() as f64
    }
}

/// Pick the core column: textual majority, mean non-empty cell length in
/// `[3.5, 200]` over the data rows, highest uniqueness, left-most on ties.
/// The length window is skipped when there is a single data row.
pub fn annotate_core_column(table: &Table, header: Option<usize>) -> Result<(usize, Vec<f64>), StructureError> {
    let majorities = column_majorities(table, header);
    let scores: Vec<f64> = (0..table.n_cols).map(|c| uniqueness(table, c, header)).collect();
    let n_data = data_rows(table, header).count();
    let mut best: Option<usize> = None;
    for c in 0..table.n_cols {
        if majorities[c] != DataType::Textual {
            continue;
        }
        if n_data >= 2 {
            let len = mean_cell_len(table, c, header);
            if !(CORE_MIN_MEAN_LEN..=CORE_MAX_MEAN_LEN).contains(&len) {
                continue;
            }
        }
        if best.is_none_or(|b| scores[c] > scores[b]) {
            best = Some(c);
        }
    }
    best.map(|c| (c, scores)).ok_or(StructureError::NoTextualColumn)
}

pub fn annotate_structure(table: &Table) -> Result<StructureAnnotation, StructureError> {
    let header_row = annotate_header(table);
    let (core_column, uniqueness_scores) = annotate_core_column(table, header_row)?;
    Ok(StructureAnnotation {
        header_row,
        core_column,
        column_dtypes: column_majorities(table, header_row),
        uniqueness_scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[&[&str]]) -> Table {
        Table::from_rows("t", rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()).unwrap()
    }

    #[test]
    fn dtype_mismatch_header() {
        let t = table(&[&["Film", "Year", "Gross"], &["The Island", "2005", "162"], &["Armageddon", "1998", "553"]]);
        assert_eq!(annotate_header(&t), Some(0));
    }

    #[test]
    fn no_header_when_rows_agree() {
        let t = table(&[&["abcd", "1"], &["efgh", "2"], &["ijkl", "3"]]);
        assert_eq!(annotate_header(&t), None);
    }

    #[test]
    fn quantile_header_on_long_first_row() {
        let mut rows: Vec<Vec<String>> =
            vec![vec!["a very long descriptive column heading".into(), "another long descriptive heading".into()]];
        for i in 0..20 {
            rows.push(vec![format!("name{i:02}"), format!("town{i:02}")]);
        }
        let t = Table::from_rows("q", rows).unwrap();
        let means: Vec<f64> = (1..21).map(|r| row_mean_len(&t, r)).collect();
        // nearest rank: ceil(0.95 * 20) = 19th smallest
        let mut sorted = means.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(nearest_rank_quantile(&means, 0.95), sorted[18]);
        assert!(row_mean_len(&t, 0) > sorted[18]);
        assert_eq!(annotate_header(&t), Some(0));
    }

    #[test]
    fn single_row_has_no_header() {
        let t = table(&[&["Film", "Year"]]);
        assert_eq!(annotate_header(&t), None);
        let s = annotate_structure(&t).unwrap();
        assert_eq!(s.core_column, 0);
    }

    #[test]
    fn quantile_values() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(nearest_rank_quantile(&v, 0.05), 1.0);
        assert_eq!(nearest_rank_quantile(&v, 0.95), 19.0);
        assert_eq!(nearest_rank_quantile(&[4.0], 0.95), 4.0);
        assert_eq!(nearest_rank_quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
    }

    #[test]
    fn title_column_beats_year_column() {
        let t =
            table(&[&["Film", "Year"], &["The Island", "2005"], &["Armageddon", "1998"], &["Pearl Harbor", "2001"]]);
        let s = annotate_structure(&t).unwrap();
        assert_eq!(s.header_row, Some(0));
        assert_eq!(s.core_column, 0);
        assert_eq!(s.column_dtypes, vec![DataType::Textual, DataType::Numerical]);
    }

    #[test]
    fn left_most_wins_ties() {
        let t = table(&[&["alpha", "delta"], &["bravo", "echo"], &["charlie", "foxtrot"]]);
        let (core, scores) = annotate_core_column(&t, None).unwrap();
        assert_eq!(scores[0], scores[1]);
        assert_eq!(core, 0);
    }

    #[test]
    fn missing_values_penalty() {
        let mut rows: Vec<Vec<String>> = Vec::new();
        for v in ["a1x", "b2x", "c3x", "d4x", "e5x", "f6x", "g7x", "h8x", "", ""] {
            rows.push(vec![format!("name {v}").trim().to_string(), "same".into()]);
        }
        rows[8][0].clear();
        rows[9][0].clear();
        let t = Table::from_rows("m", rows).unwrap();
        assert!((uniqueness(&t, 0, None) - 0.6).abs() < 1e-12);
        assert!((uniqueness(&t, 1, None) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn numbers_only_table_is_rejected() {
        let t = table(&[&["1", "2"], &["3", "4"], &["5", "6"]]);
        assert_eq!(annotate_structure(&t), Err(StructureError::NoTextualColumn));
    }

    #[test]
    fn length_window_excludes_short_codes() {
        // codes average 2 chars, below the 3.5 floor
        let t = table(&[&["US", "United States"], &["FR", "France"], &["DE", "Germany"]]);
        let (core, scores) = annotate_core_column(&t, None).unwrap();
        assert_eq!(scores[0], scores[1]);
        assert_eq!(core, 1);
    }

    #[test]
    fn header_never_beyond_first_row() {
        let t = table(&[&["x", "1"], &["Name", "Year"], &["y", "2"]]);
        assert!(matches!(annotate_header(&t), None | Some(0)));
    }
}
