use super::ParcoordsError;
use crate::data::{DataSource, RowIndexSet};

fn numbers<'a>(data: &'a DataSource, name: &str) -> Result<&'a [Option<f64>], ParcoordsError> {
    let col = data
        .column(name)
        .ok_or_else(|| ParcoordsError::UnknownColumn(name.to_string()))?;
    col.numbers()
        .ok_or_else(|| ParcoordsError::NotQuantitative(name.to_string()))
}

/// Pearson correlation of `col_a` and `col_b` over the selected rows.
/// Rows missing either value are skipped.
pub fn selection_correlation(
    data: &DataSource,
    rows: &RowIndexSet,
    col_a: &str,
    col_b: &str,
) -> Result<f64, ParcoordsError> {
    let (a, b) = (numbers(data, col_a)?, numbers(data, col_b)?);
    if let Some(&row) = rows.as_slice().last() {
        if row >= data.n_rows() {
            return Err(ParcoordsError::RowOutOfRange { row, n: data.n_rows() });
        }
    }
    let pairs: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| Some((a[r]?, b[r]?)))
        .collect();
    if pairs.len() < 2 {
        return Err(ParcoordsError::TooFewRows(pairs.len()));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(ParcoordsError::ZeroVariance(col_a.to_string()));
    }
    if syy == 0.0 {
        return Err(ParcoordsError::ZeroVariance(col_b.to_string()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy(points: &[(f64, f64)]) -> DataSource {
        let rows: Vec<Vec<f64>> = points.iter().map(|&(x, y)| vec![x, y]).collect();
        DataSource::from_rows("c", &["x", "y"], &rows).unwrap()
    }

    #[test]
    fn perfect_lines() {
        let up = xy(&[(0.0, 0.0), (1.0, 2.0), (2.5, 5.0), (-3.0, -6.0)]);
        let all = RowIndexSet::all(4);
        assert!((selection_correlation(&up, &all, "x", "y").unwrap() - 1.0).abs() < 1e-15);
        let down = xy(&[(0.0, 0.0), (1.0, -1.0), (7.0, -7.0)]);
        assert!((selection_correlation(&down, &RowIndexSet::all(3), "x", "y").unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_picked_pairs_match_textbook_formula() {
        let pts = [(1.0, 2.0), (2.0, 1.0), (3.0, 4.0), (4.0, 3.0), (5.0, 6.0)];
        // Single-pass textbook form: (nΣxy − ΣxΣy) / sqrt((nΣx² − (Σx)²)(nΣy² − (Σy)²)).
        let n: f64 = 5.0;
        let (sx, sy) = (15.0, 16.0);
        let sxy = 2.0 + 2.0 + 12.0 + 12.0 + 30.0;
        let sxx = 55.0;
        let syy = 4.0 + 1.0 + 16.0 + 9.0 + 36.0;
        let want = (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
        let got = selection_correlation(&xy(&pts), &RowIndexSet::all(5), "x", "y").unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn subset_only() {
        let d = xy(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, -100.0)]);
        let r = selection_correlation(&d, &RowIndexSet::from_unsorted(vec![0, 1, 2]), "x", "y").unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let d = xy(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]);
        let all = RowIndexSet::all(3);
        assert_eq!(selection_correlation(&d, &all, "x", "y"), Err(ParcoordsError::ZeroVariance("y".into())));
        assert_eq!(
            selection_correlation(&d, &RowIndexSet::from_unsorted(vec![1]), "x", "y"),
            Err(ParcoordsError::TooFewRows(1))
        );
        assert!(matches!(selection_correlation(&d, &all, "x", "q"), Err(ParcoordsError::UnknownColumn(_))));
        assert!(matches!(
            selection_correlation(&d, &RowIndexSet::from_unsorted(vec![0, 9]), "x", "y"),
            Err(ParcoordsError::RowOutOfRange { .. })
        ));
    }
}
