use super::ColumnType;

/// Raw text that stands for a missing cell: an empty field or literal `NaN`.
pub fn is_missing_text(s: &str) -> bool {
    let t = s.trim();
    t.is_empty() || t == "NaN"
}

pub(crate) fn parse_finite(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Quantitative iff every non-missing value parses as a finite number.
///
/// Ordered categorical columns are never inferred; they have to be declared.
pub fn infer_column_type<S: AsRef<str>>(values: &[S]) -> ColumnType {
    let numeric = values
        .iter()
        .map(AsRef::as_ref)
        .filter(|s| !is_missing_text(s))
        .all(|s| parse_finite(s).is_some());
    if numeric {
        ColumnType::Quantitative
    } else {
        ColumnType::Categorical
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(infer_column_type(&["1.5", "2", "3"]), ColumnType::Quantitative);
        assert_eq!(infer_column_type(&["1.5", "x"]), ColumnType::Categorical);
        assert_eq!(infer_column_type::<&str>(&[]), ColumnType::Quantitative);
    }

    #[test]
    fn missing_does_not_force_categorical() {
        assert_eq!(infer_column_type(&["", "NaN", "4"]), ColumnType::Quantitative);
        assert_eq!(infer_column_type(&["", ""]), ColumnType::Quantitative);
    }

    #[test]
    fn non_finite_is_categorical() {
        assert_eq!(infer_column_type(&["inf"]), ColumnType::Categorical);
        assert_eq!(infer_column_type(&["1e400"]), ColumnType::Categorical);
    }

    #[test]
    fn labels_are_case_sensitive() {
        assert!(!is_missing_text("nan"));
        assert_eq!(infer_column_type(&["nan"]), ColumnType::Categorical);
    }

    proptest! {
        #[test]
        fn order_insensitive(mut values in proptest::collection::vec(
            prop_oneof![Just("1".to_string()), Just("x".to_string()), Just("".to_string()), "[0-9]{1,3}"], 0..12),
            seed in any::<u64>()) {
            let before = infer_column_type(&values);
            let k = values.len().max(1);
            values.rotate_left((seed as usize) % k);
            values.reverse();
            prop_assert_eq!(before, infer_column_type(&values));
        }
    }
}
