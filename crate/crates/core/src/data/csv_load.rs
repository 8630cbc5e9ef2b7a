use super::infer::{infer_column_type, is_missing_text, parse_finite};
use super::{Column, ColumnType, DataError, DataSource};

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub header: bool,
    /// Name given to the resulting source.
    pub name: String,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            header: true,
            name: "data".into(),
        }
    }
}

fn line_of(bytes: &[u8], offset: usize) -> u64 {
    bytes[..offset].iter().filter(|&&b| b == b'\n').count() as u64 + 1
}

/// Parses RFC 4180 style CSV and infers a type for every column.
///
/// Without a header, columns are named `col1..colp`.
pub fn load_csv(bytes: &[u8], options: &CsvOptions) -> Result<DataSource, DataError> {
    if let Err(e) = std::str::from_utf8(bytes) {
        let offset = e.valid_up_to();
        return Err(DataError::Encoding {
            line: line_of(bytes, offset),
            offset,
        });
    }

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);

    let mut names: Option<Vec<String>> = None;
    let mut raw: Vec<Vec<String>> = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(DataError::Csv(e.to_string())),
        }
        let line = record.position().map_or(0, |p| p.line());
        if first && options.header {
            first = false;
            names = Some(record.iter().map(str::to_string).collect());
            raw = vec![Vec::new(); record.len()];
            continue;
        }
        if first {
            first = false;
            raw = vec![Vec::new(); record.len()];
            names = Some((1..=record.len()).map(|i| format!("col{i}")).collect());
        }
        if record.len() != raw.len() {
            return Err(DataError::RaggedRow {
                line,
                expected: raw.len(),
                found: record.len(),
            });
        }
        for (col, field) in raw.iter_mut().zip(record.iter()) {
            col.push(field.to_string());
        }
    }

    let names = names.unwrap_or_default();
    let n_rows = raw.first().map_or(0, Vec::len);
    let columns = names
        .into_iter()
        .zip(raw)
        .map(|(name, cells)| build_column(name, &cells))
        .collect();
    DataSource::new(options.name.clone(), n_rows, columns)
}

fn build_column(name: String, cells: &[String]) -> Column {
    match infer_column_type(cells) {
        ColumnType::Quantitative => Column::quantitative(
            name,
            cells
                .iter()
                .map(|s| {
                    if is_missing_text(s) {
                        None
                    } else {
                        parse_finite(s)
                    }
                })
                .collect(),
        ),
        _ => Column::categorical(
            name,
            cells
                .iter()
                .map(|s| (!is_missing_text(s)).then(|| s.clone()))
                .collect(),
        ),
    }
}
