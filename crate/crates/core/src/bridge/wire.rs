//! JSON wire encoding of [`DataSource`].
//!
//! ```text
//! {"name": "...",
//!  "columns": [{"name": "...", "type": "quantitative" | "categorical" | "ordered", "order": [...]}],
//!  "rows": [[1.5, "x", null], ...]}
//! ```
//!
//! Rows are row-major on the wire and are streamed straight into column
//! buffers on decode, so large matrices never materialize as generic JSON.

use std::fmt;

use serde::de::{self, DeserializeSeed, Deserializer, IgnoredAny, MapAccess, SeqAccess, Visitor};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Column, ColumnData, ColumnType, DataError, DataSource};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WireError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid data source: {0}")]
    Data(#[from] DataError),
}

/// Borrowing serializer for a data source.
pub struct WireSource<'a>(pub &'a DataSource);

struct WireColumns<'a>(&'a [Column]);
struct WireRows<'a>(&'a DataSource);
struct WireRow<'a>(&'a [Column], usize);

impl Serialize for WireSource<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("name", self.0.name())?;
        map.serialize_entry("columns", &WireColumns(self.0.columns()))?;
        map.serialize_entry("rows", &WireRows(self.0))?;
        map.end()
    }
}

impl Serialize for WireColumns<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for col in self.0 {
            seq.serialize_element(&ColumnHeader::from(col))?;
        }
        seq.end()
    }
}

impl Serialize for WireRows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let cols = self.0.columns();
        let mut seq = s.serialize_seq(Some(self.0.n_rows()))?;
        for r in 0..self.0.n_rows() {
            seq.serialize_element(&WireRow(cols, r))?;
        }
        seq.end()
    }
}

impl Serialize for WireRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for col in self.0 {
            match &col.data {
                ColumnData::Numbers(v) => seq.serialize_element(&v[self.1])?,
                ColumnData::Labels(v) => seq.serialize_element(&v[self.1])?,
            }
        }
        seq.end()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ColumnHeader {
    name: String,
    #[serde(rename = "type")]
    ty: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<String>>,
}

impl From<&Column> for ColumnHeader {
    fn from(col: &Column) -> Self {
        ColumnHeader {
            name: col.name.clone(),
            ty: col.ty.tag().to_string(),
            order: match &col.ty {
                ColumnType::OrderedCategorical(o) => Some(o.clone()),
                _ => None,
            },
        }
    }
}

/// A header whose type tag has been validated during deserialization, so
/// errors point at the offending element.
#[derive(Deserialize)]
#[serde(try_from = "ColumnHeader")]
struct CheckedHeader {
    header: ColumnHeader,
    ty: ColumnType,
}

impl TryFrom<ColumnHeader> for CheckedHeader {
    type Error = String;

    fn try_from(header: ColumnHeader) -> Result<Self, String> {
        let ty = header.column_type()?;
        Ok(CheckedHeader { header, ty })
    }
}

impl ColumnHeader {
    fn column_type(&self) -> Result<ColumnType, String> {
        match (self.ty.as_str(), &self.order) {
            ("quantitative", None) => Ok(ColumnType::Quantitative),
            ("categorical", None) => Ok(ColumnType::Categorical),
            ("ordered", Some(order)) => Ok(ColumnType::OrderedCategorical(order.clone())),
            ("ordered", None) => Err("ordered column requires an \"order\" list".into()),
            ("quantitative" | "categorical", Some(_)) => {
                Err("\"order\" is only valid for ordered columns".into())
            }
            (other, _) => Err(format!("unknown column type {other:?}")),
        }
    }
}

pub fn to_json_bytes(data: &DataSource) -> Vec<u8> {
    serde_json::to_vec(&WireSource(data)).expect("data source serialization is infallible")
}

pub fn to_json_value(data: &DataSource) -> serde_json::Value {
    serde_json::to_value(WireSource(data)).expect("data source serialization is infallible")
}

pub fn from_json_bytes(bytes: &[u8]) -> Result<DataSource, WireError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let data = decode(&mut de)?;
    de.end().map_err(|e| WireError::Schema {
        path: ".".into(),
        message: e.to_string(),
    })?;
    Ok(data)
}

pub fn from_json_value(value: &serde_json::Value) -> Result<DataSource, WireError> {
    decode(value)
}

fn decode<'de, D: Deserializer<'de>>(de: D) -> Result<DataSource, WireError>
where
    D::Error: fmt::Display,
{
    let mut track = serde_path_to_error::Track::new();
    let tracked = serde_path_to_error::Deserializer::new(de, &mut track);
    match SourceSeed.deserialize(tracked) {
        Ok(partial) => partial.finish(),
        Err(e) => Err(WireError::Schema {
            path: track.path().to_string(),
            message: e.to_string(),
        }),
    }
}

struct Partial {
    name: String,
    headers: Vec<ColumnHeader>,
    types: Vec<ColumnType>,
    cols: Vec<ColBuf>,
    n_rows: usize,
}

impl Partial {
    fn finish(self) -> Result<DataSource, WireError> {
        let columns = self
            .headers
            .into_iter()
            .zip(self.types)
            .zip(self.cols)
            .map(|((h, ty), buf)| Column {
                name: h.name,
                ty,
                data: buf.into_data(),
            })
            .collect();
        Ok(DataSource::new(self.name, self.n_rows, columns)?)
    }
}

enum ColBuf {
    Numbers(Vec<Option<f64>>),
    Labels(Vec<Option<String>>),
}

impl ColBuf {
    fn for_type(ty: &ColumnType) -> Self {
        match ty {
            ColumnType::Quantitative => ColBuf::Numbers(Vec::new()),
            _ => ColBuf::Labels(Vec::new()),
        }
    }

    fn into_data(self) -> ColumnData {
        match self {
            ColBuf::Numbers(v) => ColumnData::Numbers(v),
            ColBuf::Labels(v) => ColumnData::Labels(v),
        }
    }
}

struct SourceSeed;

impl<'de> DeserializeSeed<'de> for SourceSeed {
    type Value = Partial;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Partial, D::Error> {
        d.deserialize_map(SourceVisitor)
    }
}

struct SourceVisitor;

impl<'de> Visitor<'de> for SourceVisitor {
    type Value = Partial;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a data source object")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Partial, A::Error> {
        let mut name: Option<String> = None;
        let mut schema: Option<(Vec<ColumnHeader>, Vec<ColumnType>)> = None;
        let mut rows: Option<(Vec<ColBuf>, usize)> = None;
        // Rows that arrive before the column list are buffered generically.
        let mut early_rows: Option<Vec<Vec<serde_json::Value>>> = None;

        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "name" => name = Some(map.next_value()?),
                "columns" => {
                    let checked: Vec<CheckedHeader> = map.next_value()?;
                    schema = Some(checked.into_iter().map(|c| (c.header, c.ty)).unzip());
                }
                "rows" => match &schema {
                    Some((_, types)) => {
                        let mut cols: Vec<ColBuf> = types.iter().map(ColBuf::for_type).collect();
                        let n = map.next_value_seed(RowsSeed { cols: &mut cols })?;
                        rows = Some((cols, n));
                    }
                    None => early_rows = Some(map.next_value()?),
                },
                _ => {
                    map.next_value::<IgnoredAny>()?;
                }
            }
        }

        let name = name.ok_or_else(|| de::Error::missing_field("name"))?;
        let (headers, types) = schema.ok_or_else(|| de::Error::missing_field("columns"))?;
        let (cols, n_rows) = match (rows, early_rows) {
            (Some(r), _) => r,
            (None, Some(buffered)) => {
                let mut cols: Vec<ColBuf> = types.iter().map(ColBuf::for_type).collect();
                let value = serde_json::Value::Array(
                    buffered.into_iter().map(serde_json::Value::Array).collect(),
                );
                let n = RowsSeed { cols: &mut cols }
                    .deserialize(value)
                    .map_err(|e| de::Error::custom(format!("rows: {e}")))?;
                (cols, n)
            }
            (None, None) => return Err(de::Error::missing_field("rows")),
        };
        Ok(Partial {
            name,
            headers,
            types,
            cols,
            n_rows,
        })
    }
}

struct RowsSeed<'a> {
    cols: &'a mut [ColBuf],
}

impl<'de> DeserializeSeed<'de> for RowsSeed<'_> {
    type Value = usize;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<usize, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for RowsSeed<'_> {
    type Value = usize;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an array of rows")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<usize, A::Error> {
        if let Some(hint) = seq.size_hint() {
            for c in self.cols.iter_mut() {
                match c {
                    ColBuf::Numbers(v) => v.reserve(hint),
                    ColBuf::Labels(v) => v.reserve(hint),
                }
            }
        }
        let mut n = 0;
        while seq
            .next_element_seed(RowSeed {
                cols: &mut *self.cols,
            })?
            .is_some()
        {
            n += 1;
        }
        Ok(n)
    }
}

struct RowSeed<'a> {
    cols: &'a mut [ColBuf],
}

impl<'de> DeserializeSeed<'de> for RowSeed<'_> {
    type Value = ();

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<(), D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for RowSeed<'_> {
    type Value = ();

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a row of {} cells", self.cols.len())
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<(), A::Error> {
        let p = self.cols.len();
        for (i, col) in self.cols.iter_mut().enumerate() {
            if seq.next_element_seed(CellSeed { col })?.is_none() {
                return Err(de::Error::custom(format!(
                    "row has {i} cells, expected {p}"
                )));
            }
        }
        if seq.next_element::<IgnoredAny>()?.is_some() {
            return Err(de::Error::custom(format!("row has more than {p} cells")));
        }
        Ok(())
    }
}

struct CellSeed<'a> {
    col: &'a mut ColBuf,
}

impl<'de> DeserializeSeed<'de> for CellSeed<'_> {
    type Value = ();

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<(), D::Error> {
        d.deserialize_any(self)
    }
}

impl CellSeed<'_> {
    fn number<E: de::Error>(self, v: f64) -> Result<(), E> {
        match self.col {
            ColBuf::Numbers(buf) => {
                buf.push(Some(v));
                Ok(())
            }
            ColBuf::Labels(_) => Err(E::custom("expected a string or null in a categorical column")),
        }
    }
}

impl<'de> Visitor<'de> for CellSeed<'_> {
    type Value = ();

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number, string or null")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<(), E> {
        self.number(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<(), E> {
        self.number(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<(), E> {
        self.number(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<(), E> {
        match self.col {
            ColBuf::Labels(buf) => {
                buf.push(Some(v.to_string()));
                Ok(())
            }
            ColBuf::Numbers(_) => Err(E::custom(
                "expected a number or null in a quantitative column",
            )),
        }
    }

    fn visit_unit<E: de::Error>(self) -> Result<(), E> {
        match self.col {
            ColBuf::Numbers(buf) => buf.push(None),
            ColBuf::Labels(buf) => buf.push(None),
        }
        Ok(())
    }

    fn visit_none<E: de::Error>(self) -> Result<(), E> {
        self.visit_unit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Column;
    use proptest::prelude::*;

    fn mixed() -> DataSource {
        DataSource::new(
            "mixed",
            3,
            vec![
                Column::quantitative("v", vec![Some(0.1), None, Some(-2.5e-300)]),
                Column::ordered(
                    "lvl",
                    vec!["lo".into(), "hi".into()],
                    vec![Some("hi".into()), Some("lo".into()), None],
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_round_trip() {
        let ds = DataSource::new("e", 0, vec![]).unwrap();
        assert_eq!(from_json_bytes(&to_json_bytes(&ds)).unwrap(), ds);
    }

    #[test]
    fn mixed_round_trip_and_layout() {
        let ds = mixed();
        let bytes = to_json_bytes(&ds);
        let text = std::str::from_utf8(&bytes).unwrap();
        assert_eq!(
            text,
            r#"{"name":"mixed","columns":[{"name":"v","type":"quantitative"},{"name":"lvl","type":"ordered","order":["lo","hi"]}],"rows":[[0.1,"hi"],[null,"lo"],[-2.5e-300,null]]}"#
        );
        assert_eq!(from_json_bytes(&bytes).unwrap(), ds);
        assert_eq!(from_json_value(&to_json_value(&ds)).unwrap(), ds);
    }

    #[test]
    fn rows_before_columns() {
        let doc = r#"{"rows":[[1],[null]],"name":"r","columns":[{"name":"a","type":"quantitative"}]}"#;
        let ds = from_json_bytes(doc.as_bytes()).unwrap();
        assert_eq!(ds.n_rows(), 2);
    }

    fn schema_path(doc: &str) -> String {
        match from_json_bytes(doc.as_bytes()) {
            Err(WireError::Schema { path, .. }) => path,
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_paths() {
        let cols = r#""columns":[{"name":"a","type":"quantitative"},{"name":"b","type":"categorical"}]"#;
        assert_eq!(
            schema_path(&format!(r#"{{"name":"x",{cols},"rows":[[1,"a"],["oops","b"]]}}"#)),
            "rows[1][0]"
        );
        assert_eq!(
            schema_path(&format!(r#"{{"name":"x",{cols},"rows":[[1,"a"],[2]]}}"#)),
            "rows[1]"
        );
        assert_eq!(
            schema_path(&format!(r#"{{"name":"x",{cols},"rows":[[1,2]]}}"#)),
            "rows[0][1]"
        );
        assert_eq!(schema_path(r#"{"columns":[],"rows":[]}"#), ".");
        assert_eq!(
            schema_path(r#"{"name":"x","columns":[{"name":"a","type":"weird"}],"rows":[]}"#),
            "columns[0]"
        );
        assert_eq!(schema_path(r#"{"name":"x","columns":[{"type":"quantitative"}],"rows":[]}"#), "columns[0]");
    }

    #[test]
    fn invariant_violations_surface() {
        let doc = r#"{"name":"x","columns":[{"name":"a","type":"quantitative"},{"name":"a","type":"quantitative"}],"rows":[]}"#;
        assert!(matches!(
            from_json_bytes(doc.as_bytes()),
            Err(WireError::Data(DataError::DuplicateColumn(_)))
        ));
    }

    fn arb_source() -> impl Strategy<Value = DataSource> {
        (0usize..6, 0usize..4).prop_flat_map(|(n, p)| {
            proptest::collection::vec(
                prop_oneof![
                    proptest::collection::vec(
                        proptest::option::of(any::<f64>().prop_filter("finite", |v| v.is_finite())),
                        n
                    )
                    .prop_map(ColumnData::Numbers),
                    proptest::collection::vec(proptest::option::of("[a-z\"\\\\ é]{0,4}"), n)
                        .prop_map(ColumnData::Labels),
                ],
                p,
            )
            .prop_map(move |cols| {
                let columns = cols
                    .into_iter()
                    .enumerate()
                    .map(|(i, data)| Column {
                        name: format!("c{i}"),
                        ty: match data {
                            ColumnData::Numbers(_) => ColumnType::Quantitative,
                            ColumnData::Labels(_) => ColumnType::Categorical,
                        },
                        data,
                    })
                    .collect();
                DataSource::new("p", n, columns).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(ds in arb_source()) {
            let back = from_json_bytes(&to_json_bytes(&ds)).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
