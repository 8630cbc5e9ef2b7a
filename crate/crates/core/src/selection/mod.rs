//! Selection groups, their set algebra, and linking across figures.

mod link;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{DataError, DataSource, RowIndexSet, SourceId};

pub use link::{FigureId, LinkRegistry, Notification};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SelectionError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("alpha must be in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("a group named {name:?} already exists on {source_id}")]
    DuplicateName { name: String, source_id: SourceId },
    #[error("groups belong to different sources ({0} and {1})")]
    CrossSource(SourceId, SourceId),
    #[error("unknown group {0}")]
    UnknownGroup(GroupId),
    #[error("bad color {0:?}, expected #rrggbb")]
    BadColor(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn parse(text: &str) -> Result<Rgb, SelectionError> {
        let bad = || SelectionError::BadColor(text.to_string());
        let hex = text.strip_prefix('#').filter(|h| h.len() == 6 && h.is_ascii()).ok_or_else(bad)?;
        let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| bad());
        Ok(Rgb(byte(0)?, byte(2)?, byte(4)?))
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

impl Serialize for Rgb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Rgb::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Colours assigned to new groups, cycled in creation order.
pub const PALETTE: [Rgb; 8] = [
    Rgb(0xe4, 0x1a, 0x1c),
    Rgb(0x37, 0x7e, 0xb8),
    Rgb(0x4d, 0xaf, 0x4a),
    Rgb(0x98, 0x4e, 0xa3),
    Rgb(0xff, 0x7f, 0x00),
    Rgb(0xa6, 0x56, 0x28),
    Rgb(0xf7, 0x81, 0xbf),
    Rgb(0x1b, 0x9e, 0x77),
];

pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupId(pub u64);

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionGroup {
    pub id: GroupId,
    pub name: String,
    pub source: SourceId,
    pub rows: RowIndexSet,
    pub color: Rgb,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetOp {
    Union,
    Intersect,
    Subtract,
}

pub fn combine(a: &SelectionGroup, b: &SelectionGroup, op: SetOp) -> Result<RowIndexSet, SelectionError> {
    if a.source != b.source {
        return Err(SelectionError::CrossSource(a.source, b.source));
    }
    Ok(match op {
        SetOp::Union => a.rows.union(&b.rows),
        SetOp::Intersect => a.rows.intersection(&b.rows),
        SetOp::Subtract => a.rows.difference(&b.rows),
    })
}

/// All groups, kept in creation order (which is also their z-order).
#[derive(Debug, Default)]
pub struct GroupStore {
    groups: Vec<SelectionGroup>,
    next_id: u64,
}

impl GroupStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a group. `color` defaults to the next palette entry and
    /// `alpha` to [`DEFAULT_ALPHA`].
    pub fn create_group(
        &mut self,
        source: &DataSource,
        rows: RowIndexSet,
        name: &str,
        color: Option<Rgb>,
        alpha: Option<f64>,
    ) -> Result<&SelectionGroup, SelectionError> {
        rows.check_bounds(source.n_rows())?;
        let alpha = alpha.unwrap_or(DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(SelectionError::BadAlpha(alpha));
        }
        if self.groups.iter().any(|g| g.source == source.id() && g.name == name) {
            return Err(SelectionError::DuplicateName {
                name: name.to_string(),
                source_id: source.id(),
            });
        }
        let id = GroupId(self.next_id);
        self.next_id += 1;
        self.groups.push(SelectionGroup {
            id,
            name: name.to_string(),
            source: source.id(),
            rows,
            color: color.unwrap_or(PALETTE[id.0 as usize % PALETTE.len()]),
            alpha,
        });
        Ok(self.groups.last().expect("just pushed"))
    }

    /// Replaces a group's rows, keeping its id, colour and z-order.
    pub fn set_rows(&mut self, source: &DataSource, id: GroupId, rows: RowIndexSet) -> Result<&SelectionGroup, SelectionError> {
        rows.check_bounds(source.n_rows())?;
        let g = self
            .groups
            .iter_mut()
            .find(|g| g.id == id)
            .ok_or(SelectionError::UnknownGroup(id))?;
        if g.source != source.id() {
            return Err(SelectionError::CrossSource(g.source, source.id()));
        }
        g.rows = rows;
        Ok(g)
    }

    pub fn delete_group(&mut self, id: GroupId) -> Result<SelectionGroup, SelectionError> {
        let pos = self
            .groups
            .iter()
            .position(|g| g.id == id)
            .ok_or(SelectionError::UnknownGroup(id))?;
        Ok(self.groups.remove(pos))
    }

    pub fn get(&self, id: GroupId) -> Option<&SelectionGroup> {
        self.groups.iter().find(|g| g.id == id)
    }

    pub fn by_name(&self, source: SourceId, name: &str) -> Option<&SelectionGroup> {
        self.groups.iter().find(|g| g.source == source && g.name == name)
    }

    /// Groups on `source` in z-order.
    pub fn for_source(&self, source: SourceId) -> impl Iterator<Item = &SelectionGroup> {
        self.groups.iter().filter(move |g| g.source == source)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn source(n: usize) -> DataSource {
        let rows: Vec<Vec<f64>> = (0..n).map(|r| vec![r as f64]).collect();
        DataSource::from_rows("s", &["v"], &rows).unwrap()
    }

    fn group(src: &DataSource, rows: &[usize]) -> SelectionGroup {
        SelectionGroup {
            id: GroupId(0),
            name: "g".into(),
            source: src.id(),
            rows: RowIndexSet::from_unsorted(rows.to_vec()),
            color: PALETTE[0],
            alpha: 1.0,
        }
    }

    #[test]
    fn create_and_validate() {
        let s = source(10);
        let mut store = GroupStore::new();
        let g = store.create_group(&s, RowIndexSet::from_unsorted(vec![1, 4]), "a", None, None).unwrap();
        assert_eq!((g.id, g.color, g.alpha), (GroupId(0), PALETTE[0], 0.5));
        let empty = store.create_group(&s, RowIndexSet::new(), "empty", None, Some(1.0)).unwrap();
        assert!(empty.rows.is_empty());
        assert_eq!(empty.color, PALETTE[1]);
        assert!(matches!(
            store.create_group(&s, RowIndexSet::new(), "a", None, None),
            Err(SelectionError::DuplicateName { .. })
        ));
        assert_eq!(store.create_group(&s, RowIndexSet::new(), "z", None, Some(0.0)).unwrap_err(), SelectionError::BadAlpha(0.0));
        assert!(store.create_group(&s, RowIndexSet::new(), "z", None, Some(1.5)).is_err());
        assert!(matches!(
            store.create_group(&s, RowIndexSet::from_unsorted(vec![10]), "z", None, None),
            Err(SelectionError::Data(DataError::RowOutOfRange { row: 10, n: 10 }))
        ));
        // The same name is fine on another source.
        let t = source(3);
        assert!(store.create_group(&t, RowIndexSet::new(), "a", None, None).is_ok());
        assert_eq!(store.for_source(s.id()).count(), 2);
    }

    #[test]
    fn palette_cycles() {
        let s = source(1);
        let mut store = GroupStore::new();
        let colors: Vec<Rgb> = (0..9)
            .map(|i| store.create_group(&s, RowIndexSet::new(), &format!("g{i}"), None, None).unwrap().color)
            .collect();
        assert_eq!(colors[8], colors[0]);
        assert_eq!(colors[..8], PALETTE);
    }

    #[test]
    fn set_rows_and_delete() {
        let s = source(5);
        let mut store = GroupStore::new();
        let id = store.create_group(&s, RowIndexSet::new(), "a", None, None).unwrap().id;
        store.set_rows(&s, id, RowIndexSet::from_unsorted(vec![2])).unwrap();
        assert_eq!(store.get(id).unwrap().rows.as_slice(), &[2]);
        assert!(store.set_rows(&s, id, RowIndexSet::from_unsorted(vec![5])).is_err());
        store.delete_group(id).unwrap();
        assert!(store.is_empty());
        assert_eq!(store.delete_group(id).unwrap_err(), SelectionError::UnknownGroup(id));
    }

    #[test]
    fn combine_examples() {
        let s = source(5);
        let a = group(&s, &[1, 3]);
        let b = group(&s, &[2, 3]);
        assert_eq!(combine(&a, &b, SetOp::Union).unwrap().as_slice(), &[1, 2, 3]);
        assert!(combine(&group(&s, &[0]), &group(&s, &[1]), SetOp::Intersect).unwrap().is_empty());
        assert!(combine(&a, &a, SetOp::Subtract).unwrap().is_empty());
        let other = group(&source(5), &[1]);
        assert!(matches!(combine(&a, &other, SetOp::Union), Err(SelectionError::CrossSource(..))));
    }

    #[test]
    fn color_text() {
        assert_eq!(Rgb(255, 0, 16).to_string(), "#ff0010");
        assert_eq!(Rgb::parse("#ff0010").unwrap(), Rgb(255, 0, 16));
        assert!(Rgb::parse("ff0010").is_err());
        assert!(Rgb::parse("#ff00").is_err());
        assert!(Rgb::parse("#gg0000").is_err());
    }

    proptest! {
        #[test]
        fn combine_laws(a in proptest::collection::vec(0usize..50, 0..30),
                        b in proptest::collection::vec(0usize..50, 0..30)) {
            let s = source(50);
            let (ga, gb) = (group(&s, &a), group(&s, &b));
            prop_assert_eq!(combine(&ga, &gb, SetOp::Union).unwrap(), combine(&gb, &ga, SetOp::Union).unwrap());
            prop_assert_eq!(combine(&ga, &gb, SetOp::Intersect).unwrap(), combine(&gb, &ga, SetOp::Intersect).unwrap());
            let sub = combine(&ga, &gb, SetOp::Subtract).unwrap();
            let both = combine(&ga, &gb, SetOp::Intersect).unwrap();
            prop_assert_eq!(sub.union(&both), ga.rows.clone());
        }
    }
}
