use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{GroupId, SelectionGroup};
use crate::data::{RowIndexSet, SourceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FigureId(pub u64);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Notification {
    pub figure: FigureId,
    pub group: GroupId,
    pub rows: RowIndexSet,
}

/// Which figures show which source, and the groups each figure shows.
#[derive(Debug, Default)]
pub struct LinkRegistry {
    by_source: BTreeMap<SourceId, BTreeSet<FigureId>>,
    visible: BTreeMap<FigureId, (SourceId, Vec<GroupId>)>,
}

impl LinkRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, figure: FigureId, source: SourceId) {
        self.remove(figure);
        self.by_source.entry(source).or_default().insert(figure);
        self.visible.insert(figure, (source, Vec::new()));
    }

    pub fn remove(&mut self, figure: FigureId) -> bool {
        let Some((source, _)) = self.visible.remove(&figure) else {
            return false;
        };
        if let Some(set) = self.by_source.get_mut(&source) {
            set.remove(&figure);
            if set.is_empty() {
                self.by_source.remove(&source);
            }
        }
        true
    }

    pub fn figures(&self, source: SourceId) -> impl Iterator<Item = FigureId> + '_ {
        self.by_source.get(&source).into_iter().flatten().copied()
    }

    pub fn source_of(&self, figure: FigureId) -> Option<SourceId> {
        self.visible.get(&figure).map(|(s, _)| *s)
    }

    /// Groups shown by `figure`, oldest first.
    pub fn visible_groups(&self, figure: FigureId) -> &[GroupId] {
        self.visible.get(&figure).map(|(_, g)| g.as_slice()).unwrap_or(&[])
    }

    /// Forgets a deleted group on every figure.
    pub fn forget_group(&mut self, group: GroupId) {
        for (_, groups) in self.visible.values_mut() {
            groups.retain(|&g| g != group);
        }
    }

    pub fn propagate(&mut self, group: &SelectionGroup) -> Vec<Notification> {
        self.propagate_live(group, |_| true)
    }

    /// One notification per live figure on the group's source. Figures for
    /// which `alive` returns false are dropped from the registry first.
    pub fn propagate_live(
        &mut self,
        group: &SelectionGroup,
        alive: impl Fn(FigureId) -> bool,
    ) -> Vec<Notification> {
        let dead: Vec<FigureId> = self.figures(group.source).filter(|&f| !alive(f)).collect();
        for f in dead {
            self.remove(f);
        }
        let figures: Vec<FigureId> = self.figures(group.source).collect();
        figures
            .into_iter()
            .map(|figure| {
                let groups = &mut self.visible.get_mut(&figure).expect("registered").1;
                if !groups.contains(&group.id) {
                    groups.push(group.id);
                }
                Notification {
                    figure,
                    group: group.id,
                    rows: group.rows.clone(),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::PALETTE;

    fn group(id: u64, source: SourceId, rows: Vec<usize>) -> SelectionGroup {
        SelectionGroup {
            id: GroupId(id),
            name: format!("g{id}"),
            source,
            rows: RowIndexSet::from_unsorted(rows),
            color: PALETTE[0],
            alpha: 0.5,
        }
    }

    #[test]
    fn notifies_same_source_only() {
        let (s, t) = (SourceId(900), SourceId(901));
        let mut reg = LinkRegistry::new();
        for f in 0..3 {
            reg.register(FigureId(f), s);
        }
        reg.register(FigureId(3), t);
        let g = group(1, s, vec![4, 5]);
        let notes = reg.propagate(&g);
        assert_eq!(notes.len(), 3);
        assert!(notes.iter().all(|n| n.group == g.id && n.rows == g.rows && n.figure != FigureId(3)));
        for f in 0..3 {
            assert_eq!(reg.visible_groups(FigureId(f)), &[g.id]);
        }
        assert!(reg.visible_groups(FigureId(3)).is_empty());
    }

    #[test]
    fn empty_registry() {
        let mut reg = LinkRegistry::new();
        assert!(reg.propagate(&group(0, SourceId(1), vec![])).is_empty());
    }

    #[test]
    fn repeated_propagation_still_delivered() {
        let s = SourceId(5);
        let mut reg = LinkRegistry::new();
        reg.register(FigureId(0), s);
        let g = group(2, s, vec![1]);
        assert_eq!(reg.propagate(&g).len(), 1);
        assert_eq!(reg.propagate(&g).len(), 1);
        assert_eq!(reg.visible_groups(FigureId(0)), &[g.id]);
    }

    #[test]
    fn dead_figures_pruned() {
        let s = SourceId(6);
        let mut reg = LinkRegistry::new();
        reg.register(FigureId(0), s);
        reg.register(FigureId(1), s);
        let notes = reg.propagate_live(&group(0, s, vec![]), |f| f != FigureId(1));
        assert_eq!(notes.len(), 1);
        assert_eq!(reg.source_of(FigureId(1)), None);
        assert_eq!(reg.figures(s).collect::<Vec<_>>(), vec![FigureId(0)]);
    }

    #[test]
    fn reregister_moves_figure() {
        let mut reg = LinkRegistry::new();
        reg.register(FigureId(0), SourceId(1));
        reg.register(FigureId(0), SourceId(2));
        assert_eq!(reg.figures(SourceId(1)).count(), 0);
        assert_eq!(reg.source_of(FigureId(0)), Some(SourceId(2)));
        reg.propagate(&group(3, SourceId(2), vec![]));
        reg.forget_group(GroupId(3));
        assert!(reg.visible_groups(FigureId(0)).is_empty());
        assert!(reg.remove(FigureId(0)));
        assert!(!reg.remove(FigureId(0)));
    }
}
