//! Q-bisimulation: partition refinement, bisimulation closure of world
//! sets, cross-model bisimilarity and characteristic formulas.
//!
//! Announcements of epistemic formulas are handled extensionally. The
//! extension of any formula over the vocabulary Q is a union of classes of
//! the coarsest Q-bisimulation partition, and on a finite model every such
//! union is the extension of a disjunction of characteristic formulas.
//! So "some known formula" ranges exactly over the bisimulation-closed
//! supersets of the speaker's accessible set.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::Formula;
use crate::kripke::{AtomId, Frame, KripkeModel, PointedModel, World};
use crate::worldset::WorldSet;

/// Coarsest Q-bisimulation partition of a model's worlds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    atoms: Vec<AtomId>,
    class_of: Vec<usize>,
    classes: Vec<WorldSet>,
    rounds: usize,
}

impl Partition {
    /// Builds a partition from explicit classes. Classes are reordered by
    /// their smallest world.
    pub fn from_classes(universe: usize, atoms: Vec<AtomId>, mut classes: Vec<WorldSet>, rounds: usize) -> Self {
        classes.retain(|c| !c.is_empty());
        classes.sort_by_key(|c| c.iter().next());
        let mut class_of = vec![usize::MAX; universe];
        for (i, c) in classes.iter().enumerate() {
            for w in c.iter() {
                assert_eq!(class_of[w], usize::MAX, "classes overlap at world {w}");
                class_of[w] = i;
            }
        }
        assert!(class_of.iter().all(|&c| c != usize::MAX), "classes do not cover");
        Partition {
            atoms,
            class_of,
            classes,
            rounds,
        }
    }

    pub fn atoms(&self) -> &[AtomId] {
        &self.atoms
    }

    pub fn classes(&self) -> &[WorldSet] {
        &self.classes
    }

    pub fn class_of(&self, w: World) -> usize {
        self.class_of[w]
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Refinement rounds needed to reach stability (0 when the valuation
    /// split is already stable).
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn universe(&self) -> usize {
        self.class_of.len()
    }

    /// Smallest bisimulation-closed superset of `x`.
    pub fn closure(&self, x: &WorldSet) -> WorldSet {
        let mut out = WorldSet::empty(self.universe());
        let touched: BTreeSet<usize> = x.iter().map(|w| self.class_of[w]).collect();
        for c in touched {
            out.union_with(&self.classes[c]);
        }
        out
    }

    pub fn is_closed(&self, x: &WorldSet) -> bool {
        &self.closure(x) == x
    }

    /// Indices of the classes an agent can reach from a class.
    fn successor_classes(&self, m: &KripkeModel, agent: usize, class: usize) -> BTreeSet<usize> {
        let rep = self.classes[class].iter().next().expect("classes are non-empty");
        m.successors(agent, rep).iter().map(|w| self.class_of[w]).collect()
    }
}

/// Coarsest Q-autobisimulation of `m`: split on Q-valuations, then refine
/// by per-agent successor-class signatures until nothing changes.
pub fn partition(m: &KripkeModel, q: &[AtomId]) -> Partition {
    let n = m.world_count();
    let mut class_of: Vec<usize> = {
        let sigs: Vec<Vec<bool>> = (0..n)
            .map(|w| q.iter().map(|&p| m.valuation(p).contains(w)).collect())
            .collect();
        renumber(&sigs)
    };
    let mut count = class_of.iter().max().map_or(0, |c| c + 1);
    let mut rounds = 0;
    loop {
        let sigs: Vec<(usize, Vec<Vec<usize>>)> = (0..n)
            .map(|w| {
                let per_agent = (0..m.agents().len())
                    .map(|a| {
                        let set: BTreeSet<usize> =
                            m.successors(a, w).iter().map(|v| class_of[v]).collect();
                        set.into_iter().collect()
                    })
                    .collect();
                (class_of[w], per_agent)
            })
            .collect();
        let next = renumber(&sigs);
        let next_count = next.iter().max().map_or(0, |c| c + 1);
        if next_count == count {
            break;
        }
        class_of = next;
        count = next_count;
        rounds += 1;
    }
    let mut classes = vec![WorldSet::empty(n); count];
    for (w, &c) in class_of.iter().enumerate() {
        classes[c].insert(w);
    }
    Partition::from_classes(n, q.to_vec(), classes, rounds)
}

/// Assigns class numbers in order of first occurrence, so numbering is
/// deterministic.
fn renumber<T: Ord + Clone>(sigs: &[T]) -> Vec<usize> {
    let mut ids: BTreeMap<T, usize> = BTreeMap::new();
    sigs.iter()
        .map(|s| {
            let next = ids.len();
            *ids.entry(s.clone()).or_insert(next)
        })
        .collect()
}

/// Partition over all declared atoms.
pub fn full_partition(m: &KripkeModel) -> Partition {
    let q: Vec<AtomId> = (0..m.atoms().len()).collect();
    partition(m, &q)
}

/// Resolves atom names against a model; unknown names are an error.
pub fn atom_ids(m: &KripkeModel, names: &[String]) -> Result<Vec<AtomId>, String> {
    names
        .iter()
        .map(|n| m.atom_index(n).ok_or_else(|| format!("unknown atom `{n}`")))
        .collect()
}

pub fn closure(part: &Partition, x: &WorldSet) -> WorldSet {
    part.closure(x)
}

/// Disjoint union of two models over the union of their agents and atoms.
/// Missing agents get empty relations, missing atoms are false.
fn disjoint_union(m: &KripkeModel, n: &KripkeModel) -> KripkeModel {
    let agents: Vec<String> = m
        .agents()
        .iter()
        .chain(n.agents())
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let atoms: Vec<String> = m
        .atoms()
        .iter()
        .chain(n.atoms())
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let offset = m.world_count();
    let total = offset + n.world_count();
    let worlds = m
        .worlds()
        .iter()
        .map(|w| format!("L.{w}"))
        .chain(n.worlds().iter().map(|w| format!("R.{w}")))
        .collect();
    let valuation = atoms
        .iter()
        .map(|a| {
            let mut set = WorldSet::empty(total);
            if let Some(i) = m.atom_index(a) {
                m.valuation(i).iter().for_each(|w| set.insert(w));
            }
            if let Some(i) = n.atom_index(a) {
                n.valuation(i).iter().for_each(|w| set.insert(w + offset));
            }
            set
        })
        .collect();
    let relations = agents
        .iter()
        .map(|a| {
            let mut succ = vec![WorldSet::empty(total); total];
            if let Some(i) = m.agent_index(a) {
                for (x, y) in m.pairs(i) {
                    succ[x].insert(y);
                }
            }
            if let Some(i) = n.agent_index(a) {
                for (x, y) in n.pairs(i) {
                    succ[x + offset].insert(y + offset);
                }
            }
            succ
        })
        .collect();
    KripkeModel::from_parts(worlds, agents, atoms, valuation, relations, Frame::K)
}

/// Whether some Q-bisimulation links the two points. `q` names atoms; an
/// atom missing from one model is false throughout it.
pub fn bisimilar(left: &PointedModel, right: &PointedModel, q: &[String]) -> bool {
    let union = disjoint_union(&left.model, &right.model);
    let ids: Vec<AtomId> = q
        .iter()
        .filter_map(|name| union.atom_index(name))
        .collect();
    let part = partition(&union, &ids);
    part.class_of(left.point) == part.class_of(right.point + left.model.world_count())
}

/// An epistemic formula over the partition's atoms whose extension in `m`
/// is exactly class `class`.
pub fn characteristic_formula(m: &KripkeModel, part: &Partition, class: usize) -> Formula {
    let k = part.class_count();
    let literals: Vec<Formula> = (0..k)
        .map(|c| {
            let rep = part.classes()[c].iter().next().expect("non-empty class");
            Formula::conj(part.atoms().iter().map(|&p| {
                let atom = Formula::atom(m.atoms()[p].clone());
                if m.valuation(p).contains(rep) {
                    atom
                } else {
                    atom.not()
                }
            }))
        })
        .collect();
    let successors: Vec<Vec<BTreeSet<usize>>> = (0..m.agents().len())
        .map(|a| (0..k).map(|c| part.successor_classes(m, a, c)).collect())
        .collect();
    let mut level = literals.clone();
    for _ in 0..part.rounds() {
        level = (0..k)
            .map(|c| {
                let mut parts = vec![literals[c].clone()];
                for (a, agent) in m.agents().iter().enumerate() {
                    let succ = &successors[a][c];
                    parts.push(Formula::knows(
                        agent.clone(),
                        Formula::disj(succ.iter().map(|&d| level[d].clone())),
                    ));
                    parts.extend(
                        succ.iter()
                            .map(|&d| Formula::possible(agent.clone(), level[d].clone())),
                    );
                }
                Formula::conj(parts)
            })
            .collect();
    }
    level.swap_remove(class)
}
