//! Brute-force deciders and the differential-testing harness.
//!
//! Nothing here calls the fast deciders in [`crate::semantics`]. The
//! oracle computes bisimilarity with a naive greatest-fixpoint over world
//! pairs and searches every legal share (or every legal announcement
//! sequence) literally.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bisim::Partition;
use crate::formula::{Formula, Group};
use crate::kripke::{random_model, Agent, Frame, GeneratorParams, KripkeModel, ModelError, ModelSpec, World};
use crate::semantics::{resolve_group, Amount, EvalError, Evaluator, Form, Order, Quant, Variant};
use crate::worldset::WorldSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("refusing {what}: size {size} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        size: u128,
        limit: u128,
    },
}

/// Hard limits on exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    /// Classes not touching the base set of a closed-superset enumeration.
    pub max_free_classes: usize,
    /// Share tuples or announcement sequences examined per decision.
    pub max_search: u128,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_free_classes: 16,
            max_search: 1 << 22,
        }
    }
}

/// Largest Q-autobisimulation by literal refinement of the pair relation:
/// start from all pairs agreeing on Q and drop pairs failing Forth or Back
/// until stable.
pub fn naive_partition(m: &KripkeModel, q: &[usize]) -> Partition {
    let n = m.world_count();
    let agents = m.agents().len();
    let mut related = vec![vec![false; n]; n];
    for x in 0..n {
        for y in 0..n {
            related[x][y] = q.iter().all(|&p| m.valuation(p).contains(x) == m.valuation(p).contains(y));
        }
    }
    let mut rounds = 0;
    loop {
        let mut next = related.clone();
        let mut changed = false;
        for x in 0..n {
            for y in 0..n {
                if !related[x][y] {
                    continue;
                }
                let ok = (0..agents).all(|a| {
                    let forth = m
                        .successors(a, x)
                        .iter()
                        .all(|u| m.successors(a, y).iter().any(|v| related[u][v]));
                    let back = m
                        .successors(a, y)
                        .iter()
                        .all(|v| m.successors(a, x).iter().any(|u| related[u][v]));
                    forth && back
                });
                if !ok {
                    next[x][y] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        related = next;
        rounds += 1;
    }
    let mut classes: Vec<WorldSet> = Vec::new();
    let mut seen = WorldSet::empty(n);
    for x in 0..n {
        if seen.contains(x) {
            continue;
        }
        let class = WorldSet::from_worlds(n, (0..n).filter(|&y| related[x][y]));
        seen.union_with(&class);
        classes.push(class);
    }
    Partition::from_classes(n, q.to_vec(), classes, rounds)
}

/// All unions of partition classes containing `base`, smallest first.
pub fn enumerate_closed_supersets(part: &Partition, base: &WorldSet, bounds: &Bounds) -> Result<Vec<WorldSet>, OracleError> {
    let forced: BTreeSet<usize> = base.iter().map(|w| part.class_of(w)).collect();
    let free: Vec<usize> = (0..part.class_count()).filter(|c| !forced.contains(c)).collect();
    if free.len() > bounds.max_free_classes {
        return Err(OracleError::TooLarge {
            what: "closed-superset enumeration (free classes)",
            size: free.len() as u128,
            limit: bounds.max_free_classes as u128,
        });
    }
    let mut core = WorldSet::empty(part.universe());
    for &c in &forced {
        core.union_with(&part.classes()[c]);
    }
    let mut out: Vec<WorldSet> = (0u64..1 << free.len())
        .map(|bits| {
            let mut set = core.clone();
            for (i, &c) in free.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    set.union_with(&part.classes()[c]);
                }
            }
            set
        })
        .collect();
    out.sort_by_key(WorldSet::len);
    Ok(out)
}

/// Literal success test: agent `b`'s new neighbourhood is every `t` with
/// `s ~_b t` that survives the announcements.
fn success(m: &KripkeModel, s: World, group: &[Agent], survivors: &WorldSet, target: &WorldSet, quant: Quant) -> bool {
    let learns = |&b: &Agent| {
        (0..m.world_count())
            .filter(|&t| m.successors(b, s).contains(t) && survivors.contains(t))
            .all(|t| target.contains(t))
    };
    match quant {
        Quant::Some => group.iter().any(learns),
        Quant::All => group.iter().all(learns),
    }
}

fn check_search(size: u128, bounds: &Bounds) -> Result<(), OracleError> {
    if size > bounds.max_search {
        return Err(OracleError::TooLarge {
            what: "share search",
            size,
            limit: bounds.max_search,
        });
    }
    Ok(())
}

/// Exhaustive existential search over the information states reachable
/// under `variant`.
pub fn brute_force_dk(
    m: &KripkeModel,
    s: World,
    group: &[Agent],
    target: &WorldSet,
    variant: Variant,
    bounds: &Bounds,
) -> Result<bool, OracleError> {
    let n = m.world_count();
    if variant.form() == Form::Cap {
        let pooled = WorldSet::from_worlds(n, (0..n).filter(|&t| group.iter().all(|&b| m.pairs(b).any(|p| p == (s, t)))));
        let learns = |_: &Agent| pooled.iter().all(|t| target.contains(t));
        return Ok(match variant.quant() {
            Quant::Some => group.iter().any(learns),
            Quant::All => group.iter().all(learns),
        });
    }
    let q: Vec<usize> = (0..m.atoms().len()).collect();
    let part = naive_partition(m, &q);
    let quant = variant.quant();
    match (variant.amount(), variant.order()) {
        (_, Order::Simultaneous) => {
            // A known set of formulas has a closed extension containing the
            // neighbourhood, exactly like a single known formula.
            let choices: Vec<Vec<WorldSet>> = group
                .iter()
                .map(|&a| enumerate_closed_supersets(&part, m.successors(a, s), bounds))
                .collect::<Result<_, _>>()?;
            check_search(choices.iter().map(|c| c.len() as u128).product(), bounds)?;
            Ok(choices
                .iter()
                .multi_cartesian_product()
                .any(|tuple| {
                    let survivors = tuple.iter().fold(WorldSet::full(n), |acc, e| acc.intersection(e));
                    success(m, s, group, &survivors, target, quant)
                }))
        }
        (Amount::Single, Order::Omega) => {
            let mut budget = bounds.max_search;
            for order in group.iter().copied().permutations(group.len()) {
                if single_turns(m, &part, s, group, &order, WorldSet::full(n), target, quant, bounds, &mut budget)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        (Amount::Set, Order::Omega | Order::Transfinite) => {
            // Every script's limit is a state reachable by a finite prefix:
            // states only shrink and there are finitely many of them.
            let mut seen: HashSet<WorldSet> = HashSet::new();
            let mut stack = vec![WorldSet::full(n)];
            seen.insert(WorldSet::full(n));
            while let Some(state) = stack.pop() {
                if success(m, s, group, &state, target, quant) {
                    return Ok(true);
                }
                for &a in group {
                    let base = m.successors(a, s).intersection(&state);
                    for e in enumerate_closed_supersets(&part, &base, bounds)? {
                        let next = state.intersection(&e);
                        if seen.insert(next.clone()) {
                            check_search(seen.len() as u128, bounds)?;
                            stack.push(next);
                        }
                    }
                }
            }
            Ok(false)
        }
        _ => unreachable!("variant {variant} cannot be constructed"),
    }
}

#[allow(clippy::too_many_arguments)]
fn single_turns(
    m: &KripkeModel,
    part: &Partition,
    s: World,
    group: &[Agent],
    remaining: &[Agent],
    state: WorldSet,
    target: &WorldSet,
    quant: Quant,
    bounds: &Bounds,
    budget: &mut u128,
) -> Result<bool, OracleError> {
    let Some((&speaker, rest)) = remaining.split_first() else {
        return Ok(success(m, s, group, &state, target, quant));
    };
    // correctness: the speaker knows the statement given what was said
    let base = m.successors(speaker, s).intersection(&state);
    for e in enumerate_closed_supersets(part, &base, bounds)? {
        if *budget == 0 {
            return Err(OracleError::TooLarge {
                what: "announcement sequences",
                size: bounds.max_search + 1,
                limit: bounds.max_search,
            });
        }
        *budget -= 1;
        if single_turns(m, part, s, group, rest, state.intersection(&e), target, quant, bounds, budget)? {
            return Ok(true);
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// Formula enumeration

pub const MAX_ENUM_ATOMS: usize = 2;
pub const MAX_ENUM_AGENTS: usize = 2;
pub const MAX_ENUM_DEPTH: usize = 3;

fn refuse(what: &'static str, size: usize, limit: usize) -> OracleError {
    OracleError::TooLarge {
        what,
        size: size as u128,
        limit: limit as u128,
    }
}

fn boolean_closure(found: &mut BTreeMap<WorldSet, Formula>) {
    loop {
        let current: Vec<(WorldSet, Formula)> = found.iter().map(|(e, f)| (e.clone(), f.clone())).collect();
        let before = found.len();
        for (e, f) in &current {
            found.entry(e.complement()).or_insert_with(|| f.clone().not());
        }
        for (i, (e1, f1)) in current.iter().enumerate() {
            for (e2, f2) in &current[i + 1..] {
                found.entry(e1.union(e2)).or_insert_with(|| f1.clone().or(f2.clone()));
            }
        }
        if found.len() == before {
            return;
        }
    }
}

/// Epistemic formulas over the given atoms and agents up to modal depth
/// `depth`, one per distinct extension on `m`, paired with that extension.
/// Extensions are computed alongside construction, not by the evaluator.
pub fn enumerate_formulas(
    m: &KripkeModel,
    atoms: &[String],
    agents: &[String],
    depth: usize,
) -> Result<Vec<(Formula, WorldSet)>, OracleError> {
    if atoms.len() > MAX_ENUM_ATOMS {
        return Err(refuse("formula enumeration (atoms)", atoms.len(), MAX_ENUM_ATOMS));
    }
    if agents.len() > MAX_ENUM_AGENTS {
        return Err(refuse("formula enumeration (agents)", agents.len(), MAX_ENUM_AGENTS));
    }
    if depth > MAX_ENUM_DEPTH {
        return Err(refuse("formula enumeration (depth)", depth, MAX_ENUM_DEPTH));
    }
    let atom_ids: Vec<usize> = atoms.iter().filter_map(|a| m.atom_index(a)).collect();
    let agent_ids: Vec<usize> = agents.iter().filter_map(|a| m.agent_index(a)).collect();
    let mut found: BTreeMap<WorldSet, Formula> = BTreeMap::new();
    found.insert(m.all_worlds(), Formula::True);
    for &p in &atom_ids {
        found
            .entry(m.valuation(p).clone())
            .or_insert_with(|| Formula::atom(m.atoms()[p].clone()));
    }
    boolean_closure(&mut found);
    for _ in 0..depth {
        let current: Vec<(WorldSet, Formula)> = found.iter().map(|(e, f)| (e.clone(), f.clone())).collect();
        for &a in &agent_ids {
            for (e, f) in &current {
                found
                    .entry(m.box_preimage(a, e))
                    .or_insert_with(|| Formula::knows(m.agents()[a].clone(), f.clone()));
            }
        }
        boolean_closure(&mut found);
    }
    Ok(found.into_iter().map(|(e, f)| (f, e)).collect())
}

/// Random epistemic formula (no `D`) of modal depth at most `depth`.
pub fn random_formula<R: Rng>(rng: &mut R, atoms: &[String], agents: &[String], depth: usize) -> Formula {
    fn go<R: Rng>(rng: &mut R, atoms: &[String], agents: &[String], depth: usize, size: usize) -> Formula {
        let leaf = size == 0 || rng.gen_bool(0.25);
        if leaf {
            return if atoms.is_empty() || rng.gen_bool(0.1) {
                Formula::True
            } else {
                Formula::atom(atoms.choose(rng).expect("non-empty").clone())
            };
        }
        let modal = depth > 0 && !agents.is_empty();
        match rng.gen_range(0..if modal { 6 } else { 3 }) {
            0 => go(rng, atoms, agents, depth, size - 1).not(),
            1 => go(rng, atoms, agents, depth, size - 1).or(go(rng, atoms, agents, depth, size - 1)),
            2 => go(rng, atoms, agents, depth, size - 1).and(go(rng, atoms, agents, depth, size - 1)),
            3 | 4 => Formula::knows(
                agents.choose(rng).expect("non-empty").clone(),
                go(rng, atoms, agents, depth - 1, size - 1),
            ),
            _ => Formula::possible(
                agents.choose(rng).expect("non-empty").clone(),
                go(rng, atoms, agents, depth - 1, size - 1),
            ),
        }
    }
    go(rng, atoms, agents, depth, depth + 3)
}

// ---------------------------------------------------------------------------
// Differential harness

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffParams {
    pub seed: u64,
    pub count: usize,
    pub max_worlds: usize,
    pub max_agents: usize,
    pub max_atoms: usize,
    /// Modal depth of random targets.
    pub depth: usize,
    /// `None` alternates K and S5.
    pub frame: Option<Frame>,
    pub bounds: Bounds,
}

impl Default for DiffParams {
    fn default() -> Self {
        DiffParams {
            seed: 0,
            count: 1000,
            max_worlds: 5,
            max_agents: 3,
            max_atoms: 2,
            depth: 3,
            frame: None,
            bounds: Bounds::default(),
        }
    }
}

/// A disagreement that can be replayed on its own.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub check: String,
    pub model: ModelSpec,
    pub world: String,
    pub group: Vec<String>,
    /// The `D` target; the checked formula is `D{group} target`.
    pub target: String,
    pub left: String,
    pub left_verdict: bool,
    /// A variant string, or `oracle` for brute force under `left`.
    pub right: String,
    pub right_verdict: bool,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("witness field `{0}` is malformed")]
    Malformed(&'static str),
}

impl Witness {
    /// Re-evaluates both sides from the stored data.
    pub fn replay(&self, bounds: &Bounds) -> Result<(bool, bool), ReplayError> {
        let m = KripkeModel::from_spec(&self.model)?;
        let s = m.world_index(&self.world).ok_or(ReplayError::Malformed("world"))?;
        let target = Formula::parse(&self.target).map_err(|_| ReplayError::Malformed("target"))?;
        let group = Group::new(self.group.iter().cloned()).map_err(|_| ReplayError::Malformed("group"))?;
        let agents = resolve_group(&m, &group)?;
        let d = Formula::distributed(group, target.clone());
        let left: Variant = self.left.parse().map_err(|_| ReplayError::Malformed("left"))?;
        let lv = Evaluator::new(&m, left).extension(&d)?.contains(s);
        let rv = if self.right == "oracle" {
            let ext = Evaluator::new(&m, left).extension(&target)?;
            brute_force_dk(&m, s, &agents, &ext, left, bounds)?
        } else {
            let right: Variant = self.right.parse().map_err(|_| ReplayError::Malformed("right"))?;
            Evaluator::new(&m, right).extension(&d)?.contains(s)
        };
        Ok((lv, rv))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub violations: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffReport {
    pub params: DiffParamsRecord,
    pub instances: u64,
    /// Pointed evaluations: one per (instance, world).
    pub evaluations: u64,
    pub variants: Vec<String>,
    /// `agreement[i][j]`: evaluations where variants i and j agree.
    pub agreement: Vec<Vec<u64>>,
    /// Evaluations where brute force ran for every variant.
    pub oracle_checked: u64,
    pub oracle_refused: u64,
    /// Fast/brute-force disagreements per variant.
    pub oracle_discrepancies: Vec<u64>,
    pub checks: Vec<PropertyCheck>,
    pub collapse_classes: Vec<Vec<String>>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

/// Serializable copy of the run parameters (f64-free).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffParamsRecord {
    pub seed: u64,
    pub count: usize,
    pub max_worlds: usize,
    pub max_agents: usize,
    pub max_atoms: usize,
    pub depth: usize,
    pub frame: Option<Frame>,
}

impl From<&DiffParams> for DiffParamsRecord {
    fn from(p: &DiffParams) -> Self {
        DiffParamsRecord {
            seed: p.seed,
            count: p.count,
            max_worlds: p.max_worlds,
            max_agents: p.max_agents,
            max_atoms: p.max_atoms,
            depth: p.depth,
            frame: p.frame,
        }
    }
}

pub const CHECK_ORACLE: &str = "fast algorithm agrees with brute force";
pub const CHECK_CAP: &str = "(cap,-,-,some) == (cap,-,-,all)";
pub const CHECK_SINGLE: &str = "all four single-formula variants agree";
pub const CHECK_SET_SOME: &str = "(L0,set,sim,some) == (L0,set,omega,some)";
pub const CHECK_SET_ALL: &str = "(L0,set,sim,all) == (L0,set,omega,all)";
pub const CHECK_OMEGA: &str = "(L0,set,Omega,some) == (L0,set,Omega,all)";
pub const CHECK_IMPLIES_CAP: &str = "every variant implies (cap,-,-,all)";
pub const CHECK_ALL_SOME: &str = "(f,a,o,all) implies (f,a,o,some)";
pub const CHECK_FINITE_COLLAPSE: &str = "all ten L0 variants agree on finite models";

const WITNESS_CAP_PER_CHECK: usize = 10;

struct Instance {
    model: KripkeModel,
    group: Vec<Agent>,
    target: Formula,
    /// Per world: fast verdicts and (when within bounds) oracle verdicts.
    rows: Vec<([bool; 12], Option<[bool; 12]>)>,
}

fn instance(params: &DiffParams, index: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index as u64);
    let frame = params.frame.unwrap_or(if index.is_multiple_of(2) { Frame::K } else { Frame::S5 });
    let gen = GeneratorParams {
        seed: rng.gen(),
        world_count: rng.gen_range(1..=params.max_worlds),
        agent_count: rng.gen_range(1..=params.max_agents),
        atom_count: rng.gen_range(1..=params.max_atoms),
        edge_density: rng.gen_range(0.1..=0.9),
        frame,
    };
    let model = random_model(&gen).expect("harness parameters are validated");
    let agent_count = model.agents().len();
    let group: Vec<Agent> = loop {
        let g: Vec<Agent> = (0..agent_count).filter(|_| rng.gen_bool(0.6)).collect();
        if !g.is_empty() {
            break g;
        }
    };
    let target = random_formula(&mut rng, model.atoms(), model.agents(), params.depth);
    // L0 targets have the same extension under every variant
    let ext = Evaluator::new(&model, Variant::INTERSECTION)
        .extension(&target)
        .expect("target uses model vocabulary");
    let part = crate::bisim::full_partition(&model);
    let rows = (0..model.world_count())
        .map(|s| {
            let fast = Variant::ALL.map(|v| crate::semantics::decide(&model, &part, s, &group, &ext, v));
            let mut oracle = [false; 12];
            let mut ok = true;
            for (i, v) in Variant::ALL.iter().enumerate() {
                match brute_force_dk(&model, s, &group, &ext, *v, &params.bounds) {
                    Ok(b) => oracle[i] = b,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            (fast, ok.then_some(oracle))
        })
        .collect();
    Instance {
        model,
        group,
        target,
        rows,
    }
}

fn idx(s: &str) -> usize {
    s.parse::<Variant>().expect("valid variant literal").index()
}

/// Runs the harness. The report depends only on `params`.
pub fn differential_run(params: &DiffParams) -> Result<DiffReport, ModelError> {
    if params.max_worlds == 0 || params.max_agents == 0 || params.max_atoms == 0 {
        return Err(ModelError::Params("harness bounds must be at least 1".into()));
    }
    GeneratorParams {
        seed: 0,
        world_count: params.max_worlds,
        agent_count: params.max_agents,
        atom_count: params.max_atoms,
        edge_density: 0.5,
        frame: Frame::K,
    }
    .check()?;

    let instances: Vec<Instance> = (0..params.count).into_par_iter().map(|i| instance(params, i)).collect();

    let names: Vec<String> = Variant::ALL.iter().map(Variant::to_string).collect();
    let mut agreement = vec![vec![0u64; 12]; 12];
    let mut evaluations = 0u64;
    let mut oracle_checked = 0u64;
    let mut oracle_refused = 0u64;
    let mut oracle_discrepancies = vec![0u64; 12];
    let check_order = [
        CHECK_ORACLE,
        CHECK_SINGLE,
        CHECK_SET_SOME,
        CHECK_SET_ALL,
        CHECK_OMEGA,
        CHECK_IMPLIES_CAP,
        CHECK_ALL_SOME,
        CHECK_CAP,
        CHECK_FINITE_COLLAPSE,
    ];
    let mut counts: BTreeMap<&'static str, u64> = check_order.iter().map(|&c| (c, 0)).collect();
    let mut witnesses: Vec<Witness> = Vec::new();
    let mut per_check_witnesses: BTreeMap<&'static str, usize> = BTreeMap::new();

    let equivalences: Vec<(&'static str, usize, usize)> = {
        let mut v = vec![(CHECK_CAP, idx("(cap,-,-,some)"), idx("(cap,-,-,all)"))];
        let single = ["(L0,single,sim,some)", "(L0,single,sim,all)", "(L0,single,omega,some)", "(L0,single,omega,all)"];
        for w in single.windows(2) {
            v.push((CHECK_SINGLE, idx(w[0]), idx(w[1])));
        }
        v.push((CHECK_SET_SOME, idx("(L0,set,sim,some)"), idx("(L0,set,omega,some)")));
        v.push((CHECK_SET_ALL, idx("(L0,set,sim,all)"), idx("(L0,set,omega,all)")));
        v.push((CHECK_OMEGA, idx("(L0,set,Omega,some)"), idx("(L0,set,Omega,all)")));
        let l0: Vec<usize> = (0..12).filter(|&i| Variant::ALL[i].form() == Form::L0).collect();
        for w in l0.windows(2) {
            v.push((CHECK_FINITE_COLLAPSE, w[0], w[1]));
        }
        v
    };
    let implications: Vec<(&'static str, usize, usize)> = {
        let cap = Variant::INTERSECTION.index();
        let mut v: Vec<_> = (0..12).filter(|&i| i != cap).map(|i| (CHECK_IMPLIES_CAP, i, cap)).collect();
        for (i, var) in Variant::ALL.iter().enumerate() {
            if var.quant() == Quant::All {
                v.push((CHECK_ALL_SOME, i, var.with_quant(Quant::Some).index()));
            }
        }
        v
    };

    for inst in &instances {
        let group_names: Vec<String> = inst.group.iter().map(|&a| inst.model.agents()[a].clone()).collect();
        let mut witness = |check: &'static str, s: World, left: String, lv: bool, right: String, rv: bool| {
            let n = per_check_witnesses.entry(check).or_insert(0);
            if *n < WITNESS_CAP_PER_CHECK {
                *n += 1;
                witnesses.push(Witness {
                    check: check.to_owned(),
                    model: inst.model.to_spec(),
                    world: inst.model.world_name(s).to_owned(),
                    group: group_names.clone(),
                    target: inst.target.to_string(),
                    left,
                    left_verdict: lv,
                    right,
                    right_verdict: rv,
                });
            }
        };
        for (s, (fast, oracle)) in inst.rows.iter().enumerate() {
            evaluations += 1;
            for i in 0..12 {
                for j in 0..12 {
                    agreement[i][j] += u64::from(fast[i] == fast[j]);
                }
            }
            match oracle {
                Some(o) => {
                    oracle_checked += 1;
                    for i in 0..12 {
                        if fast[i] != o[i] {
                            oracle_discrepancies[i] += 1;
                            *counts.get_mut(CHECK_ORACLE).unwrap() += 1;
                            witness(CHECK_ORACLE, s, names[i].clone(), fast[i], "oracle".into(), o[i]);
                        }
                    }
                }
                None => oracle_refused += 1,
            }
            for &(check, i, j) in &equivalences {
                if fast[i] != fast[j] {
                    *counts.get_mut(check).unwrap() += 1;
                    witness(check, s, names[i].clone(), fast[i], names[j].clone(), fast[j]);
                }
            }
            for &(check, i, j) in &implications {
                if fast[i] && !fast[j] {
                    *counts.get_mut(check).unwrap() += 1;
                    witness(check, s, names[i].clone(), fast[i], names[j].clone(), fast[j]);
                }
            }
        }
    }

    let mut collapse_classes: Vec<Vec<String>> = Vec::new();
    let mut assigned = [false; 12];
    for i in 0..12 {
        if assigned[i] {
            continue;
        }
        let class: Vec<usize> = (i..12).filter(|&j| !assigned[j] && agreement[i][j] == evaluations).collect();
        for &j in &class {
            assigned[j] = true;
        }
        collapse_classes.push(class.into_iter().map(|j| names[j].clone()).collect());
    }

    let checks = check_order
        .iter()
        .map(|&name| PropertyCheck {
            name: name.to_owned(),
            violations: counts[name],
        })
        .collect();

    Ok(DiffReport {
        params: params.into(),
        instances: instances.len() as u64,
        evaluations,
        variants: names,
        agreement,
        oracle_checked,
        oracle_refused,
        oracle_discrepancies,
        checks,
        collapse_classes,
        witnesses,
        notes: vec![
            "On finite models over a finite vocabulary every known set of formulas is equivalent to one \
             formula, and every sequential exchange stabilizes after finitely many steps, so all ten \
             formula-sharing variants coincide."
                .into(),
            "The separations between single/set, some/all and omega/Omega sharing need infinite models \
             with infinitely many atoms; they cannot show up in this corpus."
                .into(),
        ],
    })
}

impl DiffReport {
    pub fn check(&self, name: &str) -> Option<u64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.violations)
    }

    pub fn is_clean(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} instances, {} pointed evaluations ({} checked against brute force, {} refused by bounds)",
            self.instances, self.evaluations, self.oracle_checked, self.oracle_refused
        )?;
        for c in &self.checks {
            writeln!(f, "  [{}] {} ({} violations)", if c.violations == 0 { "ok" } else { "FAIL" }, c.name, c.violations)?;
        }
        writeln!(f, "collapse classes:")?;
        for class in &self.collapse_classes {
            let mut line = String::new();
            for (i, v) in class.iter().enumerate() {
                if i > 0 {
                    line.push_str(" = ");
                }
                let _ = write!(line, "{v}");
            }
            writeln!(f, "  {line}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::partition;
    use crate::gallery::{self, GalleryModel};

    #[test]
    fn naive_matches_refinement_on_gallery() {
        for g in GalleryModel::ALL {
            let m = gallery::build(g).model;
            let q: Vec<usize> = (0..m.atoms().len()).collect();
            assert_eq!(naive_partition(&m, &q).classes(), partition(&m, &q).classes());
            assert_eq!(naive_partition(&m, &[]).classes(), partition(&m, &[]).classes());
        }
    }

    #[test]
    fn closed_supersets() {
        let m = gallery::build(GalleryModel::AppendixA).model;
        let part = naive_partition(&m, &[0]);
        let b = Bounds::default();
        let base = WorldSet::from_worlds(6, [m.world_index("s2").unwrap(), m.world_index("t2").unwrap()]);
        assert_eq!(enumerate_closed_supersets(&part, &base, &b).unwrap(), vec![m.all_worlds()]);
        assert_eq!(enumerate_closed_supersets(&part, &WorldSet::empty(6), &b).unwrap().len(), 4);
        assert_eq!(enumerate_closed_supersets(&part, &m.all_worlds(), &b).unwrap().len(), 1);
        let tight = Bounds {
            max_free_classes: 1,
            ..b
        };
        assert!(enumerate_closed_supersets(&part, &WorldSet::empty(6), &tight).is_err());
    }

    #[test]
    fn brute_force_on_gallery() {
        let b = Bounds::default();
        let pm = gallery::build(GalleryModel::AppendixA);
        let m = &pm.model;
        let p = m.valuation(0).clone();
        assert!(!brute_force_dk(m, pm.point, &[0, 1], &p, Variant::FULLCOMM, &b).unwrap());
        assert!(brute_force_dk(m, pm.point, &[0, 1], &p, Variant::INTERSECTION, &b).unwrap());
        let intro = gallery::build(GalleryModel::Intro);
        let q = intro.model.valuation(1).clone();
        for v in Variant::ALL {
            assert!(brute_force_dk(&intro.model, intro.point, &[0, 1], &q, v, &b).unwrap(), "{v}");
            assert!(brute_force_dk(m, 0, &[0, 1], &m.all_worlds(), v, &b).unwrap());
        }
    }

    #[test]
    fn formula_enumeration_depth_zero() {
        let m = gallery::build(GalleryModel::AppendixA).model;
        let exts: BTreeSet<WorldSet> = enumerate_formulas(&m, &["p".into()], &[], 0)
            .unwrap()
            .into_iter()
            .map(|(_, e)| e)
            .collect();
        let p = m.valuation(0).clone();
        assert_eq!(exts, BTreeSet::from([p.clone(), p.complement(), WorldSet::empty(6), m.all_worlds()]));
    }

    #[test]
    fn formula_enumeration_stays_in_class_unions() {
        let m = gallery::build(GalleryModel::AppendixA).model;
        let part = partition(&m, &[0]);
        for depth in 0..=2 {
            for (f, e) in enumerate_formulas(&m, &["p".into()], &["a".into(), "b".into()], depth).unwrap() {
                assert!(part.is_closed(&e), "{f}");
                assert_eq!(crate::semantics::extension(&m, &f, Variant::INTERSECTION).unwrap(), e);
            }
        }
    }

    #[test]
    fn formula_enumeration_bounds() {
        let m = gallery::build(GalleryModel::AppendixA).model;
        assert!(enumerate_formulas(&m, &["p".into(), "q".into(), "r".into()], &[], 0).is_err());
        assert!(enumerate_formulas(&m, &["p".into()], &[], 4).is_err());
    }

    #[test]
    fn small_diff_run_is_clean_and_deterministic() {
        let params = DiffParams {
            count: 40,
            seed: 11,
            ..DiffParams::default()
        };
        let r1 = differential_run(&params).unwrap();
        let r2 = differential_run(&params).unwrap();
        assert_eq!(r1.to_json(), r2.to_json());
        assert!(r1.is_clean(), "{r1}");
        for i in 0..12 {
            assert_eq!(r1.agreement[i][i], r1.evaluations);
            for j in 0..12 {
                assert_eq!(r1.agreement[i][j], r1.agreement[j][i]);
            }
        }
        let covered: usize = r1.collapse_classes.iter().map(Vec::len).sum();
        assert_eq!(covered, 12);
    }
}
