//! Truth evaluation under the twelve variants of distributed knowledge.
//!
//! Epistemic operators get their usual Kripke semantics. A `D{G} φ` node is
//! evaluated bottom-up: the extension of `φ` is computed first (under the
//! same variant), then every world is tested with the variant's algorithm.
//!
//! The linguistic variants never enumerate formulas. Each agent's most
//! informative legal announcement is the bisimulation closure of its
//! accessible set (its "maximal share"), and announcing less can only keep
//! more worlds alive, so it suffices to test the maximal shares. The
//! sequential variants differ only in that a later speaker's accessible set
//! is first cut down by what has already been said.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use thiserror::Error;

use crate::bisim::{full_partition, Partition};
use crate::formula::{Formula, FormulaError, Group};
use crate::kripke::{Agent, KripkeModel, PointedModel, World};
use crate::worldset::WorldSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Form {
    /// Non-linguistic pooling of accessibility relations.
    Cap,
    /// Sharing of known epistemic formulas.
    L0,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Amount {
    Single,
    Set,
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Simultaneous,
    /// Sequences bounded by the first infinite ordinal.
    Omega,
    /// Sequences of any ordinal length.
    Transfinite,
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quant {
    /// At least one group member must learn the target.
    Some,
    /// Every group member must learn the target.
    All,
}

/// One point `(f, a, o, q)` of the taxonomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variant {
    form: Form,
    amount: Amount,
    order: Order,
    quant: Quant,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VariantError {
    #[error("non-linguistic sharing has no amount or order; linguistic sharing needs both")]
    Inconsistent,
    #[error("a single formula per agent never reaches trans-finite length")]
    TransfiniteSingle,
    #[error("cannot parse variant `{0}`")]
    Syntax(String),
}

const fn v(form: Form, amount: Amount, order: Order, quant: Quant) -> Variant {
    Variant {
        form,
        amount,
        order,
        quant,
    }
}

impl Variant {
    pub const INTERSECTION: Variant = v(Form::Cap, Amount::NotApplicable, Order::NotApplicable, Quant::All);
    pub const FULLCOMM: Variant = v(Form::L0, Amount::Single, Order::Simultaneous, Quant::All);

    /// All constructible variants, in reporting order.
    pub const ALL: [Variant; 12] = [
        v(Form::Cap, Amount::NotApplicable, Order::NotApplicable, Quant::All),
        v(Form::Cap, Amount::NotApplicable, Order::NotApplicable, Quant::Some),
        v(Form::L0, Amount::Single, Order::Simultaneous, Quant::Some),
        v(Form::L0, Amount::Single, Order::Simultaneous, Quant::All),
        v(Form::L0, Amount::Single, Order::Omega, Quant::Some),
        v(Form::L0, Amount::Single, Order::Omega, Quant::All),
        v(Form::L0, Amount::Set, Order::Simultaneous, Quant::Some),
        v(Form::L0, Amount::Set, Order::Simultaneous, Quant::All),
        v(Form::L0, Amount::Set, Order::Omega, Quant::Some),
        v(Form::L0, Amount::Set, Order::Omega, Quant::All),
        v(Form::L0, Amount::Set, Order::Transfinite, Quant::Some),
        v(Form::L0, Amount::Set, Order::Transfinite, Quant::All),
    ];

    pub fn new(form: Form, amount: Amount, order: Order, quant: Quant) -> Result<Self, VariantError> {
        let cap = form == Form::Cap;
        if cap != (amount == Amount::NotApplicable) || cap != (order == Order::NotApplicable) {
            return Err(VariantError::Inconsistent);
        }
        if amount == Amount::Single && order == Order::Transfinite {
            return Err(VariantError::TransfiniteSingle);
        }
        Ok(v(form, amount, order, quant))
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn amount(&self) -> Amount {
        self.amount
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn quant(&self) -> Quant {
        self.quant
    }

    /// The same variant with a different success quantifier.
    pub fn with_quant(&self, quant: Quant) -> Variant {
        Variant { quant, ..*self }
    }

    pub fn index(&self) -> usize {
        Variant::ALL
            .iter()
            .position(|v| v == self)
            .expect("every variant is listed")
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let form = match self.form {
            Form::Cap => "cap",
            Form::L0 => "L0",
        };
        let amount = match self.amount {
            Amount::Single => "single",
            Amount::Set => "set",
            Amount::NotApplicable => "-",
        };
        let order = match self.order {
            Order::Simultaneous => "sim",
            Order::Omega => "omega",
            Order::Transfinite => "Omega",
            Order::NotApplicable => "-",
        };
        let quant = match self.quant {
            Quant::Some => "some",
            Quant::All => "all",
        };
        write!(f, "({form},{amount},{order},{quant})")
    }
}

impl FromStr for Variant {
    type Err = VariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "intersection" => return Ok(Variant::INTERSECTION),
            "fullcomm" => return Ok(Variant::FULLCOMM),
            _ => {}
        }
        let syntax = || VariantError::Syntax(s.to_owned());
        let inner = s
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(syntax)?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let [f, a, o, q] = parts.as_slice() else {
            return Err(syntax());
        };
        let form = match *f {
            "cap" => Form::Cap,
            "L0" => Form::L0,
            _ => return Err(syntax()),
        };
        let amount = match *a {
            "-" | "eps" => Amount::NotApplicable,
            "single" => Amount::Single,
            "set" => Amount::Set,
            _ => return Err(syntax()),
        };
        let order = match *o {
            "-" | "eps" => Order::NotApplicable,
            "sim" => Order::Simultaneous,
            "omega" => Order::Omega,
            "Omega" | "OMEGA" => Order::Transfinite,
            _ => return Err(syntax()),
        };
        let quant = match *q {
            "some" => Quant::Some,
            "all" => Quant::All,
            _ => return Err(syntax()),
        };
        Variant::new(form, amount, order, quant)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("atom `{0}` is not declared in the model")]
    UndeclaredAtom(String),
    #[error("agent `{0}` is not declared in the model")]
    UndeclaredAgent(String),
    #[error("announced statement `{0}` is not an epistemic formula without D")]
    NotL0(String),
}

// ---------------------------------------------------------------------------
// Distributed knowledge deciders

/// Whether the agents in `group` (some or all, per `quant`) end up knowing
/// `target` when their accessible sets are cut down to `pool`.
pub fn learns(m: &KripkeModel, s: World, group: &[Agent], pool: &WorldSet, target: &WorldSet, quant: Quant) -> bool {
    let knows = |&a: &Agent| m.successors(a, s).intersection(pool).is_subset(target);
    match quant {
        Quant::Some => group.iter().any(knows),
        Quant::All => group.iter().all(knows),
    }
}

/// Non-linguistic pooling: everyone's relation becomes the intersection of
/// the group's relations. The quantifier is tested literally even though
/// all agents share one relation afterwards.
pub fn dk_intersection(m: &KripkeModel, s: World, group: &[Agent], target: &WorldSet, quant: Quant) -> bool {
    let pooled = group
        .iter()
        .fold(m.all_worlds(), |acc, &b| acc.intersection(m.successors(b, s)));
    let knows = |_: &Agent| pooled.is_subset(target);
    match quant {
        Quant::Some => group.iter().any(knows),
        Quant::All => group.iter().all(knows),
    }
}

/// Per-agent announced extension: a bisimulation-closed world set that
/// contains the agent's accessible set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareTuple {
    pub shares: BTreeMap<Agent, WorldSet>,
}

impl ShareTuple {
    /// Worlds compatible with every share.
    pub fn pool(&self, universe: usize) -> WorldSet {
        self.shares
            .values()
            .fold(WorldSet::full(universe), |acc, e| acc.intersection(e))
    }
}

/// Each agent shares the closure of what it considers possible at `s`.
pub fn maximal_shares(m: &KripkeModel, part: &Partition, s: World, group: &[Agent]) -> ShareTuple {
    ShareTuple {
        shares: group
            .iter()
            .map(|&a| (a, part.closure(m.successors(a, s))))
            .collect(),
    }
}

/// Simultaneous sharing (single formula or set; these coincide on finite
/// vocabularies).
pub fn dk_simultaneous(m: &KripkeModel, part: &Partition, s: World, group: &[Agent], target: &WorldSet, quant: Quant) -> bool {
    let pool = maximal_shares(m, part, s, group).pool(m.world_count());
    learns(m, s, group, &pool, target, quant)
}

/// One turn per agent, every ordering tried. In each turn the speaker
/// announces the closure of what it still considers possible.
pub fn dk_sequential_single(m: &KripkeModel, part: &Partition, s: World, group: &[Agent], target: &WorldSet, quant: Quant) -> bool {
    group.iter().copied().permutations(group.len()).any(|order| {
        let mut pool = m.all_worlds();
        for a in order {
            let said = part.closure(&m.successors(a, s).intersection(&pool));
            pool.intersect_with(&said);
        }
        learns(m, s, group, &pool, target, quant)
    })
}

/// Pool reached by round-robin maximal announcements until nothing changes.
///
/// Each effective round removes at least one world from the pool, so the
/// fixpoint is reached after at most |worlds| rounds. The limit of any
/// omega-length or longer script is therefore attained at a finite stage,
/// which is why `omega` and `Omega` share this computation.
pub fn sequential_fixpoint(m: &KripkeModel, part: &Partition, s: World, group: &[Agent]) -> WorldSet {
    let mut pool = m.all_worlds();
    let mut rounds = 0;
    loop {
        let before = pool.clone();
        for &a in group {
            let said = part.closure(&m.successors(a, s).intersection(&pool));
            pool.intersect_with(&said);
        }
        if pool == before {
            return pool;
        }
        rounds += 1;
        debug_assert!(rounds <= m.world_count() * m.world_count());
    }
}

pub fn dk_sequential_sets(
    m: &KripkeModel,
    part: &Partition,
    s: World,
    group: &[Agent],
    target: &WorldSet,
    mode: Order,
    quant: Quant,
) -> bool {
    assert!(
        matches!(mode, Order::Omega | Order::Transfinite),
        "sequential set sharing needs an ordinal bound"
    );
    let pool = sequential_fixpoint(m, part, s, group);
    learns(m, s, group, &pool, target, quant)
}

/// Dispatches to the algorithm for `variant`.
pub fn decide(m: &KripkeModel, part: &Partition, s: World, group: &[Agent], target: &WorldSet, variant: Variant) -> bool {
    let q = variant.quant();
    match (variant.form(), variant.amount(), variant.order()) {
        (Form::Cap, _, _) => dk_intersection(m, s, group, target, q),
        (Form::L0, _, Order::Simultaneous) => dk_simultaneous(m, part, s, group, target, q),
        (Form::L0, Amount::Single, Order::Omega) => dk_sequential_single(m, part, s, group, target, q),
        (Form::L0, Amount::Set, mode @ (Order::Omega | Order::Transfinite)) => {
            dk_sequential_sets(m, part, s, group, target, mode, q)
        }
        _ => unreachable!("variant {variant} cannot be constructed"),
    }
}

// ---------------------------------------------------------------------------
// Evaluation

pub fn resolve_group(m: &KripkeModel, group: &Group) -> Result<Vec<Agent>, EvalError> {
    group
        .iter()
        .map(|a| m.agent_index(a).ok_or_else(|| EvalError::UndeclaredAgent(a.to_owned())))
        .collect()
}

/// Memoizing evaluator for one model and one variant.
pub struct Evaluator<'m> {
    model: &'m KripkeModel,
    variant: Variant,
    partition: Partition,
    memo: HashMap<Formula, WorldSet>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m KripkeModel, variant: Variant) -> Self {
        Evaluator {
            model,
            variant,
            partition: full_partition(model),
            memo: HashMap::new(),
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    fn check_declared(&self, f: &Formula) -> Result<(), EvalError> {
        let meta = f.meta();
        if let Some(a) = meta.atoms.iter().find(|a| self.model.atom_index(a).is_none()) {
            return Err(EvalError::UndeclaredAtom(a.clone()));
        }
        if let Some(a) = meta.agents.iter().find(|a| self.model.agent_index(a).is_none()) {
            return Err(EvalError::UndeclaredAgent(a.clone()));
        }
        Ok(())
    }

    pub fn extension(&mut self, f: &Formula) -> Result<WorldSet, EvalError> {
        self.check_declared(f)?;
        Ok(self.ext(f))
    }

    fn ext(&mut self, f: &Formula) -> WorldSet {
        if let Some(hit) = self.memo.get(f) {
            return hit.clone();
        }
        let m = self.model;
        let out = match f {
            Formula::True => m.all_worlds(),
            Formula::Atom(p) => m.valuation(m.atom_index(p).expect("checked")).clone(),
            Formula::Not(c) => self.ext(c).complement(),
            Formula::Or(l, r) => self.ext(l).union(&self.ext(r)),
            Formula::Knows(a, c) => {
                let target = self.ext(c);
                m.box_preimage(m.agent_index(a).expect("checked"), &target)
            }
            Formula::Distributed(g, c) => {
                let target = self.ext(c);
                let group = resolve_group(m, g).expect("checked");
                WorldSet::from_worlds(
                    m.world_count(),
                    (0..m.world_count())
                        .filter(|&s| decide(m, &self.partition, s, &group, &target, self.variant)),
                )
            }
        };
        self.memo.insert(f.clone(), out.clone());
        out
    }
}

/// Worlds of `m` where `f` holds under `variant`.
pub fn extension(m: &KripkeModel, f: &Formula, variant: Variant) -> Result<WorldSet, EvalError> {
    Evaluator::new(m, variant).extension(f)
}

pub fn eval_at(m: &KripkeModel, s: World, f: &Formula, variant: Variant) -> Result<bool, EvalError> {
    Ok(extension(m, f, variant)?.contains(s))
}

pub fn eval(pm: &PointedModel, f: &Formula, variant: Variant) -> Result<bool, EvalError> {
    eval_at(&pm.model, pm.point, f, variant)
}

// ---------------------------------------------------------------------------
// Announcement scripts

/// Post-communication accessibility relations, as successor sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoState {
    relations: Vec<Vec<WorldSet>>,
}

impl InfoState {
    pub fn initial(m: &KripkeModel) -> Self {
        InfoState {
            relations: (0..m.agents().len()).map(|a| m.relation(a).to_vec()).collect(),
        }
    }

    pub fn neighborhood(&self, agent: Agent, world: World) -> &WorldSet {
        &self.relations[agent][world]
    }

    pub fn relations(&self) -> &[Vec<WorldSet>] {
        &self.relations
    }

    /// Every pair is also a pair of the original model.
    pub fn is_within(&self, m: &KripkeModel) -> bool {
        self.relations.iter().enumerate().all(|(a, succ)| {
            succ.iter()
                .enumerate()
                .all(|(w, set)| set.is_subset(m.successors(a, w)))
        })
    }

    /// Keeps only pairs whose target lies in `ext`.
    pub fn restrict(&self, ext: &WorldSet) -> InfoState {
        InfoState {
            relations: self
                .relations
                .iter()
                .map(|succ| succ.iter().map(|s| s.intersection(ext)).collect())
                .collect(),
        }
    }
}

/// Restricts every agent's relation to targets where `statement` held in
/// the original model.
pub fn apply_announcement(state: &InfoState, m: &KripkeModel, statement: &Formula) -> Result<InfoState, EvalError> {
    if !statement.is_l0() {
        return Err(EvalError::NotL0(statement.to_string()));
    }
    let ext = extension(m, statement, Variant::INTERSECTION)?;
    Ok(state.restrict(&ext))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptStep {
    pub speaker: String,
    pub statement: Formula,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnnouncementScript {
    pub steps: Vec<ScriptStep>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScriptError {
    #[error("line {line}: expected `agent: formula`")]
    MissingColon { line: usize },
    #[error("line {line}: {source}")]
    Formula {
        line: usize,
        #[source]
        source: FormulaError,
    },
    #[error("line {line}: statement must not contain D")]
    NotL0 { line: usize },
    #[error("step {step}: speaker `{speaker}` is not an agent of the model")]
    UnknownSpeaker { step: usize, speaker: String },
}

impl AnnouncementScript {
    /// One step per line, `agent: formula`. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (speaker, body) = trimmed
                .split_once(':')
                .ok_or(ScriptError::MissingColon { line })?;
            let statement = Formula::parse(body.trim().trim_matches('"'))
                .map_err(|source| ScriptError::Formula { line, source })?;
            if !statement.is_l0() {
                return Err(ScriptError::NotL0 { line });
            }
            steps.push(ScriptStep {
                speaker: speaker.trim().to_owned(),
                statement,
            });
        }
        Ok(AnnouncementScript { steps })
    }

    pub fn check_speakers(&self, m: &KripkeModel) -> Result<(), ScriptError> {
        for (step, s) in self.steps.iter().enumerate() {
            if m.agent_index(&s.speaker).is_none() {
                return Err(ScriptError::UnknownSpeaker {
                    step,
                    speaker: s.speaker.clone(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptOutcome {
    pub final_state: InfoState,
    /// `correct[δ]`: the speaker of step δ knew the statement given the
    /// preceding steps.
    pub correct: Vec<bool>,
}

impl ScriptOutcome {
    pub fn all_correct(&self) -> bool {
        self.correct.iter().all(|&c| c)
    }
}

/// Replays a script from `s`, flagging steps whose speaker did not know
/// the statement at the time. Incorrect steps are still applied.
pub fn simulate_script(m: &KripkeModel, s: World, script: &AnnouncementScript) -> Result<ScriptOutcome, EvalError> {
    let mut state = InfoState::initial(m);
    let mut correct = Vec::with_capacity(script.steps.len());
    for step in &script.steps {
        let speaker = m
            .agent_index(&step.speaker)
            .ok_or_else(|| EvalError::UndeclaredAgent(step.speaker.clone()))?;
        if !step.statement.is_l0() {
            return Err(EvalError::NotL0(step.statement.to_string()));
        }
        let ext = extension(m, &step.statement, Variant::INTERSECTION)?;
        correct.push(state.neighborhood(speaker, s).is_subset(&ext));
        state = state.restrict(&ext);
    }
    Ok(ScriptOutcome {
        final_state: state,
        correct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{self, GalleryModel};

    fn ws(m: &KripkeModel, names: &[&str]) -> WorldSet {
        WorldSet::from_worlds(m.world_count(), names.iter().map(|n| m.world_index(n).unwrap()))
    }

    fn f(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn exactly_twelve_variants() {
        let forms = [Form::Cap, Form::L0];
        let amounts = [Amount::Single, Amount::Set, Amount::NotApplicable];
        let orders = [Order::Simultaneous, Order::Omega, Order::Transfinite, Order::NotApplicable];
        let quants = [Quant::Some, Quant::All];
        let mut count = 0;
        for &fo in &forms {
            for &a in &amounts {
                for &o in &orders {
                    for &q in &quants {
                        if let Ok(v) = Variant::new(fo, a, o, q) {
                            assert!(Variant::ALL.contains(&v));
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count, 12);
    }

    #[test]
    fn variant_strings_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("intersection".parse::<Variant>().unwrap().to_string(), "(cap,-,-,all)");
        assert_eq!("fullcomm".parse::<Variant>().unwrap().to_string(), "(L0,single,sim,all)");
        assert_eq!(
            "(L0,single,Omega,all)".parse::<Variant>(),
            Err(VariantError::TransfiniteSingle)
        );
        assert_eq!("(cap,set,-,all)".parse::<Variant>(), Err(VariantError::Inconsistent));
        assert!(matches!("(L0,set,sim)".parse::<Variant>(), Err(VariantError::Syntax(_))));
    }

    #[test]
    fn appendix_a_atomic_and_box() {
        let pm = gallery::build(GalleryModel::AppendixA);
        let m = &pm.model;
        for v in Variant::ALL {
            assert!(eval(&pm, &f("p"), v).unwrap());
            assert!(!eval_at(m, m.world_index("s1").unwrap(), &f("[b]p"), v).unwrap());
            assert!(eval_at(m, 0, &f("p | ~p"), v).unwrap());
        }
        assert_eq!(extension(m, &f("p"), Variant::FULLCOMM).unwrap(), ws(m, &["s1", "s2", "s3"]));
    }

    #[test]
    fn appendix_a_intersection_vs_fullcomm() {
        let m = gallery::build(GalleryModel::AppendixA).model;
        let d = f("D{a,b} p");
        assert_eq!(extension(&m, &d, Variant::INTERSECTION).unwrap(), ws(&m, &["s2"]));
        assert!(extension(&m, &d, Variant::FULLCOMM).unwrap().is_empty());
    }

    #[test]
    fn intersection_decider() {
        let m = gallery::build(GalleryModel::AppendixA).model;
        let p = ws(&m, &["s1", "s2", "s3"]);
        let g = [0, 1];
        assert!(dk_intersection(&m, m.world_index("s2").unwrap(), &g, &p, Quant::All));
        assert!(dk_intersection(&m, m.world_index("s2").unwrap(), &g, &p, Quant::Some));
        assert!(!dk_intersection(&m, m.world_index("s1").unwrap(), &g, &p, Quant::All));
        assert!(dk_intersection(&m, 3, &g, &m.all_worlds(), Quant::All));
    }

    #[test]
    fn maximal_shares_are_trivial_on_appendix_a() {
        let m = gallery::build(GalleryModel::AppendixA).model;
        let part = full_partition(&m);
        let shares = maximal_shares(&m, &part, m.world_index("s2").unwrap(), &[0, 1]);
        assert!(shares.shares.values().all(|e| *e == m.all_worlds()));
        let single = gallery::single_world().model;
        let p1 = full_partition(&single);
        let shares = maximal_shares(&single, &p1, 0, &[0]);
        assert_eq!(shares.shares[&0], WorldSet::singleton(1, 0));
    }

    #[test]
    fn closed_neighbourhood_is_its_own_share() {
        let m = gallery::build(GalleryModel::Intro).model;
        let part = full_partition(&m);
        let w = m.world_index("pq").unwrap();
        let shares = maximal_shares(&m, &part, w, &[0, 1]);
        for (a, e) in &shares.shares {
            assert_eq!(e, m.successors(*a, w));
        }
    }

    #[test]
    fn simultaneous_examples() {
        let am = gallery::build(GalleryModel::AppendixA).model;
        let part = full_partition(&am);
        let s2 = am.world_index("s2").unwrap();
        let p = ws(&am, &["s1", "s2", "s3"]);
        assert!(!dk_simultaneous(&am, &part, s2, &[0, 1], &p, Quant::All));

        let intro = gallery::build(GalleryModel::Intro);
        let m = &intro.model;
        let part = full_partition(m);
        let q = extension(m, &f("q"), Variant::INTERSECTION).unwrap();
        assert!(dk_simultaneous(m, &part, intro.point, &[0, 1], &q, Quant::All));
        // singleton group collapses to own knowledge
        let known = extension(m, &f("p -> q"), Variant::INTERSECTION).unwrap();
        assert!(dk_simultaneous(m, &part, intro.point, &[0], &known, Quant::Some));
    }

    #[test]
    fn sequential_examples() {
        let intro = gallery::build(GalleryModel::Intro);
        let m = &intro.model;
        let part = full_partition(m);
        let q = extension(m, &f("q"), Variant::INTERSECTION).unwrap();
        assert!(dk_sequential_single(m, &part, intro.point, &[1, 0], &q, Quant::All));
        assert!(dk_sequential_sets(m, &part, intro.point, &[0, 1], &q, Order::Omega, Quant::All));

        let am = gallery::build(GalleryModel::AppendixA).model;
        let part = full_partition(&am);
        let s2 = am.world_index("s2").unwrap();
        let p = ws(&am, &["s1", "s2", "s3"]);
        assert!(!dk_sequential_single(&am, &part, s2, &[0, 1], &p, Quant::Some));
        assert!(!dk_sequential_single(&am, &part, s2, &[1, 0], &p, Quant::Some));
        assert!(!dk_sequential_sets(&am, &part, s2, &[0, 1], &p, Order::Omega, Quant::Some));
        assert_eq!(sequential_fixpoint(&am, &part, s2, &[0, 1]), am.all_worlds());
        for mode in [Order::Omega, Order::Transfinite] {
            assert!(dk_sequential_sets(&am, &part, s2, &[0, 1], &am.all_worlds(), mode, Quant::All));
        }
        // one turn equals one simultaneous round
        for s in 0..am.world_count() {
            for a in 0..2 {
                assert_eq!(
                    dk_sequential_single(&am, &part, s, &[a], &p, Quant::All),
                    dk_simultaneous(&am, &part, s, &[a], &p, Quant::All)
                );
            }
        }
    }

    #[test]
    fn announcements() {
        let intro = gallery::build(GalleryModel::Intro);
        let m = &intro.model;
        let s0 = InfoState::initial(m);
        assert_eq!(apply_announcement(&s0, m, &Formula::True).unwrap(), s0);
        let after_p = apply_announcement(&s0, m, &f("p")).unwrap();
        let not_p = extension(m, &f("~p"), Variant::INTERSECTION).unwrap();
        let a = m.agent_index("a").unwrap();
        for w in 0..m.world_count() {
            assert!(!after_p.neighborhood(a, w).intersects(&not_p));
        }
        assert!(after_p.is_within(m));
        let pq = apply_announcement(&after_p, m, &f("q")).unwrap();
        let qp = apply_announcement(&apply_announcement(&s0, m, &f("q")).unwrap(), m, &f("p")).unwrap();
        assert_eq!(pq, qp);
        assert_eq!(
            apply_announcement(&s0, m, &f("D{a} p")),
            Err(EvalError::NotL0("D{a} p".into()))
        );
    }

    #[test]
    fn script_replay() {
        let intro = gallery::build(GalleryModel::Intro);
        let m = &intro.model;
        let script = AnnouncementScript::parse("b: p\na: q\n").unwrap();
        let out = simulate_script(m, intro.point, &script).unwrap();
        assert_eq!(out.correct, vec![true, true]);
        let q = extension(m, &f("q"), Variant::INTERSECTION).unwrap();
        assert!(out.final_state.neighborhood(0, intro.point).is_subset(&q));

        let bad = AnnouncementScript::parse("a: p").unwrap();
        let out = simulate_script(m, intro.point, &bad).unwrap();
        assert_eq!(out.correct, vec![false]);

        let empty = simulate_script(m, intro.point, &AnnouncementScript::default()).unwrap();
        assert!(empty.correct.is_empty());
        assert_eq!(empty.final_state, InfoState::initial(m));
    }

    #[test]
    fn script_parse_errors() {
        assert_eq!(
            AnnouncementScript::parse("# c\n\nb p"),
            Err(ScriptError::MissingColon { line: 3 })
        );
        assert_eq!(
            AnnouncementScript::parse("a: D{a,b} p"),
            Err(ScriptError::NotL0 { line: 1 })
        );
        assert!(matches!(
            AnnouncementScript::parse("a: p &"),
            Err(ScriptError::Formula { line: 1, .. })
        ));
        let s = AnnouncementScript::parse("z: p").unwrap();
        assert!(s.check_speakers(&gallery::build(GalleryModel::Intro).model).is_err());
    }

    #[test]
    fn undeclared_names_are_errors() {
        let m = gallery::build(GalleryModel::AppendixA).model;
        assert_eq!(
            extension(&m, &f("D{a,z} p"), Variant::INTERSECTION),
            Err(EvalError::UndeclaredAgent("z".into()))
        );
        assert_eq!(
            extension(&m, &f("r"), Variant::FULLCOMM),
            Err(EvalError::UndeclaredAtom("r".into()))
        );
    }
}
