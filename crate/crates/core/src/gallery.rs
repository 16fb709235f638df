//! Worked example models and the circular-semantics consistency check.
//!
//! `appendix_a` is the six-world model on which letting agents announce
//! formulas that themselves mention `D` leaves the semantics
//! under-determined: two different families of extensions are both
//! self-consistent, and they disagree on `D{a,b} p` at `s2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bisim::partition;
use crate::formula::Formula;
use crate::kripke::{random_model, Agent, Frame, GeneratorParams, KripkeModel, ModelSpec, PointedModel};
use crate::semantics::{eval, eval_at, extension, resolve_group, EvalError, Variant};
use crate::worldset::WorldSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GalleryModel {
    AppendixA,
    Moore,
    Intro,
}

impl GalleryModel {
    pub const ALL: [GalleryModel; 3] = [GalleryModel::AppendixA, GalleryModel::Moore, GalleryModel::Intro];

    pub fn name(&self) -> &'static str {
        match self {
            GalleryModel::AppendixA => "appendix_a",
            GalleryModel::Moore => "moore",
            GalleryModel::Intro => "intro",
        }
    }
}

impl FromStr for GalleryModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "appendix_a" => Ok(GalleryModel::AppendixA),
            "moore" => Ok(GalleryModel::Moore),
            "intro" => Ok(GalleryModel::Intro),
            other => Err(format!("unknown gallery model `{other}`")),
        }
    }
}

fn spec(
    worlds: &[&str],
    agents: &[&str],
    atoms: &[(&str, &[&str])],
    edges: &[(&str, &[(&str, &str)])],
    frame: Frame,
    close: bool,
) -> ModelSpec {
    let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    ModelSpec {
        worlds: own(worlds),
        agents: own(agents),
        atoms: atoms.iter().map(|(a, _)| a.to_string()).collect(),
        valuation: atoms.iter().map(|(a, ws)| (a.to_string(), own(ws))).collect(),
        relations: edges
            .iter()
            .map(|(a, pairs)| {
                let pairs = pairs
                    .iter()
                    .map(|(x, y)| [x.to_string(), y.to_string()])
                    .collect();
                (a.to_string(), pairs)
            })
            .collect::<BTreeMap<_, _>>(),
        frame,
        close,
    }
}

/// The Appendix A model as drawn: undirected edges labelled by agents,
/// closed to equivalence relations on load.
pub fn appendix_a_spec() -> ModelSpec {
    spec(
        &["s1", "s2", "s3", "t1", "t2", "t3"],
        &["a", "b"],
        &[("p", &["s1", "s2", "s3"])],
        &[
            ("a", &[("s1", "t1"), ("s2", "t2"), ("s3", "t3")]),
            (
                "b",
                &[("s1", "t1"), ("s3", "t3"), ("s1", "s2"), ("t1", "s2"), ("s3", "t2"), ("t2", "t3")],
            ),
        ],
        Frame::S5,
        true,
    )
}

pub fn moore_spec() -> ModelSpec {
    spec(
        &["w1", "w2"],
        &["a", "b"],
        &[("p", &["w1"])],
        &[("a", &[("w1", "w2")]), ("b", &[])],
        Frame::S5,
        true,
    )
}

/// `a` knows `p -> q`, `b` knows `p`, neither knows `q`.
pub fn intro_spec() -> ModelSpec {
    spec(
        &["pq", "pnq", "npq", "npnq"],
        &["a", "b"],
        &[("p", &["pq", "pnq"]), ("q", &["pq", "npq"])],
        &[
            ("a", &[("pq", "npq"), ("npq", "npnq")]),
            ("b", &[("pq", "pnq"), ("npq", "npnq")]),
        ],
        Frame::S5,
        true,
    )
}

pub fn model_spec(name: GalleryModel) -> ModelSpec {
    match name {
        GalleryModel::AppendixA => appendix_a_spec(),
        GalleryModel::Moore => moore_spec(),
        GalleryModel::Intro => intro_spec(),
    }
}

pub fn build(name: GalleryModel) -> PointedModel {
    let model = KripkeModel::from_spec(&model_spec(name)).expect("gallery models are well-formed");
    let point = match name {
        GalleryModel::AppendixA => "s2",
        GalleryModel::Moore => "w1",
        GalleryModel::Intro => "pq",
    };
    let point = model.world_index(point).expect("point declared");
    PointedModel::new(model, point)
}

/// One reflexive world where `p` holds.
pub fn single_world() -> PointedModel {
    let model = KripkeModel::from_spec(&spec(
        &["w"],
        &["a"],
        &[("p", &["w"])],
        &[("a", &[("w", "w")])],
        Frame::S5,
        false,
    ))
    .expect("well-formed");
    PointedModel::new(model, 0)
}

// ---------------------------------------------------------------------------
// Circular semantics

/// A family of world sets standing in for "all formula extensions".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionSet {
    universe: usize,
    sets: BTreeSet<WorldSet>,
}

impl ExtensionSet {
    pub fn new<I: IntoIterator<Item = WorldSet>>(universe: usize, sets: I) -> Self {
        let sets: BTreeSet<WorldSet> = sets.into_iter().collect();
        assert!(sets.iter().all(|s| s.universe() == universe));
        ExtensionSet { universe, sets }
    }

    pub fn powerset(universe: usize) -> Self {
        assert!(universe <= 16, "powerset of {universe} worlds is too large");
        let sets = (0u32..1 << universe)
            .map(|bits| WorldSet::from_worlds(universe, (0..universe).filter(|w| bits >> w & 1 == 1)));
        ExtensionSet::new(universe, sets)
    }

    pub fn contains(&self, set: &WorldSet) -> bool {
        self.sets.contains(set)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &WorldSet> {
        self.sets.iter()
    }

    pub fn universe(&self) -> usize {
        self.universe
    }
}

/// Minimal members of `pool` that contain `base`.
fn minimal_covers<'e>(pool: &'e ExtensionSet, base: &WorldSet) -> Vec<&'e WorldSet> {
    let covers: Vec<&WorldSet> = pool.iter().filter(|e| base.is_subset(e)).collect();
    covers
        .iter()
        .filter(|e| !covers.iter().any(|o| o != *e && o.is_subset(e)))
        .copied()
        .collect()
}

/// Extension of `D_G target` when agents may announce anything whose
/// extension lies in `pool` and every member must learn the target.
pub fn circular_d_extension(m: &KripkeModel, group: &[Agent], target: &WorldSet, pool: &ExtensionSet) -> WorldSet {
    let n = m.world_count();
    let holds_at = |s: usize| {
        // Shrinking a share never hurts, so minimal covers suffice.
        let choices: Vec<Vec<&WorldSet>> = group
            .iter()
            .map(|&a| minimal_covers(pool, m.successors(a, s)))
            .collect();
        if choices.iter().any(Vec::is_empty) {
            return false;
        }
        let mut idx = vec![0usize; group.len()];
        loop {
            let shared = idx
                .iter()
                .zip(&choices)
                .fold(WorldSet::full(n), |acc, (&i, c)| acc.intersection(c[i]));
            if group
                .iter()
                .all(|&b| m.successors(b, s).intersection(&shared).is_subset(target))
            {
                return true;
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return false;
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    };
    WorldSet::from_worlds(n, (0..n).filter(|&s| holds_at(s)))
}

/// Extensional evaluation where every `D` node is read with
/// [`circular_d_extension`] over the assumed family `pool`.
pub fn circular_extension(m: &KripkeModel, f: &Formula, pool: &ExtensionSet) -> Result<WorldSet, EvalError> {
    Ok(match f {
        Formula::True => m.all_worlds(),
        Formula::Atom(p) => m
            .valuation(m.atom_index(p).ok_or_else(|| EvalError::UndeclaredAtom(p.clone()))?)
            .clone(),
        Formula::Not(c) => circular_extension(m, c, pool)?.complement(),
        Formula::Or(l, r) => circular_extension(m, l, pool)?.union(&circular_extension(m, r, pool)?),
        Formula::Knows(a, c) => {
            let agent = m.agent_index(a).ok_or_else(|| EvalError::UndeclaredAgent(a.clone()))?;
            m.box_preimage(agent, &circular_extension(m, c, pool)?)
        }
        Formula::Distributed(g, c) => {
            let group = resolve_group(m, g)?;
            circular_d_extension(m, &group, &circular_extension(m, c, pool)?, pool)
        }
    })
}

#[derive(Clone, Debug)]
pub struct SelfFulfilling {
    pub holds: bool,
    pub generated: ExtensionSet,
    /// Members of the assumed family that no formula produces.
    pub not_generated: Vec<WorldSet>,
    /// Produced extensions outside the assumed family.
    pub outside_family: Vec<WorldSet>,
}

fn nonempty_groups(agent_count: usize) -> Vec<Vec<Agent>> {
    (1u32..1 << agent_count)
        .map(|bits| (0..agent_count).filter(|a| bits >> a & 1 == 1).collect())
        .collect()
}

/// Closes the atomic extensions under complement, union, per-agent box and
/// circular `D` over `assumed`, then compares with `assumed`.
pub fn verify_self_fulfilling(m: &KripkeModel, assumed: &ExtensionSet) -> SelfFulfilling {
    let n = m.world_count();
    let groups = nonempty_groups(m.agents().len());
    let mut family: BTreeSet<WorldSet> = BTreeSet::new();
    family.insert(m.all_worlds());
    for p in 0..m.atoms().len() {
        family.insert(m.valuation(p).clone());
    }
    loop {
        let current: Vec<WorldSet> = family.iter().cloned().collect();
        let mut fresh: Vec<WorldSet> = Vec::new();
        fresh.extend(current.iter().map(WorldSet::complement));
        for (i, x) in current.iter().enumerate() {
            for y in &current[i + 1..] {
                fresh.push(x.union(y));
            }
        }
        for a in 0..m.agents().len() {
            fresh.extend(current.iter().map(|x| m.box_preimage(a, x)));
        }
        for g in &groups {
            fresh.extend(current.iter().map(|x| circular_d_extension(m, g, x, assumed)));
        }
        let before = family.len();
        family.extend(fresh);
        if family.len() == before {
            break;
        }
    }
    let generated = ExtensionSet::new(n, family);
    let not_generated: Vec<WorldSet> = assumed.iter().filter(|e| !generated.contains(e)).cloned().collect();
    let outside_family: Vec<WorldSet> = generated.iter().filter(|e| !assumed.contains(e)).cloned().collect();
    SelfFulfilling {
        holds: not_generated.is_empty() && outside_family.is_empty(),
        generated,
        not_generated,
        outside_family,
    }
}

/// The two families shown self-fulfilling on the Appendix A model: every
/// subset, and the four sets definable without `D`.
pub fn appendix_a_families(m: &KripkeModel) -> (ExtensionSet, ExtensionSet) {
    let n = m.world_count();
    let p = m.valuation(m.atom_index("p").expect("p declared")).clone();
    let coarse = ExtensionSet::new(n, [WorldSet::empty(n), p.complement(), p, WorldSet::full(n)]);
    (ExtensionSet::powerset(n), coarse)
}

/// World-identifying formulas for the Appendix A model under the powerset
/// family.
pub fn appendix_a_world_formulas() -> Vec<(&'static str, Formula)> {
    [
        ("s1", "p & ~D{a,b}p & <b>D{a,b}p"),
        ("s2", "D{a,b}p"),
        ("s3", "p & ~D{a,b}p & ~<b>D{a,b}p"),
        ("t1", "~p & <b>D{a,b}p"),
        ("t2", "~p & <a>D{a,b}p"),
        ("t3", "~p & ~<b>D{a,b}p & ~<a>D{a,b}p"),
    ]
    .into_iter()
    .map(|(w, s)| (w, Formula::parse(s).expect("valid formula")))
    .collect()
}

// ---------------------------------------------------------------------------
// Demo claims

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Demo {
    AppendixA,
    Moore,
    Intro,
    Circularity,
}

impl FromStr for Demo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "appendix-a" => Ok(Demo::AppendixA),
            "moore" => Ok(Demo::Moore),
            "intro" => Ok(Demo::Intro),
            "circularity" => Ok(Demo::Circularity),
            other => Err(format!("unknown demo `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    pub text: String,
    pub holds: bool,
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", if self.holds { "pass" } else { "FAIL" }, self.text)
    }
}

fn claim(text: impl Into<String>, holds: bool) -> Claim {
    Claim {
        text: text.into(),
        holds,
    }
}

fn parse(s: &str) -> Formula {
    Formula::parse(s).expect("valid formula")
}

fn names(m: &KripkeModel, set: &WorldSet) -> String {
    let v: Vec<&str> = set.iter().map(|w| m.world_name(w)).collect();
    format!("{{{}}}", v.join(","))
}

/// Model shown by a demo, and the claims it checks.
pub fn demo(which: Demo) -> (PointedModel, Vec<Claim>) {
    match which {
        Demo::AppendixA => {
            let pm = build(GalleryModel::AppendixA);
            let m = &pm.model;
            let d = parse("D{a,b} p");
            let mut claims = vec![claim("S5 validation passes", m.validate().is_valid())];
            let part = partition(m, &[0]);
            let classes: Vec<String> = part.classes().iter().map(|c| names(m, c)).collect();
            claims.push(claim(
                format!("{{p}}-bisimulation classes are {{s1,s2,s3}} and {{t1,t2,t3}} (got {})", classes.join(" ")),
                classes == ["{s1,s2,s3}", "{t1,t2,t3}"],
            ));
            for v in Variant::ALL {
                let got = eval(&pm, &d, v).expect("declared");
                let expected = v.form() == crate::semantics::Form::Cap;
                claims.push(claim(format!("D{{a,b}} p at s2 under {v} is {expected}"), got == expected));
            }
            (pm, claims)
        }
        Demo::Moore => {
            let pm = build(GalleryModel::Moore);
            let m = &pm.model;
            let moore = parse("p & ~[a]p");
            let d = parse("D{a,b}(p & ~[a]p)");
            let boxed = parse("[a](p & ~[a]p)");
            let mut claims = vec![
                claim("[b]p holds at w1", eval(&pm, &parse("[b]p"), Variant::FULLCOMM).unwrap()),
                claim("[a]p fails at w1", !eval(&pm, &parse("[a]p"), Variant::FULLCOMM).unwrap()),
                claim("the Moore sentence holds at w1", eval(&pm, &moore, Variant::FULLCOMM).unwrap()),
            ];
            for v in Variant::ALL {
                claims.push(claim(format!("D{{a,b}}(p & ~[a]p) at w1 under {v}"), eval(&pm, &d, v).unwrap()));
            }
            claims.push(claim(
                "[a](p & ~[a]p) is false at every world",
                extension(m, &boxed, Variant::FULLCOMM).unwrap().is_empty(),
            ));
            let hits = moore_sweep(200, 0x4d00_4e00);
            claims.push(claim(
                format!("random S5 sweep (200 models): {hits} worlds satisfy [a](p & ~[a]p)"),
                hits == 0,
            ));
            (pm, claims)
        }
        Demo::Intro => {
            let pm = build(GalleryModel::Intro);
            let script = crate::semantics::AnnouncementScript::parse("b: p\na: q").expect("valid script");
            let outcome = crate::semantics::simulate_script(&pm.model, pm.point, &script).unwrap();
            let mut claims = vec![
                claim(
                    "a knows p -> q, b knows p, neither knows q",
                    eval(&pm, &parse("[a](p -> q) & [b]p & ~[a]q & ~[b]q"), Variant::FULLCOMM).unwrap(),
                ),
                claim("script [(b, p), (a, q)] is correct at every step", outcome.all_correct()),
            ];
            for v in Variant::ALL {
                claims.push(claim(format!("D{{a,b}} q under {v}"), eval(&pm, &parse("D{a,b} q"), v).unwrap()));
            }
            (pm, claims)
        }
        Demo::Circularity => {
            let pm = build(GalleryModel::AppendixA);
            let m = &pm.model;
            let (full, coarse) = appendix_a_families(m);
            let p = m.valuation(0).clone();
            let d_full = circular_d_extension(m, &[0, 1], &p, &full);
            let d_coarse = circular_d_extension(m, &[0, 1], &p, &coarse);
            let s2 = pm.point;
            let mut claims = vec![
                claim("E = all subsets is self-fulfilling", verify_self_fulfilling(m, &full).holds),
                claim(
                    "E = {{}, {s1,s2,s3}, {t1,t2,t3}, S} is self-fulfilling",
                    verify_self_fulfilling(m, &coarse).holds,
                ),
                claim(
                    format!("under E = all subsets, D{{a,b}} p has extension {} (holds at s2)", names(m, &d_full)),
                    d_full == WorldSet::singleton(m.world_count(), s2),
                ),
                claim(
                    format!("under the four-set E, D{{a,b}} p has extension {} (fails at s2)", names(m, &d_coarse)),
                    d_coarse.is_empty(),
                ),
            ];
            for (w, f) in appendix_a_world_formulas() {
                let ext = circular_extension(m, &f, &full).unwrap();
                let expected = WorldSet::singleton(m.world_count(), m.world_index(w).unwrap());
                claims.push(claim(format!("{f} identifies {w} under E = all subsets"), ext == expected));
            }
            (pm, claims)
        }
    }
}

/// Counts worlds satisfying `[a](p & ~[a]p)` across random S5 models.
pub fn moore_sweep(models: usize, seed: u64) -> usize {
    let boxed = parse("[a](p & ~[a]p)");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..models {
        let params = GeneratorParams {
            seed: rng.gen(),
            world_count: rng.gen_range(1..=6),
            agent_count: rng.gen_range(1..=3),
            atom_count: rng.gen_range(1..=2),
            edge_density: rng.gen_range(0.0..=1.0),
            frame: Frame::S5,
        };
        let m = random_model(&params).expect("valid params");
        hits += (0..m.world_count())
            .filter(|&w| eval_at(&m, w, &boxed, Variant::INTERSECTION).unwrap())
            .count();
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appendix_a_partitions() {
        let pm = build(GalleryModel::AppendixA);
        let m = &pm.model;
        assert!(m.validate().is_valid());
        let class = |agent: usize, w: &str| names(m, m.successors(agent, m.world_index(w).unwrap()));
        assert_eq!(class(0, "s1"), "{s1,t1}");
        assert_eq!(class(0, "s2"), "{s2,t2}");
        assert_eq!(class(0, "t3"), "{s3,t3}");
        assert_eq!(class(1, "s1"), "{s1,s2,t1}");
        assert_eq!(class(1, "t2"), "{s3,t2,t3}");
        assert_eq!(m.world_name(pm.point), "s2");
    }

    #[test]
    fn moore_knowledge() {
        let pm = build(GalleryModel::Moore);
        assert!(eval(&pm, &parse("[b]p"), Variant::INTERSECTION).unwrap());
        assert!(!eval(&pm, &parse("[a]p"), Variant::INTERSECTION).unwrap());
    }

    #[test]
    fn intro_knowledge() {
        let pm = build(GalleryModel::Intro);
        let f = parse("[a](p -> q) & [b]p & ~[a]q & ~[b]q");
        assert!(eval(&pm, &f, Variant::FULLCOMM).unwrap());
    }

    #[test]
    fn circular_d_on_appendix_a() {
        let pm = build(GalleryModel::AppendixA);
        let m = &pm.model;
        let (full, coarse) = appendix_a_families(m);
        let p = m.valuation(0).clone();
        assert_eq!(circular_d_extension(m, &[0, 1], &p, &full), WorldSet::singleton(6, pm.point));
        assert!(circular_d_extension(m, &[0, 1], &p, &coarse).is_empty());
        assert_eq!(circular_d_extension(m, &[0, 1], &m.all_worlds(), &coarse), m.all_worlds());
    }

    #[test]
    fn self_fulfilling_families() {
        let m = build(GalleryModel::AppendixA).model;
        let (full, coarse) = appendix_a_families(&m);
        assert!(verify_self_fulfilling(&m, &full).holds);
        assert!(verify_self_fulfilling(&m, &coarse).holds);
        let trivial = ExtensionSet::new(6, [WorldSet::empty(6), WorldSet::full(6)]);
        let verdict = verify_self_fulfilling(&m, &trivial);
        assert!(!verdict.holds);
        assert!(verdict.outside_family.contains(m.valuation(0)));
        assert!(verdict.not_generated.is_empty());
    }

    #[test]
    fn world_formulas_identify_worlds() {
        let m = build(GalleryModel::AppendixA).model;
        let (full, _) = appendix_a_families(&m);
        for (w, f) in appendix_a_world_formulas() {
            let ext = circular_extension(&m, &f, &full).unwrap();
            assert_eq!(ext, WorldSet::singleton(6, m.world_index(w).unwrap()), "{w}");
        }
    }

    #[test]
    fn demos_pass() {
        for d in [Demo::AppendixA, Demo::Moore, Demo::Intro, Demo::Circularity] {
            let (_, claims) = demo(d);
            for c in claims {
                assert!(c.holds, "{d:?}: {c}");
            }
        }
    }
}
