//! Finite Kripke models: construction, validation, S5 closure, the JSON
//! model file format and a seeded random generator.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::worldset::WorldSet;

pub type World = usize;
pub type Agent = usize;
pub type AtomId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    K,
    S5,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::K => "K",
            Frame::S5 => "S5",
        })
    }
}

impl std::str::FromStr for Frame {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "K" | "k" => Ok(Frame::K),
            "S5" | "s5" => Ok(Frame::S5),
            other => Err(format!("unknown frame `{other}` (expected K or S5)")),
        }
    }
}

/// On-disk shape of a model, also used as the name-level builder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub worlds: Vec<String>,
    pub agents: Vec<String>,
    pub atoms: Vec<String>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<[String; 2]>>,
    pub frame: Frame,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub close: bool,
}

/// One violated model invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyWorlds,
    DuplicateName { kind: &'static str, name: String },
    UndeclaredAtom(String),
    UndeclaredAgent(String),
    UndeclaredValuationWorld { atom: String, world: String },
    UndeclaredPairWorld { agent: String, pair: [String; 2] },
    NotReflexive { agent: String, world: String },
    NotSymmetric { agent: String, from: String, to: String },
    NotTransitive { agent: String, from: String, via: String, to: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyWorlds => write!(f, "worlds must be non-empty"),
            Violation::DuplicateName { kind, name } => write!(f, "duplicate {kind} `{name}`"),
            Violation::UndeclaredAtom(a) => write!(f, "valuation names undeclared atom `{a}`"),
            Violation::UndeclaredAgent(a) => write!(f, "relations name undeclared agent `{a}`"),
            Violation::UndeclaredValuationWorld { atom, world } => {
                write!(f, "valuation of `{atom}` names undeclared world `{world}`")
            }
            Violation::UndeclaredPairWorld { agent, pair } => write!(
                f,
                "relation of `{agent}` contains pair [{}, {}] with an undeclared world",
                pair[0], pair[1]
            ),
            Violation::NotReflexive { agent, world } => {
                write!(f, "relation of `{agent}` is not reflexive at `{world}`")
            }
            Violation::NotSymmetric { agent, from, to } => write!(
                f,
                "relation of `{agent}` is not symmetric: has ({from},{to}) but not ({to},{from})"
            ),
            Violation::NotTransitive {
                agent,
                from,
                via,
                to,
            } => write!(
                f,
                "relation of `{agent}` is not transitive: ({from},{via}) and ({via},{to}) but not ({from},{to})"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0}")]
    Invalid(ValidationReport),
    #[error("{path}: line {line}, column {column}: {msg}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid generator parameters: {0}")]
    Params(String),
}

/// A finite Kripke model over a declared atom vocabulary.
///
/// Worlds, agents and atoms are referred to by index; names are kept for
/// printing and for the file format. Relations are stored as successor
/// sets, `relations[agent][world]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    worlds: Vec<String>,
    agents: Vec<String>,
    atoms: Vec<String>,
    valuation: Vec<WorldSet>,
    relations: Vec<Vec<WorldSet>>,
    frame: Frame,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedModel {
    pub model: KripkeModel,
    pub point: World,
}

impl PointedModel {
    pub fn new(model: KripkeModel, point: World) -> Self {
        assert!(point < model.world_count(), "point outside the model");
        PointedModel { model, point }
    }
}

fn duplicates<'a>(kind: &'static str, names: &'a [String], out: &mut Vec<Violation>) {
    let mut seen: BTreeSet<&'a str> = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            out.push(Violation::DuplicateName {
                kind,
                name: n.clone(),
            });
        }
    }
}

/// Structural checks on a name-level model: everything except frame
/// conditions, which [`KripkeModel::validate`] covers.
pub fn validate_spec(spec: &ModelSpec) -> ValidationReport {
    let mut violations = Vec::new();
    if spec.worlds.is_empty() {
        violations.push(Violation::EmptyWorlds);
    }
    duplicates("world", &spec.worlds, &mut violations);
    duplicates("agent", &spec.agents, &mut violations);
    duplicates("atom", &spec.atoms, &mut violations);
    let worlds: BTreeSet<&str> = spec.worlds.iter().map(String::as_str).collect();
    for (atom, members) in &spec.valuation {
        if !spec.atoms.contains(atom) {
            violations.push(Violation::UndeclaredAtom(atom.clone()));
        }
        for w in members {
            if !worlds.contains(w.as_str()) {
                violations.push(Violation::UndeclaredValuationWorld {
                    atom: atom.clone(),
                    world: w.clone(),
                });
            }
        }
    }
    for (agent, pairs) in &spec.relations {
        if !spec.agents.contains(agent) {
            violations.push(Violation::UndeclaredAgent(agent.clone()));
        }
        for pair in pairs {
            if !worlds.contains(pair[0].as_str()) || !worlds.contains(pair[1].as_str()) {
                violations.push(Violation::UndeclaredPairWorld {
                    agent: agent.clone(),
                    pair: pair.clone(),
                });
            }
        }
    }
    ValidationReport { violations }
}

impl KripkeModel {
    /// Builds a model from names, checking declarations. Frame conditions
    /// are not enforced here; see [`KripkeModel::validate`].
    pub fn from_spec(spec: &ModelSpec) -> Result<Self, ModelError> {
        let report = validate_spec(spec);
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        let n = spec.worlds.len();
        let index: HashMap<&str, usize> = spec
            .worlds
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i))
            .collect();
        let valuation = spec
            .atoms
            .iter()
            .map(|atom| {
                let members = spec.valuation.get(atom).map(Vec::as_slice).unwrap_or(&[]);
                WorldSet::from_worlds(n, members.iter().map(|w| index[w.as_str()]))
            })
            .collect();
        let relations = spec
            .agents
            .iter()
            .map(|agent| {
                let mut succ = vec![WorldSet::empty(n); n];
                for [x, y] in spec.relations.get(agent).map(Vec::as_slice).unwrap_or(&[]) {
                    succ[index[x.as_str()]].insert(index[y.as_str()]);
                }
                succ
            })
            .collect();
        let model = KripkeModel {
            worlds: spec.worlds.clone(),
            agents: spec.agents.clone(),
            atoms: spec.atoms.clone(),
            valuation,
            relations,
            frame: spec.frame,
        };
        Ok(if spec.close { model.s5_closure() } else { model })
    }

    /// Index-level constructor used by generators.
    pub fn from_parts(
        worlds: Vec<String>,
        agents: Vec<String>,
        atoms: Vec<String>,
        valuation: Vec<WorldSet>,
        relations: Vec<Vec<WorldSet>>,
        frame: Frame,
    ) -> Self {
        let n = worlds.len();
        assert!(n > 0, "worlds must be non-empty");
        assert_eq!(valuation.len(), atoms.len());
        assert_eq!(relations.len(), agents.len());
        assert!(valuation.iter().all(|v| v.universe() == n));
        assert!(relations
            .iter()
            .all(|r| r.len() == n && r.iter().all(|s| s.universe() == n)));
        KripkeModel {
            worlds,
            agents,
            atoms,
            valuation,
            relations,
            frame,
        }
    }

    pub fn to_spec(&self) -> ModelSpec {
        let valuation = self
            .atoms
            .iter()
            .zip(&self.valuation)
            .map(|(a, set)| (a.clone(), set.iter().map(|w| self.worlds[w].clone()).collect()))
            .collect();
        let relations = self
            .agents
            .iter()
            .enumerate()
            .map(|(ai, a)| {
                let pairs = self
                    .pairs(ai)
                    .map(|(x, y)| [self.worlds[x].clone(), self.worlds[y].clone()])
                    .collect();
                (a.clone(), pairs)
            })
            .collect();
        ModelSpec {
            worlds: self.worlds.clone(),
            agents: self.agents.clone(),
            atoms: self.atoms.clone(),
            valuation,
            relations,
            frame: self.frame,
            close: false,
        }
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn world_name(&self, w: World) -> &str {
        &self.worlds[w]
    }

    pub fn world_index(&self, name: &str) -> Option<World> {
        self.worlds.iter().position(|w| w == name)
    }

    pub fn agent_index(&self, name: &str) -> Option<Agent> {
        self.agents.iter().position(|a| a == name)
    }

    pub fn atom_index(&self, name: &str) -> Option<AtomId> {
        self.atoms.iter().position(|a| a == name)
    }

    pub fn all_worlds(&self) -> WorldSet {
        WorldSet::full(self.world_count())
    }

    /// Extension of an atom.
    pub fn valuation(&self, atom: AtomId) -> &WorldSet {
        &self.valuation[atom]
    }

    /// Worlds `agent` considers possible at `world`.
    pub fn successors(&self, agent: Agent, world: World) -> &WorldSet {
        &self.relations[agent][world]
    }

    pub fn relation(&self, agent: Agent) -> &[WorldSet] {
        &self.relations[agent]
    }

    pub fn pairs(&self, agent: Agent) -> impl Iterator<Item = (World, World)> + '_ {
        self.relations[agent]
            .iter()
            .enumerate()
            .flat_map(|(x, succ)| succ.iter().map(move |y| (x, y)))
    }

    /// Worlds from which every `agent`-successor lies in `target`.
    pub fn box_preimage(&self, agent: Agent, target: &WorldSet) -> WorldSet {
        WorldSet::from_worlds(
            self.world_count(),
            (0..self.world_count()).filter(|&w| self.relations[agent][w].is_subset(target)),
        )
    }

    /// Lists violated frame conditions. Declarations are guaranteed by
    /// construction; use [`validate_spec`] on raw input.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.frame == Frame::S5 {
            let n = self.world_count();
            for (ai, agent) in self.agents.iter().enumerate() {
                let succ = &self.relations[ai];
                for x in 0..n {
                    if !succ[x].contains(x) {
                        violations.push(Violation::NotReflexive {
                            agent: agent.clone(),
                            world: self.worlds[x].clone(),
                        });
                    }
                }
                for x in 0..n {
                    for y in succ[x].iter() {
                        if !succ[y].contains(x) {
                            violations.push(Violation::NotSymmetric {
                                agent: agent.clone(),
                                from: self.worlds[x].clone(),
                                to: self.worlds[y].clone(),
                            });
                        }
                    }
                }
                'trans: for x in 0..n {
                    for y in succ[x].iter() {
                        if let Some(z) = succ[y].difference(&succ[x]).iter().next() {
                            violations.push(Violation::NotTransitive {
                                agent: agent.clone(),
                                from: self.worlds[x].clone(),
                                via: self.worlds[y].clone(),
                                to: self.worlds[z].clone(),
                            });
                            continue 'trans;
                        }
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    /// Replaces each relation by the equivalence relation it generates.
    pub fn s5_closure(&self) -> KripkeModel {
        let n = self.world_count();
        let relations = self
            .relations
            .iter()
            .map(|succ| {
                // connected components of the undirected graph
                let mut comp = vec![usize::MAX; n];
                let mut components: Vec<WorldSet> = Vec::new();
                for start in 0..n {
                    if comp[start] != usize::MAX {
                        continue;
                    }
                    let id = components.len();
                    let mut members = WorldSet::empty(n);
                    let mut stack = vec![start];
                    comp[start] = id;
                    while let Some(x) = stack.pop() {
                        members.insert(x);
                        let neighbours = (0..n).filter(|&y| succ[x].contains(y) || succ[y].contains(x));
                        for y in neighbours {
                            if comp[y] == usize::MAX {
                                comp[y] = id;
                                stack.push(y);
                            }
                        }
                    }
                    components.push(members);
                }
                (0..n).map(|x| components[comp[x]].clone()).collect()
            })
            .collect();
        KripkeModel {
            relations,
            ..self.clone()
        }
    }

    /// Copy of the model with different successor sets.
    pub fn with_relations(&self, relations: Vec<Vec<WorldSet>>) -> KripkeModel {
        assert_eq!(relations.len(), self.agents.len());
        KripkeModel {
            relations,
            ..self.clone()
        }
    }

    pub fn with_frame(&self, frame: Frame) -> KripkeModel {
        KripkeModel {
            frame,
            ..self.clone()
        }
    }
}

impl fmt::Display for KripkeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "frame {}, worlds {}", self.frame, self.worlds.join(" "))?;
        for (w, name) in self.worlds.iter().enumerate() {
            let true_atoms: Vec<&str> = self
                .atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| self.valuation[*i].contains(w))
                .map(|(_, a)| a.as_str())
                .collect();
            writeln!(f, "  {name}: {{{}}}", true_atoms.join(","))?;
        }
        for (ai, agent) in self.agents.iter().enumerate() {
            let pairs: Vec<String> = self
                .pairs(ai)
                .map(|(x, y)| format!("{}-{}", self.worlds[x], self.worlds[y]))
                .collect();
            write!(f, "  {agent}: {}", pairs.join(" "))?;
            if ai + 1 < self.agents.len() {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Parses a model file's text. Frame conditions are checked after the
/// optional closure; any violation is an error.
pub fn parse_model(text: &str, path: &str) -> Result<KripkeModel, ModelError> {
    let spec: ModelSpec = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    let model = KripkeModel::from_spec(&spec)?;
    let report = model.validate();
    if !report.is_valid() {
        return Err(ModelError::Invalid(report));
    }
    Ok(model)
}

pub fn load(path: impl AsRef<Path>) -> Result<KripkeModel, ModelError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: display.clone(),
        source,
    })?;
    parse_model(&text, &display)
}

pub fn to_json(m: &KripkeModel) -> String {
    serde_json::to_string_pretty(&m.to_spec()).expect("model spec serializes")
}

pub fn save(m: &KripkeModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    std::fs::write(path, to_json(m) + "\n").map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub seed: u64,
    pub world_count: usize,
    pub agent_count: usize,
    pub atom_count: usize,
    /// Probability that any given ordered pair is sampled as an edge.
    pub edge_density: f64,
    pub frame: Frame,
}

pub const MAX_GENERATED_WORLDS: usize = 64;
pub const MAX_GENERATED_AGENTS: usize = 26;
pub const MAX_GENERATED_ATOMS: usize = 16;

const ATOM_NAMES: [&str; 4] = ["p", "q", "r", "s"];

fn agent_name(i: usize) -> String {
    char::from(b'a' + i as u8).to_string()
}

fn atom_name(i: usize) -> String {
    ATOM_NAMES
        .get(i)
        .map_or_else(|| format!("p{i}"), |s| (*s).to_owned())
}

impl GeneratorParams {
    pub fn check(&self) -> Result<(), ModelError> {
        let bounded = |name: &str, v: usize, max: usize| {
            if v == 0 || v > max {
                Err(ModelError::Params(format!("{name} must be in 1..={max}, got {v}")))
            } else {
                Ok(())
            }
        };
        bounded("world_count", self.world_count, MAX_GENERATED_WORLDS)?;
        bounded("agent_count", self.agent_count, MAX_GENERATED_AGENTS)?;
        bounded("atom_count", self.atom_count, MAX_GENERATED_ATOMS)?;
        if !(0.0..=1.0).contains(&self.edge_density) {
            return Err(ModelError::Params(format!(
                "edge_density must be in [0,1], got {}",
                self.edge_density
            )));
        }
        Ok(())
    }
}

/// Deterministic random model. S5 frames are the closure of the sampled
/// edges.
pub fn random_model(p: &GeneratorParams) -> Result<KripkeModel, ModelError> {
    p.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.world_count;
    let worlds = (0..n).map(|i| format!("w{i}")).collect();
    let agents = (0..p.agent_count).map(agent_name).collect();
    let atoms = (0..p.atom_count).map(atom_name).collect();
    let valuation = (0..p.atom_count)
        .map(|_| WorldSet::from_worlds(n, (0..n).filter(|_| rng.gen_bool(0.5))))
        .collect();
    let relations = (0..p.agent_count)
        .map(|_| {
            (0..n)
                .map(|_| WorldSet::from_worlds(n, (0..n).filter(|_| rng.gen_bool(p.edge_density))))
                .collect()
        })
        .collect();
    let model = KripkeModel::from_parts(worlds, agents, atoms, valuation, relations, p.frame);
    Ok(match p.frame {
        Frame::S5 => model.s5_closure(),
        Frame::K => model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(worlds: &[&str], pairs: &[(&str, &str)], frame: Frame) -> ModelSpec {
        ModelSpec {
            worlds: worlds.iter().map(|s| s.to_string()).collect(),
            agents: vec!["a".into()],
            atoms: vec!["p".into()],
            valuation: BTreeMap::new(),
            relations: BTreeMap::from([(
                "a".to_string(),
                pairs.iter().map(|(x, y)| [x.to_string(), y.to_string()]).collect(),
            )]),
            frame,
            close: false,
        }
    }

    #[test]
    fn single_reflexive_world_is_valid() {
        let m = KripkeModel::from_spec(&spec(&["w"], &[("w", "w")], Frame::S5)).unwrap();
        assert!(m.validate().is_valid());
    }

    #[test]
    fn missing_reflexive_pair_is_reported() {
        let m = KripkeModel::from_spec(&spec(&["u", "v"], &[("u", "u")], Frame::S5)).unwrap();
        let report = m.validate();
        assert_eq!(
            report.violations,
            vec![Violation::NotReflexive {
                agent: "a".into(),
                world: "v".into()
            }]
        );
    }

    #[test]
    fn closure_by_hand() {
        let m = KripkeModel::from_spec(&spec(&["s1", "t1", "x"], &[("s1", "t1")], Frame::S5)).unwrap();
        let closed = m.s5_closure();
        let pairs: BTreeSet<(World, World)> = closed.pairs(0).collect();
        assert_eq!(pairs, BTreeSet::from([(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)]));
        assert_eq!(closed.s5_closure(), closed);
        assert!(closed.validate().is_valid());
    }

    #[test]
    fn empty_worlds_rejected() {
        let err = parse_model(
            r#"{"worlds": [], "agents": [], "atoms": [], "frame": "K"}"#,
            "mem",
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "worlds must be non-empty");
    }

    #[test]
    fn undeclared_pair_world_named() {
        let err = parse_model(
            r#"{"worlds": ["u"], "agents": ["a"], "atoms": [],
                "relations": {"a": [["u", "zz"]]}, "frame": "K"}"#,
            "mem",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[u, zz]"), "{msg}");
    }

    #[test]
    fn json_errors_carry_line_numbers() {
        let err = parse_model("{\n\"worlds\": [\n}", "m.json").unwrap_err();
        assert!(matches!(err, ModelError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn s5_violation_surfaces_on_load() {
        let err = parse_model(
            r#"{"worlds": ["u", "v"], "agents": ["a"], "atoms": [],
                "relations": {"a": [["u", "v"]]}, "frame": "S5"}"#,
            "mem",
        )
        .unwrap_err();
        assert!(err.to_string().contains("not reflexive"));
        let ok = parse_model(
            r#"{"worlds": ["u", "v"], "agents": ["a"], "atoms": [],
                "relations": {"a": [["u", "v"]]}, "frame": "S5", "close": true}"#,
            "mem",
        )
        .unwrap();
        assert_eq!(ok.pairs(0).count(), 4);
    }

    fn params(density: f64, frame: Frame) -> GeneratorParams {
        GeneratorParams {
            seed: 7,
            world_count: 5,
            agent_count: 2,
            atom_count: 2,
            edge_density: density,
            frame,
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let p = params(0.4, Frame::K);
        assert_eq!(random_model(&p).unwrap(), random_model(&p).unwrap());
    }

    #[test]
    fn generator_density_extremes() {
        let m = random_model(&params(0.0, Frame::S5)).unwrap();
        for a in 0..2 {
            assert!(m.pairs(a).all(|(x, y)| x == y));
            assert_eq!(m.pairs(a).count(), 5);
        }
        let m = random_model(&params(1.0, Frame::K)).unwrap();
        for a in 0..2 {
            assert_eq!(m.pairs(a).count(), 25);
        }
    }

    #[test]
    fn generator_rejects_bad_params() {
        let mut p = params(0.5, Frame::K);
        p.world_count = 0;
        assert!(random_model(&p).is_err());
        p.world_count = 2;
        p.edge_density = 1.5;
        assert!(random_model(&p).is_err());
    }
}
