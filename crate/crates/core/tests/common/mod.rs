#![allow(dead_code)]

use distknow::kripke::{random_model, Frame, GeneratorParams, KripkeModel, ModelSpec, PointedModel};
use rand::Rng;

pub fn random_params<R: Rng>(rng: &mut R, max_worlds: usize, max_agents: usize, max_atoms: usize, frame: Frame) -> GeneratorParams {
    GeneratorParams {
        seed: rng.gen(),
        world_count: rng.gen_range(1..=max_worlds),
        agent_count: rng.gen_range(1..=max_agents),
        atom_count: rng.gen_range(1..=max_atoms),
        edge_density: rng.gen_range(0.0..=1.0),
        frame,
    }
}

/// Copies `world`: the copy has the same valuation and successors, and
/// every world seeing the original also sees the copy.
pub fn duplicate_world(spec: &ModelSpec, world: &str) -> ModelSpec {
    let mut copy = format!("{world}'");
    while spec.worlds.contains(&copy) {
        copy.push('\'');
    }
    let mut out = spec.clone();
    out.worlds.push(copy.clone());
    for worlds in out.valuation.values_mut() {
        if worlds.iter().any(|w| w == world) {
            worlds.push(copy.clone());
        }
    }
    let variants = |w: &str| if w == world { vec![w.to_owned(), copy.clone()] } else { vec![w.to_owned()] };
    for pairs in out.relations.values_mut() {
        let mut grown = Vec::new();
        for [x, y] in pairs.iter() {
            for x2 in variants(x) {
                for y2 in variants(y) {
                    grown.push([x2.clone(), y2]);
                }
            }
        }
        *pairs = grown;
    }
    out
}

/// Appends `other` as an unreachable component, renaming its worlds.
pub fn append_component(spec: &ModelSpec, other: &ModelSpec) -> ModelSpec {
    let mut out = spec.clone();
    let rename = |w: &str| format!("x.{w}");
    out.worlds.extend(other.worlds.iter().map(|w| rename(w)));
    for (atom, worlds) in &other.valuation {
        if let Some(v) = out.valuation.get_mut(atom) {
            v.extend(worlds.iter().map(|w| rename(w)));
        }
    }
    for (agent, pairs) in &other.relations {
        if let Some(v) = out.relations.get_mut(agent) {
            v.extend(pairs.iter().map(|[x, y]| [rename(x), rename(y)]));
        }
    }
    out
}

/// Adds an atom outside the shared vocabulary with a random valuation.
pub fn add_noise_atom<R: Rng>(spec: &ModelSpec, rng: &mut R) -> ModelSpec {
    let mut out = spec.clone();
    out.atoms.push("noise".into());
    let worlds: Vec<String> = out.worlds.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    out.valuation.insert("noise".into(), worlds);
    out
}

/// A pointed model and a bisimilar one built by world duplication and by
/// appending unreachable components. With `noise`, the copy also gets an
/// atom the original lacks.
pub fn bisimilar_pair<R: Rng>(rng: &mut R, max_worlds: usize, frame: Frame, noise: bool) -> (PointedModel, PointedModel) {
    let params = random_params(rng, max_worlds, 3, 2, frame);
    let m = random_model(&params).expect("valid params");
    let point = rng.gen_range(0..m.world_count());
    let mut spec = m.to_spec();
    for _ in 0..rng.gen_range(1..=3) {
        let w = spec.worlds[rng.gen_range(0..spec.worlds.len())].clone();
        spec = duplicate_world(&spec, &w);
    }
    if rng.gen_bool(0.5) {
        let other = random_model(&GeneratorParams {
            seed: rng.gen(),
            ..params
        })
        .expect("valid params");
        spec = append_component(&spec, &other.to_spec());
    }
    if noise {
        spec = add_noise_atom(&spec, rng);
    }
    let copy = KripkeModel::from_spec(&spec).expect("construction keeps the model valid");
    assert!(copy.validate().is_valid());
    let name = m.world_name(point);
    let copy_point = match copy.world_index(&format!("{name}'")) {
        Some(dup) if rng.gen_bool(0.5) => dup,
        _ => copy.world_index(name).expect("original worlds are kept"),
    };
    (PointedModel::new(m, point), PointedModel::new(copy, copy_point))
}
