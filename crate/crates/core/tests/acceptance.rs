//! Acceptance run. Prints one line per criterion and exits non-zero if any
//! criterion fails or exceeds its time limit.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use distknow::bisim::partition;
use distknow::formula::Formula;
use distknow::gallery::{self, appendix_a_families, circular_d_extension, moore_sweep, verify_self_fulfilling, GalleryModel};
use distknow::kripke::{random_model, Frame};
use distknow::oracle::{self, enumerate_formulas, random_formula, DiffParams, DiffReport};
use distknow::semantics::{eval, eval_at, simulate_script, AnnouncementScript, Form, Variant};
use distknow::WorldSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn f(s: &str) -> Formula {
    Formula::parse(s).expect("valid formula")
}

fn world_names(m: &distknow::KripkeModel, set: &WorldSet) -> Vec<String> {
    set.iter().map(|w| m.world_name(w).to_owned()).collect()
}

fn appendix_a() -> Verdict {
    let pm = gallery::build(GalleryModel::AppendixA);
    let m = &pm.model;
    ensure(m.world_name(pm.point) == "s2", "model must be pointed at s2")?;
    let d = f("D{a,b} p");
    ensure(eval(&pm, &d, Variant::INTERSECTION).unwrap(), "intersection verdict should be true")?;
    let l0: Vec<Variant> = Variant::ALL.into_iter().filter(|v| v.form() == Form::L0).collect();
    ensure(l0.len() == 10, "expected ten L0 variants")?;
    for v in &l0 {
        ensure(!eval(&pm, &d, *v).unwrap(), format!("{v} verdict should be false"))?;
    }
    let part = partition(m, &[m.atom_index("p").unwrap()]);
    let classes: Vec<Vec<String>> = part.classes().iter().map(|c| world_names(m, c)).collect();
    ensure(
        classes == [vec!["s1", "s2", "s3"], vec!["t1", "t2", "t3"]],
        format!("unexpected {{p}}-classes {classes:?}"),
    )?;
    Ok(format!("intersection true, all 10 L0 variants false, classes {classes:?}"))
}

fn circularity() -> Verdict {
    let pm = gallery::build(GalleryModel::AppendixA);
    let m = &pm.model;
    let (powerset, coarse) = appendix_a_families(m);
    let p = m.valuation(m.atom_index("p").unwrap()).clone();
    let mut values = Vec::new();
    for (name, family) in [("powerset", &powerset), ("four-set", &coarse)] {
        let check = verify_self_fulfilling(m, family);
        ensure(
            check.holds,
            format!(
                "{name} family not self-fulfilling: {} missing, {} extra",
                check.not_generated.len(),
                check.outside_family.len()
            ),
        )?;
        values.push(circular_d_extension(m, &[0, 1], &p, family).contains(pm.point));
    }
    ensure(values == [true, false], format!("D{{a,b}}p at s2 was {values:?}, expected [true, false]"))?;
    Ok("both families self-fulfilling; D{a,b}p at s2: powerset true, four-set false".into())
}

fn corpus() -> DiffParams {
    DiffParams {
        seed: 20_240_517,
        count: 1000,
        max_worlds: 5,
        max_agents: 3,
        max_atoms: 2,
        depth: 3,
        frame: None,
        ..DiffParams::default()
    }
}

fn oracle_equivalence(report: &DiffReport) -> Verdict {
    ensure(report.instances >= 1000, "fewer than 1000 instances")?;
    ensure(report.oracle_refused == 0, format!("{} evaluations refused by bounds", report.oracle_refused))?;
    ensure(report.oracle_checked == report.evaluations, "not every evaluation was checked")?;
    let total: u64 = report.oracle_discrepancies.iter().sum();
    ensure(total == 0, format!("{total} discrepancies: {:?}", report.oracle_discrepancies))?;
    for w in &report.witnesses {
        ensure(w.check != oracle::CHECK_ORACLE, "oracle witness recorded")?;
    }
    Ok(format!(
        "{} instances, {} pointed evaluations x 12 variants, 0 discrepancies",
        report.instances, report.evaluations
    ))
}

fn collapse_landscape(report: &DiffReport) -> Verdict {
    for check in [
        oracle::CHECK_SINGLE,
        oracle::CHECK_SET_SOME,
        oracle::CHECK_SET_ALL,
        oracle::CHECK_OMEGA,
        oracle::CHECK_IMPLIES_CAP,
        oracle::CHECK_ALL_SOME,
    ] {
        let v = report.check(check).ok_or(format!("missing check `{check}`"))?;
        ensure(v == 0, format!("`{check}`: {v} violations"))?;
    }
    ensure(report.check(oracle::CHECK_FINITE_COLLAPSE) == Some(0), "the L0 variants did not collapse")?;
    ensure(report.notes.iter().any(|n| n.contains("infinite")), "report lacks the separation note")?;
    let sizes: Vec<usize> = report.collapse_classes.iter().map(Vec::len).collect();
    Ok(format!("(i)-(v) hold; collapse class sizes {sizes:?}"))
}

fn modal_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut compared = 0;
    for i in 0..500 {
        let frame = if i % 2 == 0 { Frame::K } else { Frame::S5 };
        let (left, right) = common::bisimilar_pair(&mut rng, 4, frame, true);
        let q = left.model.atoms().to_vec();
        ensure(
            distknow::bisimilar(&left, &right, &q),
            format!("pair {i}: constructed copy not recognized as bisimilar"),
        )?;
        for _ in 0..50 {
            let phi = random_formula(&mut rng, &q, left.model.agents(), 3);
            let (l, r) = (eval(&left, &phi, Variant::INTERSECTION), eval(&right, &phi, Variant::INTERSECTION));
            ensure(l.is_ok() && l == r, format!("pair {i}: `{phi}` gives {l:?} vs {r:?}"))?;
            compared += 1;
        }
    }
    Ok(format!("500 pairs, {compared} formula comparisons, 0 violations"))
}

fn valuation_class_unions(m: &distknow::KripkeModel) -> BTreeSet<WorldSet> {
    let mut by_signature: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    for w in 0..m.world_count() {
        let sig = (0..m.atoms().len()).map(|p| m.valuation(p).contains(w)).collect();
        by_signature.entry(sig).or_default().push(w);
    }
    let classes: Vec<&Vec<usize>> = by_signature.values().collect();
    (0u32..1 << classes.len())
        .map(|bits| {
            WorldSet::from_worlds(
                m.world_count(),
                classes.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).flat_map(|(_, c)| c.iter().copied()),
            )
        })
        .collect()
}

fn definable_sets() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut formulas = 0;
    let mut complete = 0;
    for i in 0..300 {
        let frame = if i % 2 == 0 { Frame::K } else { Frame::S5 };
        let m = random_model(&common::random_params(&mut rng, 4, 2, 2, frame)).unwrap();
        let atoms = m.atoms().to_vec();
        let agents = m.agents().to_vec();
        let part = partition(&m, &(0..atoms.len()).collect::<Vec<_>>());

        let depth0: BTreeSet<WorldSet> = enumerate_formulas(&m, &atoms, &agents, 0)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|(_, e)| e)
            .collect();
        ensure(depth0 == valuation_class_unions(&m), format!("model {i}: depth-0 extensions differ from valuation class unions"))?;

        let found = enumerate_formulas(&m, &atoms, &agents, 3).map_err(|e| e.to_string())?;
        for (phi, ext) in &found {
            ensure(part.is_closed(ext), format!("model {i}: `{phi}` is not a union of classes"))?;
            let direct = distknow::extension(&m, phi, Variant::INTERSECTION).unwrap();
            ensure(&direct == ext, format!("model {i}: `{phi}` enumerated extension differs from evaluation"))?;
        }
        formulas += found.len();
        if part.rounds() <= 3 {
            ensure(
                found.len() == 1 << part.class_count(),
                format!("model {i}: only {} of {} class unions realized", found.len(), 1 << part.class_count()),
            )?;
            complete += 1;
        }
    }
    Ok(format!(
        "300 models, {formulas} distinct extensions, all closed; every class union realized on {complete} models stable within depth 3"
    ))
}

fn moore() -> Verdict {
    let pm = gallery::build(GalleryModel::Moore);
    let m = &pm.model;
    let d = f("D{a,b}(p & ~[a]p)");
    for v in Variant::ALL {
        ensure(eval(&pm, &d, v).unwrap(), format!("{v}: D{{a,b}}(p & ~[a]p) false at w1"))?;
    }
    let boxed = f("[a](p & ~[a]p)");
    for w in 0..m.world_count() {
        ensure(!eval_at(m, w, &boxed, Variant::INTERSECTION).unwrap(), format!("[a](p & ~[a]p) holds at {}", m.world_name(w)))?;
    }
    let hits = moore_sweep(200, 7);
    ensure(hits == 0, format!("sweep found {hits} worlds knowing the Moore sentence"))?;
    Ok("true under all 12 variants; unknowable at every world; 200-model sweep clean".into())
}

fn pooling() -> Verdict {
    let pm = gallery::build(GalleryModel::Intro);
    ensure(eval(&pm, &f("~[a]q & ~[b]q"), Variant::INTERSECTION).unwrap(), "an agent already knows q")?;
    for v in Variant::ALL {
        ensure(eval(&pm, &f("D{a,b} q"), v).unwrap(), format!("{v}: D{{a,b}} q false"))?;
    }
    let script = AnnouncementScript::parse("b: p\na: q\n").unwrap();
    let outcome = simulate_script(&pm.model, pm.point, &script).unwrap();
    ensure(outcome.correct == [true, true], format!("step correctness {:?}", outcome.correct))?;
    Ok("nobody knows q, D{a,b}q under all 12 variants, script b:p a:q correct".into())
}

fn main() -> ExitCode {
    let mut all = true;
    let mut run = |n: usize, name: &str, limit: Duration, body: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let verdict = body();
        let took = start.elapsed();
        let (ok, detail) = match verdict {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(e) => (false, e),
        };
        all &= ok;
        println!(
            "criterion {n} {name}: {} ({:.3}s, limit {}s) {detail}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    };
    let secs = Duration::from_secs;
    run(1, "appendix-a reproduction", secs(1), &mut appendix_a);
    run(2, "circularity under-determination", secs(5), &mut circularity);
    let mut report = None;
    run(3, "oracle equivalence", secs(600), &mut || {
        let r = oracle::differential_run(&corpus()).map_err(|e| e.to_string())?;
        let out = oracle_equivalence(&r);
        report = Some(r);
        out
    });
    run(4, "collapse landscape", secs(600), &mut || match &report {
        Some(r) => collapse_landscape(r),
        None => Err("no report".into()),
    });
    run(5, "modal invariance", secs(60), &mut modal_invariance);
    run(6, "definable sets", secs(120), &mut definable_sets);
    run(7, "moore sentence", secs(60), &mut moore);
    run(8, "pooling example", secs(1), &mut pooling);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
