use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use distknow::bisim::{self, atom_ids};
use distknow::formula::Formula;
use distknow::gallery::{self, Demo, GalleryModel};
use distknow::kripke::{self, Frame, KripkeModel, World};
use distknow::oracle::{self, Bounds, DiffParams};
use distknow::semantics::{resolve_group, simulate_script, AnnouncementScript, Evaluator, Variant};

#[derive(Parser)]
#[command(name = "distknow", version, about = "Model checker for the twelve readings of distributed knowledge")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula at a world.
    Check(CheckArgs),
    /// Print bisimulation classes.
    Bisim(BisimArgs),
    /// Replay an announcement script.
    Simulate(SimulateArgs),
    /// Differential run of the fast deciders against brute force.
    Diff(DiffArgs),
    /// Reproduce one of the worked models.
    Demo {
        /// appendix-a, moore, intro or circularity
        which: String,
    },
}

#[derive(Args)]
struct ModelArg {
    /// Model file (JSON) or gallery name: appendix_a, moore, intro.
    #[arg(long)]
    model: String,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArg,
    /// World name; defaults to the designated world of gallery models.
    #[arg(long)]
    world: Option<String>,
    #[arg(long)]
    formula: String,
    #[arg(long, default_value = "intersection")]
    variant: String,
    /// Print a row per variant.
    #[arg(long)]
    all_variants: bool,
    /// Cross-check an outermost `D` against brute force.
    #[arg(long)]
    oracle: bool,
    /// No output; the exit status is the verdict (0 true, 1 false).
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct BisimArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Comma-separated atoms; defaults to all declared atoms.
    #[arg(long, value_delimiter = ',')]
    atoms: Option<Vec<String>>,
    /// Also print bisimilarity of every pair of worlds.
    #[arg(long)]
    pairs: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long)]
    world: Option<String>,
    /// Script file, one `agent: formula` per line.
    #[arg(long)]
    script: String,
}

#[derive(Args)]
struct DiffArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 5)]
    max_worlds: usize,
    #[arg(long, default_value_t = 3)]
    max_agents: usize,
    #[arg(long, default_value_t = 2)]
    max_atoms: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// K or S5; both alternate when omitted.
    #[arg(long)]
    frame: Option<Frame>,
}

enum Failure {
    Usage(String),
    Refused(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Refused(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Refused(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Largest model the diff harness accepts; beyond it brute force would
/// refuse most instances.
const DIFF_MAX_WORLDS: usize = 16;

struct Loaded {
    model: KripkeModel,
    default_world: Option<World>,
}

fn load_model(arg: &str) -> Result<Loaded, Failure> {
    if !Path::new(arg).exists() {
        if let Ok(g) = arg.parse::<GalleryModel>() {
            let pm = gallery::build(g);
            return Ok(Loaded {
                model: pm.model,
                default_world: Some(pm.point),
            });
        }
    }
    let model = kripke::load(arg).map_err(|e| usage(format!("--model: {e}")))?;
    Ok(Loaded {
        model,
        default_world: None,
    })
}

fn pick_world(loaded: &Loaded, world: Option<&str>) -> Result<World, Failure> {
    match world {
        Some(name) => loaded
            .model
            .world_index(name)
            .ok_or_else(|| usage(format!("--world: `{name}` is not a world of the model"))),
        None => loaded
            .default_world
            .ok_or_else(|| usage("--world is required for model files")),
    }
}

fn names(m: &KripkeModel, set: &distknow::WorldSet) -> Vec<String> {
    set.iter().map(|w| m.world_name(w).to_owned()).collect()
}

fn check(args: &CheckArgs, as_json: bool, out: &mut dyn Write) -> Result<u8, Failure> {
    let variant: Variant = args.variant.parse().map_err(|e| usage(format!("--variant: {e}")))?;
    let formula = Formula::parse(&args.formula).map_err(|e| usage(format!("--formula: {e}")))?;
    let loaded = load_model(&args.model.model)?;
    let s = pick_world(&loaded, args.world.as_deref())?;
    let m = &loaded.model;

    let oracle_target = if args.oracle {
        match &formula {
            Formula::Distributed(g, inner) if inner.is_l0() => {
                let agents = resolve_group(m, g).map_err(|e| usage(format!("--formula: {e}")))?;
                let ext = Evaluator::new(m, Variant::INTERSECTION)
                    .extension(inner)
                    .map_err(|e| usage(format!("--formula: {e}")))?;
                Some((agents, ext))
            }
            _ => return Err(usage("--oracle: formula must be `D{G} φ` with φ free of D")),
        }
    } else {
        None
    };

    let variants: Vec<Variant> = if args.all_variants { Variant::ALL.to_vec() } else { vec![variant] };
    let mut rows = Vec::new();
    let mut selected = false;
    for v in variants {
        let value = Evaluator::new(m, v)
            .extension(&formula)
            .map_err(|e| usage(format!("--formula: {e}")))?
            .contains(s);
        let brute = match &oracle_target {
            Some((agents, ext)) => Some(
                oracle::brute_force_dk(m, s, agents, ext, v, &Bounds::default())
                    .map_err(|e| Failure::Refused(format!("--oracle: {e}")))?,
            ),
            None => None,
        };
        if v == variant {
            selected = value;
        }
        rows.push((v, value, brute));
    }
    let disagreement = rows.iter().any(|(_, v, b)| b.is_some_and(|b| b != *v));

    if !args.quiet {
        let w = |e: io::Error| usage(e.to_string());
        if as_json {
            let results: Vec<_> = rows
                .iter()
                .map(|(v, value, brute)| json!({"variant": v.to_string(), "value": value, "oracle": brute}))
                .collect();
            let doc = json!({
                "world": m.world_name(s),
                "formula": formula.to_string(),
                "results": results,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json")).map_err(w)?;
        } else if args.all_variants {
            for (v, value, brute) in &rows {
                match brute {
                    Some(b) => writeln!(out, "{:<24} {:<5}  oracle {}", v.to_string(), value, b),
                    None => writeln!(out, "{:<24} {}", v.to_string(), value),
                }
                .map_err(w)?;
            }
        } else {
            match rows[0].2 {
                Some(b) => writeln!(out, "{}  (oracle {})", rows[0].1, b),
                None => writeln!(out, "{}", rows[0].1),
            }
            .map_err(w)?;
        }
    }
    if disagreement {
        eprintln!("warning: fast decision and brute force disagree");
    }
    Ok(if args.quiet && !selected { 1 } else { 0 })
}

fn bisim_cmd(args: &BisimArgs, as_json: bool, out: &mut dyn Write) -> Result<u8, Failure> {
    let loaded = load_model(&args.model.model)?;
    let m = &loaded.model;
    let atom_names = args.atoms.clone().unwrap_or_else(|| m.atoms().to_vec());
    let q = atom_ids(m, &atom_names).map_err(|e| usage(format!("--atoms: {e}")))?;
    let part = bisim::partition(m, &q);
    let classes: Vec<Vec<String>> = part.classes().iter().map(|c| names(m, c)).collect();
    let pairs: Vec<(String, String, bool)> = if args.pairs {
        (0..m.world_count())
            .flat_map(|u| (u + 1..m.world_count()).map(move |v| (u, v)))
            .map(|(u, v)| (m.world_name(u).to_owned(), m.world_name(v).to_owned(), part.class_of(u) == part.class_of(v)))
            .collect()
    } else {
        Vec::new()
    };
    let w = |e: io::Error| usage(e.to_string());
    if as_json {
        let mut doc = json!({"atoms": atom_names, "rounds": part.rounds(), "classes": classes});
        if args.pairs {
            doc["pairs"] = json!(pairs);
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json")).map_err(w)?;
    } else {
        for c in &classes {
            writeln!(out, "{{{}}}", c.join(", ")).map_err(w)?;
        }
        for (u, v, b) in &pairs {
            writeln!(out, "{u} {v} {}", if *b { "bisimilar" } else { "distinct" }).map_err(w)?;
        }
    }
    Ok(0)
}

fn simulate_cmd(args: &SimulateArgs, as_json: bool, out: &mut dyn Write) -> Result<u8, Failure> {
    let loaded = load_model(&args.model.model)?;
    let s = pick_world(&loaded, args.world.as_deref())?;
    let m = &loaded.model;
    let text = std::fs::read_to_string(&args.script).map_err(|e| usage(format!("--script: {}: {e}", args.script)))?;
    let script = AnnouncementScript::parse(&text).map_err(|e| usage(format!("--script: {}: {e}", args.script)))?;
    script
        .check_speakers(m)
        .map_err(|e| usage(format!("--script: {}: {e}", args.script)))?;
    let outcome = simulate_script(m, s, &script).map_err(|e| usage(format!("--script: {}: {e}", args.script)))?;
    let neighborhoods: Vec<(String, Vec<String>)> = (0..m.agents().len())
        .map(|a| (m.agents()[a].clone(), names(m, outcome.final_state.neighborhood(a, s))))
        .collect();
    let w = |e: io::Error| usage(e.to_string());
    if as_json {
        let steps: Vec<_> = script
            .steps
            .iter()
            .zip(&outcome.correct)
            .map(|(st, ok)| json!({"speaker": st.speaker, "statement": st.statement.to_string(), "correct": ok}))
            .collect();
        let doc = json!({
            "world": m.world_name(s),
            "steps": steps,
            "neighborhoods": neighborhoods.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json")).map_err(w)?;
    } else {
        for (i, (st, ok)) in script.steps.iter().zip(&outcome.correct).enumerate() {
            writeln!(out, "step {i}: {}: {}  {}", st.speaker, st.statement, if *ok { "correct" } else { "INCORRECT" }).map_err(w)?;
        }
        for (a, ws) in &neighborhoods {
            writeln!(out, "{a} at {}: {{{}}}", m.world_name(s), ws.join(", ")).map_err(w)?;
        }
    }
    Ok(0)
}

fn diff_cmd(args: &DiffArgs, as_json: bool, out: &mut dyn Write) -> Result<u8, Failure> {
    if args.max_worlds > DIFF_MAX_WORLDS {
        return Err(Failure::Refused(format!(
            "--max-worlds: {} exceeds the brute-force limit of {DIFF_MAX_WORLDS}",
            args.max_worlds
        )));
    }
    for (flag, v) in [("--max-worlds", args.max_worlds), ("--max-agents", args.max_agents), ("--max-atoms", args.max_atoms)] {
        if v == 0 {
            return Err(usage(format!("{flag}: must be at least 1")));
        }
    }
    let params = DiffParams {
        seed: args.seed,
        count: args.count,
        max_worlds: args.max_worlds,
        max_agents: args.max_agents,
        max_atoms: args.max_atoms,
        depth: args.depth,
        frame: args.frame,
        bounds: Bounds::default(),
    };
    let report = oracle::differential_run(&params).map_err(|e| usage(e.to_string()))?;
    let w = |e: io::Error| usage(e.to_string());
    if as_json {
        writeln!(out, "{}", report.to_json()).map_err(w)?;
    } else {
        write!(out, "{report}").map_err(w)?;
    }
    Ok(if report.is_clean() { 0 } else { 1 })
}

fn demo_cmd(which: &str, as_json: bool, out: &mut dyn Write) -> Result<u8, Failure> {
    let which: Demo = which.parse().map_err(|e: String| usage(format!("demo: {e}")))?;
    let (pm, claims) = gallery::demo(which);
    let w = |e: io::Error| usage(e.to_string());
    if as_json {
        let doc = json!({
            "model": pm.model.to_spec(),
            "world": pm.model.world_name(pm.point),
            "claims": claims.iter().map(|c| json!({"claim": c.text, "holds": c.holds})).collect::<Vec<_>>(),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json")).map_err(w)?;
    } else {
        writeln!(out, "{}", pm.model).map_err(w)?;
        writeln!(out, "designated world: {}", pm.model.world_name(pm.point)).map_err(w)?;
        for c in &claims {
            writeln!(out, "{c}").map_err(w)?;
        }
    }
    Ok(if claims.iter().all(|c| c.holds) { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Check(a) => check(a, cli.json, &mut out),
        Command::Bisim(a) => bisim_cmd(a, cli.json, &mut out),
        Command::Simulate(a) => simulate_cmd(a, cli.json, &mut out),
        Command::Diff(a) => diff_cmd(a, cli.json, &mut out),
        Command::Demo { which } => demo_cmd(which, cli.json, &mut out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
