use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::Parser;

use ballrecon::report::emit_report;
use ballrecon::scenario::{run_scenario, PIPELINES, SCENARIOS};
use ballrecon::scene::Scene;
use ballrecon::Error;

/// Reconstruct measures from premeasures on balls by covering and packing.
#[derive(Parser, Debug)]
#[command(name = "ballrecon", version)]
struct Args {
    /// Scenario or pipeline to run.
    #[arg(value_parser = PossibleValuesParser::new(SCENARIOS.iter().chain(PIPELINES.iter()).copied()))]
    scenario: String,

    /// Scene file (JSON). Defaults to the scenario's built-in scene.
    #[arg(long)]
    scene: Option<PathBuf>,

    /// Output directory; results go to `<out>/<scenario>/`.
    #[arg(long, env = "BALLRECON_OUT", default_value = "out")]
    out: PathBuf,

    /// Overrides the scene seed.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, env = "BALLRECON_THREADS")]
    threads: Option<usize>,

    /// Largest conflict-graph component solved exactly.
    #[arg(long)]
    exact_threshold: Option<usize>,

    /// Print the scene that would run and exit.
    #[arg(long)]
    print_scene: bool,
}

fn load(args: &Args) -> Result<Scene, Error> {
    let mut scene = match &args.scene {
        Some(path) => Scene::load(path)?,
        None => Scene::builtin(&args.scenario).expect("every scenario has a built-in scene"),
    };
    if let Some(seed) = args.seed {
        scene.seed = seed;
    }
    if let Some(n) = args.exact_threshold {
        scene.solver.exact_threshold = n;
    }
    Ok(scene)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("thread pool is built once");
    }
    let scene = match load(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if args.print_scene {
        println!("{}", scene.to_json());
        return ExitCode::SUCCESS;
    }
    let report = match run_scenario(&args.scenario, &scene) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let dir = args.out.join(&args.scenario);
    match emit_report(&report, &dir) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let failed = report.failures().count();
    println!("{}: {} verdicts, {} failed", report.scenario, report.verdicts.len(), failed);
    for v in report.failures() {
        eprintln!("FAIL {}: {} (lhs={:?}, rhs={:?}, tol={:?})", v.check, v.inequality, v.lhs, v.rhs, v.tol);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
