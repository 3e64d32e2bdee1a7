use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use greedy_is::auxweight::{default_tree_cap, verify_alpha_tree, weigh_block, SearchConfig};
use greedy_is::bench::{self, parse_config, Format, Method, RunSpec, ScenarioStats, SweepAxis};
use greedy_is::model::{
    log_search_objective, scenario, scenario_names, GridPoint, LatticePoint, Overrides, Problem,
};
use greedy_is::search::{GridWalk, LatticeWalk};
use greedy_is::{Error, Result};

#[derive(Parser)]
#[command(
    name = "gis",
    version,
    about = "Greedy importance sampling experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario/method cell and print its statistics.
    Run(RunArgs),
    /// Run a scenario over a range of t, n or sigma_q values.
    Sweep(SweepArgs),
    /// Check that α-weights entering every grid point sum to one.
    VerifyWeights {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        m: usize,
    },
    /// Print a greedy block with objectives, branching factors and α.
    TraceBlock {
        #[arg(long)]
        scenario: String,
        /// Comma-separated start (grid coordinates or real vector).
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List catalog scenario names.
    ListScenarios,
}

#[derive(Args)]
struct Common {
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Scenario parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated methods.
    #[arg(long, default_value = "ds,is,gis")]
    methods: String,
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values.
    #[arg(long)]
    values: String,
}

fn build_spec(common: &Common, method: Option<&str>) -> Result<RunSpec> {
    let mut spec = RunSpec::new("", Method::Gis, 100, 300, 0);
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        for (k, v) in parse_config(&text)? {
            spec.set(&k, &v)?;
        }
    }
    if let Some(s) = &common.scenario {
        spec.scenario = s.clone();
    }
    if let Some(m) = method {
        spec.method = m.parse()?;
    }
    if let Some(t) = common.t {
        spec.t = t;
    }
    if let Some(r) = common.reps {
        spec.reps = r;
    }
    if let Some(s) = common.seed {
        spec.seed = s;
    }
    for pair in &common.set {
        spec.overrides.set_pair(pair)?;
    }
    if spec.scenario.is_empty() {
        return Err(Error::Parse("no scenario given".into()));
    }
    Ok(spec)
}

fn emit(rows: &[ScenarioStats], common: &Common) -> Result<()> {
    let format: Format = common.format.parse()?;
    match &common.out {
        Some(path) => bench::write_stats(rows, format, path),
        None => {
            let text = match format {
                Format::Csv => bench::to_csv_string(rows)?,
                Format::Json => bench::to_json_string(rows)?,
            };
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad {what} '{s}'")))
        })
        .collect()
}

fn verify_weights(name: &str, b: f64, m: usize) -> Result<()> {
    let s = scenario(name, &Overrides::new())?;
    let Problem::Grid {
        domain, target, f, ..
    } = &s.problem
    else {
        return Err(Error::UnsupportedMethod {
            method: "verify-weights".into(),
            scenario: name.into(),
        });
    };
    let cfg = SearchConfig::new(b, m, 1.0)?;
    let walk = GridWalk::new(domain, &**target, &**f);
    let cap = default_tree_cap(domain.dim(), m);
    let mut worst = 0.0f64;
    for x in domain.points() {
        let tree = verify_alpha_tree(&walk, &x, &cfg, cap)?;
        worst = worst.max((tree.total - 1.0).abs());
    }
    println!("points {}", domain.len());
    println!("max |sum - 1| = {worst:.3e}");
    Ok(())
}

fn trace_block(name: &str, start: &str, m: Option<usize>, set: &[String]) -> Result<()> {
    let mut overrides = Overrides::new();
    for pair in set {
        overrides.set_pair(pair)?;
    }
    if let Some(m) = m {
        overrides.set("m", m)?;
    }
    let s = scenario(name, &overrides)?;
    let cfg = s.defaults.search;
    println!("b = {}, m = {}, eps = {}", cfg.b, cfg.m, cfg.eps);
    println!("step\tpoint\tln|f p|\tbranch\talpha");
    match &s.problem {
        Problem::Grid {
            domain, target, f, ..
        } => {
            let start = GridPoint::new(parse_list(start, "coordinate")?);
            if !domain.contains(&start) {
                return Err(Error::InvalidParameter(format!("{start} is off the grid")));
            }
            let walk = GridWalk::new(domain, &**target, &**f);
            let wb = weigh_block(&walk, start, &cfg)?;
            for (k, p) in wb.block.points.iter().enumerate() {
                let score = log_search_objective(&**target, &**f, p)?;
                println!(
                    "{k}\t{p}\t{score:.6}\t{}\t{:.6e}",
                    wb.branch[k], wb.alphas[k]
                );
            }
            println!("terminated by {:?}", wb.block.terminated_by);
        }
        Problem::Continuous { target, f, .. } => {
            let x: Vec<f64> = parse_list(start, "coordinate")?;
            if x.len() != target.dim() {
                return Err(Error::InvalidParameter(format!(
                    "start has {} coordinates, scenario has {}",
                    x.len(),
                    target.dim()
                )));
            }
            let walk = LatticeWalk::new(&**target, &**f);
            let origin = LatticePoint::origin(x.into(), cfg.eps);
            let wb = weigh_block(&walk, origin, &cfg)?;
            for (k, p) in wb.block.points.iter().enumerate() {
                let c = p.coords();
                let score = log_search_objective(&**target, &**f, &c)?;
                println!(
                    "{k}\t{c:?}\t{score:.6}\t{}\t{:.6e}",
                    wb.branch[k], wb.alphas[k]
                );
            }
            println!("terminated by {:?}", wb.block.terminated_by);
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let spec = build_spec(&args.common, args.method.as_deref())?;
            let stats = bench::run(&spec)?;
            emit(&[stats], &args.common)
        }
        Command::Sweep(args) => {
            let spec = build_spec(&args.common, None)?;
            let methods: Vec<Method> = parse_list(&args.methods, "method")?;
            let axis: SweepAxis = args.axis.parse()?;
            let values: Vec<f64> = parse_list(&args.values, "value")?;
            let rows = bench::sweep(&spec, &methods, axis, &values)?;
            emit(&rows, &args.common)
        }
        Command::VerifyWeights { scenario, b, m } => verify_weights(&scenario, b, m),
        Command::TraceBlock {
            scenario,
            start,
            m,
            set,
        } => trace_block(&scenario, &start, m, &set),
        Command::ListScenarios => {
            for name in scenario_names() {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(inner) = source {
                eprintln!("  caused by: {inner}");
                source = inner.source();
            }
            ExitCode::FAILURE
        }
    }
}
