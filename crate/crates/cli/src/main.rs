use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use psdiag::driver::{
    analyze_a_p, parse_element, run_scenario, scenario_diagram, verify_suite, Level, Mutation, RunReport,
    ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "psdiag", version, about = "Principal-series diagrams of GL2(Q_p): construction and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Args)]
struct Options {
    /// Scenario file (TOML); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Weight of the algebraic factor.
    #[arg(long, global = true)]
    k: Option<u32>,
    /// Level: the diagram uses `K_c`-invariants.
    #[arg(long, global = true)]
    c: Option<u32>,
    /// Sign of `λ = ±p^{(k-1)/2}` in the preset.
    #[arg(long, global = true, allow_hyphen_values = true)]
    sign: Option<i64>,
    #[arg(long, global = true)]
    radius: Option<u32>,
    /// Working precision in uniformizer digits.
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, global = true, value_enum, hide = true)]
    mutate: Option<MutateArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutateArg {
    BoundarySign,
    PiIdentity,
}

impl From<MutateArg> for Mutation {
    fn from(m: MutateArg) -> Mutation {
        match m {
            MutateArg::BoundarySign => Mutation::BoundarySign,
            MutateArg::PiIdentity => Mutation::PiIdentity,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Diagram construction and checks.
    #[command(subcommand)]
    Diagram(DiagramCmd),
    /// Homology of the coefficient system on the tree.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Filtered φ-modules `D_{k,a_p}`.
    #[command(subcommand)]
    Phimod(PhimodCmd),
    /// Fixed verification grids.
    Verify {
        #[arg(value_enum)]
        level: LevelArg,
    },
    /// Every suite for one scenario, or re-render a saved JSON report.
    Report {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DiagramCmd {
    /// Print the diagram (dimensions, `Π`, `r`).
    Build,
    /// Diagram axioms.
    Check,
    /// Deformations at the given points, e.g. `--x 1+9` is written `--x 10`.
    Deform {
        #[arg(long = "x")]
        points: Vec<String>,
    },
}

#[derive(Subcommand)]
enum TreeCmd {
    Homology,
}

#[derive(Subcommand)]
enum PhimodCmd {
    /// Analyze `D_{k,a_p}`; without `--ap` the scenario's parameters are used.
    Analyze {
        #[arg(long, allow_hyphen_values = true)]
        ap: Option<String>,
    },
    /// Approximate `a_p = 2λ` by `a_p(j) = λ(x_j + x_j^{-1})`.
    Approximate {
        #[arg(long)]
        a: Option<u32>,
        #[arg(long)]
        depth: Option<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

fn load_config(opts: &Options) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = match &opts.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ScenarioConfig::from_toml(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(p) = opts.p {
        cfg.field.p = p;
    }
    if let Some(n) = opts.precision {
        cfg.field.precision = Some(n);
    }
    if let Some(k) = opts.k {
        cfg.representation.k = k;
    }
    if let Some(c) = opts.c {
        cfg.representation.c = c;
    }
    if let Some(s) = opts.sign {
        cfg.representation.sign = s;
    }
    if let Some(r) = opts.radius {
        cfg.tree.radius = r;
    }
    if let Some(seed) = opts.seed {
        cfg.run.seed = seed;
    }
    if let Some(m) = opts.mutate {
        cfg.run.mutation = Some(m.into());
    }
    // surface field and parameter errors before any check runs
    let ctx = cfg.field()?;
    cfg.diagram_params(&ctx)?;
    Ok(cfg)
}

fn only(cfg: &mut ScenarioConfig, diagram: bool, deformation: bool, tree: bool, phimod: bool) {
    cfg.run.diagram = diagram;
    cfg.run.deformation = deformation;
    cfg.run.tree = tree;
    cfg.run.phimod = phimod;
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let opts = &cli.opts;
    let report = match cli.command {
        Command::Verify { level } => {
            if opts.p.is_some_and(|p| p == 2) {
                bail!("p = 2 is not supported: the constructions assume p > 2");
            }
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let seed = opts.seed.unwrap_or(0);
            eprintln!("seed: {seed}");
            verify_suite(level, seed, opts.mutate.map(Into::into))
        }
        Command::Report { input: Some(path) } => {
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            RunReport::from_json(&text).with_context(|| format!("in {}", path.display()))?
        }
        Command::Report { input: None } => run_scenario(&load_config(opts)?),
        Command::Diagram(DiagramCmd::Build) => {
            let cfg = load_config(opts)?;
            let t = Instant::now();
            let d = scenario_diagram(&cfg)?;
            let text = match opts.format {
                Format::Json => serde_json::to_string_pretty(&d.to_json())? + "\n",
                Format::Text => {
                    let (v1, vs) = d.split_dims();
                    format!(
                        "{}\nfield: {}\ndim D0 = {}, dim D1 = {} ({} + {})\nbuilt in {:.2}s\n",
                        cfg.label(),
                        d.ctx().describe(),
                        d.dim0(),
                        d.dim1(),
                        v1,
                        vs,
                        t.elapsed().as_secs_f64()
                    )
                }
            };
            emit(&text, opts.out.as_deref())?;
            return Ok(true);
        }
        Command::Diagram(DiagramCmd::Check) => {
            let mut cfg = load_config(opts)?;
            only(&mut cfg, true, false, false, false);
            run_scenario(&cfg)
        }
        Command::Diagram(DiagramCmd::Deform { points }) => {
            let mut cfg = load_config(opts)?;
            if !points.is_empty() {
                cfg.deformation.points = points;
            }
            only(&mut cfg, false, true, false, false);
            run_scenario(&cfg)
        }
        Command::Tree(TreeCmd::Homology) => {
            let mut cfg = load_config(opts)?;
            only(&mut cfg, false, false, true, false);
            run_scenario(&cfg)
        }
        Command::Phimod(PhimodCmd::Analyze { ap: Some(ap) }) => {
            let cfg = load_config(opts)?;
            let ctx = cfg.field()?;
            let t = Instant::now();
            let a_p = parse_element(&ctx, &ap)?;
            let check = analyze_a_p(cfg.representation.k, &a_p);
            RunReport::new(format!("phimod k={} a_p={ap}", cfg.representation.k), cfg.run.seed, vec![check], t.elapsed().as_secs_f64())
        }
        Command::Phimod(PhimodCmd::Analyze { ap: None }) => {
            let mut cfg = load_config(opts)?;
            only(&mut cfg, false, false, false, true);
            run_scenario(&cfg)
        }
        Command::Phimod(PhimodCmd::Approximate { a, depth }) => {
            let mut cfg = load_config(opts)?;
            if let Some(a) = a {
                cfg.phimod.a = a;
            }
            if let Some(d) = depth {
                cfg.phimod.depth = d;
            }
            only(&mut cfg, false, false, false, true);
            run_scenario(&cfg)
        }
    };
    emit(&render(&report, opts.format), opts.out.as_deref())?;
    Ok(report.all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
