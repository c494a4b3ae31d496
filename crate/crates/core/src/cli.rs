//! Command-line front end: solve, bounds, export, verify and gen.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use stsp_core::analysis::{append_findings, compare_bounds, BoundReport};
use stsp_core::bnb::{BnbOptions, MilpStatus};
use stsp_core::formulations::{build, BuildOptions, FormulationTag, Problem};
use stsp_core::instance::generate::{self, RequiredSpec};
use stsp_core::instance::Instance;
use stsp_core::milp::export_mps;
use stsp_core::oracle::{verify_walk, WalkSolution};
use stsp_core::solve::{solve_instance, SolveOptions};
use stsp_core::{Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_BUDGET: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "stsp", version, about = "Steiner TSP formulations, solver and oracles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance with one formulation and write the walk as JSON.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Solution file; JSON goes to standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// LP and MILP bounds, model sizes and conjecture checks across tags.
    Bounds {
        instance: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append conjecture findings as JSON lines (default `findings.jsonl`).
        #[arg(long, num_args = 0..=1, default_missing_value = "findings.jsonl")]
        conjectures: Option<PathBuf>,
    },
    /// Write fixed-format MPS files, one per tag.
    Export {
        instance: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check a solution file against an instance.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        /// Problem to check; taken from the solution file when omitted.
        #[arg(long)]
        variant: Option<Problem>,
    },
    /// Generate a deterministic instance.
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Required nodes: a list like `1,3`, `corners`, `all` or `random:K`.
        #[arg(long, global = true)]
        required: Option<RequiredSpec>,
        #[arg(long, global = true, default_value_t = 0)]
        seed: u64,
        /// Add revenues, demands, budget and capacity for the variants.
        #[arg(long, global = true)]
        payloads: bool,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Family {
    Path { n: usize },
    Grid { w: usize, h: usize },
    RandomPlanar { n: usize, m: usize },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Formulation tag; repeat for several. Defaults depend on the command.
    #[arg(long = "tag")]
    pub tags: Vec<FormulationTag>,
    /// Problem variant: stsp, sop, scptp or stsptw.
    #[arg(long)]
    pub variant: Option<Problem>,
    /// Stage count for time-staged tags.
    #[arg(long)]
    pub stages: Option<usize>,
    /// Accept an SCPTP capacity above the total demand.
    #[arg(long)]
    pub allow_excess_capacity: bool,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
}

impl ModelArgs {
    fn build_options(&self) -> BuildOptions {
        BuildOptions {
            stages: self.stages,
            allow_excess_capacity: self.allow_excess_capacity,
            ..BuildOptions::default()
        }
    }

    /// Tags to run: the explicit ones, otherwise `fallback(problem)`.
    fn resolve(&self, fallback: impl Fn(Problem) -> Vec<FormulationTag>) -> Result<Vec<FormulationTag>> {
        if self.tags.is_empty() {
            return Ok(fallback(self.variant.unwrap_or(Problem::Stsp)));
        }
        if let Some(v) = self.variant {
            if let Some(t) = self.tags.iter().find(|t| t.problem() != v) {
                return Err(Error::InvalidArgument(format!("tag {t} does not belong to variant {v:?}")));
            }
        }
        Ok(self.tags.clone())
    }
}

impl BudgetArgs {
    fn options(&self) -> Result<BnbOptions> {
        let time_limit = match self.time_limit {
            Some(s) if !(s.is_finite() && s >= 0.0) => {
                return Err(Error::InvalidArgument(format!("bad time limit {s}")));
            }
            s => s.map(Duration::from_secs_f64),
        };
        Ok(BnbOptions {
            node_limit: self.node_limit,
            time_limit,
            ..BnbOptions::default()
        })
    }
}

fn default_tag(p: Problem) -> FormulationTag {
    match p {
        Problem::Stsp => FormulationTag::ScfStrong,
        Problem::Sop => FormulationTag::SopScfStrong,
        Problem::Scptp => FormulationTag::ScptpScf,
        Problem::Stsptw => FormulationTag::Stsptw,
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    Instance::parse(&text)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { instance, model, budget, out } => {
            let inst = load_instance(&instance)?;
            let tags = model.resolve(|p| vec![default_tag(p)])?;
            let [tag] = tags[..] else {
                return Err(Error::InvalidArgument("solve takes a single --tag".into()));
            };
            let opts = SolveOptions {
                build: model.build_options(),
                bnb: budget.options()?,
            };
            let outcome = solve_instance(&inst, tag, &opts)?;
            log::info!("{tag} finished in {:.3}s", outcome.stats.seconds);
            let json = serde_json::to_string_pretty(&outcome)?;
            if out.is_some() {
                emit(out.as_deref(), &json)?;
                println!("tag        {tag}");
                println!("status     {:?}", outcome.status);
                println!("objective  {}", fmt_opt(outcome.objective));
                println!("bound      {:.6}", outcome.stats.bound);
                println!("nodes      {}", outcome.stats.nodes);
                println!("cuts       {}", outcome.stats.cuts_added);
            } else {
                emit(None, &json)?;
            }
            match outcome.status {
                MilpStatus::Optimal => Ok(EXIT_OK),
                MilpStatus::BudgetExhausted => Ok(EXIT_BUDGET),
                MilpStatus::Infeasible => Err(Error::Infeasible(format!("{tag} has no feasible solution"))),
                MilpStatus::Unbounded => Err(Error::Solver(format!("{tag} is unbounded"))),
            }
        }
        Command::Bounds { instance, model, budget, out, conjectures } => {
            let inst = load_instance(&instance)?;
            let tags = model.resolve(|p| FormulationTag::all_for(p).to_vec())?;
            let report = compare_bounds(&inst, &tags, model.build_options(), &budget.options()?)?;
            print_bounds(&report);
            if let Some(p) = out {
                fs::write(p, serde_json::to_string_pretty(&report)?)?;
            }
            if let Some(p) = conjectures {
                append_findings(&p, &report.findings)?;
            }
            if !report.chain_violations.is_empty() {
                return Err(Error::Solver(format!("bound chain violated: {}", report.chain_violations.join("; "))));
            }
            let exhausted = report.entries.iter().any(|e| e.status == Some(MilpStatus::BudgetExhausted));
            Ok(if exhausted { EXIT_BUDGET } else { EXIT_OK })
        }
        Command::Export { instance, model, out } => {
            let inst = load_instance(&instance)?;
            let tags = model.resolve(|p| FormulationTag::all_for(p).to_vec())?;
            fs::create_dir_all(&out)?;
            for tag in tags {
                let f = build(&inst, tag, model.build_options())?;
                let export = export_mps(&f.model);
                let stem = tag.name().to_ascii_lowercase();
                let path = out.join(format!("{stem}.mps"));
                fs::write(&path, &export.text)?;
                if !export.name_map.is_empty() {
                    fs::write(out.join(format!("{stem}.names.json")), export.sidecar_json())?;
                }
                println!("{}", path.display());
            }
            Ok(EXIT_OK)
        }
        Command::Verify { instance, solution, variant } => {
            let inst = load_instance(&instance)?;
            let (sol, problem) = read_solution(&solution, variant)?;
            let report = verify_walk(&inst, &sol, problem);
            match report.first() {
                None => {
                    println!("pass");
                    Ok(EXIT_OK)
                }
                Some(msg) => {
                    println!("fail: {msg}");
                    Ok(EXIT_ERROR)
                }
            }
        }
        Command::Gen { family, required, seed, payloads, out } => {
            let mut inst = match family {
                Family::Path { n } => generate::path(n, &required.unwrap_or(RequiredSpec::Corners))?,
                Family::Grid { w, h } => generate::grid(w, h, &required.unwrap_or(RequiredSpec::Corners), seed)?,
                Family::RandomPlanar { n, m } => {
                    generate::random_planar(n, m, &required.unwrap_or(RequiredSpec::Random(3)), seed)?
                }
            };
            if payloads {
                inst = generate::with_variant_payloads(&inst, seed)?;
            }
            let text = inst.to_text();
            // Self-check: the emitted text must parse back to the same instance.
            if Instance::parse(&text)?.fingerprint() != inst.fingerprint() {
                return Err(Error::InvalidInstance("generated instance does not round-trip".into()));
            }
            match out {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(EXIT_OK)
        }
    }
}

/// Accepts a `solve` output (with `tag` and `solution`) or a bare walk.
fn read_solution(path: &Path, variant: Option<Problem>) -> Result<(WalkSolution, Problem)> {
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let (walk, tag) = match value.get("solution") {
        Some(s) if s.is_null() => return Err(Error::Solution("solution file holds no walk".into())),
        Some(s) => (s.clone(), value.get("tag").cloned()),
        None => (value, None),
    };
    let sol: WalkSolution = serde_json::from_value(walk)?;
    let from_file = match tag {
        Some(t) => Some(serde_json::from_value::<FormulationTag>(t)?.problem()),
        None => None,
    };
    Ok((sol, variant.or(from_file).unwrap_or(Problem::Stsp)))
}

fn print_bounds(r: &BoundReport) {
    println!("instance {}", r.instance);
    println!(
        "{:<16} {:>14} {:>14} {:>9} {:>8} {:>9} {:>8} {:>6}",
        "tag", "lp", "milp", "vars", "rows", "nonzeros", "nodes", "cuts"
    );
    for e in &r.entries {
        println!(
            "{:<16} {:>14} {:>14} {:>9} {:>8} {:>9} {:>8} {:>6}",
            e.tag.to_string(),
            fmt_opt(e.lp),
            fmt_opt(e.milp),
            e.n_vars,
            e.n_constraints,
            e.n_nonzeros,
            e.nodes,
            e.cuts
        );
    }
    for v in &r.chain_violations {
        println!("chain violated: {v}");
    }
    for f in &r.findings {
        println!("conjecture {:<22} {:?}", f.conjecture, f.verdict);
    }
}
