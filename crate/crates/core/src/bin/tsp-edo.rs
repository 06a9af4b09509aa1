//! Command-line front end: single runs, sweeps from spec files, MIP export,
//! the brute-force oracle and the verification suite.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tsp_edo::ea::EaConfig;
use tsp_edo::entropy::entropy_bounds;
use tsp_edo::experiment::{
    load_instance, parse_alphas, parse_seeds, run_experiment, ExperimentSpec, InstanceSource, OptSource,
};
use tsp_edo::mip::{brute_force_oracle, build_mip, ingest_solution, write_lp};
use tsp_edo::verification::{check_golden_bounds, check_lemmas, check_oracle_agreement, ORACLE_CASES};
use tsp_edo::{CutBias, EdoError, Measure, OffspringScheme, Result, Selection};

#[derive(Parser)]
#[command(name = "tsp-edo", version, about = "Entropy-based diversity optimisation for the TSP")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the EA over a grid of parameters and seeds, or export/solve tiny
    /// models with --emit-mip, --oracle or --ingest-solution.
    Run(RunArgs),
    /// Run a sweep described by a key-value spec file.
    Sweep {
        spec: PathBuf,
        /// Override the spec's job count.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check bounds against published values, the transfer lemmas and the
    /// oracle on tiny instances.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the (slower) oracle agreement cases.
        #[arg(long)]
        skip_oracle: bool,
    },
    /// Print the closed-form entropy bounds.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: usize,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TSPLIB instance file.
    #[arg(long, conflicts_with = "unit_graph", required_unless_present = "unit_graph")]
    instance: Option<PathBuf>,
    /// Complete graph with unit weights on this many nodes.
    #[arg(long)]
    unit_graph: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    mu: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    k: Vec<usize>,
    /// Cost threshold(s); omit for unconstrained runs.
    #[arg(long)]
    alpha: Option<String>,
    /// Optimum cost.
    #[arg(long, conflicts_with = "opt_tour")]
    opt: Option<f64>,
    /// Optimal tour in TSPLIB format.
    #[arg(long)]
    opt_tour: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[arg(long, default_value = "entropy")]
    measure: Measure,
    /// classic, biased or dual.
    #[arg(long, default_value = "dual")]
    mutation: OffspringScheme,
    /// first (one biased cut) or both.
    #[arg(long, default_value = "first")]
    cut_bias: CutBias,
    /// parent-pool or full-population; defaults by measure.
    #[arg(long)]
    selection: Option<Selection>,
    /// Comma list, ranges allowed (0..10).
    #[arg(long, default_value = "0")]
    seeds: String,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 100)]
    trace_every: u64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Also write final populations and edge frequencies.
    #[arg(long)]
    dump_population: bool,
    /// Re-check incremental state during runs.
    #[arg(long)]
    verify: bool,
    /// Write the MIP in LP format to this path instead of running the EA.
    #[arg(long)]
    emit_mip: Option<PathBuf>,
    /// Enumerate all populations on a tiny instance instead of running the EA.
    #[arg(long)]
    oracle: bool,
    /// Decode a solver solution for the model these flags describe.
    #[arg(long)]
    ingest_solution: Option<PathBuf>,
}

impl RunArgs {
    fn spec(&self) -> Result<ExperimentSpec> {
        let source = match (&self.instance, self.unit_graph) {
            (Some(p), _) => InstanceSource::File(p.clone()),
            (None, Some(n)) => InstanceSource::Unit(n),
            (None, None) => return Err(EdoError::Argument("--instance or --unit-graph is required".into())),
        };
        let mut s = ExperimentSpec::new(source, &self.out_dir);
        s.opt = match (&self.opt_tour, self.opt) {
            (Some(p), _) => OptSource::TourFile(p.clone()),
            (None, Some(c)) => OptSource::Cost(c),
            (None, None) => OptSource::None,
        };
        s.mus = self.mu.clone();
        s.ks = self.k.clone();
        if let Some(a) = &self.alpha {
            s.alphas = parse_alphas(a)?;
        }
        s.seeds = parse_seeds(&self.seeds)?;
        s.budget = self.budget;
        s.measure = self.measure;
        s.mutation = self.mutation;
        s.cut_bias = self.cut_bias;
        s.selection = self.selection;
        s.trace_every = self.trace_every;
        s.jobs = self.jobs;
        s.dump_population = self.dump_population;
        s.verify = self.verify;
        Ok(s)
    }

    fn model_task(&self) -> bool {
        self.emit_mip.is_some() || self.oracle || self.ingest_solution.is_some()
    }
}

/// The single configuration a model task applies to.
fn single_config(spec: &ExperimentSpec) -> Result<EaConfig> {
    let mut cfgs = spec.configs();
    if cfgs.len() != 1 {
        return Err(EdoError::Argument(
            "model tasks need exactly one value each for --mu, --k and --alpha".into(),
        ));
    }
    Ok(cfgs.remove(0))
}

fn model_tasks(args: &RunArgs) -> Result<()> {
    let spec = args.spec()?;
    let (inst, opt) = load_instance(&spec)?;
    let cfg = single_config(&spec)?;
    if args.emit_mip.is_some() || args.ingest_solution.is_some() {
        let model = build_mip(&inst, &cfg, opt.as_ref())?;
        let counts = model.counts();
        if let Some(path) = &args.emit_mip {
            let mut f = std::io::BufWriter::new(fs::File::create(path)?);
            write_lp(&model, &mut f)?;
            println!(
                "wrote {} ({} variables, {} constraints)",
                path.display(),
                counts.variables(),
                counts.constraints()
            );
        }
        if let Some(path) = &args.ingest_solution {
            let sol = ingest_solution(&model, &fs::read_to_string(path)?)?;
            println!("C = {}", sol.c);
            println!("H = {:.6}", sol.h);
            println!("segment indicators checked: {}", sol.y_checked);
            for t in &sol.tours {
                println!("{} cost {:.6}", t.to_csv_line(), t.cost());
            }
        }
    }
    if args.oracle {
        let res = brute_force_oracle(&inst, cfg.mu, cfg.k, cfg.alpha, opt.as_ref())?;
        let b = entropy_bounds(inst.n(), cfg.mu, cfg.k)?;
        println!("feasible tours: {}", res.feasible_tours);
        println!("populations enumerated: {}", res.enumerated);
        println!("best H = {:.9} (C = {})", res.best_h, res.best_c);
        println!("H_max  = {:.9}", b.h_max);
        if let Some(pop) = res.best_populations.first() {
            for t in pop {
                println!("{}", t.to_csv_line());
            }
        }
    }
    Ok(())
}

fn report_runs(spec: &ExperimentSpec) -> Result<()> {
    let rep = run_experiment(spec)?;
    for r in &rep.rows {
        let evals = r
            .mean_evals_to_hmax
            .map(|e| format!("{e:.0}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{}: mean H {:.6} (min {:.6}, max {:.6}), H_max {:.6}, reached {}/{}, mean evals to H_max {}",
            r.config_id, r.mean_h, r.min_h, r.max_h, r.h_max, r.reached, r.runs, evals
        );
    }
    println!("results in {}", spec.out_dir.display());
    Ok(())
}

fn verify(trials: usize, seed: u64, skip_oracle: bool) -> Result<bool> {
    let mut rep = check_golden_bounds()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rep.extend(check_lemmas(trials, &mut rng)?);
    if !skip_oracle {
        rep.extend(check_oracle_agreement(ORACLE_CASES)?);
    }
    println!("{rep}");
    Ok(rep.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run(args) if args.model_task() => model_tasks(&args),
        Cmd::Run(args) => args.spec().and_then(|s| report_runs(&s)),
        Cmd::Sweep { spec, jobs } => ExperimentSpec::from_file(&spec).and_then(|mut s| {
            if let Some(j) = jobs {
                s.jobs = j;
            }
            report_runs(&s)
        }),
        Cmd::Verify { trials, seed, skip_oracle } => match verify(trials, seed, skip_oracle) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(2),
            Err(e) => Err(e),
        },
        Cmd::Bounds { n, mu, k } => entropy_bounds(n, mu, k).map(|b| {
            println!("H_min = {:.6}", b.h_min);
            println!("H_max = {:.6}", b.h_max);
            println!("f_min* = {}, f_max* = {}, C* = {}", b.f_min_star, b.f_max_star, b.c_star);
        }),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
