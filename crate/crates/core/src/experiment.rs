//! Multi-run experiment driver: grids over `mu`, `k` and `alpha`, repeated
//! over seeds, with CSV output.
//!
//! Spec files are plain `key = value` lines; `#` starts a comment. Lists are
//! comma separated and seed lists also accept ranges (`0..10`, `1..=5`).
//!
//! ```text
//! instance = unit:100        # or a TSPLIB path
//! opt_tour = eil51.opt.tour  # or `opt = 426`
//! mu = 25, 250
//! k = 2
//! alpha = inf                # `inf` means unconstrained
//! seeds = 0..10
//! budget = 100000
//! mutation = biased
//! out_dir = out/fig3
//! ```
//!
//! Output files under `out_dir`:
//! `summary.csv` (one row per configuration), `finals.csv` (one row per run),
//! `timing.csv` (wall times, kept apart so the other files are reproducible
//! byte for byte) and `traces/<config>_s<seed>.csv`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::Measure;
use crate::ea::{run, EaConfig, RunRecord, Selection};
use crate::entropy::entropy_bounds;
use crate::error::{EdoError, Result};
use crate::instance::{parse_opt_tour, parse_tsplib, unit_graph, Instance, OptimumInfo};
use crate::mutation::{CutBias, OffspringScheme};
use crate::tour::Tour;

/// First line of every CSV written here.
pub const SCHEMA_HEADER: &str = "# tsp-edo csv v1";
pub const DEFAULT_JOB_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    Unit(usize),
    File(PathBuf),
}

impl InstanceSource {
    pub fn parse(s: &str, base: &Path) -> Result<Self> {
        let s = s.trim();
        if let Some(n) = s.strip_prefix("unit:") {
            let n = n
                .trim()
                .parse()
                .map_err(|_| EdoError::Config(format!("bad unit graph size '{n}'")))?;
            return Ok(InstanceSource::Unit(n));
        }
        Ok(InstanceSource::File(resolve(base, s)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptSource {
    None,
    Cost(f64),
    TourFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub instance: InstanceSource,
    pub opt: OptSource,
    pub mus: Vec<usize>,
    pub ks: Vec<usize>,
    /// `f64::INFINITY` entries are unconstrained.
    pub alphas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub budget: u64,
    pub measure: Measure,
    pub mutation: OffspringScheme,
    pub cut_bias: CutBias,
    /// `None` picks the measure's default.
    pub selection: Option<Selection>,
    pub trace_every: u64,
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub job_cap: usize,
    pub dump_population: bool,
    pub verify: bool,
}

impl ExperimentSpec {
    pub fn new(instance: InstanceSource, out_dir: impl Into<PathBuf>) -> Self {
        let d = EaConfig::new(1, 2);
        ExperimentSpec {
            instance,
            opt: OptSource::None,
            mus: vec![10],
            ks: vec![2],
            alphas: vec![f64::INFINITY],
            seeds: vec![0],
            budget: d.budget,
            measure: d.measure,
            mutation: d.mutation,
            cut_bias: d.cut_bias,
            selection: None,
            trace_every: d.trace_every,
            out_dir: out_dir.into(),
            jobs: 1,
            job_cap: DEFAULT_JOB_CAP,
            dump_population: false,
            verify: false,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses the key-value format; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| EdoError::parse(idx + 1, format!("expected key = value, got '{line}'")))?;
            let key = key.trim().to_ascii_lowercase();
            if kv.insert(key.clone(), (idx + 1, value.trim().to_string())).is_some() {
                return Err(EdoError::parse(idx + 1, format!("duplicate key '{key}'")));
            }
        }
        let (_, inst) = kv
            .remove("instance")
            .ok_or_else(|| EdoError::Config("spec has no 'instance' line".into()))?;
        let mut spec = ExperimentSpec::new(InstanceSource::parse(&inst, base)?, base.join("out"));
        for (key, (line, v)) in kv {
            let bad = |what: &str| EdoError::parse(line, format!("bad {what} '{v}'"));
            match key.as_str() {
                "opt" => spec.opt = OptSource::Cost(v.parse().map_err(|_| bad("optimum cost"))?),
                "opt_tour" => spec.opt = OptSource::TourFile(resolve(base, &v)),
                "mu" => spec.mus = parse_list(&v).map_err(|_| bad("mu list"))?,
                "k" => spec.ks = parse_list(&v).map_err(|_| bad("k list"))?,
                "alpha" => spec.alphas = parse_alphas(&v)?,
                "seeds" => spec.seeds = parse_seeds(&v)?,
                "budget" => spec.budget = v.parse().map_err(|_| bad("budget"))?,
                "measure" => spec.measure = v.parse()?,
                "mutation" => spec.mutation = v.parse()?,
                "cut_bias" => spec.cut_bias = v.parse()?,
                "selection" => spec.selection = Some(v.parse()?),
                "trace_every" => spec.trace_every = v.parse().map_err(|_| bad("trace interval"))?,
                "out_dir" => spec.out_dir = resolve(base, &v),
                "jobs" => spec.jobs = v.parse().map_err(|_| bad("job count"))?,
                "job_cap" => spec.job_cap = v.parse().map_err(|_| bad("job cap"))?,
                "dump_population" => spec.dump_population = parse_bool(&v).ok_or_else(|| bad("flag"))?,
                "verify" => spec.verify = parse_bool(&v).ok_or_else(|| bad("flag"))?,
                other => return Err(EdoError::parse(line, format!("unknown key '{other}'"))),
            }
        }
        Ok(spec)
    }

    /// One config per grid point, in `mu`, `k`, `alpha` order.
    pub fn configs(&self) -> Vec<EaConfig> {
        let mut out = Vec::new();
        for &mu in &self.mus {
            for &k in &self.ks {
                for &alpha in &self.alphas {
                    let mut c = EaConfig::new(mu, k);
                    c.alpha = alpha;
                    c.budget = self.budget;
                    c.measure = self.measure;
                    c.mutation = self.mutation;
                    c.cut_bias = self.cut_bias;
                    c.selection = self.selection.unwrap_or(Selection::default_for(self.measure));
                    c.trace_every = self.trace_every;
                    c.verify = self.verify;
                    out.push(c);
                }
            }
        }
        out
    }

    /// Everything that can be checked without running: grid and seed sizes,
    /// per-config parameters, and an optimum for constrained configs.
    pub fn validate(&self, n: usize, opt: Option<&OptimumInfo>) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(EdoError::Config("seed list is empty".into()));
        }
        if self.mus.is_empty() || self.ks.is_empty() || self.alphas.is_empty() {
            return Err(EdoError::Config("mu, k and alpha lists must be non-empty".into()));
        }
        if self.jobs == 0 {
            return Err(EdoError::Config("jobs must be at least 1".into()));
        }
        if self.trace_every == 0 {
            return Err(EdoError::Config("trace_every must be at least 1".into()));
        }
        let runs = self.mus.len() * self.ks.len() * self.alphas.len() * self.seeds.len();
        if runs > self.job_cap {
            return Err(EdoError::Config(format!(
                "{runs} runs exceed the job cap of {}",
                self.job_cap
            )));
        }
        for c in self.configs() {
            c.validate(n)?;
            if c.constrained() && opt.and_then(OptimumInfo::opt_tour).is_none() {
                return Err(EdoError::Config(format!(
                    "alpha = {} needs an optimal tour (opt_tour)",
                    c.alpha
                )));
            }
        }
        Ok(())
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p.trim());
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

fn parse_list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, T::Err> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect()
}

/// Comma list of non-negative reals where `inf` (or `none`) means
/// unconstrained.
pub fn parse_alphas(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "none" => Ok(f64::INFINITY),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|a| *a >= 0.0)
                .ok_or_else(|| EdoError::Config(format!("bad alpha '{t}'"))),
        })
        .collect()
}

/// Seeds as a comma list whose items are single values or `a..b` / `a..=b`.
pub fn parse_seeds(v: &str) -> Result<Vec<u64>> {
    let bad = || EdoError::Config(format!("bad seed list '{v}'"));
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let (b, inclusive) = match b.strip_prefix('=') {
                Some(b) => (b, true),
                None => (b, false),
            };
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            if inclusive {
                out.extend(a..=b);
            } else {
                out.extend(a..b);
            }
        } else {
            out.push(item.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

/// Loads the instance and its optimum. Unit graphs come with the identity
/// tour as a known optimum.
pub fn load_instance(spec: &ExperimentSpec) -> Result<(Instance, Option<OptimumInfo>)> {
    let inst = match &spec.instance {
        InstanceSource::Unit(n) => unit_graph(*n)?,
        InstanceSource::File(p) => parse_tsplib(&fs::read_to_string(p)?)?,
    };
    let opt = match &spec.opt {
        OptSource::Cost(c) => Some(OptimumInfo::new(*c, None)?),
        OptSource::TourFile(p) => Some(parse_opt_tour(&fs::read_to_string(p)?, &inst)?),
        OptSource::None if matches!(spec.instance, InstanceSource::Unit(_)) => {
            Some(OptimumInfo::from_tour(Tour::identity(&inst)))
        }
        OptSource::None => None,
    };
    Ok((inst, opt))
}

fn fmt_alpha(a: f64) -> String {
    if a.is_finite() {
        format!("{a}")
    } else {
        "inf".into()
    }
}

/// Stable identifier used in file names and CSV rows.
pub fn config_id(inst: &Instance, cfg: &EaConfig) -> String {
    format!(
        "{}_mu{}_k{}_a{}_{}_{}",
        inst.name(),
        cfg.mu,
        cfg.k,
        fmt_alpha(cfg.alpha),
        cfg.measure,
        cfg.mutation
    )
}

/// One finished run, without the population.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub config_id: String,
    pub seed: u64,
    pub final_h: f64,
    pub final_normalised: f64,
    pub final_score: f64,
    pub evals_used: u64,
    pub evals_to_hmax: Option<u64>,
    pub termination: &'static str,
    pub max_cost: f64,
    pub feasible_offspring: u64,
    pub wall_secs: f64,
}

impl RunSummary {
    pub const CSV_HEADER: &'static str =
        "config,seed,final_H,final_H_normalised,final_score,evals_used,evals_to_hmax,termination,max_cost,feasible_offspring_count";

    fn from_record(config_id: String, seed: u64, r: &RunRecord, wall_secs: f64) -> Self {
        RunSummary {
            config_id,
            seed,
            final_h: r.final_h,
            final_normalised: r.final_normalised,
            final_score: r.final_score.value,
            evals_used: r.evals_used,
            evals_to_hmax: r.evals_to_hmax,
            termination: r.termination.as_str(),
            max_cost: r.population.max_cost(),
            feasible_offspring: r.feasible_offspring,
            wall_secs,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{},{},{},{:.6},{}",
            self.config_id,
            self.seed,
            self.final_h,
            self.final_normalised,
            self.final_score,
            self.evals_used,
            self.evals_to_hmax.map(|e| e.to_string()).unwrap_or_default(),
            self.termination,
            self.max_cost,
            self.feasible_offspring
        )
    }
}

/// Aggregate over the seeds of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub config_id: String,
    pub n: usize,
    pub mu: usize,
    pub k: usize,
    pub alpha: f64,
    pub measure: Measure,
    pub mutation: OffspringScheme,
    pub selection: Selection,
    pub runs: usize,
    pub mean_h: f64,
    pub min_h: f64,
    pub max_h: f64,
    /// Over the runs that reached `H_max`.
    pub mean_evals_to_hmax: Option<f64>,
    pub reached: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub wall_secs: f64,
}

impl SummaryRow {
    pub const CSV_HEADER: &'static str =
        "config,n,mu,k,alpha,measure,mutation,selection,runs,mean_H,min_H,max_H,mean_evals_to_hmax,reached_hmax,H_min,H_max";

    pub fn aggregate(inst: &Instance, cfg: &EaConfig, runs: &[RunSummary]) -> Result<Self> {
        if runs.is_empty() {
            return Err(EdoError::Argument("cannot summarise zero runs".into()));
        }
        let b = entropy_bounds(inst.n(), cfg.mu, cfg.k)?;
        let hs: Vec<f64> = runs.iter().map(|r| r.final_h).collect();
        let reached: Vec<u64> = runs.iter().filter_map(|r| r.evals_to_hmax).collect();
        Ok(SummaryRow {
            config_id: config_id(inst, cfg),
            n: inst.n(),
            mu: cfg.mu,
            k: cfg.k,
            alpha: cfg.alpha,
            measure: cfg.measure,
            mutation: cfg.mutation,
            selection: cfg.selection,
            runs: runs.len(),
            mean_h: hs.iter().sum::<f64>() / hs.len() as f64,
            min_h: hs.iter().copied().fold(f64::INFINITY, f64::min),
            max_h: hs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_evals_to_hmax: (!reached.is_empty())
                .then(|| reached.iter().sum::<u64>() as f64 / reached.len() as f64),
            reached: reached.len(),
            h_min: b.h_min,
            h_max: b.h_max,
            wall_secs: runs.iter().map(|r| r.wall_secs).sum(),
        })
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{},{},{:.6},{:.6}",
            self.config_id,
            self.n,
            self.mu,
            self.k,
            fmt_alpha(self.alpha),
            self.measure,
            self.mutation,
            self.selection,
            self.runs,
            self.mean_h,
            self.min_h,
            self.max_h,
            self.mean_evals_to_hmax.map(|e| format!("{e:.6}")).unwrap_or_default(),
            self.reached,
            self.h_min,
            self.h_max
        )
    }
}

fn csv_doc<'a>(header: &str, rows: impl Iterator<Item = String> + 'a) -> String {
    let mut out = format!("{SCHEMA_HEADER}\n{header}\n");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    csv_doc(SummaryRow::CSV_HEADER, rows.iter().map(SummaryRow::to_csv))
}

pub fn finals_csv(runs: &[RunSummary]) -> String {
    csv_doc(RunSummary::CSV_HEADER, runs.iter().map(RunSummary::to_csv))
}

fn timing_csv(rows: &[SummaryRow], runs: &[RunSummary]) -> String {
    let per_run = runs
        .iter()
        .map(|r| format!("{},{},{:.6}", r.config_id, r.seed, r.wall_secs));
    let per_cfg = rows.iter().map(|r| format!("{},all,{:.6}", r.config_id, r.wall_secs));
    csv_doc("config,seed,wall_secs", per_run.chain(per_cfg))
}

/// Undirected edge frequencies over a population, one row per edge used by
/// at least one tour; coordinates are appended for Euclidean instances.
pub fn emit_edge_frequencies(pop: &[Tour], inst: &Instance) -> String {
    let mut freq: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for t in pop {
        for pos in 0..t.n() {
            let (a, b) = (t.at(pos), t.at(pos + 1));
            *freq.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let coords = inst.coords();
    let header = if coords.is_some() {
        "node_i,node_j,frequency,x_i,y_i,x_j,y_j"
    } else {
        "node_i,node_j,frequency"
    };
    let rows = freq.into_iter().map(|((i, j), f)| match coords {
        Some(c) => format!(
            "{i},{j},{f},{:.6},{:.6},{:.6},{:.6}",
            c[i].0, c[i].1, c[j].0, c[j].1
        ),
        None => format!("{i},{j},{f}"),
    });
    csv_doc(header, rows)
}

pub fn population_csv(pop: &[Tour]) -> String {
    let mut out = format!("{SCHEMA_HEADER}\n# one tour per line, 0-based nodes, then its cost\n");
    for t in pop {
        let _ = writeln!(out, "{},{:.6}", t.to_csv_line(), t.cost());
    }
    out
}

/// Everything an experiment produced, in config-then-seed order.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<SummaryRow>,
    pub runs: Vec<RunSummary>,
    pub traces: Vec<String>,
}

/// Summary, trace CSV and (when dumping) the final tours of one run.
type RunOutput = (RunSummary, String, Option<Vec<Tour>>);

/// Runs the grid and writes the CSV files. Runs execute on up to
/// `spec.jobs` threads; output order never depends on completion order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let (inst, opt) = load_instance(spec)?;
    spec.validate(inst.n(), opt.as_ref())?;
    let configs = spec.configs();
    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|c| spec.seeds.iter().map(move |&s| (c, s)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| EdoError::Config(format!("cannot start the job pool: {e}")))?;
    let results: Vec<Result<RunOutput>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, seed)| {
                let mut cfg = configs[c].clone();
                cfg.seed = seed;
                let start = Instant::now();
                let rec = run(&inst, opt.as_ref(), &cfg)?;
                let wall = start.elapsed().as_secs_f64();
                let pop = spec.dump_population.then(|| rec.population.tours().to_vec());
                Ok((
                    RunSummary::from_record(config_id(&inst, &cfg), seed, &rec, wall),
                    rec.trace_csv(),
                    pop,
                ))
            })
            .collect()
    });

    let trace_dir = spec.out_dir.join("traces");
    fs::create_dir_all(&trace_dir)?;
    if spec.dump_population {
        fs::create_dir_all(spec.out_dir.join("populations"))?;
    }
    let mut runs = Vec::with_capacity(results.len());
    let mut traces = Vec::with_capacity(results.len());
    for res in results {
        let (summary, trace, pop) = res?;
        let stem = format!("{}_s{}", summary.config_id, summary.seed);
        fs::write(trace_dir.join(format!("{stem}.csv")), &trace)?;
        if let Some(pop) = pop {
            let dir = spec.out_dir.join("populations");
            fs::write(dir.join(format!("{stem}.csv")), population_csv(&pop))?;
            fs::write(dir.join(format!("{stem}_edges.csv")), emit_edge_frequencies(&pop, &inst))?;
        }
        runs.push(summary);
        traces.push(trace);
    }

    let per_cfg = spec.seeds.len();
    let rows = configs
        .iter()
        .zip(runs.chunks(per_cfg))
        .map(|(cfg, chunk)| SummaryRow::aggregate(&inst, cfg, chunk))
        .collect::<Result<Vec<_>>>()?;

    fs::write(spec.out_dir.join("summary.csv"), summary_csv(&rows))?;
    fs::write(spec.out_dir.join("finals.csv"), finals_csv(&runs))?;
    fs::write(spec.out_dir.join("timing.csv"), timing_csv(&rows, &runs))?;
    Ok(ExperimentReport { rows, runs, traces })
}
