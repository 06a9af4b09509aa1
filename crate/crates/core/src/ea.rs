//! The steady-state diversity-maximising EA.
//!
//! Each step picks a parent uniformly, derives one or two 2-opt offspring,
//! drops infeasible ones and keeps the best of parent and offspring (or, with
//! full-population selection, discards the worst contributor overall).
//! Segment counts are updated incrementally; the entropy is re-read from the
//! table histogram after every step, so it never drifts.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use smallvec::SmallVec;

use crate::baselines::{DiversityScore, Measure, PairwiseMatrix};
use crate::entropy::{entropy_bounds, entropy_delta, entropy_from_sum, EntropyBounds, TIE_EPS};
use crate::error::{EdoError, Result};
use crate::instance::{Instance, OptimumInfo};
use crate::mutation::{biased_mode, biased_two_opt, classic_two_opt, CutBias, OffspringScheme, RngState};
use crate::segments::{build_table, f_ln_f, move_delta, summarise, SegmentCounts, SegmentDelta, SegmentTable};
use crate::tour::{apply_two_opt, Tour, TwoOptMove};

/// Absolute slack on the cost bound.
pub const FEASIBILITY_EPS: f64 = 1e-6;
/// Distance below `H_max` at which a run counts as converged.
pub const HMAX_EPS: f64 = 1e-9;
/// Steps between full table rebuilds in verification mode.
pub const VERIFY_EVERY: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Selection {
    /// Offspring compete only with their parent.
    ParentPool,
    /// Offspring may replace any member.
    FullPopulation,
}

impl Selection {
    pub fn as_str(self) -> &'static str {
        match self {
            Selection::ParentPool => "parent-pool",
            Selection::FullPopulation => "full-population",
        }
    }

    /// Default for a measure: parent pool for the entropy, full population
    /// for the edge-based baselines.
    pub fn default_for(measure: Measure) -> Self {
        match measure {
            Measure::Entropy => Selection::ParentPool,
            Measure::Ed | Measure::Pd => Selection::FullPopulation,
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Selection {
    type Err = EdoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "parent-pool" | "parent" => Ok(Selection::ParentPool),
            "full-population" | "full" => Ok(Selection::FullPopulation),
            other => Err(EdoError::Argument(format!(
                "unknown selection '{other}' (expected parent-pool or full-population)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedHmax,
    BudgetExhausted,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ReachedHmax => "reached-hmax",
            Termination::BudgetExhausted => "budget-exhausted",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EaConfig {
    pub mu: usize,
    pub k: usize,
    /// Relative cost slack; `f64::INFINITY` switches the constraint off.
    pub alpha: f64,
    /// Cost evaluations (generated offspring) allowed.
    pub budget: u64,
    pub measure: Measure,
    pub mutation: OffspringScheme,
    pub cut_bias: CutBias,
    pub selection: Selection,
    pub seed: u64,
    pub trace_every: u64,
    /// Cross-check incremental state against recomputation while running.
    pub verify: bool,
}

impl EaConfig {
    /// Unconstrained entropy run with dual offspring and parent-pool
    /// selection.
    pub fn new(mu: usize, k: usize) -> Self {
        EaConfig {
            mu,
            k,
            alpha: f64::INFINITY,
            budget: 100_000,
            measure: Measure::Entropy,
            mutation: OffspringScheme::Dual,
            cut_bias: CutBias::First,
            selection: Selection::ParentPool,
            seed: 0,
            trace_every: 100,
            verify: false,
        }
    }

    pub fn constrained(&self) -> bool {
        self.alpha.is_finite()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.mu == 0 {
            return Err(EdoError::Config("population size must be at least 1".into()));
        }
        if self.measure != Measure::Entropy && self.mu < 2 {
            return Err(EdoError::Config(format!(
                "measure {} needs a population of at least 2",
                self.measure
            )));
        }
        if self.k < 2 || self.k > n {
            return Err(EdoError::Config(format!(
                "segment length k = {} must satisfy 2 <= k <= n = {n}",
                self.k
            )));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(EdoError::Config(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        if self.trace_every == 0 {
            return Err(EdoError::Config("trace interval must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub eval: u64,
    pub h: f64,
    pub h_normalised: f64,
    pub f_min: u32,
    pub f_max: u32,
    pub c: u32,
    /// Feasible offspring generated so far.
    pub feasible: u64,
}

impl TracePoint {
    pub const CSV_HEADER: &'static str = "eval,H,H_normalised,f_min,f_max,C,feasible_offspring_count";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.6},{:.6},{},{},{},{}",
            self.eval, self.h, self.h_normalised, self.f_min, self.f_max, self.c, self.feasible
        )
    }
}

/// `mu` tours with their segment table, current entropy and, for the
/// edge-based measures, the pairwise difference matrix.
#[derive(Debug, Clone)]
pub struct Population {
    tours: Vec<Tour>,
    table: SegmentTable,
    h: f64,
    pairwise: Option<PairwiseMatrix>,
}

impl Population {
    pub fn new(tours: Vec<Tour>, k: usize, measure: Measure) -> Result<Self> {
        let table = build_table(&tours, k)?;
        let pairwise = match measure {
            Measure::Entropy => None,
            Measure::Ed | Measure::Pd => Some(PairwiseMatrix::new(&tours)?),
        };
        let mut pop = Population {
            tours,
            table,
            h: 0.0,
            pairwise,
        };
        pop.refresh_entropy();
        Ok(pop)
    }

    pub fn tours(&self) -> &[Tour] {
        &self.tours
    }

    pub fn table(&self) -> &SegmentTable {
        &self.table
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn mu(&self) -> usize {
        self.tours.len()
    }

    pub fn k(&self) -> usize {
        self.table.k()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    fn occurrences(&self) -> u64 {
        2 * (self.n() * self.mu()) as u64
    }

    fn refresh_entropy(&mut self) {
        self.h = entropy_from_sum(self.table.sum_f_ln_f(), self.occurrences());
    }

    /// Current value of `measure` (edge-based values need the matrix).
    pub fn score(&self, measure: Measure) -> Result<f64> {
        match (measure, &self.pairwise) {
            (Measure::Entropy, _) => Ok(self.h),
            (Measure::Ed, Some(m)) => Ok(m.ed()),
            (Measure::Pd, Some(m)) => Ok(m.pd()),
            _ => Ok(DiversityScore::of(&self.tours, measure, self.k())?.value),
        }
    }

    pub fn max_cost(&self) -> f64 {
        self.tours.iter().map(Tour::cost).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rebuilds every derived structure and compares.
    pub fn check_consistency(&self) -> Result<()> {
        let fresh = build_table(&self.tours, self.k())?;
        if fresh != self.table {
            return Err(EdoError::Consistency("segment table differs from a rebuild".into()));
        }
        let h = entropy_from_sum(fresh.sum_f_ln_f(), self.occurrences());
        if (h - self.h).abs() > 1e-9 {
            return Err(EdoError::Consistency(format!(
                "cached entropy {} but recomputation gives {h}",
                self.h
            )));
        }
        if let Some(m) = &self.pairwise {
            let fresh = PairwiseMatrix::new(&self.tours)?;
            if (fresh.ed() - m.ed()).abs() > 1e-9 || (fresh.pd() - m.pd()).abs() > 1e-9 {
                return Err(EdoError::Consistency("pairwise matrix differs from a rebuild".into()));
            }
        }
        Ok(())
    }

    fn trace_point(&self, eval: u64, bounds: &EntropyBounds, feasible: u64) -> TracePoint {
        let s = summarise(&self.table);
        TracePoint {
            eval,
            h: self.h,
            h_normalised: bounds.normalise(self.h),
            f_min: s.f_min,
            f_max: s.f_max,
            c: s.c,
            feasible,
        }
    }

    fn replace(&mut self, idx: usize, child: Tour, delta: &SegmentDelta, dist: Option<&[u32]>) -> Result<()> {
        self.table.apply(delta)?;
        if let (Some(m), Some(d)) = (&mut self.pairwise, dist) {
            m.replace(idx, &child, d);
        }
        self.tours[idx] = child;
        Ok(())
    }
}

/// `mu` copies of the optimal tour. Unconstrained runs fall back to the
/// identity permutation when no optimal tour is known.
pub fn initialise(inst: &Instance, opt: Option<&OptimumInfo>, cfg: &EaConfig) -> Result<Population> {
    cfg.validate(inst.n())?;
    let seed_tour = match opt.and_then(OptimumInfo::opt_tour) {
        Some(t) => {
            if t.n() != inst.n() {
                return Err(EdoError::Config(format!(
                    "optimal tour has {} nodes but the instance has {}",
                    t.n(),
                    inst.n()
                )));
            }
            t.clone()
        }
        None if cfg.constrained() => {
            return Err(EdoError::Config(
                "a constrained run needs an optimal tour to initialise from".into(),
            ))
        }
        None => Tour::identity(inst),
    };
    if cfg.constrained() {
        let bound = cost_bound(opt, cfg)?;
        if seed_tour.cost() > bound + FEASIBILITY_EPS {
            return Err(EdoError::Config(format!(
                "initial tour costs {} above the bound {bound}",
                seed_tour.cost()
            )));
        }
    }
    Population::new(vec![seed_tour; cfg.mu], cfg.k, cfg.measure)
}

fn cost_bound(opt: Option<&OptimumInfo>, cfg: &EaConfig) -> Result<f64> {
    if !cfg.constrained() {
        return Ok(f64::INFINITY);
    }
    let opt = opt.ok_or_else(|| EdoError::Config("a constrained run needs the optimum cost".into()))?;
    Ok((1.0 + cfg.alpha) * opt.opt_cost())
}

/// What a step consumed and produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub evals: u64,
    pub feasible: u64,
    pub replaced: bool,
}

struct Child {
    mv: TwoOptMove,
    cost: f64,
}

/// Offspring moves of `parent`, ordered by tie preference (classic first).
fn offspring_moves<R: Rng + ?Sized>(
    pop: &Population,
    parent: usize,
    cfg: &EaConfig,
    rng: &mut R,
) -> Result<SmallVec<[TwoOptMove; 2]>> {
    let t = &pop.tours[parent];
    let k = pop.k();
    let biased = biased_mode(cfg.constrained());
    let mut out = SmallVec::new();
    match cfg.mutation {
        OffspringScheme::Classic => out.push(classic_two_opt(t, rng)?),
        OffspringScheme::Biased => out.push(biased_two_opt(t, &pop.table, k, biased, cfg.cut_bias, rng)?),
        OffspringScheme::Dual => {
            let p1 = biased_two_opt(t, &pop.table, k, biased, cfg.cut_bias, rng)?;
            let p2 = classic_two_opt(t, rng)?;
            out.push(p2);
            out.push(p1);
        }
    }
    Ok(out)
}

/// Index of the highest score; earlier entries win ties within `TIE_EPS`.
fn preferred_max(scores: &[f64]) -> usize {
    let mut best = 0;
    for (idx, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] + TIE_EPS {
            best = idx;
        }
    }
    best
}

/// One generation with the configured survivor selection.
pub fn step<R: Rng + ?Sized>(
    pop: &mut Population,
    inst: &Instance,
    opt: Option<&OptimumInfo>,
    cfg: &EaConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    match cfg.selection {
        Selection::ParentPool => step_parent_pool(pop, inst, opt, cfg, rng),
        Selection::FullPopulation => step_full_population(pop, inst, opt, cfg, rng),
    }
}

fn feasible_children<R: Rng + ?Sized>(
    pop: &Population,
    parent: usize,
    inst: &Instance,
    bound: f64,
    cfg: &EaConfig,
    rng: &mut R,
) -> Result<(u64, SmallVec<[Child; 2]>)> {
    let moves = offspring_moves(pop, parent, cfg, rng)?;
    let t = &pop.tours[parent];
    let generated = moves.len() as u64;
    let children = moves
        .into_iter()
        .map(|mv| Child {
            mv,
            cost: t.cost() + mv.cost_delta(t, inst),
        })
        .filter(|c| c.cost <= bound + FEASIBILITY_EPS)
        .collect();
    Ok((generated, children))
}

/// Survivor selection among the parent and its feasible offspring.
pub fn step_parent_pool<R: Rng + ?Sized>(
    pop: &mut Population,
    inst: &Instance,
    opt: Option<&OptimumInfo>,
    cfg: &EaConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    let bound = cost_bound(opt, cfg)?;
    let parent = rng.random_range(0..pop.mu());
    let (evals, children) = feasible_children(pop, parent, inst, bound, cfg, rng)?;
    let feasible = children.len() as u64;
    if children.is_empty() {
        return Ok(StepOutcome { evals, feasible, replaced: false });
    }

    let (n, mu, k) = (pop.n(), pop.mu(), pop.k());
    let t = pop.tours[parent].clone();
    let mut deltas: SmallVec<[SegmentDelta; 2]> = SmallVec::new();
    let mut dists: SmallVec<[Vec<u32>; 2]> = SmallVec::new();
    let mut scores: SmallVec<[f64; 3]> = SmallVec::new();
    for c in &children {
        let delta = move_delta(&t, &c.mv, k)?;
        let child_score = match (cfg.measure, &pop.pairwise) {
            (Measure::Entropy, _) => entropy_delta(&pop.table, &delta.removed, &delta.added, n, mu)?,
            (Measure::Ed, Some(m)) | (Measure::Pd, Some(m)) => {
                let child = apply_two_opt(&t, c.mv, inst)?;
                let d = m.distances_to(&child);
                let v = if cfg.measure == Measure::Ed {
                    m.ed_if_replaced(parent, &d)
                } else {
                    m.pd_if_replaced(parent, &d)
                };
                dists.push(d);
                v
            }
            _ => return Err(EdoError::Consistency("edge-based measure without a matrix".into())),
        };
        deltas.push(delta);
        scores.push(child_score);
    }
    scores.push(match cfg.measure {
        Measure::Entropy => 0.0,
        m => pop.score(m)?,
    });

    let best = preferred_max(&scores);
    if best == children.len() {
        return Ok(StepOutcome { evals, feasible, replaced: false });
    }
    let h_before = pop.h;
    let child = apply_two_opt(&t, children[best].mv, inst)?;
    pop.replace(parent, child, &deltas[best], dists.get(best).map(Vec::as_slice))?;
    pop.refresh_entropy();
    if cfg.verify && cfg.measure == Measure::Entropy {
        let predicted = h_before + scores[best];
        if (predicted - pop.h).abs() > 1e-9 {
            return Err(EdoError::Consistency(format!(
                "predicted entropy {predicted} but the table gives {}",
                pop.h
            )));
        }
    }
    Ok(StepOutcome { evals, feasible, replaced: true })
}

/// `sum f ln f` change from removing every segment of `t` once.
fn removal_change<C: SegmentCounts + ?Sized>(counts: &C, t: &Tour, k: usize) -> f64 {
    let mut buf: SmallVec<[usize; 8]> = SmallVec::with_capacity(k);
    let mut d = 0.0;
    for s in 0..t.n() {
        buf.clear();
        buf.extend((s..s + k).map(|p| t.at(p)));
        let f = counts.count(&buf) as u64;
        d += f_ln_f(f - 1) - f_ln_f(f);
    }
    // Reverse windows carry the same counts.
    2.0 * d
}

/// Survivor selection over the whole population: each feasible offspring
/// (classic first) joins and the member whose removal leaves the most
/// diverse population is discarded. Ties discard the parent first, then the
/// other members in order, and the offspring last.
pub fn step_full_population<R: Rng + ?Sized>(
    pop: &mut Population,
    inst: &Instance,
    opt: Option<&OptimumInfo>,
    cfg: &EaConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    let bound = cost_bound(opt, cfg)?;
    let parent = rng.random_range(0..pop.mu());
    let (evals, children) = feasible_children(pop, parent, inst, bound, cfg, rng)?;
    let feasible = children.len() as u64;
    let mu = pop.mu();
    let k = pop.k();
    let source = pop.tours[parent].clone();
    let order: Vec<usize> = std::iter::once(parent)
        .chain((0..mu).filter(|&q| q != parent))
        .chain(std::iter::once(mu))
        .collect();

    let mut replaced = false;
    for c in &children {
        let child = apply_two_opt(&source, c.mv, inst)?;
        let (scores, dist) = match (cfg.measure, &pop.pairwise) {
            (Measure::Entropy, _) => {
                pop.table.add_tour(&child)?;
                let base = pop.table.sum_f_ln_f();
                let mut s: Vec<f64> = pop
                    .tours
                    .iter()
                    .map(|q| -(base + removal_change(&pop.table, q, k)))
                    .collect();
                s.push(-(base + removal_change(&pop.table, &child, k)));
                (s, None)
            }
            (Measure::Ed, Some(m)) | (Measure::Pd, Some(m)) => {
                let d = m.distances_to(&child);
                let s = if cfg.measure == Measure::Ed {
                    m.ed_discard_each(&d)
                } else {
                    m.pd_discard_each(&d)
                };
                (s, Some(d))
            }
            _ => return Err(EdoError::Consistency("edge-based measure without a matrix".into())),
        };
        let ordered: Vec<f64> = order.iter().map(|&q| scores[q]).collect();
        let discard = order[preferred_max(&ordered)];

        if cfg.measure != Measure::Entropy {
            pop.table.add_tour(&child)?;
        }
        if discard == mu {
            pop.table.remove_tour(&child)?;
            continue;
        }
        pop.table.remove_tour(&pop.tours[discard])?;
        if let (Some(m), Some(d)) = (&mut pop.pairwise, &dist) {
            m.replace(discard, &child, d);
        }
        pop.tours[discard] = child;
        replaced = true;
    }
    pop.refresh_entropy();
    Ok(StepOutcome { evals, feasible, replaced })
}

/// Outcome of a full run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub evals_used: u64,
    pub steps: u64,
    pub trace: Vec<TracePoint>,
    pub termination: Termination,
    /// First evaluation count at which `H >= H_max - 1e-9`.
    pub evals_to_hmax: Option<u64>,
    pub bounds: EntropyBounds,
    pub final_h: f64,
    pub final_normalised: f64,
    pub final_score: DiversityScore,
    pub feasible_offspring: u64,
    pub population: Population,
}

impl RunRecord {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from(TracePoint::CSV_HEADER);
        out.push('\n');
        for p in &self.trace {
            out.push_str(&p.to_csv());
            out.push('\n');
        }
        out
    }
}

/// Runs the EA until `H_max` is reached or the evaluation budget is spent.
pub fn run(inst: &Instance, opt: Option<&OptimumInfo>, cfg: &EaConfig) -> Result<RunRecord> {
    let mut pop = initialise(inst, opt, cfg)?;
    let mut rng = RngState::new(cfg.seed);
    let partial = drive(&mut pop, inst, opt, cfg, &mut rng)?;
    let score = DiversityScore {
        measure: cfg.measure,
        value: pop.score(cfg.measure)?,
    };
    Ok(partial.finish(pop, score))
}

struct Partial {
    evals_used: u64,
    steps: u64,
    trace: Vec<TracePoint>,
    termination: Termination,
    evals_to_hmax: Option<u64>,
    bounds: EntropyBounds,
    feasible: u64,
}

impl Partial {
    fn finish(self, pop: Population, final_score: DiversityScore) -> RunRecord {
        let h = pop.h;
        RunRecord {
            evals_used: self.evals_used,
            steps: self.steps,
            termination: self.termination,
            evals_to_hmax: self.evals_to_hmax,
            final_h: h,
            final_normalised: self.bounds.normalise(h),
            final_score,
            bounds: self.bounds,
            trace: self.trace,
            feasible_offspring: self.feasible,
            population: pop,
        }
    }
}

fn drive<R: Rng + ?Sized>(
    pop: &mut Population,
    inst: &Instance,
    opt: Option<&OptimumInfo>,
    cfg: &EaConfig,
    rng: &mut R,
) -> Result<Partial> {
    let bounds = entropy_bounds(pop.n(), pop.mu(), pop.k())?;
    let target = bounds.h_max - HMAX_EPS;
    let mut evals = 0u64;
    let mut feasible = 0u64;
    let mut steps = 0u64;
    let mut trace = vec![pop.trace_point(0, &bounds, 0)];
    let mut evals_to_hmax = (pop.h >= target).then_some(0);

    let termination = loop {
        if pop.h >= target {
            break Termination::ReachedHmax;
        }
        // a step never overshoots the budget
        if evals + cfg.mutation.offspring_per_step() > cfg.budget {
            break Termination::BudgetExhausted;
        }
        let h_before = pop.h;
        let out = step(pop, inst, opt, cfg, rng)?;
        let before = evals;
        evals += out.evals;
        feasible += out.feasible;
        steps += 1;
        if evals_to_hmax.is_none() && pop.h >= target {
            evals_to_hmax = Some(evals);
        }
        if evals / cfg.trace_every > before / cfg.trace_every {
            trace.push(pop.trace_point(evals, &bounds, feasible));
        }
        if cfg.verify {
            if cfg.measure == Measure::Entropy && pop.h < h_before - TIE_EPS {
                return Err(EdoError::Consistency(format!(
                    "entropy fell from {h_before} to {} at evaluation {evals}",
                    pop.h
                )));
            }
            let bound = cost_bound(opt, cfg)?;
            if pop.max_cost() > bound + FEASIBILITY_EPS {
                return Err(EdoError::Consistency(format!(
                    "a tour costs {} above the bound {bound}",
                    pop.max_cost()
                )));
            }
            if steps.is_multiple_of(VERIFY_EVERY) {
                pop.check_consistency()?;
            }
        }
    };
    if trace.last().map(|p| p.eval) != Some(evals) {
        trace.push(pop.trace_point(evals, &bounds, feasible));
    }
    Ok(Partial {
        evals_used: evals,
        steps,
        trace,
        termination,
        evals_to_hmax,
        bounds,
        feasible,
    })
}
