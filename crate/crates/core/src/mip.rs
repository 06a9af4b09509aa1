//! Linearised MIP export, solution ingest and a brute-force oracle for tiny
//! instances.
//!
//! The model minimises `C = f_max - f_min` over `mu` tours encoded by arc
//! variables `x_i_j_p`, MTZ position variables `w_i_p` and segment indicators
//! `y_<nodes>_p`. Node ids in variable names are 0-based and node 0 is the
//! MTZ depot.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;

use rustc_hash::FxHashMap;

use crate::ea::{EaConfig, FEASIBILITY_EPS};
use crate::entropy::{entropy, entropy_from_sum};
use crate::error::{EdoError, Result};
use crate::instance::{Instance, OptimumInfo};
use crate::segments::{build_table, extract_segments, f_ln_f, segment_space, summarise, Segment};
use crate::tour::Tour;

pub const MAX_NODES: usize = 20;
pub const MAX_MU: usize = 24;
/// Largest number of populations the oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 10_000_000;

const LINE_WIDTH: usize = 78;

/// Variable and row counts of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MipCounts {
    pub x: usize,
    pub w: usize,
    pub y: usize,
    pub quality: usize,
    pub degree: usize,
    pub mtz: usize,
    pub position: usize,
    pub link: usize,
    pub ysum: usize,
    pub frequency: usize,
}

impl MipCounts {
    /// All variables, including `fmin` and `fmax`.
    pub fn variables(&self) -> usize {
        self.x + self.w + self.y + 2
    }

    pub fn constraints(&self) -> usize {
        self.quality + self.degree + self.mtz + self.position + self.link + self.ysum + self.frequency
    }
}

#[derive(Debug, Clone)]
pub struct MipModel {
    inst: Instance,
    mu: usize,
    k: usize,
    /// `(1 + alpha) * OPT` when constrained.
    cost_bound: Option<f64>,
    segments: Vec<Segment>,
}

/// All `n!/(n-k)!` directed segments in lexicographic order.
fn all_segments(n: usize, k: usize) -> Vec<Segment> {
    fn rec(n: usize, k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Segment>) {
        if cur.len() == k {
            out.push(Segment::new(cur));
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(n, k, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(k), &mut vec![false; n], &mut out);
    out
}

pub fn build_mip(inst: &Instance, cfg: &EaConfig, opt: Option<&OptimumInfo>) -> Result<MipModel> {
    let (n, mu, k) = (inst.n(), cfg.mu, cfg.k);
    if n > MAX_NODES || mu > MAX_MU || !(2..=3).contains(&k) || mu == 0 {
        let u = segment_space(n, k.max(2).min(n));
        let vars = (mu as u128) * (n * (n - 1) + n) as u128 + (mu as u128).saturating_mul(u) + 2;
        return Err(EdoError::Size(format!(
            "MIP export supports n <= {MAX_NODES}, 1 <= mu <= {MAX_MU} and k in {{2, 3}}; \
             n = {n}, mu = {mu}, k = {k} would need about {vars} variables"
        )));
    }
    let cost_bound = if cfg.constrained() {
        let opt = opt.ok_or_else(|| EdoError::Config("a constrained model needs the optimum cost".into()))?;
        Some((1.0 + cfg.alpha) * opt.opt_cost())
    } else {
        None
    };
    Ok(MipModel {
        inst: inst.clone(),
        mu,
        k,
        cost_bound,
        segments: all_segments(n, k),
    })
}

fn x_name(i: usize, j: usize, p: usize) -> String {
    format!("x_{i}_{j}_{p}")
}

fn seg_tag(s: &[usize]) -> String {
    s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("_")
}

fn y_name(s: &[usize], p: usize) -> String {
    format!("y_{}_{p}", seg_tag(s))
}

/// Buffers one LP row or section, wrapping long expressions.
struct LineWriter {
    out: String,
    col: usize,
}

impl LineWriter {
    fn new() -> Self {
        LineWriter { out: String::new(), col: 0 }
    }

    fn raw(&mut self, s: &str) {
        self.out.push_str(s);
        self.col += s.len();
    }

    fn token(&mut self, s: &str) {
        if self.col > 0 && self.col + 1 + s.len() > LINE_WIDTH {
            self.out.push_str("\n  ");
            self.col = 2;
        } else if self.col > 0 {
            self.out.push(' ');
            self.col += 1;
        }
        self.raw(s);
    }

    fn term(&mut self, first: bool, coef: f64, var: &str) {
        let sign = if coef < 0.0 { "-" } else { "+" };
        let mag = coef.abs();
        let body = if mag == 1.0 { var.to_string() } else { format!("{mag} {var}") };
        let tok = if first && sign == "+" { body } else { format!("{sign} {body}") };
        self.token(&tok);
    }

    fn end_line(&mut self) {
        self.out.push('\n');
        self.col = 0;
    }
}

impl MipModel {
    pub fn n(&self) -> usize {
        self.inst.n()
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn counts(&self) -> MipCounts {
        let (n, mu) = (self.n(), self.mu);
        let u = self.segments.len();
        MipCounts {
            x: mu * n * (n - 1),
            w: mu * n,
            y: mu * u,
            quality: if self.cost_bound.is_some() { mu } else { 0 },
            degree: 2 * n * mu,
            mtz: mu * (n - 1) * (n - 2),
            position: mu * (n - 1),
            link: 2 * mu * u,
            ysum: 1,
            frequency: 2 * u,
        }
    }

    /// The model in CPLEX LP syntax. Output is deterministic.
    pub fn to_lp_string(&self) -> String {
        let (n, mu, k) = (self.n(), self.mu, self.k);
        let mut w = LineWriter::new();
        w.raw(&format!(
            "\\ tsp-edo diversity model: n = {n}, mu = {mu}, k = {k}, {}",
            match self.cost_bound {
                Some(b) => format!("cost bound {b}"),
                None => "unconstrained".into(),
            }
        ));
        w.end_line();
        w.raw("Minimize");
        w.end_line();
        w.raw(" obj: fmax - fmin");
        w.end_line();
        w.raw("Subject To");
        w.end_line();

        if let Some(bound) = self.cost_bound {
            for p in 0..mu {
                w.raw(&format!(" q_{p}:"));
                let mut first = true;
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            w.term(first, self.inst.dist(i, j), &x_name(i, j, p));
                            first = false;
                        }
                    }
                }
                w.token(&format!("<= {bound}"));
                w.end_line();
            }
        }
        for p in 0..mu {
            for j in 0..n {
                w.raw(&format!(" in_{j}_{p}:"));
                for (c, i) in (0..n).filter(|&i| i != j).enumerate() {
                    w.term(c == 0, 1.0, &x_name(i, j, p));
                }
                w.token("= 1");
                w.end_line();
            }
            for i in 0..n {
                w.raw(&format!(" out_{i}_{p}:"));
                for (c, j) in (0..n).filter(|&j| j != i).enumerate() {
                    w.term(c == 0, 1.0, &x_name(i, j, p));
                }
                w.token("= 1");
                w.end_line();
            }
        }
        for p in 0..mu {
            for i in 1..n {
                for j in 1..n {
                    if i != j {
                        w.raw(&format!(" mtz_{i}_{j}_{p}:"));
                        w.term(true, 1.0, &format!("w_{i}_{p}"));
                        w.term(false, -1.0, &format!("w_{j}_{p}"));
                        w.term(false, n as f64, &x_name(i, j, p));
                        w.token(&format!("<= {}", n - 1));
                        w.end_line();
                    }
                }
            }
            for i in 1..n {
                w.raw(&format!(" pos_{i}_{p}: w_{i}_{p} <= {}", n - 1));
                w.end_line();
            }
        }
        let rhs = 2 - k as i64;
        for p in 0..mu {
            for s in &self.segments {
                let nodes = s.nodes();
                let y = y_name(nodes, p);
                for (tag, seq) in [("ys", nodes.to_vec()), ("yr", nodes.iter().rev().copied().collect())] {
                    w.raw(&format!(" {tag}_{}_{p}:", seg_tag(nodes)));
                    w.term(true, 1.0, &y);
                    for e in seq.windows(2) {
                        w.term(false, -1.0, &x_name(e[0], e[1], p));
                    }
                    w.token(&format!(">= {rhs}"));
                    w.end_line();
                }
            }
        }
        w.raw(" ysum:");
        let mut first = true;
        for p in 0..mu {
            for s in &self.segments {
                w.term(first, 1.0, &y_name(s.nodes(), p));
                first = false;
            }
        }
        w.token(&format!("<= {}", 2 * n * mu));
        w.end_line();
        for (tag, var, sense) in [("fmax", "fmax", ">="), ("fmin", "fmin", "<=")] {
            for s in &self.segments {
                w.raw(&format!(" {tag}_{}:", seg_tag(s.nodes())));
                w.term(true, 1.0, var);
                for p in 0..mu {
                    w.term(false, -1.0, &y_name(s.nodes(), p));
                }
                w.token(&format!("{sense} 0"));
                w.end_line();
            }
        }

        w.raw("Bounds");
        w.end_line();
        for p in 0..mu {
            w.raw(&format!(" w_0_{p} = 0"));
            w.end_line();
        }
        w.raw(&format!(" 0 <= fmin <= {mu}"));
        w.end_line();
        w.raw(&format!(" 0 <= fmax <= {mu}"));
        w.end_line();

        w.raw("Binaries");
        w.end_line();
        for p in 0..mu {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        w.token(&x_name(i, j, p));
                    }
                }
            }
        }
        for p in 0..mu {
            for s in &self.segments {
                w.token(&y_name(s.nodes(), p));
            }
        }
        w.end_line();
        w.raw("Generals");
        w.end_line();
        for p in 0..mu {
            for i in 0..n {
                w.token(&format!("w_{i}_{p}"));
            }
        }
        w.token("fmin");
        w.token("fmax");
        w.end_line();
        w.raw("End");
        w.end_line();
        w.out
    }
}

pub fn write_lp<W: io::Write>(model: &MipModel, out: &mut W) -> Result<()> {
    out.write_all(model.to_lp_string().as_bytes())?;
    Ok(())
}

/// Reads `name value` pairs from a solver's solution file. Lines whose first
/// model-variable token is not followed by a number are skipped, which
/// accepts the plain two-column format as well as HiGHS and CBC listings.
pub fn parse_solution(text: &str) -> HashMap<String, f64> {
    let mut vals = HashMap::new();
    for line in text.lines() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some(pos) = toks.iter().position(|t| is_model_var(t)) else {
            continue;
        };
        if let Some(v) = toks.get(pos + 1).and_then(|t| t.parse::<f64>().ok()) {
            vals.insert(toks[pos].to_string(), v);
        }
    }
    vals
}

fn is_model_var(t: &str) -> bool {
    t == "fmin" || t == "fmax" || t.starts_with("x_") || t.starts_with("y_") || t.starts_with("w_")
}

/// A decoded solver solution.
#[derive(Debug, Clone)]
pub struct IngestedSolution {
    pub tours: Vec<Tour>,
    pub c: u32,
    pub h: f64,
    /// Whether segment indicators were present and checked.
    pub y_checked: bool,
}

fn decode_tour(succ: &[Option<usize>], inst: &Instance, p: usize) -> Result<Tour> {
    let n = succ.len();
    let mut perm = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut v = 0;
    for _ in 0..n {
        if seen[v] {
            return Err(EdoError::Validation(format!(
                "tour {p} closes a subtour of {} nodes",
                perm.len()
            )));
        }
        seen[v] = true;
        perm.push(v);
        v = succ[v].ok_or_else(|| EdoError::Validation(format!("tour {p}: node {v} has no successor")))?;
    }
    if v != 0 {
        return Err(EdoError::Validation(format!("tour {p} does not return to node 0")));
    }
    Tour::new(perm, inst)
}

/// Decodes the `x` part of a solution into tours, cross-checks any `y`
/// values against the decoded segments and reports `C` and `H`.
pub fn ingest_solution(model: &MipModel, text: &str) -> Result<IngestedSolution> {
    let vals = parse_solution(text);
    let (n, mu, k) = (model.n(), model.mu, model.k);
    let mut succ = vec![vec![None; n]; mu];
    for (name, &v) in &vals {
        if v <= 0.5 {
            continue;
        }
        let Some(rest) = name.strip_prefix("x_") else {
            continue;
        };
        let parts: Vec<usize> = rest
            .split('_')
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| EdoError::Validation(format!("malformed variable name {name}")))?;
        let [i, j, p] = parts[..] else {
            return Err(EdoError::Validation(format!("malformed variable name {name}")));
        };
        if i >= n || j >= n || p >= mu || i == j {
            return Err(EdoError::Validation(format!("variable {name} outside the model")));
        }
        if succ[p][i].replace(j).is_some() {
            return Err(EdoError::Validation(format!("tour {p}: node {i} leaves twice")));
        }
    }
    let tours = succ
        .iter()
        .enumerate()
        .map(|(p, s)| decode_tour(s, &model.inst, p))
        .collect::<Result<Vec<_>>>()?;

    let y_checked = vals.keys().any(|name| name.starts_with("y_"));
    if y_checked {
        for (p, t) in tours.iter().enumerate() {
            let present: std::collections::HashSet<Segment> = extract_segments(t, k)?.into_iter().collect();
            for s in &model.segments {
                let name = y_name(s.nodes(), p);
                let y = vals.get(&name).copied().unwrap_or(0.0) > 0.5;
                let expect = present.contains(s) || present.contains(&s.reversed());
                if y != expect {
                    return Err(EdoError::Consistency(format!(
                        "{name} = {} but tour {p} {} segment {s}",
                        y as u8,
                        if expect { "contains" } else { "does not contain" }
                    )));
                }
            }
        }
    }

    let tab = build_table(&tours, k)?;
    let h = entropy(&tab, n, mu)?.h;
    Ok(IngestedSolution {
        c: summarise(&tab).c,
        h,
        tours,
        y_checked,
    })
}

/// Exhaustive search result.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub best_h: f64,
    /// Smallest `C` among the maximising populations.
    pub best_c: u32,
    pub best_populations: Vec<Vec<Tour>>,
    pub enumerated: u64,
    pub feasible_tours: usize,
    /// Highest entropy among populations with `C <= 1`, if any.
    pub best_h_c01: Option<f64>,
    /// Highest entropy among populations with `C >= 2`, if any.
    pub best_h_c2: Option<f64>,
}

/// Tours with node 0 first and `perm[1] < perm[n-1]`: one representative
/// per undirected cycle.
pub fn canonical_tours(inst: &Instance) -> Vec<Tour> {
    fn rec(inst: &Instance, perm: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Tour>) {
        let n = inst.n();
        if perm.len() == n {
            if perm[1] < perm[n - 1] {
                out.push(Tour::new(perm.clone(), inst).expect("permutation by construction"));
            }
            return;
        }
        for v in 1..n {
            if !used[v] {
                used[v] = true;
                perm.push(v);
                rec(inst, perm, used, out);
                perm.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; inst.n()];
    used[0] = true;
    rec(inst, &mut vec![0], &mut used, &mut out);
    out
}

fn multisets(m: usize, mu: usize) -> u128 {
    // C(m + mu - 1, mu)
    let mut r: u128 = 1;
    for i in 0..mu as u128 {
        r = r.saturating_mul(m as u128 + i) / (i + 1);
    }
    r
}

/// Enumerates every multiset of `mu` feasible tours and returns the maximum
/// entropy together with all populations attaining it.
pub fn brute_force_oracle(
    inst: &Instance,
    mu: usize,
    k: usize,
    alpha: f64,
    opt: Option<&OptimumInfo>,
) -> Result<OracleResult> {
    let n = inst.n();
    if k < 2 || k > n || mu == 0 {
        return Err(EdoError::Argument(format!("oracle needs 2 <= k <= n and mu >= 1 (k = {k}, mu = {mu})")));
    }
    if n > 10 {
        return Err(EdoError::Size(format!("oracle enumeration is limited to n <= 10, got {n}")));
    }
    let mut tours = canonical_tours(inst);
    if alpha.is_finite() {
        let opt = opt.ok_or_else(|| EdoError::Config("constrained oracle needs the optimum cost".into()))?;
        let bound = (1.0 + alpha) * opt.opt_cost();
        tours.retain(|t| t.cost() <= bound + FEASIBILITY_EPS);
    }
    let m = tours.len();
    let total = multisets(m, mu);
    if total > ORACLE_LIMIT {
        return Err(EdoError::Size(format!(
            "{total} populations to enumerate exceeds the limit of {ORACLE_LIMIT}"
        )));
    }

    let mut index: FxHashMap<Segment, usize> = FxHashMap::default();
    let seg_ids: Vec<Vec<usize>> = tours
        .iter()
        .map(|t| {
            extract_segments(t, k).map(|segs| {
                segs.into_iter()
                    .map(|s| {
                        let next = index.len();
                        *index.entry(s).or_insert(next)
                    })
                    .collect()
            })
        })
        .collect::<Result<_>>()?;
    let u = segment_space(n, k);
    let occ = 2 * (n * mu) as u64;

    struct Search<'a> {
        seg_ids: &'a [Vec<usize>],
        counts: Vec<u32>,
        chosen: Vec<usize>,
        best_h: f64,
        best: Vec<(Vec<usize>, u32)>,
        best_c01: Option<f64>,
        best_c2: Option<f64>,
        enumerated: u64,
        u: u128,
        occ: u64,
    }

    impl Search<'_> {
        fn add(&mut self, t: usize, sign: i64) {
            for &s in &self.seg_ids[t] {
                self.counts[s] = (self.counts[s] as i64 + sign) as u32;
            }
        }

        fn leaf(&mut self) {
            self.enumerated += 1;
            let sum: f64 = self.counts.iter().map(|&c| f_ln_f(c as u64)).sum();
            let h = entropy_from_sum(sum, self.occ);
            let nonzero = self.counts.iter().filter(|&&c| c > 0).count() as u128;
            let f_max = self.counts.iter().copied().max().unwrap_or(0);
            let f_min = if nonzero < self.u {
                0
            } else {
                self.counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0)
            };
            let c = f_max - f_min;
            let slot = if c <= 1 { &mut self.best_c01 } else { &mut self.best_c2 };
            *slot = Some(slot.map_or(h, |b: f64| b.max(h)));
            if h > self.best_h + 1e-12 {
                self.best_h = h;
                self.best.clear();
            }
            if (h - self.best_h).abs() <= 1e-12 {
                self.best.push((self.chosen.clone(), c));
            }
        }

        fn rec(&mut self, from: usize, left: usize) {
            if left == 0 {
                self.leaf();
                return;
            }
            for t in from..self.seg_ids.len() {
                self.add(t, 1);
                self.chosen.push(t);
                self.rec(t, left - 1);
                self.chosen.pop();
                self.add(t, -1);
            }
        }
    }

    let mut search = Search {
        seg_ids: &seg_ids,
        counts: vec![0; index.len()],
        chosen: Vec::with_capacity(mu),
        best_h: f64::NEG_INFINITY,
        best: Vec::new(),
        best_c01: None,
        best_c2: None,
        enumerated: 0,
        u,
        occ,
    };
    if m > 0 {
        search.rec(0, mu);
    }
    if search.best.is_empty() {
        return Err(EdoError::Config("no feasible tour under the cost bound".into()));
    }
    let best_c = search.best.iter().map(|(_, c)| *c).min().unwrap_or(0);
    Ok(OracleResult {
        best_h: search.best_h,
        best_c,
        best_populations: search
            .best
            .iter()
            .map(|(idx, _)| idx.iter().map(|&t| tours[t].clone()).collect())
            .collect(),
        enumerated: search.enumerated,
        feasible_tours: m,
        best_h_c01: search.best_c01,
        best_h_c2: search.best_c2,
    })
}

/// Two-column `name value` solution listing every variable of the model for
/// the given tours, e.g. to test ingest or seed a solver.
pub fn solution_for(model: &MipModel, tours: &[Tour]) -> Result<String> {
    if tours.len() != model.mu {
        return Err(EdoError::Argument(format!(
            "model has {} tours, got {}",
            model.mu,
            tours.len()
        )));
    }
    let (n, k) = (model.n(), model.k);
    let mut out = String::new();
    let tab = build_table(tours, k)?;
    for (p, t) in tours.iter().enumerate() {
        let mut pos = vec![0; n];
        let start = t.perm().iter().position(|&v| v == 0).unwrap_or(0);
        let rot = t.rotated(start);
        for (idx, &v) in rot.perm().iter().enumerate() {
            pos[v] = idx;
        }
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let on = rot.at(pos[i] + 1) == j;
                    let _ = writeln!(out, "{} {}", x_name(i, j, p), on as u8);
                }
            }
        }
        for (i, &w) in pos.iter().enumerate() {
            let _ = writeln!(out, "w_{i}_{p} {w}");
        }
        let present: std::collections::HashSet<Segment> = extract_segments(t, k)?.into_iter().collect();
        for s in &model.segments {
            let on = present.contains(s) || present.contains(&s.reversed());
            let _ = writeln!(out, "{} {}", y_name(s.nodes(), p), on as u8);
        }
    }
    let s = summarise(&tab);
    // Optimal f-bounds for fixed tours, taken over the modelled segments.
    let _ = writeln!(out, "fmin {}", s.f_min);
    let _ = writeln!(out, "fmax {}", s.f_max);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::unit_graph;

    fn model(n: usize, mu: usize, k: usize) -> MipModel {
        build_mip(&unit_graph(n).unwrap(), &EaConfig::new(mu, k), None).unwrap()
    }

    #[test]
    fn counts_for_small_model() {
        let m = model(5, 2, 2);
        let c = m.counts();
        assert_eq!(c.y, 40);
        assert_eq!(c.x, 40);
        assert_eq!(c.w, 10);
        assert_eq!(c.degree, 20);
        assert_eq!(c.mtz, 2 * 4 * 3);
        assert_eq!(c.link, 80);
        assert_eq!(c.frequency, 40);
        assert_eq!(c.quality, 0);
    }

    #[test]
    fn guardrails() {
        let g = unit_graph(21).unwrap();
        assert!(matches!(build_mip(&g, &EaConfig::new(2, 2), None), Err(EdoError::Size(_))));
        let g = unit_graph(5).unwrap();
        assert!(matches!(build_mip(&g, &EaConfig::new(25, 2), None), Err(EdoError::Size(_))));
        assert!(matches!(build_mip(&g, &EaConfig::new(2, 4), None), Err(EdoError::Size(_))));
        let mut cfg = EaConfig::new(2, 2);
        cfg.alpha = 0.1;
        assert!(matches!(build_mip(&g, &cfg, None), Err(EdoError::Config(_))));
    }

    #[test]
    fn emission_is_deterministic_and_wrapped() {
        let a = model(6, 3, 3).to_lp_string();
        let b = model(6, 3, 3).to_lp_string();
        assert_eq!(a, b);
        assert!(a.lines().all(|l| l.len() <= LINE_WIDTH + 20));
        assert!(a.contains("\nMinimize\n obj: fmax - fmin\n"));
        assert!(a.ends_with("End\n"));
    }

    #[test]
    fn copies_ingest_to_c_equals_mu() {
        let g = unit_graph(5).unwrap();
        let m = build_mip(&g, &EaConfig::new(3, 2), None).unwrap();
        let t = Tour::new(vec![0, 2, 4, 1, 3], &g).unwrap();
        let sol = solution_for(&m, &vec![t.clone(); 3]).unwrap();
        let ing = ingest_solution(&m, &sol).unwrap();
        assert_eq!(ing.c, 3);
        assert!(ing.y_checked);
        assert!((ing.h - 10f64.ln()).abs() < 1e-12);
        assert_eq!(ing.tours[0].perm(), t.perm());
    }

    #[test]
    fn inconsistent_y_is_rejected() {
        let g = unit_graph(5).unwrap();
        let m = build_mip(&g, &EaConfig::new(1, 2), None).unwrap();
        let t = Tour::identity(&g);
        let sol = solution_for(&m, &[t]).unwrap().replace("y_0_2_0 0", "y_0_2_0 1");
        assert!(matches!(ingest_solution(&m, &sol), Err(EdoError::Consistency(_))));
    }

    #[test]
    fn subtours_are_rejected() {
        let g = unit_graph(6).unwrap();
        let m = build_mip(&g, &EaConfig::new(1, 2), None).unwrap();
        let sol = "x_0_1_0 1\nx_1_2_0 1\nx_2_0_0 1\nx_3_4_0 1\nx_4_5_0 1\nx_5_3_0 1\n";
        assert!(matches!(ingest_solution(&m, sol), Err(EdoError::Validation(_))));
    }

    #[test]
    fn solver_listing_formats() {
        let v = parse_solution("Columns 3\n    0 x_0_1_0   1   0\nx_1_0_0 0\nfmax 2\nObjective 5\n");
        assert_eq!(v.get("x_0_1_0"), Some(&1.0));
        assert_eq!(v.get("x_1_0_0"), Some(&0.0));
        assert_eq!(v.get("fmax"), Some(&2.0));
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn canonical_tour_count() {
        assert_eq!(canonical_tours(&unit_graph(5).unwrap()).len(), 12);
        assert_eq!(canonical_tours(&unit_graph(6).unwrap()).len(), 60);
    }

    #[test]
    fn oracle_single_tour() {
        let g = unit_graph(5).unwrap();
        let r = brute_force_oracle(&g, 1, 2, f64::INFINITY, None).unwrap();
        assert!((r.best_h - 10f64.ln()).abs() < 1e-12);
        assert_eq!(r.best_populations.len(), 12);
        assert_eq!(r.enumerated, 12);
    }

    #[test]
    fn oracle_limit() {
        let g = unit_graph(8).unwrap();
        assert!(matches!(brute_force_oracle(&g, 4, 2, f64::INFINITY, None), Err(EdoError::Size(_))));
    }
}
