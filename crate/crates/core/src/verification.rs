//! Checks tying the closed-form bounds, the transfer lemmas and the EA to
//! published values and to exhaustive enumeration.

use std::fmt;

use rand::Rng;

use crate::ea::{run, EaConfig, HMAX_EPS};
use crate::entropy::{entropy_bounds, max_min_transfer_gain, transfer_gain};
use crate::error::{EdoError, Result};
use crate::instance::unit_graph;
use crate::mip::brute_force_oracle;

/// Allowed gap between a computed bound and a published (rounded) one.
pub const GOLDEN_TOL: f64 = 0.005;
/// Frequency and gain used for the vanishing-gain check.
pub const LARGE_F: u64 = 1_000_000;
pub const VANISHING_GAIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenCase {
    pub n: usize,
    pub mu: usize,
    pub k: usize,
    pub bound: Bound,
    pub expected: f64,
    pub source: &'static str,
}

const fn max(n: usize, mu: usize, k: usize, expected: f64, source: &'static str) -> GoldenCase {
    GoldenCase { n, mu, k, bound: Bound::Max, expected, source }
}

const fn min(n: usize, expected: f64, source: &'static str) -> GoldenCase {
    // H_min does not depend on mu or k.
    GoldenCase { n, mu: 1, k: 2, bound: Bound::Min, expected, source }
}

const T1: &str = "small-instance table";
const T2: &str = "unit-graph range";
const T3: &str = "eil instances";

/// Published bound values.
pub const GOLDEN: &[GoldenCase] = &[
    max(5, 6, 2, 3.00, T1),
    max(5, 6, 3, 4.09, T1),
    max(5, 12, 2, 3.00, T1),
    max(5, 12, 3, 4.09, T1),
    max(5, 24, 2, 3.00, T1),
    max(5, 24, 3, 4.09, T1),
    max(10, 6, 2, 4.44, T1),
    max(10, 6, 3, 4.79, T1),
    max(10, 12, 2, 4.48, T1),
    max(10, 12, 3, 5.48, T1),
    max(10, 24, 2, 4.50, T1),
    max(10, 24, 3, 6.17, T1),
    max(15, 6, 2, 5.19, T1),
    max(15, 6, 3, 5.19, T1),
    max(15, 12, 2, 5.31, T1),
    max(15, 12, 3, 5.89, T1),
    max(15, 24, 2, 5.34, T1),
    max(15, 24, 3, 6.58, T1),
    max(20, 6, 2, 5.48, T1),
    max(20, 6, 3, 5.48, T1),
    max(20, 12, 2, 5.88, T1),
    max(20, 12, 3, 6.17, T1),
    max(20, 24, 2, 5.92, T1),
    max(20, 24, 3, 6.87, T1),
    min(50, 4.6052, T2),
    min(100, 5.2983, T2),
    max(50, 12, 2, 7.0901, T2),
    max(50, 12, 3, 7.0901, T2),
    max(50, 12, 4, 7.0901, T2),
    max(50, 20, 2, 7.6006, T2),
    max(50, 20, 3, 7.6006, T2),
    max(50, 20, 4, 7.6006, T2),
    max(50, 50, 2, 7.7997, T2),
    max(50, 50, 3, 8.5172, T2),
    max(50, 50, 4, 8.5172, T2),
    max(50, 100, 2, 7.8017, T2),
    max(50, 100, 3, 9.2103, T2),
    max(50, 100, 4, 9.2103, T2),
    max(50, 500, 2, 7.8036, T2),
    max(50, 500, 3, 10.8198, T2),
    max(50, 500, 4, 10.8198, T2),
    max(50, 1000, 2, 7.8038, T2),
    max(50, 1000, 3, 11.5129, T2),
    max(50, 1000, 4, 11.5129, T2),
    max(100, 12, 2, 7.7832, T2),
    max(100, 12, 3, 7.7832, T2),
    max(100, 12, 4, 7.7832, T2),
    max(100, 20, 2, 8.2940, T2),
    max(100, 20, 3, 8.2940, T2),
    max(100, 20, 4, 8.2940, T2),
    max(100, 50, 2, 9.1965, T2),
    max(100, 50, 3, 9.2103, T2),
    max(100, 50, 4, 9.2103, T2),
    max(100, 100, 2, 9.1982, T2),
    max(100, 100, 3, 9.9035, T2),
    max(100, 100, 4, 9.9035, T2),
    max(100, 500, 2, 9.1999, T2),
    max(100, 500, 3, 11.5129, T2),
    max(100, 500, 4, 11.5129, T2),
    max(100, 1000, 2, 9.2001, T2),
    max(100, 1000, 3, 12.2061, T2),
    max(100, 1000, 4, 12.2061, T2),
    min(51, 4.6250, T3),
    min(76, 5.0239, T3),
    min(101, 5.3083, T3),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckResult {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        let bad = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), bad)
    }
}

pub fn check_golden_bounds() -> Result<Report> {
    let mut rep = Report::default();
    for g in GOLDEN {
        let b = entropy_bounds(g.n, g.mu, g.k)?;
        let (label, got) = match g.bound {
            Bound::Max => ("H_max", b.h_max),
            Bound::Min => ("H_min", b.h_min),
        };
        let name = match g.bound {
            Bound::Max => format!("{label}(n={}, mu={}, k={})", g.n, g.mu, g.k),
            Bound::Min => format!("{label}(n={})", g.n),
        };
        rep.push(
            name,
            (got - g.expected).abs() <= GOLDEN_TOL,
            format!("computed {got:.4}, published {} ({})", g.expected, g.source),
        );
    }
    Ok(rep)
}

/// Sum of the four `f ln f` changes of a unit transfer, computed directly.
fn direct_gain(f_max: u64, f_min: u64, total: u64) -> f64 {
    let fl = |f: u64| if f == 0 { 0.0 } else { f as f64 * (f as f64).ln() };
    let before = fl(f_max) + fl(f_min);
    let after = fl(f_max - 1) + fl(f_min + 1);
    (before - after) / total as f64
}

/// Random frequency vectors with `f_max - f_min >= 2`: the transfer gain is
/// positive, shrinks as the frequencies grow, and vanishes at large `f`.
pub fn check_lemmas<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> Result<Report> {
    if trials == 0 {
        return Err(EdoError::Argument("trials must be at least 1".into()));
    }
    let mut rep = Report::default();
    let (mut bad1, mut bad2) = (Vec::new(), Vec::new());
    for _ in 0..trials {
        let len = rng.random_range(2..=8);
        let mut f: Vec<u64> = (0..len).map(|_| rng.random_range(0..=10_000)).collect();
        let (lo, hi) = (*f.iter().min().unwrap(), *f.iter().max().unwrap());
        if hi - lo < 2 {
            let at = f.iter().position(|&v| v == hi).unwrap();
            f[at] = lo + 2 + rng.random_range(0..100);
        }
        let mass: u64 = f.iter().sum();
        let total = mass + rng.random_range(0..=mass);
        let g = max_min_transfer_gain(&f, total)?;
        let (lo, hi) = (*f.iter().min().unwrap(), *f.iter().max().unwrap());
        let direct = direct_gain(hi, lo, total);
        if !(g > 0.0) || (g - direct).abs() > 1e-9 * direct.abs().max(1e-12) + 1e-15 {
            bad1.push(format!("{f:?} total {total}: gain {g:e}, direct {direct:e}"));
        }
        let c = hi - lo;
        let total2 = total + 1;
        if !(transfer_gain(hi + 1, c, total2) < transfer_gain(hi, c, total2)) {
            bad2.push(format!("f_max {hi}, C {c}"));
        }
    }
    rep.push(
        "positive transfer gain",
        bad1.is_empty(),
        match bad1.first() {
            None => format!("{trials} vectors, no counterexample"),
            Some(e) => format!("{} counterexamples, first {e}", bad1.len()),
        },
    );
    rep.push(
        "gain decreasing in f",
        bad2.is_empty(),
        match bad2.first() {
            None => format!("{trials} vectors, no counterexample"),
            Some(e) => format!("{} counterexamples, first {e}", bad2.len()),
        },
    );
    let g3 = transfer_gain(LARGE_F, 2, 8 * LARGE_F);
    rep.push(
        "gain vanishes for large f",
        g3 < VANISHING_GAIN,
        format!("gain {g3:e} at f = {LARGE_F}, C = 2"),
    );
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCase {
    pub n: usize,
    pub mu: usize,
    pub k: usize,
}

pub const ORACLE_CASES: &[OracleCase] = &[
    OracleCase { n: 5, mu: 1, k: 2 },
    OracleCase { n: 5, mu: 2, k: 2 },
    OracleCase { n: 6, mu: 2, k: 2 },
    OracleCase { n: 6, mu: 2, k: 3 },
];

/// Unconstrained unit-graph cases: the EA's final entropy must equal the
/// exhaustive optimum, which may not exceed the closed-form maximum.
pub fn check_oracle_agreement(cases: &[OracleCase]) -> Result<Report> {
    let mut rep = Report::default();
    for c in cases {
        let g = unit_graph(c.n)?;
        let oracle = brute_force_oracle(&g, c.mu, c.k, f64::INFINITY, None)?;
        let b = entropy_bounds(c.n, c.mu, c.k)?;
        let mut cfg = EaConfig::new(c.mu, c.k);
        cfg.seed = 1;
        let rec = run(&g, None, &cfg)?;
        let ea_h = rec.final_h;
        let agree = (ea_h - oracle.best_h).abs() <= HMAX_EPS;
        let bounded = oracle.best_h <= b.h_max + HMAX_EPS;
        let gap = if b.h_max - oracle.best_h > HMAX_EPS {
            format!(", closed-form maximum {:.9} not attainable", b.h_max)
        } else {
            String::new()
        };
        rep.push(
            format!("oracle(n={}, mu={}, k={})", c.n, c.mu, c.k),
            agree && bounded,
            format!("EA {ea_h:.9}, oracle {:.9}, H_max {:.9}{gap}", oracle.best_h, b.h_max),
        );
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn golden_table_passes() {
        let rep = check_golden_bounds().unwrap();
        assert!(rep.passed(), "{rep}");
        assert_eq!(rep.checks.len(), GOLDEN.len());
    }

    #[test]
    fn lemma_checks_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rep = check_lemmas(500, &mut rng).unwrap();
        assert!(rep.passed(), "{rep}");
        assert!(check_lemmas(0, &mut rng).is_err());
    }

    #[test]
    fn small_vectors() {
        assert!(max_min_transfer_gain(&[1, 3], 8).unwrap() > 0.0);
        assert!(max_min_transfer_gain(&[10, 30], 80).unwrap() > 0.0);
        assert!(max_min_transfer_gain(&[1, 2], 8).is_err());
    }
}
