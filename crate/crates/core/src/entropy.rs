//! High-order entropy of a population, its closed-form extremes and
//! incremental deltas.
//!
//! With `T = 2 n mu` occurrences, `H = -sum_s (f/T) ln(f/T) = ln T - (1/T) sum_s f ln f`.
//! The second form is what the table's count histogram evaluates; it is exact
//! for the stored integers and never accumulates drift across updates.

use crate::error::{EdoError, Result};
use crate::segments::{f_ln_f, segment_space, Segment, SegmentCounts, SegmentTable};

/// Absolute tolerance used to detect entropy ties in selection.
pub const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue {
    pub h: f64,
    pub normalised: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBounds {
    pub h_max: f64,
    pub h_min: f64,
    pub f_min_star: u64,
    pub f_max_star: u64,
    pub c_star: u64,
    /// Number of possible directed segments, saturated at `u128::MAX`.
    pub u: u128,
}

impl EntropyBounds {
    /// `(h - h_min) / (h_max - h_min)`, or 1 when the range is empty.
    pub fn normalise(&self, h: f64) -> f64 {
        let range = self.h_max - self.h_min;
        if range <= TIE_EPS {
            1.0
        } else {
            (h - self.h_min) / range
        }
    }
}

fn occurrences(n: usize, mu: usize) -> u64 {
    2 * n as u64 * mu as u64
}

/// `ln T - S / T` with `S = sum f ln f`.
pub(crate) fn entropy_from_sum(sum_f_ln_f: f64, total: u64) -> f64 {
    let t = total as f64;
    t.ln() - sum_f_ln_f / t
}

/// Entropy of the population described by `tab`.
pub fn entropy(tab: &SegmentTable, n: usize, mu: usize) -> Result<EntropyValue> {
    let total = occurrences(n, mu);
    if tab.total() != total || tab.n() != n {
        return Err(EdoError::Consistency(format!(
            "table holds {} occurrences over n = {}, expected 2*{n}*{mu} = {total}",
            tab.total(),
            tab.n()
        )));
    }
    let h = entropy_from_sum(tab.sum_f_ln_f(), total);
    let bounds = entropy_bounds(n, mu, tab.k())?;
    Ok(EntropyValue {
        h,
        normalised: bounds.normalise(h),
    })
}

/// Closed-form maximum (equalised frequencies) and minimum (`mu` copies of one
/// tour) of the entropy.
pub fn entropy_bounds(n: usize, mu: usize, k: usize) -> Result<EntropyBounds> {
    if k < 2 || k > n {
        return Err(EdoError::Argument(format!(
            "segment length k = {k} must satisfy 2 <= k <= n = {n}"
        )));
    }
    if mu == 0 {
        return Err(EdoError::Argument("population size must be at least 1".into()));
    }
    let total = occurrences(n, mu);
    let u = segment_space(n, k);
    let t = total as f64;
    let h_min = (2.0 * n as f64).ln();

    let (f_min_star, c_star, h_max) = if u > total as u128 {
        // Every occurrence can sit on its own segment.
        (0, 1, t.ln())
    } else {
        let u64_ = u as u64;
        let f_min = total / u64_;
        let c = if total.is_multiple_of(u64_) { 0 } else { 1 };
        let f_max = f_min + c;
        let n_max = (total - f_min * u64_) as f64;
        let n_min = ((f_min + 1) * u64_ - total) as f64;
        let term = |f: u64| {
            if f == 0 {
                0.0
            } else {
                let p = f as f64 / t;
                p * p.ln()
            }
        };
        let h = if c == 0 {
            -(u64_ as f64) * term(f_min)
        } else {
            -n_max * term(f_max) - n_min * term(f_min)
        };
        (f_min, c, h)
    };
    Ok(EntropyBounds {
        h_max,
        h_min,
        f_min_star,
        f_max_star: f_min_star + c_star,
        c_star,
        u,
    })
}

/// `H(after) - H(before)` when `removed` segments lose one occurrence and
/// `added` segments gain one, evaluated from the touched counts only.
pub fn entropy_delta<C: SegmentCounts + ?Sized>(
    tab: &C,
    removed: &[Segment],
    added: &[Segment],
    n: usize,
    mu: usize,
) -> Result<f64> {
    let total = occurrences(n, mu);
    let mut changes: Vec<(&[usize], i64)> = removed
        .iter()
        .map(|s| (s.nodes(), -1))
        .chain(added.iter().map(|s| (s.nodes(), 1)))
        .collect();
    changes.sort_unstable_by(|a, b| a.0.cmp(b.0));

    let mut d_sum = 0.0;
    let mut idx = 0;
    while idx < changes.len() {
        let nodes = changes[idx].0;
        let mut net = 0i64;
        while idx < changes.len() && changes[idx].0 == nodes {
            net += changes[idx].1;
            idx += 1;
        }
        if net == 0 {
            continue;
        }
        let old = tab.count(nodes) as i64;
        let new = old + net;
        if new < 0 {
            return Err(EdoError::Consistency(format!(
                "segment {} has count {old} but {} occurrences are removed",
                Segment::new(nodes),
                -net
            )));
        }
        d_sum += f_ln_f(new as u64) - f_ln_f(old as u64);
    }
    Ok(-d_sum / total as f64)
}

/// `D(a) = a ln a - (a-1) ln(a-1)`, written to stay accurate for large `a`.
fn d_term(a: u64) -> f64 {
    match a {
        0 | 1 => 0.0,
        _ => {
            let x = a as f64;
            x.ln() + (x - 1.0) * (1.0 / (x - 1.0)).ln_1p()
        }
    }
}

/// Entropy gain of moving one occurrence from a segment at `f_max` to one at
/// `f_max - c`, with `total` occurrences overall. The four `h` terms of the
/// transfer reduce to `(D(f) - D(f - c + 1)) / total` because the `ln total`
/// parts cancel.
pub fn transfer_gain(f_max: u64, c: u64, total: u64) -> f64 {
    debug_assert!(c <= f_max);
    (d_term(f_max) - d_term(f_max - c + 1)) / total as f64
}

/// Gain of the unit transfer from an argmax to an argmin of `f_vec`.
pub fn max_min_transfer_gain(f_vec: &[u64], total: u64) -> Result<f64> {
    let f_max = *f_vec
        .iter()
        .max()
        .ok_or_else(|| EdoError::Argument("empty frequency vector".into()))?;
    let f_min = *f_vec.iter().min().unwrap();
    let c = f_max - f_min;
    if c < 2 {
        return Err(EdoError::Argument(format!(
            "transfer needs f_max - f_min >= 2, got {c}"
        )));
    }
    if total == 0 || f_vec.iter().sum::<u64>() > total {
        return Err(EdoError::Argument(format!(
            "total {total} is smaller than the frequency mass"
        )));
    }
    Ok(transfer_gain(f_max, c, total))
}
