//! Edge-based diversity measures used as baselines: the edge diversity
//! `ED(P) = sum_p sum_q |E(p) \ E(q)|` and the pairwise distance
//! `PD(P) = (1/(n mu)) sum_p min_{q != p} |E(p) \ E(q)|`.
//!
//! `E(p)` holds both orientations of every edge, so all differences are even
//! and twice the number of undirected edges of `p` missing from `q`.

use std::fmt;
use std::str::FromStr;

use crate::entropy::entropy;
use crate::error::{EdoError, Result};
use crate::segments::build_table;
use crate::tour::Tour;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Entropy,
    Ed,
    Pd,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Entropy => "entropy",
            Measure::Ed => "ed",
            Measure::Pd => "pd",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = EdoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "entropy" | "ent" => Ok(Measure::Entropy),
            "ed" => Ok(Measure::Ed),
            "pd" => Ok(Measure::Pd),
            other => Err(EdoError::Argument(format!(
                "unknown measure '{other}' (expected entropy, ed or pd)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityScore {
    pub measure: Measure,
    pub value: f64,
}

impl DiversityScore {
    /// Scores `pop` under `measure`; `k` is only used by the entropy.
    pub fn of(pop: &[Tour], measure: Measure, k: usize) -> Result<Self> {
        let value = match measure {
            Measure::Entropy => {
                let tab = build_table(pop, k)?;
                entropy(&tab, tab.n(), pop.len())?.h
            }
            Measure::Ed => edge_diversity(pop)?,
            Measure::Pd => pairwise_distance(pop)?,
        };
        Ok(DiversityScore { measure, value })
    }
}

/// `|E(p) \ E(q)|` given the neighbour array of `q`.
pub fn edge_distance(p: &Tour, q_nb: &[[usize; 2]]) -> u32 {
    let n = p.n();
    let mut missing = 0;
    for pos in 0..n {
        let (a, b) = (p.at(pos), p.at(pos + 1));
        if q_nb[a][0] != b && q_nb[a][1] != b {
            missing += 1;
        }
    }
    2 * missing
}

fn check_pop(pop: &[Tour]) -> Result<()> {
    if pop.len() < 2 {
        return Err(EdoError::Argument(format!(
            "edge-based measures need at least two tours, got {}",
            pop.len()
        )));
    }
    let n = pop[0].n();
    if pop.iter().any(|t| t.n() != n) {
        return Err(EdoError::Argument("tours of different sizes".into()));
    }
    Ok(())
}

pub fn edge_diversity(pop: &[Tour]) -> Result<f64> {
    check_pop(pop)?;
    Ok(PairwiseMatrix::new(pop)?.ed())
}

pub fn pairwise_distance(pop: &[Tour]) -> Result<f64> {
    check_pop(pop)?;
    Ok(PairwiseMatrix::new(pop)?.pd())
}

/// Two smallest values of `row` and the index of the smallest.
fn top2(row: impl Iterator<Item = (usize, u32)>) -> (u32, usize, u32) {
    let (mut m1, mut a1, mut m2) = (u32::MAX, usize::MAX, u32::MAX);
    for (idx, v) in row {
        if v < m1 {
            m2 = m1;
            m1 = v;
            a1 = idx;
        } else if v < m2 {
            m2 = v;
        }
    }
    (m1, a1, m2)
}

/// Symmetric `mu x mu` matrix of `|E(p) \ E(q)|` kept in step with the
/// population, plus per-row sums (for ED) and the two smallest off-diagonal
/// entries of each row (for PD).
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    n: usize,
    mu: usize,
    nbrs: Vec<Vec<[usize; 2]>>,
    d: Vec<u32>,
    rowsum: Vec<u64>,
    min1: Vec<u32>,
    arg1: Vec<usize>,
    min2: Vec<u32>,
}

impl PairwiseMatrix {
    pub fn new(pop: &[Tour]) -> Result<Self> {
        check_pop(pop)?;
        let mu = pop.len();
        let nbrs: Vec<Vec<[usize; 2]>> = pop.iter().map(Tour::neighbours).collect();
        let mut d = vec![0u32; mu * mu];
        for a in 0..mu {
            for b in (a + 1)..mu {
                let v = edge_distance(&pop[a], &nbrs[b]);
                d[a * mu + b] = v;
                d[b * mu + a] = v;
            }
        }
        let mut m = PairwiseMatrix {
            n: pop[0].n(),
            mu,
            nbrs,
            d,
            rowsum: vec![0; mu],
            min1: vec![0; mu],
            arg1: vec![0; mu],
            min2: vec![0; mu],
        };
        for r in 0..mu {
            m.rowsum[r] = m.row(r).iter().map(|&v| v as u64).sum();
            m.rescan(r);
        }
        Ok(m)
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn get(&self, a: usize, b: usize) -> u32 {
        self.d[a * self.mu + b]
    }

    fn row(&self, r: usize) -> &[u32] {
        &self.d[r * self.mu..(r + 1) * self.mu]
    }

    fn rescan(&mut self, r: usize) {
        let (m1, a1, m2) = top2(self.row(r).iter().copied().enumerate().filter(|&(s, _)| s != r));
        self.min1[r] = m1;
        self.arg1[r] = a1;
        self.min2[r] = m2;
    }

    /// `|E(t) \ E(q)|` for every member `q`.
    pub fn distances_to(&self, t: &Tour) -> Vec<u32> {
        self.nbrs.iter().map(|nb| edge_distance(t, nb)).collect()
    }

    pub fn ed(&self) -> f64 {
        self.rowsum.iter().sum::<u64>() as f64
    }

    pub fn pd(&self) -> f64 {
        self.min1.iter().map(|&v| v as u64).sum::<u64>() as f64 / (self.n * self.mu) as f64
    }

    /// Replaces member `idx` by `t`, whose distances to the current members
    /// are `dist` (the entry for `idx` itself is ignored).
    pub fn replace(&mut self, idx: usize, t: &Tour, dist: &[u32]) {
        let mu = self.mu;
        for r in 0..mu {
            if r == idx {
                continue;
            }
            let old = self.d[r * mu + idx];
            let new = dist[r];
            self.d[r * mu + idx] = new;
            self.d[idx * mu + r] = new;
            self.rowsum[r] = self.rowsum[r] - old as u64 + new as u64;
            if self.arg1[r] == idx || (old <= self.min2[r] && new > old) {
                self.rescan(r);
            } else if new < self.min1[r] {
                self.min2[r] = self.min1[r];
                self.min1[r] = new;
                self.arg1[r] = idx;
            } else if new < self.min2[r] {
                self.min2[r] = new;
            }
        }
        self.rowsum[idx] = (0..mu).filter(|&r| r != idx).map(|r| dist[r] as u64).sum();
        self.nbrs[idx] = t.neighbours();
        self.rescan(idx);
    }

    /// Nearest distance of row `r` ignoring column `skip`.
    fn min_without(&self, r: usize, skip: usize) -> u32 {
        if self.arg1[r] == skip {
            self.min2[r]
        } else {
            self.min1[r]
        }
    }

    /// ED after replacing member `p` by a tour at distances `dist`.
    pub fn ed_if_replaced(&self, p: usize, dist: &[u32]) -> f64 {
        let new_row: u64 = (0..self.mu).filter(|&r| r != p).map(|r| dist[r] as u64).sum();
        self.ed() + 2.0 * (new_row as f64 - self.rowsum[p] as f64)
    }

    /// PD after replacing member `p` by a tour at distances `dist`.
    pub fn pd_if_replaced(&self, p: usize, dist: &[u32]) -> f64 {
        let mut total = 0u64;
        let mut own = u32::MAX;
        for r in 0..self.mu {
            if r == p {
                continue;
            }
            total += self.min_without(r, p).min(dist[r]) as u64;
            own = own.min(dist[r]);
        }
        (total + own as u64) as f64 / (self.n * self.mu) as f64
    }

    /// ED of the `mu + 1` populations obtained by adding a tour at distances
    /// `dist` and discarding one individual: entries `0..mu` discard that
    /// member, entry `mu` discards the newcomer.
    pub fn ed_discard_each(&self, dist: &[u32]) -> Vec<f64> {
        let own: u64 = dist.iter().map(|&v| v as u64).sum();
        let ed_plus = self.ed() + 2.0 * own as f64;
        let mut out: Vec<f64> = (0..self.mu)
            .map(|q| ed_plus - 2.0 * (self.rowsum[q] + dist[q] as u64) as f64)
            .collect();
        out.push(self.ed());
        out
    }

    /// PD counterpart of [`PairwiseMatrix::ed_discard_each`].
    pub fn pd_discard_each(&self, dist: &[u32]) -> Vec<f64> {
        let norm = (self.n * self.mu) as f64;
        let (o1, oarg, o2) = top2(dist.iter().copied().enumerate());
        let mut out = Vec::with_capacity(self.mu + 1);
        for q in 0..self.mu {
            let mut total = if oarg == q { o2 } else { o1 } as u64;
            for r in 0..self.mu {
                if r != q {
                    total += self.min_without(r, q).min(dist[r]) as u64;
                }
            }
            out.push(total as f64 / norm);
        }
        out.push(self.pd());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::unit_graph;
    use crate::tour::{apply_two_opt, undirected_edge_set, TwoOptMove};

    /// Oracle straight from the set definitions.
    fn diff(p: &Tour, q: &Tour) -> usize {
        undirected_edge_set(p).difference(&undirected_edge_set(q)).count()
    }

    fn ed_oracle(pop: &[Tour]) -> f64 {
        pop.iter().flat_map(|p| pop.iter().map(move |q| diff(p, q))).sum::<usize>() as f64
    }

    fn pd_oracle(pop: &[Tour]) -> f64 {
        let n = pop[0].n();
        let s: usize = (0..pop.len())
            .map(|a| (0..pop.len()).filter(|&b| b != a).map(|b| diff(&pop[a], &pop[b])).min().unwrap())
            .sum();
        s as f64 / (n * pop.len()) as f64
    }

    #[test]
    fn one_move_apart() {
        let g = unit_graph(6).unwrap();
        let t = Tour::identity(&g);
        let t2 = apply_two_opt(&t, TwoOptMove::new(0, 3, 6).unwrap(), &g).unwrap();
        assert_eq!(edge_diversity(&[t.clone(), t2.clone()]).unwrap(), 8.0);

        let g = unit_graph(10).unwrap();
        let t = Tour::identity(&g);
        let t2 = apply_two_opt(&t, TwoOptMove::new(1, 6, 10).unwrap(), &g).unwrap();
        assert!((pairwise_distance(&[t, t2]).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn copies_score_zero() {
        let g = unit_graph(7).unwrap();
        let pop = vec![Tour::identity(&g); 4];
        assert_eq!(edge_diversity(&pop).unwrap(), 0.0);
        assert_eq!(pairwise_distance(&pop).unwrap(), 0.0);
    }

    #[test]
    fn single_tour_rejected() {
        let g = unit_graph(5).unwrap();
        assert!(edge_diversity(&[Tour::identity(&g)]).is_err());
        assert!(pairwise_distance(&[Tour::identity(&g)]).is_err());
    }

    #[test]
    fn matches_set_oracle() {
        let g = unit_graph(9).unwrap();
        let pop = vec![
            Tour::new(vec![0, 1, 2, 3, 4, 5, 6, 7, 8], &g).unwrap(),
            Tour::new(vec![0, 2, 4, 6, 8, 1, 3, 5, 7], &g).unwrap(),
            Tour::new(vec![8, 7, 6, 5, 4, 3, 2, 1, 0], &g).unwrap(),
            Tour::new(vec![3, 0, 7, 1, 8, 2, 6, 4, 5], &g).unwrap(),
        ];
        assert_eq!(edge_diversity(&pop).unwrap(), ed_oracle(&pop));
        assert!((pairwise_distance(&pop).unwrap() - pd_oracle(&pop)).abs() < 1e-12);
    }

    #[test]
    fn what_if_queries_match_rebuild() {
        let g = unit_graph(8).unwrap();
        let pop = vec![
            Tour::new(vec![0, 1, 2, 3, 4, 5, 6, 7], &g).unwrap(),
            Tour::new(vec![0, 2, 4, 6, 1, 3, 5, 7], &g).unwrap(),
            Tour::new(vec![0, 1, 2, 3, 4, 5, 7, 6], &g).unwrap(),
        ];
        let m = PairwiseMatrix::new(&pop).unwrap();
        let c = Tour::new(vec![5, 1, 7, 3, 0, 2, 6, 4], &g).unwrap();
        let dist = m.distances_to(&c);
        for p in 0..3 {
            let mut q = pop.clone();
            q[p] = c.clone();
            assert_eq!(m.ed_if_replaced(p, &dist), ed_oracle(&q));
            assert!((m.pd_if_replaced(p, &dist) - pd_oracle(&q)).abs() < 1e-12);
        }
        let ed = m.ed_discard_each(&dist);
        let pd = m.pd_discard_each(&dist);
        for q in 0..=3 {
            let mut all = pop.clone();
            all.push(c.clone());
            all.remove(q);
            assert_eq!(ed[q], ed_oracle(&all), "discard {q}");
            assert!((pd[q] - pd_oracle(&all)).abs() < 1e-12, "discard {q}");
        }
    }
}
