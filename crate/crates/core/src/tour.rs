//! Tours, cost evaluation and 2-opt moves.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{EdoError, Result};
use crate::instance::Instance;

/// A Hamiltonian cycle stored as a permutation of `0..n` with its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    perm: Vec<usize>,
    cost: f64,
}

impl Tour {
    pub fn new(perm: Vec<usize>, inst: &Instance) -> Result<Self> {
        validate_permutation(&perm, inst.n())?;
        let cost = cycle_cost(&perm, inst);
        Ok(Tour { perm, cost })
    }

    /// The tour `0, 1, ..., n-1`.
    pub fn identity(inst: &Instance) -> Self {
        let perm: Vec<usize> = (0..inst.n()).collect();
        let cost = cycle_cost(&perm, inst);
        Tour { perm, cost }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Node at cyclic position `pos`.
    #[inline]
    pub fn at(&self, pos: usize) -> usize {
        self.perm[pos % self.perm.len()]
    }

    /// The same cycle traversed backwards.
    pub fn reversed(&self) -> Tour {
        let mut perm = self.perm.clone();
        perm.reverse();
        Tour { perm, cost: self.cost }
    }

    /// The same cycle started at position `shift`.
    pub fn rotated(&self, shift: usize) -> Tour {
        let mut perm = self.perm.clone();
        perm.rotate_left(shift % self.perm.len());
        Tour { perm, cost: self.cost }
    }

    /// For every node, its predecessor and successor in the cycle.
    pub fn neighbours(&self) -> Vec<[usize; 2]> {
        let n = self.perm.len();
        let mut nb = vec![[0usize; 2]; n];
        for pos in 0..n {
            let v = self.perm[pos];
            nb[v] = [self.perm[(pos + n - 1) % n], self.perm[(pos + 1) % n]];
        }
        nb
    }

    /// TSPLIB `.tour` serialisation (1-based node ids).
    pub fn to_tsplib(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME : {name}");
        let _ = writeln!(out, "TYPE : TOUR");
        let _ = writeln!(out, "DIMENSION : {}", self.perm.len());
        let _ = writeln!(out, "TOUR_SECTION");
        for &v in &self.perm {
            let _ = writeln!(out, "{}", v + 1);
        }
        out.push_str("-1\nEOF\n");
        out
    }

    /// Comma-separated node ids on one line (0-based).
    pub fn to_csv_line(&self) -> String {
        self.perm
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses [`Tour::to_csv_line`] output.
    pub fn from_csv_line(line: &str, inst: &Instance) -> Result<Tour> {
        let perm = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| EdoError::parse(1, format!("bad node id '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Tour::new(perm, inst)
    }
}

fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(EdoError::Validation(format!(
            "tour has {} nodes but the instance has {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in perm {
        if v >= n {
            return Err(EdoError::Validation(format!("node {v} outside 0..{n}")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(EdoError::Validation(format!("node {v} visited twice")));
        }
    }
    Ok(())
}

fn cycle_cost(perm: &[usize], inst: &Instance) -> f64 {
    let n = perm.len();
    let mut c = inst.dist(perm[n - 1], perm[0]);
    for w in perm.windows(2) {
        c += inst.dist(w[0], w[1]);
    }
    c
}

/// Closed-cycle cost recomputed from scratch.
pub fn cost(t: &Tour, inst: &Instance) -> f64 {
    cycle_cost(&t.perm, inst)
}

/// Removes edges at positions `i` and `j` (edge at position `p` joins
/// `perm[p]` and `perm[p+1]`, cyclically) and reconnects by reversing the
/// path `perm[i+1..=j]`. Positions are stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwoOptMove {
    i: usize,
    j: usize,
}

impl TwoOptMove {
    pub fn new(a: usize, b: usize, n: usize) -> Result<Self> {
        let (i, j) = if a <= b { (a, b) } else { (b, a) };
        if j >= n || Self::adjacent(i, j, n) {
            return Err(EdoError::InvalidMove { i: a, j: b, n });
        }
        Ok(TwoOptMove { i, j })
    }

    /// Whether edge positions `a` and `b` are equal or share a node.
    #[inline]
    pub fn adjacent(a: usize, b: usize, n: usize) -> bool {
        let d = (b + n - a) % n;
        d == 0 || d == 1 || d == n - 1
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    /// Node at position `pos` of the tour obtained by applying this move to
    /// `t`, without materialising it.
    #[inline]
    pub fn node_after(&self, t: &Tour, pos: usize) -> usize {
        let pos = pos % t.n();
        if pos > self.i && pos <= self.j {
            t.perm[self.i + 1 + self.j - pos]
        } else {
            t.perm[pos]
        }
    }

    /// The four endpoints `(a, b, c, d)` of the removed edges `(a,b)`, `(c,d)`.
    pub fn endpoints(&self, t: &Tour) -> (usize, usize, usize, usize) {
        (t.at(self.i), t.at(self.i + 1), t.at(self.j), t.at(self.j + 1))
    }

    /// Cost change of applying the move.
    pub fn cost_delta(&self, t: &Tour, inst: &Instance) -> f64 {
        let (a, b, c, d) = self.endpoints(t);
        inst.dist(a, c) + inst.dist(b, d) - inst.dist(a, b) - inst.dist(c, d)
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.j >= n || Self::adjacent(self.i, self.j, n) {
            return Err(EdoError::InvalidMove { i: self.i, j: self.j, n });
        }
        Ok(())
    }
}

/// Applies a 2-opt move, updating the cost incrementally.
pub fn apply_two_opt(t: &Tour, m: TwoOptMove, inst: &Instance) -> Result<Tour> {
    m.check(t.n())?;
    let cost = t.cost + m.cost_delta(t, inst);
    let mut perm = t.perm.clone();
    perm[m.i + 1..=m.j].reverse();
    Ok(Tour { perm, cost })
}

/// `E(p)`: both orientations of every cycle edge (`2n` directed edges).
pub fn undirected_edge_set(t: &Tour) -> HashSet<(usize, usize)> {
    let n = t.n();
    let mut set = HashSet::with_capacity(2 * n);
    for pos in 0..n {
        let (a, b) = (t.perm[pos], t.perm[(pos + 1) % n]);
        set.insert((a, b));
        set.insert((b, a));
    }
    set
}
