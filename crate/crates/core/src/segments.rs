//! Directed `k`-node segments and the population-wide frequency table.
//!
//! Each tour contributes its `n` forward windows and their `n` reversals, so a
//! population of `mu` tours holds `2 n mu` occurrences. A segment and its
//! reversal are separate keys whose counts always move together.

use std::fmt;
use std::hash::Hash;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{EdoError, Result};
use crate::tour::{Tour, TwoOptMove};

/// A directed sequence of `k` distinct nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment(SmallVec<[usize; 8]>);

impl Segment {
    pub fn new(nodes: &[usize]) -> Self {
        Segment(SmallVec::from_slice(nodes))
    }

    pub fn nodes(&self) -> &[usize] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn reversed(&self) -> Segment {
        Segment(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for Segment {
    /// Nodes joined by `-`, e.g. `3-0-7`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, v) in self.0.iter().enumerate() {
            if idx > 0 {
                f.write_str("-")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Forward window of `t` starting at position `start`.
pub fn window(t: &Tour, start: usize, k: usize) -> Segment {
    Segment((start..start + k).map(|p| t.at(p)).collect())
}

fn window_after(t: &Tour, m: &TwoOptMove, start: usize, k: usize) -> Segment {
    Segment((start..start + k).map(|p| m.node_after(t, p)).collect())
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(EdoError::Argument(format!(
            "segment length k = {k} must satisfy 2 <= k <= n = {n}"
        )));
    }
    Ok(())
}

/// All `2n` segments of a tour: the `n` forward windows in start order,
/// followed by their reversals in the same order.
pub fn extract_segments(t: &Tour, k: usize) -> Result<Vec<Segment>> {
    let n = t.n();
    check_k(n, k)?;
    let fwd: Vec<Segment> = (0..n).map(|s| window(t, s, k)).collect();
    let rev: Vec<Segment> = fwd.iter().map(Segment::reversed).collect();
    Ok(fwd.into_iter().chain(rev).collect())
}

/// `u = n! / (n-k)!`, the number of possible directed segments, saturating.
pub fn segment_space(n: usize, k: usize) -> u128 {
    let mut u: u128 = 1;
    for f in (n + 1 - k.min(n))..=n {
        u = u.saturating_mul(f as u128);
    }
    u
}

/// Occurrence-count lookup for a directed segment.
pub trait SegmentCounts {
    fn count(&self, nodes: &[usize]) -> u32;
}

trait Key: Hash + Eq + Clone + Ord {
    fn encode(nodes: &[usize]) -> Self;
    fn decode(&self, k: usize) -> Segment;
}

impl Key for u128 {
    #[inline]
    fn encode(nodes: &[usize]) -> Self {
        nodes
            .iter()
            .enumerate()
            .fold(0u128, |acc, (idx, &v)| acc | ((v as u128) << (16 * idx)))
    }

    fn decode(&self, k: usize) -> Segment {
        Segment((0..k).map(|idx| ((self >> (16 * idx)) & 0xffff) as usize).collect())
    }
}

impl Key for Box<[u32]> {
    fn encode(nodes: &[usize]) -> Self {
        nodes.iter().map(|&v| v as u32).collect()
    }

    fn decode(&self, _k: usize) -> Segment {
        Segment(self.iter().map(|&v| v as usize).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Store {
    Packed(FxHashMap<u128, u32>),
    Wide(FxHashMap<Box<[u32]>, u32>),
}

macro_rules! with_store {
    ($store:expr, $map:ident => $body:expr) => {
        match $store {
            Store::Packed($map) => $body,
            Store::Wide($map) => $body,
        }
    };
}

/// Exact frequency table of directed segments over a population.
///
/// Keys are packed into a `u128` (16 bits per node) when `k <= 8` and
/// `n <= 65536`; otherwise the node sequence itself is the key. Alongside the
/// counts the table keeps a histogram `hist[c]` of how many segments occur
/// exactly `c` times, which yields `f_max`, `f_min` and the entropy without
/// scanning the map.
#[derive(Debug, Clone)]
pub struct SegmentTable {
    n: usize,
    k: usize,
    store: Store,
    total: u64,
    hist: Vec<u64>,
}

impl PartialEq for SegmentTable {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.k == other.k && self.total == other.total && self.store == other.store
    }
}

fn bump<K: Key>(map: &mut FxHashMap<K, u32>, nodes: &[usize], delta: i64) -> Option<(u32, u32)> {
    let key = K::encode(nodes);
    let old = map.get(&key).copied().unwrap_or(0);
    let new = old as i64 + delta;
    if new < 0 {
        return None;
    }
    let new = new as u32;
    if new == 0 {
        map.remove(&key);
    } else {
        map.insert(key, new);
    }
    Some((old, new))
}

fn sorted_entries<K: Key>(map: &FxHashMap<K, u32>, k: usize) -> Vec<(Segment, u32)> {
    let mut v: Vec<(Segment, u32)> = map.iter().map(|(key, &c)| (key.decode(k), c)).collect();
    v.sort();
    v
}

impl SegmentTable {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        check_k(n, k)?;
        let store = if k <= 8 && n <= 1 << 16 {
            Store::Packed(FxHashMap::default())
        } else {
            Store::Wide(FxHashMap::default())
        };
        Ok(SegmentTable {
            n,
            k,
            store,
            total: 0,
            hist: vec![0],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Total number of occurrences stored (`2 n mu` for a population).
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct segments with a positive count.
    pub fn distinct(&self) -> usize {
        with_store!(&self.store, m => m.len())
    }

    /// `hist[c]` is the number of segments occurring exactly `c` times
    /// (`hist[0]` is unused).
    pub fn histogram(&self) -> &[u64] {
        &self.hist
    }

    pub fn uses_packed_keys(&self) -> bool {
        matches!(self.store, Store::Packed(_))
    }

    fn adjust(&mut self, nodes: &[usize], delta: i64) -> Result<(u32, u32)> {
        let res = with_store!(&mut self.store, m => bump(m, nodes, delta));
        let (old, new) = res.ok_or_else(|| {
            EdoError::Consistency(format!(
                "removing segment {} which is absent from the table",
                Segment::new(nodes)
            ))
        })?;
        if old > 0 {
            self.hist[old as usize] -= 1;
        }
        if new > 0 {
            if self.hist.len() <= new as usize {
                self.hist.resize(new as usize + 1, 0);
            }
            self.hist[new as usize] += 1;
        }
        self.total = (self.total as i64 + delta) as u64;
        Ok((old, new))
    }

    fn check_tour(&self, t: &Tour) -> Result<()> {
        if t.n() != self.n {
            return Err(EdoError::Argument(format!(
                "tour has {} nodes but the table is for n = {}",
                t.n(),
                self.n
            )));
        }
        Ok(())
    }

    /// Adds the `2n` segments of `t`.
    pub fn add_tour(&mut self, t: &Tour) -> Result<()> {
        self.check_tour(t)?;
        let mut buf: SmallVec<[usize; 8]> = SmallVec::with_capacity(self.k);
        for s in 0..self.n {
            buf.clear();
            buf.extend((s..s + self.k).map(|p| t.at(p)));
            self.adjust(&buf, 1)?;
            buf.reverse();
            self.adjust(&buf, 1)?;
        }
        Ok(())
    }

    /// Removes the `2n` segments of `t`; fails if any is absent.
    pub fn remove_tour(&mut self, t: &Tour) -> Result<()> {
        self.check_tour(t)?;
        let mut buf: SmallVec<[usize; 8]> = SmallVec::with_capacity(self.k);
        for s in 0..self.n {
            buf.clear();
            buf.extend((s..s + self.k).map(|p| t.at(p)));
            self.adjust(&buf, -1)?;
            buf.reverse();
            self.adjust(&buf, -1)?;
        }
        Ok(())
    }

    /// Applies a move delta produced by [`move_delta`].
    pub fn apply(&mut self, delta: &SegmentDelta) -> Result<()> {
        for s in &delta.removed {
            self.adjust(s.nodes(), -1)?;
        }
        for s in &delta.added {
            self.adjust(s.nodes(), 1)?;
        }
        Ok(())
    }

    /// Highest count of any segment (0 for an empty table).
    pub fn f_max(&self) -> u32 {
        self.hist.iter().rposition(|&h| h > 0).unwrap_or(0) as u32
    }

    /// `f_min` over all `u` possible segments, so absent segments count as 0.
    pub fn f_min(&self) -> u32 {
        if (self.distinct() as u128) < segment_space(self.n, self.k) {
            return 0;
        }
        self.hist
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, &h)| h > 0)
            .map_or(0, |(c, _)| c as u32)
    }

    /// `sum_s f(s) ln f(s)` over stored segments, evaluated from the histogram.
    pub fn sum_f_ln_f(&self) -> f64 {
        self.hist
            .iter()
            .enumerate()
            .skip(2)
            .filter(|(_, &h)| h > 0)
            .map(|(c, &h)| h as f64 * f_ln_f(c as u64))
            .sum()
    }

    /// Counts of the `n` forward windows of `t` (reverse windows carry the
    /// same counts).
    pub fn window_counts(&self, t: &Tour) -> Vec<u32> {
        window_counts(self, t, self.k)
    }

    /// All stored segments with their counts, sorted by node sequence.
    pub fn entries(&self) -> Vec<(Segment, u32)> {
        with_store!(&self.store, m => sorted_entries(m, self.k))
    }

    /// CSV dump with columns `segment,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("segment,count\n");
        for (s, c) in self.entries() {
            out.push_str(&format!("{s},{c}\n"));
        }
        out
    }
}

impl SegmentCounts for SegmentTable {
    #[inline]
    fn count(&self, nodes: &[usize]) -> u32 {
        match &self.store {
            Store::Packed(m) => m.get(&u128::encode(nodes)).copied().unwrap_or(0),
            Store::Wide(m) => m.get(&<Box<[u32]>>::encode(nodes)).copied().unwrap_or(0),
        }
    }
}

/// Counts of the forward windows of `t` under any count source.
pub fn window_counts<C: SegmentCounts + ?Sized>(counts: &C, t: &Tour, k: usize) -> Vec<u32> {
    let mut buf: SmallVec<[usize; 8]> = SmallVec::with_capacity(k);
    (0..t.n())
        .map(|s| {
            buf.clear();
            buf.extend((s..s + k).map(|p| t.at(p)));
            counts.count(&buf)
        })
        .collect()
}

#[inline]
pub(crate) fn f_ln_f(f: u64) -> f64 {
    if f <= 1 {
        0.0
    } else {
        let x = f as f64;
        x * x.ln()
    }
}

/// Builds the table of a whole population.
pub fn build_table(pop: &[Tour], k: usize) -> Result<SegmentTable> {
    let first = pop
        .first()
        .ok_or_else(|| EdoError::Argument("population must contain at least one tour".into()))?;
    let mut tab = SegmentTable::new(first.n(), k)?;
    for t in pop {
        tab.add_tour(t)?;
    }
    Ok(tab)
}

/// Segments that disappear and appear when a move is applied. The two
/// multisets are disjoint and of equal size.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SegmentDelta {
    pub removed: Vec<Segment>,
    pub added: Vec<Segment>,
}

/// Segment changes caused by applying `m` to `t`, found by diffing only the
/// windows that overlap the two cut edges.
pub fn move_delta(t: &Tour, m: &TwoOptMove, k: usize) -> Result<SegmentDelta> {
    let n = t.n();
    check_k(n, k)?;
    if m.j() >= n || TwoOptMove::adjacent(m.i(), m.j(), n) {
        return Err(EdoError::InvalidMove { i: m.i(), j: m.j(), n });
    }
    let mut starts: SmallVec<[usize; 16]> = SmallVec::new();
    for e in [m.i(), m.j()] {
        for o in 0..k - 1 {
            starts.push((e + n - o) % n);
        }
    }
    starts.sort_unstable();
    starts.dedup();

    let mut removed = Vec::with_capacity(2 * starts.len());
    let mut added = Vec::with_capacity(2 * starts.len());
    for &s in &starts {
        let old = window(t, s, k);
        removed.push(old.reversed());
        removed.push(old);
        let new = window_after(t, m, s, k);
        added.push(new.reversed());
        added.push(new);
    }
    removed.sort();
    added.sort();

    // Multiset difference of two sorted lists.
    let (mut a, mut b) = (0, 0);
    let mut out_removed = Vec::with_capacity(removed.len());
    let mut out_added = Vec::with_capacity(added.len());
    while a < removed.len() && b < added.len() {
        match removed[a].cmp(&added[b]) {
            std::cmp::Ordering::Less => {
                out_removed.push(removed[a].clone());
                a += 1;
            }
            std::cmp::Ordering::Greater => {
                out_added.push(added[b].clone());
                b += 1;
            }
            std::cmp::Ordering::Equal => {
                a += 1;
                b += 1;
            }
        }
    }
    out_removed.extend_from_slice(&removed[a..]);
    out_added.extend_from_slice(&added[b..]);
    Ok(SegmentDelta {
        removed: out_removed,
        added: out_added,
    })
}

/// `f_min`, `f_max` and their gap `C` over all `u` possible segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrequencySummary {
    pub f_min: u32,
    pub f_max: u32,
    pub c: u32,
}

pub fn summarise(tab: &SegmentTable) -> FrequencySummary {
    let f_min = tab.f_min();
    let f_max = tab.f_max();
    FrequencySummary {
        f_min,
        f_max,
        c: f_max - f_min,
    }
}
