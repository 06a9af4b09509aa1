//! Classic and frequency-biased 2-opt.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{EdoError, Result};
use crate::instance::Instance;
use crate::segments::{window_counts, SegmentCounts};
use crate::tour::{apply_two_opt, Tour, TwoOptMove};

/// Draws allowed for the second biased cut before falling back to uniform
/// (only with [`CutBias::Both`]).
pub const BIAS_RETRIES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutationMode {
    Classic,
    /// Cut sources drawn uniformly among the parent's most frequent segments.
    BiasedAbsolute,
    /// Cut sources drawn with probability proportional to segment frequency.
    BiasedNormalised,
}

/// How many offspring a step produces and with which operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OffspringScheme {
    /// One classic offspring.
    Classic,
    /// One biased offspring (absolute when unconstrained, normalised otherwise).
    Biased,
    /// A biased and a classic offspring from the same parent.
    Dual,
}

impl OffspringScheme {
    pub fn offspring_per_step(self) -> u64 {
        match self {
            OffspringScheme::Dual => 2,
            _ => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OffspringScheme::Classic => "classic",
            OffspringScheme::Biased => "biased",
            OffspringScheme::Dual => "dual",
        }
    }
}

impl fmt::Display for OffspringScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OffspringScheme {
    type Err = EdoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classic" => Ok(OffspringScheme::Classic),
            "biased" => Ok(OffspringScheme::Biased),
            "dual" => Ok(OffspringScheme::Dual),
            other => Err(EdoError::Argument(format!(
                "unknown mutation '{other}' (expected classic, biased or dual)"
            ))),
        }
    }
}

/// The biased variant used for a given constraint setting.
pub fn biased_mode(constrained: bool) -> MutationMode {
    if constrained {
        MutationMode::BiasedNormalised
    } else {
        MutationMode::BiasedAbsolute
    }
}

/// Which cut edges of a biased move come from frequency-weighted segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CutBias {
    /// One biased cut; its partner is uniform among valid positions.
    #[default]
    First,
    /// Both cuts drawn independently, with bounded resampling until they form
    /// a valid move.
    Both,
}

impl CutBias {
    pub fn as_str(self) -> &'static str {
        match self {
            CutBias::First => "first",
            CutBias::Both => "both",
        }
    }
}

impl FromStr for CutBias {
    type Err = EdoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "first" | "one" => Ok(CutBias::First),
            "both" | "two" => Ok(CutBias::Both),
            other => Err(EdoError::Argument(format!(
                "unknown cut bias '{other}' (expected first or both)"
            ))),
        }
    }
}

/// Seeded ChaCha8 stream. `split` derives independent streams from the same
/// seed, so parallel runs never share random numbers.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn split(&self, stream: u64) -> RngState {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream.wrapping_add(1));
        RngState { seed: self.seed, rng }
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 4 {
        return Err(EdoError::Argument(format!("2-opt needs n >= 4, got {n}")));
    }
    Ok(())
}

/// Edge position drawn uniformly among those forming a valid move with `e`.
fn partner_uniform<R: Rng + ?Sized>(e: usize, n: usize, rng: &mut R) -> usize {
    (e + rng.random_range(2..=n - 2)) % n
}

/// Uniform draw over the `n(n-3)/2` valid cut pairs. Each unordered pair is
/// reached from either of its two edges, so the two-stage draw is uniform.
pub fn classic_two_opt<R: Rng + ?Sized>(t: &Tour, rng: &mut R) -> Result<TwoOptMove> {
    let n = t.n();
    check_n(n)?;
    let a = rng.random_range(0..n);
    let b = partner_uniform(a, n, rng);
    TwoOptMove::new(a, b, n)
}

/// Picks one cut edge position of `t` via a frequency-biased segment draw.
/// Every forward window shares its count with its reversal and covers the
/// same edges, so weighting forward windows alone gives the same law as
/// drawing among all `2n` segments.
pub fn sample_cut_edge<R: Rng + ?Sized>(
    t: &Tour,
    weights: &[u32],
    k: usize,
    mode: MutationMode,
    rng: &mut R,
) -> usize {
    let n = t.n();
    let start = match mode {
        MutationMode::Classic => rng.random_range(0..n),
        MutationMode::BiasedAbsolute => {
            let top = weights.iter().copied().max().unwrap_or(0);
            let n_top = weights.iter().filter(|&&w| w == top).count();
            let pick = rng.random_range(0..n_top);
            weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w == top)
                .nth(pick)
                .map(|(s, _)| s)
                .unwrap_or(0)
        }
        MutationMode::BiasedNormalised => {
            let total: u64 = weights.iter().map(|&w| w as u64).sum();
            if total == 0 {
                rng.random_range(0..n)
            } else {
                let mut r = rng.random_range(0..total);
                let mut chosen = n - 1;
                for (s, &w) in weights.iter().enumerate() {
                    if r < w as u64 {
                        chosen = s;
                        break;
                    }
                    r -= w as u64;
                }
                chosen
            }
        }
    };
    let offset = if k > 2 { rng.random_range(0..k - 1) } else { 0 };
    (start + offset) % n
}

/// 2-opt whose first cut edge (or both, see [`CutBias`]) comes from a
/// segment of `t` drawn according to its population frequency in `counts`.
pub fn biased_two_opt<C: SegmentCounts + ?Sized, R: Rng + ?Sized>(
    t: &Tour,
    counts: &C,
    k: usize,
    mode: MutationMode,
    cuts: CutBias,
    rng: &mut R,
) -> Result<TwoOptMove> {
    let n = t.n();
    check_n(n)?;
    if mode == MutationMode::Classic {
        return classic_two_opt(t, rng);
    }
    let weights = window_counts(counts, t, k);
    let first = sample_cut_edge(t, &weights, k, mode, rng);
    if cuts == CutBias::First {
        return TwoOptMove::new(first, partner_uniform(first, n, rng), n);
    }
    for _ in 0..BIAS_RETRIES {
        let second = sample_cut_edge(t, &weights, k, mode, rng);
        if !TwoOptMove::adjacent(first, second, n) {
            return TwoOptMove::new(first, second, n);
        }
    }
    TwoOptMove::new(first, partner_uniform(first, n, rng), n)
}

/// Moves for the biased offspring `p'` and the classic offspring `p''`, drawn
/// in that order.
pub fn dual_moves<C: SegmentCounts + ?Sized, R: Rng + ?Sized>(
    t: &Tour,
    counts: &C,
    k: usize,
    constrained: bool,
    cuts: CutBias,
    rng: &mut R,
) -> Result<(TwoOptMove, TwoOptMove)> {
    let biased = biased_two_opt(t, counts, k, biased_mode(constrained), cuts, rng)?;
    let classic = classic_two_opt(t, rng)?;
    Ok((biased, classic))
}

/// `(p', p'')`: one biased and one classic 2-opt offspring of `t`.
pub fn dual_offspring<C: SegmentCounts + ?Sized, R: Rng + ?Sized>(
    t: &Tour,
    counts: &C,
    k: usize,
    constrained: bool,
    cuts: CutBias,
    inst: &Instance,
    rng: &mut R,
) -> Result<(Tour, Tour)> {
    let (mb, mc) = dual_moves(t, counts, k, constrained, cuts, rng)?;
    Ok((apply_two_opt(t, mb, inst)?, apply_two_opt(t, mc, inst)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::unit_graph;
    use crate::segments::build_table;
    use std::collections::HashMap;

    struct Fixed(HashMap<Vec<usize>, u32>);

    impl SegmentCounts for Fixed {
        fn count(&self, nodes: &[usize]) -> u32 {
            self.0.get(nodes).copied().unwrap_or(0)
        }
    }

    #[test]
    fn classic_is_uniform_over_pairs() {
        let g = unit_graph(8).unwrap();
        let t = Tour::identity(&g);
        let mut rng = RngState::new(11);
        let mut hits: HashMap<TwoOptMove, u64> = HashMap::new();
        let draws = 100_000u64;
        for _ in 0..draws {
            *hits.entry(classic_two_opt(&t, &mut rng).unwrap()).or_default() += 1;
        }
        let cells = 8 * 5 / 2;
        assert_eq!(hits.len(), cells);
        let expect = draws as f64 / cells as f64;
        let chi2: f64 = hits.values().map(|&o| (o as f64 - expect).powi(2) / expect).sum();
        // 19 degrees of freedom; 0.999 quantile is about 43.8.
        assert!(chi2 < 43.8, "chi2 = {chi2}");
    }

    #[test]
    fn n4_classic_reaches_both_moves() {
        let g = unit_graph(4).unwrap();
        let t = Tour::identity(&g);
        let mut rng = RngState::new(3);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            seen.insert(classic_two_opt(&t, &mut rng).unwrap());
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn normalised_bias_matches_enumerated_probability() {
        // Edge {0,1} of the identity tour carries count 5 in both directions,
        // every other segment of t carries 1. Among t's 12 directed segments
        // the two copies of that edge hold 10 of 20 units of mass.
        let g = unit_graph(6).unwrap();
        let t = Tour::identity(&g);
        let mut m = HashMap::new();
        for s in 0..6 {
            let (a, b) = (s, (s + 1) % 6);
            let c = if s == 0 { 5 } else { 1 };
            m.insert(vec![a, b], c);
            m.insert(vec![b, a], c);
        }
        let counts = Fixed(m);
        let weights = window_counts(&counts, &t, 2);
        let mut rng = RngState::new(5);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| sample_cut_edge(&t, &weights, 2, MutationMode::BiasedNormalised, &mut rng) == 0)
            .count() as f64;
        let p = 0.5;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - draws as f64 * p).abs() < 3.0 * sd, "hits = {hits}");
    }

    #[test]
    fn absolute_bias_picks_argmax_edge() {
        let g = unit_graph(6).unwrap();
        let t = Tour::identity(&g);
        let mut m = HashMap::new();
        m.insert(vec![3, 4], 7);
        m.insert(vec![4, 3], 7);
        let counts = Fixed(m);
        let weights = window_counts(&counts, &t, 2);
        let mut rng = RngState::new(9);
        for _ in 0..100 {
            assert_eq!(sample_cut_edge(&t, &weights, 2, MutationMode::BiasedAbsolute, &mut rng), 3);
        }
        // Both cuts cannot be the same edge, so the second falls back.
        for cuts in [CutBias::First, CutBias::Both] {
            let mv = biased_two_opt(&t, &counts, 2, MutationMode::BiasedAbsolute, cuts, &mut rng).unwrap();
            assert!(mv.i() == 3 || mv.j() == 3);
        }
    }

    #[test]
    fn copies_make_bias_uniform() {
        let g = unit_graph(7).unwrap();
        let t = Tour::identity(&g);
        let tab = build_table(&vec![t.clone(); 4], 2).unwrap();
        let weights = tab.window_counts(&t);
        assert!(weights.iter().all(|&w| w == 4));
        let mut rng = RngState::new(1);
        let mut hits = [0u32; 7];
        for _ in 0..70_000 {
            hits[sample_cut_edge(&t, &weights, 2, MutationMode::BiasedAbsolute, &mut rng)] += 1;
        }
        assert!(hits.iter().all(|&h| (9_000..11_000).contains(&h)), "{hits:?}");
    }

    #[test]
    fn dual_offspring_change_two_edges_and_replay() {
        let g = unit_graph(10).unwrap();
        let t = Tour::new(vec![3, 1, 4, 0, 5, 9, 2, 6, 8, 7], &g).unwrap();
        let tab = build_table(&[t.clone(), t.rotated(3)], 3).unwrap();
        let mut a = RngState::new(42);
        let mut b = RngState::new(42);
        for constrained in [false, true] {
            let (p1, p2) = dual_offspring(&t, &tab, 3, constrained, CutBias::Both, &g, &mut a).unwrap();
            let (q1, q2) = dual_offspring(&t, &tab, 3, constrained, CutBias::Both, &g, &mut b).unwrap();
            assert_eq!((&p1, &p2), (&q1, &q2));
            let e = crate::tour::undirected_edge_set(&t);
            for o in [&p1, &p2] {
                let eo = crate::tour::undirected_edge_set(o);
                assert_eq!(e.difference(&eo).count(), 4);
            }
        }
    }

    #[test]
    fn split_streams_differ() {
        let base = RngState::new(7);
        let mut a = base.split(0);
        let mut b = base.split(1);
        assert_ne!(a.next_u64(), b.next_u64());
        let mut c = base.split(0);
        let mut d = base.split(0);
        assert_eq!(c.next_u64(), d.next_u64());
    }

    #[test]
    fn biased_mode_follows_constraint() {
        assert_eq!(biased_mode(false), MutationMode::BiasedAbsolute);
        assert_eq!(biased_mode(true), MutationMode::BiasedNormalised);
        assert_eq!("dual".parse::<OffspringScheme>().unwrap(), OffspringScheme::Dual);
        assert!("triple".parse::<OffspringScheme>().is_err());
    }
}
