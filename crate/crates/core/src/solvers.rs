//! Exact optimizers for the two extremal quantities (the maximum size of a
//! length-constrained planar matching, the minimum weight of a planar
//! matching with an edge-count constraint) plus exhaustive oracles and the
//! two constructive procedures (conflict-graph stable set, segmentation).

use crate::bipartite::{edges_compatible, validate_planar, BipartiteInstance, Edge, PlanarMatching};
use crate::error::{Error, Result};

/// Instances above this size are rejected by the exhaustive oracles.
pub const BRUTE_FORCE_MAX_N: usize = 12;

/// Output of `max_size_planar`.
#[derive(Debug, Clone)]
pub struct MaxSizeResult {
    pub size: usize,
    pub witness: PlanarMatching,
}

/// Output of `min_weight_planar`. `profile[k]` is the minimum weight over
/// planar matchings with exactly `k` edges (`+inf` where infeasible;
/// `profile[0] = 0`).
#[derive(Debug, Clone)]
pub struct MinWeightResult {
    pub weight: f64,
    pub witness: PlanarMatching,
    pub profile: Vec<f64>,
}

/// Maximum size of an `L`-constrained planar matching among the present
/// edges, with a witness.
///
/// Present edges of length at most `length_cap` are sorted by top index
/// ascending and bottom index descending, after which the answer is the
/// longest strictly increasing subsequence of bottom indices. The
/// descending tie order makes two edges on the same top vertex mutually
/// exclusive, so every increasing subsequence is a planar matching.
pub fn max_size_planar(inst: &BipartiteInstance, length_cap: usize) -> Result<MaxSizeResult> {
    let mut edges = inst.present_edges_within(length_cap)?;
    edges.sort_by(|a, b| a.i.cmp(&b.i).then(b.j.cmp(&a.j)));

    // Patience-style LIS on the j sequence, strict, with predecessor links.
    let mut tails: Vec<usize> = Vec::new();
    let mut pred: Vec<usize> = vec![usize::MAX; edges.len()];
    for (idx, e) in edges.iter().enumerate() {
        let pos = tails.partition_point(|&t| edges[t].j < e.j);
        if pos > 0 {
            pred[idx] = tails[pos - 1];
        }
        if pos == tails.len() {
            tails.push(idx);
        } else {
            tails[pos] = idx;
        }
    }

    let mut chain = Vec::with_capacity(tails.len());
    if let Some(&last) = tails.last() {
        let mut at = last;
        loop {
            chain.push(edges[at]);
            if pred[at] == usize::MAX {
                break;
            }
            at = pred[at];
        }
        chain.reverse();
    }
    let witness = validate_planar(inst.n(), &chain, Some(length_cap))
        .expect("reconstructed chain is a length-constrained planar matching");
    Ok(MaxSizeResult { size: witness.size(), witness })
}

/// Minimum weight over planar matchings with exactly `0..=n` edges.
///
/// Grid recurrence over `(top prefix, bottom prefix, edge count)` with the
/// count as the outermost rolling dimension, so memory stays at two
/// `(n+1)^2` layers. Infeasible cells hold `+inf`.
pub fn min_weight_profile(inst: &BipartiteInstance) -> Result<Vec<f64>> {
    Ok(weight_profile_dp(inst.n(), inst.weights()?, false).0)
}

/// Exact minimum weight of a planar matching with at least `tau` edges,
/// skipping all witness bookkeeping. This is the Monte Carlo hot path.
pub fn min_weight_value(inst: &BipartiteInstance, tau: usize) -> Result<f64> {
    let n = inst.n();
    if tau < 1 || tau > n {
        return Err(Error::InvalidTau { tau, max: n });
    }
    let profile = min_weight_profile(inst)?;
    Ok(profile[tau..].iter().copied().fold(f64::INFINITY, f64::min))
}

/// Exact minimum weight of a planar matching with at least `tau` edges,
/// with a witness and the full per-count profile.
pub fn min_weight_planar(inst: &BipartiteInstance, tau: usize) -> Result<MinWeightResult> {
    let n = inst.n();
    if tau < 1 || tau > n {
        return Err(Error::InvalidTau { tau, max: n });
    }
    let weights = inst.weights()?;
    let (profile, dirs) = weight_profile_dp(n, weights, true);
    let dirs = dirs.expect("directions requested");

    let mut best_k = tau;
    for k in tau..=n {
        if profile[k] < profile[best_k] {
            best_k = k;
        }
    }
    let weight = profile[best_k];

    // Walk the stored move directions back from the full grid corner.
    let stride = (n + 1) * (n + 1);
    let mut edges = Vec::with_capacity(best_k);
    let (mut i, mut j, mut k) = (n, n, best_k);
    while k > 0 {
        match dirs[(k - 1) * stride + i * (n + 1) + j] {
            SKIP_TOP => i -= 1,
            SKIP_BOTTOM => j -= 1,
            TAKE_EDGE => {
                edges.push(Edge::new(i, j));
                i -= 1;
                j -= 1;
                k -= 1;
            }
            other => unreachable!("invalid direction code {other} at ({i}, {j}, {k})"),
        }
    }
    edges.reverse();
    let witness = validate_planar(n, &edges, None)
        .expect("DP walk yields a planar matching");
    debug_assert_eq!(witness.size(), best_k);
    Ok(MinWeightResult { weight, witness, profile })
}

const SKIP_TOP: u8 = 1;
const SKIP_BOTTOM: u8 = 2;
const TAKE_EDGE: u8 = 3;

/// Core DP. `cur[i][j]` for layer `k` is the cheapest planar matching with
/// exactly `k` edges inside the prefix grid `[1..=i] x [1..=j]`. Ties prefer
/// skipping the top vertex, then the bottom, for reproducible witnesses.
fn weight_profile_dp(n: usize, weights: &[f64], want_dirs: bool) -> (Vec<f64>, Option<Vec<u8>>) {
    let side = n + 1;
    let stride = side * side;
    let mut prev = vec![0.0_f64; stride];
    let mut cur = vec![f64::INFINITY; stride];
    let mut dirs = if want_dirs { vec![0u8; stride * n] } else { Vec::new() };

    let mut profile = Vec::with_capacity(n + 1);
    profile.push(0.0);
    for k in 1..=n {
        cur[..side].fill(f64::INFINITY);
        for i in 1..=n {
            cur[i * side] = f64::INFINITY;
            for j in 1..=n {
                let skip_top = cur[(i - 1) * side + j];
                let skip_bottom = cur[i * side + (j - 1)];
                let take = prev[(i - 1) * side + (j - 1)] + weights[(i - 1) * n + (j - 1)];
                let mut best = skip_top;
                let mut dir = SKIP_TOP;
                if skip_bottom < best {
                    best = skip_bottom;
                    dir = SKIP_BOTTOM;
                }
                if take < best {
                    best = take;
                    dir = TAKE_EDGE;
                }
                cur[i * side + j] = best;
                if want_dirs {
                    dirs[(k - 1) * stride + i * side + j] = dir;
                }
            }
        }
        profile.push(cur[n * side + n]);
        std::mem::swap(&mut prev, &mut cur);
    }
    (profile, if want_dirs { Some(dirs) } else { None })
}

fn brute_force_guard(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge { n, max: BRUTE_FORCE_MAX_N });
    }
    Ok(())
}

/// Ground-truth maximum size by exhaustive enumeration of all planar
/// matchings formed from present edges of length at most `length_cap`.
pub fn brute_force_max_size(inst: &BipartiteInstance, length_cap: usize) -> Result<usize> {
    brute_force_guard(inst.n())?;
    let edges = inst.present_edges_within(length_cap)?;
    let mut best = 0usize;
    fn extend(edges: &[Edge], start: usize, last: Option<Edge>, depth: usize, best: &mut usize) {
        *best = (*best).max(depth);
        if depth + (edges.len() - start) <= *best {
            return;
        }
        for m in start..edges.len() {
            let e = edges[m];
            if last.is_none_or(|l| l.i < e.i && l.j < e.j) {
                extend(edges, m + 1, Some(e), depth + 1, best);
            }
        }
    }
    extend(&edges, 0, None, 0, &mut best);
    Ok(best)
}

/// Ground-truth minimum-weight profile by exhaustive enumeration of every
/// planar matching of the complete weighted graph.
pub fn brute_force_min_weight_profile(inst: &BipartiteInstance) -> Result<Vec<f64>> {
    let n = inst.n();
    brute_force_guard(n)?;
    let weights = inst.weights()?;
    let mut best = vec![f64::INFINITY; n + 1];
    best[0] = 0.0;
    fn extend(
        n: usize,
        weights: &[f64],
        i0: usize,
        j0: usize,
        count: usize,
        acc: f64,
        best: &mut [f64],
    ) {
        if acc < best[count] {
            best[count] = acc;
        }
        for i in i0..=n {
            for j in j0..=n {
                extend(n, weights, i + 1, j + 1, count + 1, acc + weights[(i - 1) * n + (j - 1)], best);
            }
        }
    }
    extend(n, weights, 1, 1, 0, 0.0, &mut best);
    Ok(best)
}

/// Ground-truth minimum weight with at least `tau` edges.
pub fn brute_force_min_weight(inst: &BipartiteInstance, tau: usize) -> Result<f64> {
    let n = inst.n();
    if tau < 1 || tau > n {
        return Err(Error::InvalidTau { tau, max: n });
    }
    let profile = brute_force_min_weight_profile(inst)?;
    Ok(profile[tau..].iter().copied().fold(f64::INFINITY, f64::min))
}

/// The conflict graph over present edges of length at most `L`: one vertex
/// per edge, adjacent iff the edges intersect (cross or share an endpoint).
/// Stable sets correspond exactly to `L`-constrained planar matchings.
#[derive(Debug, Clone)]
pub struct ConflictGraph {
    n: usize,
    length_cap: usize,
    vertex_edges: Vec<Edge>,
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
}

impl ConflictGraph {
    /// Number of vertices (present edges of bounded length).
    pub fn q(&self) -> usize {
        self.vertex_edges.len()
    }

    /// Number of conflict-graph edges.
    pub fn m(&self) -> usize {
        self.edge_count
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length_cap(&self) -> usize {
        self.length_cap
    }

    pub fn vertex_edges(&self) -> &[Edge] {
        &self.vertex_edges
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v]
    }

    /// Guaranteed stable-set size `Q^2 / (2(2m + Q))`; 0 when empty.
    pub fn stable_set_lower_bound(&self) -> f64 {
        let q = self.q() as f64;
        if q == 0.0 {
            return 0.0;
        }
        q * q / (2.0 * (2.0 * self.edge_count as f64 + q))
    }
}

/// Builds the conflict graph of an instance with states.
pub fn build_conflict_graph(inst: &BipartiteInstance, length_cap: usize) -> Result<ConflictGraph> {
    let vertex_edges = inst.present_edges_within(length_cap)?;
    let q = vertex_edges.len();
    let mut adjacency = vec![Vec::new(); q];
    let mut edge_count = 0usize;
    for a in 0..q {
        for b in (a + 1)..q {
            if !edges_compatible(vertex_edges[a], vertex_edges[b]) {
                adjacency[a].push(b as u32);
                adjacency[b].push(a as u32);
                edge_count += 1;
            }
        }
    }
    Ok(ConflictGraph { n: inst.n(), length_cap, vertex_edges, adjacency, edge_count })
}

/// Degree-greedy stable set: repeatedly take a minimum-degree surviving
/// vertex (smallest index on ties) and delete its closed neighborhood.
/// The returned matching always has size at least `Q^2 / (2(2m + Q))`.
pub fn greedy_stable_set(cg: &ConflictGraph) -> PlanarMatching {
    let q = cg.q();
    let mut alive = vec![true; q];
    let mut degree: Vec<usize> = (0..q).map(|v| cg.adjacency[v].len()).collect();
    let mut remaining = q;
    let mut chosen = Vec::new();

    while remaining > 0 {
        let mut pick = usize::MAX;
        for v in 0..q {
            if alive[v] && (pick == usize::MAX || degree[v] < degree[pick]) {
                pick = v;
            }
        }
        chosen.push(cg.vertex_edges[pick]);
        let mut removed = vec![pick];
        for &u in &cg.adjacency[pick] {
            if alive[u as usize] {
                removed.push(u as usize);
            }
        }
        for &v in &removed {
            alive[v] = false;
            remaining -= 1;
        }
        for &v in &removed {
            for &u in &cg.adjacency[v] {
                if alive[u as usize] {
                    degree[u as usize] -= 1;
                }
            }
        }
    }

    let matching = validate_planar(cg.n, &chosen, Some(cg.length_cap))
        .expect("stable set in the conflict graph is a planar matching");
    debug_assert!(matching.size() as f64 >= cg.stable_set_lower_bound());
    matching
}

/// Splits `1..=n` into `segments` contiguous blocks; the first `n mod
/// segments` blocks get one extra index.
fn segment_ranges(n: usize, segments: usize) -> Vec<(usize, usize)> {
    let base = n / segments;
    let rem = n % segments;
    let mut ranges = Vec::with_capacity(segments);
    let mut start = 1usize;
    for b in 0..segments {
        let len = base + usize::from(b < rem);
        ranges.push((start, start + len - 1));
        start += len;
    }
    ranges
}

/// Segmentation construction: splits the index range into `4 tau` blocks,
/// picks the cheapest edge inside each diagonal block, and keeps it when
/// its weight is at most `threshold`. Succeeds when at least `tau` blocks
/// yield such an edge; the kept edges form a planar matching by block
/// disjointness.
pub fn segmentation_matching(
    inst: &BipartiteInstance,
    tau: usize,
    threshold: f64,
) -> Result<PlanarMatching> {
    let n = inst.n();
    if tau < 1 || 4 * tau > n {
        return Err(Error::InvalidTau { tau, max: n / 4 });
    }
    let weights = inst.weights()?;
    let mut good = Vec::new();
    for (lo, hi) in segment_ranges(n, 4 * tau) {
        let mut best: Option<(f64, Edge)> = None;
        for i in lo..=hi {
            for j in lo..=hi {
                let w = weights[(i - 1) * n + (j - 1)];
                if best.is_none_or(|(bw, _)| w < bw) {
                    best = Some((w, Edge::new(i, j)));
                }
            }
        }
        if let Some((w, e)) = best {
            if w <= threshold {
                good.push(e);
            }
        }
    }
    if good.len() < tau {
        return Err(Error::InsufficientSegments { good: good.len(), needed: tau });
    }
    Ok(validate_planar(n, &good, None).expect("block-diagonal edges are planar"))
}
