//! Complete bipartite graph `K_{n,n}` with 1-based vertex indices on both
//! sides, edge lengths measured as index differences, and planar matchings
//! (edge sets whose top and bottom index sequences are both strictly
//! increasing).

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An edge of `K_{n,n}` joining top vertex `u_i` to bottom vertex `v_j`.
/// Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
}

impl Edge {
    pub fn new(i: usize, j: usize) -> Self {
        Edge { i, j }
    }

    /// Index-difference length `|i - j|`.
    pub fn length(&self) -> usize {
        self.i.abs_diff(self.j)
    }

    fn check_range(&self, n: usize) -> Result<()> {
        if self.i < 1 || self.i > n || self.j < 1 || self.j > n {
            return Err(Error::EdgeOutOfRange { edge: *self, n });
        }
        Ok(())
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// Length of an edge, `|i - j|`.
pub fn edge_length(e: Edge) -> usize {
    e.length()
}

/// Two edges are compatible within a planar matching iff one strictly
/// dominates the other in both coordinates. Everything else (a shared
/// vertex or a crossing) is an intersection.
pub fn edges_compatible(a: Edge, b: Edge) -> bool {
    (a.i < b.i && a.j < b.j) || (b.i < a.i && b.j < a.j)
}

/// A validated planar matching: edges sorted with both index sequences
/// strictly increasing. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarMatching {
    edges: Vec<Edge>,
    n: usize,
}

impl PlanarMatching {
    /// Empty matching of an instance of size `n`.
    pub fn empty(n: usize) -> Self {
        PlanarMatching { edges: Vec::new(), n }
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Largest edge length in the matching; 0 for the empty matching.
    pub fn max_length(&self) -> usize {
        self.edges.iter().map(Edge::length).max().unwrap_or(0)
    }

    /// Total weight of the matching under the given instance weights.
    pub fn weight(&self, inst: &BipartiteInstance) -> Result<f64> {
        let mut total = 0.0;
        for e in &self.edges {
            total += inst.weight(e.i, e.j)?;
        }
        Ok(total)
    }

    /// Witness serialization: one `k,i,j` line per edge, `k` starting at 1.
    pub fn to_witness_csv(&self) -> String {
        let mut out = String::new();
        for (k, e) in self.edges.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", k + 1, e.i, e.j));
        }
        out
    }
}

/// Validates a candidate edge list as a planar matching of `K_{n,n}`,
/// optionally enforcing a cap on edge lengths.
///
/// The input order does not matter: edges are sorted by top index, after
/// which both index sequences must be strictly increasing. Duplicate or
/// shared vertices and crossings are rejected as `NotPlanar`; an edge
/// longer than `length_cap` is rejected as `LengthExceeded`.
pub fn validate_planar(
    n: usize,
    candidate: &[Edge],
    length_cap: Option<usize>,
) -> Result<PlanarMatching> {
    let mut edges = candidate.to_vec();
    for e in &edges {
        e.check_range(n)?;
        if let Some(cap) = length_cap {
            if e.length() > cap {
                return Err(Error::LengthExceeded { edge: *e, length: e.length(), cap });
            }
        }
    }
    edges.sort();
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.i == b.i || a.j == b.j {
            return Err(Error::NotPlanar {
                reason: format!("edges {a} and {b} share a vertex"),
            });
        }
        if a.j > b.j {
            return Err(Error::NotPlanar {
                reason: format!("edges {a} and {b} cross"),
            });
        }
    }
    Ok(PlanarMatching { edges, n })
}

/// Number of edges of `K_{n,n}` of length at most `L`:
/// `n` edges of length zero plus `2(n - l)` of each length `l = 1..L`,
/// which sums to `nL + (n - L)(L + 1)`.
///
/// `L = n` is accepted and clamped to the `L = n - 1` value `n^2`
/// (a cap of `n - 1` or more is no constraint at all); `L > n` is an
/// error.
pub fn count_length_bounded_edges(n: usize, length_cap: usize) -> Result<usize> {
    if length_cap > n {
        return Err(Error::InvalidCap { cap: length_cap, n });
    }
    let l = length_cap.min(n.saturating_sub(1));
    Ok(n * l + (n - l) * (l + 1))
}

const HEADER_PREFIX: &str = "# planarmatch v1";

/// What an n-by-n CSV matrix file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Weights,
    States,
    Probs,
}

impl MatrixKind {
    fn as_str(&self) -> &'static str {
        match self {
            MatrixKind::Weights => "weights",
            MatrixKind::States => "states",
            MatrixKind::Probs => "probs",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "weights" => Ok(MatrixKind::Weights),
            "states" => Ok(MatrixKind::States),
            "probs" => Ok(MatrixKind::Probs),
            other => Err(Error::Format(format!("unknown kind `{other}` in header"))),
        }
    }
}

/// Reads an `n x n` matrix file: a `# planarmatch v1 n=<n> kind=<kind>`
/// header followed by `n` rows of `n` comma-separated values, row `r`
/// holding the entries for top vertex `u_r` (1-based).
pub fn read_matrix_csv<R: Read>(reader: R) -> Result<(usize, MatrixKind, Vec<f64>)> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))??;
    let rest = header
        .strip_prefix(HEADER_PREFIX)
        .ok_or_else(|| Error::Format(format!("missing `{HEADER_PREFIX}` header")))?;
    let mut n = None;
    let mut kind = None;
    for token in rest.split_whitespace() {
        if let Some(v) = token.strip_prefix("n=") {
            n = Some(
                v.parse::<usize>()
                    .map_err(|_| Error::Format(format!("bad n in header: `{v}`")))?,
            );
        } else if let Some(v) = token.strip_prefix("kind=") {
            kind = Some(MatrixKind::parse(v)?);
        } else {
            return Err(Error::Format(format!("unexpected header token `{token}`")));
        }
    }
    let n = n.ok_or_else(|| Error::Format("header missing n=<n>".into()))?;
    let kind = kind.ok_or_else(|| Error::Format("header missing kind=<kind>".into()))?;
    if n == 0 {
        return Err(Error::Format("n must be positive".into()));
    }

    let mut values = Vec::with_capacity(n * n);
    let mut rows = 0usize;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n {
            return Err(Error::Format(format!(
                "row {rows} has {} columns, expected {n}",
                cells.len()
            )));
        }
        for cell in cells {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad value `{}` in row {rows}", cell.trim())))?;
            values.push(v);
        }
    }
    if rows != n {
        return Err(Error::Format(format!("got {rows} rows, expected {n}")));
    }
    Ok((n, kind, values))
}

fn write_matrix_csv<W: Write>(
    writer: &mut W,
    n: usize,
    kind: MatrixKind,
    cell: impl Fn(usize) -> String,
) -> Result<()> {
    writeln!(writer, "{HEADER_PREFIX} n={n} kind={}", kind.as_str())?;
    for r in 0..n {
        let row: Vec<String> = (0..n).map(|c| cell(r * n + c)).collect();
        writeln!(writer, "{}", row.join(","))?;
    }
    Ok(())
}

/// An `n x n` complete bipartite instance carrying per-edge Bernoulli
/// states and/or nonnegative edge weights, both stored row-major with
/// row `i - 1` for top vertex `u_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteInstance {
    n: usize,
    states: Option<Vec<bool>>,
    weights: Option<Vec<f64>>,
}

impl BipartiteInstance {
    pub fn from_states(n: usize, states: Vec<bool>) -> Result<Self> {
        if states.len() != n * n {
            return Err(Error::Format(format!(
                "states array has {} entries, expected {}",
                states.len(),
                n * n
            )));
        }
        Ok(BipartiteInstance { n, states: Some(states), weights: None })
    }

    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::Format(format!(
                "weights array has {} entries, expected {}",
                weights.len(),
                n * n
            )));
        }
        for (idx, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeight { i: idx / n + 1, j: idx % n + 1, value: w });
            }
        }
        Ok(BipartiteInstance { n, states: None, weights: Some(weights) })
    }

    /// Attaches states to a weighted instance (or vice versa).
    pub fn with_states(mut self, states: Vec<bool>) -> Result<Self> {
        if states.len() != self.n * self.n {
            return Err(Error::Format("states array has wrong length".into()));
        }
        self.states = Some(states);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_states(&self) -> bool {
        self.states.is_some()
    }

    pub fn has_weights(&self) -> bool {
        self.weights.is_some()
    }

    fn index(&self, i: usize, j: usize) -> Result<usize> {
        Edge::new(i, j).check_range(self.n)?;
        Ok((i - 1) * self.n + (j - 1))
    }

    /// State of edge `(u_i, v_j)`; `true` means present.
    pub fn state(&self, i: usize, j: usize) -> Result<bool> {
        let idx = self.index(i, j)?;
        self.states
            .as_ref()
            .map(|s| s[idx])
            .ok_or(Error::StatesMissing)
    }

    /// Weight of edge `(u_i, v_j)`.
    pub fn weight(&self, i: usize, j: usize) -> Result<f64> {
        let idx = self.index(i, j)?;
        self.weights
            .as_ref()
            .map(|w| w[idx])
            .ok_or(Error::WeightsMissing)
    }

    pub fn states(&self) -> Result<&[bool]> {
        self.states.as_deref().ok_or(Error::StatesMissing)
    }

    pub fn weights(&self) -> Result<&[f64]> {
        self.weights.as_deref().ok_or(Error::WeightsMissing)
    }

    /// All present edges, ordered by top index then bottom index.
    pub fn present_edges(&self) -> Result<Vec<Edge>> {
        let states = self.states()?;
        let mut edges = Vec::new();
        for i in 1..=self.n {
            for j in 1..=self.n {
                if states[(i - 1) * self.n + (j - 1)] {
                    edges.push(Edge::new(i, j));
                }
            }
        }
        Ok(edges)
    }

    /// Present edges of length at most `length_cap`, same ordering.
    pub fn present_edges_within(&self, length_cap: usize) -> Result<Vec<Edge>> {
        Ok(self
            .present_edges()?
            .into_iter()
            .filter(|e| e.length() <= length_cap)
            .collect())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let (n, kind, values) = read_matrix_csv(reader)?;
        match kind {
            MatrixKind::Weights => Self::from_weights(n, values),
            MatrixKind::States => {
                let states = values
                    .iter()
                    .map(|&v| {
                        if v == 0.0 {
                            Ok(false)
                        } else if v == 1.0 {
                            Ok(true)
                        } else {
                            Err(Error::Format(format!("state entries must be 0 or 1, got {v}")))
                        }
                    })
                    .collect::<Result<Vec<bool>>>()?;
                Self::from_states(n, states)
            }
            MatrixKind::Probs => Err(Error::Format(
                "kind=probs is a probability model file, not an instance".into(),
            )),
        }
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Format(format!("cannot open {}: {e}", path.display())))?;
        Self::read_csv(file)
    }

    /// Writes the weights matrix in the instance CSV format.
    pub fn write_weights_csv<W: Write>(&self, writer: &mut W) -> Result<()> {
        let weights = self.weights()?;
        write_matrix_csv(writer, self.n, MatrixKind::Weights, |idx| weights[idx].to_string())
    }

    /// Writes the states matrix in the instance CSV format.
    pub fn write_states_csv<W: Write>(&self, writer: &mut W) -> Result<()> {
        let states = self.states()?;
        write_matrix_csv(writer, self.n, MatrixKind::States, |idx| {
            if states[idx] { "1".into() } else { "0".into() }
        })
    }
}
