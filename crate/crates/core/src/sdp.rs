//! Weighted graphs and the low-rank MAXCUT SDP solver.
//!
//! The relaxation places one unit vector per vertex and maximizes
//! `sum w_ij (1 - <v_i, v_j>) / 2`. The solver works directly on a rank-`r`
//! factorization with Gauss–Seidel sweeps: each update replaces `v_i` by the
//! unit vector opposing its weighted neighborhood sum, which maximizes the
//! local objective exactly, so the objective never decreases.

use crate::diffusion::Embedding;
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use std::path::Path;

/// Undirected graph with nonnegative edge weights. Edges are stored with
/// `i < j` and no duplicates.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(u32, u32, f64)>,
}

impl WeightedGraph {
    /// Builds a graph on vertices `0..n`. Edges may come in either
    /// orientation; self-loops, duplicates, negative or non-finite weights
    /// and out-of-range indices are rejected.
    pub fn new(n: usize, edges: Vec<(u32, u32, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Graph("graph needs at least one vertex".into()));
        }
        let mut normalized: Vec<(u32, u32, f64)> = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::Graph(format!("self-loop at vertex {a}")));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::Graph(format!(
                    "edge ({a}, {b}) out of range for n={n}"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Graph(format!(
                    "edge ({a}, {b}) has invalid weight {w}"
                )));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            normalized.push((i, j, w));
        }
        normalized.sort_by_key(|&(i, j, _)| (i, j));
        for pair in normalized.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::Graph(format!(
                    "duplicate edge ({}, {})",
                    pair[0].0, pair[0].1
                )));
            }
        }
        Ok(WeightedGraph {
            n,
            edges: normalized,
        })
    }

    /// As [`WeightedGraph::new`] with `n` inferred as `max index + 1`.
    pub fn from_edges(edges: Vec<(u32, u32, f64)>) -> Result<Self> {
        let n = edges
            .iter()
            .map(|&(a, b, _)| a.max(b) as usize + 1)
            .max()
            .unwrap_or(0);
        Self::new(n.max(1), edges)
    }

    /// Parses the text edge-list format: one `i j w` triple per line,
    /// 0-based indices, `#` starts a comment, blank lines ignored.
    pub fn from_edge_list_str(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected `i j w`, got {} tokens", toks.len()),
                });
            }
            let parse_idx = |t: &str| -> Result<u32> {
                t.parse::<u32>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad vertex index `{t}`: {e}"),
                })
            };
            let i = parse_idx(toks[0])?;
            let j = parse_idx(toks[1])?;
            let w = toks[2].parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("bad weight `{}`: {e}", toks[2]),
            })?;
            edges.push((i, j, w));
        }
        Self::from_edges(edges)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_edge_list_str(&text)
    }

    /// Cycle graph `C_n` with unit weights.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Graph("cycle needs n >= 3".into()));
        }
        let edges = (0..n)
            .map(|i| (i as u32, ((i + 1) % n) as u32, 1.0))
            .collect();
        Self::new(n, edges)
    }

    /// Complete graph `K_n` with unit weights.
    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i as u32, j as u32, 1.0));
            }
        }
        Self::new(n, edges)
    }

    /// Erdős–Rényi `G(n, p)` with unit weights, drawn from `stream`. A graph
    /// that comes out empty gets the single edge `(0, 1)` so downstream
    /// solvers always have positive total weight.
    pub fn random_gnp(n: usize, p: f64, stream: &mut RngStream) -> Result<Self> {
        if n < 2 {
            return Err(Error::Graph("random graph needs n >= 2".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Graph(format!("edge probability {p} not in [0, 1]")));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if stream.next_uniform_open() < p {
                    edges.push((i as u32, j as u32, 1.0));
                }
            }
        }
        if edges.is_empty() {
            edges.push((0, 1, 1.0));
        }
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|&(_, _, w)| w).sum()
    }

    /// Per-vertex adjacency `(neighbor, weight)` lists.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, w) in &self.edges {
            adj[i as usize].push((j as usize, w));
            adj[j as usize].push((i as usize, w));
        }
        adj
    }
}

/// Stream id reserved for solver initialization, away from rounding replicas.
const INIT_STREAM_ID: u64 = 1 << 62;

/// Solver parameters.
#[derive(Clone, Copy, Debug)]
pub struct SdpConfig {
    /// Factorization rank (the dimension of the output embedding).
    pub rank_r: usize,
    pub max_sweeps: usize,
    /// Stop once a full sweep improves the objective by less than this.
    pub tol: f64,
    pub init_seed: u64,
}

impl SdpConfig {
    /// Defaults for a graph on `n` vertices: `rank = max(2, ceil(sqrt(2n)))`,
    /// `max_sweeps = 10^4`, `tol = 1e-9`.
    pub fn for_vertices(n: usize) -> Self {
        SdpConfig {
            rank_r: default_rank(n),
            max_sweeps: 10_000,
            tol: 1e-9,
            init_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank_r == 0 {
            return Err(Error::Config("rank_r must be >= 1".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Config("max_sweeps must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// The standard low-rank sufficiency heuristic.
pub fn default_rank(n: usize) -> usize {
    ((2.0 * n as f64).sqrt().ceil() as usize).max(2)
}

/// Solver output: the unit-vector embedding plus convergence diagnostics.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub embedding: Embedding,
    pub objective: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Objective after initialization and after each sweep (nondecreasing).
    pub objective_history: Vec<f64>,
}

/// Block-coordinate ascent on the rank-`r` factorization.
///
/// Each vertex update sets `v_i <- -g / |g|` with `g = sum_j w_ij v_j`,
/// skipping vertices whose neighborhood sum vanishes (isolated or perfectly
/// balanced- they keep their current unit vector). Stops when a full sweep
/// improves the objective by less than `tol` or after `max_sweeps`.
pub fn solve_maxcut_sdp(g: &WeightedGraph, cfg: &SdpConfig) -> Result<SdpSolution> {
    cfg.validate()?;
    if !(g.total_weight() > 0.0) {
        return Err(Error::Graph(
            "SDP relaxation needs positive total edge weight".into(),
        ));
    }
    let n = g.n();
    let d = cfg.rank_r;
    let adj = g.adjacency();

    // Random unit rows. Symmetric starts can be stationary, hence Gaussian.
    let mut stream = RngStream::new(cfg.init_seed, INIT_STREAM_ID);
    let mut v = vec![0.0f64; n * d];
    for i in 0..n {
        loop {
            let row = &mut v[i * d..(i + 1) * d];
            for x in row.iter_mut() {
                *x = stream.next_gaussian();
            }
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                for x in row.iter_mut() {
                    *x /= norm;
                }
                break;
            }
        }
    }

    let objective_of = |v: &[f64]| -> f64 {
        g.edges
            .iter()
            .map(|&(i, j, w)| {
                let (i, j) = (i as usize, j as usize);
                let dot: f64 = (0..d).map(|k| v[i * d + k] * v[j * d + k]).sum();
                w * (1.0 - dot) / 2.0
            })
            .sum()
    };

    let mut history = vec![objective_of(&v)];
    let mut grad = vec![0.0f64; d];
    let mut sweeps = 0usize;
    let mut converged = false;

    while sweeps < cfg.max_sweeps {
        for i in 0..n {
            grad.iter_mut().for_each(|x| *x = 0.0);
            for &(j, w) in &adj[i] {
                for k in 0..d {
                    grad[k] += w * v[j * d + k];
                }
            }
            let norm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                for k in 0..d {
                    v[i * d + k] = -grad[k] / norm;
                }
            }
        }
        sweeps += 1;
        let obj = objective_of(&v);
        let prev = *history.last().unwrap();
        history.push(obj);
        if obj - prev < cfg.tol {
            converged = true;
            break;
        }
    }

    let embedding = Embedding::new(n, d, v)?;
    Ok(SdpSolution {
        objective: *history.last().unwrap(),
        embedding,
        sweeps,
        converged,
        objective_history: history,
    })
}

/// The relaxation objective `sum w (1 - <v_i, v_j>) / 2` of an embedding.
pub fn sdp_objective(g: &WeightedGraph, emb: &Embedding) -> Result<f64> {
    if emb.n() != g.n() {
        return Err(Error::Dimension(format!(
            "embedding has {} rows, graph has {} vertices",
            emb.n(),
            g.n()
        )));
    }
    Ok(g.edges
        .iter()
        .map(|&(i, j, w)| w * (1.0 - emb.inner(i as usize, j as usize)) / 2.0)
        .sum())
}
