//! Cross-checks the block-coordinate solver against an independent dense
//! interior-point oracle: damped-Newton path following on
//! `maximize  sum w (1 - X_ij) / 2 + mu log det X`  over `{diag X = 1}`,
//! with the free off-diagonal entries as variables. The barrier parameter
//! runs down to 1e-9, so the oracle value sits within `n * 1e-9` of the true
//! relaxation optimum — far inside the 1e-4 agreement budget.

use stickycut::{brute_force_maxcut, solve_maxcut_sdp, RngStream, SdpConfig, WeightedGraph};

/// Dense symmetric matrix, row-major, for n <= 8.
#[derive(Clone)]
struct Dense {
    n: usize,
    a: Vec<f64>,
}

impl Dense {
    fn eye(n: usize) -> Self {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Dense { n, a }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
        self.a[j * self.n + i] += v;
    }

    /// Lower Cholesky factor; None when not positive definite.
    fn cholesky(&self) -> Option<Vec<f64>> {
        let n = self.n;
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return None;
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Some(l)
    }

    fn log_det(chol: &[f64], n: usize) -> f64 {
        (0..n).map(|i| chol[i * n + i].ln()).sum::<f64>() * 2.0
    }

    /// Inverse from the Cholesky factor, column by column.
    fn inverse_from_cholesky(chol: &[f64], n: usize) -> Vec<f64> {
        let mut inv = vec![0.0f64; n * n];
        let mut col = vec![0.0f64; n];
        for c in 0..n {
            for i in 0..n {
                let mut sum = if i == c { 1.0 } else { 0.0 };
                for k in 0..i {
                    sum -= chol[i * n + k] * col[k];
                }
                col[i] = sum / chol[i * n + i];
            }
            for i in (0..n).rev() {
                let mut sum = col[i];
                for k in i + 1..n {
                    sum -= chol[k * n + i] * inv[k * n + c];
                }
                inv[i * n + c] = sum / chol[i * n + i];
            }
        }
        inv
    }
}

/// Gaussian elimination with partial pivoting; solves `m x = b` in place.
fn solve_linear(mut m: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    let k = b.len();
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if m[r * k + col].abs() > m[piv * k + col].abs() {
                piv = r;
            }
        }
        if piv != col {
            for c in 0..k {
                m.swap(col * k + c, piv * k + c);
            }
            b.swap(col, piv);
        }
        let diag = m[col * k + col];
        assert!(diag.abs() > 1e-300, "singular Newton system");
        for r in col + 1..k {
            let f = m[r * k + col] / diag;
            if f != 0.0 {
                for c in col..k {
                    m[r * k + c] -= f * m[col * k + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for col in (0..k).rev() {
        b[col] /= m[col * k + col];
        for r in 0..col {
            b[r] -= m[r * k + col] * b[col];
        }
    }
    b
}

/// Interior-point value of the MAXCUT relaxation of `g`.
fn dense_interior_value(g: &WeightedGraph) -> f64 {
    let n = g.n();
    assert!(n <= 8, "oracle sized for tiny instances");
    let edges = g.edges();
    // Free variables: off-diagonal pairs (i < j).
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let m = pairs.len();
    // Linear part of the objective gradient in the pair variables.
    let mut lin = vec![0.0f64; m];
    for (u, &(i, j)) in pairs.iter().enumerate() {
        for &(a, b, w) in edges {
            if (a as usize, b as usize) == (i, j) {
                lin[u] -= w / 2.0;
            }
        }
    }
    let objective = |x: &Dense| -> f64 {
        edges
            .iter()
            .map(|&(i, j, w)| w * (1.0 - x.get(i as usize, j as usize)) / 2.0)
            .sum()
    };

    let mut x = Dense::eye(n);
    let mut mu = 1.0f64;
    while mu > 1e-9 {
        // Damped Newton on the concave barrier objective at this mu.
        for _ in 0..60 {
            let chol = x.cholesky().expect("central path iterate stays PD");
            let inv = Dense::inverse_from_cholesky(&chol, n);
            let mut grad = vec![0.0f64; m];
            let mut gmax = 0.0f64;
            for (u, &(i, j)) in pairs.iter().enumerate() {
                grad[u] = lin[u] + 2.0 * mu * inv[i * n + j];
                gmax = gmax.max(grad[u].abs());
            }
            if gmax < mu * 1e-7 {
                break;
            }
            // Barrier Hessian: d^2 (mu log det X) / dX_ij dX_kl over
            // symmetric perturbations = -2 mu (inv_ik inv_jl + inv_il inv_jk).
            let mut hess = vec![0.0f64; m * m];
            for (u, &(i, j)) in pairs.iter().enumerate() {
                for (v, &(k, l)) in pairs.iter().enumerate() {
                    hess[u * m + v] = -2.0
                        * mu
                        * (inv[i * n + k] * inv[j * n + l] + inv[i * n + l] * inv[j * n + k]);
                }
            }
            // Newton direction solves H d = -grad (H negative definite).
            let dir = solve_linear(hess, grad.iter().map(|g| -g).collect());
            let base = objective(&x) + mu * Dense::log_det(&chol, n);
            let mut t = 1.0f64;
            loop {
                let mut trial = x.clone();
                for (u, &(i, j)) in pairs.iter().enumerate() {
                    trial.add_sym(i, j, t * dir[u]);
                }
                if let Some(chol_t) = trial.cholesky() {
                    let val = objective(&trial) + mu * Dense::log_det(&chol_t, n);
                    if val > base - 1e-14 {
                        x = trial;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    break;
                }
            }
            if t < 1e-12 {
                break;
            }
        }
        mu *= 0.2;
    }
    objective(&x)
}

fn solver_value(g: &WeightedGraph, rank: usize) -> f64 {
    let cfg = SdpConfig {
        rank_r: rank,
        tol: 1e-12,
        ..SdpConfig::for_vertices(g.n())
    };
    solve_maxcut_sdp(g, &cfg).unwrap().objective
}

#[test]
fn full_rank_solver_matches_dense_oracle_on_tiny_graphs() {
    let mut stream = RngStream::new(2718, 0);
    let graphs = [
        WeightedGraph::complete(3).unwrap(),
        WeightedGraph::cycle(5).unwrap(),
        WeightedGraph::from_edges(vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0)]).unwrap(),
        WeightedGraph::from_edges(vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap(),
        WeightedGraph::random_gnp(6, 0.6, &mut stream).unwrap(),
        WeightedGraph::random_gnp(6, 0.6, &mut stream).unwrap(),
    ];
    for (idx, g) in graphs.iter().enumerate() {
        let oracle = dense_interior_value(g);
        let solver = solver_value(g, g.n());
        assert!(
            (solver - oracle).abs() < 1e-4,
            "graph {idx}: solver {solver} vs oracle {oracle}"
        );
    }
}

#[test]
fn relaxation_dominates_brute_force() {
    let mut stream = RngStream::new(3141, 0);
    for trial in 0..8 {
        let n = 5 + (trial % 4);
        let g = WeightedGraph::random_gnp(n, 0.5, &mut stream).unwrap();
        let (exact, _) = brute_force_maxcut(&g).unwrap();
        let relaxed = solver_value(&g, stickycut::default_rank(n));
        // Tiny slack: the ascent approaches the relaxation value from below.
        assert!(
            relaxed >= exact - 1e-6,
            "trial {trial}: relaxation {relaxed} below exact {exact}"
        );
    }
}

#[test]
fn c5_value_is_stable_across_ranks_and_seeds() {
    let g = WeightedGraph::cycle(5).unwrap();
    let target = 4.522542485937369;
    for rank in [3, 4, 5] {
        for seed in 0..3 {
            let cfg = SdpConfig {
                rank_r: rank,
                init_seed: seed,
                ..SdpConfig::for_vertices(5)
            };
            let sol = solve_maxcut_sdp(&g, &cfg).unwrap();
            assert!(
                (sol.objective - target).abs() < 1e-4,
                "rank {rank} seed {seed}: {}",
                sol.objective
            );
        }
    }
}
