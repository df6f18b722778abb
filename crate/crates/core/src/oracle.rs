//! Exact baselines the diffusion engine is checked against.
//!
//! The exponentially discounted process `Z_u(t) = int_0^t e^{-s/2} <u, dB(s)>`
//! has standard Gaussian marginals at infinity with covariance `<u, v>`, so
//! rounding by `sign(Z(infinity))` obeys the classical arcsine correlation
//! identity. The bounded martingale `M_u(t) = 1 - 2 Phi(-e^{t/2} Z_u(t))`
//! solves the same equation as the sticky path with the quantile speed, which
//! gives a pathwise oracle: run both on the same increments and the gap must
//! shrink at the Euler rate.

use crate::diffusion::{BrownianIncrements, DiffusionConfig, Embedding, SignAssignment};
use crate::error::{Error, Result};
use crate::numerics::{cdf_core, RngStream};

/// Discretized paths of the discounted integral, one row per vector.
#[derive(Clone, Debug)]
pub struct ZPath {
    n: usize,
    steps: usize,
    step_h: f64,
    z: Vec<f64>,
}

impl ZPath {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step_h(&self) -> f64 {
        self.step_h
    }

    pub fn time_at(&self, k: usize) -> f64 {
        k as f64 * self.step_h
    }

    /// Path of vector `i`, length `steps + 1`, starting at 0.
    pub fn path(&self, i: usize) -> &[f64] {
        &self.z[i * (self.steps + 1)..(i + 1) * (self.steps + 1)]
    }

    pub fn terminal(&self, i: usize) -> f64 {
        self.path(i)[self.steps]
    }
}

/// Left-endpoint Euler discretization of the discounted integral:
/// `Z(t_{k+1}) = Z(t_k) + e^{-t_k/2} <u, dB_k>`, consuming the increments in
/// exactly the same order as the sticky engine so the two are pathwise
/// comparable.
pub fn simulate_z(
    emb: &Embedding,
    cfg: &DiffusionConfig,
    increments: &BrownianIncrements,
) -> Result<ZPath> {
    cfg.validate()?;
    if increments.d() != emb.d() {
        return Err(Error::Dimension(format!(
            "increments have dimension {}, embedding has {}",
            increments.d(),
            emb.d()
        )));
    }
    if increments.steps() != cfg.steps() || increments.step_h() != cfg.step_h {
        return Err(Error::Dimension(
            "increments were generated for a different time grid".into(),
        ));
    }
    let n = emb.n();
    let d = emb.d();
    let steps = cfg.steps();
    let decay = (-0.5 * cfg.step_h).exp();

    let mut z = vec![0.0f64; n * (steps + 1)];
    let mut current = vec![0.0f64; n];
    let mut discount = 1.0f64;
    for k in 0..steps {
        let db = increments.step(k);
        for i in 0..n {
            let row = emb.row(i);
            let mut drive = 0.0;
            for j in 0..d {
                drive += row[j] * db[j];
            }
            current[i] += discount * drive;
            z[i * (steps + 1) + k + 1] = current[i];
        }
        discount *= decay;
    }
    Ok(ZPath {
        n,
        steps,
        step_h: cfg.step_h,
        z,
    })
}

/// Terminal values `Z(t_max)` only, drawing the driver from `stream` on the
/// fly. Matches `simulate_z` over increments generated from the same stream;
/// used by the Monte Carlo moment checks where storing paths would be waste.
pub fn simulate_z_terminal(
    emb: &Embedding,
    cfg: &DiffusionConfig,
    mut stream: RngStream,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = emb.n();
    let d = emb.d();
    let steps = cfg.steps();
    let sqrt_h = cfg.step_h.sqrt();
    let decay = (-0.5 * cfg.step_h).exp();

    let mut current = vec![0.0f64; n];
    let mut db = vec![0.0f64; d];
    let mut discount = 1.0f64;
    for _ in 0..steps {
        for v in db.iter_mut() {
            *v = stream.next_gaussian() * sqrt_h;
        }
        for (i, cur) in current.iter_mut().enumerate() {
            let row = emb.row(i);
            let mut drive = 0.0;
            for j in 0..d {
                drive += row[j] * db[j];
            }
            *cur += discount * drive;
        }
        discount *= decay;
    }
    Ok(current)
}

/// The closed-form martingale evaluated on a discretized Z path.
#[derive(Clone, Debug)]
pub struct MartingalePath {
    n: usize,
    steps: usize,
    step_h: f64,
    m: Vec<f64>,
}

impl MartingalePath {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time_at(&self, k: usize) -> f64 {
        k as f64 * self.step_h
    }

    pub fn path(&self, i: usize) -> &[f64] {
        &self.m[i * (self.steps + 1)..(i + 1) * (self.steps + 1)]
    }

    pub fn terminal(&self, i: usize) -> f64 {
        self.path(i)[self.steps]
    }
}

/// Pointwise transform `m = 1 - 2 Phi(-e^{t/2} z)`.
///
/// Mathematically `|m| < 1` at every finite time; in doubles the CDF
/// underflows once `e^{t/2} |z|` passes ~38, after which the stored value
/// rounds to ±1.
pub fn closed_form_m(z: &ZPath) -> MartingalePath {
    let rows = z.n;
    let steps = z.steps;
    let growth_per_step = (0.5 * z.step_h).exp();
    let mut m = vec![0.0f64; rows * (steps + 1)];
    for i in 0..rows {
        let zp = z.path(i);
        let mut growth = 1.0f64;
        for k in 0..=steps {
            m[i * (steps + 1) + k] = 1.0 - 2.0 * cdf_core(-growth * zp[k]);
            growth *= growth_per_step;
        }
    }
    MartingalePath {
        n: rows,
        steps,
        step_h: z.step_h,
        m,
    }
}

/// Rounds every vector by the sign of its projection on one shared Gaussian
/// direction; an exact zero projection is assigned +1 (measure-zero event,
/// kept deterministic).
pub fn hyperplane_round(emb: &Embedding, gauss: &[f64]) -> Result<SignAssignment> {
    if gauss.len() != emb.d() {
        return Err(Error::Dimension(format!(
            "direction has dimension {}, embedding has {}",
            gauss.len(),
            emb.d()
        )));
    }
    if gauss.iter().any(|g| !g.is_finite()) {
        return Err(Error::Domain("hyperplane direction must be finite".into()));
    }
    let n = emb.n();
    let sigma: Vec<i8> = (0..n)
        .map(|i| {
            let dot: f64 = emb.row(i).iter().zip(gauss).map(|(a, b)| a * b).sum();
            if dot < 0.0 {
                -1
            } else {
                1
            }
        })
        .collect();
    Ok(SignAssignment {
        sigma,
        unabsorbed_count: 0,
        fallback_used: vec![false; n],
    })
}

/// The arcsine correlation law `(2/pi) asin(rho)`.
pub fn arcsin_law(rho: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!(
            "arcsin_law: rho must lie in [-1, 1], got {rho}"
        )));
    }
    Ok(2.0 * rho.asin() / std::f64::consts::PI)
}

/// Sample mean of sign products with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct PairCorrelation {
    pub estimate: f64,
    pub std_error: f64,
    pub replicas: usize,
}

/// Estimates `E[sigma_u sigma_v]` from per-replica sign pairs. The products
/// live in {-1, +1}, so the standard error is `sqrt((1 - mean^2) / N)`.
pub fn pair_correlation(pairs: &[(i8, i8)]) -> Result<PairCorrelation> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::Domain(
            "pair_correlation needs at least two replicas".into(),
        ));
    }
    let mut sum = 0i64;
    for &(a, b) in pairs {
        sum += (a as i64) * (b as i64);
    }
    let estimate = sum as f64 / n as f64;
    let std_error = ((1.0 - estimate * estimate).max(0.0) / n as f64).sqrt();
    Ok(PairCorrelation {
        estimate,
        std_error,
        replicas: n,
    })
}
