//! Rounding engines.
//!
//! Both engines evolve one scalar state per input vector, all vectors driven
//! by a single shared Gaussian source — that coupling is what correlates the
//! output signs and it must never be broken by giving vectors their own
//! randomness.
//!
//! - [`simulate_sticky`]: Euler–Maruyama discretization of the slowed-down
//!   sticky diffusion `dW = phi(W) <u, dB>`, with a small absorption band at
//!   the endpoints that converts the almost-sure limit into a finite-time
//!   output.
//! - [`simulate_discrete`]: the general discrete-time recursion
//!   `X(t+1) = X(t) + scale(history) * driver(<gamma_t, u>)` with exit at the
//!   first time `|X| >= 1` and a uniform-coin fallback, of which the Euler
//!   scheme is one instance.

use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::speed::SpeedFunction;

/// Stream id offset reserved for the per-trajectory fallback coins.
pub const FALLBACK_STREAM_OFFSET: u64 = 1 << 32;

/// Unit vectors to be rounded: `n` rows of dimension `d`.
#[derive(Clone, Debug)]
pub struct Embedding {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl Embedding {
    /// Row-major construction; every row must be a unit vector to 1e-9.
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Dimension("embedding must be nonempty".into()));
        }
        if data.len() != n * d {
            return Err(Error::Dimension(format!(
                "embedding data has {} entries, expected {}",
                data.len(),
                n * d
            )));
        }
        for i in 0..n {
            let row = &data[i * d..(i + 1) * d];
            let norm_sq: f64 = row.iter().map(|x| x * x).sum();
            if !norm_sq.is_finite() || (norm_sq.sqrt() - 1.0).abs() > 1e-9 {
                return Err(Error::Dimension(format!(
                    "row {i} has norm {}, expected 1 +/- 1e-9",
                    norm_sq.sqrt()
                )));
            }
        }
        Ok(Embedding { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("ragged embedding rows".into()));
        }
        Self::new(n, d, rows.concat())
    }

    /// The planar two-vector embedding `(1, 0)` and `(rho, sqrt(1 - rho^2))`
    /// whose inner product is exactly `rho`.
    pub fn pair(rho: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::Domain(format!(
                "pair embedding needs rho in [-1, 1], got {rho}"
            )));
        }
        let ortho = (1.0 - rho * rho).max(0.0).sqrt();
        Self::new(2, 2, vec![1.0, 0.0, rho, ortho])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn inner(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Time discretization and absorption parameters.
#[derive(Clone, Copy, Debug)]
pub struct DiffusionConfig {
    /// Euler step. Must satisfy `0 < step_h <= t_max`.
    pub step_h: f64,
    /// Simulation horizon.
    pub t_max: f64,
    /// Half-width of the absorption band at the endpoints, in `(0, 1)`.
    /// A path with `|W| >= 1 - absorb_eps` is snapped to the nearer sign and
    /// frozen; the induced sign bias is at most `absorb_eps`.
    pub absorb_eps: f64,
    /// Record the full per-vector path (memory: `n * (steps + 1)` values).
    pub record_paths: bool,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        // t_max = 12 leaves a variance deficit of e^-12 ~ 6.1e-6 in the
        // discounted driver, so the limiting law is saturated.
        DiffusionConfig {
            step_h: 1e-3,
            t_max: 12.0,
            absorb_eps: 1e-6,
            record_paths: false,
        }
    }
}

impl DiffusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_h > 0.0 && self.step_h.is_finite()) || !(self.t_max >= self.step_h) {
            return Err(Error::Config(format!(
                "need 0 < step_h <= t_max, got step_h={} t_max={}",
                self.step_h, self.t_max
            )));
        }
        if !(self.absorb_eps > 0.0 && self.absorb_eps < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < absorb_eps < 1, got {}",
                self.absorb_eps
            )));
        }
        if self.steps() > u32::MAX as usize / 2 {
            return Err(Error::Config("too many time steps".into()));
        }
        Ok(())
    }

    /// Number of Euler steps covering `[0, t_max]`. Single source of truth
    /// shared by increments and engines; the epsilon shields `ceil` from
    /// the one-ulp wobble of `t_max / step_h`.
    pub fn steps(&self) -> usize {
        ((self.t_max / self.step_h) - 1e-9).ceil().max(1.0) as usize
    }
}

/// A materialized shared Brownian driver: `steps` increments, each a
/// `d`-vector with independent `N(0, step_h)` entries, all generated from
/// one stream. Remembers its seeds so engines can derive the matching
/// fallback-coin stream.
#[derive(Clone, Debug)]
pub struct BrownianIncrements {
    d: usize,
    step_h: f64,
    steps: usize,
    data: Vec<f64>,
    master_seed: u64,
    stream_id: u64,
}

impl BrownianIncrements {
    pub fn generate(d: usize, cfg: &DiffusionConfig, mut stream: RngStream) -> Result<Self> {
        cfg.validate()?;
        if d == 0 {
            return Err(Error::Dimension(
                "increment dimension must be positive".into(),
            ));
        }
        let steps = cfg.steps();
        let sqrt_h = cfg.step_h.sqrt();
        let mut data = Vec::with_capacity(steps * d);
        for _ in 0..steps * d {
            data.push(stream.next_gaussian() * sqrt_h);
        }
        Ok(BrownianIncrements {
            d,
            step_h: cfg.step_h,
            steps,
            data,
            master_seed: stream.master_seed(),
            stream_id: stream.stream_id(),
        })
    }

    /// Override constructor for hand-built drivers (test fixtures such as the
    /// all-zero driver). `data` is row-major: step index outer, dimension
    /// inner.
    pub fn from_raw(
        d: usize,
        cfg: &DiffusionConfig,
        data: Vec<f64>,
        master_seed: u64,
        stream_id: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        let steps = cfg.steps();
        if d == 0 || data.len() != steps * d {
            return Err(Error::Dimension(format!(
                "raw increments need {} values, got {}",
                steps * d,
                data.len()
            )));
        }
        Ok(BrownianIncrements {
            d,
            step_h: cfg.step_h,
            steps,
            data,
            master_seed,
            stream_id,
        })
    }

    /// The same driver with every increment negated (exact in IEEE floats).
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = -*v;
        }
        out
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step_h(&self) -> f64 {
        self.step_h
    }

    #[inline]
    pub fn step(&self, k: usize) -> &[f64] {
        &self.data[k * self.d..(k + 1) * self.d]
    }

    fn fallback_stream(&self) -> RngStream {
        RngStream::new(
            self.master_seed,
            self.stream_id.wrapping_add(FALLBACK_STREAM_OFFSET),
        )
    }
}

/// Output signs plus how they were decided.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SignAssignment {
    /// One of -1 or +1 per vector.
    pub sigma: Vec<i8>,
    /// Vectors that never absorbed (sticky engine) or never exited (discrete
    /// engine) before the horizon.
    pub unabsorbed_count: usize,
    /// Vectors whose sign came from the fallback coin stream.
    pub fallback_used: Vec<bool>,
}

/// Coupled paths of one batch under a single shared driver.
#[derive(Clone, Debug)]
pub struct TrajectoryBatch {
    n: usize,
    steps: usize,
    step_h: f64,
    /// Flat `n x (steps + 1)` row-major path values, recorded only when
    /// `record_paths` was set. Frozen values are replicated past absorption.
    paths: Option<Vec<f64>>,
    /// Value at the horizon (exactly ±1 once absorbed).
    pub final_w: Vec<f64>,
    /// 1-based step count at which each vector absorbed, if it did.
    pub absorbed_at: Vec<Option<u32>>,
    pub signs: SignAssignment,
}

impl TrajectoryBatch {
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

    /// The time grid `0, h, 2h, ..., steps * h`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time_at(k)).collect()
    }

    /// Recorded path of vector `i` (length `steps + 1`), if paths were kept.
    pub fn path(&self, i: usize) -> Option<&[f64]> {
        self.paths
            .as_ref()
            .map(|p| &p[i * (self.steps + 1)..(i + 1) * (self.steps + 1)])
    }
}

// One Gaussian step of the shared driver, either replayed from a
// materialized buffer or drawn on the fly. Streaming draws exactly the
// values a materialized generation would have placed at the same counter
// positions, so the two modes are byte-identical — streaming just stops
// paying for steps nobody consumes after every path froze.
trait DriverSource {
    fn steps(&self) -> usize;
    fn fill_step(&mut self, k: usize, out: &mut [f64]);
    fn fallback_stream(&self) -> RngStream;
}

struct Replay<'a>(&'a BrownianIncrements);

impl DriverSource for Replay<'_> {
    fn steps(&self) -> usize {
        self.0.steps
    }

    #[inline]
    fn fill_step(&mut self, k: usize, out: &mut [f64]) {
        out.copy_from_slice(self.0.step(k));
    }

    fn fallback_stream(&self) -> RngStream {
        self.0.fallback_stream()
    }
}

struct Streaming {
    stream: RngStream,
    sqrt_h: f64,
    steps: usize,
}

impl DriverSource for Streaming {
    fn steps(&self) -> usize {
        self.steps
    }

    #[inline]
    fn fill_step(&mut self, _k: usize, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.stream.next_gaussian() * self.sqrt_h;
        }
    }

    fn fallback_stream(&self) -> RngStream {
        RngStream::new(
            self.stream.master_seed(),
            self.stream.stream_id().wrapping_add(FALLBACK_STREAM_OFFSET),
        )
    }
}

/// Runs the sticky Euler scheme for every vector of `emb` against a
/// materialized driver. Deterministic given the increments.
///
/// Per step and vector: `W <- clamp(W + phi(W) * <u, dB_k>, -1, 1)`; once
/// `|W| >= 1 - absorb_eps` the value snaps to the nearer sign and freezes.
/// The output sign is the sign of the final value; an exact zero at the
/// horizon (possible only under degenerate drivers) is settled by a fair
/// coin from the fallback stream.
pub fn simulate_sticky(
    emb: &Embedding,
    speed: &SpeedFunction,
    cfg: &DiffusionConfig,
    increments: &BrownianIncrements,
) -> Result<TrajectoryBatch> {
    cfg.validate()?;
    if increments.d != emb.d() {
        return Err(Error::Dimension(format!(
            "increments have dimension {}, embedding has {}",
            increments.d,
            emb.d()
        )));
    }
    if increments.steps != cfg.steps() || increments.step_h != cfg.step_h {
        return Err(Error::Dimension(
            "increments were generated for a different time grid".into(),
        ));
    }
    run_sticky(emb, speed, cfg, &mut Replay(increments))
}

/// As [`simulate_sticky`], but drawing the driver from `stream` on the fly
/// and stopping as soon as every vector has absorbed. Byte-identical to
/// generating [`BrownianIncrements`] from the same stream and replaying them.
pub fn simulate_sticky_streamed(
    emb: &Embedding,
    speed: &SpeedFunction,
    cfg: &DiffusionConfig,
    stream: RngStream,
) -> Result<TrajectoryBatch> {
    cfg.validate()?;
    let mut src = Streaming {
        stream,
        sqrt_h: cfg.step_h.sqrt(),
        steps: cfg.steps(),
    };
    run_sticky(emb, speed, cfg, &mut src)
}

fn run_sticky<S: DriverSource>(
    emb: &Embedding,
    speed: &SpeedFunction,
    cfg: &DiffusionConfig,
    src: &mut S,
) -> Result<TrajectoryBatch> {
    speed.check_simulable()?;
    let n = emb.n();
    let d = emb.d();
    let steps = src.steps();
    let threshold = 1.0 - cfg.absorb_eps;

    let mut w = vec![0.0f64; n];
    let mut absorbed_at: Vec<Option<u32>> = vec![None; n];
    let mut paths = if cfg.record_paths {
        Some(vec![0.0f64; n * (steps + 1)])
    } else {
        None
    };
    let mut db = vec![0.0f64; d];
    let mut active = n;
    let mut k = 0usize;

    while k < steps && active > 0 {
        src.fill_step(k, &mut db);
        for i in 0..n {
            if absorbed_at[i].is_some() {
                continue;
            }
            let row = emb.row(i);
            let mut drive = 0.0;
            for j in 0..d {
                drive += row[j] * db[j];
            }
            let next = (w[i] + speed.eval(w[i]) * drive).clamp(-1.0, 1.0);
            if next.abs() >= threshold {
                w[i] = if next > 0.0 { 1.0 } else { -1.0 };
                absorbed_at[i] = Some((k + 1) as u32);
                active -= 1;
            } else {
                w[i] = next;
            }
        }
        if let Some(p) = paths.as_mut() {
            for i in 0..n {
                p[i * (steps + 1) + k + 1] = w[i];
            }
        }
        k += 1;
    }
    if let Some(p) = paths.as_mut() {
        for i in 0..n {
            for kk in k + 1..=steps {
                p[i * (steps + 1) + kk] = w[i];
            }
        }
    }

    let mut fallback = src.fallback_stream();
    let mut sigma = vec![0i8; n];
    let mut fallback_used = vec![false; n];
    let mut unabsorbed_count = 0usize;
    for i in 0..n {
        if absorbed_at[i].is_none() {
            unabsorbed_count += 1;
        }
        sigma[i] = if w[i] > 0.0 {
            1
        } else if w[i] < 0.0 {
            -1
        } else {
            fallback_used[i] = true;
            fallback = fallback.with_counter(i as u64);
            fallback.next_sign()
        };
    }

    Ok(TrajectoryBatch {
        n,
        steps,
        step_h: cfg.step_h,
        paths,
        final_w: w,
        absorbed_at,
        signs: SignAssignment {
            sigma,
            unabsorbed_count,
            fallback_used,
        },
    })
}

/// The discrete-time rounding recursion.
///
/// Draws `steps` shared standard-Gaussian `d`-vectors and evolves, per
/// vector, `X <- X + step_scale(path_so_far) * driver(<gamma, u>)` from 0.
/// `path_so_far` holds every value computed so far starting with the initial
/// 0; its last element is the current position. A vector exits at the first
/// step where `|X| >= 1`, contributing `sign(X)`; vectors still inside
/// `(-1, 1)` at the horizon get a uniform ±1 coin from the fallback stream.
pub fn simulate_discrete<D, S>(
    emb: &Embedding,
    steps: usize,
    driver: D,
    step_scale: S,
    stream: RngStream,
) -> Result<SignAssignment>
where
    D: Fn(f64) -> f64,
    S: Fn(&[f64]) -> f64,
{
    if steps == 0 {
        return Err(Error::Config("discrete recursion needs steps >= 1".into()));
    }
    let n = emb.n();
    let d = emb.d();
    let fallback_seed = (stream.master_seed(), stream.stream_id());
    let mut stream = stream;

    let mut x = vec![0.0f64; n];
    let mut history: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut h = Vec::with_capacity(steps + 1);
            h.push(0.0);
            h
        })
        .collect();
    let mut exited: Vec<Option<u32>> = vec![None; n];
    let mut gamma = vec![0.0f64; d];
    let mut active = n;

    let mut t = 0usize;
    while t < steps && active > 0 {
        for g in gamma.iter_mut() {
            *g = stream.next_gaussian();
        }
        for i in 0..n {
            if exited[i].is_some() {
                continue;
            }
            let row = emb.row(i);
            let mut dot = 0.0;
            for j in 0..d {
                dot += row[j] * gamma[j];
            }
            let next = x[i] + step_scale(&history[i]) * driver(dot);
            x[i] = next;
            history[i].push(next);
            if next.abs() >= 1.0 {
                exited[i] = Some((t + 1) as u32);
                active -= 1;
            }
        }
        t += 1;
    }

    let mut fallback = RngStream::new(
        fallback_seed.0,
        fallback_seed.1.wrapping_add(FALLBACK_STREAM_OFFSET),
    );
    let mut sigma = vec![0i8; n];
    let mut fallback_used = vec![false; n];
    let mut unabsorbed_count = 0usize;
    for i in 0..n {
        if exited[i].is_some() {
            sigma[i] = if x[i] > 0.0 { 1 } else { -1 };
        } else {
            unabsorbed_count += 1;
            fallback_used[i] = true;
            fallback = fallback.with_counter(i as u64);
            sigma[i] = fallback.next_sign();
        }
    }

    Ok(SignAssignment {
        sigma,
        unabsorbed_count,
        fallback_used,
    })
}

/// Aggregated absorption behavior of one or more batches.
#[derive(Clone, Debug)]
pub struct AbsorptionStats {
    /// Counts of absorption step indices, bucketed by `bin_width` steps.
    pub histogram: Vec<u64>,
    /// Steps per histogram bucket.
    pub bin_width: usize,
    pub steps: usize,
    pub step_h: f64,
    pub total_vectors: u64,
    pub unabsorbed: u64,
    /// Final values of every vector seen (±1 once absorbed).
    pub frozen_values: Vec<f64>,
}

const HISTOGRAM_BINS: usize = 48;

/// Summarizes absorption times and terminal values of a batch.
pub fn absorption_stats(batch: &TrajectoryBatch) -> AbsorptionStats {
    let bin_width = batch
        .steps
        .div_ceil(HISTOGRAM_BINS.min(batch.steps).max(1))
        .max(1);
    let bins = batch.steps.div_ceil(bin_width);
    let mut histogram = vec![0u64; bins.max(1)];
    let mut unabsorbed = 0u64;
    for a in &batch.absorbed_at {
        match a {
            Some(step) => {
                let idx = ((*step as usize - 1) / bin_width).min(histogram.len() - 1);
                histogram[idx] += 1;
            }
            None => unabsorbed += 1,
        }
    }
    AbsorptionStats {
        histogram,
        bin_width,
        steps: batch.steps,
        step_h: batch.step_h,
        total_vectors: batch.n as u64,
        unabsorbed,
        frozen_values: batch.final_w.clone(),
    }
}

impl AbsorptionStats {
    /// Merges another summary over the same time grid (replica aggregation).
    pub fn merge(&mut self, other: &AbsorptionStats) -> Result<()> {
        if self.steps != other.steps
            || self.bin_width != other.bin_width
            || self.step_h != other.step_h
        {
            return Err(Error::Dimension(
                "absorption summaries cover different time grids".into(),
            ));
        }
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self.total_vectors += other.total_vectors;
        self.unabsorbed += other.unabsorbed;
        self.frozen_values.extend_from_slice(&other.frozen_values);
        Ok(())
    }

    pub fn unabsorbed_fraction(&self) -> f64 {
        if self.total_vectors == 0 {
            0.0
        } else {
            self.unabsorbed as f64 / self.total_vectors as f64
        }
    }
}
