//! End-to-end MAXCUT workflow: solve the relaxation, round it with a chosen
//! scheme, and measure everything against the exact oracles — the brute-force
//! optimum on small instances and the closed-form expected cut implied by the
//! arcsine law.

use crate::diffusion::{simulate_sticky_streamed, DiffusionConfig, Embedding, SignAssignment};
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::oracle::{arcsin_law, hyperplane_round, pair_correlation};
use crate::sdp::{sdp_objective, solve_maxcut_sdp, SdpConfig, WeightedGraph};
use crate::speed::SpeedFunction;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Exhaustive search refuses instances larger than this.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// `run_pipeline` computes the exact optimum automatically up to this size.
const BRUTE_FORCE_AUTO_LIMIT: usize = 20;

/// Tolerance floor for the identity check: Monte Carlo noise at the pinned
/// replica counts stays below it, discretization bias must too.
pub const IDENTITY_TOLERANCE_FLOOR: f64 = 0.01;

/// How the SDP embedding gets rounded to signs.
#[derive(Clone, Debug, PartialEq)]
pub enum RoundingScheme {
    /// Sticky diffusion with the Gaussian-quantile speed.
    Xi,
    /// Sticky diffusion with the power speed `(1 - s^2)^alpha`.
    Power(f64),
    /// Classical one-shot hyperplane rounding.
    Hyperplane,
}

impl RoundingScheme {
    /// Parses `xi`, `hyperplane`, or `power:<alpha>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "xi" => Ok(RoundingScheme::Xi),
            "hyperplane" => Ok(RoundingScheme::Hyperplane),
            other => {
                if let Some(alpha) = other.strip_prefix("power:") {
                    let alpha: f64 = alpha
                        .parse()
                        .map_err(|e| Error::Config(format!("bad power exponent `{alpha}`: {e}")))?;
                    if !(alpha > 0.0) || !alpha.is_finite() {
                        return Err(Error::Config(format!(
                            "power exponent must be positive and finite, got {alpha}"
                        )));
                    }
                    Ok(RoundingScheme::Power(alpha))
                } else {
                    Err(Error::Config(format!(
                        "unknown scheme `{other}` (expected xi, power:<alpha> or hyperplane)"
                    )))
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            RoundingScheme::Xi => "xi".into(),
            RoundingScheme::Power(a) => format!("power:{a}"),
            RoundingScheme::Hyperplane => "hyperplane".into(),
        }
    }

    /// The diffusion speed behind the scheme, if it is a diffusion scheme.
    pub fn speed(&self) -> Option<SpeedFunction> {
        match self {
            RoundingScheme::Xi => Some(SpeedFunction::Xi),
            RoundingScheme::Power(a) => Some(SpeedFunction::Power(*a)),
            RoundingScheme::Hyperplane => None,
        }
    }
}

/// Total weight of edges cut by a sign assignment.
pub fn cut_value(g: &WeightedGraph, signs: &SignAssignment) -> Result<f64> {
    if signs.sigma.len() != g.n() {
        return Err(Error::Dimension(format!(
            "signs cover {} vertices, graph has {}",
            signs.sigma.len(),
            g.n()
        )));
    }
    if signs.sigma.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::Domain("signs must be exactly -1 or +1".into()));
    }
    Ok(g.edges()
        .iter()
        .map(|&(i, j, w)| {
            let (si, sj) = (signs.sigma[i as usize], signs.sigma[j as usize]);
            w * (1.0 - (si as f64) * (sj as f64)) / 2.0
        })
        .sum())
}

/// Exhaustive maximum cut over all `2^(n-1)` sign patterns with the first
/// vertex fixed to +1. Ties resolve to the pattern whose bitmask
/// (bit `i - 1` set when vertex `i` is on the minus side) comes first, i.e.
/// the first maximum found in mask order.
pub fn brute_force_maxcut(g: &WeightedGraph) -> Result<(f64, SignAssignment)> {
    let n = g.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::Unsupported(format!(
            "brute force capped at n = {BRUTE_FORCE_LIMIT}, graph has {n} vertices"
        )));
    }
    let patterns: u64 = 1 << (n - 1);
    let edges = g.edges();
    let mut best_value = f64::NEG_INFINITY;
    let mut best_mask = 0u64;
    for mask in 0..patterns {
        let mut cut = 0.0;
        for &(i, j, w) in edges {
            if minus_side(mask, i) != minus_side(mask, j) {
                cut += w;
            }
        }
        if cut > best_value {
            best_value = cut;
            best_mask = mask;
        }
    }
    let sigma: Vec<i8> = (0..n)
        .map(|v| {
            if minus_side(best_mask, v as u32) {
                -1
            } else {
                1
            }
        })
        .collect();
    Ok((
        best_value,
        SignAssignment {
            sigma,
            unabsorbed_count: 0,
            fallback_used: vec![false; n],
        },
    ))
}

#[inline]
fn minus_side(mask: u64, v: u32) -> bool {
    v != 0 && (mask >> (v - 1)) & 1 == 1
}

/// Exact expected cut of any rounding obeying the arcsine correlation law:
/// `sum w (1 - (2/pi) asin <v_i, v_j>) / 2`. Inner products may stray from
/// `[-1, 1]` by at most 1e-9 (solver rounding); anything worse is an error.
pub fn expected_cut_arcsin(g: &WeightedGraph, emb: &Embedding) -> Result<f64> {
    if emb.n() != g.n() {
        return Err(Error::Dimension(format!(
            "embedding has {} rows, graph has {} vertices",
            emb.n(),
            g.n()
        )));
    }
    let mut total = 0.0;
    for &(i, j, w) in g.edges() {
        let rho = emb.inner(i as usize, j as usize);
        if rho.abs() > 1.0 + 1e-9 {
            return Err(Error::Domain(format!(
                "inner product {rho} for edge ({i}, {j}) is out of range"
            )));
        }
        total += w * (1.0 - arcsin_law(rho.clamp(-1.0, 1.0))?) / 2.0;
    }
    Ok(total)
}

/// One Monte Carlo estimate of the sign correlation at a target inner
/// product.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IdentityRow {
    pub rho: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub replicas: usize,
    pub target: f64,
    /// `(estimate - target) / std_error`; defined as 0 when the deviation
    /// itself is 0 (covers the zero-variance endpoints).
    pub deviation_in_se: f64,
}

impl IdentityRow {
    /// The acceptance tolerance: three standard errors, floored.
    pub fn allowed_deviation(&self) -> f64 {
        (3.0 * self.std_error).max(IDENTITY_TOLERANCE_FLOOR)
    }

    pub fn within_tolerance(&self) -> bool {
        (self.estimate - self.target).abs() <= self.allowed_deviation()
    }
}

/// Outcome of [`verify_identity`]: per-rho estimates against the arcsine law.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityReport {
    pub scheme: String,
    pub step_h: f64,
    pub t_max: f64,
    pub absorb_eps: f64,
    pub seed: u64,
    pub replicas: usize,
    pub rows: Vec<IdentityRow>,
    pub max_abs_deviation_in_se_units: f64,
}

impl IdentityReport {
    pub fn all_within_tolerance(&self) -> bool {
        self.rows.iter().all(|r| r.within_tolerance())
    }
}

/// Estimates `E[sigma_u sigma_v]` for each target inner product by running
/// coupled two-vector diffusions and compares against the arcsine law.
///
/// Replica `r` of grid point `g` draws from stream id `(g << 40) | r`, so
/// results are independent of scheduling and worker count.
pub fn verify_identity(
    rho_grid: &[f64],
    replicas: usize,
    speed: &SpeedFunction,
    cfg: &DiffusionConfig,
    master_seed: u64,
) -> Result<IdentityReport> {
    if rho_grid.is_empty() {
        return Err(Error::Config("rho grid must be nonempty".into()));
    }
    if replicas < 1000 {
        return Err(Error::Config(format!(
            "identity verification needs >= 1000 replicas per grid point, got {replicas}"
        )));
    }
    if replicas > u32::MAX as usize {
        return Err(Error::Config("replicas must fit in 32 bits".into()));
    }
    if rho_grid.len() >= (1 << 20) {
        return Err(Error::Config("rho grid is unreasonably large".into()));
    }
    cfg.validate()?;
    let cfg = DiffusionConfig {
        record_paths: false,
        ..*cfg
    };

    let mut rows = Vec::with_capacity(rho_grid.len());
    for (gi, &rho) in rho_grid.iter().enumerate() {
        let emb = Embedding::pair(rho)?;
        let pairs: Result<Vec<(i8, i8)>> = (0..replicas)
            .into_par_iter()
            .map(|r| {
                let stream = RngStream::new(master_seed, ((gi as u64) << 40) | r as u64);
                let batch = simulate_sticky_streamed(&emb, speed, &cfg, stream)?;
                Ok((batch.signs.sigma[0], batch.signs.sigma[1]))
            })
            .collect();
        let pc = pair_correlation(&pairs?)?;
        let target = arcsin_law(rho)?;
        let deviation = pc.estimate - target;
        let deviation_in_se = if deviation == 0.0 {
            0.0
        } else {
            deviation / pc.std_error
        };
        rows.push(IdentityRow {
            rho,
            estimate: pc.estimate,
            std_error: pc.std_error,
            replicas,
            target,
            deviation_in_se,
        });
    }
    let max_abs = rows
        .iter()
        .map(|r| r.deviation_in_se.abs())
        .fold(0.0f64, f64::max);
    Ok(IdentityReport {
        scheme: speed.label(),
        step_h: cfg.step_h,
        t_max: cfg.t_max,
        absorb_eps: cfg.absorb_eps,
        seed: master_seed,
        replicas,
        rows,
        max_abs_deviation_in_se_units: max_abs,
    })
}

/// Minimizes `(2 theta / pi) / (1 - cos theta)` over `(0, pi]` by
/// golden-section search to an interval of 1e-10; returns `(theta, value)`.
pub fn gw_minimizer() -> (f64, f64) {
    let f = |t: f64| (2.0 * t / std::f64::consts::PI) / (1.0 - t.cos());
    // The minimand diverges at 0+ and equals 1 at pi; the minimum sits well
    // inside [0.5, pi].
    let (mut a, mut b) = (0.5f64, std::f64::consts::PI);
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// The approximation-ratio constant `min (2 theta / pi) / (1 - cos theta)`.
pub fn gw_constant() -> f64 {
    gw_minimizer().1
}

/// Rounds an embedding once with the given scheme. Diffusion schemes run the
/// coupled sticky engine; the hyperplane scheme draws one shared Gaussian
/// direction from the stream.
pub fn round_once(
    emb: &Embedding,
    scheme: &RoundingScheme,
    diff_cfg: &DiffusionConfig,
    stream: RngStream,
) -> Result<SignAssignment> {
    match scheme.speed() {
        Some(speed) => Ok(simulate_sticky_streamed(emb, &speed, diff_cfg, stream)?.signs),
        None => {
            let mut s = stream;
            let gauss: Vec<f64> = (0..emb.d()).map(|_| s.next_gaussian()).collect();
            hyperplane_round(emb, &gauss)
        }
    }
}

/// Full report of one relax-and-round run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CutResult {
    /// Signs of the best trial.
    pub signs: SignAssignment,
    /// Best cut over all trials.
    pub cut_value: f64,
    pub sdp_value: f64,
    /// Closed-form expected single-trial cut on this embedding.
    pub expected_cut_arcsin: f64,
    pub ratio_vs_sdp: f64,
    /// `cut_value / optimum`, present when the exact optimum was computed.
    pub ratio_vs_exact: Option<f64>,
    pub exact_value: Option<f64>,
    pub mean_cut: f64,
    pub mean_cut_std_error: f64,
    pub trials: usize,
    /// Vectors that never absorbed, summed over all trials.
    pub unabsorbed_total: u64,
    /// Signs decided by fallback coins, summed over all trials.
    pub fallback_total: u64,
}

/// Solves the relaxation, rounds it `trials` times (trial `t` uses stream id
/// `t`), and reports the best and mean cuts with the exact references.
pub fn run_pipeline(
    g: &WeightedGraph,
    scheme: &RoundingScheme,
    trials: usize,
    sdp_cfg: &SdpConfig,
    diff_cfg: &DiffusionConfig,
    master_seed: u64,
) -> Result<CutResult> {
    if trials == 0 {
        return Err(Error::Config("need at least one rounding trial".into()));
    }
    if trials > u32::MAX as usize {
        return Err(Error::Config("trials must fit in 32 bits".into()));
    }
    diff_cfg.validate()?;
    let sol = solve_maxcut_sdp(g, sdp_cfg)?;
    let expected = expected_cut_arcsin(g, &sol.embedding)?;

    let outcomes: Result<Vec<(f64, SignAssignment)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let signs = round_once(
                &sol.embedding,
                scheme,
                diff_cfg,
                RngStream::new(master_seed, t as u64),
            )?;
            let cut = cut_value(g, &signs)?;
            Ok((cut, signs))
        })
        .collect();
    let outcomes = outcomes?;

    let mut best_idx = 0usize;
    for (idx, (cut, _)) in outcomes.iter().enumerate() {
        if *cut > outcomes[best_idx].0 {
            best_idx = idx;
        }
    }
    let cuts: Vec<f64> = outcomes.iter().map(|(c, _)| *c).collect();
    let (mean_cut, mean_cut_std_error) = mean_and_se(&cuts);
    let unabsorbed_total: u64 = outcomes
        .iter()
        .map(|(_, s)| s.unabsorbed_count as u64)
        .sum();
    let fallback_total: u64 = outcomes
        .iter()
        .map(|(_, s)| s.fallback_used.iter().filter(|&&f| f).count() as u64)
        .sum();

    let (exact_value, ratio_vs_exact) = if g.n() <= BRUTE_FORCE_AUTO_LIMIT {
        let (opt, _) = brute_force_maxcut(g)?;
        let ratio = if opt > 0.0 {
            Some(outcomes[best_idx].0 / opt)
        } else {
            None
        };
        (Some(opt), ratio)
    } else {
        (None, None)
    };

    let best_cut = outcomes[best_idx].0;
    let sdp_value = sol.objective;
    // Consistency guard rather than a numerical necessity: the reported
    // objective and the embedding must agree.
    debug_assert!((sdp_objective(g, &sol.embedding)? - sdp_value).abs() < 1e-9);

    Ok(CutResult {
        signs: outcomes[best_idx].1.clone(),
        cut_value: best_cut,
        sdp_value,
        expected_cut_arcsin: expected,
        ratio_vs_sdp: if sdp_value > 0.0 {
            best_cut / sdp_value
        } else {
            f64::NAN
        },
        ratio_vs_exact,
        exact_value,
        mean_cut,
        mean_cut_std_error,
        trials,
        unabsorbed_total,
        fallback_total,
    })
}

/// Mean single-trial cut of one scheme.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeStats {
    pub scheme: String,
    pub mean_cut: f64,
    pub std_error: f64,
    pub replicas: usize,
}

/// Pairwise difference of scheme means in combined-standard-error units.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairAgreement {
    pub scheme_a: String,
    pub scheme_b: String,
    pub difference: f64,
    pub combined_std_error: f64,
    pub within_three_se: bool,
}

/// Side-by-side mean cuts of several schemes on one embedding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeComparison {
    pub sdp_value: f64,
    pub expected_cut_arcsin: f64,
    pub stats: Vec<SchemeStats>,
    pub pairs: Vec<PairAgreement>,
}

/// Runs `replicas` single trials of every scheme on the same solved
/// embedding (scheme `s`, trial `t` uses stream id `(s << 40) | t`) and
/// reports the mean cuts plus all pairwise differences.
pub fn compare_schemes(
    g: &WeightedGraph,
    schemes: &[RoundingScheme],
    replicas: usize,
    sdp_cfg: &SdpConfig,
    diff_cfg: &DiffusionConfig,
    master_seed: u64,
) -> Result<SchemeComparison> {
    if schemes.is_empty() {
        return Err(Error::Config("need at least one scheme to compare".into()));
    }
    if replicas < 2 {
        return Err(Error::Config("need at least two replicas".into()));
    }
    if replicas > u32::MAX as usize {
        return Err(Error::Config("replicas must fit in 32 bits".into()));
    }
    diff_cfg.validate()?;
    let sol = solve_maxcut_sdp(g, sdp_cfg)?;
    let expected = expected_cut_arcsin(g, &sol.embedding)?;

    let mut stats = Vec::with_capacity(schemes.len());
    for (si, scheme) in schemes.iter().enumerate() {
        let cuts: Result<Vec<f64>> = (0..replicas)
            .into_par_iter()
            .map(|t| {
                let stream = RngStream::new(master_seed, ((si as u64) << 40) | t as u64);
                let signs = round_once(&sol.embedding, scheme, diff_cfg, stream)?;
                cut_value(g, &signs)
            })
            .collect();
        let (mean_cut, std_error) = mean_and_se(&cuts?);
        stats.push(SchemeStats {
            scheme: scheme.label(),
            mean_cut,
            std_error,
            replicas,
        });
    }

    let mut pairs = Vec::new();
    for a in 0..stats.len() {
        for b in a + 1..stats.len() {
            let difference = stats[a].mean_cut - stats[b].mean_cut;
            let combined = (stats[a].std_error.powi(2) + stats[b].std_error.powi(2)).sqrt();
            pairs.push(PairAgreement {
                scheme_a: stats[a].scheme.clone(),
                scheme_b: stats[b].scheme.clone(),
                difference,
                combined_std_error: combined,
                within_three_se: difference.abs() <= 3.0 * combined,
            });
        }
    }

    Ok(SchemeComparison {
        sdp_value: sol.objective,
        expected_cut_arcsin: expected,
        stats,
        pairs,
    })
}

pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
