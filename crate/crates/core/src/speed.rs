//! Diffusion speed functions on `[-1, 1]`.
//!
//! A speed is admissible when it is continuous, vanishes at both endpoints
//! and is strictly positive inside the interval. Three families are
//! provided: the Gaussian-quantile speed [`xi`] (the one that reproduces the
//! arcsine correlation law), the power family `(1 - s^2)^alpha`, and
//! tabulated speeds with linear interpolation for experimentation.

use crate::error::{Error, Result};
use crate::numerics::quantile_core;
use std::path::Path;

const SQRT_2_OVER_PI: f64 = 0.7978845608028653558798921198687637369;

/// Speed of the slowed-down sticky diffusion that attains the arcsine law:
/// `sqrt(2/pi) * exp(-Phi^{-1}((1-s)/2)^2 / 2)`.
///
/// Endpoints are special-cased to exactly 0 (the quantile diverges there).
pub fn xi(s: f64) -> Result<f64> {
    check_unit_interval(s, "xi")?;
    Ok(xi_core(s))
}

#[inline]
pub(crate) fn xi_core(s: f64) -> f64 {
    // Evaluate through |s|: the function is even, and routing both signs
    // through the same arithmetic makes that true bit-for-bit, which the
    // sign-flip symmetry of the diffusion engine relies on.
    let a = s.abs();
    if a >= 1.0 {
        return 0.0;
    }
    let q = quantile_core((1.0 - a) / 2.0);
    SQRT_2_OVER_PI * (-0.5 * q * q).exp()
}

/// The power-family speed `(1 - s^2)^alpha`, `alpha > 0`.
pub fn power_speed(alpha: f64, s: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "power_speed: alpha must be positive and finite, got {alpha}"
        )));
    }
    check_unit_interval(s, "power_speed")?;
    Ok(power_core(alpha, s))
}

#[inline]
fn power_core(alpha: f64, s: f64) -> f64 {
    (1.0 - s * s).powf(alpha)
}

fn check_unit_interval(s: f64, who: &str) -> Result<()> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!(
            "{who}: s must lie in [-1, 1], got {s}"
        )));
    }
    Ok(())
}

/// A diffusion speed on `[-1, 1]`.
#[derive(Clone, Debug)]
pub enum SpeedFunction {
    /// The Gaussian-quantile speed of [`xi`].
    Xi,
    /// `(1 - s^2)^alpha` with `alpha > 0`.
    Power(f64),
    /// Piecewise-linear interpolation of `(s, value)` breakpoints.
    Tabulated(Table),
}

/// Breakpoints of a tabulated speed: strictly increasing abscissae spanning
/// `[-1, 1]`, nonnegative finite values.
#[derive(Clone, Debug)]
pub struct Table {
    s: Vec<f64>,
    v: Vec<f64>,
}

impl SpeedFunction {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Speed(format!(
                "power speed needs alpha > 0, got {alpha}"
            )));
        }
        Ok(SpeedFunction::Power(alpha))
    }

    /// Builds a tabulated speed. Structural requirements only (the
    /// admissibility conditions are checked by [`SpeedFunction::validate`]):
    /// at least two points, strictly increasing `s` starting at -1 and
    /// ending at 1, all values finite and nonnegative.
    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Speed("tabulated speed needs >= 2 points".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Speed(format!(
                    "breakpoints must be strictly increasing, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if points[0].0 != -1.0 || points[points.len() - 1].0 != 1.0 {
            return Err(Error::Speed("breakpoints must span exactly [-1, 1]".into()));
        }
        for &(s, v) in &points {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Speed(format!(
                    "value at s={s} must be finite and nonnegative, got {v}"
                )));
            }
        }
        let (s, v) = points.into_iter().unzip();
        Ok(SpeedFunction::Tabulated(Table { s, v }))
    }

    /// Loads a tabulated speed from a two-column text file: `s value` per
    /// line, `#` comments and blank lines allowed.
    pub fn from_table_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_table_str(&text)
    }

    pub fn from_table_str(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>, what: &str| -> Result<f64> {
                tok.ok_or(Error::Parse {
                    line: idx + 1,
                    msg: format!("missing {what}"),
                })?
                .parse::<f64>()
                .map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad {what}: {e}"),
                })
            };
            let s = parse(it.next(), "abscissa")?;
            let v = parse(it.next(), "value")?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "expected exactly two columns".into(),
                });
            }
            points.push((s, v));
        }
        Self::tabulated(points)
    }

    /// Human-readable tag used in reports and CLI output.
    pub fn label(&self) -> String {
        match self {
            SpeedFunction::Xi => "xi".into(),
            SpeedFunction::Power(a) => format!("power:{a}"),
            SpeedFunction::Tabulated(t) => format!("tabulated[{}]", t.s.len()),
        }
    }

    /// Evaluates the speed. `s` must already lie in `[-1, 1]` (the engines
    /// clamp before calling); out-of-range inputs are clamped here too so a
    /// stray ulp can never produce garbage.
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            SpeedFunction::Xi => xi_core(s),
            SpeedFunction::Power(a) => power_core(*a, s.clamp(-1.0, 1.0)),
            SpeedFunction::Tabulated(t) => t.eval(s.clamp(-1.0, 1.0)),
        }
    }

    /// Checks the admissibility conditions on a uniform grid of
    /// `grid_size >= 3` points: zero endpoints, strict positivity inside,
    /// and no single-cell jump larger than a quarter of the observed range
    /// (a grid-resolution stand-in for continuity). Failures are reported,
    /// not thrown.
    pub fn validate(&self, grid_size: usize) -> Result<SpeedValidation> {
        if grid_size < 3 {
            return Err(Error::Config(format!(
                "validate: grid_size must be >= 3, got {grid_size}"
            )));
        }
        let n = grid_size;
        let values: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let s = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                let s = s.clamp(-1.0, 1.0);
                (s, self.eval(s))
            })
            .collect();

        let mut endpoint_failures = Vec::new();
        for &(s, v) in [&values[0], &values[n - 1]] {
            if v != 0.0 {
                endpoint_failures.push((s, v));
            }
        }
        let mut positivity_failures = Vec::new();
        for &(s, v) in &values[1..n - 1] {
            if !(v > 0.0) || !v.is_finite() {
                positivity_failures.push((s, v));
            }
        }

        let lo = values.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = values.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let jump_threshold = 0.25 * (hi - lo).max(f64::MIN_POSITIVE);
        let mut max_adjacent_jump = 0.0f64;
        let mut worst_jump_at = values[0].0;
        for w in values.windows(2) {
            let jump = (w[1].1 - w[0].1).abs();
            if jump > max_adjacent_jump {
                max_adjacent_jump = jump;
                worst_jump_at = w[0].0;
            }
        }

        Ok(SpeedValidation {
            grid_size: n,
            endpoint_failures,
            positivity_failures,
            max_adjacent_jump,
            worst_jump_at,
            jump_threshold,
        })
    }

    /// Structural usability for the simulation engines: values finite and
    /// nonnegative. This is weaker than admissibility on purpose: clamping
    /// plus the absorption band make speeds with nonzero endpoints simulable
    /// (useful for plain sticky walks), they just lose the endpoint limit
    /// behavior. Cheap enough to run per trajectory.
    pub(crate) fn check_simulable(&self) -> Result<()> {
        match self {
            SpeedFunction::Xi => Ok(()),
            SpeedFunction::Power(a) => {
                if a.is_finite() && *a > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Speed(format!(
                        "power speed needs alpha > 0, got {a}"
                    )))
                }
            }
            SpeedFunction::Tabulated(t) => {
                for (s, v) in t.breakpoints() {
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::Speed(format!(
                            "speed takes invalid value {v} at s={s}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

impl Table {
    #[inline]
    fn eval(&self, s: f64) -> f64 {
        let n = self.s.len();
        if s <= self.s[0] {
            return self.v[0];
        }
        if s >= self.s[n - 1] {
            return self.v[n - 1];
        }
        // partition_point returns the first index with s[i] > s; the segment
        // is [i-1, i].
        let i = self.s.partition_point(|&x| x <= s);
        let (s0, s1) = (self.s[i - 1], self.s[i]);
        let (v0, v1) = (self.v[i - 1], self.v[i]);
        let t = (s - s0) / (s1 - s0);
        v0 + t * (v1 - v0)
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.s.iter().copied().zip(self.v.iter().copied())
    }
}

/// Outcome of [`SpeedFunction::validate`].
#[derive(Clone, Debug)]
pub struct SpeedValidation {
    pub grid_size: usize,
    /// Endpoints with nonzero values, as `(s, value)`.
    pub endpoint_failures: Vec<(f64, f64)>,
    /// Interior grid points with nonpositive or non-finite values.
    pub positivity_failures: Vec<(f64, f64)>,
    pub max_adjacent_jump: f64,
    pub worst_jump_at: f64,
    pub jump_threshold: f64,
}

impl SpeedValidation {
    pub fn continuity_ok(&self) -> bool {
        self.max_adjacent_jump <= self.jump_threshold
    }

    pub fn passed(&self) -> bool {
        self.endpoint_failures.is_empty()
            && self.positivity_failures.is_empty()
            && self.continuity_ok()
    }
}
