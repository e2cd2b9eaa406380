//! Scale distributions (the random filtration scale) and the generalized
//! inverse machinery connecting weight-to-distance functions to survival
//! functions.
//!
//! Three families are supported: exponential, Weibull, and a log-logistic
//! parameterized so that `survival(t) = 1/(1 + a t^{2b})`, the affinity kernel
//! used by the embedding losses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScaleError {
    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParam { name: &'static str, value: f64 },
    #[error("scale must be nonnegative, got {t}")]
    NegativeScale { t: f64 },
    #[error("cannot parse scale distribution from {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// Distribution of the random filtration scale, with positive parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ScaleDistribution {
    Exponential { nu: f64 },
    Weibull { lambda: f64, k: f64 },
    LogLogistic { a: f64, b: f64 },
}

fn require_positive(name: &'static str, value: f64) -> Result<f64, ScaleError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ScaleError::NonPositiveParam { name, value })
    }
}

impl ScaleDistribution {
    pub fn exponential(nu: f64) -> Result<Self, ScaleError> {
        Ok(ScaleDistribution::Exponential { nu: require_positive("nu", nu)? })
    }

    pub fn weibull(lambda: f64, k: f64) -> Result<Self, ScaleError> {
        Ok(ScaleDistribution::Weibull {
            lambda: require_positive("lambda", lambda)?,
            k: require_positive("k", k)?,
        })
    }

    pub fn log_logistic(a: f64, b: f64) -> Result<Self, ScaleError> {
        Ok(ScaleDistribution::LogLogistic {
            a: require_positive("a", a)?,
            b: require_positive("b", b)?,
        })
    }

    /// Cumulative distribution function at scale `t >= 0`.
    pub fn cdf(&self, t: f64) -> Result<f64, ScaleError> {
        if t < 0.0 {
            return Err(ScaleError::NegativeScale { t });
        }
        Ok(match *self {
            ScaleDistribution::Exponential { nu } => -(-t / nu).exp_m1(),
            ScaleDistribution::Weibull { lambda, k } => -(-(t / lambda).powf(k)).exp_m1(),
            ScaleDistribution::LogLogistic { a, b } => {
                let u = a * t.powf(2.0 * b);
                if u.is_infinite() {
                    1.0
                } else {
                    u / (1.0 + u)
                }
            }
        })
    }

    /// Survival function `1 - cdf`, computed directly for accuracy.
    pub fn survival(&self, t: f64) -> Result<f64, ScaleError> {
        if t < 0.0 {
            return Err(ScaleError::NegativeScale { t });
        }
        Ok(match *self {
            ScaleDistribution::Exponential { nu } => (-t / nu).exp(),
            ScaleDistribution::Weibull { lambda, k } => (-(t / lambda).powf(k)).exp(),
            ScaleDistribution::LogLogistic { a, b } => {
                let u = a * t.powf(2.0 * b);
                if u.is_infinite() {
                    0.0
                } else {
                    1.0 / (1.0 + u)
                }
            }
        })
    }

    /// Probability density where defined; may be `+inf` at `t = 0` for shape
    /// parameters below 1 (Weibull) or below 1/2 (log-logistic).
    pub fn density(&self, t: f64) -> Result<f64, ScaleError> {
        if t < 0.0 {
            return Err(ScaleError::NegativeScale { t });
        }
        Ok(match *self {
            ScaleDistribution::Exponential { nu } => (-t / nu).exp() / nu,
            ScaleDistribution::Weibull { lambda, k } => {
                (k / lambda) * (t / lambda).powf(k - 1.0) * (-(t / lambda).powf(k)).exp()
            }
            ScaleDistribution::LogLogistic { a, b } => {
                let u = a * t.powf(2.0 * b);
                if u.is_infinite() {
                    0.0
                } else {
                    2.0 * a * b * t.powf(2.0 * b - 1.0) / ((1.0 + u) * (1.0 + u))
                }
            }
        })
    }
}

impl fmt::Display for ScaleDistribution {
    /// The CLI flag syntax, e.g. `exponential:nu=1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ScaleDistribution::Exponential { nu } => write!(f, "exponential:nu={nu}"),
            ScaleDistribution::Weibull { lambda, k } => write!(f, "weibull:lambda={lambda},k={k}"),
            ScaleDistribution::LogLogistic { a, b } => write!(f, "loglogistic:a={a},b={b}"),
        }
    }
}

impl FromStr for ScaleDistribution {
    type Err = ScaleError;

    /// Parses `exponential:nu=…`, `weibull:lambda=…,k=…`, `loglogistic:a=…,b=…`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_err = |reason: &str| ScaleError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (family, rest) = s.split_once(':').ok_or_else(|| parse_err("missing ':'"))?;
        let mut params = std::collections::BTreeMap::new();
        for pair in rest.split(',') {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| parse_err(&format!("parameter {pair:?} is not key=value")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| parse_err(&format!("parameter {key} value {value:?} is not a number")))?;
            if params.insert(key.trim().to_string(), value).is_some() {
                return Err(parse_err(&format!("duplicate parameter {key}")));
            }
        }
        let mut take = |key: &str| {
            params.remove(key).ok_or_else(|| parse_err(&format!("missing parameter {key}")))
        };
        let dist = match family.trim() {
            "exponential" => ScaleDistribution::exponential(take("nu")?)?,
            "weibull" => ScaleDistribution::weibull(take("lambda")?, take("k")?)?,
            "loglogistic" => ScaleDistribution::log_logistic(take("a")?, take("b")?)?,
            other => return Err(parse_err(&format!("unknown family {other:?}"))),
        };
        if let Some(extra) = params.keys().next() {
            return Err(parse_err(&format!("unexpected parameter {extra}")));
        }
        Ok(dist)
    }
}

/// Converts log-logistic kernel parameters `(a, b)` (survival `1/(1+a t^{2b})`)
/// to the standard log-logistic form `(alpha, beta)`: `beta = 2b`,
/// `alpha = a^{-1/(2b)}`.
pub fn umap_param_convert(a: f64, b: f64) -> Result<(f64, f64), ScaleError> {
    let a = require_positive("a", a)?;
    let b = require_positive("b", b)?;
    Ok((a.powf(-1.0 / (2.0 * b)), 2.0 * b))
}

/// Inverse of [`umap_param_convert`]: `b = beta/2`, `a = alpha^{-beta}`.
pub fn standard_param_convert(alpha: f64, beta: f64) -> Result<(f64, f64), ScaleError> {
    let alpha = require_positive("alpha", alpha)?;
    let beta = require_positive("beta", beta)?;
    Ok((alpha.powf(-beta), beta / 2.0))
}

/// Absolute tolerance of the bisection in [`WeightToDistanceFn::generalized_inverse`].
pub const INVERSE_TOLERANCE: f64 = 1e-10;

/// A decreasing function from weights in `[0,1]` to distances in `[0, inf]`,
/// diverging at 0 and vanishing at 1.
pub struct WeightToDistanceFn {
    evaluator: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    domain: (f64, f64),
    left_continuous: bool,
}

impl WeightToDistanceFn {
    /// Wraps a decreasing evaluator on `[0, 1]`.
    pub fn new(evaluator: impl Fn(f64) -> f64 + Send + Sync + 'static, left_continuous: bool) -> Self {
        WeightToDistanceFn { evaluator: Box::new(evaluator), domain: (0.0, 1.0), left_continuous }
    }

    /// Same, with an explicit bounded domain.
    pub fn with_domain(
        evaluator: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: (f64, f64),
        left_continuous: bool,
    ) -> Self {
        WeightToDistanceFn { evaluator: Box::new(evaluator), domain, left_continuous }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn left_continuous(&self) -> bool {
        self.left_continuous
    }

    /// The generalized inverse `sup { x : f(x) >= y }` of a decreasing `f`,
    /// found by bisection to [`INVERSE_TOLERANCE`]. Returns the domain
    /// endpoints when the whole domain (or none of it) qualifies.
    pub fn generalized_inverse(&self, y: f64) -> f64 {
        let (lo_end, hi_end) = self.domain;
        if self.eval(hi_end) >= y {
            return hi_end;
        }
        if !(self.eval(lo_end) >= y) {
            // NaN-safe: treat an undefined left endpoint as qualifying only
            // if strictly above y is provable; otherwise the set is empty.
            let probe = self.eval(lo_end + INVERSE_TOLERANCE);
            if !(probe >= y) {
                return lo_end;
            }
        }
        // Invariant: the qualifying set {f >= y} meets [lo, mid] iff f(mid) >= y,
        // because f is decreasing; lo stays inside (or at) the set's closure.
        let (mut lo, mut hi) = (lo_end, hi_end);
        while hi - lo > INVERSE_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) >= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl fmt::Debug for WeightToDistanceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightToDistanceFn")
            .field("domain", &self.domain)
            .field("left_continuous", &self.left_continuous)
            .finish_non_exhaustive()
    }
}

/// Outcome of the numeric survival-function checks; all fields must hold.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalReport {
    pub starts_at_one: bool,
    pub decreasing: bool,
    pub vanishes: bool,
    pub right_continuous: bool,
    /// Human-readable witness of the first failed check, if any.
    pub witness: Option<String>,
}

impl SurvivalReport {
    pub fn is_ok(&self) -> bool {
        self.starts_at_one && self.decreasing && self.vanishes && self.right_continuous
    }
}

/// Checks whether `g` behaves like a survival function on the given grid:
/// `g(grid[0]) = 1` (within 1e-6), decreasing (slack 1e-12), small at the last
/// grid point (below 1e-2), and without jumps at probe points (one-sided
/// increments at `h = 1e-6` stay below 1e-3). Continuity is not decidable from
/// samples; the probes are a documented proxy.
pub fn is_survival_function(g: impl Fn(f64) -> f64, grid: &[f64]) -> SurvivalReport {
    let mut report = SurvivalReport {
        starts_at_one: true,
        decreasing: true,
        vanishes: true,
        right_continuous: true,
        witness: None,
    };
    let fail = |field: &mut bool, witness: String, slot: &mut Option<String>| {
        *field = false;
        if slot.is_none() {
            *slot = Some(witness);
        }
    };
    if grid.is_empty() {
        return report;
    }
    let g0 = g(grid[0]);
    if (g0 - 1.0).abs() > 1e-6 {
        let w = format!("g({}) = {g0}, expected 1", grid[0]);
        fail(&mut report.starts_at_one, w, &mut report.witness);
    }
    for pair in grid.windows(2) {
        let (a, b) = (g(pair[0]), g(pair[1]));
        if b > a + 1e-12 {
            let w = format!("g({}) = {a} < g({}) = {b}", pair[0], pair[1]);
            fail(&mut report.decreasing, w, &mut report.witness);
            break;
        }
    }
    let tail = g(*grid.last().unwrap());
    if tail.abs() > 1e-2 {
        let w = format!("g({}) = {tail}, expected near 0", grid.last().unwrap());
        fail(&mut report.vanishes, w, &mut report.witness);
    }
    let h = 1e-6;
    for &t in grid.iter().take(grid.len().saturating_sub(1)) {
        let jump = (g(t + h) - g(t)).abs();
        if jump > 1e-3 {
            let w = format!("|g({t} + {h}) - g({t})| = {jump}");
            fail(&mut report.right_continuous, w, &mut report.witness);
            break;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exponential_cdf_at_one() {
        let d = ScaleDistribution::exponential(1.0).unwrap();
        let expected = 1.0 - (-1.0f64).exp();
        assert!((d.cdf(1.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn log_logistic_survival_is_cauchy_like() {
        let d = ScaleDistribution::log_logistic(1.0, 1.0).unwrap();
        assert!((d.survival(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((d.survival(2.0).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn all_families_start_at_zero_cdf() {
        let dists = [
            ScaleDistribution::exponential(2.0).unwrap(),
            ScaleDistribution::weibull(1.5, 0.8).unwrap(),
            ScaleDistribution::log_logistic(0.5, 1.2).unwrap(),
        ];
        for d in dists {
            assert_eq!(d.cdf(0.0).unwrap(), 0.0);
            assert_eq!(d.survival(0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn negative_scale_is_rejected() {
        let d = ScaleDistribution::exponential(1.0).unwrap();
        assert_eq!(d.cdf(-0.5).unwrap_err(), ScaleError::NegativeScale { t: -0.5 });
    }

    #[test]
    fn nonpositive_params_are_rejected() {
        assert!(ScaleDistribution::exponential(0.0).is_err());
        assert!(ScaleDistribution::weibull(1.0, -1.0).is_err());
        assert!(ScaleDistribution::log_logistic(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn density_matches_cdf_derivative_numerically() {
        let dists = [
            ScaleDistribution::exponential(1.3).unwrap(),
            ScaleDistribution::weibull(0.9, 2.0).unwrap(),
            ScaleDistribution::log_logistic(1.0, 1.0).unwrap(),
        ];
        let h = 1e-6;
        for d in dists {
            for t in [0.3, 0.9, 1.7, 3.1] {
                let fd = (d.cdf(t + h).unwrap() - d.cdf(t - h).unwrap()) / (2.0 * h);
                let pdf = d.density(t).unwrap();
                assert!((fd - pdf).abs() < 1e-6 * pdf.max(1.0), "t={t}: fd={fd} pdf={pdf}");
            }
        }
    }

    #[test]
    fn param_convert_known_values() {
        assert_eq!(umap_param_convert(1.0, 1.0).unwrap(), (1.0, 2.0));
        let (alpha, beta) = umap_param_convert(4.0, 0.5).unwrap();
        assert!((alpha - 0.25).abs() < 1e-15);
        assert_eq!(beta, 1.0);
    }

    #[test]
    fn param_convert_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = rng.gen_range(0.2..5.0);
            let b = rng.gen_range(0.2..5.0);
            let (alpha, beta) = umap_param_convert(a, b).unwrap();
            let (a2, b2) = standard_param_convert(alpha, beta).unwrap();
            assert!((a2 - a).abs() <= 1e-12 * a.max(1.0), "a={a} a2={a2}");
            assert!((b2 - b).abs() <= 1e-12, "b={b} b2={b2}");
        }
    }

    #[test]
    fn generalized_inverse_of_neg_log() {
        let f = WeightToDistanceFn::new(|x| -x.ln(), true);
        assert!((f.generalized_inverse(1.0) - (-1.0f64).exp()).abs() < 1e-9);
        assert!((f.generalized_inverse(2.0) - (-2.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn generalized_inverse_at_zero_is_domain_sup() {
        let f = WeightToDistanceFn::new(|x| -x.ln(), true);
        assert_eq!(f.generalized_inverse(0.0), 1.0);
    }

    #[test]
    fn generalized_inverse_of_step_finds_plateau_sup() {
        // f = 3 on [0, 0.25], 1 on (0.25, 0.75], 0 after.
        let f = WeightToDistanceFn::new(
            |x| {
                if x <= 0.25 {
                    3.0
                } else if x <= 0.75 {
                    1.0
                } else {
                    0.0
                }
            },
            true,
        );
        assert!((f.generalized_inverse(2.0) - 0.25).abs() < 1e-9);
        assert!((f.generalized_inverse(1.0) - 0.75).abs() < 1e-9);
        assert!((f.generalized_inverse(0.5) - 0.75).abs() < 1e-9);
    }

    #[test]
    fn generalized_inverse_equals_inverse_for_injective() {
        let f = WeightToDistanceFn::new(|x| -x.ln(), true);
        for i in 1..20 {
            let x = i as f64 / 20.0;
            let y = f.eval(x);
            assert!((f.generalized_inverse(y) - x).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn generalized_inverse_is_decreasing_in_y() {
        let f = WeightToDistanceFn::new(|x| -x.ln(), true);
        let mut prev = f64::INFINITY;
        for i in 0..30 {
            let y = i as f64 * 0.25;
            let x = f.generalized_inverse(y);
            assert!(x <= prev + 1e-12, "y={y}");
            prev = x;
        }
    }

    #[test]
    fn generalized_inverse_forms_galois_pair() {
        // For decreasing f: f(x) >= y holds exactly when x <= inverse(y).
        let f = WeightToDistanceFn::new(|x| -x.ln(), true);
        for i in 1..=20 {
            let x = i as f64 / 20.0;
            for j in 0..10 {
                let y = j as f64 * 0.4;
                let inv = f.generalized_inverse(y);
                if f.eval(x) >= y {
                    assert!(x <= inv + 1e-9, "x={x} y={y} inv={inv}");
                } else {
                    assert!(x >= inv - 1e-9, "x={x} y={y} inv={inv}");
                }
            }
        }
    }

    #[test]
    fn survival_reports_pass_for_all_families() {
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.25).collect();
        let dists = [
            ScaleDistribution::exponential(1.0).unwrap(),
            ScaleDistribution::weibull(1.0, 1.5).unwrap(),
            ScaleDistribution::log_logistic(1.0, 1.0).unwrap(),
        ];
        for d in dists {
            let report = is_survival_function(|t| d.survival(t).unwrap(), &grid);
            assert!(report.is_ok(), "{d}: {:?}", report.witness);
        }
    }

    #[test]
    fn generalized_inverse_is_a_survival_function() {
        let f = WeightToDistanceFn::new(|x| -x.ln(), true);
        let grid: Vec<f64> = (0..100).map(|i| i as f64 * 0.25).collect();
        let report = is_survival_function(|y| f.generalized_inverse(y), &grid);
        assert!(report.is_ok(), "{:?}", report.witness);
    }

    #[test]
    fn increasing_function_fails_with_witness() {
        let grid: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let report = is_survival_function(|t| t / 10.0, &grid);
        assert!(!report.is_ok());
        assert!(!report.decreasing);
        assert!(report.witness.is_some());
    }

    #[test]
    fn cli_string_roundtrip() {
        let cases = [
            "exponential:nu=1.5",
            "weibull:lambda=2,k=0.5",
            "loglogistic:a=1,b=1",
        ];
        for s in cases {
            let d: ScaleDistribution = s.parse().unwrap();
            let back: ScaleDistribution = d.to_string().parse().unwrap();
            assert_eq!(d, back);
        }
    }

    #[test]
    fn cli_string_errors_are_descriptive() {
        assert!(matches!(
            "exponential".parse::<ScaleDistribution>(),
            Err(ScaleError::Parse { .. })
        ));
        assert!("gamma:k=1".parse::<ScaleDistribution>().is_err());
        assert!("weibull:lambda=1".parse::<ScaleDistribution>().is_err());
        assert!("exponential:nu=1,extra=2".parse::<ScaleDistribution>().is_err());
        assert!("exponential:nu=-1".parse::<ScaleDistribution>().is_err());
    }

    #[test]
    fn exponential_survival_matches_closed_form() {
        let d = ScaleDistribution::exponential(2.0).unwrap();
        for t in [0.0, 0.5, 1.0, 4.0] {
            assert!((d.survival(t).unwrap() - (-t / 2.0).exp()).abs() < 1e-12);
        }
    }
}
