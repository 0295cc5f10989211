//! Bound reports shared by the state and channel calculators.

use serde::{Deserialize, Serialize};

use crate::closed_form::{f_bound, guarded_sqrt, relaxed_alg, relaxed_td, zero_threshold};
use crate::error::{Error, Result};

/// Which side of the bound hypotheses a `(J, ε)` pair falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// The hypothesis `J > ε` fails; no finite bound is available.
    NoBound,
    Finite,
    /// `J` exceeds the zero threshold, so the key is zero.
    Zero,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::NoBound => "NoBound",
            Regime::Finite => "Finite",
            Regime::Zero => "Zero",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "NoBound" => Ok(Regime::NoBound),
            "Finite" => Ok(Regime::Finite),
            "Zero" => Ok(Regime::Zero),
            other => Err(Error::Config(format!("unknown regime {other:?}"))),
        }
    }
}

/// How a bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// `f(J, ε)` with J from the smooth-min measure.
    SmoothMin,
    /// `−log₂(√J − √ε)`.
    RelaxedAlg,
    /// `−½ log₂(J − √ε)`.
    RelaxedTd,
    /// `f(J̃, ε)` with `J̃` from the n-fold max measure.
    NshotMax,
    /// `f(Ĵ, ε)` with `Ĵ` from the n-fold α-geometric measure.
    NshotGeo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::SmoothMin => "smooth-min",
            Method::RelaxedAlg => "relaxed-alg",
            Method::RelaxedTd => "relaxed-td",
            Method::NshotMax => "nshot-max",
            Method::NshotGeo => "nshot-geo",
        }
    }

    /// Value that `J` must exceed for the method to produce a bound.
    pub fn no_bound_threshold(self, eps: f64) -> f64 {
        match self {
            Method::RelaxedTd => guarded_sqrt(eps),
            _ => eps,
        }
    }

    /// The bound formula applied in the `Finite` regime.
    pub fn finite_value(self, j: f64, eps: f64) -> Option<f64> {
        match self {
            Method::RelaxedAlg => relaxed_alg(j, eps),
            Method::RelaxedTd => relaxed_td(j, eps),
            _ => f_bound(j, eps).ok(),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Method::SmoothMin, Method::RelaxedAlg, Method::RelaxedTd, Method::NshotMax, Method::NshotGeo]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// Slack on the zero-threshold comparison: a computed `J` within this
/// distance of the threshold counts as equal to it.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Classifies `(J, ε)` and evaluates the method's bound.
///
/// Equality with the zero threshold (up to [`BOUNDARY_TOL`]) is assigned to
/// `Finite`.
pub fn classify(method: Method, j: f64, eps: f64) -> Result<(Regime, Option<f64>)> {
    if j.is_nan() {
        return Err(Error::Numerical("J is NaN".into()));
    }
    if j <= method.no_bound_threshold(eps) {
        return Ok((Regime::NoBound, None));
    }
    if j > zero_threshold(eps)? + BOUNDARY_TOL {
        return Ok((Regime::Zero, Some(0.0)));
    }
    let v = method
        .finite_value(j, eps)
        .ok_or_else(|| Error::Numerical(format!("bound formula undefined at J = {j}, eps = {eps}")))?;
    Ok((Regime::Finite, Some(v)))
}

/// A bound on one-shot (or n-shot) distillable key, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub method: Method,
    /// `None` exactly when the regime is `NoBound`.
    pub bound: Option<f64>,
    pub regime: Regime,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub epsilon: f64,
    pub n: u32,
}

impl BoundReport {
    pub fn new(method: Method, e: f64, j: f64, eps: f64, n: u32) -> Result<Self> {
        let (regime, bound) = classify(method, j, eps)?;
        Ok(BoundReport { method, bound, regime, e, j, epsilon: eps, n })
    }

    /// Checks the regime flag and bound against the method's formulas.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let (regime, bound) = classify(self.method, self.j, self.epsilon)?;
        let ok = regime == self.regime
            && match (bound, self.bound) {
                (None, None) => true,
                (Some(a), Some(b)) => (a - b).abs() <= tol * a.abs().max(1.0),
                _ => false,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Numerical(format!(
                "report inconsistent: stored ({:?}, {:?}), recomputed ({regime:?}, {bound:?})",
                self.regime, self.bound
            )))
        }
    }
}

/// A bound on forward-assisted private capacity, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelBoundReport {
    #[serde(flatten)]
    pub base: BoundReport,
    pub alpha: Option<f64>,
    pub ell: Option<u32>,
    /// `bound / n`.
    pub per_copy_bound: Option<f64>,
}

impl ChannelBoundReport {
    pub fn new(base: BoundReport, ell: Option<u32>) -> Self {
        let per_copy_bound = base.bound.map(|b| b / f64::from(base.n));
        let alpha = ell.map(crate::closed_form::alpha_of_ell);
        ChannelBoundReport { base, alpha, ell, per_copy_bound }
    }

    pub fn regime(&self) -> Regime {
        self.base.regime
    }

    pub fn bound(&self) -> Option<f64> {
        self.base.bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(classify(Method::SmoothMin, 0.05, 0.05).unwrap().0, Regime::NoBound);
        assert_eq!(classify(Method::SmoothMin, 0.95, 0.05).unwrap(), (Regime::Zero, Some(0.0)));
        let (r, b) = classify(Method::SmoothMin, 0.25, 0.0).unwrap();
        assert_eq!(r, Regime::Finite);
        assert!((b.unwrap() - 1.0).abs() < 1e-15);
        let thr = zero_threshold(0.05).unwrap();
        assert_eq!(classify(Method::SmoothMin, thr, 0.05).unwrap().0, Regime::Finite);
        assert_eq!(classify(Method::SmoothMin, thr + 0.5 * BOUNDARY_TOL, 0.05).unwrap().0, Regime::Finite);
        assert_eq!(classify(Method::SmoothMin, thr + 1e-6, 0.05).unwrap().0, Regime::Zero);
        assert_eq!(classify(Method::RelaxedTd, 0.09, 0.01).unwrap().0, Regime::NoBound);
        assert_eq!(classify(Method::RelaxedAlg, 0.09, 0.01).unwrap().0, Regime::Finite);
    }

    #[test]
    fn json_shape() {
        let r = BoundReport::new(Method::SmoothMin, 1.0, 0.0125, 0.05, 1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        for k in ["method", "bound", "regime", "E", "J", "epsilon", "n"] {
            assert!(keys.contains(&k.to_string()), "missing {k}");
        }
        assert!(v["bound"].is_null());
        assert_eq!(v["regime"], "NoBound");
        let c = ChannelBoundReport::new(BoundReport::new(Method::NshotGeo, 0.1, 0.3, 0.0, 4).unwrap(), Some(1));
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        assert_eq!(v["alpha"], 1.5);
        assert_eq!(v["ell"], 1);
        assert!((v["per_copy_bound"].as_f64().unwrap() - c.bound().unwrap() / 4.0).abs() < 1e-15);
        let back: ChannelBoundReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn validate_detects_tampering() {
        let mut r = BoundReport::new(Method::SmoothMin, 1.0, 0.3, 0.01, 1).unwrap();
        r.validate(1e-12).unwrap();
        r.bound = Some(r.bound.unwrap() + 0.1);
        assert!(r.validate(1e-9).is_err());
        r.bound = None;
        r.regime = Regime::NoBound;
        assert!(r.validate(1e-9).is_err());
    }
}
