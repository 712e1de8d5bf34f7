//! Admissible `(a, b, γ)` triples for the weighted Serrin-type condition on
//! the negative part of `u_ρ`, and the Hölder/Young exponents derived from
//! them.
//!
//! For finite `b` the auxiliary exponents are
//!
//! ```text
//! p = 1 + (2a + 3b) / (2ab − 2a − 3b),    s = 2a/b + 3,
//! ```
//!
//! and for `b = ∞` they are `p = 2a / (2a − δa − 3)`, `s = 3 + δa` with
//! `δ = 1 − γ − 3/a`. In both cases the exponent on `u_ρ⁻` inside the growth
//! rate `d(t)` is `α = sp / (2(p − 1))`, the weight exponent is
//! `β = (2 − p)s / (2(p − 1))` and the outer time exponent is `θ = 2/(s − 3)`.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// One failed admissibility condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotANumber,
    ARange { a: f64 },
    BRange { b: f64 },
    ScalingBound { value: f64 },
    SubcriticalSum { value: f64 },
    /// `b = ∞` branch: `3/a + γ < 1` fails.
    InfiniteBStrict { value: f64 },
    /// `b = ∞` branch: `δ < (2a − 3)/a` fails.
    DeltaUpper { delta: f64, bound: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotANumber => write!(f, "a, b and gamma must be numbers"),
            Violation::ARange { a } => write!(f, "a must lie in (3/2, inf], got {a}"),
            Violation::BRange { b } => write!(f, "b must lie in (1, inf], got {b}"),
            Violation::ScalingBound { value } => {
                write!(f, "3/a+2/b+gamma must be <= 1, got {value}")
            }
            Violation::SubcriticalSum { value } => {
                write!(f, "3/a+2/b must be < 2, got {value}")
            }
            Violation::InfiniteBStrict { value } => {
                write!(f, "for b = inf, 3/a+gamma must be < 1, got {value}")
            }
            Violation::DeltaUpper { delta, bound } => {
                write!(f, "for b = inf, delta = {delta} must be < (2a-3)/a = {bound}")
            }
        }
    }
}

/// Lists every violated hypothesis; empty means admissible.
///
/// `a = ∞` is admissible here; [`derive_exponents`] reports it as unsupported.
pub fn check_admissible(a: f64, b: f64, gamma: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    if a.is_nan() || b.is_nan() || gamma.is_nan() || gamma.is_infinite() {
        out.push(Violation::NotANumber);
        return out;
    }
    if !(a > 1.5) {
        out.push(Violation::ARange { a });
    }
    if !(b > 1.0) {
        out.push(Violation::BRange { b });
    }
    if !out.is_empty() {
        return out;
    }
    if b.is_infinite() {
        let value = 3.0 / a + gamma;
        if !(value < 1.0) {
            out.push(Violation::InfiniteBStrict { value });
        }
        let delta = 1.0 - gamma - 3.0 / a;
        let bound = (2.0 * a - 3.0) / a;
        if !(delta < bound) {
            out.push(Violation::DeltaUpper { delta, bound });
        }
    } else {
        let sum = 3.0 / a + 2.0 / b;
        if !(sum + gamma <= 1.0) {
            out.push(Violation::ScalingBound { value: sum + gamma });
        }
        if !(sum < 2.0) {
            out.push(Violation::SubcriticalSum { value: sum });
        }
    }
    out
}

/// Exponents of the growth-rate construction for one admissible triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSet {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    /// Hölder exponent `p` of the first splitting (`p > 1`).
    pub p_hold: f64,
    /// Integrability exponent `s` (`s > 3`).
    pub s: f64,
    /// Power of `u_ρ⁻` inside `d(t)`; equals `a`.
    pub alpha: f64,
    /// Power of `ρ` inside `d(t)`; at least `a·γ`.
    pub beta: f64,
    /// Outer time exponent `2/(s − 3)`; equals `b/a` for finite `b`.
    pub theta: f64,
    /// Slack `1 − γ − 3/a` of the `b = ∞` branch.
    pub delta: Option<f64>,
}

pub fn derive_exponents(a: f64, b: f64, gamma: f64) -> Result<ExponentSet> {
    let violations = check_admissible(a, b, gamma);
    if !violations.is_empty() {
        return Err(Error::Inadmissible(violations));
    }
    if a.is_infinite() {
        return Err(Error::Unsupported(
            "a = inf degenerates the growth-rate exponents (s -> 3)".into(),
        ));
    }
    let (p_hold, s, delta) = if b.is_infinite() {
        let delta = 1.0 - gamma - 3.0 / a;
        let p = 2.0 * a / (2.0 * a - delta * a - 3.0);
        (p, 3.0 + delta * a, Some(delta))
    } else {
        let denom = 2.0 * a * b - 2.0 * a - 3.0 * b;
        // equivalent to 3/a + 2/b < 2, already checked
        if !(denom > 0.0) {
            return Err(Error::Contract(format!(
                "2ab - 2a - 3b = {denom} must be positive for admissible input"
            )));
        }
        (1.0 + (2.0 * a + 3.0 * b) / denom, 2.0 * a / b + 3.0, None)
    };
    let alpha = s * p_hold / (2.0 * (p_hold - 1.0));
    let beta = (2.0 - p_hold) * s / (2.0 * (p_hold - 1.0));
    let theta = 2.0 / (s - 3.0);
    Ok(ExponentSet {
        a,
        b,
        gamma,
        p_hold,
        s,
        alpha,
        beta,
        theta,
        delta,
    })
}

/// A pair `(x, y)` used in one Hölder or Young step.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatePair {
    pub name: &'static str,
    pub first: f64,
    pub second: f64,
}

impl ConjugatePair {
    /// `|1/x + 1/y − 1|`.
    pub fn defect(&self) -> f64 {
        (1.0 / self.first + 1.0 / self.second - 1.0).abs()
    }
}

/// Every conjugate pair used in the estimate of `∫ u_ρ⁻ u_φ^q / ρ`.
pub fn holder_young_pairs(e: &ExponentSet) -> Vec<ConjugatePair> {
    let p = e.p_hold;
    let s = e.s;
    vec![
        ConjugatePair {
            name: "holder_p",
            first: p / (p - 1.0),
            second: p,
        },
        ConjugatePair {
            name: "young_p",
            first: p / (p - 1.0),
            second: p,
        },
        ConjugatePair {
            name: "holder_s",
            first: s / 2.0,
            second: s / (s - 2.0),
        },
        ConjugatePair {
            name: "holder_inner",
            first: (s - 2.0) / (s - 3.0),
            second: s - 2.0,
        },
        ConjugatePair {
            name: "young_s",
            first: s / 3.0,
            second: s / (s - 3.0),
        },
    ]
}

/// Formats an exponent, printing infinities as `inf`.
pub fn fmt_exponent(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// Parses an exponent; accepts `inf`, `infinity` and `∞`.
pub fn parse_exponent(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    match t.as_str() {
        "inf" | "+inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        _ => t
            .parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| Error::Config(format!("malformed number '{s}'"))),
    }
}

fn json_num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(fmt_exponent(x))
    }
}

impl ExponentSet {
    pub fn to_json(&self) -> Value {
        json!({
            "a": json_num(self.a),
            "b": json_num(self.b),
            "gamma": self.gamma,
            "p": self.p_hold,
            "s": self.s,
            "alpha": self.alpha,
            "beta": self.beta,
            "theta": self.theta,
            "delta": self.delta,
        })
    }
}
