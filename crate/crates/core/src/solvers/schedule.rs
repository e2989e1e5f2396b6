//! Step-size rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be >= 0 and finite, got {v}")));
    }
    Ok(())
}

fn horizon(t: usize) -> Result<f64> {
    if t == 0 {
        return Err(Error::invalid("horizon T must be at least 1"));
    }
    Ok(t as f64)
}

/// Extragradient, strongly-convex-strongly-concave:
/// `min{1/(2ℓ√τ₀), ξ̲₀/(2μ)}`.
pub fn rceg_scsc(ell: f64, mu: f64, tau0: f64, xi_lower0: f64) -> Result<f64> {
    positive("ell", ell)?;
    positive("mu", mu)?;
    check_tau(tau0)?;
    check_xi_lower(xi_lower0)?;
    Ok((1.0 / (2.0 * ell * tau0.sqrt())).min(xi_lower0 / (2.0 * mu)))
}

/// Stochastic extragradient, strongly-convex-strongly-concave:
/// `min{1/(24ℓ√τ₀), ξ̲₀/(2μ), 2(log T + log(μ²D₀/σ²))/(μT)}`.
///
/// The last branch is dropped when its logarithm is not positive, which
/// includes `σ = 0`.
pub fn srceg_scsc(ell: f64, mu: f64, tau0: f64, xi_lower0: f64, t: usize, d0: f64, sigma: f64) -> Result<f64> {
    positive("ell", ell)?;
    positive("mu", mu)?;
    check_tau(tau0)?;
    check_xi_lower(xi_lower0)?;
    positive("D0", d0)?;
    nonnegative("sigma", sigma)?;
    let big_t = horizon(t)?;
    let base = (1.0 / (24.0 * ell * tau0.sqrt())).min(xi_lower0 / (2.0 * mu));
    if sigma == 0.0 {
        return Ok(base);
    }
    let log_term = big_t.ln() + (mu * mu * d0 / (sigma * sigma)).ln();
    if log_term <= 0.0 || !log_term.is_finite() {
        return Ok(base);
    }
    Ok(base.min(2.0 * log_term / (mu * big_t)))
}

/// Stochastic extragradient, convex-concave:
/// `min{1/(4ℓ√τ₀), (1/σ)√(D₀/(ξ̄₀T))}`.
pub fn srceg_cc(ell: f64, tau0: f64, xi_upper0: f64, t: usize, d0: f64, sigma: f64) -> Result<f64> {
    positive("ell", ell)?;
    check_tau(tau0)?;
    check_xi_upper(xi_upper0)?;
    positive("D0", d0)?;
    nonnegative("sigma", sigma)?;
    let big_t = horizon(t)?;
    let base = 1.0 / (4.0 * ell * tau0.sqrt());
    if sigma == 0.0 {
        return Ok(base);
    }
    Ok(base.min((d0 / (xi_upper0 * big_t)).sqrt() / sigma))
}

/// Gradient descent ascent, strongly-convex-strongly-concave:
/// `(1/μ)·min{1, 2/t}`.
pub fn rgda_scsc(mu: f64, t: usize) -> Result<f64> {
    positive("mu", mu)?;
    if t <= 2 {
        return Ok(1.0 / mu);
    }
    Ok(2.0 / (mu * t as f64))
}

/// Gradient descent ascent, convex-concave: `(1/L)√(D₀/(2ξ̄₀T))`.
pub fn rgda_cc(big_l: f64, t: usize, d0: f64, xi_upper0: f64) -> Result<f64> {
    positive("L", big_l)?;
    positive("D0", d0)?;
    check_xi_upper(xi_upper0)?;
    let big_t = horizon(t)?;
    Ok((d0 / (2.0 * xi_upper0 * big_t)).sqrt() / big_l)
}

/// Stochastic gradient descent ascent, convex-concave:
/// `½√(D₀/(ξ̄₀(L² + σ²)T))`.
pub fn srgda_cc(big_l: f64, sigma: f64, t: usize, d0: f64, xi_upper0: f64) -> Result<f64> {
    positive("L", big_l)?;
    nonnegative("sigma", sigma)?;
    positive("D0", d0)?;
    check_xi_upper(xi_upper0)?;
    let big_t = horizon(t)?;
    Ok(0.5 * (d0 / (xi_upper0 * (big_l * big_l + sigma * sigma) * big_t)).sqrt())
}

/// `min{1/(2ℓ), a/t}`, with `t = 0` taking the first branch.
pub fn practical(ell: f64, a: f64, t: usize) -> Result<f64> {
    positive("ell", ell)?;
    positive("a", a)?;
    let first = 1.0 / (2.0 * ell);
    if t == 0 {
        return Ok(first);
    }
    Ok(first.min(a / t as f64))
}

fn check_tau(tau0: f64) -> Result<()> {
    if !(tau0 >= 1.0) || !tau0.is_finite() {
        return Err(Error::invalid(format!("tau0 must be finite and >= 1, got {tau0}")));
    }
    Ok(())
}

fn check_xi_lower(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::invalid(format!("xi_lower0 must lie in (0, 1], got {xi}")));
    }
    Ok(())
}

fn check_xi_upper(xi: f64) -> Result<()> {
    if !(xi >= 1.0) || !xi.is_finite() {
        return Err(Error::invalid(format!("xi_upper0 must be finite and >= 1, got {xi}")));
    }
    Ok(())
}

/// Step size as a function of the iteration index `t` (0-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    Constant {
        eta: f64,
    },
    RgdaScsc {
        mu: f64,
    },
    Practical {
        ell: f64,
        a: f64,
    },
    /// `table[t]`, repeating the last entry once the table runs out.
    Explicit {
        table: Vec<f64>,
    },
}

impl StepSchedule {
    pub fn constant(eta: f64) -> Self {
        StepSchedule::Constant { eta }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StepSchedule::Constant { eta } => positive("eta", *eta),
            StepSchedule::RgdaScsc { mu } => positive("mu", *mu),
            StepSchedule::Practical { ell, a } => {
                positive("ell", *ell)?;
                positive("a", *a)
            }
            StepSchedule::Explicit { table } => {
                if table.is_empty() {
                    return Err(Error::invalid("explicit step table is empty"));
                }
                table.iter().try_for_each(|&e| positive("eta", e))
            }
        }
    }

    pub fn eta(&self, t: usize) -> Result<f64> {
        match self {
            StepSchedule::Constant { eta } => {
                positive("eta", *eta)?;
                Ok(*eta)
            }
            StepSchedule::RgdaScsc { mu } => rgda_scsc(*mu, t),
            StepSchedule::Practical { ell, a } => practical(*ell, *a, t),
            StepSchedule::Explicit { table } => {
                let eta =
                    *table.get(t).or(table.last()).ok_or_else(|| Error::invalid("explicit step table is empty"))?;
                positive("eta", eta)?;
                Ok(eta)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            StepSchedule::Constant { eta } => format!("constant(eta={eta})"),
            StepSchedule::RgdaScsc { mu } => format!("rgda_scsc(mu={mu})"),
            StepSchedule::Practical { ell, a } => format!("practical(ell={ell},a={a})"),
            StepSchedule::Explicit { table } => format!("explicit(len={})", table.len()),
        }
    }
}
