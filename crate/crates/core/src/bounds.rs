//! Trace-based extremal-eigenvalue estimates and the energy bounds built on
//! them.
//!
//! For a symmetric `n×n` matrix with `α = tr(M²)` and `β = tr(M⁴)`,
//! `f(α, β) = sqrt(α/n + sqrt((n−1)/n · (β − α²/n)))` estimates `λ_max(M)`
//! from above: the inner expression is the mean plus `√(n−1)` standard
//! deviations of the eigenvalues of `M²`. Applied to `M⁻¹` it estimates
//! `1/λ_min(M)`, which is directly the upper energy bound.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::gramian::{f_entry, GramianResult, POSITIVITY_TOL};
use crate::spectral::{eig_sym, SpectralDecomposition};
use crate::{log_sum_exp, Error, Magnitude, Result};

/// Radicand slack tolerated before [`f_lam`] reports a contract error.
pub const RADICAND_GUARD: f64 = 1e-9;

/// `(tr(X²), tr(X⁴))` of an `n×n` matrix, held as logarithms together with
/// `ln(tr(X⁴) − tr(X²)²/n)`, the radicand of [`f_lam`] up to the factor
/// `(n−1)/n`.
///
/// The radicand is `n` times the variance of the squared eigenvalues. When the
/// eigenvalues are known it is summed as squared deviations, which stays
/// exact for `c·I` where `β − α²/n` would be pure rounding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePair {
    pub ln_alpha: f64,
    pub ln_beta: f64,
    pub ln_excess: f64,
    pub n: usize,
}

impl TracePair {
    pub fn from_values(alpha: f64, beta: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "must be positive"));
        }
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::Contract(format!("traces must be positive, got α = {alpha}, β = {beta}")));
        }
        let excess = checked_excess(alpha, beta, n)?;
        Ok(TracePair { ln_alpha: alpha.ln(), ln_beta: beta.ln(), ln_excess: excess.ln(), n })
    }

    /// Builds the pair from log traces, forming the excess in log space.
    pub fn from_ln_traces(ln_alpha: f64, ln_beta: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "must be positive"));
        }
        // β − α²/n = β·(1 − r), r = α²/(nβ) ∈ (0, 1]
        let r = (2.0 * ln_alpha - (n as f64).ln() - ln_beta).exp();
        let ln_excess = if r >= 1.0 {
            if r - 1.0 > RADICAND_GUARD {
                return Err(Error::Contract(format!("β − α²/n is negative (α²/(nβ) = {r})")));
            }
            f64::NEG_INFINITY
        } else {
            ln_beta + (-r).ln_1p()
        };
        Ok(TracePair { ln_alpha, ln_beta, ln_excess, n })
    }

    /// Traces of the second and fourth powers from eigenvalue logarithms.
    pub fn from_ln_eigenvalues(ln_eigs: &[f64]) -> Self {
        let n = ln_eigs.len();
        let twice: Vec<f64> = ln_eigs.iter().map(|l| 2.0 * l).collect();
        let four: Vec<f64> = ln_eigs.iter().map(|l| 4.0 * l).collect();
        let top = twice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let y: Vec<f64> = twice.iter().map(|t| (t - top).exp()).collect();
        let mean = y.iter().sum::<f64>() / n as f64;
        let dev: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        TracePair { ln_alpha: log_sum_exp(&twice), ln_beta: log_sum_exp(&four), ln_excess: dev.ln() + 2.0 * top, n }
    }

    pub fn alpha(&self) -> f64 {
        self.ln_alpha.exp()
    }

    pub fn beta(&self) -> f64 {
        self.ln_beta.exp()
    }
}

fn checked_excess(alpha: f64, beta: f64, n: usize) -> Result<f64> {
    let excess = beta - alpha * alpha / n as f64;
    if excess >= 0.0 {
        Ok(excess)
    } else if excess >= -RADICAND_GUARD * beta {
        Ok(0.0)
    } else {
        Err(Error::Contract(format!("β − α²/n = {excess:e} is negative beyond rounding")))
    }
}

/// `f(α, β)` evaluated on plain values.
pub fn f_lam(alpha: f64, beta: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "must be positive"));
    }
    let nf = n as f64;
    let excess = checked_excess(alpha, beta, n)?;
    Ok((alpha / nf + ((nf - 1.0) / nf * excess).sqrt()).sqrt())
}

/// `ln f(α, β)` evaluated in log space.
pub fn ln_f_lam(pair: &TracePair) -> f64 {
    let nf = pair.n as f64;
    let ln_mean = pair.ln_alpha - nf.ln();
    let ln_spread = 0.5 * (((nf - 1.0) / nf).ln() + pair.ln_excess);
    0.5 * crate::log_add_exp(ln_mean, ln_spread)
}

fn eigenvalues_of(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(eig_sym(m)?.eigenvalues().as_slice().to_vec())
}

/// `f(tr(M²), tr(M⁴))` with both traces summed over the spectrum of `M`.
pub fn estimate_lambda_max(m: &DMatrix<f64>) -> Result<f64> {
    let eigs = eigenvalues_of(m)?;
    if eigs.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let ln_abs: Vec<f64> = eigs.iter().map(|x| x.abs().ln()).collect();
    Ok(ln_f_lam(&TracePair::from_ln_eigenvalues(&ln_abs)).exp())
}

/// `1/f(tr(M⁻²), tr(M⁻⁴))`; the inverse traces are spectral sums, so `M` is
/// never inverted densely.
pub fn estimate_lambda_min(m: &DMatrix<f64>) -> Result<f64> {
    let eigs = eigenvalues_of(m)?;
    let scale = eigs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if eigs.iter().any(|x| x.abs() <= POSITIVITY_TOL * scale) {
        return Err(Error::Singular);
    }
    let ln_inv: Vec<f64> = eigs.iter().map(|x| -x.abs().ln()).collect();
    Ok((-ln_f_lam(&TracePair::from_ln_eigenvalues(&ln_inv))).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Estimated,
    ExactSpectrum,
    AnalyticRegime,
    TracePrior,
}

/// Energy bounds for a unit target: `lower = 1/λ_max(G)`, `upper = 1/λ_min(G)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBounds {
    pub lower: Magnitude,
    pub upper: Magnitude,
    pub tf: f64,
    pub method: BoundMethod,
}

fn ln_positive_eigs(result: &GramianResult) -> Result<Vec<f64>> {
    if !result.is_positive() {
        return Err(Error::Uncontrollable {
            min: result.min_eig(),
            max: result.max_eig(),
            m_eigs: result.m_eigs().as_slice().to_vec(),
        });
    }
    Ok(result.m_eigs().iter().map(|x| x.ln() + result.ln_scale()).collect())
}

/// `(tr(M²), tr(M⁴))` from the spectrum of `M`.
pub fn traces(result: &GramianResult) -> TracePair {
    let ln_abs: Vec<f64> = result.m_eigs().iter().map(|x| x.abs().ln() + result.ln_scale()).collect();
    TracePair::from_ln_eigenvalues(&ln_abs)
}

/// `(tr(M⁻²), tr(M⁻⁴))` from the spectrum of `M`.
pub fn inverse_traces(result: &GramianResult) -> Result<TracePair> {
    let ln_inv: Vec<f64> = ln_positive_eigs(result)?.into_iter().map(|l| -l).collect();
    Ok(TracePair::from_ln_eigenvalues(&ln_inv))
}

pub fn energy_bounds_estimated(result: &GramianResult) -> Result<EnergyBounds> {
    let lower = Magnitude::from_ln(-ln_f_lam(&traces(result)));
    let upper = Magnitude::from_ln(ln_f_lam(&inverse_traces(result)?));
    Ok(EnergyBounds { lower, upper, tf: result.tf(), method: BoundMethod::Estimated })
}

pub fn energy_bounds_exact(result: &GramianResult) -> Result<EnergyBounds> {
    let ln = ln_positive_eigs(result)?;
    Ok(EnergyBounds {
        lower: Magnitude::from_ln(-ln[ln.len() - 1]),
        upper: Magnitude::from_ln(-ln[0]),
        tf: result.tf(),
        method: BoundMethod::ExactSpectrum,
    })
}

/// The earlier trace heuristic `λ_max(M) ≈ tr(M)`, i.e. `E̲ ≈ 1/tr(M)`.
pub fn lower_bound_trace_prior(result: &GramianResult) -> Magnitude {
    let m = result.m();
    let ln_diag: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)].ln()).collect();
    Magnitude::from_ln(-(log_sum_exp(&ln_diag) + result.ln_scale()))
}

/// `tr(M²)` and `tr(M⁴)` for a single driver `h`, summed directly over the
/// modes without forming `M`:
///
/// * `tr(M²) = Σ_i Σ_k p_k² p_i² f_ki²`
/// * `tr(M⁴) = Σ_i Σ_l (Σ_k p_k² p_i p_l f_ki f_kl)²`
///
/// with `p = P[h, ·]` and `f_ki = f(λ_k, λ_i, tf)`.
pub fn traces_one_driver_closed_form(spec: &SpectralDecomposition, h: usize, tf: f64) -> Result<TracePair> {
    let n = spec.n();
    if h >= n {
        return Err(Error::param("h", format!("driver {h} out of range for n = {n}")));
    }
    let lam = spec.eigenvalues();
    let p: Vec<f64> = spec.basis().row(h).iter().copied().collect();
    let mut f = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in 0..=i {
            let v = f_entry(lam[k], lam[i], tf)?;
            f[(k, i)] = v;
            f[(i, k)] = v;
        }
    }
    let mut alpha = 0.0;
    for i in 0..n {
        for k in 0..n {
            let t = p[k] * p[i] * f[(k, i)];
            alpha += t * t;
        }
    }
    let mut beta = 0.0;
    for i in 0..n {
        for l in 0..n {
            let inner: f64 = (0..n).map(|k| p[k] * p[k] * f[(k, i)] * f[(k, l)]).sum::<f64>() * p[i] * p[l];
            beta += inner * inner;
        }
    }
    TracePair::from_values(alpha, beta, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gramian::{build_m, DriverSet};

    #[test]
    fn f_lam_identity_and_two_by_two() {
        for n in 1..6 {
            assert_eq!(f_lam(n as f64, n as f64, n).unwrap(), 1.0);
        }
        // diag(1, 2): α = 5, β = 17
        assert_eq!(f_lam(5.0, 17.0, 2).unwrap(), 2.0);
        let ln = ln_f_lam(&TracePair::from_values(5.0, 17.0, 2).unwrap());
        assert!((ln.exp() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn f_lam_guard() {
        // β slightly below α²/n from rounding is clamped
        assert_eq!(f_lam(2.0, 2.0 * (1.0 - 1e-12), 2).unwrap(), 1.0);
        assert!(matches!(f_lam(2.0, 1.0, 2), Err(Error::Contract(_))));
    }

    #[test]
    fn estimates_on_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[1.0, 2.0]));
        assert!((estimate_lambda_max(&m).unwrap() - 2.0).abs() < 1e-15);
        assert!((estimate_lambda_min(&m).unwrap() - 1.0).abs() < 1e-15);
        let c = DMatrix::identity(4, 4) * 3.5;
        assert!((estimate_lambda_max(&c).unwrap() - 3.5).abs() < 1e-14);
        assert!((estimate_lambda_min(&c).unwrap() - 3.5).abs() < 1e-14);
        let singular = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[0.0, 2.0]));
        assert!(matches!(estimate_lambda_min(&singular), Err(Error::Singular)));
    }

    #[test]
    fn one_mode_gramian_bounds() {
        let spec = eig_sym(&DMatrix::from_element(1, 1, 0.0)).unwrap();
        let r = build_m(&spec, &DriverSet::all(1), 2.0).unwrap();
        let ex = energy_bounds_exact(&r).unwrap();
        let es = energy_bounds_estimated(&r).unwrap();
        assert!((ex.lower.value() - 0.5).abs() < 1e-15 && (ex.upper.value() - 0.5).abs() < 1e-15);
        assert!((es.lower.value() - 0.5).abs() < 1e-15 && (es.upper.value() - 0.5).abs() < 1e-15);
        assert!((lower_bound_trace_prior(&r).value() - 0.5).abs() < 1e-15);
        let tr = traces_one_driver_closed_form(&spec, 0, 2.0).unwrap();
        assert!((tr.alpha() - 4.0).abs() < 1e-13 && (tr.beta() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn identity_gramian_prior_is_loose() {
        // A = 0, both nodes driven, tf = 1 ⇒ M = G = I₂
        let spec = eig_sym(&DMatrix::zeros(2, 2)).unwrap();
        let r = build_m(&spec, &DriverSet::all(2), 1.0).unwrap();
        assert!((lower_bound_trace_prior(&r).value() - 0.5).abs() < 1e-15);
        let es = energy_bounds_estimated(&r).unwrap();
        assert!((es.lower.value() - 1.0).abs() < 1e-15);
        assert!((energy_bounds_exact(&r).unwrap().lower.value() - 1.0).abs() < 1e-15);
    }
}
