//! Closed-form controllability Gramian through the spectrum of `A`.
//!
//! With `A = P Λ Pᵀ` the Gramian is `G = P M Pᵀ`, where
//! `M_ij = q_ij · f(λ_i, λ_j, tf)`, `q_ij = Σ_k P[m_k, i] P[m_k, j]` over the
//! driver rows and `f(λ_i, λ_j, tf) = ∫₀^tf e^{(λ_i+λ_j)t} dt`.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::netgen::rng;
use crate::spectral::{eig_sym, SpectralDecomposition};
use crate::{Error, Result};

/// Below this `|s·tf|` the cubic series replaces `expm1(x)/s`.
pub const SERIES_SWITCH: f64 = 1e-4;
/// Largest `(λi+λj)·tf` accepted by the linear-domain path.
pub const OVERFLOW_CAP: f64 = 300.0;
/// `min(m_eigs) ≤ POSITIVITY_TOL·max(m_eigs)` is treated as uncontrollable.
pub const POSITIVITY_TOL: f64 = 1e-12;
pub const DEFAULT_QUADRATURE_STEPS: usize = 4096;
pub const DEFAULT_SIMULATION_STEPS: usize = 4000;
pub const DEFAULT_CONDITION_CAP: f64 = 1e10;

const DRIVER_STREAM: u64 = 2;

/// `(e^{(λi+λj)tf} − 1)/(λi+λj)`, with limit `tf` at `λi+λj = 0`.
pub fn f_entry(lam_i: f64, lam_j: f64, tf: f64) -> Result<f64> {
    let s = lam_i + lam_j;
    let x = s * tf;
    if x > OVERFLOW_CAP {
        return Err(Error::Range { exponent: x, cap: OVERFLOW_CAP });
    }
    Ok(f_linear(s, tf))
}

fn f_linear(s: f64, tf: f64) -> f64 {
    let x = s * tf;
    if x.abs() < SERIES_SWITCH {
        tf * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0)
    } else {
        x.exp_m1() / s
    }
}

/// `ln f(λi, λj, tf)`, valid for any exponent.
pub fn ln_f_entry(lam_i: f64, lam_j: f64, tf: f64) -> f64 {
    let s = lam_i + lam_j;
    let x = s * tf;
    if x.abs() < SERIES_SWITCH {
        tf.ln() + (x / 2.0 + x * x / 6.0 + x * x * x / 24.0).ln_1p()
    } else if x > 0.0 {
        // e^x − 1 = e^x (1 − e^{−x})
        x + (-(-x).exp_m1()).ln() - s.ln()
    } else {
        (-x.exp_m1()).ln() - (-s).ln()
    }
}

/// `f(λi, λj, tf)·e^{−ln_scale}` without forming the unscaled value.
fn f_scaled(s: f64, tf: f64, ln_scale: f64) -> f64 {
    if ln_scale == 0.0 {
        return f_linear(s, tf);
    }
    let x = s * tf;
    if x.abs() < SERIES_SWITCH {
        f_linear(s, tf) * (-ln_scale).exp()
    } else if x > 0.0 {
        (x - ln_scale).exp() * -(-x).exp_m1() / s
    } else {
        (-ln_scale).exp() * x.exp_m1() / s
    }
}

/// Nodes receiving an input, `m₁ < … < m_d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriverSet {
    n: usize,
    indices: Vec<usize>,
}

impl DriverSet {
    pub fn new(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::param("drivers", "need at least one driver node"));
        }
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::param("drivers", format!("node {} listed twice", w[0])));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::param("drivers", format!("node {bad} out of range for n = {n}")));
        }
        Ok(DriverSet { n, indices })
    }

    pub fn all(n: usize) -> Self {
        DriverSet { n, indices: (0..n).collect() }
    }

    pub fn single(h: usize, n: usize) -> Result<Self> {
        DriverSet::new(n, vec![h])
    }

    /// `count` distinct nodes drawn uniformly with a seeded generator.
    pub fn random(count: usize, n: usize, seed: u64) -> Result<Self> {
        if count == 0 || count > n {
            return Err(Error::param("drivers", format!("count {count} must lie in [1, {n}]")));
        }
        let mut rng = rng(seed, DRIVER_STREAM);
        DriverSet::new(n, sample(&mut rng, n, count).into_vec())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn d(&self) -> usize {
        self.indices.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_all(&self) -> bool {
        self.indices.len() == self.n
    }

    /// `B = [e_{m₁}, …, e_{m_d}]`.
    pub fn input_matrix(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.n, self.d());
        for (k, &m) in self.indices.iter().enumerate() {
            b[(m, k)] = 1.0;
        }
        b
    }
}

/// `M` together with its spectrum. When the horizon pushes entries past the
/// overflow cap, `M` is stored divided by `e^{ln_scale}`.
#[derive(Clone, Debug)]
pub struct GramianResult {
    m: DMatrix<f64>,
    ln_scale: f64,
    tf: f64,
    drivers: DriverSet,
    basis: DMatrix<f64>,
    m_eigs: DVector<f64>,
    m_vectors: DMatrix<f64>,
}

impl GramianResult {
    /// Stored (possibly rescaled) `M`.
    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn drivers(&self) -> &DriverSet {
        &self.drivers
    }

    /// Ascending eigenvalues of the stored `M`.
    pub fn m_eigs(&self) -> &DVector<f64> {
        &self.m_eigs
    }

    pub fn m_vectors(&self) -> &DMatrix<f64> {
        &self.m_vectors
    }

    pub fn ln_scale(&self) -> f64 {
        self.ln_scale
    }

    pub fn log_scale_flag(&self) -> bool {
        self.ln_scale != 0.0
    }

    pub fn max_eig(&self) -> f64 {
        self.m_eigs[self.m_eigs.len() - 1]
    }

    pub fn min_eig(&self) -> f64 {
        self.m_eigs[0]
    }

    /// `max(m_eigs)/min(m_eigs)`; infinite when `M` is numerically singular.
    pub fn cond(&self) -> f64 {
        let (lo, hi) = (self.min_eig(), self.max_eig());
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    pub fn is_positive(&self) -> bool {
        self.min_eig() > POSITIVITY_TOL * self.max_eig()
    }

    fn require_positive(&self) -> Result<()> {
        if self.is_positive() {
            Ok(())
        } else {
            Err(Error::Uncontrollable { min: self.min_eig(), max: self.max_eig(), m_eigs: self.m_eigs.as_slice().to_vec() })
        }
    }

    /// `G = P M Pᵀ` in the linear domain.
    pub fn gramian(&self) -> DMatrix<f64> {
        (&self.basis * &self.m * self.basis.transpose()) * self.ln_scale.exp()
    }
}

/// Builds `M`; fails with a range error when `2λₙ·tf` passes the cap.
pub fn build_m(spec: &SpectralDecomposition, drivers: &DriverSet, tf: f64) -> Result<GramianResult> {
    build(spec, drivers, tf, false)
}

/// Builds `M`, dividing by `f(λₙ, λₙ, tf)` when the exponents pass the cap.
pub fn build_m_scaled(spec: &SpectralDecomposition, drivers: &DriverSet, tf: f64) -> Result<GramianResult> {
    build(spec, drivers, tf, true)
}

fn check_horizon(tf: f64) -> Result<()> {
    if tf > 0.0 && tf.is_finite() {
        Ok(())
    } else {
        Err(Error::param("tf", format!("must be positive and finite, got {tf}")))
    }
}

fn build(spec: &SpectralDecomposition, drivers: &DriverSet, tf: f64, allow_scale: bool) -> Result<GramianResult> {
    check_horizon(tf)?;
    let n = spec.n();
    if drivers.n() != n {
        return Err(Error::param("drivers", format!("driver set is for n = {}, network has n = {n}", drivers.n())));
    }
    let lam = spec.eigenvalues();
    let top = 2.0 * spec.lambda_max() * tf;
    let ln_scale = if top > OVERFLOW_CAP {
        if !allow_scale {
            return Err(Error::Range { exponent: top, cap: OVERFLOW_CAP });
        }
        ln_f_entry(spec.lambda_max(), spec.lambda_max(), tf)
    } else {
        0.0
    };

    let mut m = DMatrix::zeros(n, n);
    if drivers.is_all() {
        for i in 0..n {
            m[(i, i)] = f_scaled(2.0 * lam[i], tf, ln_scale);
        }
    } else {
        let rows = spec.basis().select_rows(drivers.indices());
        let q = rows.transpose() * &rows;
        for j in 0..n {
            for i in 0..=j {
                let v = q[(i, j)] * f_scaled(lam[i] + lam[j], tf, ln_scale);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    let eig = eig_sym(&m)?;
    Ok(GramianResult {
        m,
        ln_scale,
        tf,
        drivers: drivers.clone(),
        basis: spec.basis().clone(),
        m_eigs: eig.eigenvalues().clone(),
        m_vectors: eig.basis().clone(),
    })
}

/// Composite Simpson approximation of `∫₀^tf e^{At} B Bᵀ e^{Aᵀt} dt`, with
/// `e^{At}` taken from a Padé matrix exponential. Test oracle only.
pub fn gramian_quadrature(a: &DMatrix<f64>, drivers: &DriverSet, tf: f64, steps: usize) -> Result<DMatrix<f64>> {
    check_horizon(tf)?;
    if steps < 64 {
        return Err(Error::param("steps", format!("need at least 64, got {steps}")));
    }
    let steps = steps + steps % 2;
    let n = a.nrows();
    let h = tf / steps as f64;
    let step = (a * h).exp();
    let mut phi = DMatrix::<f64>::identity(n, n);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for k in 0..=steps {
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let x = phi.select_columns(drivers.indices());
        acc += (&x * x.transpose()) * w;
        phi = &step * phi;
    }
    Ok(acc * (h / 3.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub energy: f64,
    pub cond: f64,
}

fn check_target(x_f: &DVector<f64>, n: usize) -> Result<()> {
    if x_f.len() != n {
        return Err(Error::Contract(format!("target has length {}, expected {n}", x_f.len())));
    }
    let norm = x_f.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Contract(format!("target must be a unit vector, ‖x_f‖ = {norm}")));
    }
    Ok(())
}

/// `x_fᵀ G⁻¹ x_f` through the eigenpairs of `M`.
pub fn min_energy(result: &GramianResult, x_f: &DVector<f64>) -> Result<EnergyReport> {
    check_target(x_f, result.basis.nrows())?;
    result.require_positive()?;
    let y = result.m_vectors.transpose() * (result.basis.transpose() * x_f);
    let sum: f64 = y.iter().zip(result.m_eigs.iter()).map(|(yi, mu)| yi * yi / mu).sum();
    Ok(EnergyReport { energy: sum * (-result.ln_scale).exp(), cond: result.cond() })
}

/// `u*(t) = Bᵀ e^{Aᵀ(tf−t)} G⁻¹ x_f`, evaluated in modal coordinates.
#[derive(Clone, Debug)]
pub struct OptimalControl {
    lambdas: DVector<f64>,
    driver_rows: DMatrix<f64>,
    modal: DVector<f64>,
    tf: f64,
}

impl OptimalControl {
    pub fn new(spec: &SpectralDecomposition, result: &GramianResult, x_f: &DVector<f64>) -> Result<Self> {
        check_target(x_f, spec.n())?;
        result.require_positive()?;
        let y = result.m_vectors.transpose() * (spec.basis().transpose() * x_f);
        let scaled = DVector::from_iterator(y.len(), y.iter().zip(result.m_eigs.iter()).map(|(yi, mu)| yi / mu));
        let modal = (&result.m_vectors * scaled) * (-result.ln_scale).exp();
        Ok(OptimalControl {
            lambdas: spec.eigenvalues().clone(),
            driver_rows: spec.basis().select_rows(result.drivers.indices()),
            modal,
            tf: result.tf,
        })
    }

    pub fn input_at(&self, t: f64) -> DVector<f64> {
        let decay = DVector::from_iterator(
            self.modal.len(),
            self.lambdas.iter().zip(self.modal.iter()).map(|(l, z)| (l * (self.tf - t)).exp() * z),
        );
        &self.driver_rows * decay
    }
}

pub fn optimal_input(
    spec: &SpectralDecomposition,
    drivers: &DriverSet,
    result: &GramianResult,
    x_f: &DVector<f64>,
    t: f64,
) -> Result<DVector<f64>> {
    if drivers != result.drivers() {
        return Err(Error::Contract("driver set differs from the one used to build M".into()));
    }
    if !(0.0..=result.tf).contains(&t) {
        return Err(Error::param("t", format!("must lie in [0, {}], got {t}", result.tf)));
    }
    Ok(OptimalControl::new(spec, result, x_f)?.input_at(t))
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub endpoint: DVector<f64>,
    /// `∫₀^tf ‖u*(t)‖² dt` by Simpson's rule on the half-step grid.
    pub energy: f64,
    pub min_energy: f64,
    pub cond: f64,
}

/// Integrates `ẋ = A x + B u*(t)` from `x(0) = 0` with classical RK4.
pub fn simulate_trajectory(
    a: &DMatrix<f64>,
    drivers: &DriverSet,
    x_f: &DVector<f64>,
    tf: f64,
    steps: usize,
    cond_cap: f64,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::param("steps", "must be positive"));
    }
    let spec = eig_sym(a)?;
    let result = build_m(&spec, drivers, tf)?;
    result.require_positive()?;
    let cond = result.cond();
    if cond > cond_cap {
        return Err(Error::Conditioning { cond, cap: cond_cap });
    }
    let min = min_energy(&result, x_f)?;
    let control = OptimalControl::new(&spec, &result, x_f)?;

    let n = a.nrows();
    let h = tf / steps as f64;
    // inputs on the half-step grid t_j = j·h/2
    let inputs: Vec<DVector<f64>> = (0..=2 * steps).map(|j| control.input_at(j as f64 * h / 2.0)).collect();
    let drive = |u: &DVector<f64>| {
        let mut v = DVector::zeros(n);
        for (k, &m) in drivers.indices().iter().enumerate() {
            v[m] = u[k];
        }
        v
    };
    let mut x = DVector::<f64>::zeros(n);
    for s in 0..steps {
        let (u0, u1, u2) = (drive(&inputs[2 * s]), drive(&inputs[2 * s + 1]), drive(&inputs[2 * s + 2]));
        let k1 = a * &x + &u0;
        let k2 = a * (&x + &k1 * (h / 2.0)) + &u1;
        let k3 = a * (&x + &k2 * (h / 2.0)) + &u1;
        let k4 = a * (&x + &k3 * h) + &u2;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    let last = inputs.len() - 1;
    let weighted: f64 = inputs
        .iter()
        .enumerate()
        .map(|(j, u)| {
            let w = if j == 0 || j == last {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * u.norm_squared()
        })
        .sum();
    let energy = weighted * (h / 2.0) / 3.0;
    Ok(Trajectory { endpoint: x, energy, min_energy: min.energy, cond })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar(a: f64) -> SpectralDecomposition {
        eig_sym(&DMatrix::from_element(1, 1, a)).unwrap()
    }

    #[test]
    fn f_entry_examples() {
        assert_eq!(f_entry(0.0, 0.0, 2.0).unwrap(), 2.0);
        // ∫₀¹ e^{2t} dt
        assert_relative_eq!(f_entry(1.0, 1.0, 1.0).unwrap(), 3.194528049465325, max_relative = 1e-15);
        assert_relative_eq!(f_entry(-1.0, -1.0, 50.0).unwrap(), 0.5, max_relative = 1e-15);
        assert!(matches!(f_entry(100.0, 100.0, 2.0), Err(Error::Range { .. })));
    }

    #[test]
    fn f_entry_series_branch_is_continuous() {
        for &s in &[9.9e-5, 1.0e-4, 1.01e-4, -9.9e-5, -1.01e-4] {
            let a = f_linear(s, 1.0);
            let reference = if s.abs() < 1e-4 { s.exp_m1() / s } else { 1.0 + s / 2.0 + s * s / 6.0 };
            assert_relative_eq!(a, reference, max_relative = 1e-12);
            assert!(a > 0.0);
        }
    }

    #[test]
    fn ln_f_entry_agrees_in_range() {
        for &(l, tf) in &[(1.3, 2.0), (-0.7, 3.0), (1e-9, 5.0), (0.0, 0.1), (-40.0, 1.0), (90.0, 1.0)] {
            assert_relative_eq!(ln_f_entry(l, l, tf).exp(), f_entry(l, l, tf).unwrap(), max_relative = 1e-13);
        }
        // e^{1000}/10 ⇒ ln = 1000 − ln 10
        assert_relative_eq!(ln_f_entry(5.0, 5.0, 100.0), 1000.0 - 10f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn scalar_gramian() {
        let r = build_m(&scalar(0.0), &DriverSet::all(1), 3.0).unwrap();
        assert_eq!(r.m()[(0, 0)], 3.0);
        let x = DVector::from_element(1, 1.0);
        let r = build_m(&scalar(0.0), &DriverSet::all(1), 2.0).unwrap();
        assert_relative_eq!(min_energy(&r, &x).unwrap().energy, 0.5, max_relative = 1e-15);
        let r = build_m(&scalar(1.0), &DriverSet::all(1), 1.0).unwrap();
        assert_relative_eq!(min_energy(&r, &x).unwrap().energy, 0.31303528549933130, max_relative = 1e-14);
    }

    #[test]
    fn all_drivers_give_diagonal_m() {
        let a = DMatrix::from_row_slice(3, 3, &[-2.0, 1.0, 0.0, 1.0, -3.0, 0.5, 0.0, 0.5, -1.0]);
        let spec = eig_sym(&a).unwrap();
        let r = build_m(&spec, &DriverSet::all(3), 1.5).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(r.m()[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn scaled_path_matches_linear_below_cap() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
        let spec = eig_sym(&a).unwrap();
        let d = DriverSet::single(0, 2).unwrap();
        assert!(matches!(build_m(&spec, &d, 200.0), Err(Error::Range { .. })));
        let big = build_m_scaled(&spec, &d, 200.0).unwrap();
        assert!(big.log_scale_flag());
        let small = build_m_scaled(&spec, &d, 1.0).unwrap();
        assert!(!small.log_scale_flag());
        let all = build_m_scaled(&spec, &DriverSet::all(2), 200.0).unwrap();
        for (i, l) in spec.eigenvalues().iter().enumerate() {
            let ln = all.m()[(i, i)].ln() + all.ln_scale();
            assert_relative_eq!(ln, ln_f_entry(*l, *l, 200.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn quadrature_scalar_and_zero() {
        let q = gramian_quadrature(&DMatrix::from_element(1, 1, 1.0), &DriverSet::all(1), 1.0, 4096).unwrap();
        assert_relative_eq!(q[(0, 0)], (2f64.exp() - 1.0) / 2.0, max_relative = 1e-10);
        let q = gramian_quadrature(&DMatrix::zeros(2, 2), &DriverSet::all(2), 5.0, 64).unwrap();
        assert_relative_eq!(q, DMatrix::identity(2, 2) * 5.0, epsilon = 1e-12);
        assert!(gramian_quadrature(&DMatrix::zeros(2, 2), &DriverSet::all(2), 5.0, 10).is_err());
    }

    #[test]
    fn constant_input_for_trivial_system() {
        let spec = scalar(0.0);
        let d = DriverSet::all(1);
        let r = build_m(&spec, &d, 1.0).unwrap();
        let x = DVector::from_element(1, 1.0);
        for t in [0.0, 0.3, 1.0] {
            assert_relative_eq!(optimal_input(&spec, &d, &r, &x, t).unwrap()[0], 1.0, max_relative = 1e-15);
        }
        assert!(optimal_input(&spec, &d, &r, &x, 1.5).is_err());
        let traj = simulate_trajectory(&DMatrix::zeros(1, 1), &d, &x, 1.0, 100, DEFAULT_CONDITION_CAP).unwrap();
        assert!((traj.endpoint[0] - 1.0).abs() < 1e-8);
        assert!((traj.energy - 1.0).abs() < 1e-8);
    }

    #[test]
    fn energy_needs_unit_target_and_controllability() {
        let r = build_m(&scalar(0.0), &DriverSet::all(1), 1.0).unwrap();
        assert!(matches!(min_energy(&r, &DVector::from_element(1, 2.0)), Err(Error::Contract(_))));
        // block-diagonal A with the driver on one block only
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
        let spec = eig_sym(&a).unwrap();
        let r = build_m(&spec, &DriverSet::single(0, 2).unwrap(), 1.0).unwrap();
        let x = DVector::from_column_slice(&[1.0, 0.0]);
        assert!(matches!(min_energy(&r, &x), Err(Error::Uncontrollable { .. })));
    }

    #[test]
    fn driver_set_validation() {
        assert_eq!(DriverSet::new(5, vec![3, 1]).unwrap().indices(), &[1, 3]);
        assert!(DriverSet::new(5, vec![1, 1]).is_err());
        assert!(DriverSet::new(5, vec![5]).is_err());
        assert!(DriverSet::new(5, vec![]).is_err());
        let r = DriverSet::random(3, 10, 4).unwrap();
        assert_eq!(r, DriverSet::random(3, 10, 4).unwrap());
        assert_eq!(r.d(), 3);
        assert!(DriverSet::random(11, 10, 4).is_err());
    }
}
