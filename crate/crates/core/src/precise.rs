//! Smallest eigenvalue and inverse traces of `M` in MPFR arithmetic.
//!
//! A Gramian driven through one or a few nodes has eigenvalues spread over
//! hundreds of decades, so `λ_min(M)` sits far below the `f64` rounding floor
//! of `λ_max(M)`. Here `M` is rebuilt from the same `f64` spectrum and driver
//! rows, Jacobi-scaled to `K = D⁻¹ M D⁻¹` with `D = diag(M)^{1/2}`,
//! Cholesky-factored and inverted. Long horizons grade `M` by `e^{λ_i tf}`;
//! the scaling removes the grading, so the working precision only has to
//! exceed `log₂ cond(K)` by a guard margin. The dominant eigenvalue of
//! `M⁻¹ = D⁻¹ K⁻¹ D⁻¹` comes from repeated squaring followed by a Rayleigh
//! quotient.

use nalgebra::DMatrix;
use rug::ops::Pow;
use rug::{Assign, Float};

use crate::bounds::TracePair;
use crate::gramian::DriverSet;
use crate::spectral::SpectralDecomposition;
use crate::{Error, Result};

pub const START_BITS: u32 = 256;
pub const MAX_BITS: u32 = 1 << 15;
const GUARD_BITS: f64 = 64.0;
const MAX_SQUARINGS: usize = 64;

/// Natural logarithms of the quantities the upper energy bound needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseSpectrum {
    /// `ln λ_min(M)`.
    pub ln_lambda_min: f64,
    /// `ln tr(M⁻²)`.
    pub ln_trace_inv2: f64,
    /// `ln tr(M⁻⁴)`.
    pub ln_trace_inv4: f64,
    /// `ln(tr(M⁻⁴) − tr(M⁻²)²/n)`, formed at working precision.
    pub ln_excess_inv: f64,
    /// `ln tr(M)`.
    pub ln_trace: f64,
    /// Working precision that settled the result.
    pub bits: u32,
}

impl InverseSpectrum {
    /// `(tr(M⁻²), tr(M⁻⁴))` for `n` modes.
    pub fn inverse_traces(&self, n: usize) -> TracePair {
        TracePair { ln_alpha: self.ln_trace_inv2, ln_beta: self.ln_trace_inv4, ln_excess: self.ln_excess_inv, n }
    }
}

pub fn inverse_spectrum(spec: &SpectralDecomposition, drivers: &DriverSet, tf: f64) -> Result<InverseSpectrum> {
    if drivers.n() != spec.n() {
        return Err(Error::param("drivers", "driver set does not match the network size"));
    }
    let rows = spec.basis().select_rows(drivers.indices());
    inverse_spectrum_modal(spec.eigenvalues().as_slice(), &rows, tf)
}

/// Same as [`inverse_spectrum`] for the modal system `(diag(λ), rows)`:
/// `M_ij = (Σ_k rows[k,i]·rows[k,j]) · f(λ_i, λ_j, tf)`.
pub fn inverse_spectrum_modal(lambdas: &[f64], rows: &DMatrix<f64>, tf: f64) -> Result<InverseSpectrum> {
    let n = lambdas.len();
    if rows.ncols() != n || rows.nrows() == 0 {
        return Err(Error::param("rows", format!("expected d×{n} driver rows, got {}×{}", rows.nrows(), rows.ncols())));
    }
    if !(tf > 0.0 && tf.is_finite()) {
        return Err(Error::param("tf", format!("must be positive and finite, got {tf}")));
    }
    if (0..n).any(|i| rows.column(i).iter().all(|&x| x == 0.0)) {
        return Err(Error::Singular);
    }
    let log2_n = (n as f64).log2();
    let mut bits = START_BITS;
    loop {
        if bits > MAX_BITS {
            return Err(Error::Precision { bits: MAX_BITS });
        }
        let Some((out, log2_cond)) = attempt(lambdas, rows, tf, bits) else {
            bits *= 2;
            continue;
        };
        // relative rounding of the scaled entries moves λ_min by ~n·cond(K)·2^{-bits}
        let needed = log2_cond + GUARD_BITS + 2.0 * log2_n;
        if (bits as f64) < needed {
            bits = (2 * bits).max(((needed / 64.0).ceil() as u32) * 64);
            continue;
        }
        return Ok(out);
    }
}

struct Dense {
    n: usize,
    data: Vec<Float>,
}

impl Dense {
    fn zeros(n: usize, bits: u32) -> Self {
        Dense { n, data: vec![Float::new(bits); n * n] }
    }

    fn at(&self, i: usize, j: usize) -> &Float {
        &self.data[i * self.n + j]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut Float {
        &mut self.data[i * self.n + j]
    }

    fn sum_squares(&self, bits: u32) -> Float {
        let mut acc = Float::new(bits);
        for x in &self.data {
            acc += x.clone().square();
        }
        acc
    }

    fn max_abs(&self, bits: u32) -> Float {
        let mut m = Float::new(bits);
        for x in &self.data {
            if x.clone().abs() > m {
                m.assign(x.clone().abs());
            }
        }
        m
    }

    /// `self·other` for symmetric operands, filled symmetrically.
    fn sym_square(&self, bits: u32) -> Dense {
        let n = self.n;
        let mut out = Dense::zeros(n, bits);
        let mut acc = Float::new(bits);
        for i in 0..n {
            for j in i..n {
                acc.assign(0);
                for k in 0..n {
                    acc += self.at(i, k) * self.at(k, j);
                }
                out.at_mut(i, j).assign(&acc);
                if i != j {
                    out.at_mut(j, i).assign(&acc);
                }
            }
        }
        out
    }
}

fn build(lambdas: &[f64], rows: &DMatrix<f64>, tf: f64, bits: u32) -> Dense {
    let n = lambdas.len();
    let lam: Vec<Float> = lambdas.iter().map(|&l| Float::with_val(bits, l)).collect();
    let t = Float::with_val(bits, tf);
    let em: Vec<Float> = lam.iter().map(|l| Float::with_val(bits, l * &t).exp_m1()).collect();
    let mut m = Dense::zeros(n, bits);
    let mut q = Float::new(bits);
    let mut s = Float::new(bits);
    let mut f = Float::new(bits);
    for i in 0..n {
        for j in i..n {
            q.assign(0);
            for k in 0..rows.nrows() {
                q += Float::with_val(bits, rows[(k, i)]) * rows[(k, j)];
            }
            s.assign(&lam[i] + &lam[j]);
            if s.is_zero() {
                f.assign(&t);
            } else {
                if lambdas[i] * lambdas[j] >= 0.0 {
                    // e^{a+b} − 1 = (e^a − 1) + (e^b − 1) + (e^a − 1)(e^b − 1), all terms of one sign
                    f.assign(&em[i] * &em[j]);
                    f += &em[i];
                    f += &em[j];
                } else {
                    f.assign(&s * &t);
                    f.exp_m1_mut();
                }
                f /= &s;
            }
            let v = m.at_mut(i, j);
            v.assign(&q * &f);
            if i != j {
                let v = v.clone();
                m.at_mut(j, i).assign(v);
            }
        }
    }
    m
}

/// In-place lower Cholesky factor; `false` on a non-positive pivot.
fn cholesky(m: &mut Dense, bits: u32) -> bool {
    let n = m.n;
    let mut acc = Float::new(bits);
    for j in 0..n {
        acc.assign(m.at(j, j));
        for k in 0..j {
            acc -= m.at(j, k).clone().square();
        }
        if acc <= 0 {
            return false;
        }
        acc.sqrt_mut();
        m.at_mut(j, j).assign(&acc);
        let pivot = acc.clone();
        for i in (j + 1)..n {
            acc.assign(m.at(i, j));
            for k in 0..j {
                acc -= m.at(i, k) * m.at(j, k);
            }
            acc /= &pivot;
            m.at_mut(i, j).assign(&acc);
        }
    }
    true
}

/// Returns the spectrum and an upper bound on `log₂ cond(K)`.
fn attempt(lambdas: &[f64], rows: &DMatrix<f64>, tf: f64, bits: u32) -> Option<(InverseSpectrum, f64)> {
    let n = lambdas.len();
    let mut l = build(lambdas, rows, tf, bits);
    let mut trace = Float::new(bits);
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        trace += l.at(i, i);
        scale.push(l.at(i, i).clone().sqrt());
    }
    for i in 0..n {
        for j in 0..n {
            let v = l.at_mut(i, j);
            *v /= &scale[i];
            *v /= &scale[j];
        }
    }
    if !cholesky(&mut l, bits) {
        return None;
    }

    // X = L⁻¹, lower triangular
    let mut x = Dense::zeros(n, bits);
    let mut acc = Float::new(bits);
    for j in 0..n {
        x.at_mut(j, j).assign(1.0 / l.at(j, j).clone());
        for i in (j + 1)..n {
            acc.assign(0);
            for k in j..i {
                acc += l.at(i, k) * x.at(k, j);
            }
            acc /= l.at(i, i);
            x.at_mut(i, j).assign(-acc.clone());
        }
    }
    // cond(K) ≤ tr(K)·tr(K⁻¹) = n·‖X‖²_F
    let log2_cond = (x.sum_squares(bits) * n as u32).log2().to_f64();

    // M⁻¹ = D⁻¹ Xᵀ X D⁻¹
    let mut inv = Dense::zeros(n, bits);
    for i in 0..n {
        for j in i..n {
            acc.assign(0);
            for k in j..n {
                acc += x.at(k, i) * x.at(k, j);
            }
            acc /= &scale[i];
            acc /= &scale[j];
            inv.at_mut(i, j).assign(&acc);
            if i != j {
                inv.at_mut(j, i).assign(&acc);
            }
        }
    }
    let inv2 = inv.sym_square(bits);
    let trace_inv2 = inv.sum_squares(bits);
    let trace_inv4 = inv2.sum_squares(bits);

    let mut excess = trace_inv2.clone().square() / n as u32;
    excess = Float::with_val(bits, &trace_inv4 - &excess);
    let ln_excess_inv = if excess > 0 { excess.ln().to_f64() } else { f64::NEG_INFINITY };

    let top = dominant_eigenvalue(&inv, inv2, bits);
    if top <= 0 {
        return None;
    }
    let out = InverseSpectrum {
        ln_lambda_min: -top.ln().to_f64(),
        ln_trace_inv2: trace_inv2.ln().to_f64(),
        ln_trace_inv4: trace_inv4.ln().to_f64(),
        ln_excess_inv,
        ln_trace: trace.ln().to_f64(),
        bits,
    };
    Some((out, log2_cond))
}

/// `λ_max(inv)` for symmetric positive definite `inv`, given `inv²`.
fn dominant_eigenvalue(inv: &Dense, mut power: Dense, bits: u32) -> Float {
    let n = inv.n;
    let tol = Float::with_val(bits, 2).pow(-80i32);
    let mut previous: Option<Float> = None;
    let mut rq = Float::new(bits);
    for _ in 0..MAX_SQUARINGS {
        let scale = power.max_abs(bits);
        for x in &mut power.data {
            *x /= &scale;
        }
        // heaviest column of a high power approximates the top eigenvector
        let mut best = 0;
        let mut best_norm = Float::new(bits);
        for j in 0..n {
            let mut norm = Float::new(bits);
            for i in 0..n {
                norm += power.at(i, j).clone().square();
            }
            if norm > best_norm {
                best_norm = norm;
                best = j;
            }
        }
        let v: Vec<&Float> = (0..n).map(|i| power.at(i, best)).collect();
        let mut num = Float::new(bits);
        for i in 0..n {
            let mut row = Float::new(bits);
            for (k, vk) in v.iter().enumerate() {
                row += inv.at(i, k) * *vk;
            }
            num += row * v[i];
        }
        rq.assign(num / &best_norm);
        if let Some(prev) = &previous {
            let change = Float::with_val(bits, &rq - prev).abs() / &rq;
            if change < tol {
                break;
            }
        }
        previous = Some(rq.clone());
        power = power.sym_square(bits);
    }
    rq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gramian::build_m;
    use crate::spectral::eig_sym;

    const LAMBDAS: [f64; 6] = [-3.5, -2.25, -1.0, -0.5, 0.75, 1.5];
    const ROW: [f64; 6] = [0.5, 0.25, -0.375, 0.625, 0.125, 0.5];

    // Reference values from a 500-digit symmetric eigensolver on the same M.
    #[test]
    fn matches_high_precision_reference() {
        let rows = DMatrix::from_row_slice(1, 6, &ROW);
        let cases = [
            (0.001, -98.038374114429778372, 196.07674822885955675, 392.15349645771911349),
            (1.0, -22.781366958592131092, 45.562736757170007752, 91.125467834376589187),
            (20.0, -10.346394165427545073, 20.693120398635129005, 41.385576771095073865),
        ];
        for (tf, ln_min, ln_t2, ln_t4) in cases {
            let out = inverse_spectrum_modal(&LAMBDAS, &rows, tf).unwrap();
            assert!((out.ln_lambda_min - ln_min).abs() < 1e-12 * ln_min.abs(), "tf={tf}: {out:?}");
            assert!((out.ln_trace_inv2 - ln_t2).abs() < 1e-12 * ln_t2.abs());
            assert!((out.ln_trace_inv4 - ln_t4).abs() < 1e-12 * ln_t4.abs());
        }
    }

    #[test]
    fn agrees_with_f64_on_well_conditioned_gramian() {
        let a = DMatrix::from_row_slice(3, 3, &[-2.0, 0.7, 0.2, 0.7, -1.5, 0.4, 0.2, 0.4, -1.0]);
        let spec = eig_sym(&a).unwrap();
        let drivers = DriverSet::new(3, vec![0, 2]).unwrap();
        let exact = build_m(&spec, &drivers, 0.8).unwrap();
        let out = inverse_spectrum(&spec, &drivers, 0.8).unwrap();
        assert!((out.ln_lambda_min.exp() / exact.min_eig() - 1.0).abs() < 1e-10);
        let t2: f64 = exact.m_eigs().iter().map(|m| m.powi(-2)).sum();
        assert!((out.ln_trace_inv2.exp() / t2 - 1.0).abs() < 1e-10);
        assert_eq!(out.bits, START_BITS);
    }

    #[test]
    fn uncontrollable_mode_is_singular() {
        let rows = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.5]);
        assert!(matches!(inverse_spectrum_modal(&[-1.0, -2.0, -3.0], &rows, 1.0), Err(Error::Singular)));
        // repeated eigenvalue with one input: rank-deficient without an exact zero
        let rows = DMatrix::from_row_slice(1, 2, &[0.6, 0.8]);
        assert!(matches!(inverse_spectrum_modal(&[-1.0, -1.0], &rows, 1.0), Err(Error::Precision { .. })));
    }
}
