use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A strictly positive real stored as its natural logarithm.
///
/// Energy bounds at long horizons reach `e^{±2000}`; all arithmetic on them
/// happens in log space and only the final text rendering leaves it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Magnitude(f64);

impl Magnitude {
    pub const ONE: Magnitude = Magnitude(0.0);

    pub fn from_ln(ln: f64) -> Self {
        Magnitude(ln)
    }

    /// `None` unless `value` is finite and strictly positive.
    pub fn new(value: f64) -> Option<Self> {
        (value.is_finite() && value > 0.0).then(|| Magnitude(value.ln()))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// Linear value; saturates to `0` or `inf` outside the `f64` range.
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn recip(self) -> Self {
        Magnitude(-self.0)
    }

    pub fn powf(self, p: f64) -> Self {
        Magnitude(self.0 * p)
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }

    /// `|self/other − 1|`, evaluated without leaving log space.
    pub fn rel_diff(self, other: Magnitude) -> f64 {
        (self.0 - other.0).exp_m1().abs()
    }
}

impl fmt::Display for Magnitude {
    /// Scientific notation with 17 significant digits. In-range values print
    /// the exact `f64` so that a parser recovers the same bits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value();
        if v.is_normal() && self.0.abs() < 700.0 {
            return write!(f, "{v:.16e}");
        }
        let log10 = self.0 / std::f64::consts::LN_10;
        let mut exp = log10.floor();
        let mut mant = 10f64.powf(log10 - exp);
        if format!("{mant:.16}").starts_with("10") {
            mant /= 10.0;
            exp += 1.0;
        }
        write!(f, "{mant:.16}e{}", exp as i64)
    }
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_faithful_in_range() {
        for v in [1.0, 0.1, 3.0e-200, 7.25e250, 2.0 / 3.0] {
            let m = Magnitude::new(v).unwrap();
            let back: f64 = m.to_string().parse().unwrap();
            // storing ln(v) costs about |ln v|·ε of relative precision
            assert!((back / v - 1.0).abs() < 1e-12, "{v} -> {m}");
            assert_eq!(back.to_bits(), m.value().to_bits());
        }
        assert_eq!(Magnitude::new(0.5).unwrap().to_string(), "5.0000000000000000e-1");
    }

    #[test]
    fn display_out_of_range() {
        let m = Magnitude::from_ln(3000.0);
        assert!(m.to_string().starts_with("7.64620098905"));
        assert!(m.to_string().ends_with("e1302"));
        let tiny = Magnitude::from_ln(-1000.0);
        assert!(tiny.to_string().starts_with("5.0759588975"), "{tiny}");
        assert!(tiny.to_string().ends_with("e-435"));
    }

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let xs = [0.1f64, -2.0, 3.5];
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-14);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_add_exp(-800.0, -801.0) - log_sum_exp(&[-800.0, -801.0])).abs() < 1e-12);
    }
}
