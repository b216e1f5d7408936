use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated power series `a_0 + a_1 x + ... + a_N x^N`.
///
/// Products and exponentials are exact modulo truncation at order `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    coeffs: Vec<f64>,
}

impl PowerSeries {
    /// Builds a series from its coefficients; the order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("power series needs at least one coefficient".into()));
        }
        Ok(PowerSeries { coeffs })
    }

    pub fn zeros(order: usize) -> Self {
        PowerSeries { coeffs: vec![0.0; order + 1] }
    }

    /// Pads with zeros or truncates to the given order.
    pub fn with_order(mut self, order: usize) -> Self {
        self.coeffs.resize(order + 1, 0.0);
        self
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch { left: self.order(), right: other.order() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(PowerSeries { coeffs })
    }

    pub fn scale(&self, k: f64) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|a| k * a).collect() }
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.order();
        let mut out = vec![0.0; n + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs[..=n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(PowerSeries { coeffs: out })
    }

    /// `exp` of a series with zero constant term, from the differential
    /// recurrence `k b_k = Σ_{j=1}^{k} j a_j b_{k-j}`.
    pub fn exp(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 != 0.0 {
            return Err(Error::NonZeroConstantTerm(a0));
        }
        let n = self.order();
        let mut b = vec![0.0; n + 1];
        b[0] = 1.0;
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.coeffs[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Ok(PowerSeries { coeffs: b })
    }
}
