use serde::{Deserialize, Serialize};

/// Polynomial in the edge flow, constant term first.
///
/// Latency, variance and standard-deviation functions all use this type.
/// With nonnegative coefficients the function is nonnegative, nondecreasing
/// and convex on `[0, inf)`, and its antiderivative is again a polynomial,
/// which is what the potential-based solver relies on.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostPoly {
    coeffs: Vec<f64>,
}

impl CostPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `a + b * x`
    pub fn affine(a: f64, b: f64) -> Self {
        Self { coeffs: vec![a, b] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Highest index with a nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|&c| c >= 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * x + c * i as f64)
    }

    /// Exact antiderivative evaluated at `x`, anchored at zero.
    pub fn integral(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * x + c / (i + 1) as f64)
            * x
    }

    /// `self + factor * other`, coefficientwise.
    pub fn add_scaled(&self, other: &CostPoly, factor: f64) -> CostPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or(0.0)
                    + factor * other.coeffs.get(i).copied().unwrap_or(0.0)
            })
            .collect();
        CostPoly { coeffs }
    }
}

impl From<Vec<f64>> for CostPoly {
    fn from(coeffs: Vec<f64>) -> Self {
        Self::new(coeffs)
    }
}
