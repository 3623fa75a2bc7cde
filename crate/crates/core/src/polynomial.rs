//! Bivariate polynomials in monomial form, used as exact test fields.

use crate::Vec2;

/// `sum_t c_t x^a_t y^b_t`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly2 {
    terms: Vec<(f64, u32, u32)>,
}

impl Poly2 {
    pub fn new(terms: Vec<(f64, u32, u32)>) -> Self {
        Self { terms }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![(c, 0, 0)])
    }

    /// Dense polynomial of total degree `degree` with coefficients taken in
    /// graded order (`1, x, y, x^2, xy, y^2, ...`).
    pub fn from_coefficients(degree: u32, coeffs: impl IntoIterator<Item = f64>) -> Self {
        let mut it = coeffs.into_iter();
        let mut terms = Vec::new();
        for total in 0..=degree {
            for b in 0..=total {
                let c = it.next().unwrap_or(0.0);
                terms.push((c, total - b, b));
            }
        }
        Self { terms }
    }

    /// `p(x) q(y)` from univariate coefficients in ascending powers.
    pub fn separable(px: &[f64], qy: &[f64]) -> Self {
        let terms = px
            .iter()
            .enumerate()
            .flat_map(|(a, &ca)| qy.iter().enumerate().map(move |(b, &cb)| (ca * cb, a as u32, b as u32)))
            .filter(|t| t.0 != 0.0)
            .collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[(f64, u32, u32)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|&(_, a, b)| a + b).max().unwrap_or(0)
    }

    pub fn eval(&self, p: &Vec2) -> f64 {
        self.terms
            .iter()
            .map(|&(c, a, b)| c * p.x.powi(a as i32) * p.y.powi(b as i32))
            .sum()
    }

    pub fn dx(&self) -> Self {
        Self::new(
            self.terms
                .iter()
                .filter(|t| t.1 > 0)
                .map(|&(c, a, b)| (c * a as f64, a - 1, b))
                .collect(),
        )
    }

    pub fn dy(&self) -> Self {
        Self::new(
            self.terms
                .iter()
                .filter(|t| t.2 > 0)
                .map(|&(c, a, b)| (c * b as f64, a, b - 1))
                .collect(),
        )
    }

    pub fn scale(&self) -> f64 {
        self.terms.iter().map(|t| t.0.abs()).fold(0.0, f64::max)
    }
}
