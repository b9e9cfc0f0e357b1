use std::fmt;

use crate::scalar::Scalar;

/// `P(t) = Σ ρ_r t^r`; trailing zero coefficients are trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn one() -> Self {
        Self::new(vec![S::one()])
    }

    /// `coef * t^power`.
    pub fn monomial(power: usize, coef: S) -> Self {
        let mut c = vec![S::zero(); power + 1];
        c[power] = coef;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, r: usize) -> S {
        self.coeffs.get(r).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Least power with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn degree(&self) -> Option<usize> {
        (!self.coeffs.is_empty()).then(|| self.coeffs.len() - 1)
    }

    /// `|P| = Σ |ρ_r|`.
    pub fn abs_sum(&self) -> S {
        self.coeffs.iter().fold(S::zero(), |acc, c| acc + c.abs())
    }

    pub fn scaled(&self, s: &S) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// Nonzero `(power, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &S)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }
}

impl<S: Scalar> fmt::Display for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (r, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match r {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{r}")?,
            }
        }
        Ok(())
    }
}
