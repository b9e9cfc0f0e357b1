//! Finitely supported coefficient vectors.

use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::Scalar;

/// Coordinate system of a [`FinVector`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    /// Keys are basis enumeration numbers: `x = Σ x_i e_i`.
    E,
    /// Keys are construction positions: `x = Σ z_j u_j`.
    U,
    /// Keys are orbit positions: `x = Σ y_j T^j u_0`.
    Gamma,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::E => "e",
            Frame::U => "u",
            Frame::Gamma => "gamma",
        })
    }
}

/// Sparse vector; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct FinVector<S> {
    frame: Frame,
    coords: BTreeMap<u64, S>,
}

impl<S: Scalar> FinVector<S> {
    pub fn zero(frame: Frame) -> Self {
        FinVector { frame, coords: BTreeMap::new() }
    }

    pub fn unit(frame: Frame, key: u64) -> Self {
        Self::single(frame, key, S::one())
    }

    pub fn single(frame: Frame, key: u64, coef: S) -> Self {
        let mut v = Self::zero(frame);
        v.add_at(key, coef);
        v
    }

    pub fn from_pairs(frame: Frame, pairs: impl IntoIterator<Item = (u64, S)>) -> Self {
        let mut v = Self::zero(frame);
        for (k, c) in pairs {
            v.add_at(k, c);
        }
        v
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn get(&self, key: u64) -> S {
        self.coords.get(&key).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &S)> + '_ {
        self.coords.iter().map(|(k, v)| (*k, v))
    }

    pub fn keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.coords.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn min_key(&self) -> Option<u64> {
        self.coords.keys().next().copied()
    }

    pub fn max_key(&self) -> Option<u64> {
        self.coords.keys().next_back().copied()
    }

    pub fn add_at(&mut self, key: u64, coef: S) {
        if coef.is_zero() {
            return;
        }
        match self.coords.get_mut(&key) {
            Some(c) => {
                let sum = c.clone() + coef;
                if sum.is_zero() {
                    self.coords.remove(&key);
                } else {
                    *c = sum;
                }
            }
            None => {
                self.coords.insert(key, coef);
            }
        }
    }

    /// `self += coef * other`.
    pub fn axpy(&mut self, coef: &S, other: &FinVector<S>) {
        assert_eq!(self.frame, other.frame, "frame mismatch in axpy");
        if coef.is_zero() {
            return;
        }
        for (k, c) in other.iter() {
            self.add_at(k, coef.clone() * c.clone());
        }
    }

    pub fn scaled(&self, coef: &S) -> Self {
        let mut out = Self::zero(self.frame);
        out.axpy(coef, self);
        out
    }

    pub fn sub(&self, other: &FinVector<S>) -> Self {
        let mut out = self.clone();
        out.axpy(&-S::one(), other);
        out
    }

    pub fn add(&self, other: &FinVector<S>) -> Self {
        let mut out = self.clone();
        out.axpy(&S::one(), other);
        out
    }

    /// Keeps only coordinates whose key satisfies `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(u64) -> bool) -> Self {
        FinVector {
            frame: self.frame,
            coords: self.coords.iter().filter(|(k, _)| keep(**k)).map(|(k, v)| (*k, v.clone())).collect(),
        }
    }

    /// Sum of absolute coefficients.
    pub fn l1(&self) -> S {
        self.coords.values().fold(S::zero(), |acc, c| acc + c.abs())
    }
}

impl<S: Scalar> fmt::Display for FinVector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:", self.frame)?;
        for (i, (k, c)) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, " ({k}: {c})")?;
        }
        f.write_str("]")
    }
}
