//! Conserved-variable vectors for a single cell.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest system size handled by the solver.
pub const MAX_DIM: usize = 3;

/// Conserved variables of one cell: `(rho, q)`, `(rho, q, E)` or
/// `(alpha rho, alpha rho w)` depending on the owning model.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct State {
    vals: [f64; MAX_DIM],
    len: usize,
}

impl State {
    pub fn new(components: &[f64]) -> Result<Self> {
        if components.is_empty() || components.len() > MAX_DIM {
            return Err(Error::DimensionMismatch {
                expected: MAX_DIM,
                got: components.len(),
            });
        }
        let mut vals = [0.0; MAX_DIM];
        vals[..components.len()].copy_from_slice(components);
        let s = State {
            vals,
            len: components.len(),
        };
        s.check_finite()?;
        Ok(s)
    }

    pub fn two(a: f64, b: f64) -> Self {
        State {
            vals: [a, b, 0.0],
            len: 2,
        }
    }

    pub fn three(a: f64, b: f64, c: f64) -> Self {
        State {
            vals: [a, b, c],
            len: 3,
        }
    }

    pub fn zeros(len: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&len));
        State {
            vals: [0.0; MAX_DIM],
            len,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.vals[..self.len]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.vals[..self.len]
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.as_slice().iter()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite {
                index,
                value: self.vals[index],
            }),
            None => Ok(()),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm_l1(&self) -> f64 {
        self.iter().map(|v| v.abs()).sum()
    }

    /// Spatial mirror `(x, q) -> (-x, -q)`: flips the sign of the momentum.
    pub fn mirrored(&self) -> Self {
        let mut m = *self;
        m.vals[1] = -m.vals[1];
        m
    }

    fn zip_with(self, rhs: State, f: impl Fn(f64, f64) -> f64) -> State {
        debug_assert_eq!(self.len, rhs.len, "state dimension mismatch");
        let mut out = self;
        for i in 0..self.len {
            out.vals[i] = f(self.vals[i], rhs.vals[i]);
        }
        out
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl From<State> for Vec<f64> {
    fn from(s: State) -> Self {
        s.as_slice().to_vec()
    }
}

impl TryFrom<Vec<f64>> for State {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        State::new(&v)
    }
}

impl Index<usize> for State {
    type Output = f64;

    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for State {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.as_mut_slice()[i]
    }
}

impl Add for State {
    type Output = State;

    fn add(self, rhs: State) -> State {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for State {
    type Output = State;

    fn sub(self, rhs: State) -> State {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for State {
    type Output = State;

    fn mul(self, k: f64) -> State {
        let mut out = self;
        for v in out.as_mut_slice() {
            *v *= k;
        }
        out
    }
}

impl Mul<State> for f64 {
    type Output = State;

    fn mul(self, s: State) -> State {
        s * self
    }
}

impl Neg for State {
    type Output = State;

    fn neg(self) -> State {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lengths_and_nan() {
        assert!(State::new(&[]).is_err());
        assert!(State::new(&[1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(matches!(
            State::new(&[1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn json_is_a_plain_array() {
        let s = State::three(1.0, -2.5, 3.0);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, "[1.0,-2.5,3.0]");
        let back: State = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn arithmetic_keeps_dimension() {
        let a = State::two(1.0, 2.0);
        let b = State::two(0.5, -1.0);
        assert_eq!((a + b).as_slice(), &[1.5, 1.0]);
        assert_eq!((a - b).as_slice(), &[0.5, 3.0]);
        assert_eq!((2.0 * a).as_slice(), &[2.0, 4.0]);
        assert_eq!(a.mirrored().as_slice(), &[1.0, -2.0]);
    }
}
