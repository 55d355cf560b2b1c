//! Uniform periodic grids on the circle `R / LZ` and the staggered
//! difference and averaging operators that act between them.
//!
//! Indexing is zero-based throughout. Full node `i` sits at `(i + 1) dx`
//! (so the last full node is `N dx = L`, identified with `0`), half node `i`
//! sits at `(i + 1/2) dx`. Entry `i` of every half-staggered result refers to
//! the half node `(i + 1/2) dx`, which lies between full nodes `i - 1` and `i`
//! (indices taken mod `N`).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which node set a [`Field`] is sampled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Staggering {
    Full,
    Half,
}

impl Staggering {
    pub fn flipped(self) -> Self {
        match self {
            Staggering::Full => Staggering::Half,
            Staggering::Half => Staggering::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid {
    n: usize,
    length: f64,
    dx: f64,
}

impl PeriodicGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("node count must be positive".into()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "circumference must be positive and finite, got {length}"
            )));
        }
        Ok(Self {
            n,
            length,
            dx: length / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Full nodes `x_j = j dx`, `j = 1..N`.
    pub fn full_nodes(&self) -> Vec<f64> {
        (1..=self.n).map(|j| j as f64 * self.dx).collect()
    }

    /// Half nodes `x_{j-1/2} = (j - 1/2) dx`, `j = 1..N`.
    pub fn half_nodes(&self) -> Vec<f64> {
        (1..=self.n).map(|j| (j as f64 - 0.5) * self.dx).collect()
    }

    pub fn nodes(&self, staggering: Staggering) -> Vec<f64> {
        match staggering {
            Staggering::Full => self.full_nodes(),
            Staggering::Half => self.half_nodes(),
        }
    }

    /// Samples `f` on the requested node set.
    pub fn sample(&self, staggering: Staggering, f: impl Fn(f64) -> f64) -> Field {
        Field {
            values: self.nodes(staggering).into_iter().map(f).collect(),
            staggering,
        }
    }

    fn check(&self, f: &Field, expected: Staggering) -> Result<()> {
        if f.staggering != expected {
            return Err(Error::StaggeringMismatch {
                expected,
                found: f.staggering,
            });
        }
        if f.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: f.len(),
            });
        }
        Ok(())
    }

    /// Staggered difference quotient `(T f) / dx`, full -> half, no winding term.
    pub fn apply_t(&self, f: &Field) -> Result<Field> {
        self.check(f, Staggering::Full)?;
        let v = &f.values;
        let n = self.n;
        let inv_dx = 1.0 / self.dx;
        let values = (0..n)
            .map(|i| (v[i] - v[(i + n - 1) % n]) * inv_dx)
            .collect();
        Ok(Field::new(values, Staggering::Half))
    }

    /// Derivative of a circle map stored on the covering space:
    /// `(T q + C e_1) / dx`, where `winding` is `C(q)`, a multiple of `L`.
    pub fn apply_d(&self, q: &Field, winding: f64) -> Result<Field> {
        let mut out = self.apply_t(q)?;
        out.values[0] += winding / self.dx;
        Ok(out)
    }

    /// Second-order average `S f`, full -> half.
    pub fn apply_s(&self, f: &Field) -> Result<Field> {
        self.check(f, Staggering::Full)?;
        let v = &f.values;
        let n = self.n;
        let values = (0..n).map(|i| 0.5 * (v[(i + n - 1) % n] + v[i])).collect();
        Ok(Field::new(values, Staggering::Half))
    }

    /// `T^T g` with the unscaled matrix `T`, half -> full.
    pub fn apply_tt(&self, g: &Field) -> Result<Field> {
        self.check(g, Staggering::Half)?;
        let v = &g.values;
        let n = self.n;
        let values = (0..n).map(|k| v[k] - v[(k + 1) % n]).collect();
        Ok(Field::new(values, Staggering::Full))
    }

    /// `S^T g`, half -> full.
    pub fn apply_st(&self, g: &Field) -> Result<Field> {
        self.check(g, Staggering::Half)?;
        let v = &g.values;
        let n = self.n;
        let values = (0..n).map(|k| 0.5 * (v[k] + v[(k + 1) % n])).collect();
        Ok(Field::new(values, Staggering::Full))
    }

    /// Dense unscaled `T` (rows: half nodes, columns: full nodes).
    pub fn t_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0
            } else if j == (i + n - 1) % n {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Dense `S` (rows: half nodes, columns: full nodes).
    pub fn s_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] += 0.5;
            m[(i, (i + n - 1) % n)] += 0.5;
        }
        m
    }
}

/// Samples on one of the two node sets of a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    staggering: Staggering,
}

impl Field {
    pub fn new(values: Vec<f64>, staggering: Staggering) -> Self {
        Self { values, staggering }
    }

    pub fn full(values: Vec<f64>) -> Self {
        Self::new(values, Staggering::Full)
    }

    pub fn half(values: Vec<f64>) -> Self {
        Self::new(values, Staggering::Half)
    }

    pub fn zeros(n: usize, staggering: Staggering) -> Self {
        Self::new(vec![0.0; n], staggering)
    }

    pub fn constant(n: usize, staggering: Staggering, c: f64) -> Self {
        Self::new(vec![c; n], staggering)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn staggering(&self) -> Staggering {
        self.staggering
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn compatible(&self, other: &Field) -> Result<()> {
        if self.staggering != other.staggering {
            return Err(Error::StaggeringMismatch {
                expected: self.staggering,
                found: other.staggering,
            });
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Field::new(values, self.staggering))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::new(self.values.iter().map(|&a| f(a)).collect(), self.staggering)
    }

    /// Componentwise product.
    pub fn hadamard(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map(|a| a * s)
    }

    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.compatible(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.abs())
            .fold(0.0, |m, v| if v > m || v.is_nan() { v } else { m })
    }

    /// Cyclic shift by one: entry `i` of the result is entry `i - 1` of `self`.
    pub fn rotated(&self) -> Field {
        let mut values = self.values.clone();
        values.rotate_right(1);
        Field::new(values, self.staggering)
    }
}
