//! Clebsch phase space `(q, p)`: lifting of initial data, the discrete
//! momentum map `J(q, p) = D q . S p`, and the staggered jet of `u`.

use crate::error::{Error, Result};
use crate::grid::{Field, PeriodicGrid, Staggering};

/// A point of the lifted phase space.
///
/// `q` is a circle map stored on the covering space (never reduced mod `L`);
/// `winding` is `C(q)`, fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ClebschState {
    q: Field,
    p: Field,
    winding: f64,
}

impl ClebschState {
    pub fn new(grid: &PeriodicGrid, q: Field, p: Field, winding: f64) -> Result<Self> {
        for f in [&q, &p] {
            if f.staggering() != Staggering::Full {
                return Err(Error::StaggeringMismatch {
                    expected: Staggering::Full,
                    found: f.staggering(),
                });
            }
            if f.len() != grid.n() {
                return Err(Error::LengthMismatch {
                    expected: grid.n(),
                    found: f.len(),
                });
            }
        }
        let turns = winding / grid.length();
        if !turns.is_finite() || (turns - turns.round()).abs() > 1e-12 {
            return Err(Error::InvalidWinding {
                winding,
                length: grid.length(),
            });
        }
        Ok(Self { q, p, winding })
    }

    pub fn q(&self) -> &Field {
        &self.q
    }

    pub fn p(&self) -> &Field {
        &self.p
    }

    pub fn winding(&self) -> f64 {
        self.winding
    }

    /// Flat packing `(q_1..q_N, p_1..p_N)`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(2 * self.q.len());
        z.extend_from_slice(self.q.values());
        z.extend_from_slice(self.p.values());
        z
    }

    /// Inverse of [`ClebschState::to_flat`]; the winding constant is carried
    /// over verbatim.
    pub fn from_flat(grid: &PeriodicGrid, z: &[f64], winding: f64) -> Result<Self> {
        let n = grid.n();
        if z.len() != 2 * n {
            return Err(Error::LengthMismatch {
                expected: 2 * n,
                found: z.len(),
            });
        }
        Self::new(
            grid,
            Field::full(z[..n].to_vec()),
            Field::full(z[n..].to_vec()),
            winding,
        )
    }
}

/// Identity lift: `q = (dx, 2dx, .., N dx)`, `p = u0`, `C = L`.
pub fn lift(grid: &PeriodicGrid, u0: &Field) -> Result<ClebschState> {
    ClebschState::new(
        grid,
        Field::full(grid.full_nodes()),
        u0.clone(),
        grid.length(),
    )
}

/// `J(q, p) = D q . S p`, on the half grid.
pub fn momentum_map(grid: &PeriodicGrid, state: &ClebschState) -> Result<Field> {
    let qx = grid.apply_d(&state.q, state.winding)?;
    let sp = grid.apply_s(&state.p)?;
    qx.hadamard(&sp)
}

/// Approximations of `u, u_x, .., u_{x^K}`; even rows on the half grid, odd
/// rows on the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JetTable {
    rows: Vec<Field>,
}

impl JetTable {
    /// Wraps rows after checking the Half/Full alternation.
    pub fn from_rows(rows: Vec<Field>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::JetShape { row: 0 });
        }
        let n = rows[0].len();
        for (k, row) in rows.iter().enumerate() {
            if row.staggering() != jet_row_staggering(k) {
                return Err(Error::JetShape { row: k });
            }
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Field] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &Field {
        &self.rows[k]
    }

    /// Highest derivative order `K`.
    pub fn depth(&self) -> usize {
        self.rows.len() - 1
    }
}

pub fn jet_row_staggering(k: usize) -> Staggering {
    if k % 2 == 0 {
        Staggering::Half
    } else {
        Staggering::Full
    }
}

/// Jet of depth `depth` built from the momentum map of `state`.
pub fn jet(grid: &PeriodicGrid, state: &ClebschState, depth: usize) -> Result<JetTable> {
    jet_from_u(grid, momentum_map(grid, state)?, depth)
}

/// Jet recursion started from a half-staggered `u`: odd rows are
/// `-T^T(prev)/dx`, even rows `T(prev)/dx`.
pub fn jet_from_u(grid: &PeriodicGrid, u: Field, depth: usize) -> Result<JetTable> {
    let inv_dx = 1.0 / grid.dx();
    let mut rows = Vec::with_capacity(depth + 1);
    rows.push(u);
    for k in 1..=depth {
        let prev = &rows[k - 1];
        let next = if k % 2 == 1 {
            grid.apply_tt(prev)?.scale(-inv_dx)
        } else {
            grid.apply_t(prev)?
        };
        rows.push(next);
    }
    JetTable::from_rows(rows)
}

/// Pulls per-row cotangents back to a single cotangent for row 0 by running
/// the transposed recursion in reverse.
pub fn jet_adjoint_accumulate(grid: &PeriodicGrid, jet_gradients: &JetTable) -> Result<Field> {
    let inv_dx = 1.0 / grid.dx();
    let rows = jet_gradients.rows();
    let mut acc = rows[rows.len() - 1].clone();
    for k in (1..rows.len()).rev() {
        // adjoint of row k = A_k(row k-1)
        let pulled = if k % 2 == 1 {
            grid.apply_t(&acc)?.scale(-1.0)
        } else {
            grid.apply_tt(&acc)?.scale(inv_dx)
        };
        acc = rows[k - 1].add(&pulled)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(n: usize, l: f64) -> PeriodicGrid {
        PeriodicGrid::new(n, l).unwrap()
    }

    fn random_state(g: &PeriodicGrid, rng: &mut ChaCha8Rng) -> ClebschState {
        let q = Field::full(
            g.full_nodes()
                .iter()
                .map(|x| x + 0.2 * g.dx() * rng.gen_range(-1.0..1.0))
                .collect(),
        );
        let p = Field::full((0..g.n()).map(|_| rng.gen_range(0.5..1.5)).collect());
        ClebschState::new(g, q, p, g.length()).unwrap()
    }

    #[test]
    fn lift_properties() {
        let g = grid(16, 8.0);
        let u0 = g.sample(Staggering::Full, |x| 1.0 + 0.5 * (2.0 * PI * x / 8.0).cos());
        let s = lift(&g, &u0).unwrap();
        assert_eq!(s.winding(), 8.0);
        let d = g.apply_d(s.q(), s.winding()).unwrap();
        assert!(d.values().iter().all(|v| (v - 1.0).abs() < 1e-13));
        let j = momentum_map(&g, &s).unwrap();
        let avg = g.apply_s(&u0).unwrap();
        assert!(j.sub(&avg).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn lift_of_constant_is_fixed() {
        let g = grid(10, 8.0);
        let s = lift(&g, &Field::constant(10, Staggering::Full, 1.0)).unwrap();
        let j = momentum_map(&g, &s).unwrap();
        assert!(j.values().iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn rejects_bad_winding_and_shapes() {
        let g = grid(4, 2.0);
        let q = Field::full(g.full_nodes());
        let p = Field::constant(4, Staggering::Full, 1.0);
        assert!(matches!(
            ClebschState::new(&g, q.clone(), p.clone(), 1.0),
            Err(Error::InvalidWinding { .. })
        ));
        assert!(ClebschState::new(&g, q.clone(), p.clone(), -4.0).is_ok());
        assert!(ClebschState::new(&g, q, Field::constant(4, Staggering::Half, 1.0), 2.0).is_err());
        assert!(ClebschState::from_flat(&g, &[0.0; 7], 2.0).is_err());
    }

    #[test]
    fn flat_packing_is_q_then_p() {
        let g = grid(3, 3.0);
        let s = ClebschState::new(
            &g,
            Field::full(vec![1.0, 2.0, 3.0]),
            Field::full(vec![4.0, 5.0, 6.0]),
            3.0,
        )
        .unwrap();
        let z = s.to_flat();
        assert_eq!(z, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(ClebschState::from_flat(&g, &z, 3.0).unwrap(), s);
    }

    #[test]
    fn momentum_map_bilinear_and_dense() {
        let g = grid(8, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_state(&g, &mut rng);
        let j = momentum_map(&g, &s).unwrap();

        let doubled = ClebschState::new(&g, s.q().clone(), s.p().scale(2.0), s.winding()).unwrap();
        let j2 = momentum_map(&g, &doubled).unwrap();
        assert!(j2.sub(&j.scale(2.0)).unwrap().max_abs() < 1e-13);

        let q = DVector::from_column_slice(s.q().values());
        let p = DVector::from_column_slice(s.p().values());
        let mut e1 = DVector::zeros(8);
        e1[0] = s.winding();
        let dq = (g.t_matrix() * q + e1) / g.dx();
        let sp = g.s_matrix() * p;
        let dense = dq.component_mul(&sp);
        for (a, b) in j.values().iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-14 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn momentum_map_linear_in_q_and_winding() {
        let g = grid(6, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_state(&g, &mut rng);
        let b_q = Field::full((0..6).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let b = ClebschState::new(&g, b_q, a.p().clone(), 2.0).unwrap();
        let sum = ClebschState::new(&g, a.q().add(b.q()).unwrap(), a.p().clone(), 4.0).unwrap();
        let lhs = momentum_map(&g, &sum).unwrap();
        let rhs = momentum_map(&g, &a)
            .unwrap()
            .add(&momentum_map(&g, &b).unwrap())
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn jet_of_constant() {
        let g = grid(12, 8.0);
        let s = lift(&g, &Field::constant(12, Staggering::Full, 0.7)).unwrap();
        let jt = jet(&g, &s, 4).unwrap();
        assert_eq!(jt.depth(), 4);
        assert!(jt.row(0).values().iter().all(|v| (v - 0.7).abs() < 1e-14));
        for k in 1..=4 {
            assert_eq!(jt.row(k).staggering(), jet_row_staggering(k));
            assert!(jt.row(k).max_abs() < 1e-12);
        }
        assert_eq!(jet(&g, &s, 0).unwrap().depth(), 0);
    }

    fn jet_errors(n: usize) -> (f64, f64) {
        let l = 8.0;
        let w = 2.0 * PI / l;
        let g = grid(n, l);
        let s = lift(&g, &g.sample(Staggering::Full, |x| (w * x).sin())).unwrap();
        let jt = jet(&g, &s, 2).unwrap();
        let e1 = jt
            .row(1)
            .sub(&g.sample(Staggering::Full, |x| w * (w * x).cos()))
            .unwrap()
            .max_abs();
        let e2 = jt
            .row(2)
            .sub(&g.sample(Staggering::Half, |x| -w * w * (w * x).sin()))
            .unwrap()
            .max_abs();
        (e1, e2)
    }

    #[test]
    fn jet_rows_second_order() {
        let (a1, a2) = jet_errors(32);
        let (b1, b2) = jet_errors(64);
        let o1 = (a1 / b1).log2();
        let o2 = (a2 / b2).log2();
        assert!((o1 - 2.0).abs() < 0.3, "row 1 order {o1}");
        assert!((o2 - 2.0).abs() < 0.3, "row 2 order {o2}");
    }

    /// Dense matrix of the map row 0 -> row k.
    fn dense_row_map(g: &PeriodicGrid, k: usize) -> DMatrix<f64> {
        let t = g.t_matrix() / g.dx();
        let mut m = DMatrix::identity(g.n(), g.n());
        for j in 1..=k {
            m = if j % 2 == 1 { -t.transpose() * m } else { &t * m };
        }
        m
    }

    #[test]
    fn jet_rows_match_dense_formulation() {
        let g = grid(8, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_state(&g, &mut rng);
        let jt = jet(&g, &s, 5).unwrap();
        let u0 = DVector::from_column_slice(jt.row(0).values());
        for k in 1..=5 {
            let dense = dense_row_map(&g, k) * &u0;
            for (a, b) in jt.row(k).values().iter().zip(dense.iter()) {
                assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "row {k}");
            }
        }
    }

    #[test]
    fn adjoint_single_rows() {
        let g = grid(5, 1.0);
        let g0 = Field::half(vec![1.0, -2.0, 0.5, 3.0, 0.0]);
        let zero_full = Field::zeros(5, Staggering::Full);
        let only0 = JetTable::from_rows(vec![g0.clone(), zero_full.clone()]).unwrap();
        assert_eq!(jet_adjoint_accumulate(&g, &only0).unwrap(), g0);

        let g1 = Field::full(vec![0.3, 1.0, -1.0, 2.0, 0.25]);
        let only1 =
            JetTable::from_rows(vec![Field::zeros(5, Staggering::Half), g1.clone()]).unwrap();
        let expected = g.apply_t(&g1).unwrap().scale(-1.0);
        let got = jet_adjoint_accumulate(&g, &only1).unwrap();
        assert!(got.sub(&expected).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn adjoint_matches_dense_composition() {
        let g = grid(8, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let depth = 3;
        let rows: Vec<Field> = (0..=depth)
            .map(|k| {
                Field::new(
                    (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    jet_row_staggering(k),
                )
            })
            .collect();
        let table = JetTable::from_rows(rows.clone()).unwrap();
        let got = jet_adjoint_accumulate(&g, &table).unwrap();
        let mut expected = DVector::zeros(8);
        for (k, r) in rows.iter().enumerate() {
            expected += dense_row_map(&g, k).transpose() * DVector::from_column_slice(r.values());
        }
        for (a, b) in got.values().iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-13 * (1.0 + b.abs()));
        }

        // directional-derivative identity
        let du = Field::half((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let djet = jet_from_u(&g, du.clone(), depth).unwrap();
        let lhs = got.dot(&du).unwrap();
        let rhs: f64 = rows
            .iter()
            .zip(djet.rows())
            .map(|(a, b)| a.dot(b).unwrap())
            .sum();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn adjoint_rejects_bad_pattern() {
        let bad = vec![Field::zeros(4, Staggering::Half), Field::zeros(4, Staggering::Half)];
        assert!(matches!(JetTable::from_rows(bad), Err(Error::JetShape { row: 1 })));
    }
}
