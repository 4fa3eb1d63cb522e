//! Sparse CSR storage and direct LU solution, real and complex.
//!
//! Factorization is delegated to faer's sparse LU (fill-reducing ordering,
//! partial pivoting) driven sequentially for bitwise determinism. The CSR
//! matrix doubles as the column-major view of its transpose, so no copy is
//! made on the way into the factorization; solves go through the transposed
//! path. Every solve checks the relative residual against `1e-10` and fails
//! loudly rather than returning a bad solution.

use crate::error::{Error, Result};
use crate::fespace::Coeff;
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::Mat;
use std::sync::Once;

pub const RESIDUAL_TOL: f64 = 1e-10;

/// Scalar usable in sparse systems.
pub trait LinScalar:
    Coeff + std::ops::Mul<Output = Self> + std::ops::Neg<Output = Self> + faer_traits::ComplexField
{
}

impl LinScalar for f64 {}
impl LinScalar for num_complex::Complex<f64> {}

fn force_sequential() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// Sparse matrix in CSR form; column indices strictly increasing per row,
/// duplicates summed at construction.
#[derive(Debug, Clone)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: LinScalar> SparseMatrix<T> {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Build from (row, col, value) triplets; duplicate entries are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, T)],
    ) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::TripletOutOfRange {
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_unstable_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for &k in &order {
            let (r, c, v) = triplets[k];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![T::ZERO; self.nrows];
        for r in 0..self.nrows {
            let mut acc = T::ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64>
    where
        T: Into<f64> + Copy,
    {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k])] = self.values[k].into();
            }
        }
        m
    }

    /// Column-major view of the transpose (shares storage with the CSR).
    fn transpose_view(&self) -> SparseColMatRef<'_, usize, T> {
        let symbolic = SymbolicSparseColMatRef::new_checked(
            self.ncols,
            self.nrows,
            &self.row_ptr,
            None,
            &self.col_idx,
        );
        SparseColMatRef::new(symbolic, &self.values)
    }
}

fn norm2<T: Coeff>(v: &[T]) -> f64 {
    v.iter().map(|x| x.abs2()).sum::<f64>().sqrt()
}

/// Direct LU solver with a cached symbolic factorization, reusable across
/// matrices sharing one sparsity pattern (the per-step refactorizations of a
/// time loop).
pub struct LuSolver {
    symbolic: Option<(usize, SymbolicLu<usize>)>,
}

impl Default for LuSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl LuSolver {
    pub fn new() -> Self {
        force_sequential();
        LuSolver { symbolic: None }
    }

    fn map_err(e: LuError) -> Error {
        match e {
            LuError::SymbolicSingular { index } => Error::SingularMatrix { row: index },
            LuError::Generic(g) => Error::Factorization(format!("{g:?}")),
        }
    }

    /// Solve `A x = b` to the residual contract; the factorization is
    /// recomputed, the symbolic analysis is reused when the pattern matches.
    pub fn solve<T: LinScalar>(&mut self, a: &SparseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
        assert_eq!(a.nrows(), a.ncols(), "square system required");
        assert_eq!(b.len(), a.nrows());
        let view = a.transpose_view();
        let reuse = matches!(&self.symbolic, Some((nnz, _)) if *nnz == a.nnz());
        if !reuse {
            let sym = SymbolicLu::try_new(view.symbolic())
                .map_err(|e| Error::Factorization(format!("{e:?}")))?;
            self.symbolic = Some((a.nnz(), sym));
        }
        let sym = &self.symbolic.as_ref().unwrap().1;
        let lu = Lu::try_new_with_symbolic(sym.clone(), view).map_err(Self::map_err)?;

        let n = b.len();
        let mut rhs = Mat::<T>::from_fn(n, 1, |i, _| b[i]);
        // the view holds A^T, so the transposed solve yields A x = b
        lu.solve_transpose_in_place(rhs.as_mut());
        let mut x: Vec<T> = (0..n).map(|i| rhs[(i, 0)]).collect();

        let bnorm = norm2(b);
        let residual = |x: &[T]| -> f64 {
            let ax = a.matvec(x);
            let r: Vec<T> = ax.iter().zip(b).map(|(&axi, &bi)| axi - bi).collect();
            if bnorm > 0.0 {
                norm2(&r) / bnorm
            } else {
                norm2(&r)
            }
        };
        let mut res = residual(&x);
        if res > RESIDUAL_TOL {
            // one pass of iterative refinement with the same factors
            let ax = a.matvec(&x);
            let mut r = Mat::<T>::from_fn(n, 1, |i, _| b[i] - ax[i]);
            lu.solve_transpose_in_place(r.as_mut());
            for i in 0..n {
                x[i] += r[(i, 0)];
            }
            res = residual(&x);
        }
        if res > RESIDUAL_TOL {
            return Err(Error::ResidualTooLarge {
                residual: res,
                tol: RESIDUAL_TOL,
            });
        }
        Ok(x)
    }
}

/// One-shot convenience wrapper.
pub fn lu_solve<T: LinScalar>(a: &SparseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    LuSolver::new().solve(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    type C64 = Complex<f64>;

    #[test]
    fn duplicates_summed() {
        let m = SparseMatrix::from_triplets(1, 1, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.values[0], 3.0);
    }

    #[test]
    fn empty_matvec() {
        let m = SparseMatrix::<f64>::from_triplets(3, 3, &[]).unwrap();
        let y = m.matvec(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn identity_solve() {
        let trips: Vec<(usize, usize, f64)> = (0..4).map(|i| (i, i, 1.0)).collect();
        let m = SparseMatrix::from_triplets(4, 4, &trips).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5];
        let x = lu_solve(&m, &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_hand_solve() {
        // [[1, i], [-i, 2]] x = (1, 0) has solution x = (2, i)
        let i = C64::new(0.0, 1.0);
        let m = SparseMatrix::from_triplets(
            2,
            2,
            &[
                (0, 0, C64::new(1.0, 0.0)),
                (0, 1, i),
                (1, 0, -i),
                (1, 1, C64::new(2.0, 0.0)),
            ],
        )
        .unwrap();
        let x = lu_solve(&m, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!((x[0] - C64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((x[1] - i).norm() < 1e-12);
    }

    #[test]
    fn nonsymmetric_real_solve() {
        let m = SparseMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, 2.0),
                (0, 2, 1.0),
                (1, 0, -1.0),
                (1, 1, 3.0),
                (2, 1, 1.0),
                (2, 2, 4.0),
            ],
        )
        .unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let b = m.matvec(&x_true);
        let x = lu_solve(&m, &b).unwrap();
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_reported() {
        let m =
            SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 2.0)]).unwrap();
        let out = lu_solve(&m, &[1.0, 1.0]);
        assert!(out.is_err());
    }

    #[test]
    fn deterministic_solution_bytes() {
        let trips: Vec<(usize, usize, f64)> = (0..20)
            .flat_map(|i| {
                let mut v = vec![(i, i, 4.0 + i as f64 * 0.1)];
                if i > 0 {
                    v.push((i, i - 1, -1.0));
                    v.push((i - 1, i, -1.3));
                }
                v
            })
            .collect();
        let m = SparseMatrix::from_triplets(20, 20, &trips).unwrap();
        let b: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let x1 = lu_solve(&m, &b).unwrap();
        let x2 = lu_solve(&m, &b).unwrap();
        assert_eq!(
            x1.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            x2.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
