//! Sparse symmetric positive-definite factorization with a reusable
//! symbolic analysis.

use crate::assembly::Pattern;
use crate::error::{Error, Result};
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::{Mat, Side};

pub struct SparseCholesky {
    symbolic_mat: SymbolicSparseColMat<usize>,
    symbolic: SymbolicLlt<usize>,
}

pub struct Factor {
    llt: Llt<usize, f64>,
}

impl SparseCholesky {
    pub fn new(pattern: &Pattern) -> Result<Self> {
        faer::set_global_parallelism(faer::Par::Seq);
        let symbolic_mat =
            SymbolicSparseColMat::new_checked(pattern.n, pattern.n, pattern.col_ptr.clone(), None, pattern.row_idx.clone());
        let symbolic = SymbolicLlt::try_new(symbolic_mat.as_ref(), Side::Lower)
            .map_err(|e| Error::LinearSolve(format!("symbolic analysis failed: {e:?}")))?;
        Ok(Self { symbolic_mat, symbolic })
    }

    /// Numeric factorization; `None` if the matrix is not positive definite.
    pub fn factor(&self, values: &[f64]) -> Option<Factor> {
        let mat = SparseColMatRef::new(self.symbolic_mat.as_ref(), values);
        let llt = match Llt::try_new_with_symbolic(self.symbolic.clone(), mat, Side::Lower) {
            Ok(l) => l,
            Err(e) => {
                log::trace!("numeric factorization failed: {e:?}");
                return None;
            }
        };
        Some(Factor { llt })
    }
}

impl Factor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.llt.solve_in_place(b.as_mut());
        (0..rhs.len()).map(|i| b[(i, 0)]).collect()
    }
}
