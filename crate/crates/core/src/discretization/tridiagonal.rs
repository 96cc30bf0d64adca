use super::Field;
use crate::error::{Error, Result};

/// `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
///
/// `sub[0]` and `sup[n-1]` are stored but never read.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn zeros(n: usize) -> Self {
        Self {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.sup[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// `‖A x - rhs‖∞`.
    pub fn residual_inf(&self, x: &[f64]) -> f64 {
        self.apply(x)
            .iter()
            .zip(&self.rhs)
            .map(|(ax, r)| (ax - r).abs())
            .fold(0.0, f64::max)
    }

    fn check_sizes(&self) -> Result<()> {
        let n = self.len();
        for len in [self.sub.len(), self.sup.len(), self.rhs.len()] {
            if len != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        Ok(())
    }
}

/// Thomas algorithm: one forward elimination, one back substitution, no pivoting.
///
/// Stable for the row- or column-diagonally dominant systems built by the
/// assemblers.
pub fn solve_tridiagonal(sys: &TridiagonalSystem) -> Result<Field> {
    sys.check_sizes()?;
    let n = sys.len();
    if n == 0 {
        return Ok(Field::new(Vec::new()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];

    let mut pivot = sys.diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::ZeroPivot { row: 0 });
    }
    c[0] = sys.sup[0] / pivot;
    d[0] = sys.rhs[0] / pivot;
    for i in 1..n {
        pivot = sys.diag[i] - sys.sub[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot { row: i });
        }
        c[i] = if i + 1 < n { sys.sup[i] / pivot } else { 0.0 };
        d[i] = (sys.rhs[i] - sys.sub[i] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(Field::new(d))
}
