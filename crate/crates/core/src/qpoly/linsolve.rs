use num_traits::{One, Zero};

use super::{Poly, Rational};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinearSolveError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("right-hand side has length {got}, expected {expected}")]
    RhsLength { expected: usize, got: usize },
    #[error("singular matrix; null vector {}", fmt_vec(.null_vector))]
    Singular { null_vector: Vec<Rational> },
}

fn fmt_vec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(|r| r.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Dense matrix product `M·v` with rational entries and polynomial vector.
pub fn mat_vec(m: &[Vec<Rational>], v: &[Poly]) -> Vec<Poly> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, p)| p.scale(c))
                .sum()
        })
        .collect()
}

/// Solves `M·sol = rhs` exactly by Gauss–Jordan elimination over the
/// rationals. The matrix is numeric; the row operations are applied to the
/// polynomial right-hand sides entrywise.
pub fn solve_linear_exact(m: &[Vec<Rational>], rhs: &[Poly]) -> Result<Vec<Poly>, LinearSolveError> {
    let n = m.len();
    if let Some(row) = m.iter().find(|r| r.len() != n) {
        return Err(LinearSolveError::NotSquare {
            rows: n,
            cols: row.len(),
        });
    }
    if rhs.len() != n {
        return Err(LinearSolveError::RhsLength {
            expected: n,
            got: rhs.len(),
        });
    }
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut b: Vec<Poly> = rhs.to_vec();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Err(LinearSolveError::Singular {
                null_vector: null_vector(m),
            });
        };
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for k in col..n {
            a[col][k] = &a[col][k] * &inv;
        }
        b[col] = b[col].scale(&inv);
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for k in col..n {
                let t = &factor * &a[col][k];
                a[r][k] -= t;
            }
            let t = b[col].scale(&factor);
            b[r] = &b[r] - &t;
        }
    }
    Ok(b)
}

/// A nonzero kernel vector of a square matrix, or the empty vector when the
/// matrix is nonsingular.
pub fn null_vector(m: &[Vec<Rational>]) -> Vec<Rational> {
    let rows = m.len();
    let cols = m.first().map(Vec::len).unwrap_or(0);
    let mut a = m.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for k in 0..cols {
            a[r][k] = &a[r][k] * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..cols {
                    let t = &f * &a[r][k];
                    a[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let Some(free) = (0..cols).find(|c| !pivots.contains(c)) else {
        return Vec::new();
    };
    let mut v = vec![Rational::zero(); cols];
    v[free] = Rational::one();
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -a[row][free].clone();
    }
    v
}

/// Exact determinant by Gaussian elimination.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det *= a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            for k in col..n {
                let t = &f * &a[col][k];
                a[r][k] -= t;
            }
        }
    }
    det
}
