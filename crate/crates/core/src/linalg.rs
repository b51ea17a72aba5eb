//! Small dense helpers: cyclic Jacobi eigensolver and Frobenius utilities.

use ndarray::{Array1, Array2, ArrayView2, Zip};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(values, vectors)` with eigenvectors as columns, sorted by
/// descending eigenvalue.
pub fn symmetric_eigen<T: Real>(a: ArrayView2<'_, T>) -> Result<(Array1<T>, Array2<T>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut m = a.to_owned();
    let mut v = Array2::<T>::eye(n);
    let total: T = m.iter().map(|x| *x * *x).sum();
    let tol = T::epsilon() * T::epsilon() * total;

    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap_or(std::cmp::Ordering::Equal));
    let values = Array1::from_iter(idx.iter().map(|&i| m[[i, i]]));
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in idx.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok((values, vectors))
}

pub fn frobenius_norm<T: Real>(a: ArrayView2<'_, T>) -> T {
    a.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

pub fn frobenius_dot<T: Real>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> T {
    a.iter().zip(b.iter()).map(|(x, y)| *x * *y).sum()
}

/// `‖a − b‖_F`
pub fn frobenius_distance<T: Real>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> T {
    let mut acc = T::zero();
    Zip::from(a).and(b).for_each(|&x, &y| acc += (x - y) * (x - y));
    acc.sqrt()
}

/// Largest entry of `|AᵀA − I|`.
pub fn orthonormality_defect<T: Real>(a: ArrayView2<'_, T>) -> T {
    let g = a.t().dot(&a);
    g.indexed_iter()
        .map(|((r, c), &v)| (v - if r == c { T::one() } else { T::zero() }).abs())
        .fold(T::zero(), T::max)
}
