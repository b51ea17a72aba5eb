//! ℓ1 proximity operators and isotropic total variation.

use ndarray::{Array2, ArrayView2};

use crate::datacube::frame_view;
use crate::error::{Error, Result};
use crate::linalg::orthonormality_defect;
use crate::scalar::Real;

fn check_weight<T: Real>(xi: T) -> Result<()> {
    if !(xi >= T::zero()) {
        return Err(Error::Parameter(format!(
            "threshold weight must be non-negative, got {xi}"
        )));
    }
    Ok(())
}

#[inline]
fn shrink<T: Real>(z: T, xi: T) -> T {
    if z > xi {
        z - xi
    } else if z < -xi {
        z + xi
    } else {
        T::zero()
    }
}

/// Scalar soft threshold, the prox of `ξ|·|`.
pub fn soft_threshold<T: Real>(z: T, xi: T) -> Result<T> {
    check_weight(xi)?;
    Ok(shrink(z, xi))
}

/// Entrywise soft threshold, the prox of `ξ‖·‖₁,₁`.
pub fn prox_l1<T: Real>(z: ArrayView2<'_, T>, xi: T) -> Result<Array2<T>> {
    check_weight(xi)?;
    Ok(z.mapv(|v| shrink(v, xi)))
}

pub(crate) fn prox_l1_inplace<T: Real>(z: &mut Array2<T>, xi: T) {
    z.mapv_inplace(|v| shrink(v, xi));
}

/// Prox of `U ↦ ξ‖AᵀUB‖₁,₁` for orthonormal `A` and `B`:
/// `A prox_l1(AᵀZB, ξ) Bᵀ`. `None` for `B` means the identity.
pub fn prox_transformed<T: Real>(
    z: ArrayView2<'_, T>,
    xi: T,
    a: ArrayView2<'_, T>,
    b: Option<ArrayView2<'_, T>>,
) -> Result<Array2<T>> {
    check_weight(xi)?;
    let tol = T::lit(1e-8);
    if a.nrows() != a.ncols() || a.nrows() != z.nrows() {
        return Err(Error::Dimension(format!(
            "A must be {0}x{0}, got {1}x{2}",
            z.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    if orthonormality_defect(a) > tol {
        return Err(Error::Precondition("A is not orthonormal".into()));
    }
    let mut inner = a.t().dot(&z);
    if let Some(b) = b {
        if b.nrows() != b.ncols() || b.nrows() != z.ncols() {
            return Err(Error::Dimension(format!(
                "B must be {0}x{0}, got {1}x{2}",
                z.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        if orthonormality_defect(b) > tol {
            return Err(Error::Precondition("B is not orthonormal".into()));
        }
        inner = inner.dot(&b);
    }
    prox_l1_inplace(&mut inner, xi);
    let mut out = a.dot(&inner);
    if let Some(b) = b {
        out = out.dot(&b.t());
    }
    Ok(out)
}

/// Forward differences at one pixel; each is zero on the last row/column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferencePair<T> {
    pub dv: T,
    pub dh: T,
}

impl<T: Real> DifferencePair<T> {
    pub fn at(frame: ArrayView2<'_, T>, i: usize, j: usize) -> Self {
        let (n_v, n_h) = frame.dim();
        let x = frame[[i, j]];
        let dv = if i + 1 < n_v { frame[[i + 1, j]] - x } else { T::zero() };
        let dh = if j + 1 < n_h { frame[[i, j + 1]] - x } else { T::zero() };
        Self { dv, dh }
    }

    pub fn norm(&self) -> T {
        (self.dv * self.dv + self.dh * self.dh).sqrt()
    }
}

/// Isotropic total variation `Σᵢⱼ ‖d_{i,j}‖₂`.
pub fn tv<T: Real>(frame: ArrayView2<'_, T>) -> T {
    let (n_v, n_h) = frame.dim();
    let mut acc = T::zero();
    for j in 0..n_h {
        for i in 0..n_v {
            acc += DifferencePair::at(frame, i, j).norm();
        }
    }
    acc
}

/// A subgradient of [`tv`] at `frame`.
///
/// Every pixel pair term `‖d_{i,j}‖` with nonzero norm contributes
/// `−(dv + dh)/‖d‖` at `(i, j)`, `+dv/‖d‖` at `(i+1, j)` and `+dh/‖d‖` at
/// `(i, j+1)`; zero-norm terms contribute nothing.
pub fn tv_subgradient<T: Real>(frame: ArrayView2<'_, T>) -> Array2<T> {
    let (n_v, n_h) = frame.dim();
    let mut g = Array2::zeros((n_v, n_h));
    tv_subgradient_into(frame, &mut g);
    g
}

/// Accumulates the subgradient into `g` (overwritten) and returns `tv`.
fn tv_subgradient_into<T: Real>(frame: ArrayView2<'_, T>, g: &mut Array2<T>) -> T {
    let (n_v, n_h) = frame.dim();
    g.fill(T::zero());
    let mut total = T::zero();
    for j in 0..n_h {
        for i in 0..n_v {
            let d = DifferencePair::at(frame, i, j);
            let norm = d.norm();
            if norm == T::zero() {
                continue;
            }
            total += norm;
            let (uv, uh) = (d.dv / norm, d.dh / norm);
            g[[i, j]] -= uv + uh;
            if i + 1 < n_v {
                g[[i + 1, j]] += uv;
            }
            if j + 1 < n_h {
                g[[i, j + 1]] += uh;
            }
        }
    }
    total
}

/// `(Σₖ tv(F_k), H)` for a band×pixel matrix, with row `k` of `H` the
/// column-major vectorized subgradient of frame `k`.
pub fn tv_sum_and_subgradient<T: Real>(
    x: ArrayView2<'_, T>,
    n_v: usize,
    n_h: usize,
) -> Result<(T, Array2<T>)> {
    let (n_s, n_p) = x.dim();
    if n_p != n_v * n_h {
        return Err(Error::Dimension(format!(
            "band-pixel matrix has {n_p} columns, frame {n_v}x{n_h} needs {}",
            n_v * n_h
        )));
    }
    let mut h = Array2::zeros((n_s, n_p));
    let mut g = Array2::zeros((n_v, n_h));
    let mut buf = vec![T::zero(); n_p];
    let mut total = T::zero();
    for k in 0..n_s {
        for (d, s) in buf.iter_mut().zip(x.row(k).iter()) {
            *d = *s;
        }
        total += tv_subgradient_into(frame_view(&buf, n_v, n_h), &mut g);
        // column-major vectorization
        for (p, v) in h.row_mut(k).iter_mut().enumerate() {
            *v = g[[p % n_v, p / n_v]];
        }
    }
    Ok((total, h))
}

/// `Σₖ tv(F_k)` only.
pub fn tv_sum<T: Real>(x: ArrayView2<'_, T>, n_v: usize, n_h: usize) -> Result<T> {
    let (n_s, n_p) = x.dim();
    if n_p != n_v * n_h {
        return Err(Error::Dimension(format!(
            "band-pixel matrix has {n_p} columns, frame {n_v}x{n_h} needs {}",
            n_v * n_h
        )));
    }
    let mut buf = vec![T::zero(); n_p];
    let mut total = T::zero();
    for k in 0..n_s {
        for (d, s) in buf.iter_mut().zip(x.row(k).iter()) {
            *d = *s;
        }
        total += tv(frame_view(&buf, n_v, n_h));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datacube::Datacube;
    use crate::rng::{CounterRng, Stream};
    use ndarray::array;

    fn probe(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let rng = CounterRng::new(seed, Stream::Phantom);
        Array2::from_shape_fn((rows, cols), |(r, c)| rng.uniform_at((r * cols + c) as u64) * 2.0 - 1.0)
    }

    #[test]
    fn soft_threshold_cases() {
        assert!((soft_threshold(0.5f64, 0.2).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(soft_threshold(-0.1, 0.2).unwrap(), 0.0);
        assert!((soft_threshold(-0.5f64, 0.2).unwrap() + 0.3).abs() < 1e-15);
        assert_eq!(soft_threshold(0.2, 0.2).unwrap(), 0.0);
        assert!(matches!(soft_threshold(1.0, -0.1), Err(Error::Parameter(_))));
    }

    #[test]
    fn prox_l1_edge_cases() {
        let z = probe(3, 4, 1);
        assert_eq!(prox_l1(z.view(), 0.0).unwrap(), z);
        let big = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(prox_l1(z.view(), big).unwrap().iter().all(|&v| v == 0.0));
        assert!(prox_l1(z.view(), -1.0).is_err());
    }

    #[test]
    fn prox_l1_is_nonexpansive() {
        for t in 0..50 {
            let a = probe(4, 4, 10 + t);
            let b = probe(4, 4, 100 + t);
            let pa = prox_l1(a.view(), 0.3).unwrap();
            let pb = prox_l1(b.view(), 0.3).unwrap();
            let lhs: f64 = (&pa - &pb).iter().map(|v| v * v).sum();
            let rhs: f64 = (&a - &b).iter().map(|v| v * v).sum();
            assert!(lhs <= rhs + 1e-15);
        }
    }

    #[test]
    fn prox_transformed_reductions_and_checks() {
        let z = probe(4, 3, 2);
        let eye4 = Array2::<f64>::eye(4);
        let eye3 = Array2::<f64>::eye(3);
        let direct = prox_l1(z.view(), 0.2).unwrap();
        let t = prox_transformed(z.view(), 0.2, eye4.view(), Some(eye3.view())).unwrap();
        assert_eq!(t, direct);
        let t = prox_transformed(z.view(), 0.2, eye4.view(), None).unwrap();
        assert_eq!(t, direct);
        let q = array![[0.6, 0.8, 0.0, 0.0], [-0.8, 0.6, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        let same = prox_transformed(z.view(), 0.0, q.view(), None).unwrap();
        assert!((&same - &z).iter().all(|v| v.abs() < 1e-14));
        let bad = array![[1.0, 0.5, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        assert!(matches!(
            prox_transformed(z.view(), 0.1, bad.view(), None),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            prox_transformed(z.view(), 0.1, eye3.view(), None),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv(Array2::from_elem((3, 5), 2.5).view()), 0.0);
        assert_eq!(tv(array![[0.0, 1.0], [0.0, 1.0]].view()), 2.0);
        assert_eq!(tv(array![[4.0]].view()), 0.0);
        // single pixel pair with both differences: sqrt(1 + 4)
        let f = array![[0.0, 2.0], [1.0, 0.0]];
        // (0,0): dv=1, dh=2; (0,1): dv=-2; (1,0): dh=-1
        assert!((tv(f.view()) - (5f64.sqrt() + 2.0 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn tv_zero_iff_constant() {
        let mut f = Array2::from_elem((4, 4), 1.0);
        assert_eq!(tv(f.view()), 0.0);
        f[[3, 3]] = 1.0 + 1e-9;
        assert!(tv(f.view()) > 0.0);
    }

    #[test]
    fn subgradient_of_constant_is_zero() {
        assert!(tv_subgradient(Array2::from_elem((4, 3), -1.0).view())
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn subgradient_matches_finite_differences() {
        let f = probe(8, 8, 3);
        let g = tv_subgradient(f.view());
        let h = 1e-6;
        for i in 0..8 {
            for j in 0..8 {
                let mut up = f.clone();
                up[[i, j]] += h;
                let mut dn = f.clone();
                dn[[i, j]] -= h;
                let fd = (tv(up.view()) - tv(dn.view())) / (2.0 * h);
                assert!((fd - g[[i, j]]).abs() <= 1e-5 * g[[i, j]].abs().max(1.0));
            }
        }
    }

    #[test]
    fn tv_is_convex() {
        for t in 0..50 {
            let a = probe(5, 6, 300 + t);
            let b = probe(5, 6, 400 + t);
            let mid = (&a + &b) * 0.5;
            assert!(tv(mid.view()) <= 0.5 * tv(a.view()) + 0.5 * tv(b.view()) + 1e-10);
        }
    }

    #[test]
    fn sum_and_subgradient_matches_per_frame() {
        let cube = Datacube::from_fn(4, 4, 2, |i, j, k| ((i * 3 + j * 5 + k * 7) % 6) as f64).unwrap();
        let x = cube.as_band_pixel_matrix();
        let (total, h) = tv_sum_and_subgradient(x, 4, 4).unwrap();
        let f0 = cube.frame(0).unwrap();
        let f1 = cube.frame(1).unwrap();
        assert!((total - (tv(f0) + tv(f1))).abs() < 1e-12);
        assert!((tv_sum(x, 4, 4).unwrap() - total).abs() < 1e-12);
        let g1 = tv_subgradient(f1);
        for j in 0..4 {
            for i in 0..4 {
                assert_eq!(h[[1, i + 4 * j]], g1[[i, j]]);
            }
        }
        assert!(tv_sum_and_subgradient(x, 3, 4).is_err());
    }

    #[test]
    fn single_band_and_constant_cube() {
        let cube = Datacube::from_fn(2, 4, 1, |i, j, _| (i * j) as f64).unwrap();
        let (total, h) = tv_sum_and_subgradient(cube.as_band_pixel_matrix(), 2, 4).unwrap();
        let f = cube.frame(0).unwrap();
        assert_eq!(total, tv(f));
        assert_eq!(h.row(0).to_vec(), crate::datacube::vectorize(tv_subgradient(f).view()));

        let flat = Datacube::from_fn(4, 4, 3, |_, _, k| k as f64).unwrap();
        let (total, h) = tv_sum_and_subgradient(flat.as_band_pixel_matrix(), 4, 4).unwrap();
        assert_eq!(total, 0.0);
        assert!(h.iter().all(|&v| v == 0.0));
    }
}
