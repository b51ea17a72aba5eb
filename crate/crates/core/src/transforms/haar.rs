//! Orthonormal full-depth 2-D Haar wavelet transform.
//!
//! Coefficient layout along each axis is `[approx, coarsest detail, ...,
//! finest details]`, the row order of the classic Haar matrix.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::Result;
use crate::scalar::Real;
use crate::transforms::wht::check_pow2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `Ψ_vᵀ F Ψ_h`
    Analysis,
    /// `Ψ_v C Ψ_hᵀ`
    Synthesis,
}

fn haar1d_forward<T: Real>(v: &mut [T], tmp: &mut Vec<T>) {
    let r = T::one() / T::lit(2.0).sqrt();
    let mut len = v.len();
    tmp.resize(v.len(), T::zero());
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (v[2 * i], v[2 * i + 1]);
            tmp[i] = (a + b) * r;
            tmp[half + i] = (a - b) * r;
        }
        v[..len].copy_from_slice(&tmp[..len]);
        len = half;
    }
}

fn haar1d_inverse<T: Real>(v: &mut [T], tmp: &mut Vec<T>) {
    let r = T::one() / T::lit(2.0).sqrt();
    let n = v.len();
    tmp.resize(n, T::zero());
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for i in 0..half {
            let (a, d) = (v[i], v[half + i]);
            tmp[2 * i] = (a + d) * r;
            tmp[2 * i + 1] = (a - d) * r;
        }
        v[..len].copy_from_slice(&tmp[..len]);
        len *= 2;
    }
}

fn along<T: Real>(m: &mut Array2<T>, axis: Axis, f: fn(&mut [T], &mut Vec<T>)) {
    let n = m.len_of(axis);
    let mut buf = vec![T::zero(); n];
    let mut tmp = Vec::with_capacity(n);
    for mut lane in m.lanes_mut(axis) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        f(&mut buf, &mut tmp);
        for (v, b) in lane.iter_mut().zip(buf.iter()) {
            *v = *b;
        }
    }
}

/// Haar analysis or synthesis of a frame with power-of-two sides.
pub fn haar2d<T: Real>(frame: ArrayView2<'_, T>, direction: Direction) -> Result<Array2<T>> {
    let (n_v, n_h) = frame.dim();
    check_pow2(n_v, "frame height")?;
    check_pow2(n_h, "frame width")?;
    let mut out = frame.to_owned();
    let f = match direction {
        Direction::Analysis => haar1d_forward::<T>,
        Direction::Synthesis => haar1d_inverse::<T>,
    };
    along(&mut out, Axis(0), f);
    along(&mut out, Axis(1), f);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Classic Haar analysis matrix `Ψᵀ`: row 0 constant, row 2^p + q the
    /// level-p wavelet at position q.
    fn haar_matrix(n: usize) -> Array2<f64> {
        let mut h = Array2::zeros((n, n));
        let s = (n as f64).sqrt();
        for c in 0..n {
            h[[0, c]] = 1.0 / s;
        }
        let mut p = 0;
        while (1 << p) < n {
            let blocks = 1usize << p;
            let width = n / blocks;
            let amp = (blocks as f64).sqrt() / s;
            for q in 0..blocks {
                for c in q * width..(q + 1) * width {
                    h[[blocks + q, c]] = if c < q * width + width / 2 { amp } else { -amp };
                }
            }
            p += 1;
        }
        h
    }

    fn probe(n_v: usize, n_h: usize) -> Array2<f64> {
        Array2::from_shape_fn((n_v, n_h), |(i, j)| ((i * 13 + j * 5 + 1) % 17) as f64 * 0.37 - 2.0)
    }

    #[test]
    fn constant_2x2() {
        let c = 1.75f64;
        let f = Array2::from_elem((2, 2), c);
        let a = haar2d(f.view(), Direction::Analysis).unwrap();
        assert!((a[[0, 0]] - 2.0 * c).abs() < 1e-15);
        assert!(a.iter().skip(1).all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn round_trip_and_energy() {
        let f = probe(8, 8);
        let a = haar2d(f.view(), Direction::Analysis).unwrap();
        let back = haar2d(a.view(), Direction::Synthesis).unwrap();
        for (x, y) in f.iter().zip(back.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        let e1: f64 = f.iter().map(|v| v * v).sum();
        let e2: f64 = a.iter().map(|v| v * v).sum();
        assert!((e1 - e2).abs() < 1e-10);
    }

    #[test]
    fn matches_dense_oracle() {
        for (n_v, n_h) in [(4, 4), (2, 8), (8, 1)] {
            let f = probe(n_v, n_h);
            let hv = haar_matrix(n_v);
            let hh = haar_matrix(n_h);
            // Ψ_vᵀ F Ψ_h with Ψᵀ = haar_matrix
            let dense = hv.dot(&f).dot(&hh.t());
            let fast = haar2d(f.view(), Direction::Analysis).unwrap();
            for (x, y) in dense.iter().zip(fast.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
            let syn = haar2d(f.view(), Direction::Synthesis).unwrap();
            let dense_syn = hv.t().dot(&f).dot(&hh);
            for (x, y) in dense_syn.iter().zip(syn.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(haar2d(Array2::<f64>::zeros((6, 4)).view(), Direction::Analysis).is_err());
    }
}
