//! Sequency-ordered, orthonormal Walsh–Hadamard transform.
//!
//! Rows of `W_n` carry entries `±1/√n`, and the row at position `k` has
//! exactly `k` sign changes. `W_n` is symmetric and orthonormal, so the
//! transform is its own inverse.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub(crate) fn check_pow2(n: usize, what: &str) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "{what} must be a power of two, got {n}"
        )));
    }
    Ok(n.trailing_zeros())
}

/// Natural-order Hadamard row index for each sequency position.
///
/// Position `k` maps to the bit-reversed Gray code of `k`.
pub fn sequency_row_order(n: usize) -> Result<Vec<usize>> {
    let bits = check_pow2(n, "transform length")?;
    Ok((0..n)
        .map(|k| {
            let gray = k ^ (k >> 1);
            if bits == 0 {
                0
            } else {
                gray.reverse_bits() >> (usize::BITS - bits)
            }
        })
        .collect())
}

/// Unnormalized natural-order fast Walsh–Hadamard butterflies.
pub fn fwht_natural_in_place<T: Real>(v: &mut [T]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Precomputed sequency-ordered WHT of one length.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencyWht {
    n: usize,
    order: Vec<usize>,
}

impl SequencyWht {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            order: sequency_row_order(n)?,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// In-place `v ← W_nᵀ v`; `scratch` is resized as needed.
    pub fn apply<T: Real>(&self, v: &mut [T], scratch: &mut Vec<T>) {
        assert_eq!(v.len(), self.n, "WHT length mismatch");
        scratch.clear();
        scratch.extend_from_slice(v);
        fwht_natural_in_place(scratch);
        let scale = T::one() / T::from_usize_lossy(self.n).sqrt();
        for (out, &src) in v.iter_mut().zip(self.order.iter()) {
            *out = scratch[src] * scale;
        }
    }

    /// Explicit matrix `W_n` (row `k` = sequency-`k` basis vector).
    pub fn dense<T: Real>(&self) -> Array2<T> {
        let mut w = Array2::zeros((self.n, self.n));
        let mut scratch = Vec::new();
        for c in 0..self.n {
            let mut e = vec![T::zero(); self.n];
            e[c] = T::one();
            self.apply(&mut e, &mut scratch);
            // W is symmetric, so W e_c is both column and row c
            for (r, v) in e.into_iter().enumerate() {
                w[[r, c]] = v;
            }
        }
        w
    }
}

/// `W_nᵀ v` for a power-of-two length `v`.
pub fn fwht_sequency<T: Real>(v: &[T]) -> Result<Vec<T>> {
    let wht = SequencyWht::new(v.len())?;
    let mut out = v.to_vec();
    wht.apply(&mut out, &mut Vec::new());
    Ok(out)
}

/// Applies `wht` along every lane of `axis`.
pub(crate) fn apply_along<T: Real>(
    m: &mut Array2<T>,
    axis: Axis,
    wht: &SequencyWht,
    scratch: &mut Vec<T>,
) {
    let mut buf = vec![T::zero(); wht.len()];
    for mut lane in m.lanes_mut(axis) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        wht.apply(&mut buf, scratch);
        for (v, b) in lane.iter_mut().zip(buf.iter()) {
            *v = *b;
        }
    }
}

/// Separable 2-D transform `W_{n_v}ᵀ F W_{n_h}`.
pub fn wht2d<T: Real>(frame: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let (n_v, n_h) = frame.dim();
    let wv = SequencyWht::new(n_v)?;
    let wh = SequencyWht::new(n_h)?;
    Ok(wht2d_with(frame, &wv, &wh, &mut Vec::new()))
}

pub(crate) fn wht2d_with<T: Real>(
    frame: ArrayView2<'_, T>,
    wv: &SequencyWht,
    wh: &SequencyWht,
    scratch: &mut Vec<T>,
) -> Array2<T> {
    let mut c = frame.to_owned();
    apply_along(&mut c, Axis(0), wv, scratch);
    apply_along(&mut c, Axis(1), wh, scratch);
    c
}
