//! JPEG-style zig-zag scan over a rectangular coefficient grid.

use ndarray::{Array2, ArrayView2};

use crate::scalar::Real;

/// Scan order over an `n_v × n_h` grid; its length-`B` prefix selects the
/// `B` lowest-sequency coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigzagOrder {
    n_v: usize,
    n_h: usize,
    cells: Vec<(usize, usize)>,
}

impl ZigzagOrder {
    pub fn new(n_v: usize, n_h: usize) -> Self {
        Self {
            n_v,
            n_h,
            cells: zigzag_indices(n_v, n_h),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_v, self.n_h)
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    /// First `b` cells.
    pub fn prefix(&self, b: usize) -> &[(usize, usize)] {
        &self.cells[..b.min(self.cells.len())]
    }

    /// Gathers the first `b` scanned entries of `coeffs` (the `q_B` selector).
    pub fn select<T: Real>(&self, coeffs: ArrayView2<'_, T>, b: usize) -> Vec<T> {
        self.prefix(b).iter().map(|&(r, c)| coeffs[[r, c]]).collect()
    }

    /// Adjoint of [`ZigzagOrder::select`]: zero grid with `values` placed at
    /// the first `values.len()` scan positions.
    pub fn scatter<T: Real>(&self, values: &[T]) -> Array2<T> {
        let mut out = Array2::zeros((self.n_v, self.n_h));
        for (&(r, c), &v) in self.cells.iter().zip(values) {
            out[[r, c]] = v;
        }
        out
    }
}

/// Anti-diagonals `d = 0..n_v+n_h-1`, odd ones walked downward-left and even
/// ones upward-right, starting `(0,0), (0,1), (1,0), ...` and clipped at the
/// grid borders.
pub fn zigzag_indices(n_v: usize, n_h: usize) -> Vec<(usize, usize)> {
    if n_v == 0 || n_h == 0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(n_v * n_h);
    for d in 0..(n_v + n_h - 1) {
        let r_lo = d.saturating_sub(n_h - 1);
        let r_hi = d.min(n_v - 1);
        if d % 2 == 1 {
            out.extend((r_lo..=r_hi).map(|r| (r, d - r)));
        } else {
            out.extend((r_lo..=r_hi).rev().map(|r| (r, d - r)));
        }
    }
    out
}
