//! Hyperspectral datacube storage and its frame / band×pixel views.
//!
//! Samples are stored band-major; inside a band, pixels are column-major
//! (vertical index fastest). That layout is exactly the row-major memory of
//! the `n_s × n_p` band×pixel matrix, so the matrix view is free.

use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut2, ShapeBuilder};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `n_s × n_p` matrix whose row `k` is the column-major vectorization of frame `k`.
pub type BandPixelMatrix<T> = Array2<T>;

/// One `n_v × n_h` spectral band image.
pub type Frame<T> = Array2<T>;

/// Linear pixel index of `(i, j)` in a frame with `n_v` rows.
pub fn pixel_linear_index(i: usize, j: usize, n_v: usize) -> Result<usize> {
    if i >= n_v {
        return Err(Error::Index(format!("row {i} outside 0..{n_v}")));
    }
    Ok(i + j * n_v)
}

/// Views a contiguous band row (length `n_v * n_h`) as an `n_v × n_h` frame.
pub fn frame_view<T>(row: &[T], n_v: usize, n_h: usize) -> ArrayView2<'_, T> {
    ArrayView2::from_shape((n_v, n_h).f(), row).expect("row length is n_v * n_h")
}

pub fn frame_view_mut<T>(row: &mut [T], n_v: usize, n_h: usize) -> ArrayViewMut2<'_, T> {
    ArrayViewMut2::from_shape((n_v, n_h).f(), row).expect("row length is n_v * n_h")
}

/// Copies a frame into its column-major vectorization.
pub fn vectorize<T: Copy>(frame: ArrayView2<'_, T>) -> Vec<T> {
    frame.t().iter().copied().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Datacube<T> {
    n_v: usize,
    n_h: usize,
    data: Array2<T>,
}

impl<T: Real> Datacube<T> {
    /// Wraps band-major, column-major-within-band samples.
    pub fn new(n_v: usize, n_h: usize, n_s: usize, data: Vec<T>) -> Result<Self> {
        check_dims(n_v, n_h, n_s)?;
        let expected = n_v * n_h * n_s;
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "cube {n_v}x{n_h}x{n_s} needs {expected} samples, got {}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("cube samples must be finite".into()));
        }
        let data = Array2::from_shape_vec((n_s, n_v * n_h), data).expect("length checked");
        Ok(Self { n_v, n_h, data })
    }

    pub fn zeros(n_v: usize, n_h: usize, n_s: usize) -> Result<Self> {
        check_dims(n_v, n_h, n_s)?;
        Ok(Self {
            n_v,
            n_h,
            data: Array2::zeros((n_s, n_v * n_h)),
        })
    }

    /// Builds a cube from `f(i, j, k)`.
    pub fn from_fn(
        n_v: usize,
        n_h: usize,
        n_s: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self> {
        let mut cube = Self::zeros(n_v, n_h, n_s)?;
        for k in 0..n_s {
            for j in 0..n_h {
                for i in 0..n_v {
                    cube.data[[k, i + j * n_v]] = f(i, j, k);
                }
            }
        }
        Ok(cube)
    }

    /// Inverse of [`Datacube::as_band_pixel_matrix`].
    pub fn from_band_pixel(n_v: usize, n_h: usize, x: BandPixelMatrix<T>) -> Result<Self> {
        let (n_s, n_p) = x.dim();
        check_dims(n_v, n_h, n_s)?;
        if n_p != n_v * n_h {
            return Err(Error::Dimension(format!(
                "band-pixel matrix has {n_p} columns, frame {n_v}x{n_h} needs {}",
                n_v * n_h
            )));
        }
        // normalize to standard layout so rows are contiguous
        let data = if x.is_standard_layout() {
            x
        } else {
            x.as_standard_layout().into_owned()
        };
        Ok(Self { n_v, n_h, data })
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_s(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_pixels(&self) -> usize {
        self.n_v * self.n_h
    }

    /// `(n_v, n_h, n_s)`
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_v, self.n_h, self.n_s())
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Option<T> {
        if i >= self.n_v || j >= self.n_h {
            return None;
        }
        self.data.get([k, i + j * self.n_v]).copied()
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: T) -> Result<()> {
        if i >= self.n_v || j >= self.n_h || k >= self.n_s() {
            return Err(Error::Index(format!("({i}, {j}, {k}) outside cube")));
        }
        self.data[[k, i + j * self.n_v]] = value;
        Ok(())
    }

    /// Raw samples in storage order.
    pub fn as_slice(&self) -> &[T] {
        self.data.as_slice().expect("standard layout")
    }

    pub fn as_band_pixel_matrix(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn into_band_pixel_matrix(self) -> BandPixelMatrix<T> {
        self.data
    }

    /// Frame `k` as an `n_v × n_h` view.
    pub fn frame(&self, k: usize) -> Result<ArrayView2<'_, T>> {
        let n_s = self.n_s();
        if k >= n_s {
            return Err(Error::Index(format!("band {k} outside 0..{n_s}")));
        }
        let row = self.data.row(k).to_slice().expect("standard layout");
        Ok(frame_view(row, self.n_v, self.n_h))
    }

    /// Writable frame view; writes land in the cube.
    pub fn frame_mut(&mut self, k: usize) -> Result<ArrayViewMut2<'_, T>> {
        let n_s = self.n_s();
        if k >= n_s {
            return Err(Error::Index(format!("band {k} outside 0..{n_s}")));
        }
        let (n_v, n_h) = (self.n_v, self.n_h);
        let row = self
            .data
            .row_mut(k)
            .into_slice()
            .expect("standard layout");
        Ok(frame_view_mut(row, n_v, n_h))
    }

    /// Spectrum of pixel `(i, j)`.
    pub fn spectrum(&self, i: usize, j: usize) -> Result<ArrayView1<'_, T>> {
        let p = pixel_linear_index(i, j, self.n_v)?;
        if j >= self.n_h {
            return Err(Error::Index(format!("column {j} outside 0..{}", self.n_h)));
        }
        Ok(self.data.column(p))
    }
}

fn check_dims(n_v: usize, n_h: usize, n_s: usize) -> Result<()> {
    if n_v == 0 || n_h == 0 || n_s == 0 {
        return Err(Error::Dimension(format!(
            "cube dimensions must be positive, got {n_v}x{n_h}x{n_s}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn probe_cube() -> Datacube<f64> {
        // distinct values so any index mix-up shows
        Datacube::from_fn(3, 4, 2, |i, j, k| (100 * k + 10 * j + i) as f64 + 0.5).unwrap()
    }

    #[test]
    fn linear_index() {
        assert_eq!(pixel_linear_index(0, 0, 4).unwrap(), 0);
        assert_eq!(pixel_linear_index(2, 3, 4).unwrap(), 14);
        assert_eq!(pixel_linear_index(3, 0, 4).unwrap(), 3);
        assert!(matches!(pixel_linear_index(4, 0, 4), Err(Error::Index(_))));
    }

    #[test]
    fn linear_index_is_bijective() {
        let (n_v, n_h) = (5, 7);
        let mut seen = vec![false; n_v * n_h];
        for j in 0..n_h {
            for i in 0..n_v {
                let p = pixel_linear_index(i, j, n_v).unwrap();
                assert!(!seen[p]);
                seen[p] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn band_pixel_matrix_small_cases() {
        let c = Datacube::new(1, 1, 1, vec![3.25]).unwrap();
        assert_eq!(c.as_band_pixel_matrix(), array![[3.25]]);

        // F_1 = [a; b], F_2 = [c; d]
        let (a, b, cc, d) = (1.0, 2.0, 3.0, 4.0);
        let cube = Datacube::from_fn(2, 1, 2, |i, _, k| [[a, b], [cc, d]][k][i]).unwrap();
        assert_eq!(cube.as_band_pixel_matrix(), array![[a, b], [cc, d]]);
    }

    #[test]
    fn band_pixel_round_trip() {
        let cube = probe_cube();
        let x = cube.as_band_pixel_matrix().to_owned();
        let back = Datacube::from_band_pixel(3, 4, x).unwrap();
        assert_eq!(back, cube);
        // entry (k, i + j n_v) is sample (i, j, k)
        let x = cube.as_band_pixel_matrix();
        for k in 0..2 {
            for j in 0..4 {
                for i in 0..3 {
                    assert_eq!(x[[k, i + 3 * j]], cube.get(i, j, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn from_band_pixel_accepts_transposed_layout() {
        let cube = probe_cube();
        let x = cube.as_band_pixel_matrix().to_owned();
        let xt = x.t().to_owned();
        let back = Datacube::from_band_pixel(3, 4, xt.reversed_axes()).unwrap();
        assert_eq!(back, cube);
    }

    #[test]
    fn frames_match_samples() {
        let cube = probe_cube();
        for k in 0..2 {
            let f = cube.frame(k).unwrap();
            assert_eq!(f.dim(), (3, 4));
            for i in 0..3 {
                for j in 0..4 {
                    assert_eq!(f[[i, j]], cube.get(i, j, k).unwrap());
                }
            }
            // row k reshaped column-major is the frame
            let row = cube.as_band_pixel_matrix().row(k).to_vec();
            assert_eq!(vectorize(f), row);
        }
        assert!(matches!(cube.frame(2), Err(Error::Index(_))));
    }

    #[test]
    fn zero_band_gives_zero_frame() {
        let cube = Datacube::from_fn(2, 3, 2, |i, j, k| if k == 0 { 0.0 } else { (i + j) as f64 })
            .unwrap();
        assert!(cube.frame(0).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn frame_mut_writes_through() {
        let mut cube = probe_cube();
        cube.frame_mut(1).unwrap()[[2, 3]] = -7.0;
        assert_eq!(cube.get(2, 3, 1), Some(-7.0));
        assert_eq!(cube.as_band_pixel_matrix()[[1, 2 + 3 * 3]], -7.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(Datacube::<f64>::zeros(0, 2, 2), Err(Error::Dimension(_))));
        assert!(matches!(
            Datacube::new(2, 2, 2, vec![0.0; 7]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            Datacube::new(1, 1, 1, vec![f64::NAN]),
            Err(Error::Parameter(_))
        ));
        assert!(Datacube::from_band_pixel(2, 2, Array2::<f64>::zeros((3, 5))).is_err());
    }
}
