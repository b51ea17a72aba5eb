//! Separable structured projectors `Φ_s`, `Φ_p` and simulated acquisition
//! `Y = Φ_s X Φ_pᵀ + N`.
//!
//! Each projector stacks `q` low-pass Walsh–Hadamard rows (zig-zag selected
//! 2-D coefficients spatially, leading sequency rows spectrally) on top of
//! `m − q` seeded Rademacher rows. WHT rows are orthonormal; Rademacher
//! entries are `±1/(√n + √r)` for an `r`-row block, which keeps the block's
//! spectral norm near 1.

use ndarray::{s, Array2, ArrayView2, Axis};

use crate::datacube::{frame_view, vectorize};
use crate::error::{Error, Result};
use crate::linalg::frobenius_norm;
use crate::rng::{CounterRng, Stream};
use crate::scalar::Real;
use crate::transforms::wht::{apply_along, wht2d_with, SequencyWht};
use crate::transforms::ZigzagOrder;

/// Rademacher blocks up to this many entries are kept in memory; larger
/// ones are regenerated row by row on every application.
pub const DENSE_RADEMACHER_LIMIT: usize = 1 << 22;

/// Round-half-up `r · n`, clamped to `1..=n`.
pub fn rate_to_count(rate: f64, n: usize) -> Result<usize> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Parameter(format!(
            "measurement rate must lie in (0, 1], got {rate}"
        )));
    }
    if n == 0 {
        return Err(Error::Parameter("ambient dimension must be positive".into()));
    }
    Ok(round_half_up(rate * n as f64).clamp(1, n))
}

/// `(m_p, m_s)` for spatial and spectral rates.
pub fn rates_to_counts(r_p: f64, r_s: f64, n_p: usize, n_s: usize) -> Result<(usize, usize)> {
    Ok((rate_to_count(r_p, n_p)?, rate_to_count(r_s, n_s)?))
}

pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Default spatial low-pass share (ten percent of the pixels).
pub const SPATIAL_LOW_PASS_FRACTION: f64 = 0.10;
/// Default spectral low-pass share (five percent of the bands).
pub const SPECTRAL_LOW_PASS_FRACTION: f64 = 0.05;

/// Low-pass count `⌊fraction · n⌉` (may be zero).
pub fn low_pass_count(fraction: f64, n: usize) -> usize {
    round_half_up(fraction * n as f64).min(n)
}

/// Projection count and low-pass count along one axis.
///
/// At full rate (`m = n`) the whole axis is sampled by the complete
/// orthonormal WHT (`q = m`). Otherwise `q = ⌊fraction · n⌉`, clamped to
/// `m` with a warning.
pub fn sampling_counts(rate: f64, n: usize, low_pass_fraction: f64) -> Result<(usize, usize)> {
    let m = rate_to_count(rate, n)?;
    if m == n {
        return Ok((m, m));
    }
    let q = low_pass_count(low_pass_fraction, n);
    if q > m {
        log::warn!("low-pass count {q} exceeds {m} projections; clamping to {m}");
        return Ok((m, m));
    }
    Ok((m, q))
}

/// Entry magnitude `1/(√n + √r)` for an `r × n` Rademacher block, which puts
/// the block's spectral norm near 1 (the Bai–Yin edge).
pub fn rademacher_scale<T: Real>(rows: usize, cols: usize) -> T {
    T::one() / (T::from_usize_lossy(cols).sqrt() + T::from_usize_lossy(rows).sqrt())
}

/// `(rows × cols)` block of `±scale` entries drawn from a counter stream;
/// entry `(r, c)` uses counter `r · cols + c`.
#[derive(Debug, Clone, PartialEq)]
struct RademacherBlock<T> {
    rows: usize,
    cols: usize,
    scale: T,
    rng: CounterRng,
    dense: Option<Array2<T>>,
}

impl<T: Real> RademacherBlock<T> {
    fn new(rows: usize, cols: usize, rng: CounterRng, materialize: bool) -> Self {
        let scale = rademacher_scale::<T>(rows, cols);
        let mut block = Self {
            rows,
            cols,
            scale,
            rng,
            dense: None,
        };
        if materialize {
            block.dense = Some(Array2::from_shape_fn((rows, cols), |(r, c)| block.entry(r, c)));
        }
        block
    }

    fn entry(&self, r: usize, c: usize) -> T {
        if self.rng.sign_at((r * self.cols + c) as u64) {
            self.scale
        } else {
            -self.scale
        }
    }

    fn fill_row(&self, r: usize, buf: &mut [T]) {
        for (c, v) in buf.iter_mut().enumerate() {
            *v = self.entry(r, c);
        }
    }

    /// `x Rᵀ` for `x` of shape `b × cols`.
    fn right_transpose(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        if let Some(d) = &self.dense {
            return x.dot(&d.t());
        }
        let mut out = Array2::zeros((x.nrows(), self.rows));
        let mut row = vec![T::zero(); self.cols];
        for r in 0..self.rows {
            self.fill_row(r, &mut row);
            for (b, xb) in x.outer_iter().enumerate() {
                out[[b, r]] = xb.iter().zip(&row).map(|(a, s)| *a * *s).sum();
            }
        }
        out
    }

    /// `y R` for `y` of shape `b × rows`.
    fn right(&self, y: ArrayView2<'_, T>) -> Array2<T> {
        if let Some(d) = &self.dense {
            return y.dot(d);
        }
        let mut out = Array2::zeros((y.nrows(), self.cols));
        let mut row = vec![T::zero(); self.cols];
        for r in 0..self.rows {
            self.fill_row(r, &mut row);
            for (b, mut ob) in out.outer_iter_mut().enumerate() {
                let w = y[[b, r]];
                if w != T::zero() {
                    ob.iter_mut().zip(&row).for_each(|(o, s)| *o += w * *s);
                }
            }
        }
        out
    }
}

/// Spatial projector `Φ_p` (`m_p × n_p`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialProjector<T> {
    n_v: usize,
    n_h: usize,
    m_p: usize,
    q_p: usize,
    seed: u64,
    zigzag: ZigzagOrder,
    wht_v: SequencyWht,
    wht_h: SequencyWht,
    random: RademacherBlock<T>,
}

/// Spectral projector `Φ_s` (`m_s × n_s`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProjector<T> {
    n_s: usize,
    m_s: usize,
    q_s: usize,
    seed: u64,
    wht: SequencyWht,
    random: RademacherBlock<T>,
}

fn check_counts(q: usize, m: usize, n: usize, axis: &str) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::Parameter(format!(
            "{axis} projections must satisfy 1 <= m <= {n}, got m = {m}"
        )));
    }
    if q > m {
        return Err(Error::Parameter(format!(
            "{axis} low-pass count {q} exceeds projection count {m}"
        )));
    }
    Ok(())
}

pub fn build_spatial_projector<T: Real>(
    n_v: usize,
    n_h: usize,
    m_p: usize,
    q_p: usize,
    seed: u64,
) -> Result<SpatialProjector<T>> {
    let wht_v = SequencyWht::new(n_v)?;
    let wht_h = SequencyWht::new(n_h)?;
    let n_p = n_v * n_h;
    check_counts(q_p, m_p, n_p, "spatial")?;
    let rows = m_p - q_p;
    let random = RademacherBlock::new(
        rows,
        n_p,
        CounterRng::new(seed, Stream::SpatialRademacher),
        rows * n_p <= DENSE_RADEMACHER_LIMIT,
    );
    Ok(SpatialProjector {
        n_v,
        n_h,
        m_p,
        q_p,
        seed,
        zigzag: ZigzagOrder::new(n_v, n_h),
        wht_v,
        wht_h,
        random,
    })
}

pub fn build_spectral_projector<T: Real>(
    n_s: usize,
    m_s: usize,
    q_s: usize,
    seed: u64,
) -> Result<SpectralProjector<T>> {
    let wht = SequencyWht::new(n_s)?;
    check_counts(q_s, m_s, n_s, "spectral")?;
    let rows = m_s - q_s;
    let random = RademacherBlock::new(
        rows,
        n_s,
        CounterRng::new(seed, Stream::SpectralRademacher),
        rows * n_s <= DENSE_RADEMACHER_LIMIT,
    );
    Ok(SpectralProjector {
        n_s,
        m_s,
        q_s,
        seed,
        wht,
        random,
    })
}

impl<T: Real> SpatialProjector<T> {
    pub fn n_v(&self) -> usize {
        self.n_v
    }
    pub fn n_h(&self) -> usize {
        self.n_h
    }
    pub fn n_p(&self) -> usize {
        self.n_v * self.n_h
    }
    pub fn m_p(&self) -> usize {
        self.m_p
    }
    pub fn q_p(&self) -> usize {
        self.q_p
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn zigzag(&self) -> &ZigzagOrder {
        &self.zigzag
    }

    /// Entry `(r, c)` of the Rademacher block `Φ_{p,2}`.
    pub fn rademacher_entry(&self, r: usize, c: usize) -> T {
        self.random.entry(r, c)
    }

    /// `X Φ_pᵀ` for `X` of shape `b × n_p`.
    pub fn forward(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        if x.ncols() != self.n_p() {
            return Err(Error::Dimension(format!(
                "spatial projector expects {} pixels, got {}",
                self.n_p(),
                x.ncols()
            )));
        }
        let mut out = Array2::zeros((x.nrows(), self.m_p));
        if self.q_p > 0 {
            let mut scratch = Vec::new();
            let mut buf = vec![T::zero(); self.n_p()];
            for (b, xb) in x.outer_iter().enumerate() {
                for (d, s) in buf.iter_mut().zip(xb.iter()) {
                    *d = *s;
                }
                let frame = frame_view(&buf, self.n_v, self.n_h);
                let coeffs = wht2d_with(frame, &self.wht_v, &self.wht_h, &mut scratch);
                for (c, &(r, cc)) in self.zigzag.prefix(self.q_p).iter().enumerate() {
                    out[[b, c]] = coeffs[[r, cc]];
                }
            }
        }
        if self.m_p > self.q_p {
            let rand = self.random.right_transpose(x);
            out.slice_mut(s![.., self.q_p..]).assign(&rand);
        }
        Ok(out)
    }

    /// `Y Φ_p` for `Y` of shape `b × m_p`.
    pub fn adjoint(&self, y: ArrayView2<'_, T>) -> Result<Array2<T>> {
        if y.ncols() != self.m_p {
            return Err(Error::Dimension(format!(
                "spatial adjoint expects {} projections, got {}",
                self.m_p,
                y.ncols()
            )));
        }
        let mut out = if self.m_p > self.q_p {
            self.random.right(y.slice(s![.., self.q_p..]))
        } else {
            Array2::zeros((y.nrows(), self.n_p()))
        };
        if self.q_p > 0 {
            let mut scratch = Vec::new();
            let mut low = vec![T::zero(); self.q_p];
            for (b, yb) in y.outer_iter().enumerate() {
                for (d, s) in low.iter_mut().zip(yb.iter()) {
                    *d = *s;
                }
                let grid = self.zigzag.scatter(&low);
                // W is symmetric orthonormal, so W C Wᵀ is the same transform
                let frame = wht2d_with(grid.view(), &self.wht_v, &self.wht_h, &mut scratch);
                for (o, v) in out.row_mut(b).iter_mut().zip(vectorize(frame.view())) {
                    *o += v;
                }
            }
        }
        Ok(out)
    }

    /// Explicit `m_p × n_p` matrix (small problems and tests only).
    pub fn dense(&self) -> Array2<T> {
        let eye = Array2::<T>::eye(self.n_p());
        self.forward(eye.view()).expect("identity has n_p columns").reversed_axes()
    }
}

impl<T: Real> SpectralProjector<T> {
    pub fn n_s(&self) -> usize {
        self.n_s
    }
    pub fn m_s(&self) -> usize {
        self.m_s
    }
    pub fn q_s(&self) -> usize {
        self.q_s
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Entry `(r, c)` of the Rademacher block `Φ_{s,2}`.
    pub fn rademacher_entry(&self, r: usize, c: usize) -> T {
        self.random.entry(r, c)
    }

    /// `Φ_s Z` for `Z` of shape `n_s × b`.
    pub fn forward(&self, z: ArrayView2<'_, T>) -> Result<Array2<T>> {
        if z.nrows() != self.n_s {
            return Err(Error::Dimension(format!(
                "spectral projector expects {} bands, got {}",
                self.n_s,
                z.nrows()
            )));
        }
        let mut out = Array2::zeros((self.m_s, z.ncols()));
        if self.q_s > 0 {
            let mut t = z.to_owned();
            apply_along(&mut t, Axis(0), &self.wht, &mut Vec::new());
            out.slice_mut(s![..self.q_s, ..])
                .assign(&t.slice(s![..self.q_s, ..]));
        }
        if self.m_s > self.q_s {
            // R Z = (Zᵀ Rᵀ)ᵀ
            let rand = self.random.right_transpose(z.t());
            out.slice_mut(s![self.q_s.., ..]).assign(&rand.t());
        }
        Ok(out)
    }

    /// `Φ_sᵀ Y` for `Y` of shape `m_s × b`.
    pub fn adjoint(&self, y: ArrayView2<'_, T>) -> Result<Array2<T>> {
        if y.nrows() != self.m_s {
            return Err(Error::Dimension(format!(
                "spectral adjoint expects {} projections, got {}",
                self.m_s,
                y.nrows()
            )));
        }
        let mut out = Array2::zeros((self.n_s, y.ncols()));
        if self.q_s > 0 {
            out.slice_mut(s![..self.q_s, ..])
                .assign(&y.slice(s![..self.q_s, ..]));
            apply_along(&mut out, Axis(0), &self.wht, &mut Vec::new());
        }
        if self.m_s > self.q_s {
            let rand = self.random.right(y.slice(s![self.q_s.., ..]).t());
            out += &rand.t();
        }
        Ok(out)
    }

    /// Explicit `m_s × n_s` matrix.
    pub fn dense(&self) -> Array2<T> {
        self.forward(Array2::<T>::eye(self.n_s).view())
            .expect("identity has n_s rows")
    }
}

fn check_pair<T: Real>(sp: &SpectralProjector<T>, pp: &SpatialProjector<T>, x: (usize, usize)) -> Result<()> {
    if x != (sp.n_s(), pp.n_p()) {
        return Err(Error::Dimension(format!(
            "expected {}x{} band-pixel matrix, got {}x{}",
            sp.n_s(),
            pp.n_p(),
            x.0,
            x.1
        )));
    }
    Ok(())
}

/// Noiseless measurements `Φ_s X Φ_pᵀ`.
pub fn project<T: Real>(
    x: ArrayView2<'_, T>,
    sp: &SpectralProjector<T>,
    pp: &SpatialProjector<T>,
) -> Result<Array2<T>> {
    check_pair(sp, pp, x.dim())?;
    let z = pp.forward(x)?;
    sp.forward(z.view())
}

/// `Φ_sᵀ Y Φ_p`.
pub fn adjoint<T: Real>(
    y: ArrayView2<'_, T>,
    sp: &SpectralProjector<T>,
    pp: &SpatialProjector<T>,
) -> Result<Array2<T>> {
    if y.dim() != (sp.m_s(), pp.m_p()) {
        return Err(Error::Dimension(format!(
            "expected {}x{} measurements, got {}x{}",
            sp.m_s(),
            pp.m_p(),
            y.nrows(),
            y.ncols()
        )));
    }
    let z = sp.adjoint(y)?;
    pp.adjoint(z.view())
}

/// Acquired data plus everything needed to rebuild the operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurements<T> {
    pub y: Array2<T>,
    pub spectral: SpectralProjector<T>,
    pub spatial: SpatialProjector<T>,
    pub sigma: f64,
    pub noise_seed: u64,
}

impl<T: Real> Measurements<T> {
    /// Rebuilds the projectors from their descriptors and checks `y`'s shape.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        y: Array2<T>,
        (n_v, n_h, n_s): (usize, usize, usize),
        (m_s, q_s, spectral_seed): (usize, usize, u64),
        (m_p, q_p, spatial_seed): (usize, usize, u64),
        sigma: f64,
        noise_seed: u64,
    ) -> Result<Self> {
        let spectral = build_spectral_projector(n_s, m_s, q_s, spectral_seed)?;
        let spatial = build_spatial_projector(n_v, n_h, m_p, q_p, spatial_seed)?;
        if y.dim() != (m_s, m_p) {
            return Err(Error::Dimension(format!(
                "measurement matrix is {}x{}, header says {m_s}x{m_p}",
                y.nrows(),
                y.ncols()
            )));
        }
        Ok(Self {
            y,
            spectral,
            spatial,
            sigma,
            noise_seed,
        })
    }

    pub fn cube_dims(&self) -> (usize, usize, usize) {
        (self.spatial.n_v(), self.spatial.n_h(), self.spectral.n_s())
    }

    /// `Φ_sᵀ Y Φ_p`, the solvers' starting point.
    pub fn back_projection(&self) -> Array2<T> {
        adjoint(self.y.view(), &self.spectral, &self.spatial).expect("shapes checked at construction")
    }
}

/// Simulated acquisition with i.i.d. `N(0, σ²)` noise from the seeded
/// Box–Muller stream; entry `(r, c)` of `N` uses draw `r · m_p + c`.
pub fn acquire<T: Real>(
    x: ArrayView2<'_, T>,
    sp: &SpectralProjector<T>,
    pp: &SpatialProjector<T>,
    sigma: f64,
    noise_seed: u64,
) -> Result<Measurements<T>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!(
            "noise standard deviation must be finite and non-negative, got {sigma}"
        )));
    }
    let mut y = project(x, sp, pp)?;
    if sigma > 0.0 {
        let rng = CounterRng::new(noise_seed, Stream::Noise);
        let m_p = pp.m_p();
        for ((r, c), v) in y.indexed_iter_mut() {
            *v += T::lit(sigma * rng.gaussian_at((r * m_p + c) as u64));
        }
    }
    Ok(Measurements {
        y,
        spectral: sp.clone(),
        spatial: pp.clone(),
        sigma,
        noise_seed,
    })
}

/// Power-iteration estimate of the spectral norm of `X ↦ Φ_s X Φ_pᵀ`.
pub fn operator_norm_estimate<T: Real>(
    sp: &SpectralProjector<T>,
    pp: &SpatialProjector<T>,
    iterations: usize,
    seed: u64,
) -> T {
    let rng = CounterRng::new(seed, Stream::Sampling);
    let n_p = pp.n_p();
    let mut x = Array2::from_shape_fn((sp.n_s(), n_p), |(k, p)| {
        T::lit(rng.uniform_at((k * n_p + p) as u64) - 0.5)
    });
    let mut norm = T::zero();
    for _ in 0..iterations {
        let nx = frobenius_norm(x.view());
        if nx == T::zero() {
            return T::zero();
        }
        x.mapv_inplace(|v| v / nx);
        let y = project(x.view(), sp, pp).expect("consistent shapes");
        norm = frobenius_norm(y.view());
        x = adjoint(y.view(), sp, pp).expect("consistent shapes");
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_distance, frobenius_dot};

    fn probe(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let rng = CounterRng::new(seed, Stream::Phantom);
        Array2::from_shape_fn((rows, cols), |(r, c)| rng.uniform_at((r * cols + c) as u64) * 2.0 - 1.0)
    }

    #[test]
    fn table_counts() {
        assert_eq!(rate_to_count(0.1, 262_144).unwrap(), 26_214);
        assert_eq!(rate_to_count(0.1, 1_048_576).unwrap(), 104_858);
        assert_eq!(rate_to_count(0.1, 65_536).unwrap(), 6_554);
        assert_eq!(rate_to_count(0.05, 128).unwrap(), 6);
        assert_eq!(rate_to_count(0.05, 32).unwrap(), 2);
        assert_eq!(rate_to_count(0.05, 64).unwrap(), 3);
        assert_eq!(rates_to_counts(0.5, 0.25, 1024, 16).unwrap(), (512, 4));
    }

    #[test]
    fn rate_bounds() {
        assert_eq!(rate_to_count(1.0, 10).unwrap(), 10);
        assert_eq!(rate_to_count(1e-9, 10).unwrap(), 1);
        assert_eq!(rate_to_count(0.25, 2).unwrap(), 1); // 0.5 rounds up
        for bad in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(rate_to_count(bad, 10), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn sampling_counts_rules() {
        assert_eq!(sampling_counts(1.0, 1024, 0.1).unwrap(), (1024, 1024));
        assert_eq!(sampling_counts(0.3, 1024, 0.1).unwrap(), (307, 102));
        assert_eq!(sampling_counts(0.25, 16, 0.05).unwrap(), (4, 1));
        // q clamped to m
        assert_eq!(sampling_counts(0.05, 1024, 0.1).unwrap(), (51, 51));
    }

    #[test]
    fn build_validation() {
        assert!(matches!(build_spatial_projector::<f64>(4, 4, 5, 6, 0), Err(Error::Parameter(_))));
        assert!(matches!(build_spatial_projector::<f64>(4, 4, 17, 0, 0), Err(Error::Parameter(_))));
        assert!(matches!(build_spatial_projector::<f64>(3, 4, 5, 1, 0), Err(Error::Dimension(_))));
        assert!(matches!(build_spectral_projector::<f64>(8, 0, 0, 0), Err(Error::Parameter(_))));
        assert!(build_spectral_projector::<f64>(8, 8, 8, 0).is_ok());
    }

    #[test]
    fn pure_low_pass_and_pure_random() {
        let low = build_spatial_projector::<f64>(4, 4, 6, 6, 1).unwrap();
        let d = low.dense();
        // rows are orthonormal WHT rows
        let g = d.dot(&d.t());
        assert!(frobenius_distance(g.view(), Array2::eye(6).view()) < 1e-12);

        let rand = build_spatial_projector::<f64>(4, 4, 6, 0, 1).unwrap();
        let d = rand.dense();
        let mag = 1.0 / (4.0 + 6f64.sqrt());
        assert!(d.iter().all(|&v| (v.abs() - mag).abs() < 1e-15));
    }

    #[test]
    fn seeds_change_random_block() {
        let a = build_spectral_projector::<f64>(16, 8, 1, 10).unwrap().dense();
        let b = build_spectral_projector::<f64>(16, 8, 1, 11).unwrap().dense();
        let a2 = build_spectral_projector::<f64>(16, 8, 1, 10).unwrap().dense();
        assert_eq!(a, a2);
        assert_ne!(a.slice(s![1.., ..]), b.slice(s![1.., ..]));
        assert_eq!(a.row(0), b.row(0));
    }

    #[test]
    fn lazy_random_block_matches_dense() {
        let rng = CounterRng::new(3, Stream::SpatialRademacher);
        let lazy = RademacherBlock::<f64>::new(5, 12, rng, false);
        let dense = RademacherBlock::<f64>::new(5, 12, rng, true);
        let x = probe(3, 12, 1);
        let y = probe(3, 5, 2);
        assert!(frobenius_distance(lazy.right_transpose(x.view()).view(), dense.right_transpose(x.view()).view()) < 1e-14);
        assert!(frobenius_distance(lazy.right(y.view()).view(), dense.right(y.view()).view()) < 1e-14);
    }

    #[test]
    fn zero_in_zero_out() {
        let sp = build_spectral_projector::<f64>(8, 4, 1, 0).unwrap();
        let pp = build_spatial_projector::<f64>(4, 4, 6, 2, 0).unwrap();
        let y = project(Array2::zeros((8, 16)).view(), &sp, &pp).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
        let x = adjoint(Array2::zeros((4, 6)).view(), &sp, &pp).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn full_orthonormal_sampling() {
        let sp = build_spectral_projector::<f64>(8, 8, 8, 0).unwrap();
        let pp = build_spatial_projector::<f64>(4, 8, 32, 32, 0).unwrap();
        let x = probe(8, 32, 4);
        let y = project(x.view(), &sp, &pp).unwrap();
        assert!((frobenius_norm(y.view()) - frobenius_norm(x.view())).abs() < 1e-10);
        let back = adjoint(y.view(), &sp, &pp).unwrap();
        assert!(frobenius_distance(back.view(), x.view()) < 1e-10);
    }

    #[test]
    fn adjoint_identity() {
        let sp = build_spectral_projector::<f64>(8, 4, 1, 7).unwrap();
        let pp = build_spatial_projector::<f64>(4, 4, 10, 3, 8).unwrap();
        for t in 0..20 {
            let x = probe(8, 16, 100 + t);
            let y = probe(4, 10, 200 + t);
            let lhs = frobenius_dot(project(x.view(), &sp, &pp).unwrap().view(), y.view());
            let rhs = frobenius_dot(x.view(), adjoint(y.view(), &sp, &pp).unwrap().view());
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn dimension_errors() {
        let sp = build_spectral_projector::<f64>(8, 4, 1, 7).unwrap();
        let pp = build_spatial_projector::<f64>(4, 4, 10, 3, 8).unwrap();
        assert!(matches!(project(Array2::zeros((8, 15)).view(), &sp, &pp), Err(Error::Dimension(_))));
        assert!(matches!(adjoint(Array2::zeros((4, 9)).view(), &sp, &pp), Err(Error::Dimension(_))));
    }

    #[test]
    fn noise_free_acquisition_is_exact_and_seeded_noise_repeats() {
        let sp = build_spectral_projector::<f64>(8, 4, 1, 7).unwrap();
        let pp = build_spatial_projector::<f64>(4, 4, 10, 3, 8).unwrap();
        let x = probe(8, 16, 1);
        let clean = acquire(x.view(), &sp, &pp, 0.0, 5).unwrap();
        assert_eq!(clean.y, project(x.view(), &sp, &pp).unwrap());
        let a = acquire(x.view(), &sp, &pp, 0.01, 5).unwrap();
        let b = acquire(x.view(), &sp, &pp, 0.01, 5).unwrap();
        assert_eq!(a.y, b.y);
        assert_ne!(a.y, clean.y);
        assert!(matches!(acquire(x.view(), &sp, &pp, -1.0, 5), Err(Error::Parameter(_))));
    }

    #[test]
    fn noise_statistics() {
        // 100_000 noise samples on a zero signal
        let sp = build_spectral_projector::<f64>(128, 100, 0, 1).unwrap();
        let pp = build_spatial_projector::<f64>(32, 32, 1000, 1000, 1).unwrap();
        let sigma = 1e-2;
        let m = acquire(Array2::zeros((128, 1024)).view(), &sp, &pp, sigma, 42).unwrap();
        let n = m.y.len() as f64;
        assert_eq!(n, 1e5);
        let mean = m.y.sum() / n;
        let var = m.y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 * sigma / n.sqrt());
        assert!((var.sqrt() - sigma).abs() < 0.02 * sigma);
    }

    #[test]
    fn from_parts_rebuilds_operators() {
        let sp = build_spectral_projector::<f64>(8, 4, 1, 7).unwrap();
        let pp = build_spatial_projector::<f64>(4, 4, 10, 3, 8).unwrap();
        let m = acquire(probe(8, 16, 3).view(), &sp, &pp, 0.1, 9).unwrap();
        let rebuilt =
            Measurements::from_parts(m.y.clone(), (4, 4, 8), (4, 1, 7), (10, 3, 8), 0.1, 9).unwrap();
        assert_eq!(rebuilt, m);
        assert!(Measurements::from_parts(m.y.clone(), (4, 4, 8), (5, 1, 7), (10, 3, 8), 0.1, 9).is_err());
    }
}
