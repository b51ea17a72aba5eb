//! Synthetic phantoms, the recovery metric and rate-sweep experiments.

use std::fmt;
use std::time::{Duration, Instant};

use ndarray::{Array2, ArrayView2};

use crate::datacube::Datacube;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_distance, frobenius_norm};
use crate::rng::{CounterRng, Stream};
use crate::scalar::Real;
use crate::sensing::{
    acquire, build_spatial_projector, build_spectral_projector, sampling_counts, Measurements,
    SPATIAL_LOW_PASS_FRACTION, SPECTRAL_LOW_PASS_FRACTION,
};
use crate::solvers::{apg_bpdn, recover_hybrid, HaarBasis, SolverConfig, TerminalReason};
use crate::transforms::{learn_spectral_basis, SpectralBasis};

/// `‖X − X_rec‖_F² / ‖X‖_F²` (squared ratio).
pub fn relative_error<T: Real>(truth: ArrayView2<'_, T>, recovered: ArrayView2<'_, T>) -> Result<T> {
    if truth.dim() != recovered.dim() {
        return Err(Error::Dimension(format!(
            "truth is {}x{}, recovery is {}x{}",
            truth.nrows(),
            truth.ncols(),
            recovered.nrows(),
            recovered.ncols()
        )));
    }
    let n = frobenius_norm(truth);
    if n == T::zero() {
        return Err(Error::UndefinedMetric);
    }
    let d = frobenius_distance(truth, recovered);
    Ok(d * d / (n * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhantomSpec {
    pub n_v: usize,
    pub n_h: usize,
    pub n_s: usize,
    pub n_regions: usize,
    pub n_atoms: usize,
    pub seed: u64,
}

impl PhantomSpec {
    /// The 32×32×16 desk-scale benchmark phantom.
    pub fn standard(seed: u64) -> Self {
        Self {
            n_v: 32,
            n_h: 32,
            n_s: 16,
            n_regions: 6,
            n_atoms: 2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_v == 0 || self.n_h == 0 || self.n_s == 0 {
            return Err(Error::Parameter("phantom dimensions must be positive".into()));
        }
        if self.n_regions == 0 {
            return Err(Error::Parameter("phantom needs at least one region".into()));
        }
        if self.n_atoms == 0 || self.n_atoms > self.n_s {
            return Err(Error::Parameter(format!(
                "atoms per region must lie in 1..={}, got {}",
                self.n_s, self.n_atoms
            )));
        }
        Ok(())
    }
}

/// A generated phantom with its construction details.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom<T> {
    pub cube: Datacube<T>,
    /// Region label per linear pixel index.
    pub labels: Vec<usize>,
    /// `n_s × n_s` smooth spectral dictionary, one atom per column.
    pub atoms: Array2<T>,
    /// `(atom, weight)` pairs making up each region's spectrum.
    pub mixtures: Vec<Vec<(usize, T)>>,
}

/// Raised-cosine bumps of half-width `max(2, n_s/4)` centred on each band.
pub fn spectral_atoms<T: Real>(n_s: usize) -> Array2<T> {
    let width = (n_s as f64 / 4.0).max(2.0);
    Array2::from_shape_fn((n_s, n_s), |(k, a)| {
        let d = (k as f64 - a as f64) / width;
        if d.abs() < 1.0 {
            T::lit(0.5 * (1.0 + (std::f64::consts::PI * d).cos()))
        } else {
            T::zero()
        }
    })
}

impl<T: Real> Phantom<T> {
    pub fn generate(spec: &PhantomSpec) -> Result<Self> {
        spec.validate()?;
        let rng = CounterRng::new(spec.seed, Stream::Phantom);
        let mut counter = 0u64;
        let mut draw = || {
            counter += 1;
            rng.uniform_at(counter)
        };

        let centres: Vec<(f64, f64)> = (0..spec.n_regions)
            .map(|_| (draw() * spec.n_v as f64, draw() * spec.n_h as f64))
            .collect();
        let n_p = spec.n_v * spec.n_h;
        let mut labels = vec![0usize; n_p];
        for j in 0..spec.n_h {
            for i in 0..spec.n_v {
                let (y, x) = (i as f64 + 0.5, j as f64 + 0.5);
                let mut best = (f64::INFINITY, 0);
                for (r, &(cy, cx)) in centres.iter().enumerate() {
                    let d = (y - cy).powi(2) + (x - cx).powi(2);
                    if d < best.0 {
                        best = (d, r);
                    }
                }
                labels[i + j * spec.n_v] = best.1;
            }
        }

        let atoms = spectral_atoms::<T>(spec.n_s);
        let mut mixtures = Vec::with_capacity(spec.n_regions);
        let mut spectra = Vec::with_capacity(spec.n_regions);
        for _ in 0..spec.n_regions {
            // partial Fisher–Yates over atom indices
            let mut pool: Vec<usize> = (0..spec.n_s).collect();
            let mut mix = Vec::with_capacity(spec.n_atoms);
            for a in 0..spec.n_atoms {
                let pick = a + ((draw() * (spec.n_s - a) as f64) as usize).min(spec.n_s - a - 1);
                pool.swap(a, pick);
                let w = T::lit((0.25 + 0.75 * draw()) / spec.n_atoms as f64);
                mix.push((pool[a], w));
            }
            let mut s = vec![T::zero(); spec.n_s];
            for &(a, w) in &mix {
                for (k, v) in s.iter_mut().enumerate() {
                    *v += w * atoms[[k, a]];
                }
            }
            mixtures.push(mix);
            spectra.push(s);
        }

        let mut x = Array2::zeros((spec.n_s, n_p));
        for (p, &l) in labels.iter().enumerate() {
            for k in 0..spec.n_s {
                x[[k, p]] = spectra[l][k];
            }
        }
        let cube = Datacube::from_band_pixel(spec.n_v, spec.n_h, x)?;
        Ok(Self {
            cube,
            labels,
            atoms,
            mixtures,
        })
    }
}

/// Piecewise-constant cube whose region spectra are sparse mixtures of
/// smooth atoms.
pub fn generate_phantom<T: Real>(spec: &PhantomSpec) -> Result<Datacube<T>> {
    Ok(Phantom::generate(spec)?.cube)
}

/// Share of pixels sampled for spectral-basis learning.
pub const BASIS_SAMPLE_FRACTION: f64 = 0.01;

/// Learns `Ψ_s` from a seeded random subset of pixel spectra: one percent
/// of the pixels, but never fewer than `max(1, n_s)`.
pub fn sample_spectral_basis<T: Real>(
    x: ArrayView2<'_, T>,
    fraction: f64,
    seed: u64,
) -> Result<SpectralBasis<T>> {
    let (n_s, n_p) = x.dim();
    if n_p == 0 {
        return Err(Error::Dimension("no pixels to sample".into()));
    }
    let wanted = (fraction * n_p as f64).round() as usize;
    let count = wanted.max(n_s.max(1)).min(n_p);
    let rng = CounterRng::new(seed, Stream::Sampling);
    let mut pool: Vec<usize> = (0..n_p).collect();
    for a in 0..count {
        let pick = a + rng.below_at(a as u64, n_p - a);
        pool.swap(a, pick);
    }
    let mut samples = Array2::zeros((n_s, count));
    for (c, &p) in pool[..count].iter().enumerate() {
        samples.column_mut(c).assign(&x.column(p));
    }
    learn_spectral_basis(samples.view())
}

/// Per-run seeds derived from one master seed by fixed offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPlan {
    pub spatial: u64,
    pub spectral: u64,
    pub noise: u64,
    pub basis: u64,
}

impl SeedPlan {
    pub fn from_master(master: u64) -> Self {
        Self {
            spatial: master,
            spectral: master.wrapping_add(1),
            noise: master.wrapping_add(2),
            basis: master.wrapping_add(3),
        }
    }
}

/// Builds projectors for the given rates (ten / five percent low-pass
/// rows) and simulates noisy acquisition.
pub fn simulate<T: Real>(
    cube: &Datacube<T>,
    r_p: f64,
    r_s: f64,
    sigma: f64,
    seeds: SeedPlan,
) -> Result<Measurements<T>> {
    let (n_v, n_h, n_s) = cube.dims();
    let (m_p, q_p) = sampling_counts(r_p, n_v * n_h, SPATIAL_LOW_PASS_FRACTION)?;
    let (m_s, q_s) = sampling_counts(r_s, n_s, SPECTRAL_LOW_PASS_FRACTION)?;
    let pp = build_spatial_projector(n_v, n_h, m_p, q_p, seeds.spatial)?;
    let sp = build_spectral_projector(n_s, m_s, q_s, seeds.spectral)?;
    acquire(cube.as_band_pixel_matrix(), &sp, &pp, sigma, seeds.noise)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CubeSource<T> {
    Phantom(PhantomSpec),
    Cube(Datacube<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec<T> {
    pub source: CubeSource<T>,
    /// `(r_p, r_s)` pairs.
    pub rates: Vec<(f64, f64)>,
    pub sigma: f64,
    pub bpdn: SolverConfig<T>,
    pub hybrid: SolverConfig<T>,
    /// Master seeds; every rate pair runs once per seed.
    pub seeds: Vec<u64>,
}

impl<T: Real> ExperimentSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for &(r_p, r_s) in &self.rates {
            for r in [r_p, r_s] {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(Error::Parameter(format!("rate {r} outside (0, 1]")));
                }
            }
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::Parameter(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        if let CubeSource::Phantom(p) = &self.source {
            p.validate()?;
        }
        self.bpdn.validate()?;
        self.hybrid.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bpdn,
    Hybrid,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Bpdn => "bpdn",
            Method::Hybrid => "hybrid",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub r_p: f64,
    pub r_s: f64,
    pub seed: u64,
    pub relative_error: f64,
    pub iterations: usize,
    pub reason: TerminalReason,
    pub wall_time: Duration,
}

/// Runs both solvers for every `(seed, rate pair)`; rows are ordered by
/// seed, then rate pair, then method (BPDN first).
pub fn run_experiment<T: Real>(spec: &ExperimentSpec<T>) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let cube = match &spec.source {
        CubeSource::Phantom(p) => generate_phantom(p)?,
        CubeSource::Cube(c) => c.clone(),
    };
    let truth = cube.as_band_pixel_matrix();
    let mut rows = Vec::new();
    for &seed in &spec.seeds {
        let plan = SeedPlan::from_master(seed);
        let basis = sample_spectral_basis(truth, BASIS_SAMPLE_FRACTION, plan.basis)?;
        for &(r_p, r_s) in &spec.rates {
            let meas = simulate(&cube, r_p, r_s, spec.sigma, plan)?;
            for method in [Method::Bpdn, Method::Hybrid] {
                let start = Instant::now();
                let (x, trace) = match method {
                    Method::Bpdn => apg_bpdn(&meas, &HaarBasis, &basis, &spec.bpdn, None)?,
                    Method::Hybrid => recover_hybrid(&meas, &basis, &spec.hybrid, None)?,
                };
                let wall_time = start.elapsed();
                let err = relative_error(truth, x.view())?;
                rows.push(ResultRow {
                    method,
                    r_p,
                    r_s,
                    seed,
                    relative_error: err.to_f64().unwrap_or(f64::NAN),
                    iterations: trace.iterations(),
                    reason: trace.reason,
                    wall_time,
                });
            }
        }
    }
    Ok(rows)
}
