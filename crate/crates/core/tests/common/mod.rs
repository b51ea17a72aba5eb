#![allow(dead_code)]

use hypercs::datacube::{frame_view, vectorize, Datacube};
use hypercs::harness::{generate_phantom, sample_spectral_basis, simulate, PhantomSpec, SeedPlan};
use hypercs::sensing::Measurements;
use hypercs::transforms::{haar2d, Direction, SpectralBasis};
use ndarray::{Array2, ArrayView2};

pub struct Case {
    pub cube: Datacube<f64>,
    pub basis: SpectralBasis<f64>,
    pub meas: Measurements<f64>,
}

pub fn phantom_case(spec: &PhantomSpec, r_p: f64, r_s: f64, sigma: f64) -> Case {
    let cube = generate_phantom::<f64>(spec).unwrap();
    let plan = SeedPlan::from_master(spec.seed);
    let basis = sample_spectral_basis(cube.as_band_pixel_matrix(), 0.01, plan.basis).unwrap();
    let meas = simulate(&cube, r_p, r_s, sigma, plan).unwrap();
    Case { cube, basis, meas }
}

pub fn small_spec(n_v: usize, n_h: usize, n_s: usize, seed: u64) -> PhantomSpec {
    PhantomSpec {
        n_v,
        n_h,
        n_s,
        n_regions: 4,
        n_atoms: 2,
        seed,
    }
}

/// `Ψ_pᵀ` as a dense `n_p × n_p` matrix, column `c` being the Haar analysis
/// of the `c`-th unit frame.
pub fn dense_haar_analysis(n_v: usize, n_h: usize) -> Array2<f64> {
    let n_p = n_v * n_h;
    let mut out = Array2::zeros((n_p, n_p));
    for c in 0..n_p {
        let mut e = vec![0.0; n_p];
        e[c] = 1.0;
        let coeffs = haar2d(frame_view(&e, n_v, n_h), Direction::Analysis).unwrap();
        for (r, v) in vectorize(coeffs.view()).into_iter().enumerate() {
            out[[r, c]] = v;
        }
    }
    out
}

/// Isotropic TV of an `n_v × n_h` frame stored column-major in `v`.
pub fn naive_tv(v: &[f64], n_v: usize, n_h: usize) -> f64 {
    let at = |i: usize, j: usize| v[i + j * n_v];
    let mut t = 0.0;
    for j in 0..n_h {
        for i in 0..n_v {
            let dv = if i + 1 < n_v { at(i + 1, j) - at(i, j) } else { 0.0 };
            let dh = if j + 1 < n_h { at(i, j + 1) - at(i, j) } else { 0.0 };
            t += (dv * dv + dh * dh).sqrt();
        }
    }
    t
}

/// `Φ_s X Φ_pᵀ` through the dense projector matrices.
pub fn dense_forward(x: ArrayView2<'_, f64>, meas: &Measurements<f64>) -> Array2<f64> {
    meas.spectral.dense().dot(&x).dot(&meas.spatial.dense().t())
}

pub fn max_abs_diff(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Deterministic pseudo-random matrix with entries in `[-1, 1)`.
pub fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    Array2::from_shape_fn((rows, cols), |_| {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    })
}
