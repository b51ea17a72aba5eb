//! Accelerated proximal-gradient BPDN and the hybrid TV + spectral-ℓ1
//! proximal-subgradient solver.
//!
//! Both share the same outer loop: a (sub)gradient step from the current
//! extrapolated iterate, a proximity step, FISTA extrapolation, and the
//! relative-change stopping rule tested on the extrapolated iterate.

use std::fmt;

use ndarray::{Array2, ArrayView2};

use crate::datacube::{frame_view, vectorize};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_distance, frobenius_norm};
use crate::regularizers::{prox_l1_inplace, tv_sum, tv_sum_and_subgradient};
use crate::scalar::Real;
use crate::sensing::{adjoint, project, Measurements};
use crate::transforms::{haar2d, BasisMode, Direction, SpectralBasis};

/// Relative change above which a run is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Fixed step size λ.
    pub lambda: T,
    /// BPDN weight γ.
    pub gamma: T,
    /// Total-variation weight γ₁.
    pub gamma1: T,
    /// Spectral ℓ1 weight γ₂.
    pub gamma2: T,
    /// Relative-change threshold τ.
    pub tau: T,
    /// Iteration cap C.
    pub max_iters: usize,
    /// FISTA extrapolation on/off.
    pub accelerate: bool,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            lambda: T::lit(0.25),
            gamma: T::lit(0.01),
            gamma1: T::lit(0.002),
            gamma2: T::lit(0.005),
            tau: T::lit(1e-3),
            max_iters: 200,
            accelerate: true,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > T::zero() && self.lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda must be positive, got {}", self.lambda)));
        }
        for (name, w) in [("gamma", self.gamma), ("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if !(w >= T::zero() && w.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be non-negative, got {w}")));
            }
        }
        if !(self.tau > T::zero()) {
            return Err(Error::Parameter(format!("tau must be positive, got {}", self.tau)));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalReason {
    Threshold,
    MaxIters,
}

impl fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminalReason::Threshold => "threshold",
            TerminalReason::MaxIters => "max-iters",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    pub iter: usize,
    /// `‖Xₙ − Xₙ₋₁‖_F / ‖Xₙ₋₁‖_F`
    pub rel_change: T,
    /// Objective at `Xₙ`.
    pub cost: T,
    /// `‖Sₙ‖_F`, the norm of the (sub)gradient used in the step.
    pub subgradient_norm: T,
    /// Squared relative error against a known ground truth.
    pub rel_error: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    pub records: Vec<IterationRecord<T>>,
    pub reason: TerminalReason,
}

impl<T: Real> Trace<T> {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> Option<&IterationRecord<T>> {
        self.records.last()
    }

    /// Running minimum of the recorded costs.
    pub fn best_costs(&self) -> Vec<T> {
        let mut best = T::infinity();
        self.records
            .iter()
            .map(|r| {
                best = best.min(r.cost);
                best
            })
            .collect()
    }
}

/// `(αₙ, (αₙ₋₁ − 1)/αₙ)` from `αₙ₋₁`.
pub fn fista_momentum<T: Real>(alpha_prev: T) -> (T, T) {
    let four = T::lit(4.0);
    let next = (T::one() + (T::one() + four * alpha_prev * alpha_prev).sqrt()) / T::lit(2.0);
    (next, (alpha_prev - T::one()) / next)
}

/// `‖Xₙ − Xₙ₋₁‖_F / ‖Xₙ₋₁‖_F`; zero when the iterates coincide and `+∞`
/// when only the previous iterate is zero.
pub fn relative_change<T: Real>(x_n: ArrayView2<'_, T>, x_prev: ArrayView2<'_, T>) -> T {
    let diff = frobenius_distance(x_n, x_prev);
    if diff == T::zero() {
        return T::zero();
    }
    let base = frobenius_norm(x_prev);
    if base == T::zero() {
        T::infinity()
    } else {
        diff / base
    }
}

/// Stopping rule: halt when the relative change drops below `tau` or when
/// iteration `n` reaches the cap `c`.
pub fn stopping<T: Real>(
    x_n: ArrayView2<'_, T>,
    x_prev: ArrayView2<'_, T>,
    tau: T,
    n: usize,
    c: usize,
) -> (Option<TerminalReason>, T) {
    let rel = relative_change(x_n, x_prev);
    let reason = if rel < tau {
        Some(TerminalReason::Threshold)
    } else if n >= c {
        Some(TerminalReason::MaxIters)
    } else {
        None
    };
    (reason, rel)
}

/// Frame-wise spatial sparsifying transform `Ψ_p`.
pub trait SpatialBasis<T: Real> {
    /// `Ψ_pᵀ vec(F)` as a frame.
    fn analysis(&self, frame: ArrayView2<'_, T>) -> Result<Array2<T>>;
    /// `Ψ_p vec(C)` as a frame.
    fn synthesis(&self, coeffs: ArrayView2<'_, T>) -> Result<Array2<T>>;
}

/// Full-depth orthonormal 2-D Haar wavelets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HaarBasis;

impl<T: Real> SpatialBasis<T> for HaarBasis {
    fn analysis(&self, frame: ArrayView2<'_, T>) -> Result<Array2<T>> {
        haar2d(frame, Direction::Analysis)
    }
    fn synthesis(&self, coeffs: ArrayView2<'_, T>) -> Result<Array2<T>> {
        haar2d(coeffs, Direction::Synthesis)
    }
}

/// Pixel basis (`Ψ_p = I`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PixelBasis;

impl<T: Real> SpatialBasis<T> for PixelBasis {
    fn analysis(&self, frame: ArrayView2<'_, T>) -> Result<Array2<T>> {
        Ok(frame.to_owned())
    }
    fn synthesis(&self, coeffs: ArrayView2<'_, T>) -> Result<Array2<T>> {
        Ok(coeffs.to_owned())
    }
}

/// Applies a frame transform to every band row of a band×pixel matrix.
fn map_frames<T: Real>(
    x: &Array2<T>,
    n_v: usize,
    n_h: usize,
    f: impl Fn(ArrayView2<'_, T>) -> Result<Array2<T>>,
) -> Result<Array2<T>> {
    let mut out = Array2::zeros(x.dim());
    let mut buf = vec![T::zero(); n_v * n_h];
    for (k, row) in x.outer_iter().enumerate() {
        for (d, s) in buf.iter_mut().zip(row.iter()) {
            *d = *s;
        }
        let mapped = f(frame_view(&buf, n_v, n_h))?;
        for (o, v) in out.row_mut(k).iter_mut().zip(vectorize(mapped.view())) {
            *o = v;
        }
    }
    Ok(out)
}

fn check_x<T: Real>(x: ArrayView2<'_, T>, meas: &Measurements<T>) -> Result<()> {
    let (n_v, n_h, n_s) = meas.cube_dims();
    if x.dim() != (n_s, n_v * n_h) {
        return Err(Error::Dimension(format!(
            "estimate is {}x{}, measurements describe {}x{}",
            x.nrows(),
            x.ncols(),
            n_s,
            n_v * n_h
        )));
    }
    Ok(())
}

fn check_basis<T: Real>(basis: &SpectralBasis<T>, meas: &Measurements<T>) -> Result<()> {
    if basis.n_s() != meas.spectral.n_s() {
        return Err(Error::Dimension(format!(
            "spectral basis has {} bands, measurements have {}",
            basis.n_s(),
            meas.spectral.n_s()
        )));
    }
    Ok(())
}

fn data_term<T: Real>(x: ArrayView2<'_, T>, meas: &Measurements<T>) -> Result<T> {
    let proj = project(x, &meas.spectral, &meas.spatial)?;
    let r = frobenius_distance(meas.y.view(), proj.view());
    Ok(T::lit(0.5) * r * r)
}

fn l1<T: Real>(m: &Array2<T>) -> T {
    m.iter().map(|v| v.abs()).sum()
}

/// `½‖Y − Φ_s X Φ_pᵀ‖_F² + γ‖Ψ_sᵀ X Ψ_p‖₁,₁`
pub fn cost_bpdn<T: Real, B: SpatialBasis<T>>(
    x: ArrayView2<'_, T>,
    meas: &Measurements<T>,
    spatial: &B,
    spectral: &SpectralBasis<T>,
    gamma: T,
) -> Result<T> {
    check_x(x, meas)?;
    check_basis(spectral, meas)?;
    let data = data_term(x, meas)?;
    if gamma == T::zero() {
        return Ok(data);
    }
    let c = spectral.apply(x, BasisMode::Analysis)?;
    let c = map_frames(&c, meas.spatial.n_v(), meas.spatial.n_h(), |f| spatial.analysis(f))?;
    Ok(data + gamma * l1(&c))
}

/// `½‖Y − Φ_s X Φ_pᵀ‖_F² + γ₁ Σₖ tv(F_k) + γ₂‖Ψ_sᵀ X‖₁,₁`
pub fn cost_hybrid<T: Real>(
    x: ArrayView2<'_, T>,
    meas: &Measurements<T>,
    spectral: &SpectralBasis<T>,
    gamma1: T,
    gamma2: T,
) -> Result<T> {
    check_x(x, meas)?;
    check_basis(spectral, meas)?;
    let mut cost = data_term(x, meas)?;
    if gamma1 != T::zero() {
        cost += gamma1 * tv_sum(x, meas.spatial.n_v(), meas.spatial.n_h())?;
    }
    if gamma2 != T::zero() {
        cost += gamma2 * l1(&spectral.apply(x, BasisMode::Analysis)?);
    }
    Ok(cost)
}

/// Result of one (sub)gradient + prox step.
struct Step<T> {
    next: Array2<T>,
    subgradient_norm: T,
}

/// `Φ_sᵀ(Y − Φ_s X Φ_pᵀ)Φ_p`
fn negative_data_gradient<T: Real>(x: &Array2<T>, meas: &Measurements<T>) -> Result<Array2<T>> {
    let proj = project(x.view(), &meas.spectral, &meas.spatial)?;
    let resid = &meas.y - &proj;
    adjoint(resid.view(), &meas.spectral, &meas.spatial)
}

fn squared_relative_error<T: Real>(truth: ArrayView2<'_, T>, x: &Array2<T>) -> T {
    let d = frobenius_distance(truth, x.view());
    let n = frobenius_norm(truth);
    d * d / (n * n)
}

fn run<T: Real>(
    meas: &Measurements<T>,
    config: &SolverConfig<T>,
    truth: Option<ArrayView2<'_, T>>,
    mut step: impl FnMut(&Array2<T>) -> Result<Step<T>>,
    cost: impl Fn(&Array2<T>) -> Result<T>,
) -> Result<(Array2<T>, Trace<T>)> {
    config.validate()?;
    if let Some(t) = truth {
        check_x(t, meas)?;
        if frobenius_norm(t) == T::zero() {
            return Err(Error::UndefinedMetric);
        }
    }
    let lambda = config.lambda.to_f64().unwrap_or(f64::NAN);
    let x0 = meas.back_projection();
    let mut x_prev = x0.clone();
    let mut xt_prev = x0;
    let mut alpha = T::one();
    let mut records = Vec::new();
    let mut reason = TerminalReason::MaxIters;

    for n in 1..=config.max_iters {
        let Step {
            next: xt,
            subgradient_norm,
        } = step(&x_prev)?;
        let x = if config.accelerate {
            let (alpha_next, weight) = fista_momentum(alpha);
            alpha = alpha_next;
            if weight == T::zero() {
                xt.clone()
            } else {
                &xt + &((&xt - &xt_prev) * weight)
            }
        } else {
            xt.clone()
        };
        let (halt, rel_change) = stopping(x.view(), x_prev.view(), config.tau, n, config.max_iters);
        let c = cost(&x)?;
        if !c.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                lambda,
                iter: n,
                reason: "objective became non-finite".into(),
            });
        }
        if rel_change.is_finite() && rel_change > T::lit(DIVERGENCE_THRESHOLD) {
            return Err(Error::Divergence {
                lambda,
                iter: n,
                reason: format!("relative change {rel_change:e} exceeds {DIVERGENCE_THRESHOLD:e}"),
            });
        }
        records.push(IterationRecord {
            iter: n,
            rel_change,
            cost: c,
            subgradient_norm,
            rel_error: truth.map(|t| squared_relative_error(t, &x)),
        });
        xt_prev = xt;
        x_prev = x;
        if let Some(r) = halt {
            reason = r;
            break;
        }
    }
    Ok((x_prev, Trace { records, reason }))
}

/// Accelerated proximal-gradient solver for the BPDN objective
/// `½‖Y − Φ_s X Φ_pᵀ‖_F² + γ‖Ψ_sᵀ X Ψ_p‖₁,₁`, started from `Φ_sᵀ Y Φ_p`.
pub fn apg_bpdn<T: Real, B: SpatialBasis<T>>(
    meas: &Measurements<T>,
    spatial: &B,
    spectral: &SpectralBasis<T>,
    config: &SolverConfig<T>,
    truth: Option<ArrayView2<'_, T>>,
) -> Result<(Array2<T>, Trace<T>)> {
    check_basis(spectral, meas)?;
    if !spectral.is_orthonormal() {
        return Err(Error::Precondition("APG-BPDN needs an orthonormal spectral basis".into()));
    }
    let (n_v, n_h) = (meas.spatial.n_v(), meas.spatial.n_h());
    let threshold = config.lambda * config.gamma;
    run(
        meas,
        config,
        truth,
        |x| {
            let g = negative_data_gradient(x, meas)?;
            let half = x + &(&g * config.lambda);
            let c = spectral.apply(half.view(), BasisMode::Analysis)?;
            let mut c = map_frames(&c, n_v, n_h, |f| spatial.analysis(f))?;
            prox_l1_inplace(&mut c, threshold);
            let c = map_frames(&c, n_v, n_h, |f| spatial.synthesis(f))?;
            Ok(Step {
                next: spectral.apply(c.view(), BasisMode::Synthesis)?,
                subgradient_norm: frobenius_norm(g.view()),
            })
        },
        |x| cost_bpdn(x.view(), meas, spatial, spectral, config.gamma),
    )
}

/// `Sₙ = −Φ_sᵀ(Y − Φ_s X Φ_pᵀ)Φ_p + γ₁ H(X)`, returned negated.
fn hybrid_descent<T: Real>(x: &Array2<T>, meas: &Measurements<T>, gamma1: T) -> Result<Array2<T>> {
    let mut g = negative_data_gradient(x, meas)?;
    if gamma1 != T::zero() {
        let (_, h) = tv_sum_and_subgradient(x.view(), meas.spatial.n_v(), meas.spatial.n_h())?;
        g.scaled_add(-gamma1, &h);
    }
    Ok(g)
}

/// Accelerated proximal-subgradient solver for the hybrid objective
/// `½‖Y − Φ_s X Φ_pᵀ‖_F² + γ₁ Σₖ tv(F_k) + γ₂‖Ψ_sᵀ X‖₁,₁`.
pub fn recover_hybrid<T: Real>(
    meas: &Measurements<T>,
    spectral: &SpectralBasis<T>,
    config: &SolverConfig<T>,
    truth: Option<ArrayView2<'_, T>>,
) -> Result<(Array2<T>, Trace<T>)> {
    check_basis(spectral, meas)?;
    if !spectral.is_orthonormal() {
        return Err(Error::Precondition(
            "recover_hybrid needs an orthonormal spectral basis; use recover_hybrid_nonortho".into(),
        ));
    }
    let threshold = config.lambda * config.gamma2;
    run(
        meas,
        config,
        truth,
        |x| {
            let g = hybrid_descent(x, meas, config.gamma1)?;
            let half = x + &(&g * config.lambda);
            let mut c = spectral.apply(half.view(), BasisMode::Analysis)?;
            prox_l1_inplace(&mut c, threshold);
            Ok(Step {
                next: spectral.apply(c.view(), BasisMode::Synthesis)?,
                subgradient_norm: frobenius_norm(g.view()),
            })
        },
        |x| cost_hybrid(x.view(), meas, spectral, config.gamma1, config.gamma2),
    )
}

/// Hybrid solver for a general full-rank spectral dictionary: the descent
/// direction is preconditioned by `(Ψ_s Ψ_sᵀ)⁻¹` and the prox result is
/// mapped back through `Ψ_s⁻ᵀ`.
pub fn recover_hybrid_nonortho<T: Real>(
    meas: &Measurements<T>,
    dictionary: &SpectralBasis<T>,
    config: &SolverConfig<T>,
    truth: Option<ArrayView2<'_, T>>,
) -> Result<(Array2<T>, Trace<T>)> {
    check_basis(dictionary, meas)?;
    // fail early on a rank-deficient dictionary
    dictionary.apply(Array2::zeros((dictionary.n_s(), 1)).view(), BasisMode::GramInverse)?;
    let threshold = config.lambda * config.gamma2;
    run(
        meas,
        config,
        truth,
        |x| {
            let g = hybrid_descent(x, meas, config.gamma1)?;
            let pre = dictionary.apply(g.view(), BasisMode::GramInverse)?;
            let half = x + &(&pre * config.lambda);
            let mut r = dictionary.apply(half.view(), BasisMode::Analysis)?;
            prox_l1_inplace(&mut r, threshold);
            Ok(Step {
                next: dictionary.apply(r.view(), BasisMode::PinvSynthesis)?,
                subgradient_norm: frobenius_norm(g.view()),
            })
        },
        |x| cost_hybrid(x.view(), meas, dictionary, config.gamma1, config.gamma2),
    )
}
