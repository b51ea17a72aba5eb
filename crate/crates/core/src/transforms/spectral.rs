//! Spectral representation basis `Ψ_s`, either orthonormal (learned by SVD)
//! or a general full-rank dictionary applied through its pseudoinverse.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::{orthonormality_defect, symmetric_eigen};
use crate::scalar::Real;

/// How [`SpectralBasis::apply`] maps an `n_s × m` matrix `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMode {
    /// `Ψᵀ M`
    Analysis,
    /// `Ψ M`
    Synthesis,
    /// `Ψ⁻¹ M` (Moore–Penrose)
    PinvAnalysis,
    /// `Ψ⁻ᵀ M`
    PinvSynthesis,
    /// `(Ψ Ψᵀ)⁻¹ M`
    GramInverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis<T> {
    psi: Array2<T>,
    orthonormal: bool,
    pinv: Array2<T>,
    gram_inverse: Option<Array2<T>>,
    degenerate: bool,
}

fn ortho_tolerance<T: Real>(n: usize) -> T {
    T::lit(1e-10_f64.max(100.0 * n as f64 * T::eps64()))
}

impl<T: Real> SpectralBasis<T> {
    pub fn identity(n_s: usize) -> Self {
        let eye = Array2::eye(n_s);
        Self {
            psi: eye.clone(),
            orthonormal: true,
            pinv: eye.clone(),
            gram_inverse: Some(eye),
            degenerate: false,
        }
    }

    /// Wraps a square matrix whose columns are orthonormal.
    pub fn orthonormal(psi: Array2<T>) -> Result<Self> {
        let n = check_square(&psi)?;
        let defect = orthonormality_defect(psi.view());
        if !(defect <= ortho_tolerance::<T>(n)) {
            return Err(Error::Precondition(format!(
                "basis columns are not orthonormal (max |ΨᵀΨ − I| = {defect:e})"
            )));
        }
        let pinv = psi.t().to_owned();
        Ok(Self {
            psi,
            orthonormal: true,
            pinv,
            gram_inverse: Some(Array2::eye(n)),
            degenerate: false,
        })
    }

    /// Wraps an arbitrary square dictionary; pseudoinverse maps are
    /// precomputed. Rank deficiency only fails later, in
    /// [`BasisMode::GramInverse`]. An orthonormal input gets the exact
    /// transpose and identity maps.
    pub fn dictionary(psi: Array2<T>) -> Result<Self> {
        let n = check_square(&psi)?;
        if psi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("dictionary entries must be finite".into()));
        }
        if orthonormality_defect(psi.view()) <= ortho_tolerance::<T>(n) {
            return Self::orthonormal(psi);
        }
        let pinv = pseudoinverse(psi.view())?;
        let gram_inverse = inverse_spd(psi.dot(&psi.t()).view())?;
        Ok(Self {
            psi,
            orthonormal: false,
            pinv,
            gram_inverse,
            degenerate: false,
        })
    }

    pub fn n_s(&self) -> usize {
        self.psi.nrows()
    }

    pub fn matrix(&self) -> ArrayView2<'_, T> {
        self.psi.view()
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    /// Set when the basis was learned from all-zero samples and fell back
    /// to the identity.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn pinv(&self) -> ArrayView2<'_, T> {
        self.pinv.view()
    }

    pub fn apply(&self, m: ArrayView2<'_, T>, mode: BasisMode) -> Result<Array2<T>> {
        if m.nrows() != self.n_s() {
            return Err(Error::Dimension(format!(
                "basis has {} bands, matrix has {} rows",
                self.n_s(),
                m.nrows()
            )));
        }
        Ok(match mode {
            BasisMode::Analysis => self.psi.t().dot(&m),
            BasisMode::Synthesis => self.psi.dot(&m),
            BasisMode::PinvAnalysis => self.pinv.dot(&m),
            BasisMode::PinvSynthesis => self.pinv.t().dot(&m),
            BasisMode::GramInverse => match &self.gram_inverse {
                Some(g) => g.dot(&m),
                None => {
                    return Err(Error::Singular(
                        "Ψ Ψᵀ is rank deficient; dictionary needs full row rank".into(),
                    ))
                }
            },
        })
    }
}

fn check_square<T>(psi: &Array2<T>) -> Result<usize> {
    let (r, c) = psi.dim();
    if r != c || r == 0 {
        return Err(Error::Dimension(format!(
            "spectral basis must be square and non-empty, got {r}x{c}"
        )));
    }
    Ok(r)
}

fn cutoff<T: Real>(largest: T, n: usize) -> T {
    largest * T::from_usize_lossy(n) * T::epsilon() * T::lit(10.0)
}

fn pseudoinverse<T: Real>(a: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = a.ncols();
    let (vals, vecs) = symmetric_eigen(a.t().dot(&a).view())?;
    let tol = cutoff(vals[0].max(T::zero()), n);
    let mut scaled = vecs.clone();
    for (k, &lam) in vals.iter().enumerate() {
        let inv = if lam > tol && lam > T::zero() { T::one() / lam } else { T::zero() };
        scaled.column_mut(k).mapv_inplace(|v| v * inv);
    }
    Ok(scaled.dot(&vecs.t()).dot(&a.t()))
}

fn inverse_spd<T: Real>(g: ArrayView2<'_, T>) -> Result<Option<Array2<T>>> {
    let n = g.nrows();
    let (vals, vecs) = symmetric_eigen(g)?;
    let tol = cutoff(vals[0].max(T::zero()), n);
    if vals.iter().any(|&l| !(l > tol)) {
        return Ok(None);
    }
    let mut scaled = vecs.clone();
    for (k, &lam) in vals.iter().enumerate() {
        scaled.column_mut(k).mapv_inplace(|v| v / lam);
    }
    Ok(Some(scaled.dot(&vecs.t())))
}

/// Left singular vectors of `samples` (`n_s × ñ_p`), ordered by descending
/// singular value, each column signed so its largest-magnitude entry is
/// positive.
pub fn learn_spectral_basis<T: Real>(samples: ArrayView2<'_, T>) -> Result<SpectralBasis<T>> {
    let (n_s, count) = samples.dim();
    if n_s == 0 || count == 0 {
        return Err(Error::Dimension(format!(
            "need at least one sample spectrum, got {n_s}x{count}"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("sample spectra must be finite".into()));
    }
    if samples.iter().all(|v| *v == T::zero()) {
        log::warn!("all sample spectra are zero; using the identity spectral basis");
        let mut basis = SpectralBasis::identity(n_s);
        basis.degenerate = true;
        return Ok(basis);
    }
    let gram = samples.dot(&samples.t());
    let (_, mut u) = symmetric_eigen(gram.view())?;
    for mut col in u.columns_mut() {
        let pivot = col
            .iter()
            .copied()
            .fold(T::zero(), |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < T::zero() {
            col.mapv_inplace(|v| -v);
        }
    }
    SpectralBasis::orthonormal(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_distance;
    use ndarray::{array, Array1};

    fn pseudo_random(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        Array2::from_shape_fn((rows, cols), |_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
    }

    #[test]
    fn axis_aligned_samples_give_identity() {
        let b = learn_spectral_basis(array![[2.0, 0.0], [0.0, 1.0]].view()).unwrap();
        assert!(frobenius_distance(b.matrix(), Array2::<f64>::eye(2).view()) < 1e-14);
        assert!(b.is_orthonormal());
    }

    #[test]
    fn rank_one_leading_vector() {
        let u: Array1<f64> = array![3.0, -1.0, 2.0, 0.5];
        let v = array![1.0, 2.0, -0.5];
        let x = Array2::from_shape_fn((4, 3), |(r, c)| u[r] * v[c]);
        let b = learn_spectral_basis(x.view()).unwrap();
        let un = &u / u.dot(&u).sqrt();
        // oracle: X̂X̂ᵀ = ‖v‖² u uᵀ has leading eigenvector ±u/‖u‖
        let first: Array1<f64> = b.matrix().column(0).to_owned();
        assert!((first.dot(&un).abs() - 1.0).abs() < 1e-12);
        // sign convention: largest-magnitude entry positive
        assert!(first[0] > 0.0);
    }

    #[test]
    fn random_samples_orthonormal_and_diagonalizing() {
        let x = pseudo_random(8, 50, 7);
        let b = learn_spectral_basis(x.view()).unwrap();
        let psi = b.matrix();
        assert!(orthonormality_defect(psi) < 1e-10);
        let d = psi.t().dot(&x.dot(&x.t())).dot(&psi);
        let mut prev = f64::INFINITY;
        for r in 0..8 {
            for c in 0..8 {
                if r != c {
                    assert!(d[[r, c]].abs() < 1e-9);
                }
            }
            assert!(d[[r, r]] <= prev + 1e-12);
            prev = d[[r, r]];
        }
    }

    #[test]
    fn ill_conditioned_samples_still_orthonormal() {
        let mut x = pseudo_random(6, 10, 3);
        for c in 0..10 {
            x[[5, c]] = x[[4, c]] * (1.0 + 1e-12);
        }
        x.row_mut(0).mapv_inplace(|v| v * 1e8);
        let b = learn_spectral_basis(x.view()).unwrap();
        assert!(orthonormality_defect(b.matrix()) < 1e-10);
    }

    #[test]
    fn zero_samples_fall_back_to_identity() {
        let b = learn_spectral_basis(Array2::<f64>::zeros((3, 4)).view()).unwrap();
        assert!(b.is_degenerate());
        assert_eq!(b.matrix(), Array2::<f64>::eye(3));
    }

    #[test]
    fn identity_modes_are_identity() {
        let b = SpectralBasis::<f64>::identity(3);
        let m = pseudo_random(3, 5, 11);
        for mode in [
            BasisMode::Analysis,
            BasisMode::Synthesis,
            BasisMode::PinvAnalysis,
            BasisMode::PinvSynthesis,
            BasisMode::GramInverse,
        ] {
            assert_eq!(b.apply(m.view(), mode).unwrap(), m);
        }
    }

    #[test]
    fn orthonormal_round_trip_and_pinv_coincide() {
        let x = pseudo_random(5, 40, 5);
        let b = learn_spectral_basis(x.view()).unwrap();
        let m = pseudo_random(5, 7, 9);
        let a = b.apply(m.view(), BasisMode::Analysis).unwrap();
        let back = b.apply(a.view(), BasisMode::Synthesis).unwrap();
        assert!(frobenius_distance(back.view(), m.view()) < 1e-12);
        let pa = b.apply(m.view(), BasisMode::PinvAnalysis).unwrap();
        assert!(frobenius_distance(pa.view(), a.view()) < 1e-14);
    }

    #[test]
    fn dictionary_pinv_consistency() {
        let mut psi = pseudo_random(4, 4, 21);
        for i in 0..4 {
            psi[[i, i]] += 3.0;
        }
        let b = SpectralBasis::dictionary(psi.clone()).unwrap();
        assert!(!b.is_orthonormal());
        let m = pseudo_random(4, 6, 2);
        let s = b.apply(m.view(), BasisMode::Synthesis).unwrap();
        let back = b.apply(s.view(), BasisMode::PinvAnalysis).unwrap();
        assert!(frobenius_distance(back.view(), m.view()) < 1e-9);
        // Ψ Ψ⁻¹ Ψ = Ψ
        let p = psi.dot(&b.pinv()).dot(&psi);
        assert!(frobenius_distance(p.view(), psi.view()) < 1e-10);
        // Ψ⁻ᵀ Ψ⁻¹ = (Ψ Ψᵀ)⁻¹
        let lhs = b.apply(b.apply(m.view(), BasisMode::PinvAnalysis).unwrap().view(), BasisMode::PinvSynthesis).unwrap();
        let rhs = b.apply(m.view(), BasisMode::GramInverse).unwrap();
        assert!(frobenius_distance(lhs.view(), rhs.view()) < 1e-10);
    }

    #[test]
    fn rank_deficient_dictionary() {
        let psi = array![[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0, 0.0, 1.0]];
        let b = SpectralBasis::dictionary(psi.clone()).unwrap();
        let p = psi.dot(&b.pinv()).dot(&psi);
        assert!(frobenius_distance(p.view(), psi.view()) < 1e-10);
        let m = Array2::<f64>::ones((3, 2));
        assert!(matches!(b.apply(m.view(), BasisMode::GramInverse), Err(Error::Singular(_))));
    }

    #[test]
    fn errors() {
        let b = SpectralBasis::<f64>::identity(3);
        assert!(matches!(
            b.apply(Array2::zeros((2, 2)).view(), BasisMode::Analysis),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            SpectralBasis::orthonormal(array![[1.0, 1.0], [0.0, 1.0]]),
            Err(Error::Precondition(_))
        ));
        assert!(SpectralBasis::orthonormal(Array2::<f64>::zeros((2, 3))).is_err());
    }
}
