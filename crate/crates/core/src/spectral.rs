//! Abstract weakly-coupled systems, the planar-molecule model registry, and
//! the closed-form energy/truncation bounds.
//!
//! A model is a countable family of eigenvalues λ_k together with the
//! entries ⟨φ_j, Bφ_k⟩ of a bounded skew-adjoint coupling operator. Galerkin
//! systems are the N×N compressions of that pair. Indices are 1-based
//! throughout, matching the φ_1, φ_2, … labeling of the levels.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt::Write as _;
use num_complex::Complex64;

use crate::linalg::CMat;
use crate::{Error, Result};

type EigenFn = dyn Fn(usize) -> f64 + Send + Sync;
type CouplingFn = dyn Fn(usize, usize) -> Complex64 + Send + Sync;

/// The abstract pair (A, B): eigenvalues of the drift and entries of the
/// coupling operator, given by callbacks so user models beyond the registry
/// are supported.
#[derive(Clone)]
pub struct SpectralModel {
    name: String,
    eigenvalues: Arc<EigenFn>,
    coupling: Arc<CouplingFn>,
    coupling_norm_bound: f64,
    coupling_constant: Option<f64>,
}

impl SpectralModel {
    pub fn new(
        name: &str,
        eigenvalues: Box<EigenFn>,
        coupling: Box<CouplingFn>,
        coupling_norm_bound: f64,
        coupling_constant: Option<f64>,
    ) -> Self {
        SpectralModel {
            name: String::from(name),
            eigenvalues: Arc::from(eigenvalues),
            coupling: Arc::from(coupling),
            coupling_norm_bound,
            coupling_constant,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// λ_k, 1-based.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        (self.eigenvalues)(k)
    }

    /// ⟨φ_j, Bφ_k⟩, 1-based.
    pub fn coupling(&self, j: usize, k: usize) -> Complex64 {
        debug_assert!(j >= 1 && k >= 1);
        (self.coupling)(j, k)
    }

    pub fn coupling_norm_bound(&self) -> f64 {
        self.coupling_norm_bound
    }

    pub fn coupling_constant(&self) -> Option<f64> {
        self.coupling_constant
    }

    /// Compress (A, B) to the span of the first N eigenvectors.
    pub fn galerkin(&self, n: usize) -> Result<GalerkinSystem> {
        if n < 2 {
            return Err(Error::InvalidDimension { n, min: 2 });
        }
        let drift: Vec<f64> = (1..=n).map(|k| self.eigenvalue(k)).collect();
        let mut b = CMat::zeros(n, n);
        for j in 1..=n {
            for k in 1..=n {
                b[(j - 1, k - 1)] = self.coupling(j, k);
            }
        }
        GalerkinSystem::new(drift, b)
    }
}

/// The compressed pair (A^(N), B^(N)): diagonal drift spectrum plus a dense
/// skew-adjoint coupling matrix.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    dim: usize,
    drift_diagonal: Vec<f64>,
    coupling_matrix: CMat,
    drift_norm: f64,
    coupling_norm: f64,
}

impl GalerkinSystem {
    /// Validates skew-adjointness and drift monotonicity; computes the
    /// spectral norms of both compressions.
    pub fn new(drift_diagonal: Vec<f64>, coupling_matrix: CMat) -> Result<Self> {
        let dim = drift_diagonal.len();
        if dim < 2 {
            return Err(Error::InvalidDimension { n: dim, min: 2 });
        }
        if drift_diagonal[0] < 0.0 {
            return Err(Error::Domain("drift eigenvalues must be nonnegative"));
        }
        for w in drift_diagonal.windows(2) {
            if w[1] < w[0] {
                return Err(Error::Domain("drift eigenvalues must be nondecreasing"));
            }
        }
        let (row, col, defect) = coupling_matrix.skew_adjoint_defect();
        if defect > 1e-12 {
            return Err(Error::NotSkewAdjoint { row, col, defect });
        }
        let coupling_norm = coupling_matrix.skew_spectral_norm()?;
        let drift_norm = drift_diagonal[dim - 1];
        Ok(GalerkinSystem {
            dim,
            drift_diagonal,
            coupling_matrix,
            drift_norm,
            coupling_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift_diagonal(&self) -> &[f64] {
        &self.drift_diagonal
    }

    /// λ_k, 1-based.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.drift_diagonal[k - 1]
    }

    pub fn coupling_matrix(&self) -> &CMat {
        &self.coupling_matrix
    }

    /// b_jk = ⟨φ_j, Bφ_k⟩, 1-based.
    pub fn coupling(&self, j: usize, k: usize) -> Complex64 {
        self.coupling_matrix[(j - 1, k - 1)]
    }

    /// ‖A^(N)‖ = λ_N.
    pub fn drift_norm(&self) -> f64 {
        self.drift_norm
    }

    /// Spectral norm of B^(N).
    pub fn coupling_norm(&self) -> f64 {
        self.coupling_norm
    }

    /// Discrete half-norm (Σ λ_k |ψ_k|²)^{1/2}; its square is the expected
    /// energy.
    pub fn half_norm(&self, amplitudes: &[Complex64]) -> f64 {
        libm::sqrt(
            self.drift_diagonal
                .iter()
                .zip(amplitudes.iter())
                .map(|(l, a)| l * a.norm_sqr())
                .sum(),
        )
    }

    /// If every eigenvalue is (numerically) an integer, return them as such;
    /// resonance analysis then uses exact integer arithmetic.
    pub fn integer_spectrum(&self) -> Option<Vec<i64>> {
        let mut out = Vec::with_capacity(self.dim);
        for &l in &self.drift_diagonal {
            let r = libm::floor(l + 0.5);
            if libm::fabs(l - r) > 1e-9 * (1.0 + libm::fabs(l)) {
                return None;
            }
            out.push(r as i64);
        }
        Some(out)
    }

    /// Structured text description: name, N, drift vector, coupling triplets
    /// (j, k, re, im) over the nonzero upper-triangle entries.
    pub fn describe(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model {name}");
        let _ = writeln!(s, "dim {}", self.dim);
        let mut drift = String::from("drift");
        for l in &self.drift_diagonal {
            let _ = write!(drift, " {l:.17e}");
        }
        let _ = writeln!(s, "{drift}");
        for j in 1..=self.dim {
            for k in j..=self.dim {
                let b = self.coupling(j, k);
                if b != Complex64::new(0.0, 0.0) {
                    let _ = writeln!(s, "coupling {j} {k} {:.17e} {:.17e}", b.re, b.im);
                }
            }
        }
        s
    }
}

/// Planar molecule, odd subspace: drift 1, 4, 9, …, N² and tridiagonal
/// coupling entries −i/2. The coupling constant 3/2 matches the e^{13/2}
/// energy envelope at L¹ budget 13/3.
pub fn planar_odd_model() -> SpectralModel {
    SpectralModel::new(
        "planar-odd",
        Box::new(|k| (k * k) as f64),
        Box::new(|j, k| {
            if j.abs_diff(k) == 1 {
                Complex64::new(0.0, -0.5)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
        1.0,
        Some(1.5),
    )
}

/// Planar molecule, even subspace: drift 0, 1, 4, …, (N−1)² with first
/// coupling entry −i/√2, then −i/2 down the band. The constant phase shift
/// of the zero eigenvalue is dropped.
pub fn planar_even_model() -> SpectralModel {
    SpectralModel::new(
        "planar-even",
        Box::new(|k| ((k - 1) * (k - 1)) as f64),
        Box::new(|j, k| {
            if j.abs_diff(k) == 1 {
                if j.min(k) == 1 {
                    Complex64::new(0.0, -core::f64::consts::FRAC_1_SQRT_2)
                } else {
                    Complex64::new(0.0, -0.5)
                }
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
        1.0,
        Some(1.5),
    )
}

/// Look up a registry model by string id.
pub fn registry(id: &str) -> Option<SpectralModel> {
    match id {
        "planar-odd" => Some(planar_odd_model()),
        "planar-even" => Some(planar_even_model()),
        _ => None,
    }
}

pub fn build_planar_odd(n: usize) -> Result<GalerkinSystem> {
    planar_odd_model().galerkin(n)
}

pub fn build_planar_even(n: usize) -> Result<GalerkinSystem> {
    planar_even_model().galerkin(n)
}

/// Energy-growth envelope e^{cK} h0 for controls of L¹ norm at most K.
pub fn energy_growth_bound(c: f64, k_budget: f64, h0: f64) -> Result<f64> {
    if c < 0.0 || k_budget < 0.0 || h0 < 0.0 {
        return Err(Error::Domain("energy bound needs c, K, h0 >= 0"));
    }
    Ok(libm::exp(c * k_budget) * h0)
}

/// Tail of the propagated state beyond level N: e^{cK} h0 / √λ_{N+1}.
pub fn truncation_tail_bound(c: f64, k_budget: f64, lambda_next: f64, h0: f64) -> Result<f64> {
    if lambda_next <= 0.0 {
        return Err(Error::Domain("lambda_{N+1} must be positive"));
    }
    Ok(energy_growth_bound(c, k_budget, h0)? / libm::sqrt(lambda_next))
}

/// Distance between the full flow and the Galerkin propagator:
/// λ_{N+1}^{-1/2} (1 + K‖B‖) e^{cK} h0.
pub fn galerkin_error_bound(
    c: f64,
    k_budget: f64,
    lambda_next: f64,
    b_norm: f64,
    h0: f64,
) -> Result<f64> {
    if b_norm < 0.0 {
        return Err(Error::Domain("coupling norm must be nonnegative"));
    }
    Ok((1.0 + k_budget * b_norm) * truncation_tail_bound(c, k_budget, lambda_next, h0)?)
}

/// Population of level k+1 starting from φ_1 is at most L1^k / k! for any
/// locally integrable control.
pub fn factorial_population_bound(k: usize, l1: f64) -> Result<f64> {
    if l1 < 0.0 {
        return Err(Error::Domain("L1 norm must be nonnegative"));
    }
    let mut out = 1.0f64;
    for i in 1..=k {
        out *= l1 / i as f64;
    }
    Ok(out)
}

/// Smallest Galerkin order N with K ‖B‖ e^{cK} h0 / √λ_{N+1} ≤ target.
/// This is the projection-mismatch term of the Galerkin error, which is the
/// constant used for the reference dimension estimate.
pub fn dimension_for_target(
    model: &SpectralModel,
    c: f64,
    k_budget: f64,
    b_norm: f64,
    h0: f64,
    target: f64,
) -> Result<usize> {
    if target <= 0.0 {
        return Err(Error::Domain("target error must be positive"));
    }
    let numerator = k_budget * b_norm * energy_growth_bound(c, k_budget, h0)?;
    let ok = |n: usize| numerator / libm::sqrt(model.eigenvalue(n + 1)) <= target;
    let mut hi = 2usize;
    while !ok(hi) {
        hi *= 2;
        if hi > 1 << 40 {
            return Err(Error::Domain("target error unreachable"));
        }
    }
    let mut lo = hi / 2; // invariant: !ok(lo) || lo == 1
    if ok(lo) {
        // target already met at the doubling floor; walk down
        while lo > 1 && ok(lo - 1) {
            lo -= 1;
        }
        return Ok(lo);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_odd_small_matrices() {
        let sys = build_planar_odd(3).unwrap();
        assert_eq!(sys.drift_diagonal(), &[1.0, 4.0, 9.0]);
        assert_eq!(sys.coupling(1, 2), Complex64::new(0.0, -0.5));
        assert_eq!(sys.coupling(2, 1), Complex64::new(0.0, -0.5));
        assert_eq!(sys.coupling(2, 3), Complex64::new(0.0, -0.5));
        assert_eq!(sys.coupling(1, 3), Complex64::new(0.0, 0.0));

        let sys = build_planar_odd(2).unwrap();
        assert_eq!(sys.drift_diagonal(), &[1.0, 4.0]);
        assert_eq!(sys.coupling(1, 2), Complex64::new(0.0, -0.5));
    }

    #[test]
    fn planar_odd_coupling_norm_n22() {
        let sys = build_planar_odd(22).unwrap();
        let expect = libm::cos(core::f64::consts::PI / 23.0);
        assert!((sys.coupling_norm() - expect).abs() < 1e-12);
        assert_eq!(sys.drift_norm(), 484.0);
    }

    #[test]
    fn planar_even_small_matrices() {
        let sys = build_planar_even(3).unwrap();
        assert_eq!(sys.drift_diagonal(), &[0.0, 1.0, 4.0]);
        let s2 = 1.0 / libm::sqrt(2.0);
        assert!((sys.coupling(1, 2) - Complex64::new(0.0, -s2)).norm() < 1e-15);
        assert_eq!(sys.coupling(2, 3), Complex64::new(0.0, -0.5));

        let sys = build_planar_even(2).unwrap();
        assert_eq!(sys.drift_diagonal(), &[0.0, 1.0]);
        assert!((sys.coupling(1, 2).norm() - s2).abs() < 1e-15);
    }

    #[test]
    fn dimension_rejected_below_two() {
        assert!(matches!(
            build_planar_odd(1),
            Err(Error::InvalidDimension { n: 1, min: 2 })
        ));
        assert!(matches!(
            build_planar_even(0),
            Err(Error::InvalidDimension { .. })
        ));
    }

    #[test]
    fn energy_growth_examples() {
        // e^{13/2} ~ 665
        let b = energy_growth_bound(1.5, 13.0 / 3.0, 1.0).unwrap();
        assert!((b - libm::exp(6.5)).abs() < 1e-12);
        assert!((b - 665.0).abs() < 1.0);
        assert_eq!(energy_growth_bound(7.0, 0.0, 1.0).unwrap(), 1.0);
        let exact = energy_growth_bound(1.0, libm::log(2.0), 2.0).unwrap();
        assert!((exact - 4.0).abs() < 1e-14);
        assert!(energy_growth_bound(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn tail_bound_examples() {
        let b = truncation_tail_bound(1.5, 13.0 / 3.0, 529.0, 1.0).unwrap();
        assert!((b - libm::exp(6.5) / 23.0).abs() < 1e-12);
        assert!((b - 28.9).abs() < 0.05);
        assert!((truncation_tail_bound(0.0, 99.0, 4.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(truncation_tail_bound(2.0, 3.0, 10.0, 0.0).unwrap(), 0.0);
        assert!(truncation_tail_bound(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn galerkin_error_bound_examples() {
        let b = galerkin_error_bound(1.5, 13.0 / 3.0, 529.0, 1.0, 1.0).unwrap();
        let expect = (1.0 + 13.0 / 3.0) * libm::exp(6.5) / 23.0;
        assert!((b - expect).abs() < 1e-10);
        assert!((b - 154.0).abs() < 0.5);
        // K = 0 reduces to the tail bound
        let b0 = galerkin_error_bound(1.5, 0.0, 529.0, 1.0, 1.0).unwrap();
        assert!((b0 - 1.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_for_reference_target() {
        // K ||B|| e^{cK} / 1e-2 = (13/3) e^{6.5} * 100 = 288228.4…, so the
        // smallest admissible order is 288228 (lambda_{N+1} = (N+1)^2).
        let model = planar_odd_model();
        let n = dimension_for_target(&model, 1.5, 13.0 / 3.0, 1.0, 1.0, 1e-2).unwrap();
        assert_eq!(n, 288228);
    }

    #[test]
    fn factorial_bound_examples() {
        let b = factorial_population_bound(21, 13.0 / 3.0).unwrap();
        assert!(b < 4.7e-7 && b > 4.5e-7, "{b}");
        assert_eq!(factorial_population_bound(0, 123.0).unwrap(), 1.0);
        assert!((factorial_population_bound(2, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(factorial_population_bound(2, -1.0).is_err());
    }

    #[test]
    fn bound_monotonicity_and_consistency() {
        let mut prev = 0.0;
        for i in 0..20 {
            let k = 0.25 * i as f64;
            let b = energy_growth_bound(1.5, k, 1.0).unwrap();
            assert!(b >= prev);
            prev = b;
        }
        for i in 1..20 {
            let lam = i as f64;
            let tail = truncation_tail_bound(1.0, 2.0, lam, 1.0).unwrap();
            let gal = galerkin_error_bound(1.0, 2.0, lam, 0.7, 1.0).unwrap();
            assert!(gal >= tail);
            if i > 1 {
                let tail_prev = truncation_tail_bound(1.0, 2.0, lam - 1.0, 1.0).unwrap();
                assert!(tail <= tail_prev);
            }
        }
    }

    #[test]
    fn registry_models_are_skew_adjoint() {
        for id in ["planar-odd", "planar-even"] {
            let model = registry(id).unwrap();
            for j in 1..=40usize {
                for k in 1..=40usize {
                    let a = model.coupling(j, k);
                    let b = model.coupling(k, j);
                    assert!((b + a.conj()).norm() < 1e-15, "{id} ({j},{k})");
                }
            }
            // eigenvalues nondecreasing, nonnegative
            let mut prev = -1.0;
            for k in 1..=200 {
                let l = model.eigenvalue(k);
                assert!(l >= prev && l >= 0.0);
                prev = l;
            }
        }
        assert!(registry("no-such-model").is_none());
    }

    #[test]
    fn describe_contains_triplets() {
        let sys = build_planar_even(2).unwrap();
        let text = sys.describe("planar-even");
        assert!(text.contains("dim 2"));
        assert!(text.contains("coupling 1 2"));
    }
}
