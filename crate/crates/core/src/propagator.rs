//! Unitary time propagation of Galerkin systems.
//!
//! Constant-control pieces are propagated exactly through the eigensolver:
//! exp(dt(A + uB)) = V e^{-i dt E} V† with (E, V) the eigendecomposition of
//! the Hermitian matrix i(A + uB). Smooth controls use midpoint-frozen
//! exponential steps (order 2). A periodic control sampled on a uniform grid
//! repeats its midpoint values every period, so the per-step unitaries are
//! cached once per period and reused.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::controls::{ControlLaw, ControlShape};
use crate::linalg::{vec_norm, CMat};
use crate::spectral::GalerkinSystem;
use crate::{Error, Result};

/// Coordinates ⟨φ_k, ψ⟩ of a point on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// Rejects non-normalized input; there is no silent renormalization.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if !(libm::fabs(norm - 1.0) <= 1e-10) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(QuantumState { amplitudes })
    }

    /// φ_k (1-based) in dimension N.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::IndexOutOfRange { index: k, dim: n });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[k - 1] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// Integration method for `propagate_control`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact composition of constant-piece exponentials.
    PiecewiseExact,
    /// Midpoint-frozen exponential steps, order 2.
    MidpointExponential,
}

/// Output recording.
#[derive(Debug, Clone, PartialEq)]
pub enum RecordGrid {
    /// That many uniform output times across the run (plus t = 0).
    Uniform(usize),
    /// Capture every k-th internal step.
    EverySteps(usize),
    /// Explicit output times (midpoint runs snap them to the step grid).
    Times(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOptions {
    pub method: Method,
    /// Requested time increment; rounded so a whole number of steps tiles
    /// the control period.
    pub step: f64,
    pub unitarity_tol: f64,
    pub record: RecordGrid,
}

impl PropagationOptions {
    /// Defaults for a given drive: dt = period/200, 2000 output times.
    pub fn default_for(control: &ControlLaw) -> Self {
        PropagationOptions {
            method: Method::MidpointExponential,
            step: control.period() / 200.0,
            unitarity_tol: 1e-10,
            record: RecordGrid::Uniform(2000),
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_record(mut self, record: RecordGrid) -> Self {
        self.record = record;
        self
    }
}

/// Recorded time evolution. Populations are |⟨φ_k, ψ⟩|² per output time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<Complex64>>,
    warnings: Vec<String>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<Complex64>] {
        &self.states
    }

    pub fn final_state(&self) -> &[Complex64] {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    /// |amplitude_k|² per recorded time, 1-based level index.
    pub fn populations(&self, k: usize) -> Result<Vec<f64>> {
        let n = self.dim();
        if k < 1 || k > n {
            return Err(Error::IndexOutOfRange { index: k, dim: n });
        }
        Ok(self.states.iter().map(|s| s[k - 1].norm_sqr()).collect())
    }

    /// All populations at record index i.
    pub fn populations_at(&self, i: usize) -> Vec<f64> {
        self.states[i].iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Time series |⟨φ_k, ψ(t)⟩|² of a trajectory.
pub fn populations(traj: &Trajectory, k: usize) -> Result<Vec<f64>> {
    traj.populations(k)
}

/// exp(dt (−i diag(λ) + u B)) via eigendecomposition of the Hermitian
/// matrix diag(λ) + i u B. dt may be negative (adjoint checks).
pub fn expm_skew(drift_diagonal: &[f64], coupling: &CMat, u: f64, dt: f64) -> Result<CMat> {
    let n = drift_diagonal.len();
    let (row, col, defect) = coupling.skew_adjoint_defect();
    if defect > 1e-12 {
        return Err(Error::NotSkewAdjoint { row, col, defect });
    }
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = Complex64::new(0.0, u) * coupling[(i, j)];
        }
        h[(i, i)] += drift_diagonal[i];
    }
    let (vals, v) = crate::linalg::eigh(&h)?;
    // U = V e^{-i dt E} V†
    let mut ve = v.clone();
    for c in 0..n {
        let phase = Complex64::new(0.0, -dt * vals[c]).exp();
        for r in 0..n {
            ve[(r, c)] *= phase;
        }
    }
    let mut u_mat = ve.matmul(&v.adjoint());
    // Eigendecomposition keeps this unitary to roundoff; re-orthonormalize
    // only if the defect is measurable.
    if unitarity_defect(&u_mat) > 1e-12 {
        gram_schmidt_columns(&mut u_mat);
    }
    Ok(u_mat)
}

fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.n_rows();
    let prod = u.adjoint().matmul(u);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - expect).norm());
        }
    }
    worst
}

fn gram_schmidt_columns(u: &mut CMat) {
    let n = u.n_rows();
    for c in 0..n {
        for prev in 0..c {
            let mut dot = Complex64::new(0.0, 0.0);
            for r in 0..n {
                dot += u[(r, prev)].conj() * u[(r, c)];
            }
            for r in 0..n {
                let sub = dot * u[(r, prev)];
                u[(r, c)] -= sub;
            }
        }
        let mut norm = 0.0;
        for r in 0..n {
            norm += u[(r, c)].norm_sqr();
        }
        let norm = libm::sqrt(norm);
        for r in 0..n {
            u[(r, c)] /= norm;
        }
    }
}

/// Exact propagation under a piecewise-constant control given as
/// (duration, value) pieces, recorded at the requested times (each must lie
/// within the total duration; an empty list records start and end).
pub fn propagate_piecewise(
    sys: &GalerkinSystem,
    pieces: &[(f64, f64)],
    psi0: &QuantumState,
    record_times: &[f64],
) -> Result<Trajectory> {
    if psi0.dim() != sys.dim() {
        return Err(Error::Domain("state dimension does not match system"));
    }
    let total: f64 = pieces.iter().map(|(d, _)| *d).sum();
    for &(d, _) in pieces {
        if !(d > 0.0) {
            return Err(Error::Domain("piece durations must be positive"));
        }
    }
    let mut grid: Vec<f64> = record_times.to_vec();
    if grid.is_empty() {
        grid = vec![total];
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Domain("record times must be strictly increasing"));
        }
    }
    if grid[0] < 0.0 || *grid.last().unwrap() > total * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::Domain("record times must lie within the run"));
    }

    let mut times = Vec::with_capacity(grid.len() + 1);
    let mut states = Vec::with_capacity(grid.len() + 1);
    let mut psi = psi0.amplitudes().to_vec();
    times.push(0.0);
    states.push(psi.clone());

    let mut t = 0.0;
    let mut gi = 0;
    while gi < grid.len() && grid[gi] <= 0.0 {
        gi += 1; // t = 0 already recorded
    }
    for &(duration, value) in pieces {
        let piece_end = t + duration;
        // split the piece at every record time inside it
        while gi < grid.len() && grid[gi] <= piece_end * (1.0 + 1e-15) {
            let target = grid[gi].min(piece_end);
            let dt = target - t;
            if dt > 0.0 {
                let u = expm_skew(sys.drift_diagonal(), sys.coupling_matrix(), value, dt)?;
                psi = u.matvec(&psi);
            }
            t = target;
            check_nan(&psi, t)?;
            times.push(t);
            states.push(psi.clone());
            gi += 1;
        }
        if piece_end > t {
            let u = expm_skew(
                sys.drift_diagonal(),
                sys.coupling_matrix(),
                value,
                piece_end - t,
            )?;
            psi = u.matvec(&psi);
            t = piece_end;
        }
    }
    if times.last().map(|&lt| lt < t) == Some(true) && gi >= grid.len() {
        // end state when the grid did not ask for it explicitly
        check_nan(&psi, t)?;
        times.push(t);
        states.push(psi);
    }
    Ok(Trajectory {
        times,
        states,
        warnings: Vec::new(),
    })
}

/// Propagate under a periodic control law up to `horizon`.
///
/// Sampled shapes route to the piecewise-exact path; everything else uses
/// midpoint-frozen exponentials with the per-period unitary cache.
pub fn propagate_control(
    sys: &GalerkinSystem,
    control: &ControlLaw,
    psi0: &QuantumState,
    horizon: f64,
    opts: &PropagationOptions,
) -> Result<Trajectory> {
    if psi0.dim() != sys.dim() {
        return Err(Error::Domain("state dimension does not match system"));
    }
    if !(horizon > 0.0) {
        return Err(Error::Domain("horizon must be positive"));
    }
    if control.is_piecewise_constant() || opts.method == Method::PiecewiseExact {
        return propagate_control_piecewise(sys, control, psi0, horizon, opts);
    }

    let period = control.period();
    let spp = libm::floor(period / opts.step + 0.5).max(1.0) as usize;
    let dt = period / spp as f64;

    // per-period cache of step unitaries (midpoint-frozen)
    let mut cache = Vec::with_capacity(spp);
    let mut sup_u = 0.0f64;
    for j in 0..spp {
        let um = control.evaluate((j as f64 + 0.5) * dt);
        sup_u = sup_u.max(libm::fabs(um));
        cache.push(expm_skew(
            sys.drift_diagonal(),
            sys.coupling_matrix(),
            um,
            dt,
        )?);
    }

    let mut warnings = Vec::new();
    if dt * (sys.drift_norm() + sup_u * sys.coupling_norm()) > 0.5 {
        warnings.push(alloc::format!(
            "step {dt:.3e} is large for spectral radius {:.3e}; local exponents exceed 0.5",
            sys.drift_norm() + sup_u * sys.coupling_norm()
        ));
    }

    let n_full = libm::floor(horizon / dt) as usize;
    let remainder = horizon - n_full as f64 * dt;
    let total_records = n_full + if remainder > 1e-12 * horizon { 1 } else { 0 };

    // map the record request onto internal step indices
    let record_idx: Vec<usize> = match &opts.record {
        RecordGrid::Uniform(m) => {
            let m = (*m).max(1);
            let mut idx: Vec<usize> = (0..=m)
                .map(|i| {
                    let target = horizon * i as f64 / m as f64;
                    (libm::floor(target / dt + 0.5) as usize).min(total_records)
                })
                .collect();
            idx.dedup();
            idx
        }
        RecordGrid::EverySteps(k) => {
            let k = (*k).max(1);
            let mut idx: Vec<usize> = (0..=total_records).step_by(k).collect();
            if *idx.last().unwrap() != total_records {
                idx.push(total_records);
            }
            idx
        }
        RecordGrid::Times(ts) => {
            let mut idx: Vec<usize> = ts
                .iter()
                .map(|&t| (libm::floor(t / dt + 0.5) as usize).min(total_records))
                .collect();
            idx.sort_unstable();
            idx.dedup();
            idx
        }
    };

    let mut times = Vec::with_capacity(record_idx.len() + 1);
    let mut states = Vec::with_capacity(record_idx.len() + 1);
    let mut psi = psi0.amplitudes().to_vec();
    let mut ri = 0;
    if record_idx.first() == Some(&0) {
        ri = 1;
    }
    times.push(0.0);
    states.push(psi.clone());

    for s in 0..n_full {
        psi = cache[s % spp].matvec(&psi);
        let step_idx = s + 1;
        if ri < record_idx.len() && record_idx[ri] == step_idx {
            let t = step_idx as f64 * dt;
            check_nan(&psi, t)?;
            check_norm(&psi, t, opts.unitarity_tol)?;
            times.push(t);
            states.push(psi.clone());
            ri += 1;
        }
    }
    if remainder > 1e-12 * horizon {
        let um = control.evaluate(n_full as f64 * dt + 0.5 * remainder);
        let u = expm_skew(sys.drift_diagonal(), sys.coupling_matrix(), um, remainder)?;
        psi = u.matvec(&psi);
    }
    if times.last().copied() < Some(horizon * (1.0 - 1e-15)) {
        check_nan(&psi, horizon)?;
        check_norm(&psi, horizon, opts.unitarity_tol)?;
        times.push(horizon);
        states.push(psi);
    }
    Ok(Trajectory {
        times,
        states,
        warnings,
    })
}

fn propagate_control_piecewise(
    sys: &GalerkinSystem,
    control: &ControlLaw,
    psi0: &QuantumState,
    horizon: f64,
    opts: &PropagationOptions,
) -> Result<Trajectory> {
    let period = control.period();
    let samples = match control.shape() {
        ControlShape::Sampled { values } => values.len(),
        _ => libm::floor(period / opts.step + 0.5).max(1.0) as usize,
    };
    let dt = period / samples as f64;
    let mut pieces = Vec::new();
    let mut t = 0.0;
    while t < horizon - 1e-12 * horizon {
        let d = dt.min(horizon - t);
        pieces.push((d, control.evaluate(t + 0.5 * d.min(dt))));
        t += d;
    }
    let record: Vec<f64> = match &opts.record {
        RecordGrid::Uniform(m) => {
            let m = (*m).max(1);
            (1..=m).map(|i| horizon * i as f64 / m as f64).collect()
        }
        RecordGrid::EverySteps(k) => {
            let k = (*k).max(1);
            let mut ts: Vec<f64> = (1..=pieces.len())
                .step_by(k)
                .map(|i| i as f64 * dt)
                .collect();
            if ts.last().copied() < Some(horizon) {
                ts.push(horizon);
            }
            ts.retain(|&x| x <= horizon);
            ts
        }
        RecordGrid::Times(ts) => ts.clone(),
    };
    propagate_piecewise(sys, &pieces, psi0, &record)
}

/// Midpoint-exponential continuation from a known state at time t0 to t1,
/// using (at most) the given step. Used for peak refinement.
pub fn propagate_between(
    sys: &GalerkinSystem,
    control: &ControlLaw,
    state: &[Complex64],
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<Vec<Complex64>> {
    debug_assert!(t1 >= t0);
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(state.to_vec());
    }
    let n_steps = libm::ceil(span / step).max(1.0) as usize;
    let dt = span / n_steps as f64;
    let mut psi = state.to_vec();
    for s in 0..n_steps {
        let tm = t0 + (s as f64 + 0.5) * dt;
        let u = expm_skew(sys.drift_diagonal(), sys.coupling_matrix(), control.evaluate(tm), dt)?;
        psi = u.matvec(&psi);
    }
    check_nan(&psi, t1)?;
    Ok(psi)
}

fn check_nan(psi: &[Complex64], t: f64) -> Result<()> {
    for a in psi {
        if a.re.is_nan() || a.im.is_nan() {
            return Err(Error::NanAmplitude { t });
        }
    }
    Ok(())
}

fn check_norm(psi: &[Complex64], t: f64, tol: f64) -> Result<()> {
    let norm = vec_norm(psi);
    if libm::fabs(norm - 1.0) > tol {
        return Err(Error::Domain(
            "unitarity drift exceeded tolerance during propagation",
        ));
    }
    let _ = t;
    Ok(())
}
