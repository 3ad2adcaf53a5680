//! Averaging analysis: the efficiency functional, resonance bookkeeping for
//! the first-order averaged dynamics, the time/constant/deficit estimates,
//! and the population-transfer experiment protocol.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::controls::ControlLaw;
use crate::propagator::{
    propagate_between, propagate_control, Method, PropagationOptions, QuantumState, RecordGrid,
    Trajectory,
};
use crate::spectral::GalerkinSystem;
use crate::{Error, Result};

/// How strongly the averaged dynamics pins the transfer to the chosen pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// No other pair resonates with the drive gap: the theorem applies as-is.
    TheoremDirect,
    /// Resonant pairs exist but the averaged coupling graph leaves
    /// span{φ_j, φ_k} invariant.
    InvariantSubspace,
    /// Invariance holds only after removing edges whose closed-form Fourier
    /// coefficient vanishes (numerically they carry quadrature noise).
    Constrained,
    NotGuaranteed,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::TheoremDirect => "theorem-direct",
            Classification::InvariantSubspace => "invariant-subspace",
            Classification::Constrained => "constrained",
            Classification::NotGuaranteed => "not-guaranteed",
        }
    }
}

/// Pairs whose gap is in integer relation with the driven gap.
#[derive(Debug, Clone)]
pub struct ResonanceReport {
    pub transition: (usize, usize),
    pub drive_gap: f64,
    /// (l, m, r) with |λ_l − λ_m| = r·drive_gap, b_lm ≠ 0, {l,m} ≠ {j,k}.
    pub multiple_pairs: Vec<(usize, usize, i64)>,
    /// (l, m, r) with drive_gap = r·|λ_l − λ_m|, b_lm ≠ 0, {l,m} ≠ {j,k}.
    pub divisor_pairs: Vec<(usize, usize, i64)>,
    pub classification: Classification,
}

/// Levels 1..N with an edge wherever the averaged coupling survives.
#[derive(Debug, Clone)]
pub struct CouplingGraph {
    pub dim: usize,
    pub edges: Vec<(usize, usize)>,
    /// Diagonal couplings activated by a nonzero control mean; recorded but
    /// irrelevant to connectivity.
    pub self_edges: Vec<usize>,
}

impl CouplingGraph {
    /// Connected component containing `level` (1-based, sorted).
    pub fn component(&self, level: usize) -> Vec<usize> {
        let mut seen = vec![false; self.dim + 1];
        let mut queue = vec![level];
        seen[level] = true;
        while let Some(v) = queue.pop() {
            for &(a, b) in &self.edges {
                let next = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen[next] {
                    seen[next] = true;
                    queue.push(next);
                }
            }
        }
        (1..=self.dim).filter(|&v| seen[v]).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TheoremEstimates {
    /// Drive period T = 2π/(λ_k − λ_j).
    pub t_period: f64,
    /// Transfer-time estimate T* = πT/(2|b_jk| |c|).
    pub t_star: f64,
    /// Constant C of the fidelity bound.
    pub c_constant: f64,
    /// Right-hand side (C/n)(π/2|b_jk|)(∫|u*|)²/|c| of the fidelity bound.
    pub deficit_bound: f64,
    /// True when every other gap is an integer multiple of the drive gap, so
    /// the infimum in C ranges over the empty set (denominator fixed to 1).
    pub infimum_empty: bool,
}

/// Outcome of one population-transfer experiment.
#[derive(Debug, Clone)]
pub struct TransferReport {
    pub transition: (usize, usize),
    pub shape: String,
    pub divisor: u32,
    /// Time of the first envelope maximum of population k.
    pub t_dagger: f64,
    /// Population of level k at t_dagger.
    pub p_dagger: f64,
    /// nπ / (2|b_jk| ∫₀^{t†} |u*|), the protocol's measured efficiency.
    pub numerical_efficiency: f64,
    /// Same quantity times (1 − p†); reported for reference only, see the
    /// module notes on the efficiency display.
    pub literal_display_value: f64,
    pub theoretical_efficiency: f64,
    pub t_star: f64,
    pub c_constant: f64,
    pub deficit_bound: f64,
    pub horizon: f64,
    pub step: f64,
    pub warnings: Vec<String>,
}

fn check_transition(sys: &GalerkinSystem, j: usize, k: usize) -> Result<()> {
    let n = sys.dim();
    if j < 1 || j > n {
        return Err(Error::IndexOutOfRange { index: j, dim: n });
    }
    if k < 1 || k > n {
        return Err(Error::IndexOutOfRange { index: k, dim: n });
    }
    if j == k {
        return Err(Error::Domain("transition levels must differ"));
    }
    Ok(())
}

/// Requires gap·T ∈ 2π·Z, i.e. the drive gap completes a whole number of
/// phase turns per control period; the resonant case is one turn.
fn check_commensurate(gap: f64, period: f64) -> Result<()> {
    let turns = libm::fabs(gap) * period / (2.0 * core::f64::consts::PI);
    let nearest = libm::floor(turns + 0.5);
    if nearest < 1.0 || libm::fabs(turns - nearest) > 1e-9 * turns.max(1.0) {
        return Err(Error::PeriodMismatch {
            control_period: period,
            transition_period: 2.0 * core::f64::consts::PI / libm::fabs(gap),
        });
    }
    Ok(())
}

/// E^{(j,k)}(u) = |∫_0^T u e^{i(λ_j−λ_k)τ} dτ| / ∫_0^T |u| dτ.
pub fn efficiency(control: &ControlLaw, sys: &GalerkinSystem, j: usize, k: usize) -> Result<f64> {
    check_transition(sys, j, k)?;
    let gap = sys.eigenvalue(k) - sys.eigenvalue(j);
    if gap == 0.0 {
        return Err(Error::DegenerateGap { j, k });
    }
    check_commensurate(gap, control.period())?;
    let l1 = control.l1_over_period()?;
    if l1 <= 0.0 {
        return Err(Error::ZeroL1Norm);
    }
    let c = control.fourier_coefficient(gap)?;
    Ok(c.norm() / l1)
}

fn integer_ratio(a: f64, b: f64) -> Option<i64> {
    // is a an integer multiple of b?
    let r = a / b;
    let nearest = libm::floor(r + 0.5);
    if nearest >= 1.0 && libm::fabs(r - nearest) <= 1e-9 * r.max(1.0) {
        Some(nearest as i64)
    } else {
        None
    }
}

/// Enumerates the coupled pairs whose gap is an integer multiple or divisor
/// of the driven gap. With an integer spectrum the relation is decided in
/// exact arithmetic. A control law, when supplied, refines the
/// classification through the averaged coupling graph.
pub fn resonance_analysis(
    sys: &GalerkinSystem,
    j: usize,
    k: usize,
    control: Option<&ControlLaw>,
) -> Result<ResonanceReport> {
    check_transition(sys, j, k)?;
    if sys.eigenvalue(j) == sys.eigenvalue(k) {
        return Err(Error::DegenerateGap { j, k });
    }
    let (j, k) = if j < k { (j, k) } else { (k, j) };
    let n = sys.dim();
    let drive_gap = libm::fabs(sys.eigenvalue(k) - sys.eigenvalue(j));
    let ints = sys.integer_spectrum();

    let mut multiple_pairs = Vec::new();
    let mut divisor_pairs = Vec::new();
    for l in 1..=n {
        for m in (l + 1)..=n {
            if (l, m) == (j, k) || sys.coupling(l, m).norm() == 0.0 {
                continue;
            }
            let (mult, div) = match &ints {
                Some(s) => {
                    let gap = (s[m - 1] - s[l - 1]).unsigned_abs();
                    let drive = (s[k - 1] - s[j - 1]).unsigned_abs();
                    let mult = (gap % drive == 0).then(|| (gap / drive) as i64);
                    let div = (mult.is_none() && drive % gap == 0).then(|| (drive / gap) as i64);
                    (mult, div)
                }
                None => {
                    let gap = libm::fabs(sys.eigenvalue(m) - sys.eigenvalue(l));
                    let mult = integer_ratio(gap, drive_gap);
                    let div = if mult.is_none() {
                        integer_ratio(drive_gap, gap)
                    } else {
                        None
                    };
                    (mult, div)
                }
            };
            if let Some(r) = mult {
                multiple_pairs.push((l, m, r));
            } else if let Some(r) = div {
                divisor_pairs.push((l, m, r));
            }
        }
    }

    let classification = if multiple_pairs.is_empty() && divisor_pairs.is_empty() {
        Classification::TheoremDirect
    } else if let Some(u) = control {
        classify_by_graph(sys, u, 1e-9, j, k)?
    } else {
        Classification::NotGuaranteed
    };

    Ok(ResonanceReport {
        transition: (j, k),
        drive_gap,
        multiple_pairs,
        divisor_pairs,
        classification,
    })
}

fn build_graph(
    sys: &GalerkinSystem,
    control: &ControlLaw,
    tol: f64,
    quadrature: bool,
) -> Result<CouplingGraph> {
    let n = sys.dim();
    let l1 = control.l1_over_period()?;
    if l1 <= 0.0 {
        return Err(Error::ZeroL1Norm);
    }
    let omega0 = 2.0 * core::f64::consts::PI / control.period();
    let mut edges = Vec::new();
    let mut self_edges = Vec::new();
    for l in 1..=n {
        for m in l..=n {
            if sys.coupling(l, m).norm() == 0.0 {
                continue;
            }
            let gap = sys.eigenvalue(m) - sys.eigenvalue(l);
            // only gaps on the drive's harmonic lattice survive averaging;
            // off-lattice pairs dephase over the slow timescale
            let harmonic = gap / omega0;
            if libm::fabs(harmonic - libm::floor(harmonic + 0.5))
                > 1e-9 * libm::fabs(harmonic).max(1.0)
            {
                continue;
            }
            let coeff = if quadrature {
                control.fourier_coefficient_quadrature(gap)?
            } else {
                control.fourier_coefficient(gap)?
            };
            if coeff.norm() > tol * l1 {
                if l == m {
                    self_edges.push(l);
                } else {
                    edges.push((l, m));
                }
            }
        }
    }
    Ok(CouplingGraph {
        dim: n,
        edges,
        self_edges,
    })
}

/// Graph on the levels with an edge (l,m) whenever b_lm ≠ 0 and the control
/// has a Fourier coefficient above tol·‖u‖_{L¹(0,T)} at the gap λ_m − λ_l.
pub fn averaged_coupling_graph(
    sys: &GalerkinSystem,
    control: &ControlLaw,
    tol: f64,
) -> Result<CouplingGraph> {
    build_graph(sys, control, tol, false)
}

fn classify_by_graph(
    sys: &GalerkinSystem,
    control: &ControlLaw,
    tol: f64,
    j: usize,
    k: usize,
) -> Result<Classification> {
    let target = {
        let mut t = vec![j, k];
        t.sort_unstable();
        t
    };
    // quadrature keeps every numerically surviving edge; the closed-form
    // graph excises the ones whose exact coefficient vanishes
    let numeric = build_graph(sys, control, tol, true)?;
    if numeric.component(j) == target {
        return Ok(Classification::InvariantSubspace);
    }
    let exact = build_graph(sys, control, tol, false)?;
    if exact.component(j) == target {
        return Ok(Classification::Constrained);
    }
    Ok(Classification::NotGuaranteed)
}

/// T, T*, C and the fidelity-deficit bound for driving (j,k) with u*/n.
pub fn theorem_estimates(
    sys: &GalerkinSystem,
    j: usize,
    k: usize,
    control: &ControlLaw,
    n: u32,
) -> Result<TheoremEstimates> {
    check_transition(sys, j, k)?;
    let (j, k) = if j < k { (j, k) } else { (k, j) };
    let gap = sys.eigenvalue(k) - sys.eigenvalue(j);
    if gap == 0.0 {
        return Err(Error::DegenerateGap { j, k });
    }
    let b_jk = sys.coupling(j, k).norm();
    if b_jk == 0.0 {
        return Err(Error::NoDirectCoupling { j, k });
    }
    if n == 0 {
        return Err(Error::Domain("divisor n must be at least 1"));
    }
    let coeff = control.fourier_coefficient(gap)?.norm();
    if coeff <= 0.0 {
        return Err(Error::ZeroEfficiency { j, k });
    }
    let t_period = 2.0 * core::f64::consts::PI / libm::fabs(gap);
    let t_star = core::f64::consts::PI * t_period / (2.0 * b_jk * coeff);

    // C = (1 + ‖A‖ + ‖B‖) / inf |sin(2π (λ_l−λ_m)/(λ_j−λ_k))|, the infimum
    // over all pairs within the dimension whose gap ratio is not an integer
    let dim = sys.dim();
    let mut inf_sin = f64::INFINITY;
    for l in 1..=dim {
        for m in (l + 1)..=dim {
            let ratio = (sys.eigenvalue(m) - sys.eigenvalue(l)) / gap;
            if libm::fabs(ratio - libm::floor(ratio + 0.5)) <= 1e-9 * libm::fabs(ratio).max(1.0) {
                continue;
            }
            let s = libm::fabs(libm::sin(2.0 * core::f64::consts::PI * ratio));
            if s < inf_sin {
                inf_sin = s;
            }
        }
    }
    let infimum_empty = !inf_sin.is_finite();
    if infimum_empty {
        inf_sin = 1.0;
    }
    let c_constant = (1.0 + sys.drift_norm() + sys.coupling_norm()) / inf_sin;

    let l1 = control.l1_over_period()?;
    let deficit_bound =
        (c_constant / n as f64) * core::f64::consts::PI / (2.0 * b_jk) * l1 * l1 / coeff;

    Ok(TheoremEstimates {
        t_period,
        t_star,
        c_constant,
        deficit_bound,
        infimum_empty,
    })
}

/// Coarse scan for the first envelope maximum of `pops`: the first sample
/// that is the largest within ±window samples. Fast per-period ripples sit
/// on top of the slow Rabi envelope, so a plain three-point local maximum
/// would fire orders of magnitude too early.
fn first_envelope_peak(pops: &[f64], window: usize) -> Option<usize> {
    let len = pops.len();
    for i in 1..len {
        if i + window >= len {
            return None; // peak may lie beyond the horizon
        }
        let lo = i.saturating_sub(window);
        let hi = i + window;
        if pops[lo..=hi].iter().all(|&p| p <= pops[i]) {
            return Some(i);
        }
    }
    None
}

/// Runs the transfer experiment: propagate φ_j under u*/n, locate the first
/// envelope maximum of population k (golden-section refined to 10⁻⁴·T) and
/// assemble the measured and theoretical efficiencies.
pub fn run_transfer(
    sys: &GalerkinSystem,
    j: usize,
    k: usize,
    control: &ControlLaw,
    horizon_periods: f64,
    step: Option<f64>,
) -> Result<TransferReport> {
    check_transition(sys, j, k)?;
    let gap = sys.eigenvalue(k) - sys.eigenvalue(j);
    if gap == 0.0 {
        return Err(Error::DegenerateGap { j, k });
    }
    check_commensurate(gap, control.period())?;
    if !(horizon_periods >= 1.0) {
        return Err(Error::Domain("horizon must cover at least one period"));
    }
    let n = control.divisor();
    let estimates = theorem_estimates(sys, j, k, control, n)?;
    let theoretical_efficiency = efficiency(control, sys, j, k)?;

    let period = control.period();
    let horizon = horizon_periods * period;
    let step = step.unwrap_or(period / 200.0);
    let spp = libm::floor(period / step + 0.5).max(1.0) as usize;
    // coarse scan at ≥ 40 samples per drive period
    let rec = (spp / 40).max(1);
    let opts = PropagationOptions {
        method: Method::MidpointExponential,
        step,
        unitarity_tol: 1e-9,
        record: RecordGrid::EverySteps(rec),
    };
    let psi0 = QuantumState::basis(sys.dim(), j)?;
    let traj = propagate_control(sys, control, &psi0, horizon, &opts)?;
    let pops = traj.populations(k)?;
    let times = traj.times();

    // envelope window of ±2 drive periods, in record units
    let window = (2 * spp).div_ceil(rec).max(1);
    let peak = match first_envelope_peak(&pops, window) {
        Some(i) => i,
        None => {
            let (at_idx, running_max) = pops
                .iter()
                .enumerate()
                .map(|(i, &p)| (i, p))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            return Err(Error::HorizonExceeded {
                horizon,
                running_max,
                at: times[at_idx],
            });
        }
    };

    // golden-section refinement inside [t_{i-1}, t_{i+1}], re-propagating
    // from the recorded state one sample before the bracket
    let base = peak - 1;
    let base_state = traj.states()[base].clone();
    let base_t = times[base];
    let eval = |t: f64| -> Result<f64> {
        let psi = propagate_between(sys, control, &base_state, base_t, t, step)?;
        Ok(psi[k - 1].norm_sqr())
    };
    let (t_dagger, p_dagger) = golden_max(
        &eval,
        times[base],
        times[(peak + 1).min(times.len() - 1)],
        1e-4 * period,
    )?;

    let l1 = control.l1_over_period()?;
    let b_jk = sys.coupling(j, k).norm();
    let l1_to_peak = l1 * t_dagger / period; // ∫₀^{t†} |u*| for whole periods
    let numerical_efficiency =
        n as f64 * core::f64::consts::PI / (2.0 * b_jk * l1_to_peak);

    Ok(TransferReport {
        transition: (j, k),
        shape: control.spec_string(),
        divisor: n,
        t_dagger,
        p_dagger,
        numerical_efficiency,
        literal_display_value: (1.0 - p_dagger) * numerical_efficiency,
        theoretical_efficiency,
        t_star: estimates.t_star,
        c_constant: estimates.c_constant,
        deficit_bound: estimates.deficit_bound,
        horizon,
        step,
        warnings: traj.warnings().to_vec(),
    })
}

fn golden_max(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        }
    }
    let mid = 0.5 * (a + b);
    Ok((mid, f(mid)?))
}

/// Worst-case efficiency attributed to parasitic population of `level`
/// while driving (j,k): the observed maximum of pop_level re-expressed
/// through the transfer protocol's normalization 2|b_jk| ∫|u*|.
pub fn leakage_efficiency(
    sys: &GalerkinSystem,
    control: &ControlLaw,
    traj: &Trajectory,
    j: usize,
    k: usize,
    level: usize,
) -> Result<f64> {
    check_transition(sys, j, k)?;
    let pops = traj.populations(level)?;
    let (idx, p_max) = pops
        .iter()
        .enumerate()
        .map(|(i, &p)| (i, p))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .ok_or(Error::Domain("empty trajectory"))?;
    let t_max = traj.times()[idx];
    if t_max <= 0.0 {
        return Ok(0.0);
    }
    let b_jk = sys.coupling(j, k).norm();
    if b_jk == 0.0 {
        return Err(Error::NoDirectCoupling { j, k });
    }
    let l1_to_max = control.l1_over_period()? * t_max / control.period();
    Ok(p_max * control.divisor() as f64 * core::f64::consts::PI / (2.0 * b_jk * l1_to_max))
}
