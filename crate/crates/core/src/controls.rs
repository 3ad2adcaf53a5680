//! T-periodic control shapes with their L¹ norms and Fourier data.
//!
//! Closed forms are implemented for the cosine-power family (binomial
//! expansion) and for affine cosines; every other shape falls back to
//! adaptive quadrature, so the two routes can be cross-checked against each
//! other. Pulse trains are raised-cosine bumps normalized to unit integral
//! per period: smooth approximants of a periodic Dirac comb.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::{Error, Result};

/// One period's worth of shape. The applied control is shape/n.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlShape {
    /// cos^l(ωt)
    CosinePower { power: u32 },
    /// offset + amp·cos(ωt)
    AffineCosine { offset: f64, amp: f64 },
    /// Raised-cosine bumps of the given width (fraction of the period),
    /// unit integral over each period.
    PulseTrain { width: f64 },
    /// Piecewise-constant samples spread uniformly over one period.
    Sampled { values: Vec<f64> },
}

/// A T-periodic real control u(t) = shape(t)/divisor with T = 2π/frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlLaw {
    shape: ControlShape,
    frequency: f64,
    divisor: u32,
}

impl ControlLaw {
    pub fn new(shape: ControlShape, frequency: f64, divisor: u32) -> Result<Self> {
        if frequency <= 0.0 {
            return Err(Error::Domain("control frequency must be positive"));
        }
        if divisor == 0 {
            return Err(Error::Domain("divisor must be a positive integer"));
        }
        if let ControlShape::PulseTrain { width } = shape {
            if !(width > 0.0 && width <= 1.0) {
                return Err(Error::Domain("pulse width must lie in (0, 1]"));
            }
        }
        if let ControlShape::Sampled { ref values } = shape {
            if values.is_empty() {
                return Err(Error::Domain("sampled shape needs at least one value"));
            }
        }
        Ok(ControlLaw {
            shape,
            frequency,
            divisor,
        })
    }

    pub fn cosine_power(power: u32, frequency: f64, divisor: u32) -> Result<Self> {
        ControlLaw::new(ControlShape::CosinePower { power }, frequency, divisor)
    }

    pub fn affine_cosine(offset: f64, amp: f64, frequency: f64, divisor: u32) -> Result<Self> {
        ControlLaw::new(
            ControlShape::AffineCosine { offset, amp },
            frequency,
            divisor,
        )
    }

    pub fn pulse_train(width: f64, frequency: f64, divisor: u32) -> Result<Self> {
        ControlLaw::new(ControlShape::PulseTrain { width }, frequency, divisor)
    }

    pub fn sampled(values: Vec<f64>, period: f64, divisor: u32) -> Result<Self> {
        if period <= 0.0 {
            return Err(Error::Domain("sampled period must be positive"));
        }
        ControlLaw::new(ControlShape::Sampled { values }, 2.0 * PI / period, divisor)
    }

    /// Same shape with a different amplitude divisor.
    pub fn with_divisor(self, divisor: u32) -> Result<Self> {
        ControlLaw::new(self.shape, self.frequency, divisor)
    }

    pub fn shape(&self) -> &ControlShape {
        &self.shape
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn divisor(&self) -> u32 {
        self.divisor
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.frequency
    }

    /// Shapes that route to the piecewise-exact propagator.
    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self.shape, ControlShape::Sampled { .. })
    }

    /// Pointwise value shape(t)/n. The argument is reduced modulo the period
    /// first, so periodicity holds to roundoff at any t.
    pub fn evaluate(&self, t: f64) -> f64 {
        self.shape_value(t) / self.divisor as f64
    }

    /// Pointwise value of the undivided shape.
    pub fn shape_value(&self, t: f64) -> f64 {
        let period = self.period();
        let s = t - period * libm::floor(t / period);
        match &self.shape {
            ControlShape::CosinePower { power } => {
                let c = libm::cos(self.frequency * s);
                powi(c, *power)
            }
            ControlShape::AffineCosine { offset, amp } => {
                offset + amp * libm::cos(self.frequency * s)
            }
            ControlShape::PulseTrain { width } => {
                let half = 0.5 * width * period;
                // bump centered at 0 (equivalently at the period boundary)
                let x = if s > 0.5 * period { s - period } else { s };
                if libm::fabs(x) <= half {
                    (1.0 + libm::cos(PI * x / half)) / (width * period)
                } else {
                    0.0
                }
            }
            ControlShape::Sampled { values } => {
                let m = values.len();
                let mut idx = (s / period * m as f64) as usize;
                if idx >= m {
                    idx = m - 1;
                }
                values[idx]
            }
        }
    }

    /// ∫₀ᵀ |shape| dτ, ignoring the divisor. Closed form where available.
    pub fn l1_over_period(&self) -> Result<f64> {
        let t = self.period();
        let omega = self.frequency;
        match &self.shape {
            ControlShape::CosinePower { power } => {
                let l = *power;
                if l % 2 == 1 {
                    // 4 (l-1)!! / (l!! ω)
                    let mut ratio = 1.0;
                    let mut i = l;
                    while i >= 2 {
                        ratio *= (i - 1) as f64 / i as f64;
                        i -= 2;
                    }
                    Ok(4.0 * ratio / omega)
                } else {
                    // 2π C(l, l/2) / (2^l ω)
                    let mut ratio = 1.0;
                    for i in 1..=(l / 2) {
                        ratio *= (l / 2 + i) as f64 / i as f64 / 4.0;
                    }
                    Ok(2.0 * PI * ratio / omega)
                }
            }
            ControlShape::AffineCosine { offset, amp } => {
                if libm::fabs(*offset) >= libm::fabs(*amp) {
                    Ok(libm::fabs(*offset) * t)
                } else if *offset == 0.0 {
                    Ok(4.0 * libm::fabs(*amp) / omega)
                } else {
                    self.l1_over_period_quadrature()
                }
            }
            ControlShape::PulseTrain { .. } => Ok(1.0),
            ControlShape::Sampled { values } => {
                let dt = t / values.len() as f64;
                Ok(values.iter().map(|v| libm::fabs(*v) * dt).sum())
            }
        }
    }

    /// L¹ norm of one period by adaptive quadrature, independent of the
    /// closed-form path.
    pub fn l1_over_period_quadrature(&self) -> Result<f64> {
        let t = self.period();
        if let ControlShape::Sampled { values } = &self.shape {
            // the shape jumps at the sample boundaries, which defeats
            // endpoint-based quadrature; integrate each flat segment from an
            // interior evaluation instead
            let dt = t / values.len() as f64;
            let mut acc = 0.0;
            for i in 0..values.len() {
                acc += libm::fabs(self.shape_value((i as f64 + 0.5) * dt)) * dt;
            }
            return Ok(acc);
        }
        let scale = self.rough_scale();
        integrate(
            &|x| libm::fabs(self.shape_value(x)),
            0.0,
            t,
            1e-11 * (1.0 + scale * t),
        )
    }

    /// ∫₀ᵀ shape(τ) e^{iωτ} dτ. Closed form for cosine powers and affine
    /// cosines (exact zeros at commensurate frequencies), exact piecewise
    /// integrals for sampled shapes, quadrature otherwise.
    pub fn fourier_coefficient(&self, omega: f64) -> Result<Complex64> {
        let t = self.period();
        let base = self.frequency;
        match &self.shape {
            ControlShape::CosinePower { power } => {
                let l = *power as i64;
                // cos^l = 2^{-l} Σ_m C(l,m) e^{i(l-2m)ωt}; every term lands on
                // an integer harmonic of the period.
                let mut acc = Complex64::new(0.0, 0.0);
                let mut binom = 1.0f64;
                for m in 0..=l {
                    if m > 0 {
                        binom *= (l - m + 1) as f64 / m as f64;
                    }
                    let harmonic = omega / base + (l - 2 * m) as f64;
                    acc += binom * harmonic_integral(harmonic, t);
                }
                Ok(acc / libm::pow(2.0, l as f64))
            }
            ControlShape::AffineCosine { offset, amp } => {
                let k = omega / base;
                let acc = *offset * harmonic_integral(k, t)
                    + 0.5 * amp * (harmonic_integral(k + 1.0, t) + harmonic_integral(k - 1.0, t));
                Ok(acc)
            }
            ControlShape::PulseTrain { .. } => self.fourier_coefficient_quadrature(omega),
            ControlShape::Sampled { values } => {
                let dt = t / values.len() as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, v) in values.iter().enumerate() {
                    let a = i as f64 * dt;
                    acc += *v * segment_integral(omega, a, a + dt);
                }
                Ok(acc)
            }
        }
    }

    /// Quadrature route for the Fourier coefficient.
    pub fn fourier_coefficient_quadrature(&self, omega: f64) -> Result<Complex64> {
        let t = self.period();
        let scale = self.rough_scale();
        if let ControlShape::Sampled { values } = &self.shape {
            let dt = t / values.len() as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..values.len() {
                let a = i as f64 * dt;
                acc += self.shape_value(a + 0.5 * dt) * segment_integral(omega, a, a + dt);
            }
            return Ok(acc);
        }
        // one panel per e^{iωτ} oscillation
        let panels = 1 + (libm::fabs(omega) * t / (2.0 * PI)) as usize;
        let tol = 1e-11 * (1.0 + scale * t) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let a = t * p as f64 / panels as f64;
            let b = t * (p + 1) as f64 / panels as f64;
            let re = integrate(
                &|x| self.shape_value(x) * libm::cos(omega * x),
                a,
                b,
                tol,
            )?;
            let im = integrate(
                &|x| self.shape_value(x) * libm::sin(omega * x),
                a,
                b,
                tol,
            )?;
            acc += Complex64::new(re, im);
        }
        Ok(acc)
    }

    fn rough_scale(&self) -> f64 {
        match &self.shape {
            ControlShape::CosinePower { .. } => 1.0,
            ControlShape::AffineCosine { offset, amp } => {
                libm::fabs(*offset) + libm::fabs(*amp)
            }
            ControlShape::PulseTrain { width } => 2.0 / (width * self.period()),
            ControlShape::Sampled { values } => {
                values.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)))
            }
        }
    }

    /// Canonical spec string in the config grammar.
    pub fn spec_string(&self) -> String {
        let mut s = String::new();
        use core::fmt::Write as _;
        match &self.shape {
            ControlShape::CosinePower { power } => {
                let _ = write!(
                    s,
                    "cospow(l={power}, omega={}, n={})",
                    self.frequency, self.divisor
                );
            }
            ControlShape::AffineCosine { offset, amp } => {
                let _ = write!(
                    s,
                    "affcos(offset={offset}, amp={amp}, omega={}, n={})",
                    self.frequency, self.divisor
                );
            }
            ControlShape::PulseTrain { width } => {
                let _ = write!(
                    s,
                    "pulses(width={width}, omega={}, n={})",
                    self.frequency, self.divisor
                );
            }
            ControlShape::Sampled { values } => {
                let _ = write!(
                    s,
                    "sampled(len={}, period={}, n={})",
                    values.len(),
                    self.period(),
                    self.divisor
                );
            }
        }
        s
    }
}

fn powi(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// ∫₀ᵀ e^{i k (2π/T) τ} dτ for a real harmonic index k: T at k = 0, exactly
/// zero at nonzero integers, the explicit primitive otherwise.
fn harmonic_integral(k: f64, t: f64) -> Complex64 {
    let rounded = libm::floor(k + 0.5);
    if libm::fabs(k - rounded) < 1e-12 {
        if rounded == 0.0 {
            Complex64::new(t, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    } else {
        let a = k * 2.0 * PI / t;
        (Complex64::new(0.0, a * t).exp() - 1.0) / Complex64::new(0.0, a)
    }
}

/// ∫_a^b e^{iωτ} dτ.
fn segment_integral(omega: f64, a: f64, b: f64) -> Complex64 {
    if libm::fabs(omega) * (b - a) < 1e-14 {
        Complex64::new(b - a, 0.0)
    } else {
        (Complex64::new(0.0, omega * b).exp() - Complex64::new(0.0, omega * a).exp())
            / Complex64::new(0.0, omega)
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        // never accept before depth 44: symmetric samples of a periodic
        // integrand can make left + right agree with whole spuriously
        if depth <= 44 && libm::fabs(delta) <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::QuadratureDidNotConverge);
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// ∏ cos(π/(2 a_n)) over the listed resonances; empty product is 1.
pub fn product_efficiency(resonances: &[f64]) -> Result<f64> {
    let mut acc = 1.0;
    for &a in resonances {
        if a <= 1.0 {
            return Err(Error::Domain("resonance orders must exceed 1"));
        }
        acc *= libm::cos(PI / (2.0 * a));
    }
    Ok(acc)
}

/// ∏_{n≥2} cos(π/2n): the worst-case efficiency of the positive
/// piecewise-constant construction. Partial product plus a log-cos tail
/// estimate, accurate to ~1e-10.
pub fn worst_case_efficiency() -> f64 {
    let cutoff = 200_000u64;
    let mut log_acc = 0.0f64;
    for n in 2..=cutoff {
        log_acc += libm::log(libm::cos(PI / (2.0 * n as f64)));
    }
    // Σ_{n>M} ln cos(π/2n) ≈ -(π²/8) Σ_{n>M} 1/n² = -(π²/8)(1/M - 1/2M²)
    let m = cutoff as f64;
    log_acc -= PI * PI / 8.0 * (1.0 / m - 0.5 / (m * m));
    libm::exp(log_acc)
}

/// exp(−π²/4N − π⁴/48N³): lower efficiency bound when all resonance orders
/// exceed N.
pub fn high_order_lower_bound(n: f64) -> Result<f64> {
    if n <= 0.0 {
        return Err(Error::Domain("resonance order bound must be positive"));
    }
    Ok(libm::exp(-PI * PI / (4.0 * n) - libm::pow(PI, 4.0) / (48.0 * n * n * n)))
}

/// Parsed form of a shape spec string; `SampledFile` defers file loading to
/// the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    Analytic(ControlLaw),
    SampledFile {
        file: String,
        period: f64,
        divisor: u32,
    },
}

/// Parse the config grammar:
/// `cospow(l=3, omega=3, n=30)`, `affcos(offset=0.1, amp=0.075, omega=1, n=1)`,
/// `pulses(width=0.125, omega=3, n=10)`, `sampled(file=..., period=...)`.
/// The divisor `n` defaults to 1 when omitted.
pub fn parse_shape_spec(spec: &str) -> Result<ShapeSpec> {
    let spec = spec.trim();
    let open = spec.find('(').ok_or_else(|| Error::Parse {
        field: "shape".to_string(),
        message: "expected `name(key=value, ...)`".to_string(),
    })?;
    if !spec.ends_with(')') {
        return Err(Error::Parse {
            field: "shape".to_string(),
            message: "missing closing parenthesis".to_string(),
        });
    }
    let name = &spec[..open];
    let body = &spec[open + 1..spec.len() - 1];
    let mut fields: Vec<(&str, &str)> = Vec::new();
    for part in body.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let eq = part.find('=').ok_or_else(|| Error::Parse {
            field: part.to_string(),
            message: "expected key=value".to_string(),
        })?;
        fields.push((part[..eq].trim(), part[eq + 1..].trim()));
    }
    let get = |key: &str| -> Option<&str> {
        fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    };
    let parse_f64 = |key: &str| -> Result<f64> {
        let raw = get(key).ok_or_else(|| Error::Parse {
            field: key.to_string(),
            message: "missing".to_string(),
        })?;
        raw.parse::<f64>().map_err(|_| Error::Parse {
            field: key.to_string(),
            message: format_bad_number(raw),
        })
    };
    let parse_u32 = |key: &str, default: u32| -> Result<u32> {
        match get(key) {
            None => Ok(default),
            Some(raw) => raw.parse::<u32>().map_err(|_| Error::Parse {
                field: key.to_string(),
                message: format_bad_number(raw),
            }),
        }
    };
    // reject unknown fields so typos surface by name
    let allowed: &[&str] = match name {
        "cospow" => &["l", "omega", "n"],
        "affcos" => &["offset", "amp", "omega", "n"],
        "pulses" => &["width", "omega", "n"],
        "sampled" => &["file", "period", "n"],
        _ => {
            return Err(Error::Parse {
                field: "shape".to_string(),
                message: alloc::format!("unknown shape `{name}`"),
            })
        }
    };
    for (k, _) in &fields {
        if !allowed.contains(k) {
            return Err(Error::Parse {
                field: (*k).to_string(),
                message: alloc::format!("not a field of `{name}`"),
            });
        }
    }
    let n = parse_u32("n", 1)?;
    match name {
        "cospow" => {
            let raw = get("l").ok_or_else(|| Error::Parse {
                field: "l".to_string(),
                message: "missing".to_string(),
            })?;
            let l = raw.parse::<u32>().map_err(|_| Error::Parse {
                field: "l".to_string(),
                message: format_bad_number(raw),
            })?;
            Ok(ShapeSpec::Analytic(ControlLaw::cosine_power(
                l,
                parse_f64("omega")?,
                n,
            )?))
        }
        "affcos" => Ok(ShapeSpec::Analytic(ControlLaw::affine_cosine(
            parse_f64("offset")?,
            parse_f64("amp")?,
            parse_f64("omega")?,
            n,
        )?)),
        "pulses" => Ok(ShapeSpec::Analytic(ControlLaw::pulse_train(
            parse_f64("width")?,
            parse_f64("omega")?,
            n,
        )?)),
        "sampled" => {
            let file = get("file").ok_or_else(|| Error::Parse {
                field: "file".to_string(),
                message: "missing".to_string(),
            })?;
            Ok(ShapeSpec::SampledFile {
                file: file.to_string(),
                period: parse_f64("period")?,
                divisor: n,
            })
        }
        _ => unreachable!(),
    }
}

fn format_bad_number(raw: &str) -> String {
    alloc::format!("`{raw}` is not a valid number")
}
