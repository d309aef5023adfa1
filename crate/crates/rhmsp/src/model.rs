//! Process description: stability index, Hurst functions and kernels.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("range error: {0}")]
    Range(String),
    #[error("non-finite parameter at position {0}")]
    NonFinite(usize),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Stability index alpha, strictly inside (1, 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityIndex(f64);

impl StabilityIndex {
    pub fn new(alpha: f64) -> Result<Self, ModelError> {
        if !alpha.is_finite() || alpha <= 1.0 || alpha >= 2.0 {
            return Err(ModelError::Range(format!("alpha = {alpha} is not inside (1,2)")));
        }
        Ok(Self(alpha))
    }

    pub fn alpha(self) -> f64 {
        self.0
    }

    /// Conjugate exponent alpha/(alpha-1).
    pub fn beta(self) -> f64 {
        self.0 / (self.0 - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HurstForm {
    Const { v: f64 },
    Affine { a: f64, b: f64 },
    Sine { base: f64, amp: f64, freq: f64, phase: f64 },
    Logistic { lo: f64, hi: f64, center: f64, rate: f64 },
}

impl HurstForm {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            HurstForm::Const { v } => v,
            HurstForm::Affine { a, b } => a + b * t,
            HurstForm::Sine { base, amp, freq, phase } => base + amp * (freq * t + phase).sin(),
            HurstForm::Logistic { lo, hi, center, rate } => {
                lo + (hi - lo) * logistic(rate * (t - center))
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            HurstForm::Const { .. } => 0.0,
            HurstForm::Affine { b, .. } => b,
            HurstForm::Sine { amp, freq, phase, .. } => amp * freq * (freq * t + phase).cos(),
            HurstForm::Logistic { lo, hi, center, rate } => {
                let s = logistic(rate * (t - center));
                (hi - lo) * rate * s * (1.0 - s)
            }
        }
    }

    /// Exact (min, max) of H on [s, t].
    pub fn range_on(&self, s: f64, t: f64) -> (f64, f64) {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let (hs, ht) = (self.eval(s), self.eval(t));
        let mut lo = hs.min(ht);
        let mut hi = hs.max(ht);
        if let HurstForm::Sine { base, amp, freq, phase } = *self {
            if freq != 0.0 {
                // interior critical points of sin(freq*t + phase)
                for crit in phase_points(freq, phase, s, t, FRAC_PI_2, PI) {
                    let v = base + amp * (freq * crit + phase).sin();
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        (lo, hi)
    }

    /// sup |H'| on [s, t].
    pub fn max_abs_derivative(&self, s: f64, t: f64) -> f64 {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        match *self {
            HurstForm::Const { .. } => 0.0,
            HurstForm::Affine { b, .. } => b.abs(),
            HurstForm::Sine { amp, freq, phase, .. } => {
                let mut m = self.derivative(s).abs().max(self.derivative(t).abs());
                if freq != 0.0 && phase_points(freq, phase, s, t, 0.0, PI).next().is_some() {
                    m = (amp * freq).abs();
                }
                m
            }
            HurstForm::Logistic { center, .. } => {
                let c = center.clamp(s, t);
                self.derivative(c).abs()
            }
        }
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Points u in [s, t] with freq*u + phase = offset + k*step.
fn phase_points(freq: f64, phase: f64, s: f64, t: f64, offset: f64, step: f64) -> impl Iterator<Item = f64> {
    let (p0, p1) = {
        let a = freq * s + phase;
        let b = freq * t + phase;
        (a.min(b), a.max(b))
    };
    let k0 = ((p0 - offset) / step).ceil() as i64;
    let k1 = ((p1 - offset) / step).floor() as i64;
    (k0..=k1).map(move |k| (offset + k as f64 * step - phase) / freq)
}

/// Hurst function certified on [0, horizon].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstFunction {
    pub form: HurstForm,
    pub horizon: f64,
    pub h_hat: f64,
    pub h_check: f64,
    pub gamma: f64,
    pub holder_const: f64,
    text: String,
}

impl HurstFunction {
    pub fn from_form(form: HurstForm, horizon: f64) -> Result<Self, ModelError> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(ModelError::Range(format!("horizon = {horizon} must be positive")));
        }
        let (h_hat, h_check) = form.range_on(0.0, horizon);
        if !(h_hat > 0.0) || !(h_check < 1.0) {
            return Err(ModelError::Range(format!(
                "H ranges over [{h_hat}, {h_check}] on [0,{horizon}], outside (0,1)"
            )));
        }
        let text = form_text(&form);
        Ok(Self {
            form,
            horizon,
            h_hat,
            h_check,
            gamma: 1.0,
            holder_const: form.max_abs_derivative(0.0, horizon),
            text,
        })
    }

    pub fn constant(v: f64, horizon: f64) -> Result<Self, ModelError> {
        Self::from_form(HurstForm::Const { v }, horizon)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.form.eval(t)
    }

    /// (min, max) of H over [s, t].
    pub fn range_on(&self, s: f64, t: f64) -> (f64, f64) {
        self.form.range_on(s, t)
    }

    pub fn is_constant(&self) -> bool {
        match self.form {
            HurstForm::Const { .. } => true,
            HurstForm::Affine { b, .. } => b == 0.0,
            HurstForm::Sine { amp, freq, .. } => amp == 0.0 || freq == 0.0,
            HurstForm::Logistic { lo, hi, rate, .. } => lo == hi || rate == 0.0,
        }
    }

    pub fn spec_text(&self) -> &str {
        &self.text
    }
}

impl fmt::Display for HurstFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn form_text(form: &HurstForm) -> String {
    match *form {
        HurstForm::Const { v } => format!("const:{v}"),
        HurstForm::Affine { a, b } => format!("affine:{a},{b}"),
        HurstForm::Sine { base, amp, freq, phase } => format!("sine:{base},{amp},{freq},{phase}"),
        HurstForm::Logistic { lo, hi, center, rate } => format!("logistic:{lo},{hi},{center},{rate}"),
    }
}

/// Parse the Hurst mini-language, e.g. `sine:0.5,0.2,6.283`.
pub fn parse_hurst(spec_text: &str, horizon: f64) -> Result<HurstFunction, ModelError> {
    let colon = spec_text.find(':').ok_or_else(|| ModelError::Syntax {
        position: 0,
        message: "expected `<form>:<params>`".into(),
    })?;
    let name = &spec_text[..colon];
    let mut params = Vec::new();
    let mut pos = colon + 1;
    for tok in spec_text[colon + 1..].split(',') {
        if tok.is_empty() || tok.trim() != tok {
            return Err(ModelError::Syntax { position: pos, message: format!("bad number `{tok}`") });
        }
        let v: f64 = tok.parse().map_err(|_| ModelError::Syntax {
            position: pos,
            message: format!("bad number `{tok}`"),
        })?;
        if !v.is_finite() {
            return Err(ModelError::NonFinite(pos));
        }
        params.push(v);
        pos += tok.len() + 1;
    }
    let arity = |lo: usize, hi: usize| -> Result<(), ModelError> {
        if params.len() < lo || params.len() > hi {
            Err(ModelError::Syntax {
                position: colon + 1,
                message: format!("`{name}` takes {lo}..={hi} parameters, got {}", params.len()),
            })
        } else {
            Ok(())
        }
    };
    let form = match name {
        "const" => {
            arity(1, 1)?;
            HurstForm::Const { v: params[0] }
        }
        "affine" => {
            arity(2, 2)?;
            HurstForm::Affine { a: params[0], b: params[1] }
        }
        "sine" => {
            arity(3, 4)?;
            HurstForm::Sine {
                base: params[0],
                amp: params[1],
                freq: params[2],
                phase: params.get(3).copied().unwrap_or(0.0),
            }
        }
        "logistic" => {
            arity(4, 4)?;
            HurstForm::Logistic { lo: params[0], hi: params[1], center: params[2], rate: params[3] }
        }
        _ => {
            return Err(ModelError::Syntax { position: 0, message: format!("unknown form `{name}`") });
        }
    };
    let mut h = HurstFunction::from_form(form, horizon)?;
    h.text = spec_text.to_string();
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelVariant {
    X,
    Y,
    F1,
}

impl KernelVariant {
    pub fn parse(s: &str) -> Result<Self, ModelError> {
        match s {
            "X" | "x" => Ok(Self::X),
            "Y" | "y" => Ok(Self::Y),
            "F1" | "f1" => Ok(Self::F1),
            _ => Err(ModelError::Syntax { position: 0, message: format!("unknown kernel `{s}`") }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::X => "X",
            Self::Y => "Y",
            Self::F1 => "F1",
        }
    }
}

/// Kernel value at x > 0 for exponent k = H + 1/alpha.
#[inline]
pub fn kernel_pos(kernel: KernelVariant, t: f64, k: f64, x: f64) -> Complex64 {
    let mag = (-k * x.ln()).exp();
    kernel_pos_with(kernel, t, k, x, mag)
}

/// As [`kernel_pos`] with the power `x^{-k}` supplied.
#[inline]
pub fn kernel_pos_with(kernel: KernelVariant, t: f64, k: f64, x: f64, mag: f64) -> Complex64 {
    // e^{iθ} - 1 = -2 sin²(θ/2) + i sin θ, without cancellation for small θ
    let (sh, ch) = (0.5 * t * x).sin_cos();
    let cm1 = -2.0 * sh * sh;
    let s = 2.0 * sh * ch;
    match kernel {
        // (e^{itx} - 1) x^{-k}
        KernelVariant::X => Complex64::new(cm1 * mag, s * mag),
        // (1 - e^{-itx}) x^{-k} e^{i pi k / 2}
        KernelVariant::Y => Complex64::new(-cm1, s) * Complex64::from_polar(mag, FRAC_PI_2 * k),
        // (e^{itx} - 1) x^{-k} e^{-i pi k / 2}
        KernelVariant::F1 => Complex64::new(cm1, s) * Complex64::from_polar(mag, -FRAC_PI_2 * k),
    }
}

/// Kernel value at any x != 0; negative x by Hermitian symmetry.
#[inline]
pub fn kernel_value(kernel: KernelVariant, t: f64, k: f64, x: f64) -> Complex64 {
    if x > 0.0 {
        kernel_pos(kernel, t, k, x)
    } else {
        kernel_pos(kernel, t, k, -x).conj()
    }
}

/// Full law of the process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub alpha: StabilityIndex,
    pub hurst: HurstFunction,
    pub kernel: KernelVariant,
    pub horizon: f64,
}

impl ProcessSpec {
    pub fn new(alpha: f64, hurst: HurstFunction, kernel: KernelVariant) -> Result<Self, ModelError> {
        let horizon = hurst.horizon;
        Ok(Self { alpha: StabilityIndex::new(alpha)?, hurst, kernel, horizon })
    }

    /// Parse from a Hurst spec string.
    pub fn parse(alpha: f64, hurst: &str, kernel: KernelVariant, horizon: f64) -> Result<Self, ModelError> {
        Self::new(alpha, parse_hurst(hurst, horizon)?, kernel)
    }

    pub fn with_kernel(&self, kernel: KernelVariant) -> Self {
        Self { kernel, ..self.clone() }
    }

    pub fn a(&self) -> f64 {
        self.alpha.alpha()
    }

    /// Kernel exponent K(t) = H(t) + 1/alpha.
    pub fn k_exp(&self, t: f64) -> f64 {
        self.hurst.eval(t) + 1.0 / self.a()
    }

    pub fn check_time(&self, t: f64) -> Result<(), ModelError> {
        let slack = 1e-12 * self.horizon;
        if !t.is_finite() || t < -slack || t > self.horizon + slack {
            return Err(ModelError::Domain(format!("t = {t} outside [0,{}]", self.horizon)));
        }
        Ok(())
    }
}

/// Pointwise kernel of the selected variant.
pub fn eval_kernel(spec: &ProcessSpec, t: f64, x: f64) -> Result<Complex64, ModelError> {
    spec.check_time(t)?;
    if x == 0.0 || !x.is_finite() {
        return Err(ModelError::Domain(format!("kernel is singular at x = {x}")));
    }
    Ok(kernel_value(spec.kernel, t, spec.k_exp(t), x))
}

/// Closed-form Fourier transform of the Y kernel, convention `∫ e^{iux} f(x) dx`.
pub fn kernel_hat_y(spec: &ProcessSpec, t: f64, u: f64) -> Result<f64, ModelError> {
    if spec.kernel != KernelVariant::Y {
        return Err(ModelError::Domain("kernel_hat_y needs the Y kernel".into()));
    }
    spec.check_time(t)?;
    let e = spec.hurst.eval(t) - 1.0 / spec.alpha.beta();
    if !(e > -1.0 && e < 1.0) {
        return Err(ModelError::Domain(format!("exponent {e} outside (-1,1)")));
    }
    if e < 0.0 && (u == 0.0 || u == t) {
        return Err(ModelError::Domain(format!("integrable singularity at u = {u}")));
    }
    Ok(hat_y_closed(e + 1.0, t, u))
}

/// (2π/Γ(h)) ((t-u)_+^{h-1} - (-u)_+^{h-1}).
pub fn hat_y_closed(h: f64, t: f64, u: f64) -> f64 {
    let e = h - 1.0;
    let pp = |v: f64| if v > 0.0 { v.powf(e) } else { 0.0 };
    2.0 * PI / gamma(h) * (pp(t - u) - pp(-u))
}
