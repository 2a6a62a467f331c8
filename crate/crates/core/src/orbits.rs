//! Floating-point orbit layer: integration, first-return timing on a ray,
//! closure checks, the case (i) period-annulus boundary and `B^k` verdicts.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use crate::lyapunov::PlanarSystem;
use crate::quintic::{rotate_to_canonical, CenterCase, FirstIntegralSpec, QuinticError, QuinticParams};
use crate::qpoly::{rational_to_f64, Poly, Var};
use crate::structure::angular_speed_residual;

/// Orbits leaving this radius are treated as unbounded.
pub const ESCAPE_RADIUS: f64 = 1e9;
/// Time resolution of section events.
pub const EVENT_TOL: f64 = 1e-12;
/// Angular clustering tolerance for boundary maximizers.
pub const MAXIMIZER_TOL: f64 = 1e-6;
const DENSE_SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrbitError {
    #[error("system has unbound parameters: {0}")]
    NotNumeric(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("orbit escaped |state| > 1e9 at t = {t}")]
    Escaped { t: f64 },
    #[error("step size underflow at t = {t}")]
    Stiffness { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    MaxSteps { t: f64 },
    #[error("system is not of the form ẋ = y + xR, ẏ = −x + yR (residual {0})")]
    NotForm1(String),
    #[error("boundary formula inapplicable (c0 <= 0): c0 = {c0}")]
    InapplicableBoundary { c0: f64 },
    #[error("first integral undefined at sample {index} ({x}, {y}): {reason}")]
    IntegralDomain { index: usize, x: f64, y: f64, reason: String },
    #[error(transparent)]
    Quintic(#[from] QuinticError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fixed-step Runge–Kutta.
    Rk4 { step: f64 },
    /// Dormand–Prince 5(4) with step-size control.
    DormandPrince,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::DormandPrince,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 0.25,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4 { step },
            ..Default::default()
        }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        IntegratorConfig {
            rel_tol: tol,
            abs_tol: tol,
            ..self
        }
    }

    fn validate(&self) -> Result<(), OrbitError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_step > 0.0
            && self.max_steps > 0
            && match self.method {
                Method::Rk4 { step } => step > 0.0 && step.is_finite(),
                Method::DormandPrince => true,
            };
        if ok {
            Ok(())
        } else {
            Err(OrbitError::InvalidInput(format!("bad integrator config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub config: IntegratorConfig,
    /// Section crossings (only filled by [`ray_return_time`]).
    pub events: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> Sample {
        *self.samples.last().expect("trajectory starts with its initial point")
    }
}

/// A polynomial in `x, y` with `f64` coefficients, for fast evaluation.
#[derive(Debug, Clone)]
struct CompiledPoly {
    terms: Vec<(f64, i32, i32)>,
}

impl CompiledPoly {
    fn new(p: &Poly) -> Result<Self, OrbitError> {
        if !p.parameters().is_empty() {
            return Err(OrbitError::NotNumeric(p.to_string()));
        }
        let (x, y) = (Var::x(), Var::y());
        let terms = p
            .terms()
            .map(|(m, c)| (rational_to_f64(c), m.exponent(&x) as i32, m.exponent(&y) as i32))
            .collect();
        Ok(CompiledPoly { terms })
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|&(c, i, j)| c * x.powi(i) * y.powi(j)).sum()
    }
}

/// Numeric vector field compiled from a [`PlanarSystem`].
#[derive(Debug, Clone)]
pub struct Field {
    p: CompiledPoly,
    q: CompiledPoly,
}

impl Field {
    pub fn new(sys: &PlanarSystem) -> Result<Self, OrbitError> {
        Ok(Field {
            p: CompiledPoly::new(&sys.p)?,
            q: CompiledPoly::new(&sys.q)?,
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        (self.p.eval(x, y), self.q.eval(x, y))
    }

    fn f(&self, s: [f64; 2]) -> [f64; 2] {
        let (a, b) = self.eval(s[0], s[1]);
        [a, b]
    }
}

fn axpy(s: [f64; 2], h: f64, terms: &[(f64, [f64; 2])]) -> [f64; 2] {
    let mut out = s;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

fn rk4_step(f: &Field, s: [f64; 2], h: f64) -> [f64; 2] {
    let k1 = f.f(s);
    let k2 = f.f(axpy(s, h / 2.0, &[(1.0, k1)]));
    let k3 = f.f(axpy(s, h / 2.0, &[(1.0, k2)]));
    let k4 = f.f(axpy(s, h, &[(1.0, k3)]));
    axpy(s, h / 6.0, &[(1.0, k1), (2.0, k2), (2.0, k3), (1.0, k4)])
}

/// One Dormand–Prince step: fifth-order solution and the embedded error.
fn dp_step(f: &Field, s: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    let k1 = f.f(s);
    let k2 = f.f(axpy(s, h, &[(1.0 / 5.0, k1)]));
    let k3 = f.f(axpy(s, h, &[(3.0 / 40.0, k1), (9.0 / 40.0, k2)]));
    let k4 = f.f(axpy(s, h, &[(44.0 / 45.0, k1), (-56.0 / 15.0, k2), (32.0 / 9.0, k3)]));
    let k5 = f.f(axpy(
        s,
        h,
        &[
            (19372.0 / 6561.0, k1),
            (-25360.0 / 2187.0, k2),
            (64448.0 / 6561.0, k3),
            (-212.0 / 729.0, k4),
        ],
    ));
    let k6 = f.f(axpy(
        s,
        h,
        &[
            (9017.0 / 3168.0, k1),
            (-355.0 / 33.0, k2),
            (46732.0 / 5247.0, k3),
            (49.0 / 176.0, k4),
            (-5103.0 / 18656.0, k5),
        ],
    ));
    let next = axpy(
        s,
        h,
        &[
            (35.0 / 384.0, k1),
            (500.0 / 1113.0, k3),
            (125.0 / 192.0, k4),
            (-2187.0 / 6784.0, k5),
            (11.0 / 84.0, k6),
        ],
    );
    let k7 = f.f(next);
    let err = axpy(
        [0.0, 0.0],
        h,
        &[
            (35.0 / 384.0 - 5179.0 / 57600.0, k1),
            (500.0 / 1113.0 - 7571.0 / 16695.0, k3),
            (125.0 / 192.0 - 393.0 / 640.0, k4),
            (-2187.0 / 6784.0 + 92097.0 / 339200.0, k5),
            (11.0 / 84.0 - 187.0 / 2100.0, k6),
            (-1.0 / 40.0, k7),
        ],
    );
    (next, err)
}

/// Steps a field forward, one accepted step per call.
struct Stepper<'a> {
    field: &'a Field,
    cfg: IntegratorConfig,
    t: f64,
    s: [f64; 2],
    h: f64,
    steps: usize,
}

impl<'a> Stepper<'a> {
    fn new(field: &'a Field, cfg: IntegratorConfig, s: [f64; 2]) -> Self {
        let h = match cfg.method {
            Method::Rk4 { step } => step,
            Method::DormandPrince => cfg.max_step.min(1e-2),
        };
        Stepper { field, cfg, t: 0.0, s, h, steps: 0 }
    }

    /// A single uncontrolled step of size `h` from the current state, used
    /// for event bisection.
    fn trial(&self, h: f64) -> [f64; 2] {
        match self.cfg.method {
            Method::Rk4 { .. } => rk4_step(self.field, self.s, h),
            Method::DormandPrince => dp_step(self.field, self.s, h).0,
        }
    }

    /// Advances by one accepted step, never past `t_limit`.
    fn step(&mut self, t_limit: f64) -> Result<(), OrbitError> {
        if self.steps >= self.cfg.max_steps {
            return Err(OrbitError::MaxSteps { t: self.t });
        }
        self.steps += 1;
        let next = match self.cfg.method {
            Method::Rk4 { step } => {
                let h = step.min(t_limit - self.t);
                let n = rk4_step(self.field, self.s, h);
                self.t = if h == step { self.t + h } else { t_limit };
                n
            }
            Method::DormandPrince => loop {
                let h = self.h.min(self.cfg.max_step).min(t_limit - self.t);
                if h < 1e-14 * self.t.abs().max(1.0) {
                    return Err(OrbitError::Stiffness { t: self.t });
                }
                let (n, e) = dp_step(self.field, self.s, h);
                let norm = (0..2)
                    .map(|i| {
                        let sc = self.cfg.abs_tol + self.cfg.rel_tol * self.s[i].abs().max(n[i].abs());
                        (e[i] / sc).abs()
                    })
                    .fold(0.0f64, f64::max);
                let norm = if norm.is_finite() { norm } else { f64::INFINITY };
                let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                if norm <= 1.0 {
                    let reached = h == t_limit - self.t;
                    self.t = if reached { t_limit } else { self.t + h };
                    self.h = h * factor;
                    break n;
                }
                self.h = h * factor.min(1.0);
            },
        };
        if !(next[0].is_finite() && next[1].is_finite()) || next[0].hypot(next[1]) > ESCAPE_RADIUS {
            return Err(OrbitError::Escaped { t: self.t });
        }
        self.s = next;
        Ok(())
    }
}

fn check_start(x0: f64, y0: f64) -> Result<(), OrbitError> {
    if x0.is_finite() && y0.is_finite() {
        Ok(())
    } else {
        Err(OrbitError::InvalidInput("initial point must be finite".into()))
    }
}

/// Integrates from `(x0, y0)` over `[0, t_end]`, recording every accepted
/// step.
pub fn integrate(sys: &PlanarSystem, x0: f64, y0: f64, t_end: f64, cfg: IntegratorConfig) -> Result<Trajectory, OrbitError> {
    cfg.validate()?;
    check_start(x0, y0)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(OrbitError::InvalidInput("t_end must be positive".into()));
    }
    let field = Field::new(sys)?;
    let mut st = Stepper::new(&field, cfg, [x0, y0]);
    let mut samples = vec![Sample { t: 0.0, x: x0, y: y0 }];
    while st.t < t_end {
        st.step(t_end)?;
        samples.push(Sample { t: st.t, x: st.s[0], y: st.s[1] });
    }
    Ok(Trajectory { samples, config: cfg, events: Vec::new() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayReturn {
    pub period: f64,
    pub endpoint: (f64, f64),
    pub trajectory: Trajectory,
}

impl RayReturn {
    pub fn closure_defect(&self, x0: f64, y0: f64) -> f64 {
        (self.endpoint.0 - x0).hypot(self.endpoint.1 - y0)
    }

    /// Signed change of radius over one revolution.
    pub fn radial_growth(&self, x0: f64, y0: f64) -> f64 {
        self.endpoint.0.hypot(self.endpoint.1) - x0.hypot(y0)
    }
}

fn require_form1(sys: &PlanarSystem) -> Result<(), OrbitError> {
    let r = angular_speed_residual(sys);
    if r.is_zero() {
        Ok(())
    } else {
        Err(OrbitError::NotForm1(r.to_string()))
    }
}

/// Time of first return to the ray from the origin through `(x0, y0)`.
pub fn ray_return_time(sys: &PlanarSystem, x0: f64, y0: f64, cfg: IntegratorConfig) -> Result<RayReturn, OrbitError> {
    cfg.validate()?;
    check_start(x0, y0)?;
    if x0 == 0.0 && y0 == 0.0 {
        return Err(OrbitError::InvalidInput("start point is the origin".into()));
    }
    require_form1(sys)?;
    let field = Field::new(sys)?;
    let normal = |s: [f64; 2]| -y0 * s[0] + x0 * s[1];
    let along = |s: [f64; 2]| x0 * s[0] + y0 * s[1];

    let mut st = Stepper::new(&field, cfg, [x0, y0]);
    let mut samples = vec![Sample { t: 0.0, x: x0, y: y0 }];
    loop {
        let (t_prev, s_prev) = (st.t, st.s);
        let prev_stepper = Stepper { field: &field, cfg, t: t_prev, s: s_prev, h: st.h, steps: 0 };
        st.step(f64::INFINITY)?;
        let (n0, n1) = (normal(s_prev), normal(st.s));
        let crossed = samples.len() > 1 && along(st.s) > 0.0 && ((n0 > 0.0 && n1 <= 0.0) || (n0 < 0.0 && n1 >= 0.0));
        if !crossed {
            samples.push(Sample { t: st.t, x: st.s[0], y: st.s[1] });
            continue;
        }
        let (mut lo, mut hi) = (0.0, st.t - t_prev);
        let mut s_hi = st.s;
        while hi - lo > EVENT_TOL {
            let mid = 0.5 * (lo + hi);
            let s_mid = prev_stepper.trial(mid);
            if (normal(s_mid) > 0.0) == (n0 > 0.0) && normal(s_mid) != 0.0 {
                lo = mid;
            } else {
                hi = mid;
                s_hi = s_mid;
            }
        }
        let event = Sample { t: t_prev + hi, x: s_hi[0], y: s_hi[1] };
        samples.push(event);
        return Ok(RayReturn {
            period: event.t,
            endpoint: (event.x, event.y),
            trajectory: Trajectory { samples, config: cfg, events: vec![event] },
        });
    }
}

/// `|endpoint − start|` after one return to the starting ray.
pub fn closure_defect(sys: &PlanarSystem, x0: f64, y0: f64, cfg: IntegratorConfig) -> Result<f64, OrbitError> {
    Ok(ray_return_time(sys, x0, y0, cfg)?.closure_defect(x0, y0))
}

/// The case (i) partner quartic `e x⁴ − 4d x³y + 4h xy³ − g y⁴` on the unit
/// circle.
pub fn partner_quartic_on_circle(d: f64, e: f64, g: f64, h: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    e * c.powi(4) - 4.0 * d * c.powi(3) * s + 4.0 * h * c * s.powi(3) - g * s.powi(4)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub c0: f64,
    /// Distinct global maximizer angles in `[0, 2π)`.
    pub maximizers: Vec<f64>,
    /// `(φ, ϱ)` on the uniform grid; `ϱ = ∞` at maximizers.
    pub samples: Vec<(f64, f64)>,
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Period-annulus boundary `ϱ(φ) = (c₀ − q₄(cos φ, sin φ))^{−1/4}` of a
/// case (i) center, where `c₀` is the maximum of `q₄` on the unit circle.
pub fn boundary_curve(d: f64, e: f64, g: f64, h: f64, n: usize) -> Result<Boundary, OrbitError> {
    if n < 64 {
        return Err(OrbitError::InvalidInput(format!("N = {n} < 64")));
    }
    if ![d, e, g, h].iter().all(|v| v.is_finite()) {
        return Err(OrbitError::InvalidInput("coefficients must be finite".into()));
    }
    let q = |phi: f64| partner_quartic_on_circle(d, e, g, h, phi);
    let step = TAU / DENSE_SAMPLES as f64;
    let vals: Vec<f64> = (0..DENSE_SAMPLES).map(|i| q(i as f64 * step)).collect();
    let mut candidates = Vec::new();
    for i in 0..DENSE_SAMPLES {
        let prev = vals[(i + DENSE_SAMPLES - 1) % DENSE_SAMPLES];
        let next = vals[(i + 1) % DENSE_SAMPLES];
        if vals[i] >= prev && vals[i] >= next {
            let phi = golden_max(q, (i as f64 - 1.0) * step, (i as f64 + 1.0) * step);
            candidates.push((phi.rem_euclid(TAU), q(phi)));
        }
    }
    let c0 = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    if c0 <= 1e-12 {
        return Err(OrbitError::InapplicableBoundary { c0 });
    }
    let level = 1e-9 * c0.abs().max(1.0);
    let mut maximizers: Vec<f64> = Vec::new();
    for (phi, v) in candidates {
        if c0 - v <= level && maximizers.iter().all(|m| angular_distance(*m, phi) > MAXIMIZER_TOL) {
            maximizers.push(phi);
        }
    }
    maximizers.sort_by(f64::total_cmp);
    let samples = (0..n)
        .map(|k| {
            let phi = TAU * k as f64 / n as f64;
            let gap = c0 - q(phi);
            let at_max = maximizers.iter().any(|m| angular_distance(*m, phi) <= MAXIMIZER_TOL);
            let rho = if at_max || gap <= 0.0 { f64::INFINITY } else { gap.powf(-0.25) };
            (phi, rho)
        })
        .collect();
    Ok(Boundary { c0, maximizers, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BType {
    B2,
    B4,
    Unknown,
}

impl BType {
    pub fn label(&self) -> &'static str {
        match self {
            BType::B2 => "B2",
            BType::B4 => "B4",
            BType::Unknown => "Unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    EgRule { e: f64, g: f64 },
    MaximizerCount(usize),
    Inapplicable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterTypeVerdict {
    pub tag: BType,
    pub evidence: Evidence,
}

fn eg_rule(e: f64, g: f64) -> CenterTypeVerdict {
    let tag = if e * g >= 0.0 { BType::B2 } else { BType::B4 };
    CenterTypeVerdict { tag, evidence: Evidence::EgRule { e, g } }
}

fn by_maximizers(d: f64, e: f64, g: f64, h: f64) -> Result<CenterTypeVerdict, OrbitError> {
    match boundary_curve(d, e, g, h, 64) {
        Ok(b) => {
            let k = b.maximizers.len();
            let tag = match k {
                2 => BType::B2,
                4 => BType::B4,
                _ => BType::Unknown,
            };
            Ok(CenterTypeVerdict { tag, evidence: Evidence::MaximizerCount(k) })
        }
        Err(e @ OrbitError::InapplicableBoundary { .. }) => Ok(CenterTypeVerdict {
            tag: BType::Unknown,
            evidence: Evidence::Inapplicable(e.to_string()),
        }),
        Err(e) => Err(e),
    }
}

/// `B²` / `B⁴` verdict for a numeric center of the quintic family.
pub fn center_type(params: &QuinticParams, case: &CenterCase) -> Result<CenterTypeVerdict, OrbitError> {
    let v = params
        .to_f64()
        .ok_or_else(|| OrbitError::NotNumeric(params.to_string()))?;
    let [_, b, _, d, e, _, g, h] = v;
    match case {
        // b = 0 makes this a case (i) member; the eg rule is stated for b ≠ 0
        CenterCase::CaseII if b == 0.0 => by_maximizers(0.0, e, g, 0.0),
        CenterCase::CaseII => Ok(eg_rule(e, g)),
        CenterCase::CaseI => by_maximizers(d, e, g, h),
        CenterCase::CaseIII { .. } => {
            let rot = rotate_to_canonical(params)?;
            let scale = rot.rotated.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
            let snap = |v: f64| if v.abs() < 1e-9 * scale { 0.0 } else { v };
            Ok(eg_rule(snap(rot.e1), snap(rot.g1)))
        }
    }
}

/// Largest relative deviation of `H` from its initial value along `traj`.
pub fn conservation_drift(h: &FirstIntegralSpec, params: &BTreeMap<Var, f64>, traj: &Trajectory) -> Result<f64, OrbitError> {
    let eval = |i: usize, s: &Sample| -> Result<f64, OrbitError> {
        let v = h.eval_f64(params, s.x, s.y).map_err(|e| OrbitError::IntegralDomain {
            index: i,
            x: s.x,
            y: s.y,
            reason: e.to_string(),
        })?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(OrbitError::IntegralDomain { index: i, x: s.x, y: s.y, reason: "non-finite value".into() })
        }
    };
    let h0 = eval(0, &traj.samples[0])?;
    if h0 == 0.0 {
        return Err(OrbitError::IntegralDomain {
            index: 0,
            x: traj.samples[0].x,
            y: traj.samples[0].y,
            reason: "H vanishes at the start point".into(),
        });
    }
    let mut worst = 0.0f64;
    for (i, s) in traj.samples.iter().enumerate() {
        worst = worst.max(((eval(i, s)? - h0) / h0).abs());
    }
    Ok(worst)
}

/// Ratio of fixed-step RK4 endpoint errors at steps `h` and `h/2` on the
/// linear center over `[0, 2π]`; ≈ 16 for a fourth-order method.
pub fn rk4_order_factor(h: f64) -> Result<f64, OrbitError> {
    let sys = PlanarSystem::linear_center();
    let err = |step: f64| -> Result<f64, OrbitError> {
        let end = integrate(&sys, 1.0, 0.0, 2.0 * PI, IntegratorConfig::rk4(step))?.last();
        Ok((end.x - 1.0).hypot(end.y))
    };
    Ok(err(h)? / err(h / 2.0)?)
}
