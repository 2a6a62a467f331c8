//! The uniformly isochronous quintic family
//!
//! ```text
//! ẋ = y + x·P(x, y),   ẏ = −x + y·P(x, y),
//! P = a x² + b xy + c y² + d x⁴ + e x³y + f x²y² + g xy³ + h y⁴,
//! ```
//!
//! its three center cases, commuting partners, first integrals, the
//! `b ↦ 1` normalization of case (ii) and the rotation that brings case (iii)
//! to the case (ii) shape.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::lyapunov::{pl_constants, LyapunovError, PlanarSystem, Sign};
use crate::qpoly::{
    parse_expr, rat, rational_to_f64, Monomial, ParseError, Poly, Rational, RationalFunction, Var,
};
use crate::structure::{
    cofactor_of, rational_integral_residual, verify_darboux_integral, AlgebraicInvariant,
    DarbouxCandidate, DarbouxVerdict, ExpExponent, ExpInvariant, StructureError,
};

pub const NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuinticError {
    #[error("parameters must be numeric: {0}")]
    NotNumeric(String),
    #[error("expected 8 comma-separated coefficients, got {0}")]
    WrongCount(usize),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("case (iii) with d or e nonzero has no polynomial partner in closed form")]
    NoSymbolicPartner,
    #[error("parameters do not match {0}")]
    CaseMismatch(String),
    #[error("case (ii) needs b in {{0, 1}}; normalize b first")]
    NeedsNormalization,
    #[error("b = 0 is already in normalized form")]
    AlreadyNormalized,
    #[error("a must be nonzero")]
    ZeroA,
    #[error("first integral failed its certificate: {0}")]
    NotCertified(String),
    #[error("no closed-form first integral available: {0}")]
    NoClosedForm(String),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// The eight coefficients `a … h`, each an arbitrary polynomial in
/// parameter symbols (a number, a symbol, or an expression).
#[derive(Clone, PartialEq)]
pub struct QuinticParams {
    coeffs: [Poly; 8],
}

impl QuinticParams {
    pub fn new(coeffs: [Poly; 8]) -> Self {
        QuinticParams { coeffs }
    }

    /// All eight coefficients as independent symbols.
    pub fn symbolic() -> Self {
        QuinticParams::new(NAMES.map(Poly::var))
    }

    pub fn from_rationals(v: &[Rational; 8]) -> Self {
        QuinticParams::new(v.clone().map(Poly::constant))
    }

    pub fn from_ints(v: [i64; 8]) -> Self {
        QuinticParams::new(v.map(Poly::int))
    }

    /// Parses `"a,b,c,d,e,f,g,h"` where each entry is an expression.
    pub fn parse_list(s: &str) -> Result<Self, QuinticError> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 8 {
            return Err(QuinticError::WrongCount(parts.len()));
        }
        let mut coeffs: [Poly; 8] = Default::default();
        for (slot, text) in coeffs.iter_mut().zip(parts) {
            *slot = parse_expr(text)?;
        }
        Ok(QuinticParams::new(coeffs))
    }

    pub fn get(&self, name: &str) -> &Poly {
        let i = NAMES.iter().position(|&n| n == name).expect("coefficient name a..h");
        &self.coeffs[i]
    }

    pub fn set(&mut self, name: &str, value: Poly) {
        let i = NAMES.iter().position(|&n| n == name).expect("coefficient name a..h");
        self.coeffs[i] = value;
    }

    pub fn with(mut self, name: &str, value: Poly) -> Self {
        self.set(name, value);
        self
    }

    pub fn coeffs(&self) -> &[Poly; 8] {
        &self.coeffs
    }

    pub fn numeric(&self) -> Option<[Rational; 8]> {
        let v: Option<Vec<Rational>> = self.coeffs.iter().map(Poly::as_constant).collect();
        v.map(|v| v.try_into().expect("eight"))
    }

    pub fn require_numeric(&self) -> Result<[Rational; 8], QuinticError> {
        self.numeric()
            .ok_or_else(|| QuinticError::NotNumeric(self.to_string()))
    }

    pub fn to_f64(&self) -> Option<[f64; 8]> {
        self.numeric().map(|v| v.map(|r| rational_to_f64(&r)))
    }

    /// The common factor `P` of the nonlinear terms.
    pub fn nonlinear_factor(&self) -> Poly {
        let monos = [(2, 0), (1, 1), (0, 2), (4, 0), (3, 1), (2, 2), (1, 3), (0, 4)];
        self.coeffs
            .iter()
            .zip(monos)
            .map(|(c, (i, j))| c * &Poly::term(Rational::one(), Monomial::xy(i, j)))
            .sum()
    }

    pub fn substitute(&self, bindings: &HashMap<Var, Poly>) -> Self {
        QuinticParams::new(self.coeffs.clone().map(|c| c.substitute(bindings)))
    }

    pub fn bind(&self, point: &BTreeMap<Var, Rational>) -> Self {
        QuinticParams::new(self.coeffs.clone().map(|c| c.bind(point)))
    }
}

impl fmt::Display for QuinticParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Debug for QuinticParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuinticParams{self}")
    }
}

/// `ẋ = y + xP, ẏ = −x + yP`.
pub fn build_system(params: &QuinticParams) -> PlanarSystem {
    let r = params.nonlinear_factor();
    let (x, y) = (Poly::x(), Poly::y());
    PlanarSystem::new(&y + &(&x * &r), &(-&x) + &(&y * &r))
}

/// The four residuals `a + c`, `3d + f + 3h`, `3ce − bf + 3cg − 6bh`,
/// `2c²f − 3bcg + 3b²h`.
pub fn reduced_conditions(params: &QuinticParams) -> [Poly; 4] {
    let [a, b, c, d, e, f, g, h] = params.coeffs().clone();
    let k = |n: i64| Poly::int(n);
    [
        &a + &c,
        &(&(&k(3) * &d) + &f) + &(&k(3) * &h),
        [
            &(&k(3) * &c) * &e,
            -&(&b * &f),
            &(&k(3) * &c) * &g,
            &(&k(-6) * &b) * &h,
        ]
        .into_iter()
        .sum(),
        [
            &(&(&k(2) * &c) * &c) * &f,
            &(&(&k(-3) * &b) * &c) * &g,
            &(&(&k(3) * &b) * &b) * &h,
        ]
        .into_iter()
        .sum(),
    ]
}

/// `(f, g, h)` required by case (iii), as rational functions of `a, b, d, e`.
pub fn case_iii_witness(a: &Poly, b: &Poly, d: &Poly, e: &Poly) -> [RationalFunction; 3] {
    let two = Poly::int(2);
    let three = Poly::int(3);
    let a2 = a * a;
    let a3 = &a2 * a;
    let b2 = b * b;
    let bd_ae = &(b * d) - &(a * e);
    let ae_bd = -&bd_ae;
    let f = &(&three * b) * &ae_bd;
    let g = &(&(&(&two * &a2) * b) * d) + &(&(&(&two * &a2) - &b2) * &bd_ae);
    let h = &(&(&Poly::int(-2) * &a2) * d) + &(b * &bd_ae);
    let rf = |n: Poly, d: Poly| RationalFunction::new(n, d).expect("a is nonzero");
    [
        rf(f, &two * &a2),
        rf(g, &two * &a3),
        rf(h, &two * &a2),
    ]
}

/// Substitution `c ↦ −a` and `f, g, h ↦` the case (iii) rational functions,
/// all in terms of the symbols `a, b, d, e`.
pub fn case_iii_substitution() -> BTreeMap<Var, RationalFunction> {
    let [a, b, d, e] = ["a", "b", "d", "e"].map(Poly::var);
    let [f, g, h] = case_iii_witness(&a, &b, &d, &e);
    let mut m = BTreeMap::new();
    m.insert(Var::new("c"), RationalFunction::from_poly(-&a));
    m.insert(Var::new("f"), f);
    m.insert(Var::new("g"), g);
    m.insert(Var::new("h"), h);
    m
}

/// Case (i) with symbols `d, e, g, h` and `f = −3(d + h)`.
pub fn case_i_params() -> QuinticParams {
    let f = parse_expr("-3*d - 3*h").expect("literal");
    QuinticParams::symbolic()
        .with("a", Poly::zero())
        .with("b", Poly::zero())
        .with("c", Poly::zero())
        .with("f", f)
}

/// Case (ii) with symbols `b, e, g`.
pub fn case_ii_params() -> QuinticParams {
    let mut p = QuinticParams::symbolic();
    for n in ["a", "c", "d", "f", "h"] {
        p.set(n, Poly::zero());
    }
    p
}

/// Case (iii) written polynomially with `b = a·beta`; since `a ≠ 0` this is a
/// bijective reparametrization and `f, g, h` become polynomials in
/// `beta, d, e`.
pub fn case_iii_params_polynomial() -> QuinticParams {
    let p = |s: &str| parse_expr(s).expect("literal");
    QuinticParams::symbolic()
        .with("b", p("a*beta"))
        .with("c", p("-a"))
        .with("f", p("3/2*beta*(e - beta*d)"))
        .with("g", p("1/2*(2*beta*d + (2 - beta^2)*(beta*d - e))"))
        .with("h", p("1/2*(-2*d + beta*(beta*d - e))"))
}

/// One of the three center cases of the family.
#[derive(Debug, Clone, PartialEq)]
pub enum CenterCase {
    CaseI,
    CaseII,
    /// Carries the required `(f, g, h)`.
    CaseIII {
        f: RationalFunction,
        g: RationalFunction,
        h: RationalFunction,
    },
}

impl CenterCase {
    pub fn label(&self) -> &'static str {
        match self {
            CenterCase::CaseI => "i",
            CenterCase::CaseII => "ii",
            CenterCase::CaseIII { .. } => "iii",
        }
    }

    /// Case (iii) with witness computed from `params`.
    pub fn case_iii_for(params: &QuinticParams) -> Self {
        let [f, g, h] = case_iii_witness(params.get("a"), params.get("b"), params.get("d"), params.get("e"));
        CenterCase::CaseIII { f, g, h }
    }
}

/// Center case for numeric parameters; cases are tried in the order
/// (i), (ii), (iii) and the first match is reported.
pub fn theorem_case(params: &QuinticParams) -> Result<Option<CenterCase>, QuinticError> {
    let [a, b, c, d, e, f, g, h] = params.require_numeric()?;
    let z = |r: &Rational| r.is_zero();
    if z(&a) && z(&b) && z(&c) && f == -(rat(3) * (&d + &h)) {
        return Ok(Some(CenterCase::CaseI));
    }
    if z(&a) && z(&c) && z(&d) && z(&f) && z(&h) {
        return Ok(Some(CenterCase::CaseII));
    }
    if !z(&a) && c == -a.clone() {
        let [wf, wg, wh] = case_iii_witness(&Poly::constant(a), &Poly::constant(b), &Poly::constant(d), &Poly::constant(e));
        let val = |w: &RationalFunction| w.eval_rational(&BTreeMap::new()).expect("numeric");
        if val(&wf) == f && val(&wg) == g && val(&wh) == h {
            return Ok(Some(CenterCase::CaseIII { f: wf, g: wg, h: wh }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Center(CenterCase),
    Focus { index: usize, sign: Sign },
    Undetermined(usize),
}

/// Center by the theorem's conditions, otherwise the first nonzero
/// Poincaré–Lyapunov constant among `D₁ … D_m`.
pub fn classify(params: &QuinticParams, m: usize) -> Result<Classification, QuinticError> {
    if let Some(case) = theorem_case(params)? {
        return Ok(Classification::Center(case));
    }
    let report = pl_constants(&build_system(params), m)?;
    for (i, c) in report.constants.iter().enumerate() {
        let v = c.as_constant().expect("numeric system gives numeric constants");
        if let Some(sign) = Sign::of(&v) {
            return Ok(Classification::Focus { index: i + 1, sign });
        }
    }
    Ok(Classification::Undetermined(m))
}

fn radial(q: &Poly) -> PlanarSystem {
    PlanarSystem::new(&Poly::x() * q, &Poly::y() * q)
}

/// Partner quartic of case (i): `e x⁴ − 4d x³y + 4h xy³ − g y⁴`.
pub fn case_i_partner_quartic(params: &QuinticParams) -> Poly {
    let t = |c: &Poly, k: i64, i: u32, j: u32| &(c * &Poly::int(k)) * &Poly::term(Rational::one(), Monomial::xy(i, j));
    [
        t(params.get("e"), 1, 4, 0),
        t(params.get("d"), -4, 3, 1),
        t(params.get("h"), 4, 1, 3),
        t(params.get("g"), -1, 0, 4),
    ]
    .into_iter()
    .sum()
}

fn u_poly(params: &QuinticParams) -> Poly {
    let (x, y) = (Poly::x(), Poly::y());
    &(params.get("e") * &(&x * &x)) + &(params.get("g") * &(&y * &y))
}

/// Polynomial system commuting with the family member of the given case.
pub fn commuting_partner(params: &QuinticParams, case: &CenterCase) -> Result<PlanarSystem, QuinticError> {
    match case {
        CenterCase::CaseI => Ok(radial(&(&Poly::one() + &case_i_partner_quartic(params)))),
        CenterCase::CaseII => {
            // (e − g) + (ex² + gy²)(b + ex² + gy²)
            let u = u_poly(params);
            let q = &(params.get("e") - params.get("g")) + &(&u * &(params.get("b") + &u));
            Ok(radial(&q))
        }
        CenterCase::CaseIII { .. } => {
            if !params.get("d").is_zero() || !params.get("e").is_zero() {
                return Err(QuinticError::NoSymbolicPartner);
            }
            let (x, y) = (Poly::x(), Poly::y());
            // 1 + bx² − 2axy
            let q = &(&Poly::one() + &(params.get("b") * &(&x * &x))) - &(&(params.get("a") * &Poly::int(2)) * &(&x * &y));
            Ok(radial(&q))
        }
    }
}

/// Normalized-form data for a case (iii) system rotated to the case (ii)
/// shape.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalRotation {
    pub tan_phi: f64,
    pub phi: f64,
    /// Coefficients `a … h` of the rotated system.
    pub rotated: [f64; 8],
    pub b1: f64,
    pub e1: f64,
    pub g1: f64,
    /// Largest absolute value among the rotated `a, c, d, f, h`.
    pub residual: f64,
}

impl CanonicalRotation {
    /// Coordinates of `(x, y)` in the rotated frame.
    pub fn to_rotated(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.phi.sin_cos();
        // old = R·new with R = [[c, s], [−s, c]]
        (c * x - s * y, s * x + c * y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FirstIntegralSpec {
    /// `H = N/D` with `dH/dt ≡ 0`.
    RationalH(RationalFunction),
    /// Certified Darboux product.
    DarbouxWithExp(DarbouxCandidate),
    /// Case (iii) with `d` or `e` nonzero; evaluated by rotating to the
    /// case (ii) shape.
    NumericOnly(CanonicalRotation),
}

impl FirstIntegralSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            FirstIntegralSpec::RationalH(_) => "RationalH",
            FirstIntegralSpec::DarbouxWithExp(_) => "DarbouxWithExp",
            FirstIntegralSpec::NumericOnly(_) => "NumericOnly",
        }
    }

    /// Value at `(x, y)`; symbols in the integral must be bound by `params`.
    pub fn eval_f64(&self, params: &BTreeMap<Var, f64>, x: f64, y: f64) -> Result<f64, QuinticError> {
        match self {
            FirstIntegralSpec::RationalH(h) => {
                let mut pt = params.clone();
                pt.insert(Var::x(), x);
                pt.insert(Var::y(), y);
                h.eval_f64(&pt).map_err(|e| StructureError::from(e).into())
            }
            FirstIntegralSpec::DarbouxWithExp(c) => Ok(c.eval_f64(params, x, y)?),
            FirstIntegralSpec::NumericOnly(rot) => {
                let (xr, yr) = rot.to_rotated(x, y);
                canonical_integral_f64(rot.b1, rot.e1, rot.g1, xr, yr)
            }
        }
    }
}

/// First integral of `ẋ = y + x²y(b + ex² + gy²)`, `ẏ = −x + xy²(…)` for
/// nonzero `b`, evaluated after the scaling to `b = 1`.
pub fn canonical_integral_f64(b: f64, e: f64, g: f64, x: f64, y: f64) -> Result<f64, QuinticError> {
    let k = b.abs().sqrt();
    let (e1, g1, xs, ys) = if b > 0.0 {
        (e / (b * b), g / (b * b), x * k, y * k)
    } else {
        (-g / (b * b), -e / (b * b), y * k, x * k)
    };
    let params = QuinticParams::symbolic()
        .with("b", Poly::one())
        .with("a", Poly::zero())
        .with("c", Poly::zero())
        .with("d", Poly::zero())
        .with("f", Poly::zero())
        .with("h", Poly::zero());
    let (e_sym, g_sym) = if e1 == g1 {
        (Poly::var("e"), Poly::var("e"))
    } else {
        (Poly::var("e"), Poly::var("g"))
    };
    let params = params.with("e", e_sym).with("g", g_sym);
    let spec = normalized_case_ii_integral(&params)?;
    let mut pt = BTreeMap::new();
    pt.insert(Var::new("e"), e1);
    pt.insert(Var::new("g"), g1);
    spec.eval_f64(&pt, xs, ys)
}

/// Darboux / rational integral of the `b = 1` (or `b = 0`) case (ii)
/// system, certified before return.
fn normalized_case_ii_integral(params: &QuinticParams) -> Result<FirstIntegralSpec, QuinticError> {
    let sys = build_system(params);
    let (x, y) = (Poly::x(), Poly::y());
    let r2 = &(&x * &x) + &(&y * &y);
    let (e, g) = (params.get("e").clone(), params.get("g").clone());
    let b = params.get("b");

    if b.is_zero() {
        let den = &(&Poly::one() + &(&e * &x.pow(4))) - &(&g * &y.pow(4));
        return certify_rational(&sys, RationalFunction::new(r2.pow(2), den).expect("nonzero"));
    }
    if !b.as_constant().is_some_and(|v| v.is_one()) {
        return Err(QuinticError::NeedsNormalization);
    }
    if e.is_zero() && g.is_zero() {
        // ẋ = y(1 + x²), ẏ = −x(1 − y²)
        let h = RationalFunction::new(parse_expr("1 - y^2").expect("literal"), parse_expr("1 + x^2").expect("literal"))
            .expect("nonzero");
        return certify_rational(&sys, h);
    }

    let one = |v: i64| RationalFunction::constant(rat(v));
    let algebraic_inv = |curve: Poly| -> Result<AlgebraicInvariant, QuinticError> {
        let cofactor = cofactor_of(&sys, &curve)
            .ok_or_else(|| QuinticError::NotCertified(format!("{curve} is not invariant")))?;
        Ok(AlgebraicInvariant { curve, cofactor })
    };
    let u = u_poly(params);
    let delta = &e - &g;
    let c1 = algebraic_inv(r2.clone())?;
    let c2 = algebraic_inv(&(&delta + &u) + &(&u * &u))?;
    let xy2 = &Poly::int(2) * &(&x * &y);

    let cand = if delta.is_zero() {
        let g_exp = RationalFunction::new(&Poly::one() + &(&x * &x), r2.clone()).expect("nonzero");
        let c3 = ExpInvariant {
            exponent: ExpExponent::Rational(g_exp),
            cofactor: &(-&e) * &xy2,
        };
        let inv_e = RationalFunction::new(Poly::one(), e.clone())
            .ok_or_else(|| QuinticError::NotCertified("e = g = 0".into()))?;
        DarbouxCandidate {
            algebraic: vec![(c1, one(2)), (c2, one(-1))],
            exponential: vec![(c3, inv_e)],
        }
    } else {
        let c3 = ExpInvariant {
            exponent: ExpExponent::Integral { u, delta },
            cofactor: xy2,
        };
        DarbouxCandidate {
            algebraic: vec![(c1, one(2)), (c2, one(-1))],
            exponential: vec![(c3, one(-1))],
        }
    };
    match verify_darboux_integral(&sys, &cand)? {
        DarbouxVerdict::Certified => Ok(FirstIntegralSpec::DarbouxWithExp(cand)),
        DarbouxVerdict::Failed(r) => Err(QuinticError::NotCertified(format!("cofactor sum {r}"))),
    }
}

fn certify_rational(sys: &PlanarSystem, h: RationalFunction) -> Result<FirstIntegralSpec, QuinticError> {
    let r = rational_integral_residual(sys, &h);
    if !r.is_zero() {
        return Err(QuinticError::NotCertified(format!("dH/dt numerator {r}")));
    }
    Ok(FirstIntegralSpec::RationalH(h))
}

/// A certified first integral for the family member of the given case.
pub fn first_integral(params: &QuinticParams, case: &CenterCase) -> Result<FirstIntegralSpec, QuinticError> {
    let sys = build_system(params);
    let (x, y) = (Poly::x(), Poly::y());
    let r2 = &(&x * &x) + &(&y * &y);
    match case {
        CenterCase::CaseI => {
            let den = &Poly::one() + &case_i_partner_quartic(params);
            certify_rational(&sys, RationalFunction::new(r2.pow(2), den).expect("nonzero"))
        }
        CenterCase::CaseII => normalized_case_ii_integral(params),
        CenterCase::CaseIII { .. } => {
            if params.get("d").is_zero() && params.get("e").is_zero() {
                let den = &(&Poly::one() + &(params.get("b") * &(&x * &x)))
                    - &(&(params.get("a") * &Poly::int(2)) * &(&x * &y));
                return certify_rational(&sys, RationalFunction::new(r2, den).expect("nonzero"));
            }
            if params.numeric().is_none() {
                return Err(QuinticError::NoClosedForm(
                    "case (iii) with d, e nonzero needs numeric parameters".into(),
                ));
            }
            Ok(FirstIntegralSpec::NumericOnly(rotate_to_canonical(params)?))
        }
    }
}

/// How the normalized coordinates relate to the original ones.
#[derive(Debug, Clone, PartialEq)]
pub enum Scale {
    Exact(Rational),
    Float(f64),
}

impl Scale {
    pub fn value(&self) -> f64 {
        match self {
            Scale::Exact(r) => rational_to_f64(r),
            Scale::Float(v) => *v,
        }
    }
}

/// Record of the change of variables performed by [`normalize_b`]:
/// `X = k·x, Y = k·y` (or `X = k·y, Y = k·x` when `swapped`) with
/// `k = √|b|`, and `t ↦ −t` when `time_reversed`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeOfVariables {
    pub b: Rational,
    pub scale: Scale,
    pub swapped: bool,
    pub time_reversed: bool,
}

impl ChangeOfVariables {
    pub fn is_identity(&self) -> bool {
        self.b.is_one()
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let k = self.scale.value();
        if self.swapped {
            (k * y, k * x)
        } else {
            (k * x, k * y)
        }
    }
}

fn exact_sqrt(r: &Rational) -> Option<Rational> {
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rational::new(n, d))
}

/// Rescales a case (ii) member with `b ≠ 0` to `b = 1`. The new system is
/// obtained by substituting `x = w·X, y = w·Y` (swapped for `b < 0`) with
/// `w² = 1/|b|`, reversing time for `b < 0`, and reading off the
/// coefficients.
pub fn normalize_b(params: &QuinticParams) -> Result<(QuinticParams, ChangeOfVariables), QuinticError> {
    let v = params.require_numeric()?;
    for (i, n) in NAMES.iter().enumerate() {
        if ["a", "c", "d", "f", "h"].contains(n) && !v[i].is_zero() {
            return Err(QuinticError::CaseMismatch("case (ii): a = c = d = f = h = 0".into()));
        }
    }
    let b = v[1].clone();
    if b.is_zero() {
        return Err(QuinticError::AlreadyNormalized);
    }
    let negative = b.is_negative();
    let w = Var::new("w");
    let wp = Poly::var("w");
    let sys = build_system(params);
    let mut bind = HashMap::new();
    if negative {
        bind.insert(Var::x(), &wp * &Poly::y());
        bind.insert(Var::y(), &wp * &Poly::x());
    } else {
        bind.insert(Var::x(), &wp * &Poly::x());
        bind.insert(Var::y(), &wp * &Poly::y());
    }
    let (np, nq) = if negative {
        (sys.q.substitute(&bind), sys.p.substitute(&bind))
    } else {
        (sys.p.substitute(&bind), sys.q.substitute(&bind))
    };
    let sigma = if negative { -Rational::one() } else { Rational::one() };
    let w2 = b.abs().recip();
    let reduce = |p: Poly| -> Poly {
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            let k = m.exponent(&w);
            // odd powers only: divide by w, then w^{2j} -> (1/|b|)^j
            let (_, rest) = m.split(|v| *v == w);
            let j = (k - 1) / 2;
            out.add_term(rest, c * num_traits::pow(w2.clone(), j as usize) * &sigma);
        }
        out
    };
    let (np, nq) = (reduce(np), reduce(nq));
    let b1 = np.coeff_xy(2, 1).as_constant().unwrap_or_default();
    let e1 = np.coeff_xy(4, 1).as_constant().unwrap_or_default();
    let g1 = np.coeff_xy(2, 3).as_constant().unwrap_or_default();
    let out = QuinticParams::from_rationals(&[
        Rational::zero(),
        b1,
        Rational::zero(),
        Rational::zero(),
        e1,
        Rational::zero(),
        g1,
        Rational::zero(),
    ]);
    debug_assert_eq!(build_system(&out), PlanarSystem::new(np, nq));
    let abs_b = b.abs();
    let scale = match exact_sqrt(&abs_b) {
        Some(r) => Scale::Exact(r),
        None => Scale::Float(rational_to_f64(&abs_b).sqrt()),
    };
    Ok((
        out,
        ChangeOfVariables {
            b,
            scale,
            swapped: negative,
            time_reversed: negative,
        },
    ))
}

// coefficients of X^{k-j} Y^j
fn hom_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, u) in a.iter().enumerate() {
        for (j, v) in b.iter().enumerate() {
            out[i + j] += u * v;
        }
    }
    out
}

/// Rotates a case (iii) member by the angle `φ` with
/// `tan φ = (−b + √(b² + 4a²)) / (2a)`, a root of `a t² + b t − a = 0`,
/// and measures how far the result is from the case (ii) shape.
pub fn rotate_to_canonical(params: &QuinticParams) -> Result<CanonicalRotation, QuinticError> {
    let v = params.to_f64().ok_or_else(|| QuinticError::NotNumeric(params.to_string()))?;
    let [a, b, ..] = v;
    if a == 0.0 {
        return Err(QuinticError::ZeroA);
    }
    let tan_phi = (-b + (b * b + 4.0 * a * a).sqrt()) / (2.0 * a);
    let phi = tan_phi.atan();
    let (s, c) = phi.sin_cos();
    // x = cX + sY, y = −sX + cY
    let lx = [c, s];
    let ly = [-s, c];
    let mut powx = vec![vec![1.0]];
    let mut powy = vec![vec![1.0]];
    for k in 1..=4 {
        powx.push(hom_mul(&powx[k - 1], &lx));
        powy.push(hom_mul(&powy[k - 1], &ly));
    }
    let monos = [(2, 0), (1, 1), (0, 2), (4, 0), (3, 1), (2, 2), (1, 3), (0, 4)];
    let mut quad = [0.0; 3];
    let mut quart = [0.0; 5];
    for (coef, (i, j)) in v.iter().zip(monos) {
        let term = hom_mul(&powx[i], &powy[j]);
        let target: &mut [f64] = if i + j == 2 { &mut quad } else { &mut quart };
        for (t, val) in target.iter_mut().zip(term) {
            *t += coef * val;
        }
    }
    let rotated = [quad[0], quad[1], quad[2], quart[0], quart[1], quart[2], quart[3], quart[4]];
    let residual = [rotated[0], rotated[2], rotated[3], rotated[5], rotated[7]]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(CanonicalRotation {
        tan_phi,
        phi,
        rotated,
        b1: rotated[1],
        e1: rotated[4],
        g1: rotated[6],
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::ratio;

    fn p(s: &str) -> Poly {
        parse_expr(s).unwrap()
    }

    #[test]
    fn build_examples() {
        assert_eq!(build_system(&QuinticParams::from_ints([0; 8])), PlanarSystem::linear_center());
        assert_eq!(
            build_system(&QuinticParams::from_ints([1, 0, 0, 0, 0, 0, 0, 0])),
            PlanarSystem::parse("y + x^3", "-x + x^2*y").unwrap()
        );
        let s = build_system(&QuinticParams::symbolic());
        assert_eq!(s.p.xy_components().keys().copied().collect::<Vec<_>>(), vec![1, 3, 5]);
    }

    #[test]
    fn reduced_condition_examples() {
        let z = reduced_conditions(&QuinticParams::from_ints([0, 1, 0, 0, 1, 0, 1, 0]));
        assert!(z.iter().all(Poly::is_zero));
        let z = reduced_conditions(&QuinticParams::from_ints([1, 0, 0, 0, 0, 0, 0, 0]));
        assert_eq!(z, [Poly::int(1), Poly::zero(), Poly::zero(), Poly::zero()]);
        let sym = reduced_conditions(&QuinticParams::symbolic());
        assert_eq!(sym[2], p("3*c*e - b*f + 3*c*g - 6*b*h"));
        assert_eq!(sym[3], p("2*c^2*f - 3*b*c*g + 3*b^2*h"));
    }

    #[test]
    fn polynomial_case_iii_matches_witness() {
        let params = case_iii_params_polynomial();
        assert!(reduced_conditions(&params).iter().all(Poly::is_zero));
        let a = params.get("a");
        let witness = case_iii_witness(a, params.get("b"), params.get("d"), params.get("e"));
        for (w, name) in witness.iter().zip(["f", "g", "h"]) {
            // witness = closed-form polynomial, as fractions with a cancelled
            assert_eq!(w.numerator(), &(params.get(name) * w.denominator()), "{name}");
        }
    }

    #[test]
    fn theorem_cases() {
        let case = |v: [i64; 8]| theorem_case(&QuinticParams::from_ints(v)).unwrap().map(|c| c.label());
        assert_eq!(case([0, 1, 0, 0, 0, 0, 0, 0]), Some("ii"));
        assert_eq!(case([0, 0, 0, 1, 0, -3, 0, 0]), Some("i"));
        assert_eq!(case([1, 0, -1, 0, 0, 0, 0, 0]), Some("iii"));
        assert_eq!(case([0, 0, 0, 0, 0, 0, 0, 0]), Some("i"));
        assert_eq!(case([1, 0, 0, 0, 0, 0, 0, 0]), None);
        assert!(theorem_case(&QuinticParams::symbolic()).is_err());
    }

    #[test]
    fn classify_examples() {
        let c = |v: [i64; 8]| classify(&QuinticParams::from_ints(v), 4).unwrap();
        assert_eq!(c([1, 0, 0, 0, 0, 0, 0, 0]), Classification::Focus { index: 1, sign: Sign::Positive });
        assert_eq!(c([0, 0, 0, 1, 0, -3, 0, 0]), Classification::Center(CenterCase::CaseI));
        assert_eq!(c([0, 0, 0, 1, 0, 0, 0, 0]), Classification::Focus { index: 2, sign: Sign::Positive });
    }

    #[test]
    fn cubic_partner() {
        let params = QuinticParams::from_ints([1, 1, -1, 0, 0, 0, 0, 0]);
        let case = theorem_case(&params).unwrap().unwrap();
        let partner = commuting_partner(&params, &case).unwrap();
        assert_eq!(partner, PlanarSystem::parse("x + x*(x^2 - 2*x*y)", "y + y*(x^2 - 2*x*y)").unwrap());
        let with_d = QuinticParams::from_ints([1, 1, -1, 1, 0, 0, 0, 0]);
        assert_eq!(
            commuting_partner(&with_d, &CenterCase::case_iii_for(&with_d)),
            Err(QuinticError::NoSymbolicPartner)
        );
    }

    #[test]
    fn case_i_integral_shape() {
        let params = case_i_params();
        let FirstIntegralSpec::RationalH(h) = first_integral(&params, &CenterCase::CaseI).unwrap() else {
            panic!("expected rational integral");
        };
        assert_eq!(h.numerator(), &p("(x^2 + y^2)^2"));
        assert_eq!(h.denominator(), &p("1 + e*x^4 - 4*d*x^3*y + 4*h*x*y^3 - g*y^4"));
    }

    #[test]
    fn cubic_iii_integral() {
        let params = QuinticParams::from_ints([1, 0, -1, 0, 0, 0, 0, 0]);
        let FirstIntegralSpec::RationalH(h) = first_integral(&params, &CenterCase::case_iii_for(&params)).unwrap() else {
            panic!("expected rational integral");
        };
        assert_eq!(h.numerator(), &p("x^2 + y^2"));
        assert_eq!(h.denominator(), &p("1 - 2*x*y"));
    }

    #[test]
    fn case_ii_darboux_exponents() {
        let params = case_ii_params().with("b", Poly::one());
        let FirstIntegralSpec::DarbouxWithExp(c) = first_integral(&params, &CenterCase::CaseII).unwrap() else {
            panic!("expected Darboux integral");
        };
        let exps: Vec<String> = c
            .algebraic
            .iter()
            .map(|(_, l)| l.to_string())
            .chain(c.exponential.iter().map(|(_, l)| l.to_string()))
            .collect();
        assert_eq!(exps, ["2", "-1", "-1"]);
        assert_eq!(c.algebraic[0].1, RationalFunction::constant(rat(2)));
        let unnormalized = case_ii_params().with("b", Poly::int(3));
        assert_eq!(
            first_integral(&unnormalized, &CenterCase::CaseII),
            Err(QuinticError::NeedsNormalization)
        );
    }

    #[test]
    fn equal_e_g_uses_positive_inverse_e() {
        let params = case_ii_params().with("b", Poly::one()).with("g", Poly::var("e"));
        let FirstIntegralSpec::DarbouxWithExp(c) = first_integral(&params, &CenterCase::CaseII).unwrap() else {
            panic!("expected Darboux integral");
        };
        assert_eq!(c.exponential[0].1, RationalFunction::new(Poly::one(), Poly::var("e")).unwrap());
        assert_eq!(c.exponential[0].0.cofactor, p("-2*e*x*y"));
    }

    #[test]
    fn cubic_degenerate_e_g_zero() {
        let params = QuinticParams::from_ints([0, 1, 0, 0, 0, 0, 0, 0]);
        assert!(matches!(
            first_integral(&params, &CenterCase::CaseII),
            Ok(FirstIntegralSpec::RationalH(_))
        ));
    }

    #[test]
    fn normalize_examples() {
        let (n, cov) = normalize_b(&QuinticParams::from_ints([0, 4, 0, 0, 16, 0, 0, 0])).unwrap();
        assert_eq!(n, QuinticParams::from_ints([0, 1, 0, 0, 1, 0, 0, 0]));
        assert_eq!(cov.scale, Scale::Exact(rat(2)));
        assert!(!cov.swapped && !cov.time_reversed);

        let (n, cov) = normalize_b(&QuinticParams::from_ints([0, 1, 0, 0, 5, 0, 7, 0])).unwrap();
        assert_eq!(n, QuinticParams::from_ints([0, 1, 0, 0, 5, 0, 7, 0]));
        assert!(cov.is_identity());

        // b < 0: e' = −g/b², g' = −e/b², swapped, time reversed
        let (n, cov) = normalize_b(&QuinticParams::from_ints([0, -1, 0, 0, 2, 0, 3, 0])).unwrap();
        assert_eq!(n, QuinticParams::from_ints([0, 1, 0, 0, -3, 0, -2, 0]));
        assert!(cov.swapped && cov.time_reversed);

        let (_, cov) = normalize_b(&QuinticParams::from_ints([0, 2, 0, 0, 1, 0, 0, 0])).unwrap();
        assert!(matches!(cov.scale, Scale::Float(v) if (v - 2f64.sqrt()).abs() < 1e-15));

        assert_eq!(
            normalize_b(&QuinticParams::from_ints([0, 0, 0, 0, 1, 0, 0, 0])),
            Err(QuinticError::AlreadyNormalized)
        );
        let frac = QuinticParams::from_rationals(&[
            rat(0), ratio(1, 4), rat(0), rat(0), ratio(1, 2), rat(0), rat(0), rat(0),
        ]);
        let (n, cov) = normalize_b(&frac).unwrap();
        assert_eq!(n.get("e"), &Poly::int(8));
        assert_eq!(cov.scale, Scale::Exact(ratio(1, 2)));
    }

    #[test]
    fn rotation_examples() {
        let r = rotate_to_canonical(&QuinticParams::from_ints([1, 0, -1, 0, 0, 0, 0, 0])).unwrap();
        assert!((r.tan_phi - 1.0).abs() < 1e-15);
        assert!(r.residual < 1e-9);
        assert!((r.b1.abs() - 2.0).abs() < 1e-12);

        let base = QuinticParams::from_ints([1, 1, -1, 1, 0, 0, 0, 0]);
        let CenterCase::CaseIII { f, g, h } = CenterCase::case_iii_for(&base) else { unreachable!() };
        let val = |w: &RationalFunction| Poly::constant(w.eval_rational(&BTreeMap::new()).unwrap());
        let params = base.with("f", val(&f)).with("g", val(&g)).with("h", val(&h));
        assert!(theorem_case(&params).unwrap().is_some());
        assert!(rotate_to_canonical(&params).unwrap().residual < 1e-9);

        assert_eq!(
            rotate_to_canonical(&QuinticParams::from_ints([0, 1, 0, 0, 0, 0, 0, 0])),
            Err(QuinticError::ZeroA)
        );
    }
}
