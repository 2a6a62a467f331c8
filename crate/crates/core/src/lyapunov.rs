//! Poincaré–Lyapunov constants by the comparison-function method.
//!
//! For `ẋ = p, ẏ = q` with linear part `(y, −x)` a formal function
//! `F = (x² + y²)/2 + f₃ + f₄ + …` is built stage by stage so that
//! `Ḟ = D₁(x⁴ + y⁴) + D₂(x⁶ + y⁶) + …`. Odd stages force the degree-`k`
//! part of `Ḟ` to vanish; even stages solve for `f_{k+1}` and the scalar `D`
//! with the normalization that `f_{k+1}` has no `y^{k+1}` term.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::qpoly::{
    parse_expr, rat, solve_linear_exact, EvalError, LinearSolveError, Monomial, ParseError, Poly,
    Rational, Var,
};

/// Upper bound on the number of constants computed by default.
pub const DEFAULT_CAP: usize = 6;

/// A planar polynomial vector field `ẋ = p(x, y), ẏ = q(x, y)`; coefficients
/// may contain parameter symbols.
#[derive(Clone, PartialEq, Eq)]
pub struct PlanarSystem {
    pub p: Poly,
    pub q: Poly,
}

impl PlanarSystem {
    pub fn new(p: Poly, q: Poly) -> Self {
        PlanarSystem { p, q }
    }

    pub fn parse(p: &str, q: &str) -> Result<Self, ParseError> {
        Ok(PlanarSystem::new(parse_expr(p)?, parse_expr(q)?))
    }

    /// The linear center `ẋ = y, ẏ = −x`.
    pub fn linear_center() -> Self {
        PlanarSystem::new(Poly::y(), -&Poly::x())
    }

    /// Parameter symbols occurring in either component.
    pub fn parameters(&self) -> BTreeSet<Var> {
        let mut s = self.p.parameters();
        s.extend(self.q.parameters());
        s
    }

    pub fn is_numeric(&self) -> bool {
        self.parameters().is_empty()
    }

    /// `p·∂f/∂x + q·∂f/∂y`.
    pub fn derivative_along(&self, f: &Poly) -> Poly {
        f.lie_derivative(&self.p, &self.q)
    }

    pub fn bind(&self, point: &BTreeMap<Var, Rational>) -> Self {
        PlanarSystem::new(self.p.bind(point), self.q.bind(point))
    }

    /// Checks that the linear part is exactly `(y, −x)` and there is no
    /// constant term.
    pub fn check_linear_center(&self) -> Result<(), LyapunovError> {
        let pc = self.p.xy_components();
        let qc = self.q.xy_components();
        if pc.contains_key(&0) || qc.contains_key(&0) {
            return Err(LyapunovError::NotLinearCenter(
                "constant term present".into(),
            ));
        }
        let p1 = pc.get(&1).cloned().unwrap_or_default();
        let q1 = qc.get(&1).cloned().unwrap_or_default();
        if p1 != Poly::y() || q1 != -&Poly::x() {
            return Err(LyapunovError::NotLinearCenter(format!(
                "linear part is ({p1}, {q1}), expected (y, -x)"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for PlanarSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x' = {}\ny' = {}", self.p, self.q)
    }
}

impl fmt::Debug for PlanarSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlanarSystem({}, {})", self.p, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LyapunovError {
    #[error("system does not have a linear center at the origin: {0}")]
    NotLinearCenter(String),
    #[error("requested {requested} constants, cap is {cap}")]
    CapExceeded { requested: usize, cap: usize },
    #[error("at least one constant must be requested")]
    ZeroRequested,
    #[error("singular stage matrix at degree {degree}: {source}")]
    SingularStage {
        degree: u32,
        #[source]
        source: LinearSolveError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of(r: &Rational) -> Option<Sign> {
        if r.is_positive() {
            Some(Sign::Positive)
        } else if r.is_negative() {
            Some(Sign::Negative)
        } else {
            None
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

/// Matrix of `L(f) = y·∂f/∂x − x·∂f/∂y` on homogeneous polynomials of degree
/// `k`, basis `x^k, x^{k−1}y, …, y^k`. Column `j` holds the image of
/// `x^{k−j} y^j`.
pub fn rotation_operator_matrix(k: u32) -> Vec<Vec<Rational>> {
    let n = k as usize + 1;
    let mut m = vec![vec![Rational::zero(); n]; n];
    for j in 0..n {
        // L(x^{k-j} y^j) = (k-j) x^{k-j-1} y^{j+1} - j x^{k-j+1} y^{j-1}
        if j + 1 < n {
            m[j + 1][j] = rat((k as usize - j) as i64);
        }
        if j > 0 {
            m[j - 1][j] = rat(-(j as i64));
        }
    }
    m
}

/// Matrix of the even stage: unknowns are the `n + 1` coefficients of
/// `f_n` followed by `D`; rows are the coefficients of
/// `L(f_n) − D·(xⁿ + yⁿ)` followed by the normalization row `coeff(yⁿ) = 0`.
pub fn even_stage_matrix(n: u32) -> Vec<Vec<Rational>> {
    let size = n as usize + 2;
    let l = rotation_operator_matrix(n);
    let mut m = vec![vec![Rational::zero(); size]; size];
    for (r, row) in l.iter().enumerate() {
        m[r][..row.len()].clone_from_slice(row);
    }
    m[0][size - 1] = rat(-1);
    m[n as usize][size - 1] = rat(-1);
    m[size - 1][n as usize] = Rational::one();
    m
}

/// Homogeneous components `f_k` of the comparison function together with
/// the raw constants `D₁, D₂, …`.
#[derive(Debug, Clone)]
pub struct ComparisonState {
    pub f_components: BTreeMap<u32, Poly>,
    pub constants: Vec<Poly>,
}

impl ComparisonState {
    /// Degree-`k` component of `Ḟ` with the current `f` components.
    pub fn derivative_component(&self, sys: &PlanarSystem, k: u32) -> Poly {
        let pc = sys.p.xy_components();
        let qc = sys.q.xy_components();
        derivative_component(&self.f_components, &pc, &qc, k, k)
    }
}

fn homogeneous_from_coeffs(k: u32, coeffs: &[Poly]) -> Poly {
    let mut out = Poly::zero();
    for (j, c) in coeffs.iter().enumerate() {
        let m = Monomial::xy(k - j as u32, j as u32);
        out = &out + &(c * &Poly::term(Rational::one(), m));
    }
    out
}

fn coeffs_of_homogeneous(k: u32, p: &Poly) -> Vec<Poly> {
    (0..=k).map(|j| p.coeff_xy(k - j, j)).collect()
}

// Degree-k part of Ḟ using f_i for 2 <= i <= upto.
fn derivative_component(
    f: &BTreeMap<u32, Poly>,
    pc: &BTreeMap<u32, Poly>,
    qc: &BTreeMap<u32, Poly>,
    k: u32,
    upto: u32,
) -> Poly {
    let mut acc = Poly::zero();
    for i in 2..=upto.min(k) {
        let Some(fi) = f.get(&i) else { continue };
        let d = k + 1 - i;
        if let Some(pd) = pc.get(&d) {
            acc = &acc + &(&fi.dx() * pd);
        }
        if let Some(qd) = qc.get(&d) {
            acc = &acc + &(&fi.dy() * qd);
        }
    }
    acc
}

/// Runs the comparison-function construction up to `m` constants.
pub fn comparison_function(sys: &PlanarSystem, m: usize, cap: usize) -> Result<ComparisonState, LyapunovError> {
    if m == 0 {
        return Err(LyapunovError::ZeroRequested);
    }
    if m > cap {
        return Err(LyapunovError::CapExceeded { requested: m, cap });
    }
    sys.check_linear_center()?;
    let pc = sys.p.xy_components();
    let qc = sys.q.xy_components();

    let mut f: BTreeMap<u32, Poly> = BTreeMap::new();
    f.insert(2, parse_expr("1/2*x^2 + 1/2*y^2").expect("literal"));
    let mut constants = Vec::with_capacity(m);

    for stage in 0..m {
        let k = 2 * stage as u32 + 3;

        // odd stage: L(f_k) = -known_k
        let known = derivative_component(&f, &pc, &qc, k, k - 1);
        let rhs: Vec<Poly> = coeffs_of_homogeneous(k, &known).iter().map(|c| -c).collect();
        let sol = solve_linear_exact(&rotation_operator_matrix(k), &rhs)
            .map_err(|source| LyapunovError::SingularStage { degree: k, source })?;
        f.insert(k, homogeneous_from_coeffs(k, &sol));

        // even stage: L(f_n) - D (x^n + y^n) = -known_n, coeff(y^n, f_n) = 0
        let n = k + 1;
        let known = derivative_component(&f, &pc, &qc, n, n - 1);
        let mut rhs: Vec<Poly> = coeffs_of_homogeneous(n, &known).iter().map(|c| -c).collect();
        rhs.push(Poly::zero());
        let sol = solve_linear_exact(&even_stage_matrix(n), &rhs)
            .map_err(|source| LyapunovError::SingularStage { degree: n, source })?;
        let (coeffs, d) = sol.split_at(n as usize + 1);
        f.insert(n, homogeneous_from_coeffs(n, coeffs));
        constants.push(d[0].clone());
    }
    Ok(ComparisonState {
        f_components: f,
        constants,
    })
}

/// Result of [`pl_constants`].
#[derive(Debug, Clone)]
pub struct LyapunovReport {
    /// Integer-primitive constants (divided by their positive content).
    pub constants: Vec<Poly>,
    /// Constants as produced by the construction.
    pub raw_constants: Vec<Poly>,
    /// 1-based index of the first constant that is not identically zero.
    pub first_nonzero_index: Option<usize>,
    /// Sign of that constant when it is a number.
    pub sign: Option<Sign>,
}

impl LyapunovReport {
    fn from_raw(raw: Vec<Poly>) -> Self {
        let constants: Vec<Poly> = raw.iter().map(Poly::primitive).collect();
        let first = constants.iter().position(|c| !c.is_zero());
        let sign = first
            .and_then(|i| constants[i].as_constant())
            .and_then(|r| Sign::of(&r));
        LyapunovReport {
            constants,
            raw_constants: raw,
            first_nonzero_index: first.map(|i| i + 1),
            sign,
        }
    }
}

/// Poincaré–Lyapunov constants `D₁ … D_m` with the default cap.
pub fn pl_constants(sys: &PlanarSystem, m: usize) -> Result<LyapunovReport, LyapunovError> {
    pl_constants_capped(sys, m, DEFAULT_CAP)
}

pub fn pl_constants_capped(sys: &PlanarSystem, m: usize, cap: usize) -> Result<LyapunovReport, LyapunovError> {
    let state = comparison_function(sys, m, cap)?;
    Ok(LyapunovReport::from_raw(state.constants))
}

/// First constant with a nonzero value at `bindings`, with its sign.
pub fn first_nonzero(
    report: &LyapunovReport,
    bindings: &BTreeMap<Var, Rational>,
) -> Result<Option<(usize, Sign)>, LyapunovError> {
    for (i, c) in report.constants.iter().enumerate() {
        let v = c.eval_rational(bindings)?;
        if let Some(s) = Sign::of(&v) {
            return Ok(Some((i + 1, s)));
        }
    }
    Ok(None)
}
