use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{EvalError, Monomial, Rational, Var};

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Terms are kept in a map ordered by the graded lexicographic monomial
/// order, so the leading term is the last entry. Zero coefficients are never
/// stored, which makes structural equality coincide with polynomial equality.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(Rational::from_integer(BigInt::from(n)))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn var(name: &str) -> Self {
        Poly::term(Rational::one(), Monomial::var(Var::new(name)))
    }

    pub fn x() -> Self {
        Poly::var("x")
    }

    pub fn y() -> Self {
        Poly::var("y")
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(it: I) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The value of a constant polynomial.
    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    /// Ordered set of variables that actually occur.
    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.vars().cloned())
            .collect()
    }

    /// Variables other than `x` and `y`.
    pub fn parameters(&self) -> BTreeSet<Var> {
        self.vars()
            .into_iter()
            .filter(|v| !v.is_coordinate())
            .collect()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, c: &Rational, mono: &Monomial) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.mul(mono), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative.
    pub fn differentiate(&self, v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if let Some((e, rest)) = m.derive(v) {
                out.add_term(rest, c * Rational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    pub fn dx(&self) -> Poly {
        self.differentiate(&Var::x())
    }

    pub fn dy(&self) -> Poly {
        self.differentiate(&Var::y())
    }

    /// Simultaneous substitution of polynomials for variables, fully expanded.
    pub fn substitute(&self, bindings: &HashMap<Var, Poly>) -> Poly {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut cache: HashMap<(Var, u32), Poly> = HashMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut factor = Poly::constant(c.clone());
            for (v, e) in m.powers() {
                match bindings.get(v) {
                    Some(b) => {
                        let pw = cache
                            .entry((v.clone(), *e))
                            .or_insert_with(|| b.pow(*e))
                            .clone();
                        factor = &factor * &pw;
                    }
                    None => kept.push((v.clone(), *e)),
                }
            }
            let kept = Monomial::from_pairs(kept);
            for (fm, fc) in factor.terms {
                out.add_term(fm.mul(&kept), fc);
            }
        }
        out
    }

    /// Substitutes a single variable.
    pub fn subst(&self, v: &str, value: &Poly) -> Poly {
        let mut b = HashMap::new();
        b.insert(Var::new(v), value.clone());
        self.substitute(&b)
    }

    /// Exact evaluation; every variable of `self` must be bound.
    pub fn eval_rational(&self, point: &BTreeMap<Var, Rational>) -> Result<Rational, EvalError> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.powers() {
                let val = point
                    .get(v)
                    .ok_or_else(|| EvalError::Unbound(v.name().to_string()))?;
                t *= num_traits::pow(val.clone(), *e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Floating-point evaluation; every variable must be bound.
    pub fn eval_f64(&self, point: &BTreeMap<Var, f64>) -> Result<f64, EvalError> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (v, e) in m.powers() {
                let val = point
                    .get(v)
                    .ok_or_else(|| EvalError::Unbound(v.name().to_string()))?;
                t *= val.powi(*e as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Partial evaluation at rational values; unbound variables stay symbolic.
    pub fn bind(&self, point: &BTreeMap<Var, Rational>) -> Poly {
        let b: HashMap<Var, Poly> = point
            .iter()
            .map(|(v, r)| (v.clone(), Poly::constant(r.clone())))
            .collect();
        self.substitute(&b)
    }

    /// Splits into homogeneous components with respect to `vars`; every other
    /// variable counts as degree zero.
    pub fn homogeneous_components(&self, vars: &[Var]) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let d: u32 = vars.iter().map(|v| m.exponent(v)).sum();
            out.entry(d).or_default().add_term(m.clone(), c.clone());
        }
        out
    }

    /// Components homogeneous in `x, y`.
    pub fn xy_components(&self) -> BTreeMap<u32, Poly> {
        self.homogeneous_components(&[Var::x(), Var::y()])
    }

    /// Groups terms by their `x, y` monomial; values are polynomials in the
    /// remaining variables.
    pub fn coefficients_in_xy(&self) -> BTreeMap<Monomial, Poly> {
        self.coefficients_in(|v| v.is_coordinate())
    }

    /// Groups terms by the monomial in the variables selected by `keep`.
    pub fn coefficients_in(&self, keep: impl Fn(&Var) -> bool) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (key, rest) = m.split(&keep);
            out.entry(key).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Coefficient polynomial of `x^i y^j`.
    pub fn coeff_xy(&self, i: u32, j: u32) -> Poly {
        let target = Monomial::xy(i, j);
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (key, rest) = m.split(|v| v.is_coordinate());
            if key == target {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Positive rational `c` such that `self / c` has coprime integer
    /// coefficients. Zero for the zero polynomial.
    pub fn content(&self) -> Rational {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        if num_gcd.is_zero() {
            return Rational::zero();
        }
        Rational::new(num_gcd, den_lcm)
    }

    /// Integer-primitive form obtained by dividing by the positive content.
    /// The sign of every coefficient is preserved.
    pub fn primitive(&self) -> Poly {
        let c = self.content();
        if c.is_zero() {
            return Poly::zero();
        }
        self.scale(&c.recip())
    }

    /// Returns `Some(λ)` with `λ > 0` if `self = λ·other`.
    pub fn positive_multiple_of(&self, other: &Poly) -> Option<Rational> {
        let (m, c) = other.leading_term()?;
        let lambda = self.coefficient(m) / c;
        if !lambda.is_positive() {
            return None;
        }
        (self == &other.scale(&lambda)).then_some(lambda)
    }

    /// Exact division. `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        let (lm, lc) = divisor.leading_term()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading_term() {
            let qm = rm.div(&lm)?;
            let qc = rc / &lc;
            rem = &rem - &divisor.mul_monomial(&qc, &qm);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Pseudo-remainder of `self` by `divisor` viewed as univariate
    /// polynomials in `v`: `lc(divisor)^k · self ≡ r (mod divisor)` with
    /// `deg_v r < deg_v divisor`.
    pub fn pseudo_remainder(&self, divisor: &Poly, v: &Var) -> Poly {
        let n = divisor.degree_in(v);
        let lead = divisor.coeff_of_power(v, n);
        let mut r = self.clone();
        loop {
            let d = r.degree_in(v);
            if r.is_zero() || d < n {
                return r;
            }
            let rc = r.coeff_of_power(v, d);
            let shift = Poly::term(Rational::one(), Monomial::power(v.clone(), d - n));
            r = &(&r * &lead) - &(&(&rc * &shift) * divisor);
        }
    }

    /// Coefficient of `v^k` as a polynomial in the other variables.
    pub fn coeff_of_power(&self, v: &Var, k: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if m.exponent(v) == k {
                let (_, rest) = m.split(|w| w == v);
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Directional derivative `p·∂f/∂x + q·∂f/∂y`.
    pub fn lie_derivative(&self, p: &Poly, q: &Poly) -> Poly {
        &(p * &self.dx()) + &(q * &self.dy())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite double.
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = c.abs();
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (mut big, small) = if self.terms.len() >= rhs.terms.len() {
            (self.clone(), rhs)
        } else {
            (rhs.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl std::iter::Sum for Poly {
    fn sum<I: Iterator<Item = Poly>>(iter: I) -> Poly {
        iter.fold(Poly::zero(), |acc, p| &acc + &p)
    }
}

impl std::str::FromStr for Poly {
    type Err = super::ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        super::parse_expr(s)
    }
}
