use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;

use super::{EvalError, Poly, Rational, Var};

/// Quotient of two polynomials. No cancellation is attempted; equality
/// questions are answered through [`RationalFunction::is_zero`] on a
/// difference.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    /// `None` when the denominator is the zero polynomial.
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(RationalFunction { num, den }.normalized())
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalFunction {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        RationalFunction::from_poly(Poly::constant(c))
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Returns the polynomial when the denominator divides the numerator.
    pub fn as_poly(&self) -> Option<Poly> {
        self.num.div_exact(&self.den)
    }

    // Constant denominators are folded into the numerator and exact
    // polynomial quotients are taken when available.
    fn normalized(self) -> Self {
        if let Some(c) = self.den.as_constant() {
            return RationalFunction {
                num: self.num.scale(&c.recip()),
                den: Poly::one(),
            };
        }
        if let Some(q) = self.num.div_exact(&self.den) {
            return RationalFunction::from_poly(q);
        }
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return RationalFunction {
                num: &self.num + &other.num,
                den: self.den.clone(),
            }
            .normalized();
        }
        RationalFunction {
            num: &(&self.num * &other.den) + &(&other.num * &self.den),
            den: &self.den * &other.den,
        }
        .normalized()
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        RationalFunction {
            num: &self.num * &other.num,
            den: &self.den * &other.den,
        }
        .normalized()
    }

    pub fn mul_poly(&self, p: &Poly) -> Self {
        RationalFunction {
            num: &self.num * p,
            den: self.den.clone(),
        }
        .normalized()
    }

    /// `None` when dividing by zero.
    pub fn div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        Some(
            RationalFunction {
                num: &self.num * &other.den,
                den: &self.den * &other.num,
            }
            .normalized(),
        )
    }

    pub fn recip(&self) -> Option<Self> {
        RationalFunction::from_poly(Poly::one()).div(self)
    }

    /// Directional derivative along `(p, q)`, by the quotient rule.
    pub fn lie_derivative(&self, p: &Poly, q: &Poly) -> Self {
        let n = self.num.lie_derivative(p, q);
        let d = self.den.lie_derivative(p, q);
        RationalFunction {
            num: &(&n * &self.den) - &(&self.num * &d),
            den: &self.den * &self.den,
        }
        .normalized()
    }

    pub fn eval_rational(&self, point: &BTreeMap<Var, Rational>) -> Result<Rational, EvalError> {
        let d = self.den.eval_rational(point)?;
        if d.is_zero() {
            return Err(EvalError::Pole);
        }
        Ok(self.num.eval_rational(point)? / d)
    }

    pub fn eval_f64(&self, point: &BTreeMap<Var, f64>) -> Result<f64, EvalError> {
        let d = self.den.eval_f64(point)?;
        if d == 0.0 {
            return Err(EvalError::Pole);
        }
        Ok(self.num.eval_f64(point)? / d)
    }

    pub fn substitute(&self, bindings: &HashMap<Var, Poly>) -> Option<Self> {
        RationalFunction::new(self.num.substitute(bindings), self.den.substitute(bindings))
    }
}

/// Substitutes rational functions for variables in a polynomial.
///
/// With `v ↦ n_v / d_v` and `D_v` the degree of `p` in `v`, the result is
/// `Σ c · Π n_v^{e_v} d_v^{D_v − e_v}` over the single common denominator
/// `Π d_v^{D_v}`; no denominators are multiplied term by term.
pub fn substitute_rational(p: &Poly, bindings: &BTreeMap<Var, RationalFunction>) -> RationalFunction {
    let degs: BTreeMap<&Var, u32> = bindings.keys().map(|v| (v, p.degree_in(v))).collect();
    let mut num_pows: HashMap<(&Var, u32), Poly> = HashMap::new();
    let mut den_pows: HashMap<(&Var, u32), Poly> = HashMap::new();
    let mut num = Poly::zero();
    for (m, c) in p.terms() {
        let mut kept = Vec::new();
        let mut factor = Poly::constant(c.clone());
        let mut used: Vec<&Var> = Vec::new();
        for (v, e) in m.powers() {
            match bindings.get_key_value(v) {
                Some((key, rf)) => {
                    used.push(key);
                    let np = num_pows
                        .entry((key, *e))
                        .or_insert_with(|| rf.numerator().pow(*e));
                    factor = &factor * np;
                    let k = degs[key] - e;
                    let dp = den_pows
                        .entry((key, k))
                        .or_insert_with(|| rf.denominator().pow(k));
                    factor = &factor * dp;
                }
                None => kept.push((v.clone(), *e)),
            }
        }
        for (key, rf) in bindings.iter() {
            if !used.contains(&key) {
                let k = degs[key];
                let dp = den_pows
                    .entry((key, k))
                    .or_insert_with(|| rf.denominator().pow(k));
                factor = &factor * dp;
            }
        }
        let kept = super::Monomial::from_pairs(kept);
        num = &num + &factor.mul_monomial(&Rational::from_integer(1.into()), &kept);
    }
    let den = bindings
        .iter()
        .fold(Poly::one(), |acc, (v, rf)| &acc * &rf.denominator().pow(degs[v]));
    RationalFunction { num, den }.normalized()
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalFunction({self})")
    }
}

impl From<Poly> for RationalFunction {
    fn from(p: Poly) -> Self {
        RationalFunction::from_poly(p)
    }
}

impl Zero for RationalFunction {
    fn zero() -> Self {
        RationalFunction::from_poly(Poly::zero())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl std::ops::Add for RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: Self) -> Self {
        RationalFunction::add(&self, &rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::{parse_expr, rat};

    fn p(s: &str) -> Poly {
        parse_expr(s).unwrap()
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(RationalFunction::new(p("x"), Poly::zero()).is_none());
    }

    #[test]
    fn arithmetic() {
        let a = RationalFunction::new(p("1"), p("a")).unwrap();
        let b = RationalFunction::new(p("b"), p("a^2")).unwrap();
        let s = a.add(&b);
        let mut pt = BTreeMap::new();
        pt.insert(Var::new("a"), rat(2));
        pt.insert(Var::new("b"), rat(3));
        assert_eq!(s.eval_rational(&pt).unwrap(), Rational::new(5.into(), 4.into()));
        assert!(s.sub(&s).is_zero());
        let q = RationalFunction::new(p("x^2 - y^2"), p("x - y")).unwrap();
        assert_eq!(q.as_poly(), Some(p("x + y")));
    }

    #[test]
    fn rational_substitution_common_denominator() {
        let mut b = BTreeMap::new();
        b.insert(Var::new("g"), RationalFunction::new(p("b"), p("2*a")).unwrap());
        let r = substitute_rational(&p("2*a*g - b + g^2"), &b);
        // 2a·b/(2a) − b + b²/(4a²) = b²/(4a²)
        let expect = RationalFunction::new(p("b^2"), p("4*a^2")).unwrap();
        assert!(r.sub(&expect).is_zero());
    }

    #[test]
    fn quotient_rule() {
        // d/dt of x/y along (1, 0) is 1/y
        let h = RationalFunction::new(p("x"), p("y")).unwrap();
        let d = h.lie_derivative(&p("1"), &p("0"));
        assert!(d.sub(&RationalFunction::new(p("1"), p("y")).unwrap()).is_zero());
    }
}
