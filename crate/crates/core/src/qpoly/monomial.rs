use std::cmp::Ordering;
use std::fmt;

use super::Var;

/// A power product of variables, stored sparsely as `(variable, exponent)`
/// pairs sorted by variable. Zero exponents are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    powers: Vec<(Var, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { powers: Vec::new() }
    }

    pub fn var(v: Var) -> Self {
        Monomial::power(v, 1)
    }

    pub fn power(v: Var, e: u32) -> Self {
        if e == 0 {
            return Monomial::one();
        }
        Monomial {
            powers: vec![(v, e)],
        }
    }

    /// Builds a monomial from arbitrary pairs; repeated variables are merged
    /// and zero exponents dropped.
    pub fn from_pairs<I: IntoIterator<Item = (Var, u32)>>(pairs: I) -> Self {
        let mut powers: Vec<(Var, u32)> = pairs.into_iter().filter(|(_, e)| *e > 0).collect();
        powers.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Var, u32)> = Vec::with_capacity(powers.len());
        for (v, e) in powers {
            match merged.last_mut() {
                Some((last, le)) if *last == v => *le += e,
                _ => merged.push((v, e)),
            }
        }
        Monomial { powers: merged }
    }

    /// `x^i y^j`.
    pub fn xy(i: u32, j: u32) -> Self {
        Monomial::from_pairs([(Var::x(), i), (Var::y(), j)])
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: &Var) -> u32 {
        self.powers
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn powers(&self) -> &[(Var, u32)] {
        &self.powers
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.powers.iter().map(|(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.powers, &other.powers);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial { powers: out }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.powers.iter().all(|(v, e)| other.exponent(v) >= *e)
    }

    /// `self / other`, or `None` when `other` does not divide `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if !other.divides(self) {
            return None;
        }
        let powers = self
            .powers
            .iter()
            .filter_map(|(v, e)| {
                let r = e - other.exponent(v);
                (r > 0).then(|| (v.clone(), r))
            })
            .collect();
        Some(Monomial { powers })
    }

    /// Splits into the part in `keep` variables and the rest.
    pub fn split(&self, keep: impl Fn(&Var) -> bool) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.powers.iter().cloned().partition(|(v, _)| keep(v));
        (Monomial { powers: a }, Monomial { powers: b })
    }

    /// Removes one power of `v`, returning the old exponent.
    pub(crate) fn derive(&self, v: &Var) -> Option<(u32, Monomial)> {
        let e = self.exponent(v);
        if e == 0 {
            return None;
        }
        let powers = self
            .powers
            .iter()
            .filter_map(|(w, k)| {
                if w == v {
                    (k - 1 > 0).then(|| (w.clone(), k - 1))
                } else {
                    Some((w.clone(), *k))
                }
            })
            .collect();
        Some((e, Monomial { powers }))
    }
}

/// Graded lexicographic order: total degree first, then the exponent vector
/// compared lexicographically in variable order (a larger exponent on an
/// earlier variable is larger).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let by_degree = self.degree().cmp(&other.degree());
        if by_degree != Ordering::Equal {
            return by_degree;
        }
        let (a, b) = (&self.powers, &other.powers);
        for k in 0..a.len().min(b.len()) {
            match a[k].0.cmp(&b[k].0) {
                // self carries a positive exponent on an earlier variable
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match a[k].1.cmp(&b[k].1) {
                    Ordering::Equal => {}
                    o => return o,
                },
            }
        }
        a.len().cmp(&b.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.powers.is_empty() {
            return f.write_str("1");
        }
        // parameters first, then x and y: "a*x^3"
        let ordered = self
            .powers
            .iter()
            .filter(|(v, _)| !v.is_coordinate())
            .chain(self.powers.iter().filter(|(v, _)| v.is_coordinate()));
        for (i, (v, e)) in ordered.enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
