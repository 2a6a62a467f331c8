use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// A named polynomial variable.
///
/// Variables are ordered `x < y < a < b < … < h`, followed by every other
/// name in lexicographic order. That order fixes the monomial order and
/// therefore the printed form of every polynomial.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Var {
    rank: u8,
    name: Arc<str>,
}

const FIXED: [&str; 10] = ["x", "y", "a", "b", "c", "d", "e", "f", "g", "h"];

impl Var {
    pub fn new(name: &str) -> Self {
        let rank = FIXED
            .iter()
            .position(|&n| n == name)
            .map(|i| i as u8)
            .unwrap_or(FIXED.len() as u8);
        Var {
            rank,
            name: Arc::from(name),
        }
    }

    pub fn x() -> Self {
        Var::new("x")
    }

    pub fn y() -> Self {
        Var::new("y")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True for the phase-space coordinates `x` and `y`.
    pub fn is_coordinate(&self) -> bool {
        self.rank < 2
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then_with(|| self.name.cmp(&other.name))
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_order_then_alphabetical() {
        let mut vs: Vec<Var> = ["s", "h", "a", "y", "beta", "x", "c"]
            .iter()
            .map(|s| Var::new(s))
            .collect();
        vs.sort();
        let names: Vec<&str> = vs.iter().map(|v| v.name()).collect();
        assert_eq!(names, ["x", "y", "a", "c", "h", "beta", "s"]);
    }
}
