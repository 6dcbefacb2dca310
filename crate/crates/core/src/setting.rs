//! Ambient data for the bigraded ring of `P^{n1} x P^{n2}`.

use serde::{Deserialize, Serialize};

use crate::comb::binomial;
use crate::error::{Error, Result};

/// Dimensions, embedding bidegree, twist and field characteristic.
///
/// Fixes every grading used by the toolkit: `n = (n1, n2)` are the factor
/// dimensions, `d = (d1, d2)` the embedding bidegree, `b = (b1, b2)` the
/// twist of the section module, and `characteristic` the prime field (0
/// selects exact rationals).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Setting {
    pub n: (usize, usize),
    pub d: (u32, u32),
    pub b: (i64, i64),
    pub characteristic: u64,
}

impl Setting {
    /// A validated setting with `n1, n2 >= 1`.
    pub fn new(n: (usize, usize), d: (u32, u32), b: (i64, i64), characteristic: u64) -> Result<Self> {
        if n.0 < 1 || n.1 < 1 {
            return Err(Error::InvalidSetting(format!(
                "factor dimensions must be >= 1, got ({}, {})",
                n.0, n.1
            )));
        }
        Self::with_possibly_zero_factor(n, d, b, characteristic)
    }

    /// Like [`Setting::new`] but allows `n1 = 0` or `n2 = 0`.
    ///
    /// Such settings arise as restriction targets (all variables of one
    /// factor above index 0 set to zero) and are valid for every internal
    /// computation; they are rejected at the CLI boundary.
    pub fn with_possibly_zero_factor(
        n: (usize, usize),
        d: (u32, u32),
        b: (i64, i64),
        characteristic: u64,
    ) -> Result<Self> {
        if d.0 < 1 || d.1 < 1 {
            return Err(Error::InvalidSetting(format!(
                "embedding bidegree must be >= 1, got ({}, {})",
                d.0, d.1
            )));
        }
        if characteristic != 0 && !is_prime(characteristic) {
            return Err(Error::InvalidSetting(format!(
                "characteristic must be 0 or a prime, got {characteristic}"
            )));
        }
        if characteristic >= (1 << 31) {
            return Err(Error::InvalidSetting(
                "characteristic must fit in 31 bits".into(),
            ));
        }
        Ok(Setting {
            n,
            d,
            b,
            characteristic,
        })
    }

    /// Number of x-variables, `n1 + 1`.
    pub fn xvars(&self) -> usize {
        self.n.0 + 1
    }

    /// Number of y-variables, `n2 + 1`.
    pub fn yvars(&self) -> usize {
        self.n.1 + 1
    }

    /// `|n| = n1 + n2`.
    pub fn total_dim(&self) -> usize {
        self.n.0 + self.n.1
    }

    /// Dimension of the target projective space:
    /// `C(d1+n1, n1) * C(d2+n2, n2) - 1`.
    pub fn r(&self) -> u64 {
        binomial(self.d.0 as u64 + self.n.0 as u64, self.n.0 as u64)
            .checked_mul(binomial(self.d.1 as u64 + self.n.1 as u64, self.n.1 as u64))
            .expect("r overflow")
            - 1
    }

    /// Whether the section module for this twist is Cohen-Macaulay:
    /// `(d1/d2) b2 - b1 < n1 + 1` and `(d2/d1) b1 - b2 < n2 + 1`,
    /// evaluated exactly by cross-multiplication.
    pub fn is_cohen_macaulay(&self) -> bool {
        let (d1, d2) = (self.d.0 as i128, self.d.1 as i128);
        let (b1, b2) = (self.b.0 as i128, self.b.1 as i128);
        let (n1, n2) = (self.n.0 as i128, self.n.1 as i128);
        d1 * b2 - d2 * b1 < d2 * (n1 + 1) && d2 * b1 - d1 * b2 < d1 * (n2 + 1)
    }

    /// Whether the regularity inequalities hold, forcing the Betti table to
    /// vanish in weights above `|n|`.
    pub fn regularity_vanishing(&self) -> bool {
        let (d1, d2) = (self.d.0 as i128, self.d.1 as i128);
        let (b1, b2) = (self.b.0 as i128, self.b.1 as i128);
        let (n1, n2) = (self.n.0 as i128, self.n.1 as i128);
        let first = d1 + b1 * n2 > -n1 - 1 || d2 + b2 * n2 < 0;
        let second = d1 + b1 * n1 < 0 || d2 + b2 * n1 > -n2 - 1;
        first && second
    }

    /// The sibling setting with `d = (1, 1)` and no twist, used by the
    /// modular-degree membership reduction.
    pub fn unit_degree(&self) -> Setting {
        Setting {
            n: self.n,
            d: (1, 1),
            b: (0, 0),
            characteristic: self.characteristic,
        }
    }

    /// The setting obtained by discarding the last `i` x-variables and the
    /// last `j` y-variables.
    pub fn restricted(&self, i: usize, j: usize) -> Result<Setting> {
        if i > self.n.0 || j > self.n.1 {
            return Err(Error::OutOfRange(format!(
                "cannot restrict ({}, {}) by ({i}, {j})",
                self.n.0, self.n.1
            )));
        }
        Ok(Setting {
            n: (self.n.0 - i, self.n.1 - j),
            ..self.clone()
        })
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut f = 3;
    while f * f <= p {
        if p % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: (usize, usize), d: (u32, u32)) -> Setting {
        Setting::new(n, d, (0, 0), 32003).unwrap()
    }

    #[test]
    fn r_values() {
        assert_eq!(s((1, 1), (2, 2)).r(), 8);
        assert_eq!(s((1, 1), (1, 1)).r(), 3);
        assert_eq!(s((2, 4), (1, 1)).r(), 14);
    }

    #[test]
    fn validation() {
        assert!(Setting::new((0, 1), (1, 1), (0, 0), 32003).is_err());
        assert!(Setting::new((1, 1), (0, 2), (0, 0), 32003).is_err());
        assert!(Setting::new((1, 1), (1, 1), (0, 0), 32004).is_err());
        assert!(Setting::new((1, 1), (1, 1), (0, 0), 0).is_ok());
        assert!(Setting::with_possibly_zero_factor((1, 0), (3, 3), (0, 0), 32003).is_ok());
    }

    #[test]
    fn cohen_macaulay_criterion() {
        // Untwisted modules are always Cohen-Macaulay.
        assert!(s((1, 1), (5, 2)).is_cohen_macaulay());
        // A twist violating the first inequality.
        let t = Setting::new((1, 1), (4, 1), (0, 3), 32003).unwrap();
        assert!(!t.is_cohen_macaulay());
    }

    #[test]
    fn regularity_for_zero_twist() {
        assert!(s((2, 3), (1, 4)).regularity_vanishing());
    }
}
