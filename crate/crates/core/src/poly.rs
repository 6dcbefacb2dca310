//! Polynomials with exact coefficients in the active field.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::monomial::{BiDegree, ModularDegree, Monomial};
use crate::setting::Setting;

/// A finite map from monomials to nonzero scalars.
#[derive(Clone, Debug)]
pub struct Polynomial<F: Field> {
    terms: BTreeMap<Monomial, F::Elem>,
}

impl<F: Field> Polynomial<F> {
    pub fn zero() -> Self {
        Polynomial {
            terms: BTreeMap::new(),
        }
    }

    pub fn from_monomial(field: &F, m: Monomial) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(field, m, field.one());
        p
    }

    pub fn add_term(&mut self, field: &F, m: Monomial, c: F::Elem) {
        if field.is_zero(&c) {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let next = field.add(&old, &c);
                if !field.is_zero(&next) {
                    self.terms.insert(m, next);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &F::Elem)> {
        self.terms.iter()
    }

    pub fn scaled(&self, field: &F, c: &F::Elem) -> Self {
        let mut out = Polynomial::zero();
        for (m, a) in &self.terms {
            out.add_term(field, m.clone(), field.mul(a, c));
        }
        out
    }

    pub fn plus(&self, field: &F, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, a) in &other.terms {
            out.add_term(field, m.clone(), a.clone());
        }
        out
    }

    pub fn minus(&self, field: &F, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, a) in &other.terms {
            out.add_term(field, m.clone(), field.neg(a));
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.mul(m), c.clone()))
                .collect(),
        }
    }

    /// The common bidegree of all terms.
    pub fn bidegree(&self) -> Result<BiDegree> {
        let mut it = self.terms.keys();
        let first = it.next().ok_or(Error::NotHomogeneous)?.bidegree();
        for m in it {
            if m.bidegree() != first {
                return Err(Error::NotHomogeneous);
            }
        }
        Ok(first)
    }

    /// The common modular degree of all terms.
    pub fn modular_degree(&self, d: (u32, u32)) -> Result<ModularDegree> {
        let mut it = self.terms.keys();
        let first = it
            .next()
            .ok_or(Error::NotModularHomogeneous)?
            .modular_degree(d);
        for m in it {
            if m.modular_degree(d) != first {
                return Err(Error::NotModularHomogeneous);
            }
        }
        Ok(first)
    }

    /// Drop every term involving a variable absent from `small`, and
    /// reinterpret the rest there.
    pub fn restricted(&self, small: &Setting) -> Polynomial<F> {
        Polynomial {
            terms: self
                .terms
                .iter()
                .filter_map(|(m, c)| m.restricted(small).map(|m| (m, c.clone())))
                .collect(),
        }
    }
}

impl<F: Field> PartialEq for Polynomial<F> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    #[test]
    fn cancellation() {
        let f = PrimeField::new(101);
        let s = Setting::new((1, 1), (1, 1), (0, 0), 101).unwrap();
        let m = Monomial::parse("x0*y0", &s).unwrap();
        let mut p = Polynomial::from_monomial(&f, m.clone());
        p.add_term(&f, m, f.from_i64(-1));
        assert!(p.is_zero());
        assert!(p.bidegree().is_err());
    }

    #[test]
    fn homogeneity_checks() {
        let f = PrimeField::new(101);
        let s = Setting::new((1, 1), (2, 2), (0, 0), 101).unwrap();
        let mut p = Polynomial::from_monomial(&f, Monomial::parse("x0^2*y0^2", &s).unwrap());
        p.add_term(&f, Monomial::parse("x1^2*y1^2", &s).unwrap(), f.one());
        assert_eq!(p.bidegree().unwrap(), BiDegree::new(2, 2));
        assert!(p.modular_degree(s.d).unwrap().is_zero());
        p.add_term(&f, Monomial::parse("x0*x1*y0^2", &s).unwrap(), f.one());
        assert!(p.modular_degree(s.d).is_err());
    }
}
