//! Monomials of the bigraded ring and their three gradings.
//!
//! A monomial `x^v y^w` carries the bidegree `(|v|, |w|)`, the index-weighted
//! degree `sum d2*i*v_i + sum d1*j*w_j`, and the modular degree
//! `(v mod d1, w mod d2)`. The form ideal studied here is homogeneous for all
//! three, which is what makes its graded pieces block-decompose.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::comb::binomial;
use crate::error::{Error, Result};
use crate::setting::Setting;

/// A pair of non-negative component degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BiDegree {
    pub a1: u32,
    pub a2: u32,
}

impl BiDegree {
    pub fn new(a1: u32, a2: u32) -> Self {
        BiDegree { a1, a2 }
    }

    pub const ZERO: BiDegree = BiDegree { a1: 0, a2: 0 };

    pub fn plus(self, other: BiDegree) -> BiDegree {
        BiDegree::new(self.a1 + other.a1, self.a2 + other.a2)
    }

    /// Componentwise difference, or `None` if any component would go
    /// negative.
    pub fn checked_sub(self, other: BiDegree) -> Option<BiDegree> {
        Some(BiDegree::new(
            self.a1.checked_sub(other.a1)?,
            self.a2.checked_sub(other.a2)?,
        ))
    }

    /// `q*d + b`, or `None` if a component is negative.
    pub fn graded_piece(q: i64, d: (u32, u32), b: (i64, i64)) -> Option<BiDegree> {
        let a1 = q * d.0 as i64 + b.0;
        let a2 = q * d.1 as i64 + b.1;
        if a1 < 0 || a2 < 0 {
            return None;
        }
        Some(BiDegree::new(a1 as u32, a2 as u32))
    }
}

impl fmt::Display for BiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a1, self.a2)
    }
}

/// Exponent residues modulo `(d1, d2)`; additive under multiplication.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModularDegree {
    pub xres: Vec<u32>,
    pub yres: Vec<u32>,
}

impl ModularDegree {
    pub fn is_zero(&self) -> bool {
        self.xres.iter().all(|&r| r == 0) && self.yres.iter().all(|&r| r == 0)
    }
}

/// A monomial `x^v y^w`, stored as its two exponent sequences.
///
/// Value object: equality and hashing are by content. The derived `Ord` is
/// structural and only used for deterministic map iteration; the canonical
/// enumeration order is [`Monomial::canonical_cmp`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub xexp: Vec<u32>,
    pub yexp: Vec<u32>,
}

impl Monomial {
    pub fn new(xexp: Vec<u32>, yexp: Vec<u32>) -> Self {
        Monomial { xexp, yexp }
    }

    /// The empty monomial `1` for the given variable counts.
    pub fn one(setting: &Setting) -> Self {
        Monomial::new(vec![0; setting.xvars()], vec![0; setting.yvars()])
    }

    /// `x_i` as a monomial.
    pub fn xvar(setting: &Setting, i: usize) -> Self {
        let mut m = Monomial::one(setting);
        m.xexp[i] = 1;
        m
    }

    /// `y_j` as a monomial.
    pub fn yvar(setting: &Setting, j: usize) -> Self {
        let mut m = Monomial::one(setting);
        m.yexp[j] = 1;
        m
    }

    pub fn fits(&self, setting: &Setting) -> bool {
        self.xexp.len() == setting.xvars() && self.yexp.len() == setting.yvars()
    }

    pub fn is_one(&self) -> bool {
        self.xexp.iter().all(|&e| e == 0) && self.yexp.iter().all(|&e| e == 0)
    }

    pub fn bidegree(&self) -> BiDegree {
        BiDegree::new(self.xexp.iter().sum(), self.yexp.iter().sum())
    }

    /// `sum d2*i*v_i + sum d1*j*w_j` for the setting's `d`.
    pub fn index_weighted_degree(&self, d: (u32, u32)) -> u64 {
        let x: u64 = self
            .xexp
            .iter()
            .enumerate()
            .map(|(i, &v)| d.1 as u64 * i as u64 * v as u64)
            .sum();
        let y: u64 = self
            .yexp
            .iter()
            .enumerate()
            .map(|(j, &w)| d.0 as u64 * j as u64 * w as u64)
            .sum();
        x + y
    }

    /// `(v mod d1, w mod d2)`.
    pub fn modular_degree(&self, d: (u32, u32)) -> ModularDegree {
        ModularDegree {
            xres: self.xexp.iter().map(|&v| v % d.0).collect(),
            yres: self.yexp.iter().map(|&w| w % d.1).collect(),
        }
    }

    /// The monomial of componentwise exponent remainders; divides `self`,
    /// and the quotient lies in the subring of d-th powers.
    pub fn remd(&self, d: (u32, u32)) -> Monomial {
        Monomial::new(
            self.xexp.iter().map(|&v| v % d.0).collect(),
            self.yexp.iter().map(|&w| w % d.1).collect(),
        )
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.xexp.len(), other.xexp.len());
        debug_assert_eq!(self.yexp.len(), other.yexp.len());
        Monomial::new(
            self.xexp
                .iter()
                .zip(&other.xexp)
                .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
                .collect(),
            self.yexp
                .iter()
                .zip(&other.yexp)
                .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
                .collect(),
        )
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.xexp.iter().zip(&other.xexp).all(|(a, b)| a <= b)
            && self.yexp.iter().zip(&other.yexp).all(|(a, b)| a <= b)
    }

    /// Exact quotient; panics unless `other.divides(self)`.
    pub fn div_exact(&self, other: &Monomial) -> Monomial {
        assert!(other.divides(self), "inexact monomial division");
        Monomial::new(
            self.xexp.iter().zip(&other.xexp).map(|(a, b)| a - b).collect(),
            self.yexp.iter().zip(&other.yexp).map(|(a, b)| a - b).collect(),
        )
    }

    /// `m^(1/d)`: componentwise division of exponents.
    pub fn dth_root(&self, d: (u32, u32)) -> Result<Monomial> {
        for &v in &self.xexp {
            if v % d.0 != 0 {
                return Err(Error::NotInSubring(v, d.0));
            }
        }
        for &w in &self.yexp {
            if w % d.1 != 0 {
                return Err(Error::NotInSubring(w, d.1));
            }
        }
        Ok(Monomial::new(
            self.xexp.iter().map(|&v| v / d.0).collect(),
            self.yexp.iter().map(|&w| w / d.1).collect(),
        ))
    }

    /// `m^d = x^(d1*v) y^(d2*w)`, inverse of [`Monomial::dth_root`].
    pub fn dth_power(&self, d: (u32, u32)) -> Monomial {
        Monomial::new(
            self.xexp
                .iter()
                .map(|&v| v.checked_mul(d.0).expect("exponent overflow"))
                .collect(),
            self.yexp
                .iter()
                .map(|&w| w.checked_mul(d.1).expect("exponent overflow"))
                .collect(),
        )
    }

    /// Whether all variables above `x_{nx}` and `y_{ny}` are absent.
    pub fn supported_within(&self, nx: usize, ny: usize) -> bool {
        self.xexp.iter().skip(nx + 1).all(|&v| v == 0)
            && self.yexp.iter().skip(ny + 1).all(|&w| w == 0)
    }

    /// Reinterpret in a setting with fewer variables; `None` if a discarded
    /// variable occurs.
    pub fn restricted(&self, setting: &Setting) -> Option<Monomial> {
        if !self.supported_within(setting.n.0, setting.n.1) {
            return None;
        }
        Some(Monomial::new(
            self.xexp[..setting.xvars()].to_vec(),
            self.yexp[..setting.yvars()].to_vec(),
        ))
    }

    /// Reinterpret in a setting with more variables.
    pub fn extended(&self, setting: &Setting) -> Monomial {
        let mut x = self.xexp.clone();
        let mut y = self.yexp.clone();
        x.resize(setting.xvars(), 0);
        y.resize(setting.yvars(), 0);
        Monomial::new(x, y)
    }

    /// The canonical order: graded reverse-lexicographic on the x-block,
    /// ties broken the same way on the y-block, largest first.
    pub fn canonical_cmp(&self, other: &Monomial) -> Ordering {
        grevlex(&self.xexp, &other.xexp).then_with(|| grevlex(&self.yexp, &other.yexp))
    }

    /// Parse the canonical text form, e.g. `x0^2*x1*y0^5`.
    pub fn parse(text: &str, setting: &Setting) -> Result<Monomial> {
        let mut m = Monomial::one(setting);
        let text = text.trim();
        if text == "1" {
            return Ok(m);
        }
        for factor in text.split('*') {
            let factor = factor.trim();
            let (var, exp) = match factor.split_once('^') {
                Some((v, e)) => {
                    let exp: u32 = e
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?;
                    (v.trim(), exp)
                }
                None => (factor, 1),
            };
            let (block, idx) = var.split_at(1);
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::Parse(format!("bad variable `{var}`")))?;
            match block {
                "x" if idx < setting.xvars() => m.xexp[idx] += exp,
                "y" if idx < setting.yvars() => m.yexp[idx] += exp,
                _ => return Err(Error::Parse(format!("unknown variable `{var}`"))),
            }
        }
        Ok(m)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &v) in self.xexp.iter().enumerate() {
            match v {
                0 => {}
                1 => parts.push(format!("x{i}")),
                _ => parts.push(format!("x{i}^{v}")),
            }
        }
        for (j, &w) in self.yexp.iter().enumerate() {
            match w {
                0 => {}
                1 => parts.push(format!("y{j}")),
                _ => parts.push(format!("y{j}^{w}")),
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Graded reverse-lexicographic comparison: `Greater` means the first
/// argument is the larger monomial.
fn grevlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&v| v as u64).sum();
    let db: u64 = b.iter().map(|&v| v as u64).sum();
    // Higher total degree is larger; within a degree, the last exponent
    // where they differ decides, smaller there meaning larger.
    da.cmp(&db).then_with(|| {
        for i in (0..a.len()).rev() {
            if a[i] != b[i] {
                return b[i].cmp(&a[i]);
            }
        }
        Ordering::Equal
    })
}

/// All exponent vectors of length `vars` with total degree `deg`, in
/// canonical (grevlex descending) order.
fn exponent_vectors(vars: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; vars];
    fn rec(cur: &mut Vec<u32>, pos: usize, rem: u32, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = rem;
            out.push(cur.clone());
            cur[pos] = 0;
            return;
        }
        for v in (0..=rem).rev() {
            cur[pos] = v;
            rec(cur, pos + 1, rem - v, out);
        }
        cur[pos] = 0;
    }
    if vars == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(&mut cur, 0, deg, &mut out);
    out.sort_by(|p, q| grevlex(q, p));
    out
}

/// All monomials of the given bidegree in canonical order, optionally
/// filtered by index-weighted degree.
pub fn enumerate_monomials(
    setting: &Setting,
    a: BiDegree,
    index_filter: Option<u64>,
) -> Vec<Monomial> {
    let xs = exponent_vectors(setting.xvars(), a.a1);
    let ys = exponent_vectors(setting.yvars(), a.a2);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for x in &xs {
        for y in &ys {
            let m = Monomial::new(x.clone(), y.clone());
            if let Some(k) = index_filter {
                if m.index_weighted_degree(setting.d) != k {
                    continue;
                }
            }
            out.push(m);
        }
    }
    out
}

/// `C(a1+n1, n1) * C(a2+n2, n2)`, the unfiltered count of
/// [`enumerate_monomials`].
pub fn piece_dimension(setting: &Setting, a: BiDegree) -> u64 {
    binomial(a.a1 as u64 + setting.n.0 as u64, setting.n.0 as u64)
        * binomial(a.a2 as u64 + setting.n.1 as u64, setting.n.1 as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(n: (usize, usize), d: (u32, u32)) -> Setting {
        Setting::new(n, d, (0, 0), 32003).unwrap()
    }

    fn m(text: &str, setting: &Setting) -> Monomial {
        Monomial::parse(text, setting).unwrap()
    }

    #[test]
    fn bidegree_examples() {
        let s = st((1, 1), (1, 1));
        assert_eq!(m("x0^2*x1^4*y0^5*y1", &s).bidegree(), BiDegree::new(6, 6));
        assert_eq!(Monomial::one(&s).bidegree(), BiDegree::ZERO);
    }

    #[test]
    fn index_weighted_examples() {
        // d = (3, 5): index.deg(x2 y1) = 5*2 + 3*1 = 13.
        let s = st((2, 2), (3, 5));
        assert_eq!(m("x2*y1", &s).index_weighted_degree(s.d), 13);
        assert_eq!(Monomial::one(&s).index_weighted_degree(s.d), 0);
        // Every term x_i^{d1} y_j^{d2} of the degree-t form has index
        // weighted degree d1*d2*t.
        for t in 0..=4usize {
            for i in 0..=2usize.min(t) {
                let j = t - i;
                if j > 2 {
                    continue;
                }
                let mut term = Monomial::one(&s);
                term.xexp[i] = s.d.0;
                term.yexp[j] = s.d.1;
                assert_eq!(
                    term.index_weighted_degree(s.d),
                    s.d.0 as u64 * s.d.1 as u64 * t as u64
                );
            }
        }
    }

    #[test]
    fn modular_degree_and_remd_example() {
        // n = (1, 2), d = (3, 5), f = x0^5 x1^3 y0^5 y1^11 y2^8.
        let s = st((1, 2), (3, 5));
        let f = m("x0^5*x1^3*y0^5*y1^11*y2^8", &s);
        let md = f.modular_degree(s.d);
        assert_eq!(md.xres, vec![2, 0]);
        assert_eq!(md.yres, vec![0, 1, 3]);
        assert_eq!(f.remd(s.d), m("x0^2*y1*y2^3", &s));
        // remd divides f and the quotient is a d-th power.
        assert!(f.remd(s.d).divides(&f));
        assert!(f.div_exact(&f.remd(s.d)).dth_root(s.d).is_ok());
        // Idempotence.
        assert_eq!(f.remd(s.d).remd(s.d), f.remd(s.d));
    }

    #[test]
    fn dth_root_examples() {
        let s = st((1, 1), (3, 5));
        assert_eq!(m("x0^9*y1^5", &s).dth_root(s.d).unwrap(), m("x0^3*y1", &s));
        assert_eq!(Monomial::one(&s).dth_root(s.d).unwrap(), Monomial::one(&s));
        assert!(m("x0^8", &s).dth_root(s.d).is_err());
    }

    #[test]
    fn enumeration_count_and_order() {
        let s = st((1, 1), (1, 1));
        let ms = enumerate_monomials(&s, BiDegree::new(1, 1), None);
        let text: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
        assert_eq!(text, vec!["x0*y0", "x0*y1", "x1*y0", "x1*y1"]);
        // Index filter: degrees 0, 1, 1, 2 for d = (1, 1).
        let filtered = enumerate_monomials(&s, BiDegree::new(1, 1), Some(1));
        let text: Vec<String> = filtered.iter().map(|m| m.to_string()).collect();
        assert_eq!(text, vec!["x0*y1", "x1*y0"]);
    }

    #[test]
    fn enumeration_matches_dimension_formula() {
        let s = st((2, 4), (2, 3));
        let a = BiDegree::new(2, 3);
        assert_eq!(
            enumerate_monomials(&s, a, None).len() as u64,
            piece_dimension(&s, a)
        );
    }

    #[test]
    fn grevlex_degree_two() {
        // Degree 2 in three variables: x0^2, x0x1, x1^2, x0x2, x1x2, x2^2.
        let vs = exponent_vectors(3, 2);
        assert_eq!(
            vs,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![0, 1, 1],
                vec![0, 0, 2],
            ]
        );
    }

    #[test]
    fn text_roundtrip() {
        let s = st((2, 2), (1, 1));
        for text in ["1", "x0^2*x1*y2^3", "y1"] {
            let mono = m(text, &s);
            assert_eq!(mono.to_string(), text);
            assert_eq!(Monomial::parse(&mono.to_string(), &s).unwrap(), mono);
        }
    }
}
