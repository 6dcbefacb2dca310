//! The diagonal form ideal, its graded pieces, quotient bases, and the two
//! ideal-membership oracles.
//!
//! The ideal is generated by the degree-`d` forms
//! `g_t = sum_{i+j=t} x_i^{d1} y_j^{d2}`. Every generator is homogeneous for
//! the bidegree, the index-weighted degree and the modular degree at once,
//! so each graded piece of the ideal splits into blocks indexed by the two
//! finer gradings; row reduction never mixes blocks, which keeps the bases
//! cheap and makes the choice of quotient monomials reproducible.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{Eliminator, SparseVec};
use crate::monomial::{enumerate_monomials, BiDegree, Monomial};
use crate::poly::Polynomial;
use crate::setting::Setting;

/// Combined value of the two extra gradings. Strand differentials preserve
/// the total key, so matrices block-decompose along it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GradeKey {
    pub modx: Vec<u32>,
    pub mody: Vec<u32>,
    pub index: u64,
}

impl GradeKey {
    /// Key of a monomial: exponents reduced mod `d`, plus the
    /// index-weighted degree.
    pub fn of(m: &Monomial, d: (u32, u32)) -> GradeKey {
        GradeKey {
            modx: m.xexp.iter().map(|&v| v % d.0).collect(),
            mody: m.yexp.iter().map(|&w| w % d.1).collect(),
            index: m.index_weighted_degree(d),
        }
    }

    /// A finer key for unreduced strands: full exponent vectors.
    pub fn exact(m: &Monomial, d: (u32, u32)) -> GradeKey {
        GradeKey {
            modx: m.xexp.clone(),
            mody: m.yexp.clone(),
            index: m.index_weighted_degree(d),
        }
    }

    pub fn plus(&self, other: &GradeKey, modulus: Option<(u32, u32)>) -> GradeKey {
        let combine = |a: &[u32], b: &[u32], m: Option<u32>| -> Vec<u32> {
            a.iter()
                .zip(b)
                .map(|(x, y)| match m {
                    Some(m) => (x + y) % m,
                    None => x + y,
                })
                .collect()
        };
        GradeKey {
            modx: combine(&self.modx, &other.modx, modulus.map(|d| d.0)),
            mody: combine(&self.mody, &other.mody, modulus.map(|d| d.1)),
            index: self.index + other.index,
        }
    }

    /// Modular difference; `None` when the index weight underflows.
    pub fn checked_minus(&self, other: &GradeKey, d: (u32, u32)) -> Option<GradeKey> {
        let sub = |a: &[u32], b: &[u32], m: u32| -> Vec<u32> {
            a.iter().zip(b).map(|(x, y)| (x + m - y) % m).collect()
        };
        Some(GradeKey {
            modx: sub(&self.modx, &other.modx, d.0),
            mody: sub(&self.mody, &other.mody, d.1),
            index: self.index.checked_sub(other.index)?,
        })
    }
}

/// The monomial basis of one bidegree piece of the ambient ring, in
/// canonical order, with positions.
#[derive(Debug)]
pub struct PieceMonomials {
    pub bidegree: BiDegree,
    pub list: Vec<Monomial>,
    index_of: HashMap<Monomial, u32>,
}

impl PieceMonomials {
    fn build(setting: &Setting, a: BiDegree) -> Self {
        let list = enumerate_monomials(setting, a, None);
        let index_of = list
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();
        PieceMonomials {
            bidegree: a,
            list,
            index_of,
        }
    }

    pub fn dim(&self) -> usize {
        self.list.len()
    }

    pub fn position(&self, m: &Monomial) -> Option<u32> {
        self.index_of.get(m).copied()
    }
}

/// A chosen monomial basis of one graded piece of the quotient ring,
/// together with reduction data.
///
/// Pivot positions span the ideal piece; the complementary ambient
/// monomials are the canonical quotient basis. Reducing any polynomial of
/// this bidegree expresses its class in quotient coordinates.
pub struct QuotientBasis<F: Field> {
    pub ambient: Arc<PieceMonomials>,
    elim: Eliminator<F>,
    /// Ambient positions spanned by the ideal piece.
    pub pivot_columns: Vec<u32>,
    /// Ambient positions of the quotient monomials, ascending.
    pub basis: Vec<u32>,
    basis_coord: HashMap<u32, u32>,
}

impl<F: Field> QuotientBasis<F> {
    pub fn bidegree(&self) -> BiDegree {
        self.ambient.bidegree
    }

    /// `HF(a, R)`.
    pub fn ideal_dim(&self) -> usize {
        self.pivot_columns.len()
    }

    /// `dim` of the quotient piece.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_monomial(&self, coord: u32) -> &Monomial {
        &self.ambient.list[self.basis[coord as usize] as usize]
    }

    pub fn basis_monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.basis.iter().map(|&p| &self.ambient.list[p as usize])
    }

    /// Quotient coordinate of an ambient monomial, if it is itself a basis
    /// monomial.
    pub fn coord_of_monomial(&self, m: &Monomial) -> Option<u32> {
        let pos = self.ambient.position(m)?;
        self.basis_coord.get(&pos).copied()
    }

    /// Reduce a vector in ambient coordinates to quotient coordinates.
    pub fn reduce(&self, v: SparseVec<F::Elem>) -> SparseVec<F::Elem> {
        let reduced = self.elim.reduce(v);
        reduced
            .into_iter()
            .map(|(pos, c)| (self.basis_coord[&pos], c))
            .collect()
    }

    /// Class of a single monomial in quotient coordinates.
    pub fn reduce_monomial(&self, m: &Monomial, one: F::Elem) -> SparseVec<F::Elem> {
        let pos = self
            .ambient
            .position(m)
            .expect("monomial of the wrong bidegree");
        // Fast path: basis monomials reduce to themselves.
        if let Some(&coord) = self.basis_coord.get(&pos) {
            return vec![(coord, one)];
        }
        self.reduce(vec![(pos, one)])
    }

    /// Class of a polynomial of this bidegree in quotient coordinates.
    pub fn reduce_polynomial(&self, p: &Polynomial<F>) -> Result<SparseVec<F::Elem>> {
        let mut v: SparseVec<F::Elem> = Vec::with_capacity(p.num_terms());
        for (m, c) in p.terms() {
            let pos = self
                .ambient
                .position(m)
                .ok_or(Error::NotHomogeneous)?;
            v.push((pos, c.clone()));
        }
        v.sort_by_key(|e| e.0);
        Ok(self.reduce(v))
    }
}

/// The bigraded polynomial ring of a setting together with the form ideal,
/// cached quotient bases, and the membership oracles.
pub struct CoxRing<F: Field> {
    setting: Setting,
    field: F,
    pieces: Mutex<HashMap<BiDegree, Arc<PieceMonomials>>>,
    bases: Mutex<HashMap<BiDegree, Arc<QuotientBasis<F>>>>,
    unit: OnceLock<Arc<CoxRing<F>>>,
}

impl<F: Field> CoxRing<F> {
    pub fn new(setting: Setting, field: F) -> Self {
        CoxRing {
            setting,
            field,
            pieces: Mutex::new(HashMap::new()),
            bases: Mutex::new(HashMap::new()),
            unit: OnceLock::new(),
        }
    }

    pub fn setting(&self) -> &Setting {
        &self.setting
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    /// The forms `g_0, ..., g_{|n|}`.
    pub fn regular_sequence_forms(&self) -> Vec<Polynomial<F>> {
        regular_sequence_forms(&self.setting, &self.field)
    }

    /// The monomial basis of `S_a`.
    pub fn piece(&self, a: BiDegree) -> Arc<PieceMonomials> {
        let mut cache = self.pieces.lock().unwrap();
        cache
            .entry(a)
            .or_insert_with(|| Arc::new(PieceMonomials::build(&self.setting, a)))
            .clone()
    }

    /// The quotient basis of `S_a` modulo the ideal piece `R_a`.
    pub fn quotient_basis(&self, a: BiDegree) -> Arc<QuotientBasis<F>> {
        if let Some(b) = self.bases.lock().unwrap().get(&a) {
            return b.clone();
        }
        let built = Arc::new(self.build_quotient_basis(a));
        self.bases
            .lock()
            .unwrap()
            .entry(a)
            .or_insert(built)
            .clone()
    }

    fn build_quotient_basis(&self, a: BiDegree) -> QuotientBasis<F> {
        let ambient = self.piece(a);
        let mut elim = Eliminator::new(self.field.clone());
        // R_a is spanned by m * g_t over monomials m of bidegree a - d.
        if let Some(mult_deg) = a.checked_sub(BiDegree::new(self.setting.d.0, self.setting.d.1)) {
            let forms = self.regular_sequence_forms();
            let multipliers = enumerate_monomials(&self.setting, mult_deg, None);
            for form in &forms {
                for m in &multipliers {
                    let mut row: SparseVec<F::Elem> = form
                        .terms()
                        .map(|(t, c)| {
                            let prod = t.mul(m);
                            let pos = ambient
                                .position(&prod)
                                .expect("product outside ambient piece");
                            (pos, c.clone())
                        })
                        .collect();
                    row.sort_by_key(|e| e.0);
                    elim.insert(row);
                }
            }
        }
        let pivot_columns = elim.pivot_indices();
        let pivot_set: std::collections::HashSet<u32> = pivot_columns.iter().copied().collect();
        let basis: Vec<u32> = (0..ambient.dim() as u32)
            .filter(|p| !pivot_set.contains(p))
            .collect();
        let basis_coord = basis
            .iter()
            .enumerate()
            .map(|(c, &p)| (p, c as u32))
            .collect();
        QuotientBasis {
            ambient,
            elim,
            pivot_columns,
            basis,
            basis_coord,
        }
    }

    /// `HF(a, R)`.
    pub fn ideal_dim(&self, a: BiDegree) -> usize {
        self.quotient_basis(a).ideal_dim()
    }

    /// `dim` of the quotient piece in bidegree `a`.
    pub fn quotient_dim(&self, a: BiDegree) -> usize {
        self.quotient_basis(a).dim()
    }

    /// `dim` of the quotient piece in bidegree `a` and index-weighted
    /// degree `k`.
    pub fn quotient_dim_refined(&self, a: BiDegree, k: u64) -> usize {
        let qb = self.quotient_basis(a);
        qb.basis_monomials()
            .filter(|m| m.index_weighted_degree(self.setting.d) == k)
            .count()
    }

    /// The index-refined quotient basis: ambient and quotient monomials of
    /// bidegree `a` restricted to index-weighted degree `k`.
    pub fn refined_basis(&self, a: BiDegree, k: u64) -> IndexRefinedBasis {
        let qb = self.quotient_basis(a);
        let ambient = qb
            .ambient
            .list
            .iter()
            .filter(|m| m.index_weighted_degree(self.setting.d) == k)
            .cloned()
            .collect();
        let quotient = qb
            .basis_monomials()
            .filter(|m| m.index_weighted_degree(self.setting.d) == k)
            .cloned()
            .collect();
        IndexRefinedBasis {
            bidegree: a,
            index: k,
            ambient,
            quotient,
        }
    }

    /// Brute-force membership: reduce against the row-reduced ideal piece.
    pub fn contains(&self, f: &Polynomial<F>) -> Result<bool> {
        let a = f.bidegree()?;
        let qb = self.quotient_basis(a);
        Ok(qb.reduce_polynomial(f)?.is_empty())
    }

    pub fn contains_monomial(&self, m: &Monomial) -> bool {
        let qb = self.quotient_basis(m.bidegree());
        qb.reduce_monomial(m, self.field.one()).is_empty()
    }

    /// Membership through the modular grading: divide by the common
    /// remainder monomial, take the d-th root, and test in the unit-degree
    /// ring. Requires `f` homogeneous for the modular grading.
    pub fn contains_via_modular(&self, f: &Polynomial<F>) -> Result<bool> {
        f.modular_degree(self.setting.d)?;
        let rem = f
            .terms()
            .next()
            .map(|(m, _)| m.remd(self.setting.d))
            .expect("nonzero polynomial");
        let unit = self.unit_ring();
        let mut root = Polynomial::zero();
        for (m, c) in f.terms() {
            let q = m.div_exact(&rem).dth_root(self.setting.d)?;
            root.add_term(&self.field, q, c.clone());
        }
        unit.contains(&root)
    }

    /// The sibling ring with `d = (1, 1)` and no twist.
    pub fn unit_ring(&self) -> Arc<CoxRing<F>> {
        self.unit
            .get_or_init(|| {
                Arc::new(CoxRing::new(
                    self.setting.unit_degree(),
                    self.field.clone(),
                ))
            })
            .clone()
    }

    /// The ring with the last `i` x-variables and last `j` y-variables
    /// discarded.
    pub fn restricted(&self, i: usize, j: usize) -> Result<CoxRing<F>> {
        Ok(CoxRing::new(
            self.setting.restricted(i, j)?,
            self.field.clone(),
        ))
    }
}

/// The forms `g_t = sum_{i+j=t, i <= n1, j <= n2} x_i^{d1} y_j^{d2}` for
/// `t = 0, ..., |n|`.
pub fn regular_sequence_forms<F: Field>(setting: &Setting, field: &F) -> Vec<Polynomial<F>> {
    let (n1, n2) = setting.n;
    let (d1, d2) = setting.d;
    (0..=n1 + n2)
        .map(|t| {
            let mut g = Polynomial::zero();
            for i in 0..=n1.min(t) {
                let j = t - i;
                if j > n2 {
                    continue;
                }
                let mut m = Monomial::one(setting);
                m.xexp[i] = d1;
                m.yexp[j] = d2;
                g.add_term(field, m, field.one());
            }
            g
        })
        .collect()
}

/// Quotient data restricted to one index-weighted degree.
pub struct IndexRefinedBasis {
    pub bidegree: BiDegree,
    pub index: u64,
    pub ambient: Vec<Monomial>,
    pub quotient: Vec<Monomial>,
}

impl IndexRefinedBasis {
    pub fn dim(&self) -> usize {
        self.quotient.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    fn ring(n: (usize, usize), d: (u32, u32)) -> CoxRing<PrimeField> {
        let s = Setting::new(n, d, (0, 0), 32003).unwrap();
        CoxRing::new(s, PrimeField::new(32003))
    }

    fn poly(ring: &CoxRing<PrimeField>, text: &str) -> Polynomial<PrimeField> {
        Polynomial::from_monomial(
            ring.field(),
            Monomial::parse(text, ring.setting()).unwrap(),
        )
    }

    #[test]
    fn forms_for_small_products() {
        // Three forms for n = (1, 1).
        let r = ring((1, 1), (2, 3));
        let forms = r.regular_sequence_forms();
        assert_eq!(forms.len(), 3);
        let s = r.setting();
        let f = r.field();
        assert_eq!(forms[0], poly(&r, "x0^2*y0^3"));
        assert_eq!(
            forms[1],
            poly(&r, "x0^2*y1^3").plus(f, &poly(&r, "x1^2*y0^3"))
        );
        assert_eq!(forms[2], poly(&r, "x1^2*y1^3"));
        // Each is homogeneous of modular degree zero and index degree d1*d2*t.
        for (t, g) in forms.iter().enumerate() {
            assert!(g.modular_degree(s.d).unwrap().is_zero());
            for (m, _) in g.terms() {
                assert_eq!(
                    m.index_weighted_degree(s.d),
                    s.d.0 as u64 * s.d.1 as u64 * t as u64
                );
            }
        }
    }

    #[test]
    fn g3_for_n_2_4() {
        let r = ring((2, 4), (5, 7));
        let forms = r.regular_sequence_forms();
        assert_eq!(forms.len(), 7);
        let f = r.field();
        let expected = poly(&r, "x2^5*y1^7")
            .plus(f, &poly(&r, "x1^5*y2^7"))
            .plus(f, &poly(&r, "x0^5*y3^7"));
        assert_eq!(forms[3], expected);
    }

    #[test]
    fn ideal_dim_at_d_is_number_of_forms() {
        for (n, d) in [((1usize, 1usize), (1u32, 1u32)), ((1, 2), (2, 3)), ((2, 2), (3, 2))] {
            let r = ring(n, d);
            let a = BiDegree::new(d.0, d.1);
            assert_eq!(r.ideal_dim(a), n.0 + n.1 + 1);
        }
    }

    #[test]
    fn ideal_vanishes_below_generation_degree() {
        let r = ring((1, 2), (2, 3));
        assert_eq!(r.ideal_dim(BiDegree::new(1, 3)), 0);
        assert_eq!(r.quotient_dim(BiDegree::new(1, 0)), 2);
    }

    #[test]
    fn quadric_quotient_dims() {
        let r = ring((1, 1), (1, 1));
        assert_eq!(r.quotient_dim(BiDegree::new(1, 1)), 1);
        // The twelve products m*g_t span all of the nine-dimensional piece
        // (three Koszul syzygies account for the count), so the quotient
        // vanishes from bidegree (2, 2) on.
        assert_eq!(r.quotient_dim(BiDegree::new(2, 2)), 0);
        assert_eq!(r.quotient_dim(BiDegree::new(3, 3)), 0);
    }

    #[test]
    fn membership_examples() {
        let r = ring((2, 2), (1, 1));
        let forms = r.regular_sequence_forms();
        assert!(r.contains(&forms[0]).unwrap());
        // x_l * y0^{l+1} lies in the ideal for every l.
        for l in 0..=2usize {
            let mut m = Monomial::one(r.setting());
            m.xexp[l] = 1;
            m.yexp[0] = l as u32 + 1;
            assert!(r.contains_monomial(&m), "x{l}*y0^{} missing", l + 1);
        }
        // Degree (1, 0) sits below the generation degree.
        assert!(!r.contains(&poly(&r, "x0")).unwrap());
    }

    #[test]
    fn modular_path_agrees_with_brute_force() {
        let r = ring((1, 1), (3, 3));
        // x0^6 y0^3 = x0^3 * g_0, so membership should hold on both routes.
        let f = poly(&r, "x0^6*y0^3");
        assert!(r.contains(&f).unwrap());
        assert!(r.contains_via_modular(&f).unwrap());
        let g = poly(&r, "x0^2*x1^4*y0^5*y1");
        assert_eq!(
            r.contains(&g).unwrap(),
            r.contains_via_modular(&g).unwrap()
        );
    }

    #[test]
    fn restriction_forms_match_smaller_ring() {
        let big = ring((2, 4), (2, 3));
        for (i, j) in [(0usize, 0usize), (1, 0), (0, 2), (2, 1)] {
            let small = big.restricted(i, j).unwrap();
            let expected = small.regular_sequence_forms();
            let images: Vec<_> = big
                .regular_sequence_forms()
                .iter()
                .map(|g| g.restricted(small.setting()))
                .collect();
            // Forms of index above |n'| restrict to zero.
            for (t, img) in images.iter().enumerate() {
                if t < expected.len() {
                    assert_eq!(img, &expected[t], "form {t} under ({i}, {j})");
                } else {
                    assert!(img.is_zero());
                }
            }
        }
    }
}
