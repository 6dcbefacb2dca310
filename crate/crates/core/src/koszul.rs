//! Koszul strands, blockwise rank computation, Betti tables and the
//! density statistic.
//!
//! The strand through `(p, q)` is
//! `Λ^{p+1} V ⊗ W_{q-1} → Λ^p V ⊗ W_q → Λ^{p-1} V ⊗ W_{q+1}`
//! with `V` the degree-`d` piece and `W_q` the piece of bidegree `q*d + b`,
//! over either the full ring (raw mode) or the quotient by the form ideal
//! (Artinian mode). Both differentials preserve the total modular and
//! index-weighted degrees of wedge-plus-payload, so every matrix splits
//! into blocks keyed by that total; ranks are computed block by block and
//! summed.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::comb::{binomial, subset_rank, subsets};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::ideal::{CoxRing, GradeKey, PieceMonomials, QuotientBasis};
use crate::matrix::{Eliminator, SparseMatrix, SparseVec};
use crate::monomial::{BiDegree, Monomial};
use crate::setting::Setting;

/// Whether strands run over the quotient ring or the full ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StrandMode {
    /// Over the quotient by the form ideal. Requires the Cohen-Macaulay
    /// inequalities, under which the cohomology agrees with raw mode.
    Artinian,
    /// Over the full ring; the independent oracle.
    Raw,
}

impl StrandMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StrandMode::Artinian => "artinian",
            StrandMode::Raw => "raw",
        }
    }
}

/// A graded piece as used by strands.
enum Piece<F: Field> {
    Zero,
    Reduced(Arc<QuotientBasis<F>>),
    Full(Arc<PieceMonomials>),
}

impl<F: Field> Piece<F> {
    fn dim(&self) -> usize {
        match self {
            Piece::Zero => 0,
            Piece::Reduced(qb) => qb.dim(),
            Piece::Full(p) => p.dim(),
        }
    }

    fn monomial(&self, i: u32) -> &Monomial {
        match self {
            Piece::Zero => unreachable!("zero piece has no monomials"),
            Piece::Reduced(qb) => qb.basis_monomial(i),
            Piece::Full(p) => &p.list[i as usize],
        }
    }
}

/// Middle extent, the two ranks, and the resulting cohomology dimension of
/// one strand.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StrandSummary {
    pub p: u32,
    pub q: i64,
    pub middle_dim: u64,
    pub rank_in: u64,
    pub rank_out: u64,
    pub dim: u64,
}

/// Materialized strand matrices with combinadic wedge indexing; only for
/// strands small enough to hold whole.
pub struct KoszulStrand<F: Field> {
    pub p: u32,
    pub q: i64,
    /// `∂_{p+1,q-1}` into the middle term.
    pub din: SparseMatrix<F::Elem>,
    /// `∂_{p,q}` out of the middle term.
    pub dout: SparseMatrix<F::Elem>,
}

/// Strand engine over one ring, one mode, one size budget.
pub struct KoszulEngine<'r, F: Field> {
    ring: &'r CoxRing<F>,
    mode: StrandMode,
    size_limit: u64,
}

impl<'r, F: Field> KoszulEngine<'r, F> {
    /// In Artinian mode the Cohen-Macaulay inequalities are demanded up
    /// front: without them reduction changes the cohomology.
    pub fn new(ring: &'r CoxRing<F>, mode: StrandMode, size_limit: u64) -> Result<Self> {
        if mode == StrandMode::Artinian && !ring.setting().is_cohen_macaulay() {
            return Err(Error::HypothesisViolation(format!(
                "section module for b = {:?} is not Cohen-Macaulay; use raw mode",
                ring.setting().b
            )));
        }
        Ok(KoszulEngine {
            ring,
            mode,
            size_limit,
        })
    }

    pub fn ring(&self) -> &CoxRing<F> {
        self.ring
    }

    pub fn mode(&self) -> StrandMode {
        self.mode
    }

    fn setting(&self) -> &Setting {
        self.ring.setting()
    }

    /// Key of a monomial under this mode's block grading (exact exponents
    /// in raw mode, modular residues plus index weight in Artinian mode).
    fn key_of(&self, m: &Monomial) -> GradeKey {
        match self.mode {
            StrandMode::Artinian => GradeKey::of(m, self.setting().d),
            StrandMode::Raw => GradeKey::exact(m, self.setting().d),
        }
    }

    fn combine(&self, a: &GradeKey, b: &GradeKey) -> GradeKey {
        match self.mode {
            StrandMode::Artinian => a.plus(b, Some(self.setting().d)),
            StrandMode::Raw => a.plus(b, None),
        }
    }

    /// The wedge generators: the degree-`d` piece of the active ring.
    pub fn generators(&self) -> Vec<Monomial> {
        let d = BiDegree::new(self.setting().d.0, self.setting().d.1);
        match self.mode {
            StrandMode::Artinian => self
                .ring
                .quotient_basis(d)
                .basis_monomials()
                .cloned()
                .collect(),
            StrandMode::Raw => self.ring.piece(d).list.clone(),
        }
    }

    fn piece(&self, q: i64) -> Piece<F> {
        let setting = self.setting();
        match BiDegree::graded_piece(q, setting.d, setting.b) {
            None => Piece::Zero,
            Some(a) => match self.mode {
                StrandMode::Artinian => Piece::Reduced(self.ring.quotient_basis(a)),
                StrandMode::Raw => Piece::Full(self.ring.piece(a)),
            },
        }
    }

    /// Class of `gen * (monomial i of from)` in the piece one step up.
    fn product_class(
        &self,
        gen: &Monomial,
        from: &Piece<F>,
        i: u32,
        up: &Piece<F>,
    ) -> SparseVec<F::Elem> {
        let prod = gen.mul(from.monomial(i));
        match up {
            Piece::Zero => Vec::new(),
            Piece::Reduced(qb) => qb.reduce_monomial(&prod, self.ring.field().one()),
            Piece::Full(p) => vec![(
                p.position(&prod).expect("product outside piece"),
                self.ring.field().one(),
            )],
        }
    }

    fn product_table(&self, gens: &[Monomial], from: &Piece<F>, up: &Piece<F>) -> ProductTable<F> {
        gens.iter()
            .map(|gm| {
                (0..from.dim() as u32)
                    .map(|u| self.product_class(gm, from, u, up))
                    .collect()
            })
            .collect()
    }

    /// `dim K_{p,q}` over the configured field.
    pub fn kpq(&self, p: u32, q: i64) -> Result<u64> {
        Ok(self.strand_summary(p, q)?.dim)
    }

    /// Middle extent, both ranks, and the cohomology dimension at `(p, q)`.
    pub fn strand_summary(&self, p: u32, q: i64) -> Result<StrandSummary> {
        let gens = self.generators();
        let g = gens.len() as u32;
        if g > 63 {
            return Err(Error::SizeLimitExceeded(g as u64, 63));
        }
        let mid = self.piece(q);
        let up = self.piece(q + 1);
        let down = self.piece(q - 1);

        let middle_dim = binomial(g as u64, p as u64) * mid.dim() as u64;
        let din_cols = binomial(g as u64, p as u64 + 1) * down.dim() as u64;
        let budget = middle_dim.max(din_cols);
        if budget > self.size_limit {
            return Err(Error::SizeLimitExceeded(budget, self.size_limit));
        }
        if middle_dim == 0 {
            return Ok(StrandSummary {
                p,
                q,
                middle_dim,
                rank_in: 0,
                rank_out: 0,
                dim: 0,
            });
        }

        let gen_keys: Vec<GradeKey> = gens.iter().map(|m| self.key_of(m)).collect();
        let mid_keys: Vec<GradeKey> = (0..mid.dim() as u32)
            .map(|i| self.key_of(mid.monomial(i)))
            .collect();
        let down_keys: Vec<GradeKey> = (0..down.dim() as u32)
            .map(|i| self.key_of(down.monomial(i)))
            .collect();

        // Bucket middle and incoming columns by total key.
        let mut mid_buckets: HashMap<GradeKey, Vec<(u64, u32)>> = HashMap::new();
        for mask in subsets(g, p) {
            let wk = self.wedge_key(mask, &gen_keys);
            for (u, uk) in mid_keys.iter().enumerate() {
                mid_buckets
                    .entry(self.combine(&wk, uk))
                    .or_default()
                    .push((mask, u as u32));
            }
        }
        let mut din_buckets: HashMap<GradeKey, Vec<(u64, u32)>> = HashMap::new();
        if down.dim() > 0 && p + 1 <= g {
            for mask in subsets(g, p + 1) {
                let wk = self.wedge_key(mask, &gen_keys);
                for (u, uk) in down_keys.iter().enumerate() {
                    din_buckets
                        .entry(self.combine(&wk, uk))
                        .or_default()
                        .push((mask, u as u32));
                }
            }
        }

        let mult_up = self.product_table(&gens, &mid, &up);
        let mult_mid = self.product_table(&gens, &down, &mid);

        let field = self.ring.field();
        let mut rank_in = 0u64;
        let mut rank_out = 0u64;
        for (key, mids) in &mid_buckets {
            // Outgoing differential on this block.
            let mut out_rows: HashMap<(u64, u32), u32> = HashMap::new();
            let mut elim_out = Eliminator::new(field.clone());
            for &(mask, u) in mids {
                let col = differential_column(field, mask, &mult_up, u, |sub, c| {
                    let next = out_rows.len() as u32;
                    *out_rows.entry((sub, c)).or_insert(next)
                });
                elim_out.insert(col);
            }
            rank_out += elim_out.rank() as u64;

            // Incoming differential on this block.
            if let Some(cols) = din_buckets.get(key) {
                let mid_pos: HashMap<(u64, u32), u32> = mids
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| (e, i as u32))
                    .collect();
                let mut elim_in = Eliminator::new(field.clone());
                for &(mask, u) in cols {
                    let col = differential_column(field, mask, &mult_mid, u, |sub, c| {
                        *mid_pos
                            .get(&(sub, c))
                            .expect("differential left its grade block")
                    });
                    elim_in.insert(col);
                }
                rank_in += elim_in.rank() as u64;
            }
        }

        Ok(StrandSummary {
            p,
            q,
            middle_dim,
            rank_in,
            rank_out,
            dim: middle_dim - rank_out - rank_in,
        })
    }

    fn wedge_key(&self, mask: u64, gen_keys: &[GradeKey]) -> GradeKey {
        let mut acc = GradeKey {
            modx: vec![0; self.setting().xvars()],
            mody: vec![0; self.setting().yvars()],
            index: 0,
        };
        let mut m = mask;
        while m != 0 {
            let a = m.trailing_zeros() as usize;
            acc = self.combine(&acc, &gen_keys[a]);
            m &= m - 1;
        }
        acc
    }

    /// Materialize both differentials with combinadic wedge indexing.
    pub fn strand(&self, p: u32, q: i64) -> Result<KoszulStrand<F>> {
        let gens = self.generators();
        let g = gens.len() as u32;
        if g > 63 {
            return Err(Error::SizeLimitExceeded(g as u64, 63));
        }
        let mid = self.piece(q);
        let up = self.piece(q + 1);
        let down = self.piece(q - 1);
        let mid_cols = binomial(g as u64, p as u64) * mid.dim() as u64;
        let din_cols = binomial(g as u64, p as u64 + 1) * down.dim() as u64;
        let dout_rows = if p == 0 {
            0
        } else {
            binomial(g as u64, p as u64 - 1) * up.dim() as u64
        };
        let budget = mid_cols.max(din_cols).max(dout_rows);
        if budget > self.size_limit {
            return Err(Error::SizeLimitExceeded(budget, self.size_limit));
        }

        let field = self.ring.field();
        let mut dout = SparseMatrix::new(dout_rows, mid_cols);
        if mid.dim() > 0 && up.dim() > 0 && p >= 1 {
            let mult_up = self.product_table(&gens, &mid, &up);
            for mask in subsets(g, p) {
                let col_base = subset_rank(mask) * mid.dim() as u64;
                for u in 0..mid.dim() as u32 {
                    let col = (col_base + u as u64) as u32;
                    let entries = differential_column(field, mask, &mult_up, u, |sub, c| {
                        (subset_rank(sub) * up.dim() as u64 + c as u64) as u32
                    });
                    for (row, value) in entries {
                        dout.push(row, col, value);
                    }
                }
            }
        }

        let mut din = SparseMatrix::new(mid_cols, din_cols);
        if down.dim() > 0 && mid.dim() > 0 && p + 1 <= g {
            let mult_mid = self.product_table(&gens, &down, &mid);
            for mask in subsets(g, p + 1) {
                let col_base = subset_rank(mask) * down.dim() as u64;
                for u in 0..down.dim() as u32 {
                    let col = (col_base + u as u64) as u32;
                    let entries = differential_column(field, mask, &mult_mid, u, |sub, c| {
                        (subset_rank(sub) * mid.dim() as u64 + c as u64) as u32
                    });
                    for (row, value) in entries {
                        din.push(row, col, value);
                    }
                }
            }
        }

        Ok(KoszulStrand { p, q, din, dout })
    }

    /// The Betti table over a window of homological degrees, nonzero
    /// entries only. Weights run over `0..=|n|+1`.
    pub fn betti_table(&self, p_window: Option<(u32, u32)>) -> Result<BettiTable> {
        let r = self.setting().r();
        let (p_lo, p_hi) = p_window.unwrap_or((0, r.min(u32::MAX as u64) as u32));
        let q_hi = self.setting().total_dim() as i64 + 1;
        let jobs: Vec<(u32, i64)> = (p_lo..=p_hi)
            .flat_map(|p| (0..=q_hi).map(move |q| (p, q)))
            .collect();
        let dims: Result<Vec<(u32, i64, u64)>> = jobs
            .par_iter()
            .map(|&(p, q)| self.kpq(p, q).map(|dim| (p, q, dim)))
            .collect();
        let mut entries: Vec<BettiEntry> = dims?
            .into_iter()
            .filter(|&(_, _, dim)| dim > 0)
            .map(|(p, q, dim)| BettiEntry {
                p,
                q: q as u32,
                dim,
            })
            .collect();
        entries.sort_by_key(|e| (e.p, e.q));
        Ok(BettiTable {
            setting: self.setting().clone(),
            characteristic: self.ring.field().characteristic(),
            mode: self.mode.as_str().to_string(),
            entries,
            r,
        })
    }

    /// `ρ_q`: the fraction of `p` in `0..=r` with nonzero syzygies, as an
    /// exact pair `(count, r)`.
    pub fn rho_q(&self, q: i64) -> Result<(u64, u64)> {
        let r = self.setting().r();
        let mut count = 0;
        for p in 0..=r as u32 {
            if self.kpq(p, q)? > 0 {
                count += 1;
            }
        }
        Ok((count, r))
    }
}

type ProductTable<F> = Vec<Vec<SparseVec<<F as Field>::Elem>>>;

/// Assemble one differential column: for each ascending slot `i` (1-based)
/// of `mask`, add `(-1)^i` times the product class of that generator; rows
/// are labelled `(mask minus bit, class coordinate)` through `row_id`.
fn differential_column<F: Field>(
    field: &F,
    mask: u64,
    table: &ProductTable<F>,
    payload: u32,
    mut row_id: impl FnMut(u64, u32) -> u32,
) -> SparseVec<F::Elem> {
    let mut entries: Vec<(u32, F::Elem)> = Vec::new();
    let mut m = mask;
    let mut slot = 0u32;
    while m != 0 {
        let a = m.trailing_zeros() as usize;
        slot += 1;
        let negative = slot % 2 == 1;
        let sub = mask & !(1u64 << a);
        for (c, coeff) in &table[a][payload as usize] {
            let value = if negative {
                field.neg(coeff)
            } else {
                coeff.clone()
            };
            entries.push((row_id(sub, *c), value));
        }
        m &= m - 1;
    }
    entries.sort_by_key(|e| e.0);
    entries
}

/// Sparse Betti table with metadata; entries are the nonzero dimensions.
#[derive(Clone, Debug, Serialize)]
pub struct BettiTable {
    pub setting: Setting,
    #[serde(rename = "char")]
    pub characteristic: u64,
    pub mode: String,
    pub entries: Vec<BettiEntry>,
    pub r: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BettiEntry {
    pub p: u32,
    pub q: u32,
    pub dim: u64,
}

impl BettiTable {
    pub fn dim(&self, p: u32, q: u32) -> u64 {
        self.entries
            .iter()
            .find(|e| e.p == p && e.q == q)
            .map_or(0, |e| e.dim)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,q,dim\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.p, e.q, e.dim));
        }
        out
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

    fn engine<'r>(r: &'r CoxRing<PrimeField>, mode: StrandMode) -> KoszulEngine<'r, PrimeField> {
        KoszulEngine::new(r, mode, 1 << 22).unwrap()
    }

    #[test]
    fn quadric_table_both_modes() {
        let r = ring((1, 1), (1, 1));
        for mode in [StrandMode::Artinian, StrandMode::Raw] {
            let eng = engine(&r, mode);
            for p in 0..=3u32 {
                for q in 0..=3i64 {
                    let expect = u64::from((p, q) == (0, 0) || (p, q) == (1, 1));
                    assert_eq!(eng.kpq(p, q).unwrap(), expect, "K_{{{p},{q}}} in {mode:?}");
                }
            }
        }
    }

    #[test]
    fn strand_extents_match_counts() {
        let r = ring((1, 1), (2, 2));
        let eng = engine(&r, StrandMode::Artinian);
        let g = eng.generators().len() as u64;
        let strand = eng.strand(2, 1).unwrap();
        let mid = r.quotient_basis(BiDegree::new(2, 2)).dim() as u64;
        assert_eq!(strand.dout.cols, binomial(g, 2) * mid);
        let down = r.quotient_basis(BiDegree::new(0, 0)).dim() as u64;
        assert_eq!(strand.din.cols, binomial(g, 3) * down);
    }

    #[test]
    fn complex_property_on_materialized_strands() {
        for (n, d) in [((1usize, 1usize), (1u32, 1u32)), ((1, 1), (2, 1)), ((1, 2), (1, 1))] {
            let r = ring(n, d);
            for mode in [StrandMode::Artinian, StrandMode::Raw] {
                let eng = engine(&r, mode);
                for q in 1..=2i64 {
                    for p in 1..=3u32 {
                        let s = eng.strand(p, q).unwrap();
                        let prod = s.dout.multiply(&s.din, r.field());
                        assert_eq!(prod.nnz(), 0, "dout∘din != 0 at ({p},{q}) {mode:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn blocked_ranks_match_materialized_ranks() {
        use crate::matrix::rank_of;
        let r = ring((1, 1), (2, 2));
        for mode in [StrandMode::Artinian, StrandMode::Raw] {
            let eng = engine(&r, mode);
            for (p, q) in [(1u32, 1i64), (2, 1), (3, 2), (2, 2)] {
                let summary = eng.strand_summary(p, q).unwrap();
                let s = eng.strand(p, q).unwrap();
                let rank_in = rank_of(r.field(), s.din.columns()) as u64;
                let rank_out = rank_of(r.field(), s.dout.columns()) as u64;
                assert_eq!(summary.rank_in, rank_in, "din rank at ({p},{q}) {mode:?}");
                assert_eq!(summary.rank_out, rank_out, "dout rank at ({p},{q}) {mode:?}");
                assert_eq!(summary.middle_dim, s.dout.cols);
            }
        }
    }

    #[test]
    fn rank_nullity_bookkeeping() {
        let r = ring((1, 1), (2, 1));
        let eng = engine(&r, StrandMode::Artinian);
        for q in 0..=3i64 {
            for p in 0..=5u32 {
                let s = eng.strand_summary(p, q).unwrap();
                assert_eq!(s.middle_dim, s.dim + s.rank_in + s.rank_out);
            }
        }
    }

    #[test]
    fn weight_rows_above_total_dimension_vanish() {
        let r = ring((1, 1), (2, 2));
        let eng = engine(&r, StrandMode::Artinian);
        for p in 0..=6u32 {
            assert_eq!(eng.kpq(p, 3).unwrap(), 0);
        }
    }

    #[test]
    fn artinian_mode_requires_cohen_macaulay() {
        let s = Setting::new((1, 1), (4, 1), (0, 3), 32003).unwrap();
        let r = CoxRing::new(s, PrimeField::new(32003));
        assert!(KoszulEngine::new(&r, StrandMode::Artinian, 1 << 20).is_err());
        assert!(KoszulEngine::new(&r, StrandMode::Raw, 1 << 20).is_ok());
    }

    #[test]
    fn size_limit_is_loud() {
        let r = ring((1, 1), (2, 2));
        let eng = KoszulEngine::new(&r, StrandMode::Raw, 10).unwrap();
        match eng.kpq(4, 1) {
            Err(Error::SizeLimitExceeded(_, 10)) => {}
            other => panic!("expected size limit error, got {other:?}"),
        }
    }
}
