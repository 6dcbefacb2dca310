//! Sparse vectors, incremental Gauss-Jordan elimination, and a coordinate
//! matrix type for strand differentials.
//!
//! Rank computations here always run inside one graded block, so the
//! eliminator favours simplicity: vectors are sorted sparse lists, pivot
//! rows are kept mutually reduced, and reduction is a single ascending
//! sweep.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::field::Field;

/// Sorted-by-index sparse vector with nonzero entries.
pub type SparseVec<T> = Vec<(u32, T)>;

/// Coordinate-form sparse matrix over the active field.
///
/// No duplicate coordinates, no stored zeros.
#[derive(Clone, Debug, Serialize)]
pub struct SparseMatrix<T> {
    pub rows: u64,
    pub cols: u64,
    pub entries: Vec<(u32, u32, T)>,
}

impl<T: Clone> SparseMatrix<T> {
    pub fn new(rows: u64, cols: u64) -> Self {
        SparseMatrix {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: u32, col: u32, value: T) {
        debug_assert!((row as u64) < self.rows && (col as u64) < self.cols);
        self.entries.push((row, col, value));
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Columns as sparse vectors.
    pub fn columns(&self) -> Vec<SparseVec<T>> {
        let mut cols = vec![Vec::new(); self.cols as usize];
        for (r, c, v) in &self.entries {
            cols[*c as usize].push((*r, v.clone()));
        }
        for col in &mut cols {
            col.sort_by_key(|e| e.0);
        }
        cols
    }
}

impl<T: Clone> SparseMatrix<T> {
    /// Matrix product, for complex-property checks on small strands.
    pub fn multiply<F>(&self, other: &SparseMatrix<T>, field: &F) -> SparseMatrix<T>
    where
        F: Field<Elem = T>,
        T: PartialEq + std::fmt::Debug + Send + Sync + 'static,
    {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut by_col: HashMap<u32, Vec<(u32, T)>> = HashMap::new();
        for (r, c, v) in &self.entries {
            by_col.entry(*c).or_default().push((*r, v.clone()));
        }
        let mut acc: HashMap<(u32, u32), T> = HashMap::new();
        for (k, c, v) in &other.entries {
            if let Some(col) = by_col.get(k) {
                for (r, w) in col {
                    let prod = field.mul(v, w);
                    acc.entry((*r, *c))
                        .and_modify(|a| *a = field.add(a, &prod))
                        .or_insert(prod);
                }
            }
        }
        let mut out = SparseMatrix::new(self.rows, other.cols);
        let mut entries: Vec<_> = acc
            .into_iter()
            .filter(|(_, v)| !field.is_zero(v))
            .map(|((r, c), v)| (r, c, v))
            .collect();
        entries.sort_by_key(|(r, c, _)| (*r, *c));
        out.entries = entries;
        out
    }
}

/// Incremental column-space eliminator: feed vectors, track the rank, test
/// membership in the span of everything fed so far.
pub struct Eliminator<F: Field> {
    field: F,
    /// Mutually reduced pivot rows; entry 0 is the unit leading coefficient.
    pivots: Vec<SparseVec<F::Elem>>,
    pivot_at: HashMap<u32, usize>,
}

impl<F: Field> Eliminator<F> {
    pub fn new(field: F) -> Self {
        Eliminator {
            field,
            pivots: Vec::new(),
            pivot_at: HashMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Fully reduce `v` against the current pivots.
    pub fn reduce(&self, v: SparseVec<F::Elem>) -> SparseVec<F::Elem> {
        let f = &self.field;
        let mut work: BTreeMap<u32, F::Elem> = v.into_iter().collect();
        let mut out = Vec::new();
        while let Some((&i, _)) = work.iter().next() {
            let c = work.remove(&i).unwrap();
            if f.is_zero(&c) {
                continue;
            }
            match self.pivot_at.get(&i) {
                Some(&row) => {
                    // v -= c * pivot; the pivot's tail only has indices > i.
                    for (j, a) in &self.pivots[row][1..] {
                        let delta = f.mul(&c, a);
                        match work.remove(j) {
                            Some(old) => {
                                let next = f.sub(&old, &delta);
                                if !f.is_zero(&next) {
                                    work.insert(*j, next);
                                }
                            }
                            None => {
                                work.insert(*j, f.neg(&delta));
                            }
                        }
                    }
                }
                None => out.push((i, c)),
            }
        }
        out
    }

    /// Reduce and, if anything is left, install it as a new pivot.
    /// Returns `true` when the rank grew.
    pub fn insert(&mut self, v: SparseVec<F::Elem>) -> bool {
        let f = self.field.clone();
        let mut reduced = self.reduce(v);
        if reduced.is_empty() {
            return false;
        }
        // Normalize so the leading coefficient is 1.
        let lead = reduced[0].0;
        let inv = f.inv(&reduced[0].1.clone());
        for (_, c) in &mut reduced {
            *c = f.mul(c, &inv);
        }
        // Keep existing pivot rows reduced against the new one.
        let new_row = reduced;
        for row in &mut self.pivots {
            if let Some(pos) = row.iter().position(|(j, _)| *j == lead) {
                let c = row[pos].1.clone();
                row.remove(pos);
                let mut merged: BTreeMap<u32, F::Elem> =
                    row.iter().map(|(j, a)| (*j, a.clone())).collect();
                for (j, a) in &new_row[1..] {
                    let delta = f.mul(&c, a);
                    match merged.remove(j) {
                        Some(old) => {
                            let next = f.sub(&old, &delta);
                            if !f.is_zero(&next) {
                                merged.insert(*j, next);
                            }
                        }
                        None => {
                            merged.insert(*j, f.neg(&delta));
                        }
                    }
                }
                *row = merged.into_iter().collect();
            }
        }
        self.pivot_at.insert(lead, self.pivots.len());
        self.pivots.push(new_row);
        true
    }

    /// Whether `v` lies in the span of the inserted vectors.
    pub fn in_span(&self, v: SparseVec<F::Elem>) -> bool {
        self.reduce(v).is_empty()
    }

    /// Leading indices of the pivot rows.
    pub fn pivot_indices(&self) -> Vec<u32> {
        let mut idx: Vec<u32> = self.pivot_at.keys().copied().collect();
        idx.sort_unstable();
        idx
    }
}

/// Rank of a set of sparse columns.
pub fn rank_of<F: Field>(field: &F, columns: impl IntoIterator<Item = SparseVec<F::Elem>>) -> usize {
    let mut elim = Eliminator::new(field.clone());
    for col in columns {
        elim.insert(col);
    }
    elim.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    #[test]
    fn rank_and_span() {
        let f = PrimeField::new(101);
        let mut elim = Eliminator::new(f);
        assert!(elim.insert(vec![(0, 1), (1, 2)]));
        assert!(elim.insert(vec![(1, 1), (2, 1)]));
        // Dependent on the first two: (0,1),(1,2) + 3*((1,1),(2,1)).
        assert!(!elim.insert(vec![(0, 1), (1, 5), (2, 3)]));
        assert_eq!(elim.rank(), 2);
        assert!(elim.in_span(vec![(0, 2), (1, 4)]));
        assert!(!elim.in_span(vec![(2, 1), (3, 1)]));
    }

    #[test]
    fn mutual_reduction_keeps_tails_clean() {
        let f = PrimeField::new(101);
        let mut elim = Eliminator::new(f);
        elim.insert(vec![(0, 1), (2, 1)]);
        elim.insert(vec![(1, 1), (2, 1)]);
        // New pivot at 2 must be eliminated from both earlier rows.
        elim.insert(vec![(2, 1)]);
        assert_eq!(elim.rank(), 3);
        for row in &elim.pivots {
            assert_eq!(row.len(), 1);
        }
    }

    #[test]
    fn sparse_multiply() {
        let f = PrimeField::new(101);
        let mut a = SparseMatrix::new(2, 2);
        a.push(0, 0, 1);
        a.push(1, 1, 2);
        let mut b = SparseMatrix::new(2, 1);
        b.push(0, 0, 3);
        b.push(1, 0, 4);
        let c = a.multiply(&b, &f);
        assert_eq!(c.entries, vec![(0, 0, 3), (1, 0, 8)]);
    }
}
