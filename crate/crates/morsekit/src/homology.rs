//! Exact integer homology via Smith normal form.
//!
//! Boundary matrices of the full complexes run to tens of thousands of rows,
//! so the SNF works on a sparse representation: unimodular (±1) pivots are
//! eliminated first with a fill-minimizing heap, and whatever survives is
//! handed to a small dense textbook SNF. All arithmetic is checked `i128`;
//! overflow is an error, never a wraparound.

use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use serde_json::json;
use thiserror::Error;

use crate::complex::{Complex, Face};
use crate::morse::MorseChainComplex;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HomologyError {
    #[error("integer overflow during exact elimination")]
    Overflow,
    #[error("chain complex has {count} cells, exceeding the budget of {budget}")]
    BudgetExceeded { count: usize, budget: usize },
    #[error("dense SNF fallback would need a {rows}x{cols} matrix")]
    DenseFallbackTooLarge { rows: usize, cols: usize },
}

pub const DEFAULT_SNF_BUDGET: usize = 100_000;

/// Sparse integer matrix with exact entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<BTreeMap<usize, i128>>,
}

impl IntMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        IntMatrix {
            nrows,
            ncols,
            rows: vec![BTreeMap::new(); nrows],
        }
    }

    pub fn from_rows(data: &[&[i128]]) -> Self {
        let nrows = data.len();
        let ncols = data.first().map_or(0, |r| r.len());
        let mut m = IntMatrix::zeros(nrows, ncols);
        for (i, row) in data.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn set(&mut self, i: usize, j: usize, v: i128) {
        assert!(i < self.nrows && j < self.ncols);
        if v == 0 {
            self.rows[i].remove(&j);
        } else {
            self.rows[i].insert(j, v);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.rows[i].get(&j).copied().unwrap_or(0)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    /// Checked product with another matrix; used by the ∂∘∂ = 0 assertions.
    pub fn multiply(&self, other: &IntMatrix) -> Result<IntMatrix, HomologyError> {
        assert_eq!(self.ncols, other.nrows);
        let mut out = IntMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            let mut acc: BTreeMap<usize, i128> = BTreeMap::new();
            for (&k, &a) in &self.rows[i] {
                for (&j, &b) in &other.rows[k] {
                    let term = a.checked_mul(b).ok_or(HomologyError::Overflow)?;
                    let slot = acc.entry(j).or_insert(0);
                    *slot = slot.checked_add(term).ok_or(HomologyError::Overflow)?;
                }
            }
            acc.retain(|_, v| *v != 0);
            out.rows[i] = acc;
        }
        Ok(out)
    }
}

/// Working state for the sparse elimination: rows plus a column-support index.
struct Elimination {
    rows: Vec<HashMap<usize, i128>>,
    col_rows: Vec<HashSet<usize>>,
    unit_heap: BinaryHeap<std::cmp::Reverse<(usize, usize, usize)>>,
}

impl Elimination {
    fn new(m: &IntMatrix) -> Self {
        let mut rows: Vec<HashMap<usize, i128>> = vec![HashMap::new(); m.nrows];
        let mut col_rows: Vec<HashSet<usize>> = vec![HashSet::new(); m.ncols];
        for (i, row) in m.rows.iter().enumerate() {
            for (&j, &v) in row {
                rows[i].insert(j, v);
                col_rows[j].insert(i);
            }
        }
        let mut e = Elimination {
            rows,
            col_rows,
            unit_heap: BinaryHeap::new(),
        };
        for i in 0..e.rows.len() {
            let cols: Vec<usize> = e.rows[i].keys().copied().collect();
            for j in cols {
                e.push_if_unit(i, j);
            }
        }
        e
    }

    fn fill_estimate(&self, i: usize, j: usize) -> usize {
        (self.rows[i].len() - 1) * (self.col_rows[j].len() - 1)
    }

    fn push_if_unit(&mut self, i: usize, j: usize) {
        if let Some(&v) = self.rows[i].get(&j) {
            if v == 1 || v == -1 {
                let fill = self.fill_estimate(i, j);
                self.unit_heap.push(std::cmp::Reverse((fill, i, j)));
            }
        }
    }

    fn put(&mut self, i: usize, j: usize, v: i128) {
        if v == 0 {
            self.rows[i].remove(&j);
            self.col_rows[j].remove(&i);
        } else {
            self.rows[i].insert(j, v);
            self.col_rows[j].insert(i);
            if v == 1 || v == -1 {
                self.push_if_unit(i, j);
            }
        }
    }

    /// row_dst -= q * row_src
    fn row_axpy(&mut self, dst: usize, src: usize, q: i128) -> Result<(), HomologyError> {
        if q == 0 {
            return Ok(());
        }
        let updates: Vec<(usize, i128)> = self.rows[src].iter().map(|(&j, &v)| (j, v)).collect();
        for (j, v) in updates {
            let term = q.checked_mul(v).ok_or(HomologyError::Overflow)?;
            let cur = self.rows[dst].get(&j).copied().unwrap_or(0);
            let next = cur.checked_sub(term).ok_or(HomologyError::Overflow)?;
            self.put(dst, j, next);
        }
        Ok(())
    }

    /// Eliminate with pivots of absolute value one for as long as any exist.
    /// Each such pivot contributes an invariant factor 1.
    fn unit_phase(&mut self) -> Result<usize, HomologyError> {
        let mut eliminated = 0;
        while let Some(std::cmp::Reverse((fill, i, j))) = self.unit_heap.pop() {
            let v = match self.rows[i].get(&j) {
                Some(&v) if v == 1 || v == -1 => v,
                _ => continue, // stale entry
            };
            let current_fill = self.fill_estimate(i, j);
            if current_fill > fill {
                self.unit_heap.push(std::cmp::Reverse((current_fill, i, j)));
                continue;
            }
            // Clear the column below and above the pivot.
            let others: Vec<usize> = self.col_rows[j].iter().copied().filter(|&r| r != i).collect();
            for r in others {
                let q = self.rows[r][&j] * v; // v is ±1, so q * row_i cancels exactly
                self.row_axpy(r, i, q)?;
            }
            // The pivot column is now a singleton; clearing the pivot row is a
            // pure column operation that only touches row i, so dropping the
            // row is equivalent.
            let cols: Vec<usize> = self.rows[i].keys().copied().collect();
            for c in cols {
                self.rows[i].remove(&c);
                self.col_rows[c].remove(&i);
            }
            eliminated += 1;
        }
        Ok(eliminated)
    }

    /// Collect the surviving entries into a dense matrix over the remaining
    /// row/column supports.
    fn remainder_dense(&self) -> Result<Vec<Vec<i128>>, HomologyError> {
        let live_rows: Vec<usize> = (0..self.rows.len()).filter(|&i| !self.rows[i].is_empty()).collect();
        let mut live_cols: Vec<usize> = self
            .col_rows
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_empty())
            .map(|(j, _)| j)
            .collect();
        live_cols.sort_unstable();
        let col_pos: HashMap<usize, usize> = live_cols.iter().enumerate().map(|(p, &j)| (j, p)).collect();
        if live_rows.len() * live_cols.len() > 4_000_000 {
            return Err(HomologyError::DenseFallbackTooLarge {
                rows: live_rows.len(),
                cols: live_cols.len(),
            });
        }
        let mut dense = vec![vec![0i128; live_cols.len()]; live_rows.len()];
        for (ri, &i) in live_rows.iter().enumerate() {
            for (&j, &v) in &self.rows[i] {
                dense[ri][col_pos[&j]] = v;
            }
        }
        Ok(dense)
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Textbook dense SNF diagonalization; returns the diagonal (unsorted, not
/// yet a divisibility chain).
fn dense_diagonalize(mut m: Vec<Vec<i128>>) -> Result<Vec<i128>, HomologyError> {
    let nrows = m.len();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    let mut top = 0usize;
    while top < nrows.min(ncols) {
        // Minimal-absolute-value pivot in the active submatrix.
        let mut pivot: Option<(usize, usize)> = None;
        for i in top..nrows {
            for j in top..ncols {
                if m[i][j] != 0
                    && pivot.map_or(true, |(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let (pi, pj) = match pivot {
            Some(p) => p,
            None => break,
        };
        m.swap(top, pi);
        for row in m.iter_mut() {
            row.swap(top, pj);
        }
        loop {
            let mut clean = true;
            for i in (top + 1)..nrows {
                if m[i][top] != 0 {
                    let q = m[i][top] / m[top][top];
                    for j in top..ncols {
                        let term = q.checked_mul(m[top][j]).ok_or(HomologyError::Overflow)?;
                        m[i][j] = m[i][j].checked_sub(term).ok_or(HomologyError::Overflow)?;
                    }
                    if m[i][top] != 0 {
                        m.swap(top, i); // remainder became the smaller pivot
                        clean = false;
                    }
                }
            }
            for j in (top + 1)..ncols {
                if m[top][j] != 0 {
                    let q = m[top][j] / m[top][top];
                    for i in top..nrows {
                        let term = q.checked_mul(m[i][top]).ok_or(HomologyError::Overflow)?;
                        m[i][j] = m[i][j].checked_sub(term).ok_or(HomologyError::Overflow)?;
                    }
                    if m[top][j] != 0 {
                        for row in m.iter_mut() {
                            row.swap(top, j);
                        }
                        clean = false;
                    }
                }
            }
            let col_clear = ((top + 1)..nrows).all(|i| m[i][top] == 0);
            let row_clear = ((top + 1)..ncols).all(|j| m[top][j] == 0);
            if clean && col_clear && row_clear {
                break;
            }
        }
        diag.push(m[top][top].abs());
        top += 1;
    }
    Ok(diag)
}

/// Invariant factors `d_1 | d_2 | ...` of an integer matrix.
pub fn smith_normal_form(m: &IntMatrix) -> Result<Vec<i128>, HomologyError> {
    let mut elim = Elimination::new(m);
    let units = elim.unit_phase()?;
    let dense = elim.remainder_dense()?;
    let mut factors = vec![1i128; units];
    factors.extend(dense_diagonalize(dense)?.into_iter().filter(|&d| d != 0));
    // Repair the divisibility chain; diag(a, b) ~ diag(gcd, lcm).
    loop {
        let mut changed = false;
        for i in 0..factors.len() {
            for j in (i + 1)..factors.len() {
                if factors[j] % factors[i] != 0 {
                    let g = gcd(factors[i], factors[j]);
                    let l = (factors[i] / g)
                        .checked_mul(factors[j])
                        .ok_or(HomologyError::Overflow)?;
                    factors[i] = g;
                    factors[j] = l.abs();
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    factors.sort_unstable();
    Ok(factors)
}

/// Rank over the integers: the number of nonzero invariant factors.
pub fn rank(m: &IntMatrix) -> Result<usize, HomologyError> {
    Ok(smith_normal_form(m)?.len())
}

/// The boundary matrix from dimension `p` to `p - 1` of the augmented
/// simplicial chain complex: rows index (p-1)-faces, columns p-faces, with
/// entry ±1 per facet. At `p = 0` this is the augmentation row of all 1s.
/// Out-of-range dimensions give a zero-size matrix.
pub fn boundary_matrix(c: &Complex, p: isize) -> IntMatrix {
    if p < 0 || p > c.dim() {
        return IntMatrix::zeros(0, 0);
    }
    let upper = c.faces_of_dim(p);
    let lower = c.faces_of_dim(p - 1);
    let lower_pos: HashMap<Face, usize> = lower.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let mut m = IntMatrix::zeros(lower.len(), upper.len());
    for (col, &sigma) in upper.iter().enumerate() {
        let mut sign = 1i128;
        for v in sigma.vertices() {
            let tau = sigma.remove(v);
            m.set(lower_pos[&tau], col, sign);
            sign = -sign;
        }
    }
    m
}

/// Reduced homology: free rank and torsion coefficients per dimension >= 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyProfile {
    /// Betti numbers for dimensions `0..=top`; trailing zeros retained.
    pub betti: Vec<usize>,
    /// Torsion coefficients per dimension, each >= 2.
    pub torsion: BTreeMap<usize, Vec<i128>>,
}

impl HomologyProfile {
    pub fn betti_at(&self, p: usize) -> usize {
        self.betti.get(p).copied().unwrap_or(0)
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion.values().all(|v| v.is_empty())
    }

    /// Nonzero Betti numbers as a dimension -> rank map.
    pub fn nonzero_betti(&self) -> BTreeMap<usize, usize> {
        self.betti
            .iter()
            .enumerate()
            .filter(|(_, &b)| b > 0)
            .map(|(p, &b)| (p, b))
            .collect()
    }

    /// Equality up to trailing zero ranks; profiles of the same space can
    /// come from chain complexes of different top dimension.
    pub fn same_homology(&self, other: &HomologyProfile) -> bool {
        self.nonzero_betti() == other.nonzero_betti() && self.torsion == other.torsion
    }

    /// Alternating sum of Betti numbers (equals the reduced Euler
    /// characteristic when there is no torsion).
    pub fn reduced_euler(&self) -> i64 {
        self.betti
            .iter()
            .enumerate()
            .map(|(p, &b)| if p % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let betti: BTreeMap<String, usize> = self
            .betti
            .iter()
            .enumerate()
            .map(|(p, &b)| (p.to_string(), b))
            .collect();
        let torsion: BTreeMap<String, Vec<String>> = self
            .torsion
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(p, v)| (p.to_string(), v.iter().map(|t| t.to_string()).collect()))
            .collect();
        json!({ "betti": betti, "torsion": torsion })
    }
}

/// Reduced homology of the full simplicial complex, by SNF of each boundary
/// matrix of the augmented chain complex.
pub fn reduced_homology(c: &Complex, budget: usize) -> Result<HomologyProfile, HomologyError> {
    if c.face_count() > budget {
        return Err(HomologyError::BudgetExceeded {
            count: c.face_count(),
            budget,
        });
    }
    let top = c.dim();
    if top < 0 {
        // Complex {∅}: reduced homology of the empty space is trivial here by
        // convention; no dimensions to report.
        return Ok(HomologyProfile {
            betti: vec![],
            torsion: BTreeMap::new(),
        });
    }
    // factors[p] = invariant factors of ∂_p for p in 0..=top+1; ∂_0 is the
    // augmentation row, which the generic construction produces at p = 0.
    let mut factors = Vec::new();
    for p in 0..=(top + 1) {
        factors.push(smith_normal_form(&boundary_matrix(c, p))?);
    }
    let mut betti = Vec::new();
    let mut torsion = BTreeMap::new();
    for p in 0..=top as usize {
        let chain_rank = c.faces_of_dim(p as isize).len();
        let rank_down = factors[p].len();
        let rank_up = factors[p + 1].len();
        betti.push(chain_rank - rank_down - rank_up);
        let tors: Vec<i128> = factors[p + 1].iter().copied().filter(|&d| d > 1).collect();
        if !tors.is_empty() {
            torsion.insert(p, tors);
        }
    }
    Ok(HomologyProfile { betti, torsion })
}

/// Homology of a Morse chain complex. The extra base 0-cell of the collapsed
/// CW complex exactly cancels the augmentation, so no augmentation row is
/// added here: the result is directly comparable to [`reduced_homology`].
pub fn morse_homology(mcc: &MorseChainComplex) -> Result<HomologyProfile, HomologyError> {
    let dims: Vec<isize> = mcc.cells().keys().copied().collect();
    let top = dims.iter().copied().max().unwrap_or(-1);
    if top < 0 {
        return Ok(HomologyProfile {
            betti: vec![],
            torsion: BTreeMap::new(),
        });
    }
    let empty = IntMatrix::zeros(0, 0);
    let mut betti = Vec::new();
    let mut torsion = BTreeMap::new();
    for p in 0..=top {
        let cell_count = mcc.cells().get(&p).map_or(0, |v| v.len());
        let down = mcc.boundary(p).unwrap_or(&empty);
        let up = mcc.boundary(p + 1).unwrap_or(&empty);
        let rank_down = rank(down)?;
        let rank_up = rank(up)?;
        betti.push(cell_count - rank_down - rank_up);
        let tors: Vec<i128> = smith_normal_form(up)?
            .into_iter()
            .filter(|&d| d > 1)
            .collect();
        if !tors.is_empty() {
            torsion.insert(p as usize, tors);
        }
    }
    Ok(HomologyProfile { betti, torsion })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::independence_complex;
    use crate::graphs::{build_custom, build_cycle, build_gmd};
    use proptest::prelude::*;

    #[test]
    fn snf_small_cases() {
        let id = IntMatrix::from_rows(&[&[1, 0], &[0, 1]]);
        assert_eq!(smith_normal_form(&id).unwrap(), vec![1, 1]);
        let m = IntMatrix::from_rows(&[&[2, 4], &[6, 8]]);
        assert_eq!(smith_normal_form(&m).unwrap(), vec![2, 4]);
        let z = IntMatrix::zeros(3, 2);
        assert_eq!(smith_normal_form(&z).unwrap(), vec![]);
    }

    #[test]
    fn snf_with_torsion() {
        // Boundary matrix structure of RP^2-like gluings: factor 2 appears.
        let m = IntMatrix::from_rows(&[&[2, 0], &[0, 3]]);
        assert_eq!(smith_normal_form(&m).unwrap(), vec![1, 6]);
        let m = IntMatrix::from_rows(&[&[2]]);
        assert_eq!(smith_normal_form(&m).unwrap(), vec![2]);
    }

    #[test]
    fn augmentation_row() {
        let c = independence_complex(&build_cycle(5).unwrap()).unwrap();
        let m = boundary_matrix(&c, 0);
        assert_eq!(m.nrows(), 1);
        assert_eq!(m.ncols(), 5);
        for j in 0..5 {
            assert_eq!(m.get(0, j), 1);
        }
        assert_eq!(boundary_matrix(&c, 7).nrows(), 0);
    }

    #[test]
    fn hollow_square_boundary() {
        let g = build_gmd(2, 1).unwrap();
        let c = independence_complex(&g).unwrap();
        let d1 = boundary_matrix(&c, 1);
        assert_eq!((d1.nrows(), d1.ncols()), (4, 4));
        // Signed column sums vanish: each edge has one +1 and one -1.
        for j in 0..4 {
            let mut sum = 0;
            for i in 0..4 {
                sum += d1.get(i, j);
            }
            assert_eq!(sum, 0);
        }
    }

    #[test]
    fn boundary_squares_to_zero() {
        let c = independence_complex(&build_cycle(8).unwrap()).unwrap();
        for p in 1..=c.dim() {
            let a = boundary_matrix(&c, p - 1);
            let b = boundary_matrix(&c, p);
            assert!(a.multiply(&b).unwrap().is_zero(), "∂∘∂ != 0 at p={p}");
        }
    }

    #[test]
    fn known_homology_profiles() {
        // Ind(C_6) ~ S^1 v S^1
        let c = independence_complex(&build_cycle(6).unwrap()).unwrap();
        let h = reduced_homology(&c, DEFAULT_SNF_BUDGET).unwrap();
        assert_eq!(h.nonzero_betti(), std::iter::once((1, 2)).collect());
        assert!(h.is_torsion_free());

        // Ind(G_3^1): three disjoint edges, an S^2 (octahedron boundary).
        let c = independence_complex(&build_gmd(3, 1).unwrap()).unwrap();
        let h = reduced_homology(&c, DEFAULT_SNF_BUDGET).unwrap();
        assert_eq!(h.nonzero_betti(), std::iter::once((2, 1)).collect());

        // Full simplex: contractible.
        let g = build_custom(vec!["x".into(), "y".into(), "z".into(), "w".into()], &[]).unwrap();
        let c = independence_complex(&g).unwrap();
        let h = reduced_homology(&c, DEFAULT_SNF_BUDGET).unwrap();
        assert!(h.betti.iter().all(|&b| b == 0));
        assert!(h.is_torsion_free());
    }

    #[test]
    fn budget_is_enforced() {
        let c = independence_complex(&build_gmd(6, 1).unwrap()).unwrap();
        assert_eq!(
            reduced_homology(&c, 10),
            Err(HomologyError::BudgetExceeded { count: 729, budget: 10 })
        );
    }

    #[test]
    fn euler_consistency_with_f_vector() {
        for (m, d) in [(3, 2), (4, 2), (5, 2), (4, 3), (5, 5)] {
            let c = independence_complex(&build_gmd(m, d).unwrap()).unwrap();
            let h = reduced_homology(&c, DEFAULT_SNF_BUDGET).unwrap();
            assert_eq!(h.reduced_euler(), c.reduced_euler(), "G_{m}^{d}");
        }
    }

    #[test]
    fn profile_json_shape() {
        let c = independence_complex(&build_cycle(6).unwrap()).unwrap();
        let h = reduced_homology(&c, DEFAULT_SNF_BUDGET).unwrap();
        let j = h.to_json();
        assert_eq!(j["betti"]["1"], 2);
        assert_eq!(j["betti"]["0"], 0);
        assert!(j["torsion"].as_object().unwrap().is_empty());
    }

    proptest! {
        // SNF invariants on random small matrices: factors form a
        // divisibility chain and their count equals the rank over Q.
        #[test]
        fn snf_factors_form_chain(entries in proptest::collection::vec(-6i128..=6, 12)) {
            let rows: Vec<&[i128]> = entries.chunks(4).collect();
            let m = IntMatrix::from_rows(&rows);
            let f = smith_normal_form(&m).unwrap();
            for w in f.windows(2) {
                prop_assert_eq!(w[1] % w[0], 0);
            }
            prop_assert!(f.iter().all(|&d| d > 0));
            prop_assert_eq!(f.len(), rational_rank(&m));
        }
    }

    // Independent rank oracle: fraction-free Gaussian elimination over Q.
    fn rational_rank(m: &IntMatrix) -> usize {
        let mut a: Vec<Vec<f64>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m.get(i, j) as f64).collect())
            .collect();
        let mut rank = 0;
        for col in 0..m.ncols() {
            let piv = (rank..m.nrows()).max_by(|&x, &y| {
                a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap()
            });
            match piv {
                Some(p) if a[p][col].abs() > 1e-9 => {
                    a.swap(rank, p);
                    for i in (rank + 1)..m.nrows() {
                        let f = a[i][col] / a[rank][col];
                        for j in col..m.ncols() {
                            a[i][j] -= f * a[rank][j];
                        }
                    }
                    rank += 1;
                }
                _ => {}
            }
        }
        rank
    }
}
