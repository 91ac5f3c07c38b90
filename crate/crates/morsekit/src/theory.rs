//! Closed-form predicates over subsets of the B side of `G_m^d`: the cyclic
//! blocks `B_s`, membership in the residual set M, the survival property
//! `P_l`, and the predicted critical cells and homotopy types.
//!
//! Everything here is arithmetic on `(m, d)` and bitmasks over `{b_1..b_m}`;
//! nothing consults the matching engine, so these functions double as an
//! independent oracle for it.

use std::fmt;

use thiserror::Error;

use crate::complex::Face;
use crate::graphs::norm_index;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TheoryError {
    #[error("require 1 <= d <= m, got m={m}, d={d}")]
    BadParams { m: usize, d: usize },
    #[error("index {s} out of range [1, {m}]")]
    IndexOutOfRange { s: usize, m: usize },
    #[error("the empty set never belongs to M")]
    EmptySigma,
    #[error("l={l} out of range [1, {t}]")]
    BadLevel { l: usize, t: usize },
    #[error("cycle length must be at least 3, got {0}")]
    CycleTooShort(usize),
}

/// Subset of `{b_1, ..., b_m}` as a bitmask, bit `i-1` standing for `b_i`.
pub type BMask = u64;

/// The parameters of an instance together with the derived quantities of the
/// decomposition `m = t(d+1) + alpha`, `0 <= alpha <= d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceParams {
    pub m: usize,
    pub d: usize,
    pub t: usize,
    pub alpha: usize,
}

impl InstanceParams {
    pub fn new(m: usize, d: usize) -> Result<Self, TheoryError> {
        if m < 1 || d < 1 || d > m {
            return Err(TheoryError::BadParams { m, d });
        }
        let t = m / (d + 1);
        let alpha = m - t * (d + 1);
        debug_assert!(alpha <= d);
        Ok(InstanceParams { m, d, t, alpha })
    }

    /// Maximal index of a surviving cell: `k = j_1 + m - d - 1`.
    pub fn k(&self, j1: usize) -> usize {
        j1 + self.m - self.d - 1
    }

    /// `i_r = 1 + (r-1)(d+1)`.
    pub fn i_r(&self, r: usize) -> usize {
        1 + (r - 1) * (self.d + 1)
    }

    /// `j_r = j_1 + (r-1)(d+1)`.
    pub fn j_r(&self, j1: usize, r: usize) -> usize {
        j1 + (r - 1) * (self.d + 1)
    }
}

fn bmask_bit(i: usize) -> BMask {
    1u64 << (i - 1)
}

/// Indices of `sigma` in increasing order.
pub fn bmask_indices(sigma: BMask) -> Vec<usize> {
    (1..=64).filter(|&i| sigma & bmask_bit(i) != 0).collect()
}

pub fn bmask_from_indices(indices: &[usize]) -> BMask {
    indices.iter().fold(0u64, |m, &i| m | bmask_bit(i))
}

/// Render as `["b1", "b3", ...]`.
pub fn bmask_labels(sigma: BMask) -> Vec<String> {
    bmask_indices(sigma).iter().map(|i| format!("b{i}")).collect()
}

/// Convert a B-subset to a face of `Ind(G_m^d)` under the canonical vertex
/// order `a_1 < ... < a_m < b_1 < ... < b_m`.
pub fn bmask_to_face(sigma: BMask, m: usize) -> Face {
    Face(sigma << m)
}

/// Inverse of [`bmask_to_face`]; `None` if the face touches the A side.
pub fn face_to_bmask(f: Face, m: usize) -> Option<BMask> {
    if f.0 & ((1u64 << m) - 1) != 0 {
        None
    } else {
        Some(f.0 >> m)
    }
}

/// The cyclic block `B_s = {b_s, b_{s+1}, ..., b_{s+m-d-1}}` (indices mod m),
/// of cardinality `m - d`; empty when `d = m`.
pub fn b_set(p: &InstanceParams, s: usize) -> Result<BMask, TheoryError> {
    if s < 1 || s > p.m {
        return Err(TheoryError::IndexOutOfRange { s, m: p.m });
    }
    let mut mask = 0u64;
    for off in 0..(p.m - p.d) {
        mask |= bmask_bit(norm_index((s + off) as isize, p.m));
    }
    Ok(mask)
}

/// Pointed containment `σ ⊆ B_s`: the block must contain `σ` *and* the
/// basepoint `b_s` must lie in `σ`.
pub fn pointed_contained(p: &InstanceParams, sigma: BMask, s: usize) -> Result<bool, TheoryError> {
    let block = b_set(p, s)?;
    Ok(sigma & bmask_bit(s) != 0 && sigma & !block == 0)
}

/// Membership in the residual set M after the A-phase: a nonempty `σ ⊆ B`
/// lies in M iff it is pointed-contained in no block `B_s`.
pub fn in_m(p: &InstanceParams, sigma: BMask) -> Result<bool, TheoryError> {
    if sigma == 0 {
        return Err(TheoryError::EmptySigma);
    }
    for s in 1..=p.m {
        if pointed_contained(p, sigma, s)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Direct adjacency check: does some `a_i` extend `σ` to an independent set?
/// `N(a_i) = {b_i, ..., b_{i+d-1}}`, so this holds iff `σ` misses some
/// neighborhood entirely.
pub fn extension_exists(p: &InstanceParams, sigma: BMask) -> bool {
    for i in 1..=p.m {
        let mut nbhd = 0u64;
        for off in 0..p.d {
            nbhd |= bmask_bit(norm_index((i + off) as isize, p.m));
        }
        if sigma & nbhd == 0 {
            return true;
        }
    }
    false
}

/// The survival property `P_l`: structurally, `σ` starts with the anchors
/// `b_1, b_{j_1}, b_{i_2}, b_{j_2}, ..., b_{i_l}, b_{j_l}` for some
/// `j_1 <= d+1` and its maximal index equals `k = j_1 + m - d - 1`; and the
/// deletion of any anchor `b_{i_r}` or `b_{j_r}` (r <= l) leaves M.
pub fn satisfies_p(p: &InstanceParams, sigma: BMask, l: usize) -> Result<bool, TheoryError> {
    if l < 1 || l > p.t {
        return Err(TheoryError::BadLevel { l, t: p.t });
    }
    if sigma == 0 {
        return Err(TheoryError::EmptySigma);
    }
    let indices = bmask_indices(sigma);
    if indices.len() < 2 * l {
        return Ok(false);
    }
    let j1 = indices[1];
    if indices[0] != 1 || j1 > p.d + 1 {
        return Ok(false);
    }
    // First 2l elements must be exactly the anchors i_1, j_1, ..., i_l, j_l.
    for r in 1..=l {
        if indices[2 * (r - 1)] != p.i_r(r) || indices[2 * r - 1] != p.j_r(j1, r) {
            return Ok(false);
        }
    }
    if *indices.last().unwrap() != p.k(j1) {
        return Ok(false);
    }
    for r in 1..=l {
        for anchor in [p.i_r(r), p.j_r(j1, r)] {
            if in_m(p, sigma & !bmask_bit(anchor))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The critical cells the closed-form analysis predicts for the canonical
/// order, as B-subsets sorted by mask.
///
/// For `d = m` the closed-form lemmas do not apply (every block `B_s` is
/// empty); the single cell `{b_1}` reproduces what the engine computes there.
pub fn predicted_critical_cells(p: &InstanceParams) -> Vec<BMask> {
    if p.d == p.m {
        return vec![bmask_bit(1)];
    }
    let mut cells = Vec::new();
    if p.alpha == 0 {
        for j1 in 2..=(p.d + 1) {
            let mut idx = Vec::with_capacity(2 * p.t);
            for r in 1..=p.t {
                idx.push(p.i_r(r));
                idx.push(p.j_r(j1, r));
            }
            cells.push(bmask_from_indices(&idx));
        }
    } else {
        let j1 = p.d - p.alpha + 2;
        let mut idx = Vec::with_capacity(2 * p.t + 1);
        for r in 1..=p.t {
            idx.push(p.i_r(r));
            idx.push(p.j_r(j1, r));
        }
        idx.push(p.i_r(p.t + 1));
        cells.push(bmask_from_indices(&idx));
    }
    cells.sort_unstable();
    cells
}

/// A wedge of spheres, recorded as (dimension, multiplicity) pairs; the empty
/// wedge is a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomotopyPrediction {
    spheres: Vec<(usize, usize)>,
}

impl HomotopyPrediction {
    pub fn point() -> Self {
        HomotopyPrediction { spheres: vec![] }
    }

    pub fn wedge(dim: usize, count: usize) -> Self {
        assert!(count >= 1);
        HomotopyPrediction {
            spheres: vec![(dim, count)],
        }
    }

    pub fn spheres(&self) -> &[(usize, usize)] {
        &self.spheres
    }

    /// Expected reduced Betti numbers: multiplicity per sphere dimension.
    pub fn betti(&self) -> std::collections::BTreeMap<usize, usize> {
        self.spheres.iter().copied().collect()
    }

    pub fn reduced_euler(&self) -> i64 {
        self.spheres
            .iter()
            .map(|&(dim, count)| {
                let sign = if dim % 2 == 0 { 1i64 } else { -1 };
                sign * count as i64
            })
            .sum()
    }
}

impl fmt::Display for HomotopyPrediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.spheres.is_empty() {
            return write!(f, "point");
        }
        let mut parts = Vec::new();
        for &(dim, count) in &self.spheres {
            for _ in 0..count {
                parts.push(format!("S^{dim}"));
            }
        }
        write!(f, "{}", parts.join(" v "))
    }
}

/// Predicted homotopy type of `Ind(G_m^d)`: `d` copies of `S^{2t-1}` when
/// `alpha = 0`, one copy of `S^{2t}` otherwise.
pub fn predicted_homotopy(p: &InstanceParams) -> HomotopyPrediction {
    if p.alpha == 0 {
        HomotopyPrediction::wedge(2 * p.t - 1, p.d)
    } else {
        HomotopyPrediction::wedge(2 * p.t, 1)
    }
}

/// Kozlov's homotopy type of `Ind(C_r)`: two copies of `S^{k-1}` when
/// `r = 3k`, one copy when `r = 3k ± 1`.
pub fn kozlov_predicted(r: usize) -> Result<HomotopyPrediction, TheoryError> {
    if r < 3 {
        return Err(TheoryError::CycleTooShort(r));
    }
    Ok(match r % 3 {
        0 => HomotopyPrediction::wedge(r / 3 - 1, 2),
        1 => HomotopyPrediction::wedge(r / 3 - 1, 1),
        _ => HomotopyPrediction::wedge((r + 1) / 3 - 1, 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: usize, d: usize) -> InstanceParams {
        InstanceParams::new(m, d).unwrap()
    }

    #[test]
    fn decomposition_is_canonical() {
        for m in 1..=16 {
            for d in 1..=m {
                let p = params(m, d);
                assert_eq!(p.t * (d + 1) + p.alpha, m);
                assert!(p.alpha <= d);
            }
        }
        assert!(InstanceParams::new(3, 4).is_err());
        assert!(InstanceParams::new(0, 0).is_err());
    }

    #[test]
    fn b_set_examples() {
        let p = params(5, 2);
        assert_eq!(b_set(&p, 1).unwrap(), bmask_from_indices(&[1, 2, 3]));
        assert_eq!(b_set(&p, 4).unwrap(), bmask_from_indices(&[4, 5, 1]));
        let p = params(4, 4);
        assert_eq!(b_set(&p, 1).unwrap(), 0);
        assert!(b_set(&p, 0).is_err());
        assert!(b_set(&p, 5).is_err());
    }

    #[test]
    fn pointed_containment_examples() {
        let p = params(5, 2);
        assert!(pointed_contained(&p, bmask_from_indices(&[1, 3]), 1).unwrap());
        // Plain containment holds but the basepoint b_1 is missing.
        assert!(!pointed_contained(&p, bmask_from_indices(&[2, 3]), 1).unwrap());
        assert!(!pointed_contained(&p, 0, 1).unwrap());
    }

    #[test]
    fn in_m_examples() {
        let p = params(5, 2);
        assert!(!in_m(&p, bmask_from_indices(&[1, 3])).unwrap());
        assert!(in_m(&p, bmask_from_indices(&[1, 3, 4])).unwrap());
        assert_eq!(in_m(&p, 0), Err(TheoryError::EmptySigma));
        // d = m: all blocks empty, every nonempty sigma is in M.
        let p = params(4, 4);
        for sigma in 1u64..(1 << 4) {
            assert!(in_m(&p, sigma).unwrap());
        }
    }

    #[test]
    fn extension_examples() {
        let p = params(5, 2);
        assert!(extension_exists(&p, bmask_from_indices(&[1, 2])));
        assert!(!extension_exists(&p, bmask_from_indices(&[1, 3, 4])));
        for m in 2..=10 {
            for d in 1..(m) {
                assert!(extension_exists(&params(m, d), bmask_bit(1)));
            }
        }
    }

    #[test]
    fn pointed_and_plain_containment_agree_existentially() {
        for m in 1..=10 {
            for d in 1..=m {
                let p = params(m, d);
                let blocks: Vec<BMask> = (1..=m).map(|s| b_set(&p, s).unwrap()).collect();
                for sigma in 1u64..(1 << m) {
                    let plain = blocks.iter().any(|&b| sigma & !b == 0);
                    let pointed = (1..=m).any(|s| pointed_contained(&p, sigma, s).unwrap());
                    assert_eq!(plain, pointed, "m={m} d={d} sigma={sigma:b}");
                }
            }
        }
    }

    #[test]
    fn extension_iff_pointed_containment() {
        for m in 1..=10 {
            for d in 1..=m {
                let p = params(m, d);
                for sigma in 1u64..(1 << m) {
                    let pointed = (1..=m).any(|s| pointed_contained(&p, sigma, s).unwrap());
                    assert_eq!(
                        extension_exists(&p, sigma),
                        pointed,
                        "m={m} d={d} sigma={sigma:b}"
                    );
                }
            }
        }
    }

    #[test]
    fn satisfies_p_examples() {
        let p = params(7, 2);
        assert!(satisfies_p(&p, bmask_from_indices(&[1, 3, 4, 6, 7]), 2).unwrap());
        let p = params(6, 2);
        assert!(satisfies_p(&p, bmask_from_indices(&[1, 2, 4, 5]), 2).unwrap());
        assert!(!satisfies_p(&p, bmask_from_indices(&[1, 2]), 2).unwrap());
        assert_eq!(
            satisfies_p(&p, bmask_from_indices(&[1, 2]), 3),
            Err(TheoryError::BadLevel { l: 3, t: 2 })
        );
    }

    #[test]
    fn predicted_cells_examples() {
        let p = params(3, 2);
        assert_eq!(
            predicted_critical_cells(&p),
            vec![bmask_from_indices(&[1, 2]), bmask_from_indices(&[1, 3])]
        );
        let p = params(6, 2);
        assert_eq!(
            predicted_critical_cells(&p),
            vec![
                bmask_from_indices(&[1, 2, 4, 5]),
                bmask_from_indices(&[1, 3, 4, 6])
            ]
        );
        let p = params(7, 2);
        assert_eq!(
            predicted_critical_cells(&p),
            vec![bmask_from_indices(&[1, 3, 4, 6, 7])]
        );
        let p = params(5, 5);
        assert_eq!(predicted_critical_cells(&p), vec![bmask_bit(1)]);
    }

    #[test]
    fn predicted_cell_dimensions() {
        for m in 2..=14 {
            for d in 1..m {
                let p = params(m, d);
                let cells = predicted_critical_cells(&p);
                if p.alpha == 0 {
                    assert_eq!(cells.len(), d);
                    for &c in &cells {
                        assert_eq!(c.count_ones() as usize, 2 * p.t);
                    }
                } else {
                    assert_eq!(cells.len(), 1);
                    assert_eq!(cells[0].count_ones() as usize, 2 * p.t + 1);
                }
            }
        }
    }

    #[test]
    fn homotopy_predictions() {
        assert_eq!(predicted_homotopy(&params(6, 2)), HomotopyPrediction::wedge(3, 2));
        assert_eq!(predicted_homotopy(&params(7, 2)), HomotopyPrediction::wedge(4, 1));
        assert_eq!(predicted_homotopy(&params(5, 5)), HomotopyPrediction::wedge(0, 1));
        assert_eq!(predicted_homotopy(&params(6, 2)).to_string(), "S^3 v S^3");
    }

    #[test]
    fn kozlov_cases() {
        assert_eq!(kozlov_predicted(3).unwrap(), HomotopyPrediction::wedge(0, 2));
        assert_eq!(kozlov_predicted(6).unwrap(), HomotopyPrediction::wedge(1, 2));
        assert_eq!(kozlov_predicted(7).unwrap(), HomotopyPrediction::wedge(1, 1));
        assert_eq!(kozlov_predicted(8).unwrap(), HomotopyPrediction::wedge(2, 1));
        assert!(kozlov_predicted(2).is_err());
    }

    #[test]
    fn theorems_agree_on_cycles() {
        // G_m^2 is C_2m, so the two predictions must coincide.
        for m in 3..=10 {
            let p = params(m, 2);
            assert_eq!(predicted_homotopy(&p), kozlov_predicted(2 * m).unwrap(), "m={m}");
        }
    }

    #[test]
    fn face_conversion_round_trip() {
        let sigma = bmask_from_indices(&[1, 3, 4]);
        let f = bmask_to_face(sigma, 5);
        assert_eq!(face_to_bmask(f, 5), Some(sigma));
        assert_eq!(face_to_bmask(Face(0b1), 5), None);
        assert_eq!(bmask_labels(sigma), vec!["b1", "b3", "b4"]);
    }
}
