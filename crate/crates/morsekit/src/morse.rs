//! Sequential element matching on the face poset, acyclicity verification,
//! and the gradient-path chain complex of the resulting critical cells.
//!
//! The construction runs one phase per vertex `x` in a fixed order: against
//! the residual set of still-unmatched faces, every face `σ` with `x ∉ σ`
//! and `σ ∪ {x}` still unmatched is paired with `σ ∪ {x}`. Faces surviving
//! all phases are the critical cells.

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use crate::complex::{Complex, Face};
use crate::homology::IntMatrix;
use crate::theory::HomotopyPrediction;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MorseError {
    #[error("order must be a permutation of the {expected} graph vertices")]
    NotAPermutation { expected: usize },
    #[error("matching is not acyclic")]
    NotAcyclic,
    #[error("matching is not a partial matching: {0}")]
    NotAMatching(String),
    #[error("integer overflow while accumulating gradient paths")]
    Overflow,
}

/// Whether a face was removed as the lower or upper member of its pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Down,
    Up,
}

/// A partial matching on the face poset plus the phase each face died in.
#[derive(Debug, Clone)]
pub struct MorseMatching {
    /// Matched pairs `(σ, σ ∪ {x})`, in the order they were formed.
    pairs: Vec<(Face, Face)>,
    /// For every non-critical face: the phase vertex and the face's role.
    phase_trace: HashMap<Face, (usize, Role)>,
    /// Unmatched faces, sorted by (cardinality, mask).
    critical: Vec<Face>,
}

impl MorseMatching {
    /// Assemble a matching from explicit pairs, without running the engine.
    /// Used to feed hand-built (possibly invalid) matchings to the verifiers.
    pub fn from_pairs(pairs: &[(Face, Face)], c: &Complex) -> MorseMatching {
        let mut phase_trace = HashMap::new();
        for &(lo, hi) in pairs {
            let x = (hi.0 ^ lo.0).trailing_zeros() as usize;
            phase_trace.insert(lo, (x, Role::Down));
            phase_trace.insert(hi, (x, Role::Up));
        }
        let mut critical: Vec<Face> = c
            .faces()
            .iter()
            .copied()
            .filter(|f| !phase_trace.contains_key(f))
            .collect();
        critical.sort_unstable_by_key(|f| (f.card(), f.0));
        MorseMatching {
            pairs: pairs.to_vec(),
            phase_trace,
            critical,
        }
    }

    pub fn pairs(&self) -> &[(Face, Face)] {
        &self.pairs
    }

    pub fn critical(&self) -> &[Face] {
        &self.critical
    }

    /// Phase vertex and role for a non-critical face; `None` if critical.
    pub fn phase_of(&self, f: Face) -> Option<(usize, Role)> {
        self.phase_trace.get(&f).copied()
    }

    pub fn is_critical(&self, f: Face) -> bool {
        !self.phase_trace.contains_key(&f)
    }

    /// The up-partner of a face matched down, if any.
    pub fn up_partner(&self, f: Face) -> Option<Face> {
        match self.phase_trace.get(&f) {
            Some(&(x, Role::Down)) => Some(f.insert(x)),
            _ => None,
        }
    }
}

/// Run the sequential element matching over `c` with the given vertex order.
pub fn sequential_element_matching(
    c: &Complex,
    order: &[usize],
) -> Result<MorseMatching, MorseError> {
    let n = c.graph().vertex_count();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
        return Err(MorseError::NotAPermutation { expected: n });
    }

    let faces = c.faces();
    let mut alive = vec![true; faces.len()];
    let mut pairs = Vec::new();
    let mut phase_trace = HashMap::new();

    for &x in order {
        // Faces are sorted by cardinality, so the down member of each pair is
        // visited before its up partner; pairs within a phase are disjoint.
        for i in 0..faces.len() {
            if !alive[i] || faces[i].contains(x) {
                continue;
            }
            let sigma = faces[i];
            let up = sigma.insert(x);
            if let Some(j) = c.face_index(up) {
                if alive[j as usize] {
                    alive[i] = false;
                    alive[j as usize] = false;
                    pairs.push((sigma, up));
                    phase_trace.insert(sigma, (x, Role::Down));
                    phase_trace.insert(up, (x, Role::Up));
                }
            }
        }
    }

    let mut critical: Vec<Face> = faces
        .iter()
        .zip(alive.iter())
        .filter(|(_, &a)| a)
        .map(|(&f, _)| f)
        .collect();
    critical.sort_unstable_by_key(|f| (f.card(), f.0));

    Ok(MorseMatching {
        pairs,
        phase_trace,
        critical,
    })
}

/// The graph's canonical vertex order `0..n`.
pub fn canonical_order(c: &Complex) -> Vec<usize> {
    (0..c.graph().vertex_count()).collect()
}

/// Check the partial-matching axioms: every pair is a cover relation between
/// faces of the complex, and no face belongs to two pairs. Returns the first
/// violation found.
pub fn check_partial_matching(mm: &MorseMatching, c: &Complex) -> Result<(), String> {
    let mut used: HashMap<Face, usize> = HashMap::new();
    for (k, &(lo, hi)) in mm.pairs().iter().enumerate() {
        if !c.contains(lo) || !c.contains(hi) {
            return Err(format!("pair #{k}: not both faces of the complex"));
        }
        if !lo.is_subset(hi) || hi.card() != lo.card() + 1 {
            return Err(format!("pair #{k}: not a cover relation"));
        }
        for f in [lo, hi] {
            if let Some(prev) = used.insert(f, k) {
                return Err(format!("face occurs in pairs #{prev} and #{k}"));
            }
        }
    }
    Ok(())
}

pub fn verify_partial_matching(mm: &MorseMatching, c: &Complex) -> bool {
    check_partial_matching(mm, c).is_ok()
}

/// Out-neighbors in the modified Hasse diagram: matched cover relations are
/// directed upward, all other cover relations downward.
fn hasse_out_edges(mm: &MorseMatching, c: &Complex, f: Face, out: &mut Vec<u32>) {
    out.clear();
    if let Some(up) = mm.up_partner(f) {
        if let Some(j) = c.face_index(up) {
            out.push(j);
        }
    }
    let matched_up_vertex = match mm.phase_of(f) {
        Some((x, Role::Up)) => Some(x),
        _ => None,
    };
    for v in f.vertices() {
        if matched_up_vertex == Some(v) {
            continue; // this cover is the matched edge, directed upward
        }
        if let Some(j) = c.face_index(f.remove(v)) {
            out.push(j);
        }
    }
}

/// True iff the modified Hasse diagram has no directed cycle.
pub fn verify_acyclic(mm: &MorseMatching, c: &Complex) -> bool {
    let faces = c.faces();
    let mut indeg = vec![0u32; faces.len()];
    let mut out = Vec::new();
    for &f in faces {
        hasse_out_edges(mm, c, f, &mut out);
        for &j in &out {
            indeg[j as usize] += 1;
        }
    }
    let mut queue: VecDeque<u32> = indeg
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| i as u32)
        .collect();
    let mut seen = 0usize;
    while let Some(i) = queue.pop_front() {
        seen += 1;
        hasse_out_edges(mm, c, faces[i as usize], &mut out);
        for &j in &out {
            indeg[j as usize] -= 1;
            if indeg[j as usize] == 0 {
                queue.push_back(j);
            }
        }
    }
    seen == faces.len()
}

/// Chain complex on the critical cells with gradient-path boundary maps.
#[derive(Debug, Clone)]
pub struct MorseChainComplex {
    /// Critical cells grouped by dimension, each group sorted by mask.
    cells: BTreeMap<isize, Vec<Face>>,
    /// `boundaries[p]` maps dimension-p chains to dimension-(p-1) chains.
    boundaries: BTreeMap<isize, IntMatrix>,
}

impl MorseChainComplex {
    pub fn cells(&self) -> &BTreeMap<isize, Vec<Face>> {
        &self.cells
    }

    pub fn boundary(&self, p: isize) -> Option<&IntMatrix> {
        self.boundaries.get(&p)
    }

    pub fn cell_count(&self) -> usize {
        self.cells.values().map(|v| v.len()).sum()
    }
}

/// Incidence number of `(σ, σ \ {v})`: (-1)^(position of v in σ).
fn incidence(sigma: Face, v: usize) -> i128 {
    let pos = (sigma.0 & ((1u64 << v) - 1)).count_ones();
    if pos % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Build the Morse chain complex of an acyclic matching.
pub fn morse_chain_complex(c: &Complex, mm: &MorseMatching) -> Result<MorseChainComplex, MorseError> {
    check_partial_matching(mm, c).map_err(MorseError::NotAMatching)?;
    if !verify_acyclic(mm, c) {
        return Err(MorseError::NotAcyclic);
    }

    let mut cells: BTreeMap<isize, Vec<Face>> = BTreeMap::new();
    for &f in mm.critical() {
        cells.entry(f.dim()).or_default().push(f);
    }
    for group in cells.values_mut() {
        group.sort_unstable_by_key(|f| f.0);
    }

    let mut boundaries = BTreeMap::new();
    let dims: Vec<isize> = cells.keys().copied().collect();
    for &p in &dims {
        if !cells.contains_key(&(p - 1)) {
            continue;
        }
        let upper = &cells[&p];
        let lower = &cells[&(p - 1)];
        let mut mat = IntMatrix::zeros(lower.len(), upper.len());
        let topo = flow_topo_order(c, mm, p - 1);
        let lower_pos: HashMap<Face, usize> =
            lower.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        for (col, &sigma) in upper.iter().enumerate() {
            let mut weight: HashMap<Face, i128> = HashMap::new();
            for v in sigma.vertices() {
                *weight.entry(sigma.remove(v)).or_insert(0) += incidence(sigma, v);
            }
            for &rho in &topo {
                let val = match weight.get(&rho) {
                    Some(&w) if w != 0 => w,
                    _ => continue,
                };
                if let Some(up) = mm.up_partner(rho) {
                    let x = (up.0 ^ rho.0).trailing_zeros() as usize;
                    let s0 = incidence(up, x);
                    for w in up.vertices() {
                        if w == x {
                            continue;
                        }
                        let step = val
                            .checked_mul(-s0 * incidence(up, w))
                            .ok_or(MorseError::Overflow)?;
                        let slot = weight.entry(up.remove(w)).or_insert(0);
                        *slot = slot.checked_add(step).ok_or(MorseError::Overflow)?;
                    }
                }
            }
            for (&tau, &w) in &weight {
                if w != 0 {
                    if let Some(&row) = lower_pos.get(&tau) {
                        mat.set(row, col, w);
                    }
                }
            }
        }
        boundaries.insert(p, mat);
    }

    Ok(MorseChainComplex { cells, boundaries })
}

/// Topological order of the gradient-flow digraph restricted to faces of
/// dimension `p`: an edge `ρ → ρ'` whenever `ρ` is matched up to `υ = ρ ∪ {x}`
/// and `ρ'` is a facet of `υ` other than `ρ`. Acyclicity of the matching makes
/// this digraph acyclic.
fn flow_topo_order(c: &Complex, mm: &MorseMatching, p: isize) -> Vec<Face> {
    let level: Vec<Face> = c
        .faces()
        .iter()
        .copied()
        .filter(|f| f.dim() == p)
        .collect();
    let pos: HashMap<Face, usize> = level.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let mut indeg = vec![0u32; level.len()];
    let out_edges = |rho: Face, out: &mut Vec<usize>| {
        out.clear();
        if let Some(up) = mm.up_partner(rho) {
            let x = (up.0 ^ rho.0).trailing_zeros() as usize;
            for w in up.vertices() {
                if w != x {
                    if let Some(&j) = pos.get(&up.remove(w)) {
                        out.push(j);
                    }
                }
            }
        }
    };
    let mut out = Vec::new();
    for &rho in &level {
        out_edges(rho, &mut out);
        for &j in &out {
            indeg[j] += 1;
        }
    }
    let mut queue: VecDeque<usize> = indeg
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| i)
        .collect();
    let mut order = Vec::with_capacity(level.len());
    while let Some(i) = queue.pop_front() {
        order.push(level[i]);
        out_edges(level[i], &mut out);
        for &j in &out {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    debug_assert_eq!(order.len(), level.len());
    order
}

/// Result of reading the homotopy type off the critical cells alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WedgeInference {
    Wedge(HomotopyPrediction),
    /// Critical cells in multiple dimensions: counts alone decide nothing.
    Indeterminate,
}

/// If all critical cells share one dimension `p`, the complex is a wedge of
/// `|C|` spheres of dimension `p`.
pub fn infer_wedge(mm: &MorseMatching) -> WedgeInference {
    let critical = mm.critical();
    if critical.is_empty() {
        return WedgeInference::Wedge(HomotopyPrediction::point());
    }
    let p = critical[0].dim();
    if critical.iter().any(|f| f.dim() != p) {
        return WedgeInference::Indeterminate;
    }
    debug_assert!(p >= 0, "the empty face must be matched");
    WedgeInference::Wedge(HomotopyPrediction::wedge(p as usize, critical.len()))
}
