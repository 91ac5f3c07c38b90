//! Independence complexes and their face posets.
//!
//! Faces are bitmasks over the owning graph's canonical vertex order; the
//! full face list (including the empty face) is materialized and sorted by
//! (dimension, mask) so that per-dimension slices come out contiguous.

use std::collections::HashMap;

use thiserror::Error;

use crate::graphs::Graph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("face count {count} exceeds the budget of {budget}")]
    BudgetExceeded { count: usize, budget: usize },
    #[error("face {0:?} does not belong to the complex")]
    UnknownFace(Face),
}

/// A face stored as a vertex bitmask. The empty face is `Face(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face(pub u64);

impl Face {
    pub const EMPTY: Face = Face(0);

    /// Dimension: cardinality minus one; the empty face has dimension -1.
    pub fn dim(self) -> isize {
        self.0.count_ones() as isize - 1
    }

    pub fn card(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, v: usize) -> bool {
        self.0 & (1 << v) != 0
    }

    pub fn insert(self, v: usize) -> Face {
        Face(self.0 | (1 << v))
    }

    pub fn remove(self, v: usize) -> Face {
        Face(self.0 & !(1 << v))
    }

    pub fn is_subset(self, other: Face) -> bool {
        self.0 & !other.0 == 0
    }

    /// Vertices in increasing canonical order.
    pub fn vertices(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(v)
            }
        })
    }

    pub fn labels(self, g: &Graph) -> Vec<String> {
        self.vertices().map(|v| g.label(v).to_string()).collect()
    }
}

/// The full set of faces of an independence complex, with index lookup.
#[derive(Debug, Clone)]
pub struct Complex {
    graph: Graph,
    faces: Vec<Face>,
    index: HashMap<Face, u32>,
    f_vector: Vec<usize>,
}

pub const DEFAULT_FACE_BUDGET: usize = 2_000_000;

/// Count independent sets of `g` (including the empty set), aborting early
/// once the count passes `limit`.
pub fn count_independent_sets(g: &Graph, limit: usize) -> usize {
    let n = g.vertex_count();
    let mut count = 0usize;
    let mut stack: Vec<(u64, usize)> = vec![(0u64, 0)];
    while let Some((mask, start)) = stack.pop() {
        count += 1;
        if count > limit {
            return count;
        }
        for v in start..n {
            if g.neighbors(v) & mask == 0 {
                stack.push((mask | (1 << v), v + 1));
            }
        }
    }
    count
}

/// Enumerate the independence complex of `g` within a face-count budget.
pub fn independence_complex_with_budget(g: &Graph, budget: usize) -> Result<Complex, ComplexError> {
    let count = count_independent_sets(g, budget);
    if count > budget {
        return Err(ComplexError::BudgetExceeded { count, budget });
    }
    let n = g.vertex_count();
    let mut faces = Vec::with_capacity(count);
    // Depth-first over vertices in canonical order.
    let mut stack: Vec<(u64, usize)> = vec![(0u64, 0)];
    while let Some((mask, start)) = stack.pop() {
        faces.push(Face(mask));
        for v in start..n {
            if g.neighbors(v) & mask == 0 {
                stack.push((mask | (1 << v), v + 1));
            }
        }
    }
    faces.sort_unstable_by_key(|f| (f.card(), f.0));
    let mut index = HashMap::with_capacity(faces.len());
    let mut f_vector = Vec::new();
    for (i, &f) in faces.iter().enumerate() {
        index.insert(f, i as u32);
        let c = f.card();
        if f_vector.len() <= c {
            f_vector.resize(c + 1, 0);
        }
        f_vector[c] += 1;
    }
    Ok(Complex {
        graph: g.clone(),
        faces,
        index,
        f_vector,
    })
}

pub fn independence_complex(g: &Graph) -> Result<Complex, ComplexError> {
    independence_complex_with_budget(g, DEFAULT_FACE_BUDGET)
}

impl Complex {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// All faces, sorted by (cardinality, mask). Index 0 is the empty face.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn contains(&self, f: Face) -> bool {
        self.index.contains_key(&f)
    }

    pub fn face_index(&self, f: Face) -> Option<u32> {
        self.index.get(&f).copied()
    }

    /// Top dimension of the complex (-1 for the complex `{∅}`).
    pub fn dim(&self) -> isize {
        self.f_vector.len() as isize - 2
    }

    /// Downward covers of `f`: every face obtained by deleting one vertex.
    pub fn covers(&self, f: Face) -> Result<Vec<Face>, ComplexError> {
        if !self.contains(f) {
            return Err(ComplexError::UnknownFace(f));
        }
        Ok(f.vertices().map(|v| f.remove(v)).collect())
    }

    /// Face counts indexed by cardinality: entry 0 counts the empty face.
    pub fn f_vector(&self) -> &[usize] {
        &self.f_vector
    }

    /// The contiguous slice of faces of dimension `p` (cardinality `p + 1`);
    /// `p = -1` yields the empty face.
    pub fn faces_of_dim(&self, p: isize) -> &[Face] {
        if p < -1 {
            return &[];
        }
        let card = (p + 1) as usize;
        if card >= self.f_vector.len() {
            return &[];
        }
        let start: usize = self.f_vector[..card].iter().sum();
        &self.faces[start..start + self.f_vector[card]]
    }

    /// Reduced Euler characteristic: alternating sum including the empty face,
    /// chi = sum_{p >= -1} (-1)^p f_p with f_{-1} = 1.
    pub fn reduced_euler(&self) -> i64 {
        let mut chi = 0i64;
        for (card, &count) in self.f_vector.iter().enumerate() {
            let p = card as i64 - 1;
            let sign = if p.rem_euclid(2) == 0 { 1 } else { -1 };
            chi += sign * count as i64;
        }
        chi
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_custom, build_cycle, build_gmd};
    use proptest::prelude::*;

    fn single_edge() -> Graph {
        build_custom(vec!["a".into(), "b".into()], &[(0, 1)]).unwrap()
    }

    #[test]
    fn single_edge_faces() {
        let c = independence_complex(&single_edge()).unwrap();
        assert_eq!(c.faces(), &[Face(0b00), Face(0b01), Face(0b10)]);
        assert_eq!(c.f_vector(), &[1, 2]);
        assert_eq!(c.reduced_euler(), 1); // S^0
    }

    #[test]
    fn hollow_square() {
        // G_2^1 is two disjoint edges a1-b1, a2-b2; Ind is the hollow square.
        let g = build_gmd(2, 1).unwrap();
        let c = independence_complex(&g).unwrap();
        assert_eq!(c.face_count(), 9);
        assert_eq!(c.f_vector(), &[1, 4, 4]);
        assert_eq!(c.reduced_euler(), -1); // S^1
    }

    #[test]
    fn triangle_has_no_edges() {
        let c = independence_complex(&build_cycle(3).unwrap()).unwrap();
        assert_eq!(c.f_vector(), &[1, 3]);
        assert_eq!(c.reduced_euler(), 2); // two copies of S^0
    }

    #[test]
    fn full_simplex_is_contractible() {
        let g = build_custom(vec!["x".into(), "y".into(), "z".into()], &[]).unwrap();
        let c = independence_complex(&g).unwrap();
        assert_eq!(c.face_count(), 8);
        assert_eq!(c.reduced_euler(), 0);
    }

    #[test]
    fn covers_of_faces() {
        let g = build_gmd(3, 2).unwrap(); // C_6
        let c = independence_complex(&g).unwrap();
        let b1 = Face(0).insert(3);
        let b3 = Face(0).insert(5);
        let sigma = Face(0).insert(3).insert(5);
        assert!(c.contains(sigma));
        let mut got = c.covers(sigma).unwrap();
        got.sort();
        assert_eq!(got, vec![b1, b3]);
        assert_eq!(c.covers(Face::EMPTY).unwrap(), vec![]);
        let a1 = Face(0).insert(0);
        assert_eq!(c.covers(a1).unwrap(), vec![Face::EMPTY]);
        let bogus = Face(0b001001); // {a1, b1}: adjacent, not a face
        assert_eq!(c.covers(bogus), Err(ComplexError::UnknownFace(bogus)));
    }

    #[test]
    fn downward_closure() {
        for (m, d) in [(4, 2), (5, 3), (6, 2)] {
            let g = build_gmd(m, d).unwrap();
            let c = independence_complex(&g).unwrap();
            for &f in c.faces() {
                for v in f.vertices() {
                    assert!(c.contains(f.remove(v)));
                }
            }
            let total: usize = c.f_vector().iter().sum();
            assert_eq!(total, c.face_count());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = build_gmd(6, 1).unwrap(); // 3^6 = 729 faces
        let err = independence_complex_with_budget(&g, 100).unwrap_err();
        match err {
            ComplexError::BudgetExceeded { count, budget } => {
                assert!(count > 100);
                assert_eq!(budget, 100);
            }
            other => panic!("wrong error: {other:?}"),
        }
        assert!(independence_complex_with_budget(&g, 729).is_ok());
    }

    proptest! {
        // Membership agrees with independence in the graph.
        #[test]
        fn membership_matches_independence(mask in 0u64..(1 << 10)) {
            let g = build_gmd(5, 2).unwrap();
            let c = independence_complex(&g).unwrap();
            prop_assert_eq!(c.contains(Face(mask)), g.is_independent(mask));
        }
    }
}
