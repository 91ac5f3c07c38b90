//! Graph families: the circulant bipartite graphs `G_m^d`, cycles, complete
//! bipartite graphs, and the categorical product.
//!
//! Vertices are stored as indices `0..n` in a fixed canonical order; for the
//! bipartite families this is `a_1 < ... < a_m < b_1 < ... < b_m`. Adjacency
//! is a bitmask per vertex, which keeps independence tests O(1).

use std::fmt;

use serde_json::json;
use thiserror::Error;

/// Hard cap on vertex count so faces fit in a `u64` bitmask.
pub const MAX_VERTICES: usize = 64;

/// Exhaustive isomorphism search is only offered up to this many vertices.
pub const ISO_SEARCH_BOUND: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid parameters for G_m^d: require 1 <= d <= m, got m={m}, d={d}")]
    InvalidGmd { m: usize, d: usize },
    #[error("cycle length must be at least 3, got {0}")]
    CycleTooShort(usize),
    #[error("complete bipartite parts must be positive, got ({p}, {q})")]
    EmptyPart { p: usize, q: usize },
    #[error("graph would have {0} vertices, exceeding the limit of {MAX_VERTICES}")]
    TooManyVertices(usize),
    #[error("categorical product requires nonempty factors")]
    EmptyFactor,
    #[error("isomorphism search limited to {ISO_SEARCH_BOUND} vertices, got {0}")]
    IsoTooLarge(usize),
}

/// Which side of the bipartition a labeled vertex lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

/// A labeled vertex `a_i` or `b_i` of a bipartite family member, `i` in `[1, m]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub side: Side,
    pub index: usize,
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::A => write!(f, "a{}", self.index),
            Side::B => write!(f, "b{}", self.index),
        }
    }
}

/// Family tag recording how a graph was constructed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Gmd { m: usize, d: usize },
    Cycle { r: usize },
    CompleteBipartite { p: usize, q: usize },
    Product,
    Custom,
}

/// An undirected graph on at most 64 vertices, immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    adj: Vec<u64>,
    family: Family,
}

/// Reduce a 1-based index modulo `m` into `[1, m]` (residue 0 maps to `m`).
/// All subscript arithmetic in the bipartite families goes through here.
pub fn norm_index(i: isize, m: usize) -> usize {
    let m = m as isize;
    let r = ((i - 1).rem_euclid(m)) + 1;
    r as usize
}

impl Graph {
    fn new(labels: Vec<String>, family: Family) -> Result<Self, GraphError> {
        if labels.len() > MAX_VERTICES {
            return Err(GraphError::TooManyVertices(labels.len()));
        }
        let n = labels.len();
        Ok(Graph {
            labels,
            adj: vec![0u64; n],
            family,
        })
    }

    fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert_ne!(u, v);
        self.adj[u] |= 1 << v;
        self.adj[v] |= 1 << u;
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Neighborhood of `v` as a bitmask.
    pub fn neighbors(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn is_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] & (1 << v) != 0
    }

    /// All edges as index pairs `(u, v)` with `u < v`, in canonical order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.vertex_count();
        let mut out = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if self.is_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// True iff no two vertices of `mask` are adjacent.
    pub fn is_independent(&self, mask: u64) -> bool {
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.adj[v] & mask != 0 {
                return false;
            }
        }
        true
    }

    /// Canonical index of the labeled vertex in a `gmd` or complete bipartite graph.
    pub fn vertex_id(&self, v: Vertex) -> usize {
        let m = match self.family {
            Family::Gmd { m, .. } => m,
            Family::CompleteBipartite { p, .. } => p,
            _ => panic!("vertex_id is only defined for bipartite-labeled families"),
        };
        match v.side {
            Side::A => v.index - 1,
            Side::B => m + v.index - 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<_> = self
            .edges()
            .iter()
            .map(|&(u, v)| json!([self.labels[u], self.labels[v]]))
            .collect();
        let mut obj = serde_json::Map::new();
        match &self.family {
            Family::Gmd { m, d } => {
                obj.insert("family".into(), json!("gmd"));
                obj.insert("m".into(), json!(m));
                obj.insert("d".into(), json!(d));
            }
            Family::Cycle { r } => {
                obj.insert("family".into(), json!("cycle"));
                obj.insert("r".into(), json!(r));
            }
            Family::CompleteBipartite { p, q } => {
                obj.insert("family".into(), json!("complete_bipartite"));
                obj.insert("p".into(), json!(p));
                obj.insert("q".into(), json!(q));
            }
            Family::Product => {
                obj.insert("family".into(), json!("product"));
            }
            Family::Custom => {
                obj.insert("family".into(), json!("custom"));
            }
        }
        obj.insert("vertices".into(), json!(self.labels));
        obj.insert("edges".into(), serde_json::Value::Array(edges));
        serde_json::Value::Object(obj)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph {\n");
        for l in &self.labels {
            s.push_str(&format!("  \"{l}\";\n"));
        }
        for (u, v) in self.edges() {
            s.push_str(&format!("  \"{}\" -- \"{}\";\n", self.labels[u], self.labels[v]));
        }
        s.push_str("}\n");
        s
    }

    /// Sorted degree sequence, used as a cheap isomorphism invariant.
    fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<_> = (0..self.vertex_count()).map(|v| self.degree(v)).collect();
        d.sort_unstable();
        d
    }
}

/// Build a graph from explicit labels and label-index edge pairs.
pub fn build_custom(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
    let mut g = Graph::new(labels, Family::Custom)?;
    for &(u, v) in edges {
        g.add_edge(u, v);
    }
    Ok(g)
}

/// The d-regular circulant bipartite graph on `A = {a_1..a_m}`, `B = {b_1..b_m}`
/// with `N(a_i) = {b_i, b_{i+1}, ..., b_{i+d-1}}` (subscripts mod m into `[1, m]`).
pub fn build_gmd(m: usize, d: usize) -> Result<Graph, GraphError> {
    if m < 1 || d < 1 || d > m {
        return Err(GraphError::InvalidGmd { m, d });
    }
    let mut labels = Vec::with_capacity(2 * m);
    for i in 1..=m {
        labels.push(format!("a{i}"));
    }
    for i in 1..=m {
        labels.push(format!("b{i}"));
    }
    let mut g = Graph::new(labels, Family::Gmd { m, d })?;
    for i in 1..=m {
        for off in 0..d {
            let j = norm_index((i + off) as isize, m);
            g.add_edge(i - 1, m + j - 1);
        }
    }
    Ok(g)
}

/// Cycle graph C_r on vertices `1..r`.
pub fn build_cycle(r: usize) -> Result<Graph, GraphError> {
    if r < 3 {
        return Err(GraphError::CycleTooShort(r));
    }
    let labels = (1..=r).map(|i| format!("v{i}")).collect();
    let mut g = Graph::new(labels, Family::Cycle { r })?;
    for i in 0..r {
        g.add_edge(i, (i + 1) % r);
    }
    Ok(g)
}

/// Complete bipartite graph K_{p,q}.
pub fn build_complete_bipartite(p: usize, q: usize) -> Result<Graph, GraphError> {
    if p < 1 || q < 1 {
        return Err(GraphError::EmptyPart { p, q });
    }
    let mut labels = Vec::with_capacity(p + q);
    for i in 1..=p {
        labels.push(format!("a{i}"));
    }
    for i in 1..=q {
        labels.push(format!("b{i}"));
    }
    let mut g = Graph::new(labels, Family::CompleteBipartite { p, q })?;
    for i in 0..p {
        for j in 0..q {
            g.add_edge(i, p + j);
        }
    }
    Ok(g)
}

/// Complete graph K_n, a convenience for the product side claims.
pub fn build_complete(n: usize) -> Result<Graph, GraphError> {
    let labels = (1..=n).map(|i| format!("v{i}")).collect();
    let mut g = Graph::new(labels, Family::Custom)?;
    for u in 0..n {
        for v in (u + 1)..n {
            g.add_edge(u, v);
        }
    }
    Ok(g)
}

/// Categorical product: `(g, h) ~ (g', h')` iff `g ~ g'` and `h ~ h'`.
pub fn categorical_product(g: &Graph, h: &Graph) -> Result<Graph, GraphError> {
    if g.vertex_count() == 0 || h.vertex_count() == 0 {
        return Err(GraphError::EmptyFactor);
    }
    let ng = g.vertex_count();
    let nh = h.vertex_count();
    let mut labels = Vec::with_capacity(ng * nh);
    for u in 0..ng {
        for x in 0..nh {
            labels.push(format!("({},{})", g.label(u), h.label(x)));
        }
    }
    let mut p = Graph::new(labels, Family::Product)?;
    for u in 0..ng {
        for x in 0..nh {
            for v in 0..ng {
                for y in 0..nh {
                    let a = u * nh + x;
                    let b = v * nh + y;
                    if a < b && g.is_edge(u, v) && h.is_edge(x, y) {
                        p.add_edge(a, b);
                    }
                }
            }
        }
    }
    Ok(p)
}

/// Exhaustive isomorphism test with degree-partition pruning.
pub fn are_isomorphic(g: &Graph, h: &Graph) -> Result<bool, GraphError> {
    let n = g.vertex_count();
    if n > ISO_SEARCH_BOUND || h.vertex_count() > ISO_SEARCH_BOUND {
        return Err(GraphError::IsoTooLarge(n.max(h.vertex_count())));
    }
    if n != h.vertex_count() {
        return Ok(false);
    }
    if g.edges().len() != h.edges().len() || g.degree_sequence() != h.degree_sequence() {
        return Ok(false);
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    Ok(extend_iso(g, h, 0, &mut map, &mut used))
}

fn extend_iso(g: &Graph, h: &Graph, u: usize, map: &mut [usize], used: &mut [bool]) -> bool {
    let n = g.vertex_count();
    if u == n {
        return true;
    }
    for cand in 0..n {
        if used[cand] || g.degree(u) != h.degree(cand) {
            continue;
        }
        let consistent = (0..u).all(|w| g.is_edge(u, w) == h.is_edge(cand, map[w]));
        if consistent {
            map[u] = cand;
            used[cand] = true;
            if extend_iso(g, h, u + 1, map, used) {
                return true;
            }
            used[cand] = false;
            map[u] = usize::MAX;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmd_rejects_bad_parameters() {
        assert!(build_gmd(0, 1).is_err());
        assert!(build_gmd(3, 0).is_err());
        assert!(build_gmd(3, 4).is_err());
    }

    #[test]
    fn gmd_neighborhoods_match_definition() {
        for m in 1..=16 {
            for d in 1..=m {
                let g = build_gmd(m, d).unwrap();
                for v in 0..g.vertex_count() {
                    assert_eq!(g.degree(v), d, "G_{m}^{d} must be {d}-regular");
                }
                // N(b_i) = {a_i, a_{i-1}, ..., a_{i-d+1}} mod m
                for i in 1..=m {
                    let bi = g.vertex_id(Vertex { side: Side::B, index: i });
                    let mut expect = 0u64;
                    for off in 0..d {
                        let j = norm_index(i as isize - off as isize, m);
                        expect |= 1 << (j - 1);
                    }
                    assert_eq!(g.neighbors(bi), expect, "N(b{i}) wrong in G_{m}^{d}");
                }
            }
        }
    }

    #[test]
    fn edge_relation_symmetric_irreflexive() {
        let graphs = vec![
            build_gmd(5, 3).unwrap(),
            build_cycle(7).unwrap(),
            build_complete_bipartite(3, 4).unwrap(),
            categorical_product(&build_complete(2).unwrap(), &build_complete(4).unwrap()).unwrap(),
        ];
        for g in &graphs {
            for u in 0..g.vertex_count() {
                assert!(!g.is_edge(u, u));
                for v in 0..g.vertex_count() {
                    assert_eq!(g.is_edge(u, v), g.is_edge(v, u));
                }
            }
        }
    }

    #[test]
    fn gmd_small_cases() {
        // G_3^2 is C_6
        let g = build_gmd(3, 2).unwrap();
        assert_eq!(g.vertex_count(), 6);
        assert!(are_isomorphic(&g, &build_cycle(6).unwrap()).unwrap());
        // d = m forces K_{m,m}
        let g = build_gmd(5, 5).unwrap();
        assert!(are_isomorphic(&g, &build_complete_bipartite(5, 5).unwrap()).unwrap());
        // G_4^3 is K_2 x K_4
        let k2 = build_complete(2).unwrap();
        let k4 = build_complete(4).unwrap();
        let prod = categorical_product(&k2, &k4).unwrap();
        assert!(are_isomorphic(&build_gmd(4, 3).unwrap(), &prod).unwrap());
    }

    #[test]
    fn cycle_basics() {
        assert!(build_cycle(2).is_err());
        let c3 = build_cycle(3).unwrap();
        assert_eq!(c3.edges().len(), 3);
        let c4 = build_cycle(4).unwrap();
        assert_eq!(c4.degree_sequence(), vec![2, 2, 2, 2]);
        for m in 3..=8 {
            assert!(are_isomorphic(&build_gmd(m, 2).unwrap(), &build_cycle(2 * m).unwrap()).unwrap());
        }
    }

    #[test]
    fn complete_bipartite_cases() {
        let k11 = build_complete_bipartite(1, 1).unwrap();
        assert_eq!(k11.edges().len(), 1);
        let k22 = build_complete_bipartite(2, 2).unwrap();
        assert!(are_isomorphic(&k22, &build_cycle(4).unwrap()).unwrap());
        for m in 1..=6 {
            assert!(
                are_isomorphic(&build_complete_bipartite(m, m).unwrap(), &build_gmd(m, m).unwrap())
                    .unwrap()
            );
        }
    }

    #[test]
    fn categorical_product_cases() {
        let k2 = build_complete(2).unwrap();
        let k3 = build_complete(3).unwrap();
        // K_2 x K_2: two disjoint edges
        let p = categorical_product(&k2, &k2).unwrap();
        assert_eq!(p.vertex_count(), 4);
        assert_eq!(p.edges().len(), 2);
        assert!(p.degree_sequence().iter().all(|&d| d == 1));
        // K_2 x K_3 is C_6
        let p = categorical_product(&k2, &k3).unwrap();
        assert!(are_isomorphic(&p, &build_cycle(6).unwrap()).unwrap());
        // degree multiplies
        let g = build_cycle(5).unwrap();
        let h = build_complete_bipartite(2, 3).unwrap();
        let p = categorical_product(&g, &h).unwrap();
        for u in 0..g.vertex_count() {
            for x in 0..h.vertex_count() {
                assert_eq!(p.degree(u * h.vertex_count() + x), g.degree(u) * h.degree(x));
            }
        }
    }

    #[test]
    fn iso_rejects_different_degree_sequences() {
        let c6 = build_cycle(6).unwrap();
        let k33 = build_complete_bipartite(3, 3).unwrap();
        assert!(!are_isomorphic(&c6, &k33).unwrap());
    }

    #[test]
    fn iso_respects_size_bound() {
        let g = build_gmd(9, 2).unwrap();
        assert_eq!(
            are_isomorphic(&g, &g),
            Err(GraphError::IsoTooLarge(18))
        );
    }

    #[test]
    fn json_and_dot_are_stable() {
        let g = build_gmd(2, 1).unwrap();
        let j = g.to_json();
        assert_eq!(j["family"], "gmd");
        assert_eq!(j["m"], 2);
        assert_eq!(j["edges"].as_array().unwrap().len(), 2);
        assert!(g.to_dot().contains("\"a1\" -- \"b1\""));
    }
}
