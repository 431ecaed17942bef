//! Finite metric trees standing in for R-trees.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::GeodesicSpace;
use crate::error::{Error, Result};
use crate::model::Curvature;

/// Tree description as it appears in problem files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Edge {
    u: usize,
    v: usize,
    len: f64,
}

/// A point on edge `edge` at distance `offset` from the edge's `from` vertex.
/// Vertices are canonically represented on their lowest-numbered incident
/// edge, which makes `==` a test of point equality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    pub edge: usize,
    pub offset: f64,
}

/// A finite tree with positive edge lengths.
#[derive(Clone, Debug)]
pub struct RTree {
    names: Vec<String>,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
    edge_index: HashMap<(usize, usize), usize>,
    /// `dist[a][b]`: path length between vertices.
    dist: Vec<Vec<f64>>,
    /// `toward[t][w]`: neighbour of `w` on the path from `w` to `t`.
    toward: Vec<Vec<usize>>,
}

impl RTree {
    /// Builds a tree from vertex names and `(u, v, length)` edges by index.
    pub fn new(names: Vec<String>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = names.len();
        if n < 2 {
            return Err(Error::invalid("a tree needs at least two vertices"));
        }
        if edges.len() != n - 1 {
            return Err(Error::invalid(format!(
                "a tree on {n} vertices has {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.as_str(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vertex name {name:?}")));
            }
        }
        let mut incident = vec![Vec::new(); n];
        let mut edge_index = HashMap::new();
        let mut stored = Vec::with_capacity(edges.len());
        for (id, &(u, v, len)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge {id} references an unknown vertex")));
            }
            if u == v {
                return Err(Error::invalid(format!("edge {id} is a loop")));
            }
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::invalid(format!("edge {id} has non-positive length {len}")));
            }
            if edge_index.insert((u.min(v), u.max(v)), id).is_some() {
                return Err(Error::invalid(format!("edge {id} duplicates an earlier edge")));
            }
            incident[u].push(id);
            incident[v].push(id);
            stored.push(Edge { u, v, len });
        }
        let mut tree = RTree {
            names,
            edges: stored,
            incident,
            edge_index,
            dist: Vec::new(),
            toward: Vec::new(),
        };
        tree.all_pairs()?;
        Ok(tree)
    }

    pub fn from_spec(spec: &TreeSpec) -> Result<Self> {
        let index: HashMap<&str, usize> =
            spec.vertices.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::invalid(format!("edge references unknown vertex {name:?}")))
        };
        let edges = spec
            .edges
            .iter()
            .map(|e| Ok((lookup(&e.from)?, lookup(&e.to)?, e.length)))
            .collect::<Result<Vec<_>>>()?;
        RTree::new(spec.vertices.clone(), &edges)
    }

    pub fn to_spec(&self) -> TreeSpec {
        TreeSpec {
            vertices: self.names.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    from: self.names[e.u].clone(),
                    to: self.names[e.v].clone(),
                    length: e.len,
                })
                .collect(),
        }
    }

    /// Star with the given leg lengths; vertex 0 is the centre.
    pub fn star(legs: &[f64]) -> Result<Self> {
        let mut names = vec!["c".to_string()];
        names.extend((0..legs.len()).map(|i| format!("l{i}")));
        let edges: Vec<_> = legs.iter().enumerate().map(|(i, &l)| (0, i + 1, l)).collect();
        RTree::new(names, &edges)
    }

    /// Path `v0 - v1 - ... - vm` with the given segment lengths.
    pub fn path(lengths: &[f64]) -> Result<Self> {
        let names = (0..=lengths.len()).map(|i| format!("v{i}")).collect();
        let edges: Vec<_> = lengths.iter().enumerate().map(|(i, &l)| (i, i + 1, l)).collect();
        RTree::new(names, &edges)
    }

    /// Complete binary tree of the given depth; every edge at depth `d`
    /// (1-based) has length `level_lengths[d - 1]`.
    pub fn binary(level_lengths: &[f64]) -> Result<Self> {
        let depth = level_lengths.len();
        let count = (1usize << (depth + 1)) - 1;
        let names = (0..count).map(|i| format!("n{i}")).collect();
        let edges: Vec<_> = (1..count)
            .map(|i| {
                let level = usize::BITS - (i + 1).leading_zeros() - 1;
                ((i - 1) / 2, i, level_lengths[level as usize - 1])
            })
            .collect();
        RTree::new(names, &edges)
    }

    fn all_pairs(&mut self) -> Result<()> {
        let n = self.names.len();
        self.dist = vec![vec![f64::INFINITY; n]; n];
        self.toward = vec![vec![usize::MAX; n]; n];
        for t in 0..n {
            let mut queue = VecDeque::from([t]);
            self.dist[t][t] = 0.0;
            self.toward[t][t] = t;
            while let Some(w) = queue.pop_front() {
                for &e in &self.incident[w] {
                    let edge = self.edges[e];
                    let nb = if edge.u == w { edge.v } else { edge.u };
                    if self.dist[t][nb].is_infinite() {
                        self.dist[t][nb] = self.dist[t][w] + edge.len;
                        self.toward[t][nb] = w;
                        queue.push_back(nb);
                    }
                }
            }
            if self.dist[t].iter().any(|d| d.is_infinite()) {
                return Err(Error::invalid("tree is not connected"));
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        self.edges[e].len
    }

    /// `(from, to)` vertices of edge `e`.
    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        (self.edges[e].u, self.edges[e].v)
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn vertex_distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a][b]
    }

    /// Canonical point at vertex `v`.
    pub fn vertex_point(&self, v: usize) -> TreePoint {
        let e = *self.incident[v].iter().min().expect("every vertex has an edge");
        let edge = self.edges[e];
        TreePoint { edge: e, offset: if edge.u == v { 0.0 } else { edge.len } }
    }

    /// Validated, canonical point on edge `edge` at `offset` from its `from`
    /// vertex.
    pub fn point(&self, edge: usize, offset: f64) -> Result<TreePoint> {
        let p = TreePoint { edge, offset };
        self.check(&p)?;
        Ok(self.canonical(p))
    }

    fn check(&self, p: &TreePoint) -> Result<()> {
        let e = self
            .edges
            .get(p.edge)
            .ok_or_else(|| Error::invalid(format!("edge id {} out of range", p.edge)))?;
        if !(p.offset >= 0.0 && p.offset <= e.len) {
            return Err(Error::invalid(format!(
                "offset {} outside [0, {}] on edge {}",
                p.offset, e.len, p.edge
            )));
        }
        Ok(())
    }

    fn canonical(&self, p: TreePoint) -> TreePoint {
        let e = self.edges[p.edge];
        if p.offset <= 0.0 {
            self.vertex_point(e.u)
        } else if p.offset >= e.len {
            self.vertex_point(e.v)
        } else {
            p
        }
    }

    /// Vertex at `p`, if `p` is a vertex.
    pub fn as_vertex(&self, p: &TreePoint) -> Option<usize> {
        let e = self.edges[p.edge];
        if p.offset == 0.0 {
            Some(e.u)
        } else if p.offset == e.len {
            Some(e.v)
        } else {
            None
        }
    }

    /// The two ways out of `p`'s edge: `(vertex, distance from p)`.
    fn exits(&self, p: &TreePoint) -> [(usize, f64); 2] {
        let e = self.edges[p.edge];
        [(e.u, p.offset), (e.v, e.len - p.offset)]
    }

    /// Exit vertices of `p` and `q` on the shortest route and its length.
    fn route(&self, p: &TreePoint, q: &TreePoint) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::INFINITY);
        for (a, da) in self.exits(p) {
            for (b, db) in self.exits(q) {
                let total = da + self.dist[a][b] + db;
                if total < best.2 {
                    best = (a, b, total);
                }
            }
        }
        best
    }

    /// Length of the unique arc between `p` and `q`.
    pub fn tree_distance(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        if p.edge == q.edge {
            (p.offset - q.offset).abs()
        } else {
            self.route(p, q).2
        }
    }

    /// Point at arc length `t d(p, q)` from `p` along the arc to `q`.
    pub fn tree_geodesic_point(&self, p: &TreePoint, q: &TreePoint, t: f64) -> Result<TreePoint> {
        self.check(p)?;
        self.check(q)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("geodesic parameter {t} outside [0, 1]")));
        }
        if t == 0.0 {
            return Ok(self.canonical(*p));
        }
        if t == 1.0 {
            return Ok(self.canonical(*q));
        }
        if p.edge == q.edge {
            let offset = p.offset + t * (q.offset - p.offset);
            return Ok(self.canonical(TreePoint { edge: p.edge, offset }));
        }
        let (a, b, total) = self.route(p, q);
        let mut s = t * total;
        // Leg along p's edge toward its exit vertex a.
        let ep = self.edges[p.edge];
        let leg = if ep.u == a { p.offset } else { ep.len - p.offset };
        if s <= leg {
            let offset = if ep.u == a { p.offset - s } else { p.offset + s };
            return Ok(self.canonical(TreePoint { edge: p.edge, offset }));
        }
        s -= leg;
        let mut w = a;
        while w != b {
            let next = self.toward[b][w];
            let e = self.edge_between(w, next).expect("consecutive path vertices share an edge");
            let edge = self.edges[e];
            if s <= edge.len {
                let offset = if edge.u == w { s } else { edge.len - s };
                return Ok(self.canonical(TreePoint { edge: e, offset }));
            }
            s -= edge.len;
            w = next;
        }
        let eq = self.edges[q.edge];
        let offset = if eq.u == b { s } else { eq.len - s };
        Ok(self.canonical(TreePoint { edge: q.edge, offset: offset.clamp(0.0, eq.len) }))
    }
}

impl GeodesicSpace for RTree {
    type Point = TreePoint;

    fn distance(&self, x: &TreePoint, y: &TreePoint) -> f64 {
        self.tree_distance(x, y)
    }

    fn geodesic_point(&self, x: &TreePoint, y: &TreePoint, t: f64) -> Result<TreePoint> {
        self.tree_geodesic_point(x, y, t)
    }

    /// Trees are CAT(k) for every k; the flat parameter imposes no diameter bound.
    fn curvature(&self) -> Curvature {
        Curvature::flat()
    }

    fn validate_point(&self, x: &TreePoint) -> Result<()> {
        self.check(x)
    }

    /// Vertex minimising the weighted objective.
    fn initial_guess(&self, points: &[TreePoint], weights: &[f64]) -> TreePoint {
        (0..self.vertex_count())
            .map(|v| {
                let vp = self.vertex_point(v);
                let f = points
                    .iter()
                    .zip(weights)
                    .map(|(p, w)| w * self.tree_distance(&vp, p))
                    .fold(0.0, f64::max);
                (vp, f)
            })
            .fold(None::<(TreePoint, f64)>, |best, cur| match best {
                Some(b) if b.1 <= cur.1 => Some(b),
                _ => Some(cur),
            })
            .map(|(p, _)| p)
            .expect("trees have vertices")
    }
}

/// A length-preserving vertex permutation of an [`RTree`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeAutomorphism {
    perm: Vec<usize>,
}

impl TreeAutomorphism {
    pub fn new(tree: &RTree, perm: Vec<usize>) -> Result<Self> {
        let n = tree.vertex_count();
        if perm.len() != n {
            return Err(Error::invalid("permutation length differs from the vertex count"));
        }
        let mut hit = vec![false; n];
        for &v in &perm {
            if v >= n || std::mem::replace(&mut hit[v], true) {
                return Err(Error::invalid("vertex map is not a permutation"));
            }
        }
        for (id, e) in tree.edges.iter().enumerate() {
            let image = tree.edge_between(perm[e.u], perm[e.v]).ok_or_else(|| {
                Error::invalid(format!("edge {id} is not mapped onto an edge"))
            })?;
            if (tree.edges[image].len - e.len).abs() > 1e-12 * e.len.max(1.0) {
                return Err(Error::invalid(format!("edge {id} changes length under the map")));
            }
        }
        Ok(TreeAutomorphism { perm })
    }

    pub fn vertex_image(&self, v: usize) -> usize {
        self.perm[v]
    }

    pub fn apply(&self, tree: &RTree, p: &TreePoint) -> TreePoint {
        let e = tree.edges[p.edge];
        let (a, b) = (self.perm[e.u], self.perm[e.v]);
        let image = tree.edge_between(a, b).expect("validated automorphism");
        let ie = tree.edges[image];
        let offset = if ie.u == a { p.offset } else { ie.len - p.offset };
        tree.canonical(TreePoint { edge: image, offset })
    }
}
