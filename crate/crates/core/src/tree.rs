//! Edge-weighted rooted trees.
//!
//! A [`Tree`] is stored as an arena of vertices with parent links. Leaves are
//! identified by name and always iterated in lexicographic order. Depth
//! comparisons against a truncation distance use an absolute tolerance of
//! [`DEPTH_TOL`].

use std::collections::{BTreeMap, BTreeSet};

use crate::error::TreeError;

/// Absolute tolerance for depth equality at truncation boundaries.
pub const DEPTH_TOL: f64 = 1e-12;

pub type VertexId = usize;

#[derive(Debug, Clone)]
struct Vertex {
    name: Option<String>,
    parent: Option<VertexId>,
    length: f64,
    depth: f64,
    children: Vec<VertexId>,
}

/// Incremental construction of a [`Tree`].
#[derive(Debug, Clone)]
pub struct TreeBuilder {
    vertices: Vec<Vertex>,
}

impl Default for TreeBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::with_root_name(None)
    }

    pub fn with_root_name(name: Option<&str>) -> Self {
        TreeBuilder {
            vertices: vec![Vertex {
                name: name.map(str::to_owned),
                parent: None,
                length: 0.0,
                depth: 0.0,
                children: Vec::new(),
            }],
        }
    }

    pub fn root(&self) -> VertexId {
        0
    }

    pub fn depth(&self, v: VertexId) -> f64 {
        self.vertices[v].depth
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.vertices[v].parent
    }

    pub fn length(&self, v: VertexId) -> f64 {
        self.vertices[v].length
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.vertices[v].children
    }

    pub fn add_child(
        &mut self,
        parent: VertexId,
        name: Option<&str>,
        length: f64,
    ) -> Result<VertexId, TreeError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(TreeError::NonPositiveLength(length));
        }
        let id = self.vertices.len();
        let depth = self.vertices[parent].depth + length;
        self.vertices.push(Vertex {
            name: name.map(str::to_owned),
            parent: Some(parent),
            length,
            depth,
            children: Vec::new(),
        });
        self.vertices[parent].children.push(id);
        Ok(id)
    }

    /// Inserts a new vertex on the edge above `child`, `offset` below the
    /// parent endpoint. Returns the new vertex.
    pub fn split_edge(
        &mut self,
        child: VertexId,
        offset: f64,
        name: Option<&str>,
    ) -> Result<VertexId, TreeError> {
        let parent = self.vertices[child]
            .parent
            .ok_or_else(|| TreeError::InvalidParams("cannot split above the root".into()))?;
        let len = self.vertices[child].length;
        if !(offset > 0.0 && offset < len) {
            return Err(TreeError::InvalidParams(format!(
                "split offset {offset} outside (0, {len})"
            )));
        }
        let id = self.vertices.len();
        self.vertices.push(Vertex {
            name: name.map(str::to_owned),
            parent: Some(parent),
            length: offset,
            depth: self.vertices[parent].depth + offset,
            children: vec![child],
        });
        let slot = self.vertices[parent]
            .children
            .iter_mut()
            .find(|c| **c == child)
            .expect("child listed under its parent");
        *slot = id;
        self.vertices[child].parent = Some(id);
        self.vertices[child].length = len - offset;
        Ok(id)
    }

    /// Overwrites a vertex's label and incoming edge length; depths are
    /// recomputed by [`TreeBuilder::build`].
    pub(crate) fn set_name_and_length(&mut self, v: VertexId, name: Option<String>, length: f64) {
        self.vertices[v].name = name;
        self.vertices[v].length = length;
    }

    pub fn build(self) -> Result<Tree, TreeError> {
        Tree::from_vertices(self.vertices)
    }
}

/// A point on a tree: `offset` units below the parent endpoint of the edge
/// whose child endpoint is `edge`. A vertex is the point with
/// `offset == length` of its incoming edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreePoint {
    pub edge: VertexId,
    pub offset: f64,
}

/// A finite, edge-weighted, rooted tree with named leaves.
#[derive(Debug, Clone)]
pub struct Tree {
    vertices: Vec<Vertex>,
    root: VertexId,
    leaves: BTreeMap<String, VertexId>,
}

impl Tree {
    fn from_vertices(mut vertices: Vec<Vertex>) -> Result<Self, TreeError> {
        let root = vertices
            .iter()
            .position(|v| v.parent.is_none())
            .ok_or_else(|| TreeError::InvalidParams("no root".into()))?;
        // recompute depths top-down so builders cannot leave them stale
        let mut stack = vec![root];
        vertices[root].depth = 0.0;
        let mut seen = 0usize;
        while let Some(v) = stack.pop() {
            seen += 1;
            let d = vertices[v].depth;
            for c in vertices[v].children.clone() {
                if !(vertices[c].length > 0.0 && vertices[c].length.is_finite()) {
                    return Err(TreeError::NonPositiveLength(vertices[c].length));
                }
                vertices[c].depth = d + vertices[c].length;
                stack.push(c);
            }
        }
        if seen != vertices.len() {
            return Err(TreeError::InvalidParams(
                "vertices unreachable from the root".into(),
            ));
        }
        let mut leaves = BTreeMap::new();
        for (id, v) in vertices.iter().enumerate() {
            if v.children.is_empty() {
                if id == root {
                    return Err(TreeError::TooFewLeaves { needed: 1, found: 0 });
                }
                let name = v
                    .name
                    .clone()
                    .ok_or_else(|| TreeError::InvalidParams("every leaf needs a name".into()))?;
                if leaves.insert(name.clone(), id).is_some() {
                    return Err(TreeError::DuplicateLeaf(name));
                }
            }
        }
        Ok(Tree {
            vertices,
            root,
            leaves,
        })
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.vertices[v].parent
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.vertices[v].children
    }

    /// Length of the edge above `v` (0 for the root).
    pub fn length(&self, v: VertexId) -> f64 {
        self.vertices[v].length
    }

    pub fn depth(&self, v: VertexId) -> f64 {
        self.vertices[v].depth
    }

    pub fn name(&self, v: VertexId) -> Option<&str> {
        self.vertices[v].name.as_deref()
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.vertices[v].children.is_empty()
    }

    /// Leaf names in lexicographic order.
    pub fn leaf_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.leaves.keys().map(String::as_str)
    }

    /// `(name, vertex)` pairs in lexicographic order of name.
    pub fn leaves(&self) -> impl Iterator<Item = (&str, VertexId)> + '_ {
        self.leaves.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaf(&self, name: &str) -> Result<VertexId, TreeError> {
        self.leaves
            .get(name)
            .copied()
            .ok_or_else(|| TreeError::UnknownLeaf(name.to_owned()))
    }

    pub fn leaf_depth(&self, name: &str) -> Result<f64, TreeError> {
        Ok(self.depth(self.leaf(name)?))
    }

    /// Maximum leaf depth.
    pub fn height(&self) -> f64 {
        self.leaves
            .values()
            .map(|&v| self.depth(v))
            .fold(0.0, f64::max)
    }

    /// Vertices in pre-order (parents before children, children in insertion order).
    pub fn preorder(&self) -> Vec<VertexId> {
        let mut order = Vec::with_capacity(self.vertices.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.children(v).iter().rev());
        }
        order
    }

    /// Vertices on the path from `v` up to and including the root.
    pub fn ancestors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out
    }

    /// Leaf names below `v` (including `v` itself when it is a leaf), sorted.
    pub fn descendant_leaves(&self, v: VertexId) -> Vec<&str> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if self.is_leaf(u) {
                out.push(self.name(u).expect("leaves are named"));
            } else {
                stack.extend_from_slice(self.children(u));
            }
        }
        out.sort_unstable();
        out
    }

    /// Number of leaves below each vertex.
    fn leaf_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.vertices.len()];
        for &v in self.preorder().iter().rev() {
            counts[v] = if self.is_leaf(v) {
                1
            } else {
                self.children(v).iter().map(|&c| counts[c]).sum()
            };
        }
        counts
    }

    /// Length of the root path shared by leaves `x` and `y`.
    pub fn shared_path_length(&self, x: &str, y: &str) -> Result<f64, TreeError> {
        if x == y {
            return Err(TreeError::SameLeaf(x.to_owned()));
        }
        let vx = self.leaf(x)?;
        let vy = self.leaf(y)?;
        let above_x: BTreeSet<VertexId> = self.ancestors(vx).into_iter().collect();
        let lca = self
            .ancestors(vy)
            .into_iter()
            .find(|v| above_x.contains(v))
            .expect("root is a common ancestor");
        Ok(self.depth(lca))
    }

    /// All pairwise shared path lengths, indexed by lexicographic leaf order.
    /// The diagonal holds leaf depths.
    pub fn shared_length_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.leaf_count();
        let index: BTreeMap<VertexId, usize> = self
            .leaves
            .values()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        let mut out = vec![vec![0.0; n]; n];
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for &v in self.preorder().iter().rev() {
            if self.is_leaf(v) {
                let i = index[&v];
                out[i][i] = self.depth(v);
                below[v].push(i);
                continue;
            }
            let d = self.depth(v);
            let mut acc: Vec<usize> = Vec::new();
            for &c in self.children(v) {
                let group = std::mem::take(&mut below[c]);
                for &a in &acc {
                    for &b in &group {
                        out[a][b] = d;
                        out[b][a] = d;
                    }
                }
                acc.extend(group);
            }
            below[v] = acc;
        }
        out
    }

    /// Average of `min(shared path, 1)` over ordered pairs of distinct leaves.
    ///
    /// Computed edge by edge: an edge carrying `c` leaves below it adds the
    /// part of its length lying within depth 1 to each of the `c(c-1)`
    /// ordered pairs that share it.
    pub fn spread(&self) -> Result<f64, TreeError> {
        let n = self.leaf_count();
        if n < 2 {
            return Err(TreeError::TooFewLeaves { needed: 2, found: n });
        }
        let counts = self.leaf_counts();
        let mut total = 0.0;
        for (v, &c) in counts.iter().enumerate() {
            let Some(p) = self.parent(v) else { continue };
            let top = self.depth(p);
            let clipped = (self.depth(v).min(1.0) - top).max(0.0);
            let c = c as f64;
            total += clipped * c * (c - 1.0);
        }
        Ok(total / (n as f64 * (n as f64 - 1.0)))
    }

    /// Boundary points of the truncation at distance `s` from the root.
    ///
    /// Points sitting exactly on a vertex (within [`DEPTH_TOL`]) are reported
    /// once, as that vertex. Leaves shallower than `s` are their own boundary
    /// points, so for `s` at or above the height the result is the leaf set.
    pub fn truncate(&self, s: f64) -> Result<Vec<TreePoint>, TreeError> {
        if !(s > 0.0) {
            return Err(TreeError::NonPositiveDepth(s));
        }
        let mut out = Vec::new();
        for v in self.preorder() {
            let Some(p) = self.parent(v) else { continue };
            let top = self.depth(p);
            let bottom = self.depth(v);
            if top >= s - DEPTH_TOL {
                continue;
            }
            if (bottom - s).abs() <= DEPTH_TOL {
                out.push(TreePoint {
                    edge: v,
                    offset: self.length(v),
                });
            } else if bottom > s {
                out.push(TreePoint {
                    edge: v,
                    offset: s - top,
                });
            } else if self.is_leaf(v) {
                out.push(TreePoint {
                    edge: v,
                    offset: self.length(v),
                });
            }
        }
        Ok(out)
    }

    /// Number of boundary points at distance `s`.
    pub fn boundary_count(&self, s: f64) -> Result<usize, TreeError> {
        Ok(self.truncate(s)?.len())
    }

    /// Keeps only the root paths of the given leaves, merging the non-root
    /// vertices left with a single child.
    pub fn restrict<S: AsRef<str>>(&self, subset: &[S]) -> Result<Tree, TreeError> {
        if subset.is_empty() {
            return Err(TreeError::EmptySubset);
        }
        let mut keep = vec![false; self.vertices.len()];
        for name in subset {
            let v = self.leaf(name.as_ref())?;
            for a in self.ancestors(v) {
                if keep[a] {
                    break;
                }
                keep[a] = true;
            }
        }
        let mut b = TreeBuilder::with_root_name(self.name(self.root));
        let mut stack = vec![(self.root, b.root())];
        while let Some((old, new)) = stack.pop() {
            for &c in self.children(old) {
                if !keep[c] {
                    continue;
                }
                // walk down through pass-through vertices
                let mut cur = c;
                let mut len = self.length(c);
                loop {
                    let kept: Vec<VertexId> = self
                        .children(cur)
                        .iter()
                        .copied()
                        .filter(|&g| keep[g])
                        .collect();
                    if kept.len() == 1 {
                        cur = kept[0];
                        len += self.length(cur);
                    } else {
                        break;
                    }
                }
                let id = b.add_child(new, self.name(cur), len)?;
                stack.push((cur, id));
            }
        }
        b.build()
    }

    /// Restriction to one leaf below each boundary point of the truncation at
    /// `s`; the lexicographically smallest leaf is chosen for each point.
    pub fn extract_well_spread_restriction(&self, s: f64) -> Result<Tree, TreeError> {
        let chosen = self.well_spread_leaves(s)?;
        self.restrict(&chosen)
    }

    /// The leaves picked by [`Tree::extract_well_spread_restriction`].
    pub fn well_spread_leaves(&self, s: f64) -> Result<Vec<String>, TreeError> {
        let points = self.truncate(s)?;
        Ok(points
            .iter()
            .map(|p| self.descendant_leaves(p.edge)[0].to_owned())
            .collect())
    }

    /// Lengthens every leaf edge so that all leaves sit at depth `h_star`.
    pub fn stretch_to_height(&self, h_star: f64) -> Result<Tree, TreeError> {
        let height = self.height();
        if h_star < height - DEPTH_TOL {
            return Err(TreeError::HeightTooSmall {
                target: h_star,
                height,
            });
        }
        let mut vertices = self.vertices.clone();
        for &v in self.leaves.values() {
            let extra = (h_star - self.depth(v)).max(0.0);
            vertices[v].length += extra;
        }
        Tree::from_vertices(vertices)
    }

    /// True when both trees have the same leaves, leaf depths and pairwise
    /// shared path lengths within `tol`, i.e. they agree up to the
    /// suppression of degree-2 vertices.
    pub fn same_shape(&self, other: &Tree, tol: f64) -> bool {
        if !self.leaf_names().eq(other.leaf_names()) {
            return false;
        }
        let a = self.shared_length_matrix();
        let b = other.shared_length_matrix();
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(x, y)| (x - y).abs() <= tol)
    }
}

/// A nested sequence of trees sharing a root; tree `k` (1-based) has `k`
/// leaves and restricts to tree `k - 1`.
#[derive(Debug, Clone)]
pub struct NestedFamily {
    trees: Vec<Tree>,
}

impl NestedFamily {
    pub fn new(trees: Vec<Tree>) -> Result<Self, TreeError> {
        if let Some(e) = nesting_violations(&trees).into_iter().next() {
            return Err(e);
        }
        Ok(NestedFamily { trees })
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Tree with `k` leaves (1-based).
    pub fn tree(&self, k: usize) -> Option<&Tree> {
        k.checked_sub(1).and_then(|i| self.trees.get(i))
    }

    pub fn last(&self) -> &Tree {
        self.trees.last().expect("families are nonempty")
    }
}

/// Every nesting violation in `trees`, naming the offending 1-based index.
pub fn nesting_violations(trees: &[Tree]) -> Vec<TreeError> {
    let mut out = Vec::new();
    if trees.is_empty() {
        out.push(TreeError::InvalidParams("empty family".into()));
        return out;
    }
    for (i, t) in trees.iter().enumerate() {
        let k = i + 1;
        if t.leaf_count() != k {
            out.push(TreeError::NotNested {
                k,
                reason: format!("has {} leaves, expected {k}", t.leaf_count()),
            });
            continue;
        }
        if i == 0 {
            continue;
        }
        let prev = &trees[i - 1];
        let prev_leaves: Vec<&str> = prev.leaf_names().collect();
        match t.restrict(&prev_leaves) {
            Ok(r) if r.same_shape(prev, 1e-9) => {}
            Ok(_) => out.push(TreeError::NotNested {
                k,
                reason: format!("restriction to the leaves of tree {} differs from it", k - 1),
            }),
            Err(e) => out.push(TreeError::NotNested {
                k,
                reason: e.to_string(),
            }),
        }
    }
    out
}

/// Boundary counts of a family over a grid of truncation distances.
#[derive(Debug, Clone)]
pub struct BigBangProfile {
    pub grid: Vec<f64>,
    /// `counts[k - 1][j]` is the boundary count of tree `k` at `grid[j]`.
    pub counts: Vec<Vec<usize>>,
    /// Grid values whose count does not change over the last half of the family.
    pub flagged: Vec<f64>,
}

/// Tabulates boundary counts; a grid value is flagged when its count is
/// constant across the last half of the family. This is a finite-prefix
/// heuristic only.
pub fn big_bang_profile(family: &NestedFamily, grid: &[f64]) -> Result<BigBangProfile, TreeError> {
    if family.is_empty() {
        return Err(TreeError::InvalidParams("empty family".into()));
    }
    if grid.is_empty() {
        return Err(TreeError::InvalidParams("empty grid".into()));
    }
    if let Some(&s) = grid.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
        return Err(TreeError::NonPositiveDepth(s));
    }
    let counts = family
        .trees()
        .iter()
        .map(|t| grid.iter().map(|&s| t.boundary_count(s)).collect())
        .collect::<Result<Vec<Vec<usize>>, _>>()?;
    let start = family.len() / 2;
    let flagged = grid
        .iter()
        .enumerate()
        .filter(|(j, _)| {
            let tail: Vec<usize> = counts[start..].iter().map(|row| row[*j]).collect();
            tail.windows(2).all(|w| w[0] == w[1])
        })
        .map(|(_, &s)| s)
        .collect();
    Ok(BigBangProfile {
        grid: grid.to_vec(),
        counts,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(n: usize, len: f64) -> Tree {
        let mut b = TreeBuilder::new();
        for i in 0..n {
            b.add_child(0, Some(&format!("x{i}")), len).unwrap();
        }
        b.build().unwrap()
    }

    fn pinched(n: usize, stem: f64, leaf: f64) -> Tree {
        let mut b = TreeBuilder::new();
        let v = b.add_child(0, Some("v"), stem).unwrap();
        for i in 0..n {
            b.add_child(v, Some(&format!("x{i}")), leaf).unwrap();
        }
        b.build().unwrap()
    }

    // root-a (0.2), a-b (0.3); leaf la under a, leaves lb1, lb2 under b
    fn caterpillar() -> Tree {
        let mut b = TreeBuilder::new();
        let a = b.add_child(0, Some("a"), 0.2).unwrap();
        let bb = b.add_child(a, Some("b"), 0.3).unwrap();
        b.add_child(a, Some("la"), 0.8).unwrap();
        b.add_child(bb, Some("lb1"), 0.5).unwrap();
        b.add_child(bb, Some("lb2"), 0.5).unwrap();
        b.build().unwrap()
    }

    /// Independent pairwise oracle for the spread.
    fn spread_by_pairs(t: &Tree) -> f64 {
        let names: Vec<&str> = t.leaf_names().collect();
        let n = names.len() as f64;
        let mut sum = 0.0;
        for x in &names {
            for y in &names {
                if x != y {
                    sum += t.shared_path_length(x, y).unwrap().min(1.0);
                }
            }
        }
        sum / (n * (n - 1.0))
    }

    #[test]
    fn shared_path_examples() {
        let s = star(3, 1.0);
        assert_eq!(s.shared_path_length("x0", "x1").unwrap(), 0.0);
        let p = pinched(3, 0.5, 0.5);
        assert_eq!(p.shared_path_length("x0", "x2").unwrap(), 0.5);
        let c = caterpillar();
        assert!((c.shared_path_length("la", "lb1").unwrap() - 0.2).abs() < 1e-15);
        assert!((c.shared_path_length("lb1", "lb2").unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn shared_path_errors() {
        let s = star(3, 1.0);
        assert_eq!(
            s.shared_path_length("x0", "x0"),
            Err(TreeError::SameLeaf("x0".into()))
        );
        assert_eq!(
            s.shared_path_length("x0", "nope"),
            Err(TreeError::UnknownLeaf("nope".into()))
        );
    }

    #[test]
    fn spread_examples() {
        assert_eq!(star(3, 1.0).spread().unwrap(), 0.0);
        assert!((pinched(3, 0.3, 0.7).spread().unwrap() - 0.3).abs() < 1e-15);
        assert!((pinched(2, 2.0, 0.5).spread().unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            star(1, 1.0).spread(),
            Err(TreeError::TooFewLeaves { .. })
        ));
        let c = caterpillar();
        assert!((c.spread().unwrap() - spread_by_pairs(&c)).abs() < 1e-15);
    }

    #[test]
    fn truncate_examples() {
        let p = pinched(3, 0.5, 0.5);
        assert_eq!(p.truncate(0.2).unwrap().len(), 1);
        assert_eq!(p.truncate(0.7).unwrap().len(), 3);
        assert_eq!(p.truncate(5.0).unwrap().len(), 3);
        // exactly at the pinch: the vertex itself, not its three children
        let at = p.truncate(0.5).unwrap();
        assert_eq!(at.len(), 1);
        assert_eq!(at[0].offset, 0.5);
        assert_eq!(p.truncate(0.0), Err(TreeError::NonPositiveDepth(0.0)));
        let c = caterpillar();
        assert_eq!(c.truncate(c.height() + 1.0).unwrap().len(), c.leaf_count());
    }

    #[test]
    fn truncate_includes_shallow_leaves() {
        let mut b = TreeBuilder::new();
        b.add_child(0, Some("short"), 0.1).unwrap();
        b.add_child(0, Some("long"), 1.0).unwrap();
        let t = b.build().unwrap();
        assert_eq!(t.truncate(0.5).unwrap().len(), 2);
    }

    #[test]
    fn restrict_examples() {
        let p = pinched(3, 0.5, 0.5);
        let full = p.restrict(&["x0", "x1", "x2"]).unwrap();
        assert!(full.same_shape(&p, 1e-15));
        let one = p.restrict(&["x1"]).unwrap();
        assert_eq!(one.vertex_count(), 2);
        assert!((one.leaf_depth("x1").unwrap() - 1.0).abs() < 1e-15);
        let c = caterpillar();
        let r = c.restrict(&["lb1", "lb2"]).unwrap();
        assert_eq!(r.leaf_count(), 2);
        assert!((r.shared_path_length("lb1", "lb2").unwrap() - 0.5).abs() < 1e-15);
        assert!((r.leaf_depth("lb1").unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(c.restrict::<&str>(&[]).unwrap_err(), TreeError::EmptySubset);
        assert!(matches!(c.restrict(&["zz"]), Err(TreeError::UnknownLeaf(_))));
    }

    #[test]
    fn well_spread_examples() {
        let s = star(4, 1.0);
        let r = s.extract_well_spread_restriction(0.5).unwrap();
        assert!(r.same_shape(&s, 0.0));
        let p = pinched(3, 0.5, 0.5);
        let r = p.extract_well_spread_restriction(0.2).unwrap();
        assert_eq!(r.leaf_names().collect::<Vec<_>>(), vec!["x0"]);
    }

    #[test]
    fn stretch_examples() {
        let mut b = TreeBuilder::new();
        b.add_child(0, Some("x"), 0.4).unwrap();
        let t = b.build().unwrap().stretch_to_height(1.0).unwrap();
        assert!((t.leaf_depth("x").unwrap() - 1.0).abs() < 1e-15);
        let mut b = TreeBuilder::new();
        b.add_child(0, Some("a"), 0.3).unwrap();
        b.add_child(0, Some("b"), 0.8).unwrap();
        let two = b.build().unwrap();
        let st = two.stretch_to_height(1.0).unwrap();
        assert!((st.leaf_depth("a").unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(st.spread().unwrap(), 0.0);
        assert!(matches!(
            two.stretch_to_height(0.5),
            Err(TreeError::HeightTooSmall { .. })
        ));
        let s = star(3, 1.0);
        assert!(s.stretch_to_height(1.0).unwrap().same_shape(&s, 0.0));
    }

    #[test]
    fn split_edge_keeps_depths() {
        let mut b = TreeBuilder::new();
        let x = b.add_child(0, Some("x"), 1.0).unwrap();
        let v = b.split_edge(x, 0.25, None).unwrap();
        b.add_child(v, Some("y"), 0.75).unwrap();
        let t = b.build().unwrap();
        assert!((t.leaf_depth("x").unwrap() - 1.0).abs() < 1e-15);
        assert!((t.shared_path_length("x", "y").unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn builder_rejects_bad_trees() {
        let mut b = TreeBuilder::new();
        assert_eq!(
            b.add_child(0, Some("x"), 0.0),
            Err(TreeError::NonPositiveLength(0.0))
        );
        b.add_child(0, Some("x"), 1.0).unwrap();
        b.add_child(0, Some("x"), 1.0).unwrap();
        assert_eq!(b.build().unwrap_err(), TreeError::DuplicateLeaf("x".into()));
        assert!(TreeBuilder::new().build().is_err());
    }
}
