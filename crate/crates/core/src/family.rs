//! Generators for nested tree families.
//!
//! All generated trees are ultrametric with the requested height, and tree
//! `j` of a family has exactly `j` leaves.

use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::TreeError;
use crate::newick::parse_newick_many;
use crate::rng::{domain, substream};
use crate::tree::{nesting_violations, NestedFamily, Tree, TreeBuilder, VertexId};

/// Family kinds with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Star trees with `k` leaves at depth `height`.
    Star { k: usize, height: f64 },
    /// One stem of length `s` from the root to a pinch vertex carrying `m`
    /// leaf edges of length `height - s`.
    PinchedStar { m: usize, s: f64, height: f64 },
    /// A backbone from the root to leaf `x0` with vertices `v_j` at depth
    /// `2^-j`, `j = 1..=k`, each carrying one leaf `x_j`. The family has
    /// `k + 1` trees.
    Figure1 { k: usize, height: f64 },
    /// The `figure1` backbone plus `heavy` extra leaves hanging from `v_1`,
    /// added in an interleaved order. The family has `k + heavy + 1` trees.
    Figure2 { k: usize, heavy: usize, height: f64 },
    /// Each new leaf attaches at a uniform depth in `(0, height)` on the
    /// root path of a uniformly chosen existing leaf, then is stretched to
    /// `height`.
    RandomUltrametric { k: usize, height: f64, seed: u64 },
    /// `;`-separated Newick trees, tree `j` having `j` leaves.
    NewickFile { path: PathBuf },
}

impl FamilySpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FamilySpec::Star { .. } => "star",
            FamilySpec::PinchedStar { .. } => "pinched_star",
            FamilySpec::Figure1 { .. } => "figure1",
            FamilySpec::Figure2 { .. } => "figure2",
            FamilySpec::RandomUltrametric { .. } => "random_ultrametric",
            FamilySpec::NewickFile { .. } => "newick_file",
        }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        let bad = |m: &str| Err(TreeError::InvalidParams(m.to_owned()));
        let height = match self {
            FamilySpec::Star { k, height } | FamilySpec::RandomUltrametric { k, height, .. } => {
                if *k < 1 {
                    return bad("k must be at least 1");
                }
                *height
            }
            FamilySpec::PinchedStar { m, s, height } => {
                if *m < 1 {
                    return bad("m must be at least 1");
                }
                if !(*s > 0.0 && s < height) {
                    return bad("pinch depth s must lie in (0, height)");
                }
                *height
            }
            FamilySpec::Figure1 { height, .. } => *height,
            FamilySpec::NewickFile { .. } => return Ok(()),
            FamilySpec::Figure2 { k, height, .. } => {
                if *k < 1 {
                    return bad("figure2 needs k >= 1 so that v_1 exists");
                }
                *height
            }
        };
        if !(height > 0.0 && height.is_finite()) {
            return bad("height must be positive");
        }
        if matches!(self, FamilySpec::Figure1 { .. } | FamilySpec::Figure2 { .. }) && height <= 0.5 {
            return bad("figure families need height > 1/2");
        }
        Ok(())
    }

    /// Builds the whole nested family.
    pub fn generate(&self) -> Result<NestedFamily, TreeError> {
        generate_family(self)
    }

    /// Builds only the largest tree of the family.
    pub fn last_tree(&self) -> Result<Tree, TreeError> {
        self.validate()?;
        match self {
            FamilySpec::Star { k, height } => star(*k, *height),
            FamilySpec::PinchedStar { m, s, height } => pinched_star(*m, *s, *height),
            FamilySpec::Figure1 { k, height } => figure1(*k, *height),
            _ => Ok(generate_family(self)?.last().clone()),
        }
    }

    /// The same generator with its count parameter (`k`, or `m` for the
    /// pinched star) replaced. File families are returned unchanged.
    pub fn with_count(&self, count: usize) -> FamilySpec {
        let mut out = self.clone();
        match &mut out {
            FamilySpec::Star { k, .. }
            | FamilySpec::Figure1 { k, .. }
            | FamilySpec::Figure2 { k, .. }
            | FamilySpec::RandomUltrametric { k, .. } => *k = count,
            FamilySpec::PinchedStar { m, .. } => *m = count,
            FamilySpec::NewickFile { .. } => {}
        }
        out
    }

    /// The tree the generator produces for count `k`; for a file family,
    /// the tree with `k` leaves.
    pub fn member(&self, k: usize) -> Result<Tree, TreeError> {
        match self {
            FamilySpec::NewickFile { .. } => generate_family(self)?
                .tree(k)
                .cloned()
                .ok_or_else(|| TreeError::InvalidParams(format!("family has no tree with {k} leaves"))),
            _ => self.with_count(k).last_tree(),
        }
    }

    /// Every problem with the parameters, including each nesting violation
    /// of a file family.
    pub fn violations(&self) -> Vec<String> {
        if let Err(e) = self.validate() {
            return vec![e.to_string()];
        }
        match self {
            FamilySpec::NewickFile { path } => match read_family_file(path) {
                Ok(trees) => nesting_violations(&trees).iter().map(|e| e.to_string()).collect(),
                Err(e) => vec![e.to_string()],
            },
            _ => Vec::new(),
        }
    }
}

fn read_family_file(path: &PathBuf) -> Result<Vec<Tree>, TreeError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| TreeError::InvalidParams(format!("{}: {e}", path.display())))?;
    parse_newick_many(&text)
}

/// Star with `k` leaves `x0..` at depth `height`.
pub fn star(k: usize, height: f64) -> Result<Tree, TreeError> {
    let mut b = TreeBuilder::new();
    for i in 0..k {
        b.add_child(0, Some(&leaf_name(i, k)), height)?;
    }
    b.build()
}

/// Pinched star: root, stem of length `s`, then `m` leaves at depth `height`.
pub fn pinched_star(m: usize, s: f64, height: f64) -> Result<Tree, TreeError> {
    let mut b = TreeBuilder::new();
    let v = b.add_child(0, Some("pinch"), s)?;
    for i in 0..m {
        b.add_child(v, Some(&leaf_name(i, m)), height - s)?;
    }
    b.build()
}

/// Backbone tree with `k` hanging leaves at depths `2^-1, ..., 2^-k`.
pub fn figure1(k: usize, height: f64) -> Result<Tree, TreeError> {
    let mut b = TreeBuilder::new();
    let width = k + 1;
    let (_, hubs) = backbone(&mut b, k, height, width)?;
    for (j, &v) in hubs.iter().enumerate() {
        let depth = b.depth(v);
        b.add_child(v, Some(&leaf_name(j + 1, width)), height - depth)?;
    }
    b.build()
}

/// Builds the backbone path root -> v_k -> ... -> v_1 -> x0 and returns
/// `(x0, [v_1, ..., v_k])`.
fn backbone(
    b: &mut TreeBuilder,
    k: usize,
    height: f64,
    width: usize,
) -> Result<(VertexId, Vec<VertexId>), TreeError> {
    let mut hubs = vec![0; k];
    let mut parent = b.root();
    for j in (1..=k).rev() {
        let depth = 0.5f64.powi(j as i32);
        let len = depth - b.depth(parent);
        hubs[j - 1] = b.add_child(parent, Some(&format!("v{j}")), len)?;
        parent = hubs[j - 1];
    }
    let x0 = b.add_child(parent, Some(&leaf_name(0, width)), height - b.depth(parent))?;
    Ok((x0, hubs))
}

fn leaf_name(i: usize, total: usize) -> String {
    let width = total.max(1).to_string().len();
    format!("x{i:0width$}")
}

fn generate_family(spec: &FamilySpec) -> Result<NestedFamily, TreeError> {
    spec.validate()?;
    let trees = match spec {
        FamilySpec::Star { k, height } => (1..=*k)
            .map(|j| star_named(j, *k, *height))
            .collect::<Result<Vec<_>, _>>()?,
        FamilySpec::PinchedStar { m, s, height } => (1..=*m)
            .map(|j| {
                let mut b = TreeBuilder::new();
                let v = b.add_child(0, Some("pinch"), *s)?;
                for i in 0..j {
                    b.add_child(v, Some(&leaf_name(i, *m)), height - s)?;
                }
                b.build()
            })
            .collect::<Result<Vec<_>, _>>()?,
        FamilySpec::Figure1 { k, height } => {
            let order: Vec<Attach> = (1..=*k).map(Attach::Backbone).collect();
            attach_sequence(*k, &order, *height)?
        }
        FamilySpec::Figure2 { k, heavy, height } => {
            let mut order = vec![Attach::Backbone(1)];
            let rest = k - 1;
            let mut placed = 0;
            for j in 2..=*k {
                order.push(Attach::Backbone(j));
                let target = (heavy * (j - 1)).div_ceil(rest.max(1));
                while placed < target.min(*heavy) {
                    placed += 1;
                    order.push(Attach::Heavy(placed));
                }
            }
            while placed < *heavy {
                placed += 1;
                order.push(Attach::Heavy(placed));
            }
            attach_sequence(*k, &order, *height)?
        }
        FamilySpec::RandomUltrametric { k, height, seed } => {
            random_ultrametric(*k, *height, *seed)?
        }
        FamilySpec::NewickFile { path } => read_family_file(path)?,
    };
    NestedFamily::new(trees)
}

fn star_named(j: usize, total: usize, height: f64) -> Result<Tree, TreeError> {
    let mut b = TreeBuilder::new();
    for i in 0..j {
        b.add_child(0, Some(&leaf_name(i, total)), height)?;
    }
    b.build()
}

#[derive(Debug, Clone, Copy)]
enum Attach {
    Backbone(usize),
    Heavy(usize),
}

fn attach_name(a: Attach, width: usize) -> String {
    match a {
        Attach::Backbone(j) => leaf_name(j, width),
        Attach::Heavy(r) => format!("h{r:0w$}", w = width.to_string().len()),
    }
}

/// Tree `j + 1` of the family is the backbone restricted to `x0` plus the
/// first `j` attachments of `order`.
fn attach_sequence(k: usize, order: &[Attach], height: f64) -> Result<Vec<Tree>, TreeError> {
    let width = order.len() + 1;
    let mut b = TreeBuilder::new();
    let (_, hubs) = backbone(&mut b, k, height, width)?;
    for a in order {
        let hub = match *a {
            Attach::Backbone(j) => hubs[j - 1],
            Attach::Heavy(_) => hubs[0],
        };
        let depth = b.depth(hub);
        b.add_child(hub, Some(&attach_name(*a, width)), height - depth)?;
    }
    let full = b.build()?;
    let mut names = vec![leaf_name(0, width)];
    let mut trees = vec![full.restrict(&names)?];
    for a in order {
        names.push(attach_name(*a, width));
        trees.push(full.restrict(&names)?);
    }
    Ok(trees)
}

fn random_ultrametric(k: usize, height: f64, seed: u64) -> Result<Vec<Tree>, TreeError> {
    let mut rng = substream(seed, domain::FAMILY, 0);
    let mut b = TreeBuilder::new();
    let mut leaves = vec![b.add_child(0, Some(&leaf_name(0, k)), height)?];
    let mut trees = vec![b.clone().build()?];
    for i in 1..k {
        let target = leaves[rng.random_range(0..leaves.len())];
        let depth = height * rng.random::<f64>();
        let depth = depth.clamp(height * 1e-9, height * (1.0 - 1e-9));
        // find the edge on target's root path crossing `depth`
        let mut v = target;
        while let Some(p) = b.parent(v) {
            if b.depth(p) < depth {
                break;
            }
            v = p;
        }
        let top = b.depth(b.parent(v).expect("non-root"));
        let hub = if (b.depth(v) - depth).abs() < 1e-12 {
            v
        } else {
            b.split_edge(v, depth - top, None)?
        };
        let hub_depth = b.depth(hub);
        leaves.push(b.add_child(hub, Some(&leaf_name(i, k)), height - hub_depth)?);
        trees.push(b.clone().build()?);
    }
    Ok(trees)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_family() {
        let f = FamilySpec::Star { k: 5, height: 1.0 }.generate().unwrap();
        assert_eq!(f.len(), 5);
        assert_eq!(f.last().spread().unwrap(), 0.0);
        for (i, t) in f.trees().iter().enumerate() {
            assert_eq!(t.boundary_count(0.5).unwrap(), i + 1);
        }
    }

    #[test]
    fn figure1_attachment_depths() {
        let t = figure1(3, 1.0).unwrap();
        assert_eq!(t.leaf_count(), 4);
        let depths: Vec<f64> = ["v1", "v2", "v3"]
            .iter()
            .map(|n| {
                (0..t.vertex_count())
                    .find(|&v| t.name(v) == Some(*n))
                    .map(|v| t.depth(v))
                    .unwrap()
            })
            .collect();
        assert_eq!(depths, vec![0.5, 0.25, 0.125]);
        assert!((t.height() - 1.0).abs() < 1e-15);
        let fam = FamilySpec::Figure1 { k: 3, height: 1.0 }.generate().unwrap();
        assert_eq!(fam.len(), 4);
        assert!(fam.last().same_shape(&t, 1e-15));
    }

    #[test]
    fn pinched_star_geometry() {
        let t = pinched_star(101, 0.05, 1.0).unwrap();
        assert_eq!(t.leaf_count(), 101);
        assert_eq!(t.boundary_count(0.05).unwrap(), 1);
        assert_eq!(t.boundary_count(0.06).unwrap(), 101);
        assert!((t.spread().unwrap() - 0.05).abs() < 1e-15);
        let fam = FamilySpec::PinchedStar {
            m: 7,
            s: 0.05,
            height: 1.0,
        }
        .generate()
        .unwrap();
        assert!(fam.last().same_shape(&pinched_star(7, 0.05, 1.0).unwrap(), 0.0));
    }

    #[test]
    fn figure2_is_nested_with_heavy_subtree() {
        let fam = FamilySpec::Figure2 {
            k: 4,
            heavy: 9,
            height: 1.0,
        }
        .generate()
        .unwrap();
        assert_eq!(fam.len(), 14);
        let last = fam.last();
        // heavy leaves share the path to v1 at depth 1/2
        assert!(last.spread().unwrap() > 0.2);
    }

    #[test]
    fn random_ultrametric_is_deterministic() {
        let spec = FamilySpec::RandomUltrametric {
            k: 12,
            height: 1.0,
            seed: 9,
        };
        let a = spec.generate().unwrap();
        let b = spec.generate().unwrap();
        assert!(a.last().same_shape(b.last(), 0.0));
        for (_, v) in a.last().leaves() {
            assert!((a.last().depth(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(FamilySpec::Star { k: 0, height: 1.0 }.generate().is_err());
        assert!(FamilySpec::PinchedStar {
            m: 3,
            s: 1.5,
            height: 1.0
        }
        .generate()
        .is_err());
        assert!(FamilySpec::Figure1 { k: 3, height: -1.0 }.generate().is_err());
    }

    #[test]
    fn file_family_violations_name_k() {
        let dir = std::env::temp_dir().join(format!("rootrecon-family-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let good = dir.join("good.nwk");
        std::fs::write(&good, "(a:1);\n((a:0.5,b:0.5):0.5);\n((a:0.5,b:0.5):0.5,c:1);\n").unwrap();
        let spec = FamilySpec::NewickFile { path: good };
        assert!(spec.violations().is_empty());
        assert_eq!(spec.member(3).unwrap().leaf_count(), 3);

        let bad = dir.join("bad.nwk");
        std::fs::write(&bad, "(a:1);\n((a:0.5,b:0.5):0.5);\n((a:0.5,c:0.5):0.5,b:1);\n").unwrap();
        let v = FamilySpec::NewickFile { path: bad }.violations();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("k = 3"), "{v:?}");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn member_matches_count() {
        let spec = FamilySpec::Figure1 { k: 9, height: 1.0 };
        assert_eq!(spec.member(3).unwrap().leaf_count(), 4);
        let spec = FamilySpec::PinchedStar { m: 3, s: 0.1, height: 1.0 };
        assert_eq!(spec.member(7).unwrap().leaf_count(), 7);
    }
}
