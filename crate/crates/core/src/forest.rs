//! Ordered plane forests whose vertices carry a color (type) in `1..=d`.
//!
//! Forests are stored as an arena of vertex records in breadth-first
//! order, tree by tree. Equality is structural equality of the ordered
//! typed shape. Children of one parent must have nondecreasing colors;
//! the [`TypedForest::new_normalized`] constructor stably sorts siblings
//! by color for inputs that do not satisfy the constraint yet.

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Nested view of a tree, used for construction and JSON exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    /// Color in `1..=d`.
    pub color: usize,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn new(color: usize, children: Vec<TreeNode>) -> Self {
        TreeNode { color, children }
    }

    pub fn leaf(color: usize) -> Self {
        TreeNode { color, children: Vec::new() }
    }

    fn size(&self) -> usize {
        1 + self.children.iter().map(TreeNode::size).sum::<usize>()
    }

    fn sort_by_color(&mut self) {
        for c in &mut self.children {
            c.sort_by_color();
        }
        self.children.sort_by_key(|c| c.color);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Vertex {
    color: usize,
    parent: Option<VertexId>,
    children: Vec<VertexId>,
}

/// A `d`-type plane forest. The arena order of `verts` is the canonical
/// breadth-first labeling: trees in order, each tree generation by
/// generation, left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedForest {
    d: usize,
    verts: Vec<Vertex>,
    roots: Vec<VertexId>,
}

impl TypedForest {
    pub fn empty(d: usize) -> Self {
        TypedForest { d, verts: Vec::new(), roots: Vec::new() }
    }

    /// Builds a forest from nested trees, validating colors and the
    /// nondecreasing sibling-color constraint.
    pub fn new(d: usize, trees: &[TreeNode]) -> Result<Self> {
        let total: usize = trees.iter().map(TreeNode::size).sum();
        let mut verts: Vec<Vertex> = Vec::with_capacity(total);
        let mut roots = Vec::with_capacity(trees.len());
        for tree in trees {
            let root = Self::push_tree_bfs(d, tree, &mut verts)?;
            roots.push(root);
        }
        Ok(TypedForest { d, verts, roots })
    }

    /// Like [`TypedForest::new`] but first stably sorts every sibling
    /// list by color, for inputs that were produced without the
    /// constraint in mind.
    pub fn new_normalized(d: usize, trees: &[TreeNode]) -> Result<Self> {
        let mut trees = trees.to_vec();
        for t in &mut trees {
            t.sort_by_color();
        }
        Self::new(d, &trees)
    }

    /// Appends one tree in breadth-first order, returning the root id.
    fn push_tree_bfs(d: usize, tree: &TreeNode, verts: &mut Vec<Vertex>) -> Result<VertexId> {
        let root_id = verts.len();
        if tree.color == 0 || tree.color > d {
            return Err(Error::ColorOutOfRange { color: tree.color, d });
        }
        verts.push(Vertex { color: tree.color, parent: None, children: Vec::new() });
        // queue of (node, arena id) pairs; FIFO processing yields BFS order
        let mut queue: std::collections::VecDeque<(&TreeNode, VertexId)> =
            std::collections::VecDeque::new();
        queue.push_back((tree, root_id));
        while let Some((node, id)) = queue.pop_front() {
            let mut prev_color = 0usize;
            for child in &node.children {
                if child.color == 0 || child.color > d {
                    return Err(Error::ColorOutOfRange { color: child.color, d });
                }
                if child.color < prev_color {
                    return Err(Error::SiblingOrder { parent: id });
                }
                prev_color = child.color;
                let cid = verts.len();
                verts.push(Vertex { color: child.color, parent: Some(id), children: Vec::new() });
                verts[id].children.push(cid);
                queue.push_back((child, cid));
            }
        }
        Ok(root_id)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn color(&self, v: VertexId) -> usize {
        self.verts[v].color
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.verts[v].parent
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.verts[v].children
    }

    pub fn roots(&self) -> &[VertexId] {
        &self.roots
    }

    /// Root type sequence: the colors of the tree roots, in tree order.
    pub fn root_colors(&self) -> Vec<usize> {
        self.roots.iter().map(|&r| self.verts[r].color).collect()
    }

    /// Number of vertices of each type (indexed by `color - 1`).
    pub fn type_counts(&self) -> Vec<usize> {
        let mut n = vec![0usize; self.d];
        for v in &self.verts {
            n[v.color - 1] += 1;
        }
        n
    }

    /// Number of roots of each type (indexed by `color - 1`).
    pub fn root_counts(&self) -> Vec<usize> {
        let mut r = vec![0usize; self.d];
        for &root in &self.roots {
            r[self.verts[root].color - 1] += 1;
        }
        r
    }

    /// Per-type progeny of a vertex: entry `j-1` counts children of
    /// color `j`.
    pub fn progeny(&self, v: VertexId) -> Vec<usize> {
        let mut p = vec![0usize; self.d];
        for &c in &self.verts[v].children {
            p[self.verts[c].color - 1] += 1;
        }
        p
    }

    /// Breadth-first labeling: trees in order, each tree read from its
    /// root to its last generation, left to right. On a canonically
    /// built forest this is the identity permutation of the arena.
    pub fn bfs_order(&self) -> Vec<VertexId> {
        let mut order = Vec::with_capacity(self.verts.len());
        let mut queue = std::collections::VecDeque::new();
        for &root in &self.roots {
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                queue.extend(self.verts[v].children.iter().copied());
            }
        }
        order
    }

    /// Nested view, one `TreeNode` per tree.
    pub fn to_trees(&self) -> Vec<TreeNode> {
        self.roots.iter().map(|&r| self.subtree_node(r)).collect()
    }

    fn subtree_node(&self, v: VertexId) -> TreeNode {
        TreeNode {
            color: self.verts[v].color,
            children: self.verts[v].children.iter().map(|&c| self.subtree_node(c)).collect(),
        }
    }

    /// Assigns each vertex to its maximal monochromatic subtree. Returns
    /// `(block_of_vertex, block_colors, block_root_vertices)`; blocks are
    /// numbered in order of their roots in the breadth-first labeling.
    fn blocks(&self) -> (Vec<usize>, Vec<usize>, Vec<VertexId>) {
        let mut block = vec![usize::MAX; self.verts.len()];
        let mut colors = Vec::new();
        let mut block_roots = Vec::new();
        for (v, rec) in self.verts.iter().enumerate() {
            match rec.parent {
                Some(p) if self.verts[p].color == rec.color => block[v] = block[p],
                _ => {
                    block[v] = colors.len();
                    colors.push(rec.color);
                    block_roots.push(v);
                }
            }
        }
        (block, colors, block_roots)
    }

    /// The subforest of one type: the maximal monochromatic subtrees of
    /// color `color`, ranked by the positions of their roots in the
    /// breadth-first labeling. The result keeps the ambient `d`.
    pub fn subforest(&self, color: usize) -> Result<TypedForest> {
        if color == 0 || color > self.d {
            return Err(Error::ColorOutOfRange { color, d: self.d });
        }
        let trees: Vec<TreeNode> = self
            .subtree_roots(color)
            .into_iter()
            .map(|r| self.monochrome_node(r, color))
            .collect();
        TypedForest::new(self.d, &trees)
    }

    /// Roots of the color-`color` subtrees in rank order.
    pub fn subtree_roots(&self, color: usize) -> Vec<VertexId> {
        self.verts
            .iter()
            .enumerate()
            .filter(|(_, rec)| {
                rec.color == color
                    && match rec.parent {
                        Some(p) => self.verts[p].color != color,
                        None => true,
                    }
            })
            .map(|(v, _)| v)
            .collect()
    }

    fn monochrome_node(&self, v: VertexId, color: usize) -> TreeNode {
        TreeNode {
            color,
            children: self.verts[v]
                .children
                .iter()
                .filter(|&&c| self.verts[c].color == color)
                .map(|&c| self.monochrome_node(c, color))
                .collect(),
        }
    }

    /// Collapses every monochromatic subtree to a single vertex of the
    /// same type, keeping an edge between each pair of connected
    /// subtrees. Children of a collapsed vertex are ordered by color,
    /// ties broken by the rank of the corresponding subtree roots.
    pub fn reduce(&self) -> TypedForest {
        let (block, colors, block_roots) = self.blocks();
        let nblocks = colors.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); nblocks];
        let mut parent: Vec<Option<usize>> = vec![None; nblocks];
        for (b, &root) in block_roots.iter().enumerate() {
            if let Some(p) = self.verts[root].parent {
                let pb = block[p];
                parent[b] = Some(pb);
                children[pb].push(b);
            }
        }
        for ch in &mut children {
            ch.sort_by_key(|&b| colors[b]); // stable: rank order within a color
        }
        let tree_roots: Vec<usize> =
            (0..nblocks).filter(|&b| parent[b].is_none()).collect();
        let trees: Vec<TreeNode> = tree_roots
            .iter()
            .map(|&b| Self::block_node(b, &colors, &children))
            .collect();
        TypedForest::new(self.d, &trees).expect("collapse preserves validity")
    }

    fn block_node(b: usize, colors: &[usize], children: &[Vec<usize>]) -> TreeNode {
        TreeNode {
            color: colors[b],
            children: children[b].iter().map(|&c| Self::block_node(c, colors, children)).collect(),
        }
    }

    /// The `(r, n, k)` signature of the forest: root counts, vertex
    /// counts, and the matrix whose off-diagonal entry `(i, j)` counts
    /// color-`j` vertices with a color-`i` parent, the diagonal being
    /// fixed by the column identity.
    pub fn signature(&self) -> Signature {
        let d = self.d;
        let n: Vec<i64> = self.type_counts().iter().map(|&x| x as i64).collect();
        let r: Vec<i64> = self.root_counts().iter().map(|&x| x as i64).collect();
        let mut k = vec![vec![0i64; d]; d];
        for rec in &self.verts {
            if let Some(p) = rec.parent {
                let pi = self.verts[p].color - 1;
                let vj = rec.color - 1;
                if pi != vj {
                    k[pi][vj] += 1;
                }
            }
        }
        for j in 0..d {
            let col: i64 = (0..d).filter(|&i| i != j).map(|i| k[i][j]).sum();
            k[j][j] = -(r[j] + col);
        }
        Signature { d, r, n, k }
    }
}

/// Root counts, vertex counts and the collapsed-forest matrix of a
/// forest class. Off-diagonal `k[i][j] >= 0`; the diagonal satisfies
/// `-k[j][j] = r[j] + sum_{i != j} k[i][j]` and `n[j] >= -k[j][j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub d: usize,
    pub r: Vec<i64>,
    pub n: Vec<i64>,
    pub k: Vec<Vec<i64>>,
}

impl Signature {
    pub fn new(d: usize, r: Vec<i64>, n: Vec<i64>, k: Vec<Vec<i64>>) -> Result<Self> {
        let sig = Signature { d, r, n, k };
        sig.validate()?;
        Ok(sig)
    }

    /// Builds the signature from root counts, vertex counts, and the
    /// off-diagonal entries alone, deriving the diagonal.
    pub fn from_off_diagonal(d: usize, r: Vec<i64>, n: Vec<i64>, mut k: Vec<Vec<i64>>) -> Result<Self> {
        for j in 0..d {
            let col: i64 = (0..d).filter(|&i| i != j).map(|i| k[i][j]).sum();
            k[j][j] = -(r[j] + col);
        }
        Signature::new(d, r, n, k)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        if self.r.len() != d || self.n.len() != d || self.k.len() != d {
            return Err(Error::Hypothesis("signature dimension mismatch".into()));
        }
        if self.r.iter().any(|&x| x < 0) {
            return Err(Error::Hypothesis("negative root count".into()));
        }
        if self.r.iter().sum::<i64>() < 1 {
            return Err(Error::Hypothesis("at least one root required".into()));
        }
        for j in 0..d {
            if self.k[j].len() != d {
                return Err(Error::Hypothesis("signature matrix not square".into()));
            }
            for i in 0..d {
                if i != j && self.k[i][j] < 0 {
                    return Err(Error::Hypothesis("negative off-diagonal entry".into()));
                }
            }
            let col: i64 = (0..d).filter(|&i| i != j).map(|i| self.k[i][j]).sum();
            if -self.k[j][j] != self.r[j] + col {
                return Err(Error::Hypothesis(format!(
                    "column {j}: diagonal inconsistent with roots and off-diagonal entries"
                )));
            }
            if self.n[j] < -self.k[j][j] {
                return Err(Error::Hypothesis(format!(
                    "column {j}: vertex count below subtree count"
                )));
            }
        }
        Ok(())
    }

    /// Number of monochromatic subtrees of each type, `-k[j][j]`.
    pub fn subtree_counts(&self) -> Vec<i64> {
        (0..self.d).map(|j| -self.k[j][j]).collect()
    }

    /// `k'` matrix: diagonal `n_i + k_ii`, off-diagonal unchanged.
    pub fn k_prime(&self) -> Vec<Vec<i64>> {
        let mut kp = self.k.clone();
        for i in 0..self.d {
            kp[i][i] += self.n[i];
        }
        kp
    }

    /// `(-k[i][j])` as a matrix, the determinant side of the counting
    /// identities.
    pub fn negated_matrix(&self) -> Vec<Vec<i64>> {
        self.k.iter().map(|row| row.iter().map(|&e| -e).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(color: usize, children: Vec<TreeNode>) -> TreeNode {
        TreeNode::new(color, children)
    }

    /// Two-type example used across tests: tree 1 has a type-1 root with
    /// a type-1 and a type-2 child; the type-1 child bears one type-2
    /// child; tree 2 is a type-2 root with one type-1 child.
    fn two_type_forest() -> TypedForest {
        TypedForest::new(
            2,
            &[
                t(1, vec![t(1, vec![t(2, vec![])]), t(2, vec![])]),
                t(2, vec![t(1, vec![])]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn bfs_empty_and_single() {
        let f = TypedForest::empty(2);
        assert!(f.bfs_order().is_empty());
        let g = TypedForest::new(2, &[t(1, vec![])]).unwrap();
        assert_eq!(g.bfs_order(), vec![0]);
    }

    #[test]
    fn bfs_path_hand_trace() {
        // root -> child -> grandchild: BFS must list them in that order
        let f = TypedForest::new(2, &[t(1, vec![t(1, vec![t(2, vec![])])])]).unwrap();
        assert_eq!(f.bfs_order(), vec![0, 1, 2]);
        assert_eq!(f.color(0), 1);
        assert_eq!(f.color(2), 2);
    }

    #[test]
    fn bfs_is_canonical_arena_order() {
        let f = two_type_forest();
        assert_eq!(f.bfs_order(), (0..f.len()).collect::<Vec<_>>());
        // parents precede children
        for v in 0..f.len() {
            if let Some(p) = f.parent(v) {
                assert!(p < v);
            }
        }
    }

    #[test]
    fn bfs_generation_order() {
        // tree: 1 with children (1, 2); the type-1 child has child 2.
        // generations: [root], [c1, c2], [gc]
        let f = TypedForest::new(2, &[t(1, vec![t(1, vec![t(2, vec![])]), t(2, vec![])])]).unwrap();
        let colors: Vec<usize> = f.bfs_order().iter().map(|&v| f.color(v)).collect();
        assert_eq!(colors, vec![1, 1, 2, 2]);
        assert_eq!(f.parent(3), Some(1)); // grandchild hangs under first child
    }

    #[test]
    fn sibling_order_enforced_and_normalized() {
        let bad = [t(1, vec![t(2, vec![]), t(1, vec![])])];
        assert!(matches!(TypedForest::new(2, &bad), Err(Error::SiblingOrder { .. })));
        let fixed = TypedForest::new_normalized(2, &bad).unwrap();
        let colors: Vec<usize> = (0..fixed.len()).map(|v| fixed.color(v)).collect();
        assert_eq!(colors, vec![1, 1, 2]);
    }

    #[test]
    fn color_range_checked() {
        assert!(matches!(
            TypedForest::new(2, &[t(3, vec![])]),
            Err(Error::ColorOutOfRange { color: 3, d: 2 })
        ));
        assert!(TypedForest::new(2, &[t(0, vec![])]).is_err());
    }

    #[test]
    fn subforest_monochromatic_cases() {
        let f = TypedForest::new(2, &[t(1, vec![t(1, vec![]), t(1, vec![])])]).unwrap();
        let s1 = f.subforest(1).unwrap();
        assert_eq!(s1, f);
        let s2 = f.subforest(2).unwrap();
        assert!(s2.is_empty());
    }

    #[test]
    fn subforest_counts_hand_trace() {
        // two_type_forest: type-1 subtrees: {root, its type-1 child} and
        // {the child of tree 2}; type-2 subtrees: three singletons.
        let f = two_type_forest();
        let s1 = f.subforest(1).unwrap();
        assert_eq!(s1.roots().len(), 2);
        assert_eq!(s1.len(), 3);
        assert!(s1.bfs_order().iter().all(|&v| s1.color(v) == 1));
        let s2 = f.subforest(2).unwrap();
        assert_eq!(s2.roots().len(), 3);
        assert_eq!(s2.len(), 3);
        // rank order: the deeper type-2 vertex of tree 1 appears before
        // tree 2's root only if its BFS position is earlier; here tree 1
        // holds positions 0..=3 and tree 2 positions 4..=5, so the two
        // type-2 vertices of tree 1 come first.
        assert_eq!(s2.root_colors(), vec![2, 2, 2]);
    }

    #[test]
    fn reduce_fixed_point_and_full_collapse() {
        let reduced = TypedForest::new(2, &[t(1, vec![t(2, vec![])])]).unwrap();
        assert_eq!(reduced.reduce(), reduced);
        let mono = TypedForest::new(2, &[t(1, vec![t(1, vec![t(1, vec![])]), t(1, vec![])])]).unwrap();
        let collapsed = mono.reduce();
        assert_eq!(collapsed.len(), 1);
        assert_eq!(collapsed.color(0), 1);
    }

    #[test]
    fn reduce_hand_trace() {
        let f = two_type_forest();
        let r = f.reduce();
        // blocks: {u0,u1}(1), {u2}(2)... tree 1 collapses to a type-1
        // vertex with two type-2 children, one of which is a leaf; tree 2
        // to a type-2 vertex with a type-1 child.
        assert_eq!(r.type_counts(), vec![2, 3]);
        assert_eq!(r.root_colors(), vec![1, 2]);
        // no vertex keeps a child of its own color
        for v in 0..r.len() {
            for &c in r.children(v) {
                assert_ne!(r.color(c), r.color(v));
            }
        }
        // idempotent
        assert_eq!(r.reduce(), r);
    }

    #[test]
    fn reduce_counts_match_subtrees() {
        let f = two_type_forest();
        let r = f.reduce();
        for color in 1..=2 {
            assert_eq!(
                r.type_counts()[color - 1],
                f.subforest(color).unwrap().roots().len(),
            );
        }
    }

    #[test]
    fn signature_of_forest() {
        let f = two_type_forest();
        let sig = f.signature();
        assert_eq!(sig.n, vec![3, 3]);
        assert_eq!(sig.r, vec![1, 1]);
        assert_eq!(sig.k[0][1], 2); // two type-2 vertices with type-1 parent
        assert_eq!(sig.k[1][0], 1);
        assert_eq!(sig.k[0][0], -2);
        assert_eq!(sig.k[1][1], -3);
        sig.validate().unwrap();
        assert_eq!(sig.subtree_counts(), vec![2, 3]);
        assert_eq!(sig.k_prime()[0][0], 1);
    }

    #[test]
    fn signature_validation_rejects() {
        assert!(Signature::new(2, vec![1, 0], vec![1, 1], vec![vec![-1, 1], vec![0, -2]]).is_err());
        assert!(Signature::new(2, vec![0, 0], vec![0, 0], vec![vec![0, 0], vec![0, 0]]).is_err());
        assert!(Signature::from_off_diagonal(2, vec![1, 0], vec![0, 1], vec![vec![0, 1], vec![0, 0]])
            .is_err()); // n_1 = 0 < 1 subtree
        let ok = Signature::from_off_diagonal(2, vec![1, 0], vec![1, 1], vec![vec![0, 1], vec![0, 0]])
            .unwrap();
        assert_eq!(ok.k[0][0], -1);
        assert_eq!(ok.k[1][1], -1);
    }

    #[test]
    fn round_trip_nested_view() {
        let f = two_type_forest();
        let g = TypedForest::new(2, &f.to_trees()).unwrap();
        assert_eq!(f, g);
    }
}
