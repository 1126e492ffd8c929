//! Binary complete planar rooted trees.
//!
//! Leaves are numbered 1..n left to right, which is the unique numbering
//! compatible with the left-descendant < right-descendant rule. The 0-tree
//! (a root with no edge) and the 1-tree are the degenerate cases.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub const MAX_TREE_LEAVES: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeNode {
    Leaf,
    Node(Box<TreeNode>, Box<TreeNode>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlanarTree {
    root: Option<TreeNode>,
}

impl TreeNode {
    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf => 1,
            TreeNode::Node(l, r) => l.leaves() + r.leaves(),
        }
    }
}

impl PlanarTree {
    pub fn empty() -> Self {
        PlanarTree { root: None }
    }

    pub fn leaf() -> Self {
        PlanarTree {
            root: Some(TreeNode::Leaf),
        }
    }

    pub fn join(left: &PlanarTree, right: &PlanarTree) -> Result<Self> {
        match (&left.root, &right.root) {
            (Some(l), Some(r)) => Ok(PlanarTree {
                root: Some(TreeNode::Node(Box::new(l.clone()), Box::new(r.clone()))),
            }),
            _ => Err(Error::domain("cannot join an empty tree")),
        }
    }

    pub fn root(&self) -> Option<&TreeNode> {
        self.root.as_ref()
    }

    pub fn leaves(&self) -> usize {
        self.root.as_ref().map_or(0, TreeNode::leaves)
    }

    /// Left and right descendants (for trees with at least 2 leaves).
    pub fn descendants(&self) -> Option<(PlanarTree, PlanarTree)> {
        match &self.root {
            Some(TreeNode::Node(l, r)) => Some((
                PlanarTree {
                    root: Some((**l).clone()),
                },
                PlanarTree {
                    root: Some((**r).clone()),
                },
            )),
            _ => None,
        }
    }

    /// All n-trees, ordered recursively by left-subtree size.
    pub fn enumerate(n: usize) -> Result<Vec<PlanarTree>> {
        if n > MAX_TREE_LEAVES {
            return Err(Error::unsupported(format!(
                "tree enumeration capped at {MAX_TREE_LEAVES} leaves, requested {n}"
            )));
        }
        fn nodes(n: usize) -> Vec<TreeNode> {
            if n == 1 {
                return vec![TreeNode::Leaf];
            }
            let mut out = Vec::new();
            for left in 1..n {
                for l in nodes(left) {
                    for r in nodes(n - left) {
                        out.push(TreeNode::Node(Box::new(l.clone()), Box::new(r)));
                    }
                }
            }
            out
        }
        if n == 0 {
            return Ok(vec![PlanarTree::empty()]);
        }
        Ok(nodes(n)
            .into_iter()
            .map(|t| PlanarTree { root: Some(t) })
            .collect())
    }

    pub fn left_comb(n: usize) -> Result<PlanarTree> {
        if n == 0 {
            return Ok(PlanarTree::empty());
        }
        let mut t = PlanarTree::leaf();
        for _ in 1..n {
            t = PlanarTree::join(&t, &PlanarTree::leaf())?;
        }
        Ok(t)
    }

    pub fn right_comb(n: usize) -> Result<PlanarTree> {
        if n == 0 {
            return Ok(PlanarTree::empty());
        }
        let mut t = PlanarTree::leaf();
        for _ in 1..n {
            t = PlanarTree::join(&PlanarTree::leaf(), &t)?;
        }
        Ok(t)
    }

    /// Extracted subtree on a set of leaf numbers (1-based): keep the edges
    /// leading to the chosen leaves and contract the valency-(1,1) chains.
    pub fn extract(&self, leaf_set: &BTreeSet<usize>) -> Result<PlanarTree> {
        for &l in leaf_set {
            if l == 0 || l > self.leaves() {
                return Err(Error::domain(format!(
                    "leaf {l} outside 1..={}",
                    self.leaves()
                )));
            }
        }
        fn rec(node: &TreeNode, offset: usize, keep: &BTreeSet<usize>) -> Option<TreeNode> {
            match node {
                TreeNode::Leaf => {
                    if keep.contains(&(offset + 1)) {
                        Some(TreeNode::Leaf)
                    } else {
                        None
                    }
                }
                TreeNode::Node(l, r) => {
                    let nl = l.leaves();
                    let left = rec(l, offset, keep);
                    let right = rec(r, offset + nl, keep);
                    match (left, right) {
                        (Some(a), Some(b)) => Some(TreeNode::Node(Box::new(a), Box::new(b))),
                        (Some(a), None) => Some(a),
                        (None, Some(b)) => Some(b),
                        (None, None) => None,
                    }
                }
            }
        }
        match &self.root {
            None => Ok(PlanarTree::empty()),
            Some(root) => Ok(PlanarTree {
                root: rec(root, 0, leaf_set),
            }),
        }
    }

    /// Text form: leaves as their numbers, internal nodes as `(left right)`.
    pub fn render(&self) -> String {
        fn rec(node: &TreeNode, next: &mut usize, out: &mut String) {
            match node {
                TreeNode::Leaf => {
                    out.push_str(&next.to_string());
                    *next += 1;
                }
                TreeNode::Node(l, r) => {
                    out.push('(');
                    rec(l, next, out);
                    out.push(' ');
                    rec(r, next, out);
                    out.push(')');
                }
            }
        }
        match &self.root {
            None => "()".to_string(),
            Some(root) => {
                let mut out = String::new();
                let mut next = 1;
                rec(root, &mut next, &mut out);
                out
            }
        }
    }

    /// Parses the `render` format; leaf numbers must be the left-to-right
    /// sequence.
    pub fn parse(text: &str) -> Result<PlanarTree> {
        let text = text.trim();
        if text == "()" {
            return Ok(PlanarTree::empty());
        }
        struct P<'a> {
            chars: std::iter::Peekable<std::str::Chars<'a>>,
            next_leaf: usize,
        }
        impl P<'_> {
            fn skip_ws(&mut self) {
                while self.chars.peek().is_some_and(|c| c.is_whitespace()) {
                    self.chars.next();
                }
            }
            fn node(&mut self) -> Result<TreeNode> {
                self.skip_ws();
                match self.chars.peek() {
                    Some('(') => {
                        self.chars.next();
                        let l = self.node()?;
                        let r = self.node()?;
                        self.skip_ws();
                        if self.chars.next() != Some(')') {
                            return Err(Error::parse("expected `)` in tree"));
                        }
                        Ok(TreeNode::Node(Box::new(l), Box::new(r)))
                    }
                    Some(c) if c.is_ascii_digit() => {
                        let mut num = String::new();
                        while self.chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                            num.push(self.chars.next().unwrap());
                        }
                        let n: usize = num.parse().map_err(|_| Error::parse("bad leaf number"))?;
                        if n != self.next_leaf {
                            return Err(Error::parse(format!(
                                "leaf {n} out of order, expected {}",
                                self.next_leaf
                            )));
                        }
                        self.next_leaf += 1;
                        Ok(TreeNode::Leaf)
                    }
                    other => Err(Error::parse(format!("unexpected {other:?} in tree"))),
                }
            }
        }
        let mut p = P {
            chars: text.chars().peekable(),
            next_leaf: 1,
        };
        let root = p.node()?;
        p.skip_ws();
        if p.chars.next().is_some() {
            return Err(Error::parse("trailing input after tree"));
        }
        Ok(PlanarTree { root: Some(root) })
    }
}

/// One left rotation `A (B C) -> (A B) C` somewhere inside a tree: the
/// associativity move relating two iterated-coproduct maps.
#[derive(Debug, Clone)]
pub struct RotationStep {
    /// Leaves strictly to the left of the rotated subtree.
    pub prefix: usize,
    /// Leaves strictly to the right.
    pub suffix: usize,
    pub a: PlanarTree,
    pub b: PlanarTree,
    pub c: PlanarTree,
}

/// Deterministic path from a tree to the left comb by repeated left
/// rotations (outermost-first). The tree after the final step is the left
/// comb.
pub fn rotation_path_to_left_comb(tree: &PlanarTree) -> Vec<RotationStep> {
    let mut steps = Vec::new();
    let mut current = tree.clone();
    while let Some((next, step)) = rotate_once(&current) {
        steps.push(step);
        current = next;
    }
    debug_assert_eq!(current, PlanarTree::left_comb(tree.leaves()).unwrap());
    steps
}

fn rotate_once(tree: &PlanarTree) -> Option<(PlanarTree, RotationStep)> {
    let total = tree.leaves();
    fn rec(node: &TreeNode, offset: usize, total: usize) -> Option<(TreeNode, RotationStep)> {
        if let TreeNode::Node(l, r) = node {
            if let TreeNode::Node(b, c) = &**r {
                let a_tree = PlanarTree {
                    root: Some((**l).clone()),
                };
                let b_tree = PlanarTree {
                    root: Some((**b).clone()),
                };
                let c_tree = PlanarTree {
                    root: Some((**c).clone()),
                };
                let here = a_tree.leaves() + b_tree.leaves() + c_tree.leaves();
                let step = RotationStep {
                    prefix: offset,
                    suffix: total - offset - here,
                    a: a_tree,
                    b: b_tree,
                    c: c_tree,
                };
                let rotated =
                    TreeNode::Node(Box::new(TreeNode::Node(l.clone(), b.clone())), c.clone());
                return Some((rotated, step));
            }
            let nl = l.leaves();
            if let Some((nl_node, step)) = rec(l, offset, total) {
                return Some((TreeNode::Node(Box::new(nl_node), r.clone()), step));
            }
            if let Some((nr_node, step)) = rec(r, offset + nl, total) {
                return Some((TreeNode::Node(l.clone(), Box::new(nr_node)), step));
            }
        }
        None
    }
    let root = tree.root.as_ref()?;
    let (new_root, step) = rec(root, 0, total)?;
    Some((
        PlanarTree {
            root: Some(new_root),
        },
        step,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalan(n: usize) -> usize {
        fn c(n: usize) -> usize {
            if n == 0 {
                return 1;
            }
            (0..n).map(|i| c(i) * c(n - 1 - i)).sum()
        }
        c(n)
    }

    #[test]
    fn counts_match_catalan() {
        assert_eq!(PlanarTree::enumerate(0).unwrap().len(), 1);
        for n in 1..=6 {
            let trees = PlanarTree::enumerate(n).unwrap();
            assert_eq!(trees.len(), catalan(n - 1), "n = {n}");
            for t in &trees {
                assert_eq!(t.leaves(), n);
            }
            let set: BTreeSet<_> = trees.iter().cloned().collect();
            assert_eq!(set.len(), trees.len());
        }
        assert!(PlanarTree::enumerate(7).is_err());
    }

    #[test]
    fn render_parse_round_trip() {
        for n in 0..=5 {
            for t in PlanarTree::enumerate(n).unwrap() {
                let text = t.render();
                assert_eq!(PlanarTree::parse(&text).unwrap(), t, "on `{text}`");
            }
        }
        assert_eq!(PlanarTree::left_comb(3).unwrap().render(), "((1 2) 3)");
        assert_eq!(PlanarTree::right_comb(3).unwrap().render(), "(1 (2 3))");
    }

    #[test]
    fn extraction_examples() {
        let t = PlanarTree::left_comb(3).unwrap();
        let all: BTreeSet<usize> = [1, 2, 3].into();
        assert_eq!(t.extract(&all).unwrap(), t);
        let one: BTreeSet<usize> = [2].into();
        assert_eq!(t.extract(&one).unwrap(), PlanarTree::leaf());
        // left comb, leaves {1,3}: the unique 2-tree
        let pair: BTreeSet<usize> = [1, 3].into();
        assert_eq!(
            t.extract(&pair).unwrap(),
            PlanarTree::join(&PlanarTree::leaf(), &PlanarTree::leaf()).unwrap()
        );
        assert_eq!(t.extract(&BTreeSet::new()).unwrap(), PlanarTree::empty());
        assert!(t.extract(&[7].into()).is_err());
    }

    #[test]
    fn rotation_paths_end_at_left_comb() {
        for n in 1..=5 {
            for t in PlanarTree::enumerate(n).unwrap() {
                let steps = rotation_path_to_left_comb(&t);
                let mut cur = t.clone();
                for _ in &steps {
                    let (next, _) = rotate_once(&cur).expect("step available");
                    cur = next;
                }
                assert_eq!(cur, PlanarTree::left_comb(n).unwrap());
                assert!(rotate_once(&cur).is_none());
            }
        }
    }
}
