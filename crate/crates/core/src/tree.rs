//! Binary program trees, primitive sets and tree-fragment arithmetic.
//!
//! Trees are stored as a flat prefix-order node list. Every function is
//! binary, so a subtree is a contiguous slice and its extent can be found by
//! counting open child slots.

use crate::error::{GpError, Result};

/// Function and terminal symbols available to a problem. All functions have
/// arity two.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveSet {
    functions: Vec<String>,
    terminals: Vec<String>,
}

impl PrimitiveSet {
    pub fn new<F, T>(functions: F, terminals: T) -> Result<Self>
    where
        F: IntoIterator,
        F::Item: Into<String>,
        T: IntoIterator,
        T::Item: Into<String>,
    {
        let functions: Vec<String> = functions.into_iter().map(Into::into).collect();
        let terminals: Vec<String> = terminals.into_iter().map(Into::into).collect();
        if functions.is_empty() || terminals.is_empty() {
            return Err(GpError::Config(
                "primitive set needs at least one function and one terminal".into(),
            ));
        }
        if functions.len() > u8::MAX as usize + 1 || terminals.len() > u8::MAX as usize + 1 {
            return Err(GpError::Config("at most 256 symbols of each kind".into()));
        }
        let mut all: Vec<&String> = functions.iter().chain(terminals.iter()).collect();
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(GpError::Config("primitive symbols must be distinct".into()));
        }
        Ok(Self {
            functions,
            terminals,
        })
    }

    /// χ_f
    pub fn chi_f(&self) -> usize {
        self.functions.len()
    }

    /// χ_t
    pub fn chi_t(&self) -> usize {
        self.terminals.len()
    }

    pub fn functions(&self) -> &[String] {
        &self.functions
    }

    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    /// Frequency of terminals in the set, the conventional default for the
    /// terminal-draw probability `q`.
    pub fn terminal_frequency(&self) -> f64 {
        self.chi_t() as f64 / (self.chi_f() + self.chi_t()) as f64
    }

    pub fn terminal_index(&self, name: &str) -> Option<u8> {
        self.terminals
            .iter()
            .position(|t| t == name)
            .map(|i| i as u8)
    }

    pub fn function_index(&self, name: &str) -> Option<u8> {
        self.functions
            .iter()
            .position(|f| f == name)
            .map(|i| i as u8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Function(u8),
    Terminal(u8),
}

impl Node {
    pub fn is_terminal(self) -> bool {
        matches!(self, Node::Terminal(_))
    }
}

/// A binary parse tree in prefix order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProgramTree {
    nodes: Vec<Node>,
}

impl ProgramTree {
    /// Validates that `nodes` is exactly one complete prefix-order binary tree.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        let mut open = 1usize;
        for (i, n) in nodes.iter().enumerate() {
            if open == 0 {
                return Err(GpError::Config(format!(
                    "trailing nodes after position {i} in prefix sequence"
                )));
            }
            open -= 1;
            if let Node::Function(_) = n {
                open += 2;
            }
        }
        if open != 0 || nodes.is_empty() {
            return Err(GpError::Config("incomplete prefix sequence".into()));
        }
        Ok(Self { nodes })
    }

    pub(crate) fn from_nodes_unchecked(nodes: Vec<Node>) -> Self {
        debug_assert!(Self::from_nodes(nodes.clone()).is_ok());
        Self { nodes }
    }

    pub fn leaf(terminal: u8) -> Self {
        Self {
            nodes: vec![Node::Terminal(terminal)],
        }
    }

    pub fn join(function: u8, left: &ProgramTree, right: &ProgramTree) -> Self {
        let mut nodes = Vec::with_capacity(1 + left.size() + right.size());
        nodes.push(Node::Function(function));
        nodes.extend_from_slice(&left.nodes);
        nodes.extend_from_slice(&right.nodes);
        Self { nodes }
    }

    /// Balanced tree of `function` nodes over the given leaves; the leaf
    /// count must be a power of two.
    pub fn balanced(function: u8, leaves: &[u8]) -> Result<Self> {
        if leaves.is_empty() || !leaves.len().is_power_of_two() {
            return Err(GpError::Config(
                "balanced tree needs a power-of-two leaf count".into(),
            ));
        }
        fn build(f: u8, leaves: &[u8]) -> ProgramTree {
            if leaves.len() == 1 {
                return ProgramTree::leaf(leaves[0]);
            }
            let (l, r) = leaves.split_at(leaves.len() / 2);
            ProgramTree::join(f, &build(f, l), &build(f, r))
        }
        Ok(build(function, leaves))
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Total node count `s`.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// `t_s`
    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_terminal()).count()
    }

    /// `f_s`
    pub fn function_count(&self) -> usize {
        self.size() - self.leaf_count()
    }

    /// Longest root-to-leaf path measured in edges.
    pub fn height(&self) -> usize {
        let mut pending = vec![0usize];
        let mut height = 0;
        for n in &self.nodes {
            let d = pending.pop().expect("valid prefix tree");
            height = height.max(d);
            if let Node::Function(_) = n {
                pending.push(d + 1);
                pending.push(d + 1);
            }
        }
        height
    }

    /// Depth of every leaf, in left-to-right order.
    pub fn leaf_depths(&self) -> Vec<usize> {
        let mut pending = vec![0usize];
        let mut out = Vec::with_capacity(self.size() / 2 + 1);
        for n in &self.nodes {
            let d = pending.pop().expect("valid prefix tree");
            match n {
                Node::Function(_) => {
                    pending.push(d + 1);
                    pending.push(d + 1);
                }
                Node::Terminal(_) => out.push(d),
            }
        }
        out
    }

    pub fn is_full(&self) -> bool {
        let depths = self.leaf_depths();
        depths.windows(2).all(|w| w[0] == w[1])
    }

    /// Exclusive end index of the subtree rooted at `start`.
    pub fn subtree_end(&self, start: usize) -> usize {
        let mut open = 1usize;
        let mut j = start;
        while open > 0 {
            open -= 1;
            if let Node::Function(_) = self.nodes[j] {
                open += 2;
            }
            j += 1;
        }
        j
    }

    pub fn subtree(&self, start: usize) -> ProgramTree {
        let end = self.subtree_end(start);
        Self {
            nodes: self.nodes[start..end].to_vec(),
        }
    }

    /// Terminal symbols in left-to-right (inorder) order.
    pub fn leaves(&self) -> impl Iterator<Item = u8> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Terminal(t) => Some(*t),
            Node::Function(_) => None,
        })
    }

    /// Render as an s-expression using the primitive names.
    pub fn render(&self, prims: &PrimitiveSet) -> String {
        fn go(t: &ProgramTree, i: usize, p: &PrimitiveSet, out: &mut String) -> usize {
            match t.nodes[i] {
                Node::Terminal(s) => {
                    out.push_str(&p.terminals[s as usize]);
                    i + 1
                }
                Node::Function(f) => {
                    out.push('(');
                    out.push_str(&p.functions[f as usize]);
                    out.push(' ');
                    let j = go(t, i + 1, p, out);
                    out.push(' ');
                    let k = go(t, j, p, out);
                    out.push(')');
                    k
                }
            }
        }
        let mut s = String::new();
        go(self, 0, prims, &mut s);
        s
    }
}

/// Counts of defined symbols in a tree fragment (schema).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeFragment {
    pub n_functions: u32,
    pub n_terminals: u32,
}

impl TreeFragment {
    pub fn new(n_functions: u32, n_terminals: u32) -> Result<Self> {
        if n_functions + n_terminals == 0 {
            return Err(GpError::Domain(
                "fragment must define at least one symbol".into(),
            ));
        }
        Ok(Self {
            n_functions,
            n_terminals,
        })
    }

    /// Defining length `k = N_f + N_t`.
    pub fn defining_length(&self) -> u32 {
        self.n_functions + self.n_terminals
    }
}

/// Number of competing instantiations of a fragment, κ = χ_f^N_f · χ_t^N_t.
pub fn competition_size(frag: TreeFragment, prims: &PrimitiveSet) -> f64 {
    (prims.chi_f() as f64).powi(frag.n_functions as i32)
        * (prims.chi_t() as f64).powi(frag.n_terminals as i32)
}

/// Expected fragment instances in a full binary tree of size λ, φ ≈ 2^-k λ.
pub fn fragment_quantity(k: u32, lambda: f64) -> Result<f64> {
    if k < 1 || lambda < 1.0 {
        return Err(GpError::Domain(format!(
            "fragment quantity needs k >= 1 and lambda >= 1 (k={k}, lambda={lambda})"
        )));
    }
    Ok(lambda * 2f64.powi(-(k as i32)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeStats {
    pub count: usize,
    pub mean_size: f64,
    pub mean_height: f64,
    pub mean_leaves: f64,
}

pub fn tree_statistics(trees: &[ProgramTree]) -> Result<TreeStats> {
    if trees.is_empty() {
        return Err(GpError::Empty("tree statistics need at least one tree"));
    }
    let n = trees.len() as f64;
    let (mut size, mut height, mut leaves) = (0usize, 0usize, 0usize);
    for t in trees {
        size += t.size();
        height += t.height();
        leaves += t.leaf_count();
    }
    Ok(TreeStats {
        count: trees.len(),
        mean_size: size as f64 / n,
        mean_height: height as f64 / n,
        mean_leaves: leaves as f64 / n,
    })
}
