//! Simple undirected node-labelled graphs and their unravelings.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("node {0} does not exist")]
    NoSuchNode(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UGraph<L> {
    labels: Vec<L>,
    adj: Vec<BTreeSet<usize>>,
}

impl<L> Default for UGraph<L> {
    fn default() -> Self {
        UGraph {
            labels: Vec::new(),
            adj: Vec::new(),
        }
    }
}

impl<L: Clone> UGraph<L> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, label: L) -> usize {
        self.labels.push(label);
        self.adj.push(BTreeSet::new());
        self.labels.len() - 1
    }

    /// Adds `{u, w}`; adding an existing edge is a no-op.
    pub fn add_edge(&mut self, u: usize, w: usize) -> Result<(), GraphError> {
        if u == w {
            return Err(GraphError::SelfLoop(u));
        }
        for x in [u, w] {
            if x >= self.labels.len() {
                return Err(GraphError::NoSuchNode(x));
            }
        }
        self.adj[u].insert(w);
        self.adj[w].insert(u);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: usize) -> &L {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn set_label(&mut self, v: usize, label: L) {
        self.labels[v] = label;
    }

    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, w: usize) -> bool {
        self.adj.get(u).is_some_and(|a| a.contains(&w))
    }

    /// Edges `{u, w}` with `u < w`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, a)| a.iter().copied().filter(move |&w| u < w).map(move |w| (u, w)))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn map_labels<M: Clone>(&self, f: impl Fn(&L) -> M) -> UGraph<M> {
        UGraph {
            labels: self.labels.iter().map(f).collect(),
            adj: self.adj.clone(),
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        self.component(0).len() == self.len()
    }

    pub fn component(&self, v: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([v]);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for w in self.neighbours(u) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }

    pub fn is_tree(&self) -> bool {
        !self.is_empty() && self.is_connected() && self.edge_count() + 1 == self.len()
    }
}

/// Depth-bounded unraveling from `v`: one node per walk of length at most `depth`
/// starting at `v` (walks may step back), joined to the walk one step shorter. The
/// second component maps each walk to its last node.
pub fn unravel<L: Clone>(g: &UGraph<L>, v: usize, depth: usize) -> Result<(UGraph<L>, Vec<usize>), GraphError> {
    if v >= g.len() {
        return Err(GraphError::NoSuchNode(v));
    }
    let mut tree = UGraph::new();
    let mut proj = Vec::new();
    tree.add_node(g.label(v).clone());
    proj.push(v);
    let mut frontier = vec![0usize];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &t in &frontier {
            let end = proj[t];
            for w in g.neighbours(end) {
                let child = tree.add_node(g.label(w).clone());
                proj.push(w);
                tree.add_edge(t, child).expect("fresh child");
                next.push(child);
            }
        }
        frontier = next;
    }
    Ok((tree, proj))
}

/// Depth of every node of a tree measured from `root`.
pub fn depths<L: Clone>(tree: &UGraph<L>, root: usize) -> Vec<usize> {
    let mut depth = vec![usize::MAX; tree.len()];
    depth[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for w in tree.neighbours(u) {
            if depth[w] == usize::MAX {
                depth[w] = depth[u] + 1;
                queue.push_back(w);
            }
        }
    }
    depth
}
