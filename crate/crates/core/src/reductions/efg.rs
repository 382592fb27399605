use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Reduction;
use crate::error::{Error, Result};
use crate::graph::{Dag, PathIncidence};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EfgNode {
    /// We pick the child.
    Decision { children: Vec<usize> },
    /// The adversary picks the child.
    Observation { children: Vec<usize> },
    Terminal,
}

impl EfgNode {
    fn children(&self) -> &[usize] {
        match self {
            EfgNode::Decision { children } | EfgNode::Observation { children } => children,
            EfgNode::Terminal => &[],
        }
    }
}

/// A game tree. Nodes are referred to by their index in `nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfgGame {
    pub root: usize,
    pub nodes: Vec<EfgNode>,
}

impl EfgGame {
    /// Checks that the nodes form a single tree rooted at `root` in which
    /// every non-terminal has at least two children.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.root >= n {
            return Err(Error::MalformedGame(format!("root {} out of range", self.root)));
        }
        let mut parent_count = vec![0usize; n];
        for (u, node) in self.nodes.iter().enumerate() {
            let ch = node.children();
            if !matches!(node, EfgNode::Terminal) && ch.len() < 2 {
                return Err(Error::MalformedGame(format!("node {u} has fewer than 2 actions")));
            }
            for &c in ch {
                if c >= n {
                    return Err(Error::MalformedGame(format!("node {u} points to missing node {c}")));
                }
                parent_count[c] += 1;
            }
        }
        if parent_count[self.root] != 0 {
            return Err(Error::MalformedGame("root has a parent".into()));
        }
        if let Some(u) = (0..n).find(|&u| u != self.root && parent_count[u] != 1) {
            return Err(Error::MalformedGame(format!(
                "node {u} has {} parents, expected 1",
                parent_count[u]
            )));
        }
        // With one parent per non-root node, a cycle would leave part of the
        // tree unreachable from the root.
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            seen[u] = true;
            stack.extend(self.nodes[u].children());
        }
        if let Some(u) = seen.iter().position(|&s| !s) {
            return Err(Error::MalformedGame(format!("node {u} unreachable from the root")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let game: EfgGame =
            serde_json::from_str(text).map_err(|e| Error::MalformedGame(e.to_string()))?;
        game.validate()?;
        Ok(game)
    }

    pub fn terminals(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&u| matches!(self.nodes[u], EfgNode::Terminal))
            .collect()
    }

    /// Post-order of the tree.
    fn post_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((u, done)) = stack.pop() {
            if done {
                out.push(u);
            } else {
                stack.push((u, true));
                for &c in self.nodes[u].children().iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Number of reduced strategies `n(root)`, where `n(z) = 1`, decision
    /// nodes sum over children and observation nodes multiply.
    pub fn count_strategies(&self) -> BigUint {
        let mut count = vec![BigUint::zero(); self.nodes.len()];
        for u in self.post_order() {
            count[u] = match &self.nodes[u] {
                EfgNode::Terminal => BigUint::one(),
                EfgNode::Decision { children } => children.iter().map(|&c| &count[c]).sum(),
                EfgNode::Observation { children } => {
                    children.iter().fold(BigUint::one(), |acc, &c| acc * &count[c])
                }
            };
        }
        count[self.root].clone()
    }

    /// Terminal reached by playing `a` at decision nodes and `b` at
    /// observation nodes.
    pub fn outcome(&self, a: &[usize], b: &[usize]) -> usize {
        let mut u = self.root;
        loop {
            u = match &self.nodes[u] {
                EfgNode::Terminal => return u,
                EfgNode::Decision { children } => children[a[u]],
                EfgNode::Observation { children } => children[b[u]],
            };
        }
    }
}

/// The example game with a root decision over two observation nodes, each
/// leading to two binary decisions. Node ids: `x0 = 0`, `y1 = 1`, `y2 = 2`,
/// `x1..x4 = 3..6`, `z1..z8 = 7..14`.
pub fn example_game() -> EfgGame {
    let mut nodes = vec![
        EfgNode::Decision { children: vec![1, 2] },
        EfgNode::Observation { children: vec![3, 4] },
        EfgNode::Observation { children: vec![5, 6] },
    ];
    for i in 0..4 {
        nodes.push(EfgNode::Decision {
            children: vec![7 + 2 * i, 8 + 2 * i],
        });
    }
    nodes.extend(std::iter::repeat_n(EfgNode::Terminal, 8));
    EfgGame { root: 0, nodes }
}

/// Per-round loss: `y[z]` for terminal nodes and the adversary's choice
/// `b[u]` at observation nodes. Other entries are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfgLoss {
    pub y: Vec<f64>,
    pub b: Vec<usize>,
}

/// Game tree as a DAG: node `u` becomes `u_s = 2u` and `u_t = 2u + 1`.
/// Terminals add `(z_s, z_t)`; decision nodes add `(x_s, c_s), (c_t, x_t)`
/// per child; observation nodes chain their children in order.
#[derive(Debug, Clone)]
pub struct Efg {
    game: EfgGame,
    dag: Dag,
    terminal_edge: Vec<Option<usize>>,
    /// Position of each node among its parent's children.
    child_pos: Vec<usize>,
}

impl Efg {
    pub fn new(game: EfgGame) -> Result<Self> {
        game.validate()?;
        let n = game.nodes.len();
        let mut edges = Vec::new();
        let mut terminal_edge = vec![None; n];
        let mut child_pos = vec![0; n];
        for (u, node) in game.nodes.iter().enumerate() {
            match node {
                EfgNode::Terminal => {
                    terminal_edge[u] = Some(edges.len());
                    edges.push((2 * u, 2 * u + 1));
                }
                EfgNode::Decision { children } => {
                    for (i, &c) in children.iter().enumerate() {
                        child_pos[c] = i;
                        edges.push((2 * u, 2 * c));
                        edges.push((2 * c + 1, 2 * u + 1));
                    }
                }
                EfgNode::Observation { children } => {
                    edges.push((2 * u, 2 * children[0]));
                    for (i, w) in children.windows(2).enumerate() {
                        child_pos[w[1]] = i + 1;
                        edges.push((2 * w[0] + 1, 2 * w[1]));
                    }
                    edges.push((2 * children[children.len() - 1] + 1, 2 * u + 1));
                }
            }
        }
        let dag = Dag::new(2 * n, edges, 2 * game.root, 2 * game.root + 1)?;
        Ok(Efg {
            game,
            dag,
            terminal_edge,
            child_pos,
        })
    }

    pub fn game(&self) -> &EfgGame {
        &self.game
    }

    fn edge(&self, a: usize, b: usize) -> usize {
        self.dag.find_edge(a, b).expect("edge created in construction")
    }

    /// Canonical form of a strategy: entries off the realized part and at
    /// non-decision nodes are reset to 0.
    pub fn canonical(&self, a: &[usize]) -> Vec<usize> {
        let mut out = vec![0; self.game.nodes.len()];
        let mut stack = vec![self.game.root];
        while let Some(u) = stack.pop() {
            match &self.game.nodes[u] {
                EfgNode::Terminal => {}
                EfgNode::Decision { children } => {
                    out[u] = a[u];
                    stack.push(children[a[u]]);
                }
                EfgNode::Observation { children } => stack.extend(children),
            }
        }
        out
    }
}

impl Reduction for Efg {
    /// Action index per node; only decision nodes matter.
    type Action = Vec<usize>;
    type Loss = EfgLoss;

    fn dag(&self) -> &Dag {
        &self.dag
    }

    fn encode(&self, a: &Vec<usize>) -> Result<PathIncidence> {
        let n = self.game.nodes.len();
        if a.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.len(),
            });
        }
        // Each frame is a node to enter, or an edge to emit once its subtree
        // is done.
        enum Step {
            Enter(usize),
            Emit(usize),
        }
        let mut edges = Vec::new();
        let mut stack = vec![Step::Enter(self.game.root)];
        while let Some(step) = stack.pop() {
            let u = match step {
                Step::Emit(e) => {
                    edges.push(e);
                    continue;
                }
                Step::Enter(u) => u,
            };
            match &self.game.nodes[u] {
                EfgNode::Terminal => edges.push(self.terminal_edge[u].unwrap()),
                EfgNode::Decision { children } => {
                    let c = *children.get(a[u]).ok_or_else(|| {
                        Error::param("action", format!("action {} invalid at node {u}", a[u]))
                    })?;
                    edges.push(self.edge(2 * u, 2 * c));
                    stack.push(Step::Emit(self.edge(2 * c + 1, 2 * u + 1)));
                    stack.push(Step::Enter(c));
                }
                EfgNode::Observation { children } => {
                    edges.push(self.edge(2 * u, 2 * children[0]));
                    let last = children[children.len() - 1];
                    stack.push(Step::Emit(self.edge(2 * last + 1, 2 * u + 1)));
                    for w in children.windows(2).rev() {
                        stack.push(Step::Enter(w[1]));
                        stack.push(Step::Emit(self.edge(2 * w[0] + 1, 2 * w[1])));
                    }
                    stack.push(Step::Enter(children[0]));
                }
            }
        }
        PathIncidence::from_edges(&self.dag, edges)
    }

    fn decode(&self, p: &PathIncidence) -> Result<Vec<usize>> {
        let p = PathIncidence::from_edges(&self.dag, p.edges.clone())?;
        let mut a = vec![0; self.game.nodes.len()];
        for &e in &p.edges {
            let (x, y) = self.dag.edge(e);
            if x % 2 == 0 && y % 2 == 0 {
                let (u, c) = (x / 2, y / 2);
                if matches!(self.game.nodes[u], EfgNode::Decision { .. }) {
                    a[u] = self.child_pos[c];
                }
            }
        }
        Ok(a)
    }

    fn lift_loss(&self, loss: &EfgLoss) -> Vec<f64> {
        let mut w = vec![0.0; self.dag.num_edges()];
        let mut stack = vec![self.game.root];
        while let Some(u) = stack.pop() {
            match &self.game.nodes[u] {
                EfgNode::Terminal => w[self.terminal_edge[u].unwrap()] = loss.y[u],
                EfgNode::Decision { children } => stack.extend(children),
                EfgNode::Observation { children } => stack.push(children[loss.b[u]]),
            }
        }
        w
    }

    fn domain_loss(&self, a: &Vec<usize>, loss: &EfgLoss) -> f64 {
        loss.y[self.game.outcome(a, &loss.b)]
    }

    fn metadata(&self) -> serde_json::Value {
        json!({
            "domain": "efg",
            "nodes": self.game.nodes.len(),
            "strategies": self.game.count_strategies().to_string(),
            "terminal_edge": self.terminal_edge,
        })
    }
}
