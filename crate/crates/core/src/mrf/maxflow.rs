//! Boykov-Kolmogorov augmenting-path max-flow on the standard s/t graph of a
//! binary submodular energy.
//!
//! Label 1 is the source side. A node whose unary prefers label 1 by `d`
//! gets a source arc of capacity `d`, a node preferring 0 a sink arc of
//! capacity `-d`, and each pairwise term a pair of opposite arcs of capacity
//! `lambda`. After the flow saturates, nodes reachable from the source in
//! the residual graph take label 1; every other node takes label 0.

use std::collections::VecDeque;

use super::{EnergyProblem, Labeling};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Parent {
    Free,
    Terminal,
    Orphan,
    /// Arc from this node to its parent.
    Arc(usize),
}

struct FlowGraph {
    head: Vec<usize>,
    next: Vec<usize>,
    cap: Vec<f64>,
    first: Vec<usize>,
    /// Residual terminal capacity: positive towards the source, negative
    /// towards the sink.
    tr_cap: Vec<f64>,
    parent: Vec<Parent>,
    in_sink_tree: Vec<bool>,
    active: Vec<bool>,
    queue: VecDeque<usize>,
    orphans: VecDeque<usize>,
}

const NONE: usize = usize::MAX;

#[inline]
fn sister(a: usize) -> usize {
    a ^ 1
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        Self {
            head: Vec::new(),
            next: Vec::new(),
            cap: Vec::new(),
            first: vec![NONE; n],
            tr_cap: vec![0.0; n],
            parent: vec![Parent::Free; n],
            in_sink_tree: vec![false; n],
            active: vec![false; n],
            queue: VecDeque::new(),
            orphans: VecDeque::new(),
        }
    }

    fn add_edge(&mut self, i: usize, j: usize, cap_ij: f64, cap_ji: f64) {
        for (from, to, c) in [(i, j, cap_ij), (j, i, cap_ji)] {
            self.head.push(to);
            self.cap.push(c);
            self.next.push(self.first[from]);
            self.first[from] = self.head.len() - 1;
        }
    }

    fn arcs(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let mut a = self.first[i];
        std::iter::from_fn(move || {
            if a == NONE {
                None
            } else {
                let cur = a;
                a = self.next[a];
                Some(cur)
            }
        })
    }

    fn set_active(&mut self, i: usize) {
        if !self.active[i] {
            self.active[i] = true;
            self.queue.push_back(i);
        }
    }

    fn maxflow(&mut self) {
        for i in 0..self.tr_cap.len() {
            if self.tr_cap[i] != 0.0 {
                self.parent[i] = Parent::Terminal;
                self.in_sink_tree[i] = self.tr_cap[i] < 0.0;
                self.set_active(i);
            }
        }
        while let Some(&i) = self.queue.front() {
            if self.parent[i] == Parent::Free {
                self.queue.pop_front();
                self.active[i] = false;
                continue;
            }
            match self.grow(i) {
                Some(middle) => {
                    self.augment(middle);
                    self.adopt();
                }
                None => {
                    self.queue.pop_front();
                    self.active[i] = false;
                }
            }
        }
    }

    /// Extends the tree of `i` through its residual arcs. Returns the arc
    /// (directed source tree -> sink tree) joining the two trees, if any.
    fn grow(&mut self, i: usize) -> Option<usize> {
        let sink = self.in_sink_tree[i];
        let arcs: Vec<usize> = self.arcs(i).collect();
        for a in arcs {
            let residual = if sink {
                self.cap[sister(a)]
            } else {
                self.cap[a]
            };
            if residual <= 0.0 {
                continue;
            }
            let j = self.head[a];
            match self.parent[j] {
                Parent::Free => {
                    self.parent[j] = Parent::Arc(sister(a));
                    self.in_sink_tree[j] = sink;
                    self.set_active(j);
                }
                _ if self.in_sink_tree[j] != sink => {
                    return Some(if sink { sister(a) } else { a });
                }
                _ => {}
            }
        }
        None
    }

    fn augment(&mut self, middle: usize) {
        let mut flow = self.cap[middle];
        // Source side: walk from the tail of the middle arc to the source.
        let mut i = self.head[sister(middle)];
        while let Parent::Arc(a) = self.parent[i] {
            flow = flow.min(self.cap[sister(a)]);
            i = self.head[a];
        }
        flow = flow.min(self.tr_cap[i]);
        let mut i = self.head[middle];
        while let Parent::Arc(a) = self.parent[i] {
            flow = flow.min(self.cap[a]);
            i = self.head[a];
        }
        flow = flow.min(-self.tr_cap[i]);

        self.cap[middle] -= flow;
        self.cap[sister(middle)] += flow;
        let mut i = self.head[sister(middle)];
        while let Parent::Arc(a) = self.parent[i] {
            self.cap[a] += flow;
            self.cap[sister(a)] -= flow;
            let up = self.head[a];
            if self.cap[sister(a)] <= 0.0 {
                self.make_orphan(i);
            }
            i = up;
        }
        self.tr_cap[i] -= flow;
        if self.tr_cap[i] <= 0.0 {
            self.tr_cap[i] = 0.0;
            self.make_orphan(i);
        }
        let mut i = self.head[middle];
        while let Parent::Arc(a) = self.parent[i] {
            self.cap[sister(a)] += flow;
            self.cap[a] -= flow;
            let up = self.head[a];
            if self.cap[a] <= 0.0 {
                self.make_orphan(i);
            }
            i = up;
        }
        self.tr_cap[i] += flow;
        if self.tr_cap[i] >= 0.0 {
            self.tr_cap[i] = 0.0;
            self.make_orphan(i);
        }
    }

    fn make_orphan(&mut self, i: usize) {
        self.parent[i] = Parent::Orphan;
        self.orphans.push_back(i);
    }

    /// Whether the tree path from `j` still reaches its terminal.
    fn rooted(&self, mut j: usize) -> bool {
        loop {
            match self.parent[j] {
                Parent::Terminal => return true,
                Parent::Arc(a) => j = self.head[a],
                Parent::Free | Parent::Orphan => return false,
            }
        }
    }

    fn adopt(&mut self) {
        while let Some(i) = self.orphans.pop_front() {
            if self.parent[i] != Parent::Orphan {
                continue;
            }
            let sink = self.in_sink_tree[i];
            let arcs: Vec<usize> = self.arcs(i).collect();
            let new_parent = arcs.iter().copied().find(|&a| {
                let j = self.head[a];
                let residual = if sink {
                    self.cap[a]
                } else {
                    self.cap[sister(a)]
                };
                residual > 0.0
                    && self.parent[j] != Parent::Free
                    && self.in_sink_tree[j] == sink
                    && self.rooted(j)
            });
            if let Some(a) = new_parent {
                self.parent[i] = Parent::Arc(a);
                continue;
            }
            for a in arcs {
                let j = self.head[a];
                if self.parent[j] == Parent::Free || self.in_sink_tree[j] != sink {
                    continue;
                }
                let residual = if sink {
                    self.cap[a]
                } else {
                    self.cap[sister(a)]
                };
                if residual > 0.0 {
                    self.set_active(j);
                }
                if self.parent[j] == Parent::Arc(sister(a)) {
                    self.make_orphan(j);
                }
            }
            self.parent[i] = Parent::Free;
        }
    }

    /// Nodes reachable from the source through residual capacity.
    fn source_side(&self) -> Vec<bool> {
        let n = self.tr_cap.len();
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| self.tr_cap[i] > 0.0).collect();
        for &i in &stack {
            seen[i] = true;
        }
        while let Some(i) = stack.pop() {
            for a in self.arcs(i) {
                let j = self.head[a];
                if !seen[j] && self.cap[a] > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }
}

/// Exact maximizer of a submodular binary energy. Nodes indifferent after
/// the cut take label 0.
pub fn max_benefit_labeling(prob: &EnergyProblem) -> Result<Labeling> {
    prob.validate()?;
    let n = prob.n_nodes();
    let mut g = FlowGraph::new(n);
    for j in 0..n {
        g.tr_cap[j] = prob.unary1[j] - prob.unary0[j];
    }
    for &(j, k, lambda) in &prob.pairwise {
        if lambda > 0.0 {
            g.add_edge(j, k, lambda, lambda);
        }
    }
    g.maxflow();
    let labels = g.source_side();
    let value = prob.evaluate(&labels);
    Ok(Labeling { labels, value })
}
