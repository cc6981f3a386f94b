//! Kildall worklist solver, generic over the lattice, the transfer function
//! and the direction of flow.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

use crate::ir::{NodeId, RirFunction};

/// A join-semilattice. `leq` defaults to `join(a, b) == b`.
pub trait JoinSemiLattice: Clone + Eq {
    fn join(&self, other: &Self) -> Self;

    fn leq(&self, other: &Self) -> bool {
        self.join(other) == *other
    }
}

impl JoinSemiLattice for FixedBitSet {
    fn join(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    fn leq(&self, other: &Self) -> bool {
        self.is_subset(other)
    }
}

impl<A: JoinSemiLattice, B: JoinSemiLattice> JoinSemiLattice for (A, B) {
    fn join(&self, other: &Self) -> Self {
        (self.0.join(&other.0), self.1.join(&other.1))
    }

    fn leq(&self, other: &Self) -> bool {
        self.0.leq(&other.0) && self.1.leq(&other.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

pub trait Cfg {
    fn num_nodes(&self) -> usize;
    fn successors(&self, n: NodeId) -> Vec<NodeId>;

    fn entry(&self) -> NodeId {
        0
    }
}

impl Cfg for RirFunction {
    fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn successors(&self, n: NodeId) -> Vec<NodeId> {
        self.nodes[n].instr.successors()
    }
}

pub trait Analysis {
    type State: JoinSemiLattice;

    fn direction(&self) -> Direction;

    fn bottom(&self) -> Self::State;

    /// State flowing into the entry (forward) or out of every exit
    /// (backward).
    fn boundary(&self) -> Self::State;

    fn transfer(&self, n: NodeId, state: &Self::State) -> Self::State;

    /// Upper bound on the number of strict increases a single node's state
    /// can undergo.
    fn chain_bound(&self) -> usize;
}

/// Per-node states in the direction of flow: for a backward analysis
/// `state_in[n]` is the state after `n` and `state_out[n]` the one before.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult<S> {
    pub state_in: Vec<S>,
    pub state_out: Vec<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorklistOrder {
    Fifo,
    Lifo,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("dataflow did not converge within {limit} state changes")]
pub struct NonTermination {
    pub limit: usize,
}

/// Flow-direction predecessors and successors of every node.
fn flow_edges<C: Cfg + ?Sized>(cfg: &C, dir: Direction) -> (Vec<Vec<NodeId>>, Vec<Vec<NodeId>>) {
    let n = cfg.num_nodes();
    let mut succ = vec![vec![]; n];
    let mut pred = vec![vec![]; n];
    for u in 0..n {
        for v in cfg.successors(u) {
            let (a, b) = match dir {
                Direction::Forward => (u, v),
                Direction::Backward => (v, u),
            };
            if !succ[a].contains(&b) {
                succ[a].push(b);
                pred[b].push(a);
            }
        }
    }
    (pred, succ)
}

/// Reverse postorder from the entry; unreachable nodes follow in id order.
pub fn reverse_postorder<C: Cfg + ?Sized>(cfg: &C) -> Vec<NodeId> {
    let n = cfg.num_nodes();
    let mut seen = vec![false; n];
    let mut post = Vec::with_capacity(n);
    if n > 0 {
        // iterative DFS with explicit child cursors
        let mut stack: Vec<(NodeId, Vec<NodeId>, usize)> = vec![(cfg.entry(), cfg.successors(cfg.entry()), 0)];
        seen[cfg.entry()] = true;
        while let Some((node, succs, i)) = stack.last_mut() {
            if *i < succs.len() {
                let s = succs[*i];
                *i += 1;
                if !seen[s] {
                    seen[s] = true;
                    stack.push((s, cfg.successors(s), 0));
                }
            } else {
                post.push(*node);
                stack.pop();
            }
        }
    }
    post.reverse();
    post.extend((0..n).filter(|&v| !seen[v]));
    post
}

fn boundary_nodes<C: Cfg + ?Sized>(cfg: &C, dir: Direction) -> Vec<NodeId> {
    match dir {
        Direction::Forward => vec![cfg.entry()],
        Direction::Backward => (0..cfg.num_nodes()).filter(|&v| cfg.successors(v).is_empty()).collect(),
    }
}

pub fn solve<C: Cfg + ?Sized, A: Analysis>(cfg: &C, a: &A) -> Result<FlowResult<A::State>, NonTermination> {
    solve_with(cfg, a, WorklistOrder::Fifo)
}

pub fn solve_with<C: Cfg + ?Sized, A: Analysis>(
    cfg: &C,
    a: &A,
    order: WorklistOrder,
) -> Result<FlowResult<A::State>, NonTermination> {
    let n = cfg.num_nodes();
    let dir = a.direction();
    let (pred, succ) = flow_edges(cfg, dir);
    let mut is_boundary = vec![false; n];
    for b in boundary_nodes(cfg, dir) {
        is_boundary[b] = true;
    }
    let mut seed = reverse_postorder(cfg);
    if dir == Direction::Backward {
        seed.reverse();
    }
    let mut state_in = vec![a.bottom(); n];
    let mut state_out = vec![a.bottom(); n];
    let mut queued = vec![true; n];
    let mut work: VecDeque<NodeId> = seed.into();
    let limit = n.max(1) * a.chain_bound().max(1);
    let mut changes = 0;
    while let Some(v) = match order {
        WorklistOrder::Fifo => work.pop_front(),
        WorklistOrder::Lifo => work.pop_back(),
    } {
        queued[v] = false;
        let mut inp = if is_boundary[v] { a.boundary() } else { a.bottom() };
        for &p in &pred[v] {
            inp = inp.join(&state_out[p]);
        }
        let out = a.transfer(v, &inp);
        state_in[v] = inp;
        if out != state_out[v] {
            changes += 1;
            if changes > limit {
                return Err(NonTermination { limit });
            }
            state_out[v] = out;
            for &s in &succ[v] {
                if !queued[s] {
                    queued[s] = true;
                    work.push_back(s);
                }
            }
        }
    }
    Ok(FlowResult { state_in, state_out })
}

/// Post-fixpoint validation: boundary and edge constraints hold and every
/// out-state is the transfer of its in-state.
pub fn check_fixpoint<C: Cfg + ?Sized, A: Analysis>(cfg: &C, a: &A, r: &FlowResult<A::State>) -> Result<(), String> {
    let dir = a.direction();
    let (_, succ) = flow_edges(cfg, dir);
    for b in boundary_nodes(cfg, dir) {
        if !a.boundary().leq(&r.state_in[b]) {
            return Err(format!("boundary state not below in(bb{})", b));
        }
    }
    for (v, next) in succ.iter().enumerate() {
        let out = a.transfer(v, &r.state_in[v]);
        if out != r.state_out[v] {
            return Err(format!("out(bb{}) is not transfer(in(bb{}))", v, v));
        }
        for &s in next {
            if !out.leq(&r.state_in[s]) {
                return Err(format!("edge bb{} -> bb{} violates out <= in", v, s));
            }
        }
    }
    Ok(())
}
