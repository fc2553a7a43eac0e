//! Partition refinement over the disjoint union of two LTSs.

use std::collections::{BTreeMap, HashMap};

use crate::process::ActionLabel;
use crate::semantics::Lts;

/// Pseudo-label marking successful termination in signatures.
const TICK: u32 = u32::MAX;

/// Two LTSs side by side with interned labels. States of the second LTS
/// are shifted by `split`. Label ids follow the label order.
pub(crate) struct Graph {
    pub labels: Vec<ActionLabel>,
    pub tau: Option<u32>,
    /// Outgoing `(label, target)` per state, sorted.
    pub out: Vec<Vec<(u32, u32)>>,
    pub terminating: Vec<bool>,
    pub split: usize,
    pub roots: (usize, usize),
}

impl Graph {
    pub fn union(left: &Lts, right: &Lts) -> Graph {
        let mut ids: BTreeMap<ActionLabel, u32> = BTreeMap::new();
        for t in left.transitions().iter().chain(right.transitions()) {
            ids.entry(t.label.clone()).or_insert(0);
        }
        for (i, v) in ids.values_mut().enumerate() {
            *v = i as u32;
        }
        let split = left.num_states();
        let n = split + right.num_states();
        let mut out = vec![Vec::new(); n];
        let mut terminating = vec![false; n];
        for (lts, offset) in [(left, 0), (right, split)] {
            for t in lts.transitions() {
                out[t.source + offset].push((ids[&t.label], (t.target + offset) as u32));
            }
            for &s in lts.terminating() {
                terminating[s + offset] = true;
            }
        }
        for edges in &mut out {
            edges.sort_unstable();
            edges.dedup();
        }
        Graph {
            tau: ids.get(&ActionLabel::Tau).copied(),
            labels: ids.into_keys().collect(),
            out,
            terminating,
            split,
            roots: (left.initial(), right.initial() + split),
        }
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_tau(&self, label: u32) -> bool {
        Some(label) == self.tau
    }
}

type SignatureKey = (u32, Vec<(u32, u32)>);

fn intern(table: &mut HashMap<SignatureKey, u32>, key: SignatureKey) -> u32 {
    let next = table.len() as u32;
    *table.entry(key).or_insert(next)
}

/// Strong bisimilarity classes (termination respected).
pub(crate) fn strong_blocks(g: &Graph) -> Vec<u32> {
    let mut block = vec![0u32; g.len()];
    let mut count = 1;
    loop {
        let mut table = HashMap::new();
        let next: Vec<u32> = (0..g.len())
            .map(|s| {
                let mut sig: Vec<(u32, u32)> = g.out[s]
                    .iter()
                    .map(|&(a, t)| (a, block[t as usize]))
                    .collect();
                if g.terminating[s] {
                    sig.push((TICK, 0));
                }
                sig.sort_unstable();
                sig.dedup();
                intern(&mut table, (block[s], sig))
            })
            .collect();
        block = next;
        if table.len() == count {
            return block;
        }
        count = table.len();
    }
}

/// Strongly connected components of the τ-subgraph, numbered in Tarjan
/// emission order: every component is numbered after all components it
/// reaches by τ.
fn tau_components(g: &Graph) -> (Vec<u32>, usize) {
    const UNSEEN: u32 = u32::MAX;
    let n = g.len();
    let tau_succ = |s: usize| -> Vec<u32> {
        g.out[s]
            .iter()
            .filter(|(a, _)| g.is_tau(*a))
            .map(|&(_, t)| t)
            .collect()
    };
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next_index = 0u32;
    let mut next_comp = 0u32;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // explicit call stack of (state, successors, position)
        let mut calls: Vec<(u32, Vec<u32>, usize)> = vec![(root as u32, tau_succ(root), 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        while let Some((v, succ, pos)) = calls.last_mut() {
            let v = *v as usize;
            if *pos < succ.len() {
                let w = succ[*pos] as usize;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    calls.push((w as u32, tau_succ(w), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some((parent, _, _)) = calls.last() {
                let p = *parent as usize;
                low[p] = low[p].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("component on stack") as usize;
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    (comp, next_comp as usize)
}

/// Branching bisimilarity classes (termination respected, no root
/// condition). τ-cycles are collapsed first; signatures then include the
/// signatures of inert τ-successors.
pub(crate) fn branching_blocks(g: &Graph) -> Vec<u32> {
    let (comp, count) = tau_components(g);
    let mut members_term = vec![false; count];
    let mut edges: Vec<Vec<(u32, u32)>> = vec![Vec::new(); count];
    for s in 0..g.len() {
        let c = comp[s] as usize;
        members_term[c] |= g.terminating[s];
        for &(a, t) in &g.out[s] {
            let d = comp[t as usize];
            if g.is_tau(a) && d as usize == c {
                continue;
            }
            edges[c].push((a, d));
        }
    }
    for e in &mut edges {
        e.sort_unstable();
        e.dedup();
    }

    let mut block = vec![0u32; count];
    let mut blocks = 1;
    loop {
        let mut table = HashMap::new();
        let mut sigs: Vec<Vec<(u32, u32)>> = vec![Vec::new(); count];
        let mut next = vec![0u32; count];
        for c in 0..count {
            let mut sig = Vec::new();
            if members_term[c] {
                sig.push((TICK, 0));
            }
            for &(a, d) in &edges[c] {
                let d = d as usize;
                if g.is_tau(a) && block[d] == block[c] {
                    // inert: d precedes c in emission order
                    sig.extend_from_slice(&sigs[d]);
                } else {
                    sig.push((a, block[d]));
                }
            }
            sig.sort_unstable();
            sig.dedup();
            next[c] = intern(&mut table, (block[c], sig.clone()));
            sigs[c] = sig;
        }
        block = next;
        if table.len() == blocks {
            break;
        }
        blocks = table.len();
    }
    comp.iter().map(|&c| block[c as usize]).collect()
}

/// Root condition: every initial step, τ included, is matched by an initial
/// step with the same label into the same class, and both roots agree on
/// termination.
pub(crate) fn roots_match(g: &Graph, block: &[u32]) -> bool {
    let (s, t) = g.roots;
    if block[s] != block[t] || g.terminating[s] != g.terminating[t] {
        return false;
    }
    let covered = |from: usize, to: usize| {
        g.out[from].iter().all(|&(a, x)| {
            g.out[to]
                .iter()
                .any(|&(b, y)| a == b && block[x as usize] == block[y as usize])
        })
    };
    covered(s, t) && covered(t, s)
}
