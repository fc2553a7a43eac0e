//! Distinguishing observations, found by breadth-first search over pairs
//! of inequivalent states.

use std::collections::{HashMap, VecDeque};

use super::partition::Graph;
use super::{Capabilities, Witness};

fn capabilities(g: &Graph, s: usize) -> Capabilities {
    Capabilities {
        terminates: g.terminating[s],
        enabled: g.out[s]
            .iter()
            .map(|&(a, _)| g.labels[a as usize].clone())
            .collect(),
    }
}

fn stable(g: &Graph, s: usize) -> bool {
    g.out[s].iter().all(|&(a, _)| !g.is_tau(a))
}

/// Shortest path from the root pair to a pair with different capabilities,
/// preferring pairs where neither side can do τ. Moves are joint steps on
/// equal labels and, when `branching`, single τ steps of either side. Only
/// inequivalent pairs are explored beyond the root.
pub(crate) fn find(g: &Graph, block: &[u32], branching: bool) -> Option<Witness> {
    type Pair = (usize, usize);
    type Step = (Pair, Option<u32>, Option<u32>);
    let root = g.roots;
    let mut parent: HashMap<Pair, Option<Step>> = HashMap::new();
    parent.insert(root, None);
    let mut queue = VecDeque::from([root]);
    let mut fallback: Option<Pair> = None;
    let mut chosen: Option<Pair> = None;
    while let Some((s, t)) = queue.pop_front() {
        if capabilities(g, s) != capabilities(g, t) {
            if !branching || (stable(g, s) && stable(g, t)) {
                chosen = Some((s, t));
                break;
            }
            fallback.get_or_insert((s, t));
        }
        let mut moves: Vec<(Pair, Option<u32>, Option<u32>)> = Vec::new();
        for &(a, x) in &g.out[s] {
            for &(b, y) in &g.out[t] {
                if a == b {
                    moves.push(((x as usize, y as usize), Some(a), Some(b)));
                }
            }
        }
        if branching {
            for &(a, x) in &g.out[s] {
                if g.is_tau(a) {
                    moves.push(((x as usize, t), Some(a), None));
                }
            }
            for &(b, y) in &g.out[t] {
                if g.is_tau(b) {
                    moves.push(((s, y as usize), None, Some(b)));
                }
            }
        }
        for (next, a, b) in moves {
            if block[next.0] == block[next.1] || parent.contains_key(&next) {
                continue;
            }
            parent.insert(next, Some(((s, t), a, b)));
            queue.push_back(next);
        }
    }
    let end = chosen.or(fallback)?;
    let (mut left_trace, mut right_trace) = (Vec::new(), Vec::new());
    let mut at = end;
    while let Some(Some((prev, a, b))) = parent.get(&at) {
        if let Some(a) = a {
            left_trace.push(g.labels[*a as usize].clone());
        }
        if let Some(b) = b {
            right_trace.push(g.labels[*b as usize].clone());
        }
        at = *prev;
    }
    left_trace.reverse();
    right_trace.reverse();
    Some(Witness {
        left_trace,
        right_trace,
        left_state: end.0,
        right_state: end.1 - g.split,
        left: capabilities(g, end.0),
        right: capabilities(g, end.1),
    })
}
