//! Bounded search for a finite graph accepted by an automaton.

use rayon::prelude::*;

use super::{accepting_starts, AlternatingAutomaton, AutomatonError, LabelledGraph, Letter};
use crate::graph::UGraph;
use crate::threads;

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    /// An accepted graph with its start node set.
    Found { graph: LabelledGraph, examined: usize },
    /// Every candidate up to `max_nodes` nodes was rejected.
    Exhausted { max_nodes: usize, examined: usize },
}

impl SearchOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found { .. })
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                let free: Vec<usize> = (0..k).filter(|x| !p.contains(x)).collect();
                free.into_iter().map(move |x| [p.clone(), vec![x]].concat())
            })
            .collect();
    }
    out
}

/// Non-decreasing sequences of length `k` over `0..m`.
fn sorted_sequences(k: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                let lo = p.last().copied().unwrap_or(0);
                (lo..m).map(move |x| [p.clone(), vec![x]].concat())
            })
            .collect();
    }
    out
}

fn pair_bit(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    // pairs (0,1), (0,2), ..., (1,2), ...
    i * k - i * (i + 1) / 2 + (j - i - 1)
}

fn connected(k: usize, mask: u64) -> bool {
    let mut seen = 1u64;
    let mut stack = vec![0];
    while let Some(u) = stack.pop() {
        for w in 0..k {
            if w != u && mask >> pair_bit(k, u, w) & 1 == 1 && seen >> w & 1 == 0 {
                seen |= 1 << w;
                stack.push(w);
            }
        }
    }
    seen.count_ones() as usize == k
}

/// Connected simple graphs on exactly `k` nodes labelled from `letters`, one per
/// isomorphism class: labels are sorted and the edge mask is least among the
/// label-preserving renamings.
pub fn labelled_graphs(letters: &[Letter], k: usize) -> Vec<UGraph<Letter>> {
    assert!(k <= 11, "edge masks hold at most 64 pairs");
    let perms = permutations(k);
    let pairs = k * k.saturating_sub(1) / 2;
    let mut out = Vec::new();
    for labels in sorted_sequences(k, letters.len()) {
        let autos: Vec<&Vec<usize>> = perms
            .iter()
            .filter(|p| p.iter().enumerate().all(|(v, &w)| labels[v] == labels[w]) && p.iter().enumerate().any(|(v, &w)| v != w))
            .collect();
        for mask in 0..(1u64 << pairs) {
            if !connected(k, mask) {
                continue;
            }
            let canonical = autos.iter().all(|p| {
                let mut image = 0u64;
                for i in 0..k {
                    for j in i + 1..k {
                        if mask >> pair_bit(k, i, j) & 1 == 1 {
                            image |= 1 << pair_bit(k, p[i], p[j]);
                        }
                    }
                }
                image >= mask
            });
            if canonical {
                let mut g = UGraph::new();
                for &l in &labels {
                    g.add_node(letters[l].clone());
                }
                for i in 0..k {
                    for j in i + 1..k {
                        if mask >> pair_bit(k, i, j) & 1 == 1 {
                            g.add_edge(i, j).expect("distinct nodes");
                        }
                    }
                }
                out.push(g);
            }
        }
    }
    out
}

/// Searches connected graphs with up to `max_nodes` nodes labelled from `letters`.
/// Acceptance only depends on the component of the start node, so disconnected
/// candidates add nothing.
pub fn bounded_nonemptiness(a: &AlternatingAutomaton, max_nodes: usize, letters: &[Letter]) -> Result<SearchOutcome, AutomatonError> {
    let mut letters = letters.to_vec();
    letters.sort();
    letters.dedup();
    for (i, l) in letters.iter().enumerate() {
        a.check_letter(l)
            .map_err(|reason| AutomatonError::LabelOutsideAlphabet { node: i, reason })?;
    }
    let mut examined = 0;
    for k in 1..=max_nodes {
        let candidates = labelled_graphs(&letters, k);
        examined += candidates.len();
        let hit = threads::run(|| {
            candidates.par_iter().find_map_first(|g| {
                let starts = accepting_starts(a, g).expect("letters were checked");
                starts.iter().position(|&b| b).map(|v| (g.clone(), v))
            })
        });
        if let Some((g, v)) = hit {
            let mut graph = LabelledGraph::new(g);
            graph.start = Some(v);
            return Ok(SearchOutcome::Found { graph, examined });
        }
    }
    Ok(SearchOutcome::Exhausted { max_nodes, examined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{infinity_automaton, letter_loop_automaton};

    fn names(ls: &[&str]) -> Vec<Letter> {
        ls.iter().map(|l| Letter::name(l)).collect()
    }

    #[test]
    fn unlabelled_connected_graph_counts() {
        // connected graphs up to isomorphism on 1..=5 nodes: 1, 1, 2, 6, 21
        let one = names(&["a"]);
        let counts: Vec<usize> = (1..=5).map(|k| labelled_graphs(&one, k).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21]);
    }

    #[test]
    fn two_letter_counts() {
        // 2 one-node graphs; 3 edges a-a, a-b, b-b; on 3 nodes paths (6 labellings up
        // to reversal) and triangles (4 multisets)
        let ab = names(&["a", "b"]);
        assert_eq!(labelled_graphs(&ab, 1).len(), 2);
        assert_eq!(labelled_graphs(&ab, 2).len(), 3);
        assert_eq!(labelled_graphs(&ab, 3).len(), 10);
    }

    #[test]
    fn loop_automaton_is_nonempty() {
        let a = letter_loop_automaton("a", &["a", "b"]);
        match bounded_nonemptiness(&a, 2, &names(&["b", "a"])).unwrap() {
            SearchOutcome::Found { graph, .. } => {
                assert_eq!(graph.graph.len(), 1);
                assert_eq!(graph.graph.label(0), &Letter::name("a"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infinity_automaton_small_bound() {
        let a = infinity_automaton();
        let out = bounded_nonemptiness(&a, 3, &names(&["0", "1", "2"])).unwrap();
        assert!(matches!(out, SearchOutcome::Exhausted { max_nodes: 3, .. }));
    }
}
