//! Alternating parity automata on undirected node-labelled graphs. Acceptance from a
//! node is an ∃-win in the game on pairs (node, state).

mod format;
mod hand;
mod search;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::closure::{const_name, letter_check, Closure, Const, Pair, PhiType};
use crate::game::{solve, ParityGame, Player};
use crate::graph::UGraph;

pub use format::LabelledGraph;
pub use hand::{infinity_automaton, letter_loop_automaton, move_then_stuck_automaton};
pub use search::{bounded_nonemptiness, labelled_graphs, SearchOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Stay,
    Move,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Stay => "stay",
            Direction::Move => "move",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Name(String),
    Phi(PhiType),
}

impl Letter {
    pub fn name(s: &str) -> Letter {
        Letter::Name(s.to_string())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Name(n) => f.write_str(n),
            Letter::Phi(t) => f.write_str(&t.hash_hex()),
        }
    }
}

/// One conjunct of a transition's letter pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Requirement {
    Letter(String),
    Has(Pair),
    Lacks(Pair),
    Const(Const),
}

impl Requirement {
    pub fn holds(&self, letter: &Letter) -> bool {
        match (self, letter) {
            (Requirement::Letter(n), Letter::Name(m)) => n == m,
            (Requirement::Has(p), Letter::Phi(t)) => t.contains(p),
            (Requirement::Lacks(p), Letter::Phi(t)) => !t.contains(p),
            (Requirement::Const(c), Letter::Phi(t)) => t.carrier.contains(c),
            _ => false,
        }
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Requirement::Letter(n) => write!(f, "letter:{n}"),
            Requirement::Has(p) => write!(f, "+{p}"),
            Requirement::Lacks(p) => write!(f, "-{p}"),
            Requirement::Const(c) => write!(f, "const:{}", const_name(*c)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    /// Conjunction; empty means every letter.
    pub pattern: Vec<Requirement>,
    pub dir: Direction,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub name: String,
    pub owner: Player,
    pub rank: u32,
}

#[derive(Debug, Clone)]
pub enum Alphabet {
    Explicit(BTreeSet<String>),
    /// φ-types of a closure; a letter belongs if it passes `letter_check`.
    Structural(Arc<Closure>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("node {node}: label is not a letter of the automaton ({reason})")]
    LabelOutsideAlphabet { node: usize, reason: String },
    #[error("node {0} does not exist")]
    NoSuchNode(usize),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown state `{name}`")]
    UnknownState { line: usize, name: String },
    #[error("automaton has no states")]
    NoStates,
}

#[derive(Debug, Clone)]
pub struct AlternatingAutomaton {
    pub states: Vec<State>,
    pub initial: usize,
    pub transitions: Vec<Vec<Transition>>,
    pub alphabet: Alphabet,
}

impl AlternatingAutomaton {
    pub fn new(alphabet: Alphabet) -> Self {
        AlternatingAutomaton {
            states: Vec::new(),
            initial: 0,
            transitions: Vec::new(),
            alphabet,
        }
    }

    pub fn explicit(letters: &[&str]) -> Self {
        Self::new(Alphabet::Explicit(letters.iter().map(|s| s.to_string()).collect()))
    }

    pub fn add_state(&mut self, name: &str, owner: Player, rank: u32) -> usize {
        self.states.push(State {
            name: name.to_string(),
            owner,
            rank,
        });
        self.transitions.push(Vec::new());
        self.states.len() - 1
    }

    pub fn add_transition(&mut self, from: usize, pattern: Vec<Requirement>, dir: Direction, to: usize) {
        self.transitions[from].push(Transition { pattern, dir, to });
    }

    pub fn state(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    pub fn check_letter(&self, letter: &Letter) -> Result<(), String> {
        match (&self.alphabet, letter) {
            (Alphabet::Explicit(names), Letter::Name(n)) if names.contains(n) => Ok(()),
            (Alphabet::Explicit(_), Letter::Name(n)) => Err(format!("`{n}` is not declared")),
            (Alphabet::Structural(cl), Letter::Phi(t)) => letter_check(cl, t),
            (Alphabet::Explicit(_), Letter::Phi(_)) => Err("a φ-type given to an automaton with explicit letters".into()),
            (Alphabet::Structural(_), Letter::Name(n)) => Err(format!("plain letter `{n}` given to a structural automaton")),
        }
    }

    /// Transitions enabled at `q` on `letter`.
    pub fn delta(&self, q: usize, letter: &Letter) -> Vec<(Direction, usize)> {
        self.transitions[q]
            .iter()
            .filter(|t| t.pattern.iter().all(|r| r.holds(letter)))
            .map(|t| (t.dir, t.to))
            .collect()
    }

    fn check_graph(&self, g: &UGraph<Letter>) -> Result<(), AutomatonError> {
        let mut seen: HashSet<&Letter> = HashSet::new();
        for v in 0..g.len() {
            if seen.insert(g.label(v)) {
                self.check_letter(g.label(v))
                    .map_err(|reason| AutomatonError::LabelOutsideAlphabet { node: v, reason })?;
            }
        }
        Ok(())
    }
}

/// The full acceptance game: positions `v * |Q| + q` for every node and state.
pub fn acceptance_game(a: &AlternatingAutomaton, g: &UGraph<Letter>, v0: usize) -> Result<ParityGame, AutomatonError> {
    if v0 >= g.len() {
        return Err(AutomatonError::NoSuchNode(v0));
    }
    a.check_graph(g)?;
    let nq = a.len();
    let mut game = ParityGame::new();
    for v in 0..g.len() {
        for s in &a.states {
            game.add_named(format!("{v}:{}", s.name), s.owner, s.rank);
        }
    }
    for v in 0..g.len() {
        for q in 0..nq {
            for (dir, p) in a.delta(q, g.label(v)) {
                match dir {
                    Direction::Stay => game.add_edge(v * nq + q, v * nq + p),
                    Direction::Move => {
                        for w in g.neighbours(v) {
                            game.add_edge(v * nq + q, w * nq + p);
                        }
                    }
                }
            }
        }
    }
    game.initial = v0 * nq + a.initial;
    Ok(game)
}

/// Game positions reachable from the given starts, as `(node, state)` pairs.
pub struct ReachableArena {
    pub game: ParityGame,
    pub positions: Vec<(usize, usize)>,
    pub starts: Vec<usize>,
}

pub fn reachable_arena(a: &AlternatingAutomaton, g: &UGraph<Letter>, starts: &[usize]) -> Result<ReachableArena, AutomatonError> {
    if let Some(&v) = starts.iter().find(|&&v| v >= g.len()) {
        return Err(AutomatonError::NoSuchNode(v));
    }
    if a.is_empty() {
        return Err(AutomatonError::NoStates);
    }
    a.check_graph(g)?;
    let mut game = ParityGame::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut positions = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |v: usize, q: usize, game: &mut ParityGame, queue: &mut VecDeque<usize>, positions: &mut Vec<(usize, usize)>| {
        *index.entry((v, q)).or_insert_with(|| {
            let s = &a.states[q];
            let id = game.add_named(format!("{v}:{}", s.name), s.owner, s.rank);
            positions.push((v, q));
            queue.push_back(id);
            id
        })
    };
    let start_ids: Vec<usize> = starts
        .iter()
        .map(|&v| intern(v, a.initial, &mut game, &mut queue, &mut positions))
        .collect();
    while let Some(id) = queue.pop_front() {
        let (v, q) = positions[id];
        for (dir, p) in a.delta(q, g.label(v)) {
            let targets: Vec<usize> = match dir {
                Direction::Stay => vec![v],
                Direction::Move => g.neighbours(v).collect(),
            };
            for w in targets {
                let to = intern(w, p, &mut game, &mut queue, &mut positions);
                game.add_edge(id, to);
            }
        }
    }
    if let Some(&s) = start_ids.first() {
        game.initial = s;
    }
    Ok(ReachableArena {
        game,
        positions,
        starts: start_ids,
    })
}

pub fn accepts(a: &AlternatingAutomaton, g: &UGraph<Letter>, v0: usize) -> Result<bool, AutomatonError> {
    let arena = reachable_arena(a, g, &[v0])?;
    Ok(solve(&arena.game).winner[arena.starts[0]] == Player::Exists)
}

/// Acceptance from every node, from one solved arena.
pub fn accepting_starts(a: &AlternatingAutomaton, g: &UGraph<Letter>) -> Result<Vec<bool>, AutomatonError> {
    let all: Vec<usize> = (0..g.len()).collect();
    let arena = reachable_arena(a, g, &all)?;
    let sol = solve(&arena.game);
    Ok(arena.starts.iter().map(|&s| sol.winner[s] == Player::Exists).collect())
}

/// Largest number of move steps the winner's strategy can be pushed through from
/// `(v0, q_I)`, or `None` if moves can repeat forever.
pub fn strategy_radius(a: &AlternatingAutomaton, g: &UGraph<Letter>, v0: usize) -> Result<Option<usize>, AutomatonError> {
    let arena = reachable_arena(a, g, &[v0])?;
    let game = &arena.game;
    let sol = solve(game);
    let start = arena.starts[0];
    let winner = sol.winner[start];
    let succ = |x: usize| -> Vec<usize> {
        if game.owner(x) == winner {
            sol.strategy[x].into_iter().collect()
        } else {
            game.successors(x).to_vec()
        }
    };
    let is_move = |x: usize, y: usize| arena.positions[x].0 != arena.positions[y].0;
    let (comp, order) = sccs(start, &succ);
    // components come out sinks first, so one pass computes longest move counts
    let mut best: HashMap<usize, usize> = HashMap::new();
    for members in &order {
        let mut here = 0;
        for &x in members {
            for y in succ(x) {
                let step = usize::from(is_move(x, y));
                if comp[&y] == comp[&x] {
                    if step == 1 {
                        return Ok(None);
                    }
                } else {
                    here = here.max(best[&comp[&y]] + step);
                }
            }
        }
        best.insert(comp[&members[0]], here);
    }
    Ok(Some(best[&comp[&start]]))
}

/// Tarjan's algorithm over the part reachable from `root`. Returns the component of
/// each visited vertex and the components in reverse topological order.
fn sccs(root: usize, succ: &dyn Fn(usize) -> Vec<usize>) -> (HashMap<usize, usize>, Vec<Vec<usize>>) {
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut low: HashMap<usize, usize> = HashMap::new();
    let mut comp: HashMap<usize, usize> = HashMap::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut on_stack: HashSet<usize> = HashSet::new();
    let mut order: Vec<Vec<usize>> = Vec::new();
    let mut work: Vec<(usize, Vec<usize>, usize)> = vec![(root, succ(root), 0)];
    index.insert(root, 0);
    low.insert(root, 0);
    stack.push(root);
    on_stack.insert(root);
    while let Some((x, children, i)) = work.pop() {
        if i < children.len() {
            let y = children[i];
            work.push((x, children, i + 1));
            if !index.contains_key(&y) {
                let k = index.len();
                index.insert(y, k);
                low.insert(y, k);
                stack.push(y);
                on_stack.insert(y);
                work.push((y, succ(y), 0));
            } else if on_stack.contains(&y) {
                let l = low[&x].min(index[&y]);
                low.insert(x, l);
            }
            continue;
        }
        if low[&x] == index[&x] {
            let mut members = Vec::new();
            loop {
                let y = stack.pop().expect("x is on the stack");
                on_stack.remove(&y);
                comp.insert(y, order.len());
                members.push(y);
                if y == x {
                    break;
                }
            }
            order.push(members);
        }
        if let Some((parent, _, _)) = work.last() {
            let l = low[parent].min(low[&x]);
            low.insert(*parent, l);
        }
    }
    (comp, order)
}

impl fmt::Display for AlternatingAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format::write_automaton(self, f)
    }
}

impl AlternatingAutomaton {
    pub fn parse(text: &str) -> Result<AlternatingAutomaton, AutomatonError> {
        format::parse_automaton(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(labels: &[&str], edges: &[(usize, usize)]) -> UGraph<Letter> {
        let mut g = UGraph::new();
        for l in labels {
            g.add_node(Letter::name(l));
        }
        for &(u, w) in edges {
            g.add_edge(u, w).unwrap();
        }
        g
    }

    #[test]
    fn one_state_loop_arena() {
        let a = letter_loop_automaton("a", &["a", "b"]);
        let g = graph(&["a"], &[]);
        let game = acceptance_game(&a, &g, 0).unwrap();
        assert_eq!(game.len(), 1);
        assert_eq!(game.successors(0), &[0]);
        assert!(accepts(&a, &g, 0).unwrap());
        assert!(!accepts(&a, &graph(&["b"], &[]), 0).unwrap());
    }

    #[test]
    fn arena_is_product_sized_and_moves_are_symmetric() {
        let a = move_then_stuck_automaton("a", &["a", "b"]);
        let g = graph(&["a", "b"], &[(0, 1)]);
        let game = acceptance_game(&a, &g, 0).unwrap();
        assert_eq!(game.len(), 2 * a.len());
        // q0 at node 0 moves to q1 at node 1 only; node 1 carries b, so q0 there is stuck
        let q0 = a.state("q0").unwrap();
        let q1 = a.state("q1").unwrap();
        assert_eq!(game.successors(q0), &[a.len() + q1]);
        assert!(game.successors(a.len() + q0).is_empty());
        let h = graph(&["a", "a"], &[(0, 1)]);
        let game = acceptance_game(&a, &h, 0).unwrap();
        assert_eq!(game.successors(q0), &[a.len() + q1]);
        assert_eq!(game.successors(a.len() + q0), &[q1]);
    }

    #[test]
    fn move_then_stuck_needs_a_neighbour() {
        let a = move_then_stuck_automaton("a", &["a", "b"]);
        assert!(!accepts(&a, &graph(&["a"], &[]), 0).unwrap());
        assert!(accepts(&a, &graph(&["a", "b"], &[(0, 1)]), 0).unwrap());
        assert!(!accepts(&a, &graph(&["b", "a"], &[(0, 1)]), 0).unwrap());
    }

    #[test]
    fn foreign_label_is_rejected() {
        let a = letter_loop_automaton("a", &["a"]);
        assert!(matches!(
            accepts(&a, &graph(&["z"], &[]), 0),
            Err(AutomatonError::LabelOutsideAlphabet { node: 0, .. })
        ));
    }

    #[test]
    fn radius_of_simple_automata() {
        let a = move_then_stuck_automaton("a", &["a", "b"]);
        assert_eq!(strategy_radius(&a, &graph(&["a", "b"], &[(0, 1)]), 0).unwrap(), Some(1));
        let loop_a = letter_loop_automaton("a", &["a"]);
        assert_eq!(strategy_radius(&loop_a, &graph(&["a"], &[]), 0).unwrap(), Some(0));
    }
}
