//! Parity games: max-parity convention (even means ∃ wins), and the owner of a
//! position without successors loses there.

mod brute;
mod zielonka;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use brute::{brute_solve, BruteError, BRUTE_MAX_POSITIONS};
pub use zielonka::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Exists,
    Forall,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Exists => Player::Forall,
            Player::Forall => Player::Exists,
        }
    }

    /// The player favoured by a rank.
    pub fn of_rank(rank: u32) -> Player {
        if rank.is_multiple_of(2) {
            Player::Exists
        } else {
            Player::Forall
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Exists => "exists",
            Player::Forall => "forall",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown position `{id}`")]
    UnknownPosition { line: usize, id: String },
    #[error("line {line}: position `{id}` declared twice")]
    DuplicatePosition { line: usize, id: String },
    #[error("game has no positions")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityGame {
    ids: Vec<String>,
    owner: Vec<Player>,
    rank: Vec<u32>,
    succ: Vec<Vec<usize>>,
    pub initial: usize,
}

impl Default for ParityGame {
    fn default() -> Self {
        Self::new()
    }
}

impl ParityGame {
    pub fn new() -> Self {
        ParityGame {
            ids: Vec::new(),
            owner: Vec::new(),
            rank: Vec::new(),
            succ: Vec::new(),
            initial: 0,
        }
    }

    pub fn add_position(&mut self, owner: Player, rank: u32) -> usize {
        let id = self.ids.len();
        self.add_named(id.to_string(), owner, rank)
    }

    pub fn add_named(&mut self, id: String, owner: Player, rank: u32) -> usize {
        self.ids.push(id);
        self.owner.push(owner);
        self.rank.push(rank);
        self.succ.push(Vec::new());
        self.ids.len() - 1
    }

    /// Adds an edge; duplicates are ignored.
    pub fn add_edge(&mut self, from: usize, to: usize) {
        if !self.succ[from].contains(&to) {
            self.succ[from].push(to);
        }
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owner[v]
    }

    pub fn rank(&self, v: usize) -> u32 {
        self.rank[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn max_rank(&self) -> u32 {
        self.rank.iter().copied().max().unwrap_or(0)
    }

    /// Same arena with every rank increased by `delta`.
    pub fn shift_ranks(&self, delta: u32) -> ParityGame {
        let mut g = self.clone();
        for r in &mut g.rank {
            *r += delta;
        }
        g
    }

    pub fn parse(text: &str) -> Result<ParityGame, GameError> {
        let mut g = ParityGame::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut init = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let words: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
            let syntax = |msg: &str| GameError::Syntax { line, msg: msg.to_string() };
            match words.as_slice() {
                [] => {}
                ["pos", id, owner, rank] => {
                    let owner = match *owner {
                        "exists" | "E" | "0" => Player::Exists,
                        "forall" | "A" | "1" => Player::Forall,
                        _ => return Err(syntax("owner must be `exists` or `forall`")),
                    };
                    let rank: u32 = rank.parse().map_err(|_| syntax("rank must be a natural number"))?;
                    if index.contains_key(*id) {
                        return Err(GameError::DuplicatePosition { line, id: id.to_string() });
                    }
                    let v = g.add_named(id.to_string(), owner, rank);
                    index.insert(id.to_string(), v);
                }
                ["edge", a, b] => edges.push((line, a.to_string(), b.to_string())),
                ["init", id] => init = Some((line, id.to_string())),
                _ => return Err(syntax("expected `pos ID OWNER RANK`, `edge A B` or `init ID`")),
            }
        }
        if g.is_empty() {
            return Err(GameError::Empty);
        }
        let find = |line: usize, id: &str| {
            index.get(id).copied().ok_or_else(|| GameError::UnknownPosition { line, id: id.to_string() })
        };
        for (line, a, b) in edges {
            let (a, b) = (find(line, &a)?, find(line, &b)?);
            g.add_edge(a, b);
        }
        if let Some((line, id)) = init {
            g.initial = find(line, &id)?;
        }
        Ok(g)
    }
}

impl fmt::Display for ParityGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in 0..self.len() {
            writeln!(f, "pos {} {} {}", self.ids[v], self.owner[v], self.rank[v])?;
        }
        for v in 0..self.len() {
            for &w in &self.succ[v] {
                writeln!(f, "edge {} {}", self.ids[v], self.ids[w])?;
            }
        }
        if !self.is_empty() {
            writeln!(f, "init {}", self.ids[self.initial])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub winner: Vec<Player>,
    /// For each position owned by its winner and having a successor, a winning move.
    pub strategy: Vec<Option<usize>>,
}

impl Solution {
    pub fn winning_region(&self, p: Player) -> Vec<usize> {
        (0..self.winner.len()).filter(|&v| self.winner[v] == p).collect()
    }
}

/// Replays both strategies of `sol` against every opponent behaviour and reports the
/// first position from which the claimed winner does not actually win.
pub fn check_strategies(g: &ParityGame, sol: &Solution) -> Result<(), String> {
    for p in [Player::Exists, Player::Forall] {
        // restrict p's positions in its region to the strategy edge
        let region: Vec<bool> = sol.winner.iter().map(|&w| w == p).collect();
        let succ = |v: usize| -> Vec<usize> {
            if g.owner(v) == p && region[v] {
                sol.strategy[v].into_iter().collect()
            } else {
                g.successors(v).to_vec()
            }
        };
        for v in 0..g.len() {
            if !region[v] {
                continue;
            }
            if g.owner(v) == p && !g.successors(v).is_empty() {
                match sol.strategy[v] {
                    Some(w) if g.successors(v).contains(&w) => {}
                    _ => return Err(format!("position {} has no legal strategy move for {p}", g.id(v))),
                }
            }
            for w in succ(v) {
                if !region[w] {
                    return Err(format!("{p} leaves its region along {} -> {}", g.id(v), g.id(w)));
                }
            }
            if g.owner(v) == p && g.successors(v).is_empty() {
                return Err(format!("{p} is stuck at {} inside its region", g.id(v)));
            }
        }
        // within the region the opponent controls everything else; look for a cycle
        // whose top rank favours the opponent
        for (u, &inside) in region.iter().enumerate() {
            if !inside || Player::of_rank(g.rank(u)) == p {
                continue;
            }
            let r = g.rank(u);
            let mut seen = vec![false; g.len()];
            let mut stack: Vec<usize> = succ(u).into_iter().filter(|&w| g.rank(w) <= r).collect();
            while let Some(w) = stack.pop() {
                if w == u {
                    return Err(format!("the opponent of {p} can cycle through {} with rank {r}", g.id(u)));
                }
                if std::mem::replace(&mut seen[w], true) {
                    continue;
                }
                stack.extend(succ(w).into_iter().filter(|&x| g.rank(x) <= r));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip() {
        let text = "pos a exists 1\npos b forall 2\nedge a b\nedge b a\ninit b\n";
        let g = ParityGame::parse(text).unwrap();
        assert_eq!(g.to_string(), text);
        assert_eq!(g.initial, 1);
    }

    #[test]
    fn dump_errors() {
        assert!(matches!(ParityGame::parse("pos a exists 0\nedge a b"), Err(GameError::UnknownPosition { line: 2, .. })));
        assert!(matches!(ParityGame::parse("pos a maybe 0"), Err(GameError::Syntax { line: 1, .. })));
        assert_eq!(ParityGame::parse("# nothing"), Err(GameError::Empty));
    }

    #[test]
    fn checker_rejects_wrong_claims() {
        let mut g = ParityGame::new();
        let v = g.add_position(Player::Exists, 1);
        g.add_edge(v, v);
        let wrong = Solution {
            winner: vec![Player::Exists],
            strategy: vec![Some(0)],
        };
        assert!(check_strategies(&g, &wrong).is_err());
        let right = Solution {
            winner: vec![Player::Forall],
            strategy: vec![None],
        };
        assert!(check_strategies(&g, &right).is_ok());
    }
}
