use thiserror::Error;

use super::{ParityGame, Player, Solution};

pub const BRUTE_MAX_POSITIONS: usize = 10;
const MAX_STRATEGIES: u64 = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BruteError {
    #[error("{0} positions exceed the brute-force bound of {BRUTE_MAX_POSITIONS}")]
    TooManyPositions(usize),
    #[error("{0} positional strategies are too many to enumerate")]
    TooManyStrategies(u64),
}

/// Positions from which `p` wins when the opponent is fixed to the single-successor
/// graph `succ` and `p` moves freely: `p` needs to reach a dead end of the opponent or
/// a cycle whose top rank favours `p`.
fn free_player_wins(g: &ParityGame, succ: &[Vec<usize>], p: Player) -> Vec<bool> {
    let n = g.len();
    let mut good = vec![false; n];
    for u in 0..n {
        if g.owner(u) != p && succ[u].is_empty() {
            good[u] = true;
            continue;
        }
        let r = g.rank(u);
        if Player::of_rank(r) != p {
            continue;
        }
        // is u on a cycle through positions of rank <= r?
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = succ[u].iter().copied().filter(|&w| g.rank(w) <= r).collect();
        while let Some(w) = stack.pop() {
            if w == u {
                good[u] = true;
                break;
            }
            if !std::mem::replace(&mut seen[w], true) {
                stack.extend(succ[w].iter().copied().filter(|&x| g.rank(x) <= r));
            }
        }
    }
    // backward reachability to a good position
    let mut wins = good.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n {
            if !wins[v] && succ[v].iter().any(|&w| wins[w]) {
                wins[v] = true;
                changed = true;
            }
        }
    }
    wins
}

/// For every positional strategy of `fixed`, the set of positions from which it wins
/// against all counterplay. Returns the union and a strategy attaining it.
fn best_strategy(g: &ParityGame, fixed: Player) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = g.len();
    let choosers: Vec<usize> = (0..n).filter(|&v| g.owner(v) == fixed && !g.successors(v).is_empty()).collect();
    let mut choice = vec![0usize; choosers.len()];
    let mut union = vec![false; n];
    let mut best: Option<(usize, Vec<Option<usize>>)> = None;
    loop {
        let mut succ: Vec<Vec<usize>> = (0..n).map(|v| g.successors(v).to_vec()).collect();
        let mut strat = vec![None; n];
        for (i, &v) in choosers.iter().enumerate() {
            let w = g.successors(v)[choice[i]];
            succ[v] = vec![w];
            strat[v] = Some(w);
        }
        let opp_wins = free_player_wins(g, &succ, fixed.opponent());
        let won: Vec<bool> = opp_wins.iter().map(|&b| !b).collect();
        let count = won.iter().filter(|&&b| b).count();
        for v in 0..n {
            union[v] |= won[v];
        }
        if best.as_ref().is_none_or(|(c, _)| count > *c) {
            best = Some((count, strat));
        }
        // next strategy, odometer style
        let mut i = 0;
        loop {
            if i == choosers.len() {
                let strat = best.map(|(_, s)| s).unwrap_or_else(|| vec![None; n]);
                return (union, strat);
            }
            choice[i] += 1;
            if choice[i] < g.successors(choosers[i]).len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Exhaustive solver for small games: enumerates the positional strategies of each
/// player and analyses the lassos left to the opponent.
pub fn brute_solve(g: &ParityGame) -> Result<Solution, BruteError> {
    if g.len() > BRUTE_MAX_POSITIONS {
        return Err(BruteError::TooManyPositions(g.len()));
    }
    for p in [Player::Exists, Player::Forall] {
        let total: u64 = (0..g.len())
            .filter(|&v| g.owner(v) == p)
            .map(|v| g.successors(v).len().max(1) as u64)
            .try_fold(1u64, |acc, d| acc.checked_mul(d))
            .unwrap_or(u64::MAX);
        if total > MAX_STRATEGIES {
            return Err(BruteError::TooManyStrategies(total));
        }
    }
    let (win_e, strat_e) = best_strategy(g, Player::Exists);
    let (_, strat_f) = best_strategy(g, Player::Forall);
    let winner: Vec<Player> = win_e
        .iter()
        .map(|&w| if w { Player::Exists } else { Player::Forall })
        .collect();
    let strategy = (0..g.len())
        .map(|v| match (g.owner(v), winner[v]) {
            (Player::Exists, Player::Exists) => strat_e[v],
            (Player::Forall, Player::Forall) => strat_f[v],
            _ => None,
        })
        .collect();
    Ok(Solution { winner, strategy })
}

#[cfg(test)]
mod tests {
    use super::super::solve;
    use super::*;

    #[test]
    fn trivial_games_agree() {
        for (owner, rank) in [(Player::Exists, 0), (Player::Exists, 1)] {
            let mut g = ParityGame::new();
            let v = g.add_position(owner, rank);
            g.add_edge(v, v);
            assert_eq!(brute_solve(&g).unwrap().winner, solve(&g).winner);
        }
    }

    #[test]
    fn alternating_pair() {
        let mut g = ParityGame::new();
        let a = g.add_position(Player::Exists, 1);
        let b = g.add_position(Player::Forall, 2);
        g.add_edge(a, b);
        g.add_edge(b, a);
        assert_eq!(brute_solve(&g).unwrap().winner, vec![Player::Exists; 2]);
    }

    #[test]
    fn size_bound() {
        let mut g = ParityGame::new();
        for _ in 0..11 {
            g.add_position(Player::Exists, 0);
        }
        assert_eq!(brute_solve(&g), Err(BruteError::TooManyPositions(11)));
    }
}
