use std::collections::VecDeque;

use super::{ParityGame, Player, Solution};

/// Arena with two sink positions appended so that nobody is ever stuck:
/// `sink_e` (rank 0, ∃ wins) catches stuck ∀ positions, `sink_f` (rank 1) stuck ∃ ones.
struct Arena {
    owner: Vec<Player>,
    rank: Vec<u32>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl Arena {
    fn from_game(g: &ParityGame) -> Arena {
        let n = g.len();
        let (sink_e, sink_f) = (n, n + 1);
        let mut owner: Vec<Player> = (0..n).map(|v| g.owner(v)).collect();
        let mut rank: Vec<u32> = (0..n).map(|v| g.rank(v)).collect();
        let mut succ: Vec<Vec<usize>> = (0..n).map(|v| g.successors(v).to_vec()).collect();
        for (v, s) in succ.iter_mut().enumerate() {
            if s.is_empty() {
                s.push(if owner[v] == Player::Exists { sink_f } else { sink_e });
            }
        }
        owner.extend([Player::Exists, Player::Forall]);
        rank.extend([0, 1]);
        succ.push(vec![sink_e]);
        succ.push(vec![sink_f]);
        let mut pred = vec![Vec::new(); n + 2];
        for (v, s) in succ.iter().enumerate() {
            for &w in s {
                pred[w].push(v);
            }
        }
        Arena { owner, rank, succ, pred }
    }

    /// Positions of `sub` from which `p` can force a visit to `target`. Writes
    /// attractor moves for `p` into `strategy`.
    fn attractor(&self, sub: &[bool], target: &[usize], p: Player, strategy: &mut [Option<usize>]) -> Vec<bool> {
        let mut inside = vec![false; self.owner.len()];
        let mut count: Vec<usize> = vec![0; self.owner.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &t in target {
            inside[t] = true;
            queue.push_back(t);
        }
        while let Some(w) = queue.pop_front() {
            for &v in &self.pred[w] {
                if !sub[v] || inside[v] {
                    continue;
                }
                if self.owner[v] == p {
                    inside[v] = true;
                    strategy[v] = Some(w);
                    queue.push_back(v);
                } else {
                    if count[v] == 0 {
                        count[v] = self.succ[v].iter().filter(|&&x| sub[x]).count();
                    }
                    count[v] -= 1;
                    if count[v] == 0 {
                        inside[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        inside
    }

    /// Returns the ∃-winning part of the subgame `sub` (a trap with no dead ends).
    fn zielonka(&self, sub: &[bool], members: &[usize], strategy: &mut [Option<usize>]) -> Vec<bool> {
        let mut win_e = vec![false; self.owner.len()];
        let Some(d) = members.iter().map(|&v| self.rank[v]).max() else {
            return win_e;
        };
        let p = Player::of_rank(d);
        let top: Vec<usize> = members.iter().copied().filter(|&v| self.rank[v] == d).collect();
        let a = self.attractor(sub, &top, p, strategy);
        let rest: Vec<usize> = members.iter().copied().filter(|&v| !a[v]).collect();
        let rest_mask = mask(self.owner.len(), &rest);
        let rest_e = self.zielonka(&rest_mask, &rest, strategy);
        let opp_region: Vec<usize> = rest.iter().copied().filter(|&v| rest_e[v] == (p == Player::Forall)).collect();
        if opp_region.is_empty() {
            for &v in &top {
                if self.owner[v] == p {
                    strategy[v] = self.succ[v].iter().copied().find(|&w| sub[w]);
                }
            }
            if p == Player::Exists {
                for &v in members {
                    win_e[v] = true;
                }
            }
            return win_e;
        }
        let b = self.attractor(sub, &opp_region, p.opponent(), strategy);
        let remain: Vec<usize> = members.iter().copied().filter(|&v| !b[v]).collect();
        let remain_mask = mask(self.owner.len(), &remain);
        let remain_e = self.zielonka(&remain_mask, &remain, strategy);
        for &v in members {
            win_e[v] = if b[v] { p == Player::Forall } else { remain_e[v] };
        }
        win_e
    }
}

fn mask(n: usize, members: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in members {
        m[v] = true;
    }
    m
}

/// Solves `g` with Zielonka's recursive algorithm; returns winners and positional
/// winning strategies for both players.
pub fn solve(g: &ParityGame) -> Solution {
    let n = g.len();
    let arena = Arena::from_game(g);
    let all: Vec<usize> = (0..n + 2).collect();
    let mut strategy = vec![None; n + 2];
    let win_e = arena.zielonka(&vec![true; n + 2], &all, &mut strategy);
    let winner: Vec<Player> = (0..n)
        .map(|v| if win_e[v] { Player::Exists } else { Player::Forall })
        .collect();
    let strategy = (0..n)
        .map(|v| {
            if g.owner(v) == winner[v] && !g.successors(v).is_empty() {
                strategy[v].filter(|&w| w < n)
            } else {
                None
            }
        })
        .collect();
    Solution { winner, strategy }
}

#[cfg(test)]
mod tests {
    use super::super::check_strategies;
    use super::*;

    fn single(owner: Player, rank: u32, self_loop: bool) -> ParityGame {
        let mut g = ParityGame::new();
        let v = g.add_position(owner, rank);
        if self_loop {
            g.add_edge(v, v);
        }
        g
    }

    #[test]
    fn self_loops_and_dead_ends() {
        assert_eq!(solve(&single(Player::Exists, 0, true)).winner, vec![Player::Exists]);
        assert_eq!(solve(&single(Player::Exists, 1, true)).winner, vec![Player::Forall]);
        assert_eq!(solve(&single(Player::Forall, 1, false)).winner, vec![Player::Exists]);
        assert_eq!(solve(&single(Player::Exists, 0, false)).winner, vec![Player::Forall]);
    }

    #[test]
    fn alternating_pair() {
        let mut g = ParityGame::new();
        let a = g.add_position(Player::Exists, 1);
        let b = g.add_position(Player::Forall, 2);
        g.add_edge(a, b);
        g.add_edge(b, a);
        let sol = solve(&g);
        assert_eq!(sol.winner, vec![Player::Exists; 2]);
        assert_eq!(sol.strategy[a], Some(b));
        check_strategies(&g, &sol).unwrap();
    }

    #[test]
    fn exists_escapes_odd_cycle() {
        // 0 (∃,1) loops on itself or goes to 1 (∀,0) which can only return to 0 or
        // go to 2 (∃,2) with a self-loop
        let mut g = ParityGame::new();
        let v0 = g.add_position(Player::Exists, 1);
        let v1 = g.add_position(Player::Forall, 0);
        let v2 = g.add_position(Player::Exists, 2);
        g.add_edge(v0, v0);
        g.add_edge(v0, v1);
        g.add_edge(v1, v0);
        g.add_edge(v1, v2);
        g.add_edge(v2, v2);
        let sol = solve(&g);
        // ∀ keeps returning to 0, visiting ranks 1 and 0 forever
        assert_eq!(sol.winner, vec![Player::Forall, Player::Forall, Player::Exists]);
        assert_eq!(sol.strategy[v1], Some(v0));
        check_strategies(&g, &sol).unwrap();
    }

    #[test]
    fn shifted_ranks_same_winner() {
        let mut g = ParityGame::new();
        let v0 = g.add_position(Player::Exists, 3);
        let v1 = g.add_position(Player::Forall, 2);
        g.add_edge(v0, v1);
        g.add_edge(v1, v0);
        g.add_edge(v1, v1);
        let base = solve(&g).winner;
        assert_eq!(solve(&g.shift_ranks(2)).winner, base);
    }
}
