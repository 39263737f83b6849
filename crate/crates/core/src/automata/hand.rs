//! Small hand-written automata used in tests and demos.

use super::{AlternatingAutomaton, Direction, Requirement};
use crate::game::Player;

fn letter(c: &str) -> Vec<Requirement> {
    vec![Requirement::Letter(c.to_string())]
}

/// One ∃-state that stays put forever on `a` and is stuck elsewhere.
pub fn letter_loop_automaton(a: &str, alphabet: &[&str]) -> AlternatingAutomaton {
    let mut aut = AlternatingAutomaton::explicit(alphabet);
    let q = aut.add_state("q", Player::Exists, 0);
    aut.add_transition(q, letter(a), Direction::Stay, q);
    aut
}

/// Accepts from an `a`-node with at least one neighbour.
pub fn move_then_stuck_automaton(a: &str, alphabet: &[&str]) -> AlternatingAutomaton {
    let mut aut = AlternatingAutomaton::explicit(alphabet);
    let q0 = aut.add_state("q0", Player::Exists, 0);
    let q1 = aut.add_state("q1", Player::Forall, 0);
    aut.add_transition(q0, letter(a), Direction::Move, q1);
    aut
}

/// Over letters 0, 1, 2: every reachable edge joins different letters, no walk
/// steps down (c to c-1 mod 3) forever, and some walk from the start steps up
/// forever. A finite graph with an endless upward walk has a cycle, read backwards
/// an endless downward walk, so only infinite graphs are accepted (an infinite ray
/// labelled 0, 1, 2, 0, ... is).
pub fn infinity_automaton() -> AlternatingAutomaton {
    const L: [&str; 3] = ["0", "1", "2"];
    let mut a = AlternatingAutomaton::explicit(&L);
    let init = a.add_state("init", Player::Forall, 0);
    let roam = a.add_state("roam", Player::Forall, 0);
    let back = a.add_state("back", Player::Forall, 1);
    let fwd = a.add_state("fwd", Player::Exists, 2);
    let t = a.add_state("true", Player::Forall, 0);
    let f = a.add_state("false", Player::Exists, 0);
    a.add_transition(init, vec![], Direction::Stay, roam);
    a.add_transition(init, vec![], Direction::Stay, fwd);
    a.add_transition(roam, vec![], Direction::Move, roam);
    a.add_transition(roam, vec![], Direction::Stay, back);
    for c in 0..3 {
        let col = a.add_state(&format!("col{c}"), Player::Forall, 0);
        let chk = a.add_state(&format!("chk{c}"), Player::Forall, 0);
        let bk = a.add_state(&format!("bk{c}"), Player::Forall, 1);
        let fw = a.add_state(&format!("fw{c}"), Player::Exists, 2);
        a.add_transition(roam, letter(L[c]), Direction::Stay, col);
        a.add_transition(col, vec![], Direction::Move, chk);
        a.add_transition(chk, letter(L[c]), Direction::Stay, f);
        a.add_transition(back, letter(L[c]), Direction::Move, bk);
        a.add_transition(bk, letter(L[(c + 2) % 3]), Direction::Stay, back);
        for d in [c, (c + 1) % 3] {
            a.add_transition(bk, letter(L[d]), Direction::Stay, t);
        }
        a.add_transition(fwd, letter(L[c]), Direction::Move, fw);
        a.add_transition(fw, letter(L[(c + 1) % 3]), Direction::Stay, fwd);
    }
    a.initial = init;
    a
}
