use proptest::prelude::*;
use rand::seq::SliceRandom;

use gfx::automata::{accepts, AlternatingAutomaton, Letter};
use gfx::bisim::guarded_bisimilar;
use gfx::compiler::compile;
use gfx::corpus;
use gfx::game::{brute_solve, check_strategies, solve, ParityGame, Player};
use gfx::graph::{unravel, UGraph};
use gfx::logic::parse_formula;
use gfx::structure::{evaluate, guarded_sets, Structure, Valuation};

fn game_strategy() -> impl Strategy<Value = ParityGame> {
    (1usize..=6)
        .prop_flat_map(|n| {
            (
                prop::collection::vec((any::<bool>(), 0u32..5), n),
                prop::collection::vec(prop::collection::vec(0..n, 0..=3), n),
            )
        })
        .prop_map(|(labels, succ)| {
            let mut g = ParityGame::new();
            for (forall, r) in labels {
                g.add_position(if forall { Player::Forall } else { Player::Exists }, r);
            }
            for (v, ws) in succ.into_iter().enumerate() {
                for w in ws {
                    g.add_edge(v, w);
                }
            }
            g
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zielonka_matches_brute_force(g in game_strategy()) {
        let z = solve(&g);
        let b = brute_solve(&g).unwrap();
        prop_assert_eq!(&z.winner, &b.winner);
        prop_assert!(check_strategies(&g, &z).is_ok());
    }

    #[test]
    fn game_text_round_trips(g in game_strategy()) {
        let back = ParityGame::parse(&g.to_string()).unwrap();
        prop_assert_eq!(back.to_string(), g.to_string());
    }

    #[test]
    fn shifting_ranks_by_two_keeps_winners(g in game_strategy()) {
        prop_assert_eq!(solve(&g).winner, solve(&g.shift_ranks(2)).winner);
    }

    #[test]
    fn nnf_is_idempotent_and_printable(seed in any::<u64>()) {
        let mut r = corpus::rng(seed);
        let f = corpus::random_formula(&mut r);
        let d = corpus::denormalize(&f, &mut r);
        let n = d.nnf();
        prop_assert!(n.is_nnf());
        prop_assert_eq!(n.nnf(), n.clone());
        let sig = corpus::signature();
        prop_assert_eq!(parse_formula(&d.to_string(), &sig).unwrap(), d.clone());
        prop_assert_eq!(parse_formula(&n.to_string(), &sig).unwrap(), n);
    }

    #[test]
    fn evaluation_is_isomorphism_invariant(seed in any::<u64>()) {
        let mut r = corpus::rng(seed);
        let f = corpus::random_formula(&mut r);
        let s = corpus::random_structure(&mut r, 4, false);
        let mut perm: Vec<usize> = (0..s.len()).collect();
        perm.shuffle(&mut r);
        let t = s.permute(&perm);
        let v = Valuation::new();
        prop_assert_eq!(evaluate(&s, &f, &v).unwrap(), evaluate(&t, &f, &v).unwrap());
    }

    #[test]
    fn structure_text_round_trips(seed in any::<u64>()) {
        let mut r = corpus::rng(seed);
        let s = corpus::random_structure(&mut r, 4, false);
        prop_assert_eq!(Structure::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn guarded_tuples_are_bisimilar_to_their_copies(seed in any::<u64>()) {
        let mut r = corpus::rng(seed);
        let s = corpus::random_structure(&mut r, 3, true);
        let n = s.len();
        let doubled = s.disjoint_union(&s).unwrap();
        for set in guarded_sets(&s) {
            let copy: Vec<usize> = set.iter().map(|e| e + n).collect();
            prop_assert!(guarded_bisimilar(&s, &set, &doubled, &copy).unwrap());
        }
    }

    #[test]
    fn compiled_automaton_text_round_trips(seed in any::<u64>()) {
        let mut r = corpus::rng(seed);
        let f = corpus::random_formula(&mut r);
        let c = compile(&f.nnf()).unwrap();
        let text = c.automaton.to_string();
        let back = AlternatingAutomaton::parse(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        prop_assert_eq!(back.len(), c.automaton.len());
    }

    #[test]
    fn unraveling_preserves_explicit_acceptance(seed in any::<u64>()) {
        let mut r = corpus::rng(seed);
        let mut g = UGraph::new();
        let n = rand::Rng::gen_range(&mut r, 1..=4);
        for _ in 0..n {
            g.add_node(Letter::name(["0", "1", "2"].choose(&mut r).unwrap()));
        }
        for u in 0..n {
            for w in u + 1..n {
                if rand::Rng::gen_bool(&mut r, 0.5) {
                    g.add_edge(u, w).unwrap();
                }
            }
        }
        // the one-step automaton only inspects the start and its neighbours
        let a = gfx::automata::move_then_stuck_automaton("1", &["0", "1", "2"]);
        let (tree, _) = unravel(&g, 0, 2).unwrap();
        prop_assert_eq!(accepts(&a, &g, 0).unwrap(), accepts(&a, &tree, 0).unwrap());
    }
}
