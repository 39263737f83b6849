//! Guarded fixpoint logic workbench: formulas, finite structures, parity games,
//! guarded and undirected bisimulation, tabloids, alternating automata on graphs, and
//! a compiler from sentences to automata.

pub mod logic;
pub mod structure;
pub mod game;
pub mod graph;
pub mod bisim;
pub mod closure;
pub mod tabloid;
pub mod automata;
pub mod compiler;
pub mod finsat;
pub mod corpus;
pub mod cli;
pub mod threads;
