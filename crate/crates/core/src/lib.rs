//! Exact, brute-force, approximate and Monte Carlo solvers for
//! safest-with-sight pathfinding.
//!
//! A pathfinder walks a DAG whose edges fail independently. Standing at a
//! vertex it learns the true status of the edges that vertex can see, and it
//! never forgets. [`solver::ExactSolver`] computes the ideal next move and its
//! success probability; [`oracle`] recomputes the same quantities by brute
//! force over complete worlds; [`approx::ApproxSolver`] trades exactness for a
//! bounded cache; [`sim`] checks the policy by sampling trials.
//!
//! ```
//! use sightpath::fixtures;
//! use sightpath::model::{EdgeId, KnowledgeState};
//! use sightpath::prob::Exact;
//! use sightpath::solver::{ExactSolver, Move};
//!
//! let trap = fixtures::greedy_trap();
//! let mut solver = ExactSolver::<Exact>::new(&trap)?;
//! let start = KnowledgeState::new();
//! assert_eq!(solver.next_move(1, &start)?, Move::Cross(EdgeId::new(1, 2)));
//! assert_eq!(solver.best_value(1, &start)?.to_string(), "27/40");
//! # Ok::<(), sightpath::Error>(())
//! ```

pub mod approx;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod io;
pub mod model;
pub mod oracle;
pub mod prob;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/exact-solver.md")]
    mod exact_solver {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/approximation.md")]
    mod approximation {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
