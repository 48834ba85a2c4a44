//! Minimax route randomization for a convoy facing a single ambusher.
//!
//! The pipeline runs from a risk field ([`riskmap`]) through roadmap
//! construction ([`netgen`]) and LP assembly ([`lp_model`]) to the two LP
//! solvers ([`simplex`], [`ipm`]), the game layer ([`game`]) and the planner
//! evaluation harness ([`eval`]).

pub mod error;
pub mod eval;
pub mod fixtures;
pub mod game;
pub mod geometry;
pub mod io;
pub mod ipm;
pub mod linalg;
pub mod lp_model;
pub mod netgen;
pub mod riskmap;
pub mod simplex;

pub use error::{Error, Result};
pub use eval::{
    evaluate_planner, safest_path, sample_path, sample_paths, shortest_path, EvalReport,
    PathSample, Planner,
};
pub use game::{solve_minimax, Equilibrium};
pub use geometry::{Point, Rect};
pub use ipm::{ipm_solve, IpmOptions};
pub use lp_model::{GameProgram, StandardLp};
pub use netgen::{Edge, Method, Network, Node};
pub use riskmap::RiskField;
pub use simplex::{simplex_solve, SimplexOptions, SolveReport, SolveStatus, SolverTag};
