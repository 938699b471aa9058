//! Optimal liquidation with a trading signal under transient Volterra
//! price impact and linear temporary impact.
//!
//! The optimal selling rate solves a linear Volterra equation
//! `u = a + B ★ u`; [`nystrom`] discretizes it on a uniform grid and
//! [`oracle`] provides an independent discrete linear-quadratic check.
//! Numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`.

pub mod error;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod nystrom;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod signals;

pub use error::{Error, Result};
pub use kernels::{check_nonnegative_definite, DefinitenessReport, IntegratedIncrements, Propagator};
pub use model::{
    evaluate_objective, price_from_signal, rollout, InitialDistortion, ObjectiveBreakdown, ScenarioParams,
    StrategyPath, TimeGrid,
};
pub use nystrom::{solve_scenario, NystromSolver, ScenarioSolution};
pub use oracle::{
    assemble_qp, mc_objective, oracle_strategy, perturbation_test, solve_qp, DiscreteQuadraticProgram,
    McEstimate, PerturbationReport,
};
pub use scalar::Scalar;
pub use signals::{nu_matrix, NuMatrix, OuSignal, SignalModel};

pub type Real = f64;
pub type Scenario = ScenarioParams<f64>;
pub type Grid = TimeGrid<f64>;
pub type Kernel = Propagator<f64>;
pub type Signal = SignalModel<f64>;
pub type Path = StrategyPath<f64>;
pub type Breakdown = ObjectiveBreakdown<f64>;
pub type Solver = NystromSolver<f64>;
pub type Solution = ScenarioSolution<f64>;
pub type Qp = DiscreteQuadraticProgram<f64>;
