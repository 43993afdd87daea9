//! Linear binary constraint systems over ±1 variables: classical and
//! Pauli-string solving, a graph-based game family whose perfect strategies
//! need non-Clifford resources, dense operator strategies, and simulation of
//! a two-round shallow-circuit relation problem.

pub mod bcs;
pub mod dense;
pub mod game;
pub mod gf2;
pub mod pauli;
pub mod quantum;
pub mod shallow;

pub use bcs::{Bcs, BcsError, Certificate, Constraint, PauliOutcome, PauliReport, PauliSolution};
pub use dense::DenseOperator;
pub use game::{GameBcs, GameClass, GameError, QuestionCounts, QuestionSpace};
pub use gf2::{BitRow, Gf2Matrix, Gf2Outcome, Gf2System, ReducedSystem};
pub use pauli::{Letter, PauliError, PauliString};
pub use quantum::{OperatorSolution, QuantumError, SharedState, Side};
pub use shallow::{CircuitDag, RelationInstance, Round2Outputs, SamplingCase, ShallowError};
