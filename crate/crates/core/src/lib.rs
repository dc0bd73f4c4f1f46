//! Pure Nash equilibria of the open-source/closed-source AI race game.
//!
//! Players choose how much of their model to open (`0` closed, `1` fully
//! open, or anything in between). Opening lifts the opener by `delta_i` and
//! every competitor `j` by `spill[i][j]`; each player cares only about its
//! lead over the best competitor. All arithmetic is exact.

pub mod continuous;
pub mod continuous_mip;
pub mod discrete;
pub mod discrete_mip;
pub mod game;
pub mod mip;
pub mod rational;
pub mod report;
pub mod sat;
pub mod scenario;

pub use game::{ActionProfile, ContinuousProfile, DiscreteProfile, GameError, RaceGame};
pub use rational::Rat;
