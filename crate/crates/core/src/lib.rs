//! Exact and grid computation of local maximal operators on functions of
//! bounded variation.

pub mod rat;
pub mod step;
pub mod report;
pub mod maximal1d;
pub mod grid2d;
pub mod orlicz;
pub mod verify;
