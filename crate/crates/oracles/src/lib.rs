//! Reference implementations used only by tests.
//!
//! Everything here works straight from workflow data or plain graphs and
//! shares no code with the net construction, the state-space exploration or
//! the scheduler it is compared against.

pub mod audit;
pub mod generate;
pub mod timed;
pub mod trim;
