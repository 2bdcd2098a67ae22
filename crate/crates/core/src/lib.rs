//! Word equation solving by regular model checking.
//!
//! Configurations (systems of equations) are words over a padded 2-track
//! alphabet; sets of them are finite automata. Nielsen transformation
//! steps are rational relations, realized as register transducers, and
//! satisfiability becomes reachability of the solved configurations.

#![no_std]

extern crate alloc;

pub mod encoding;
pub mod error;
pub mod fa;
pub mod formula;
pub mod frt;
pub mod length;
pub mod nielsen;
pub mod oracle;
pub mod preprocess;
pub mod rmc;
pub mod solver;
pub mod sym;
pub mod transducer;

pub use error::{Error, Result};
pub use fa::{Alphabet, Fa};
pub use formula::{EquationSystem, Formula, LenAtom, Model, Problem, WordEquation, WordTerm};
pub use rmc::{Budget, Clock, Mode, NoClock, SolveResult, UnknownReason};
pub use solver::{solve, Outcome, SolveOptions};
pub use sym::{Sym, TrackSym, VarName};
pub use transducer::Transducer;
