//! Input formats, model output, tracing and the benchmark harness around
//! [`wordeq_core`].

pub mod bench;
pub mod error;
pub mod input;
pub mod model;
pub mod native;
pub mod smtlib;
pub mod trace;

use std::time::{Duration, Instant};

pub use error::InputError;
pub use input::{load, Format, Input};

/// Wall-clock time since construction.
pub struct StdClock(Instant);

impl StdClock {
    pub fn start() -> Self {
        StdClock(Instant::now())
    }
}

impl wordeq_core::Clock for StdClock {
    fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}
