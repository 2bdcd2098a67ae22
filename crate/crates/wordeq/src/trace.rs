//! Per-iteration dumps for `solve --trace DIR`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use wordeq_core::Outcome;

/// Writes `reach_<i>.dot` for every iteration, `processed.dot`, a
/// `steps.log` table and a `summary.txt`.
pub fn write_trace(dir: &Path, out: &Outcome) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    if let Some(h) = &out.history {
        for (i, it) in h.iterations.iter().enumerate() {
            fs::write(dir.join(format!("reach_{i}.dot")), it.reach.to_dot(&format!("reach_{i}")))?;
        }
        fs::write(dir.join("processed.dot"), h.processed.to_dot("processed"))?;
    }
    let mut log = String::from("iteration bound family reach_states processed_states product_states\n");
    for s in &out.stats.log {
        let _ = writeln!(
            log,
            "{} {} {} {} {} {}",
            s.iteration, s.bound, s.family, s.reach_states, s.processed_states, s.product_states
        );
    }
    fs::write(dir.join("steps.log"), log)?;
    let mode = out.mode.map_or_else(|| "none".to_string(), |m| m.to_string());
    let mut summary = format!("verdict {}\nmode {mode}\niterations {}\n", out.result.verdict(), out.stats.iterations);
    let _ =
        writeln!(summary, "peak_states {}\nmax_product_states {}", out.stats.peak_states, out.stats.max_product_states);
    if let wordeq_core::SolveResult::Unknown(r) = &out.result {
        let _ = writeln!(summary, "reason {r}");
    }
    fs::write(dir.join("summary.txt"), summary)
}
