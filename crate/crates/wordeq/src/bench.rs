//! Runs a directory of instances and reports one CSV row each.

use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use wordeq_core::{solve, SolveOptions};

use crate::{load, StdClock};

pub const CSV_HEADER: [&str; 5] = ["instance", "verdict", "iterations", "time_ms", "peak_states"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub instance: String,
    /// `sat`, `unsat`, `unknown`, or `error` when the file did not load or
    /// the solver failed.
    pub verdict: String,
    pub iterations: usize,
    pub time_ms: u128,
    pub peak_states: usize,
}

/// Files ending in `.smt2`, `.smt` or `.weq`, sorted by name.
pub fn instances(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir)? {
        let p = e?.path();
        let ext = p.extension().and_then(|e| e.to_str());
        if p.is_file() && matches!(ext, Some("smt2" | "smt" | "weq")) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

pub fn run_one(path: &Path, opts: &SolveOptions) -> Row {
    let start = Instant::now();
    let instance = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let res = load(path)
        .map_err(|e| e.to_string())
        .and_then(|i| solve(&i.problem, opts, &StdClock::start()).map_err(|e| e.to_string()));
    let time_ms = start.elapsed().as_millis();
    match res {
        Ok(o) => Row {
            instance,
            verdict: o.result.verdict().to_string(),
            iterations: o.stats.iterations,
            time_ms,
            peak_states: o.stats.peak_states,
        },
        Err(_) => Row { instance, verdict: "error".into(), iterations: 0, time_ms, peak_states: 0 },
    }
}

/// Solves every path on `jobs` worker threads. Rows keep the input order.
pub fn run_all(paths: &[PathBuf], opts: &SolveOptions, jobs: usize) -> Vec<Row> {
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<Row>>> = Mutex::new(vec![None; paths.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(paths.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(p) = paths.get(k) else { break };
                let row = run_one(p, opts);
                rows.lock().expect("no worker panics while holding the lock")[k] = Some(row);
            });
        }
    });
    rows.into_inner().expect("workers finished").into_iter().map(|r| r.expect("every instance ran")).collect()
}

pub fn write_csv<W: io::Write>(rows: &[Row], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        out.write_record([
            r.instance.clone(),
            r.verdict.clone(),
            r.iterations.to_string(),
            r.time_ms.to_string(),
            r.peak_states.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
