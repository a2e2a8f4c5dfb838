//! Parallel, resumable control-space sweeps.
//!
//! Progress is kept in a JSON-lines manifest. The first line fingerprints
//! the sweep inputs; every later line records one finished cell. A resumed
//! run skips recorded cells and ignores a truncated final line, so the
//! finished grid is identical to an uninterrupted run.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use climber_core::analysis::{sweep_cell, SweepCell, SweepGrid, SweepSpec};
use climber_core::{ClimberParams, PulsePolicy, SimOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::export::write_atomic;
use crate::Error;

/// Everything a sweep cell depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepJob {
    pub spec: SweepSpec,
    pub params: ClimberParams,
    pub template: PulsePolicy,
    pub opts: SimOptions,
}

impl SweepJob {
    pub fn new(spec: SweepSpec, params: ClimberParams, template: PulsePolicy, opts: SimOptions) -> Self {
        // Sweeps only need metrics.
        Self { spec, params, template, opts: SimOptions { sample_dt: None, ..opts } }
    }

    fn fingerprint(&self) -> String {
        serde_json::to_string(self).expect("job always serializes")
    }

    fn cell(&self, k: usize) -> SweepCell {
        sweep_cell(&self.spec, k, &self.params, &self.template, &self.opts)
    }

    fn grid(&self, cells: Vec<SweepCell>) -> SweepGrid {
        SweepGrid { gamma_values: self.spec.gamma_values.clone(), omega_values: self.spec.omega_values.clone(), cells }
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, Error> {
    rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().map_err(|e| Error::Format(e.to_string()))
}

/// Runs every cell on `threads` workers; cell order is row-major regardless.
pub fn run_parallel(job: &SweepJob, threads: usize) -> Result<SweepGrid, Error> {
    let cells = pool(threads)?.install(|| (0..job.spec.len()).into_par_iter().map(|k| job.cell(k)).collect());
    Ok(job.grid(cells))
}

#[derive(Serialize, Deserialize)]
struct Header {
    fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    cell: usize,
    result: SweepCell,
}

/// Cells already recorded in `manifest` for this job. A manifest written
/// for different inputs is ignored.
fn load_manifest(path: &Path, job: &SweepJob) -> BTreeMap<usize, SweepCell> {
    let Ok(text) = std::fs::read_to_string(path) else {
        return BTreeMap::new();
    };
    let mut lines = text.lines();
    match lines.next().and_then(|l| serde_json::from_str::<Header>(l).ok()) {
        Some(h) if h.fingerprint == job.fingerprint() => {}
        _ => return BTreeMap::new(),
    }
    lines
        .filter_map(|l| serde_json::from_str::<Entry>(l).ok())
        .filter(|e| e.cell < job.spec.len())
        .map(|e| (e.cell, e.result))
        .collect()
}

/// Controls for [`run_resumable`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ResumeOptions {
    pub threads: usize,
    /// Stop after this many new cells, leaving the manifest for a later run.
    pub stop_after: Option<usize>,
}

/// Runs the sweep, recording each finished cell in `manifest`.
///
/// Returns `None` when stopped early by `stop_after`. `on_row` is called
/// with the row index whenever a γ row becomes complete.
pub fn run_resumable(
    job: &SweepJob,
    manifest: &Path,
    opts: ResumeOptions,
    on_row: impl Fn(usize) + Sync,
) -> Result<Option<SweepGrid>, Error> {
    let done = load_manifest(manifest, job);
    // Rewrite the manifest so a truncated tail never precedes new entries.
    let mut text = serde_json::to_string(&Header { fingerprint: job.fingerprint() }).unwrap();
    text.push('\n');
    for (cell, result) in &done {
        text.push_str(&serde_json::to_string(&Entry { cell: *cell, result: result.clone() }).unwrap());
        text.push('\n');
    }
    write_atomic(manifest, text.as_bytes())?;

    let mut todo: Vec<usize> = (0..job.spec.len()).filter(|k| !done.contains_key(k)).collect();
    let stopped = matches!(opts.stop_after, Some(n) if n < todo.len());
    if let Some(n) = opts.stop_after {
        todo.truncate(n);
    }

    let nw = job.spec.omega_values.len();
    let mut remaining = vec![nw; job.spec.gamma_values.len()];
    for k in done.keys() {
        remaining[k / nw] -= 1;
    }
    let file = OpenOptions::new().append(true).open(manifest).map_err(|e| Error::io(manifest, e))?;
    let shared = Mutex::new((file, remaining, Vec::<(usize, SweepCell)>::new()));

    pool(opts.threads)?.install(|| {
        todo.par_iter().try_for_each(|&k| {
            let cell = job.cell(k);
            let line = serde_json::to_string(&Entry { cell: k, result: cell.clone() }).unwrap();
            let mut guard = shared.lock().unwrap();
            let (file, remaining, fresh) = &mut *guard;
            writeln!(file, "{line}").map_err(|e| Error::io(manifest, e))?;
            fresh.push((k, cell));
            remaining[k / nw] -= 1;
            if remaining[k / nw] == 0 {
                on_row(k / nw);
            }
            Ok::<(), Error>(())
        })
    })?;
    let (file, _, fresh) = shared.into_inner().unwrap();
    file.sync_all().map_err(|e| Error::io(manifest, e))?;

    if stopped {
        return Ok(None);
    }
    let mut all = done;
    all.extend(fresh);
    Ok(Some(job.grid(all.into_values().collect())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use climber_core::math::deg;

    fn small_job() -> SweepJob {
        let spec = SweepSpec { gamma_values: vec![deg(60.0), deg(90.0)], omega_values: vec![deg(700.0), deg(1400.0)] };
        SweepJob::new(spec, ClimberParams::default(), PulsePolicy::default(), SimOptions::default())
    }

    #[test]
    fn truncated_manifest_line_is_ignored() {
        let job = small_job();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let r = run_resumable(&job, &path, ResumeOptions { threads: 1, stop_after: Some(2) }, |_| {}).unwrap();
        assert!(r.is_none());
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("{\"cell\":3,\"res");
        std::fs::write(&path, text).unwrap();
        assert_eq!(load_manifest(&path, &job).len(), 2);
        let grid = run_resumable(&job, &path, ResumeOptions { threads: 1, stop_after: None }, |_| {}).unwrap().unwrap();
        assert_eq!(grid, run_parallel(&job, 1).unwrap());
    }

    #[test]
    fn foreign_manifest_is_discarded() {
        let job = small_job();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        run_resumable(&job, &path, ResumeOptions { threads: 1, stop_after: Some(1) }, |_| {}).unwrap();
        let mut other = job.clone();
        other.template.omega_e *= 2.0;
        assert!(load_manifest(&path, &other).is_empty());
    }

    #[test]
    fn rows_reported_once_each() {
        let job = small_job();
        let dir = tempfile::tempdir().unwrap();
        let rows = Mutex::new(Vec::new());
        run_resumable(&job, &dir.path().join("m.jsonl"), ResumeOptions { threads: 2, stop_after: None }, |r| {
            rows.lock().unwrap().push(r)
        })
        .unwrap();
        let mut rows = rows.into_inner().unwrap();
        rows.sort();
        assert_eq!(rows, vec![0, 1]);
    }
}
