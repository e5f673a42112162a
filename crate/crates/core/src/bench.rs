//! Timed throwaway generation runs.

use std::time::Duration;

use crate::scaffold::{ProjectSpec, ScaffoldError, Scaffolder};

/// Overrides applied to every project in a `with_config` run.
pub const BENCH_OVERRIDES: &[(&str, &str)] = &[
    ("ROBOTSTXT_OBEY", "False"),
    ("DOWNLOAD_DELAY", "1"),
    ("CONCURRENT_REQUESTS", "8"),
    ("USER_AGENT", "'bench (+https://example.com)'"),
];

/// Recorded interactive timings in seconds for the same scenario:
/// (single/multiple, with config) -> (manual, tool-assisted).
pub fn interactive_reference(multiple: bool, with_config: bool) -> ((u32, u32), (u32, u32)) {
    match (multiple, with_config) {
        (false, false) => ((4, 9), (2, 5)),
        (false, true) => ((6, 12), (3, 6)),
        (true, false) => ((26, 30), (9, 10)),
        (true, true) => ((29, 40), (10, 13)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub count: usize,
    pub with_config: bool,
    pub elapsed: Duration,
}

impl BenchResult {
    pub fn scenario(&self) -> &'static str {
        if self.count > 1 {
            "Multiple Projects"
        } else {
            "Single Project"
        }
    }

    /// Table of the recorded interactive rows plus the measured one.
    pub fn table(&self) -> String {
        let ((m_lo, m_hi), (a_lo, a_hi)) = interactive_reference(self.count > 1, self.with_config);
        let config = if self.with_config { "Yes" } else { "No" };
        let mut out = format!(
            "{:<18} {:<6} {:<20} {:>10}\n",
            "task", "config", "mode", "time_s"
        );
        for (mode, time) in [
            ("manual (recorded)", format!("{m_lo}-{m_hi}")),
            ("assisted (recorded)", format!("{a_lo}-{a_hi}")),
            ("automated", format!("{:.3}", self.elapsed.as_secs_f64())),
        ] {
            out.push_str(&format!(
                "{:<18} {:<6} {:<20} {:>10}\n",
                self.scenario(),
                config,
                mode,
                time
            ));
        }
        out
    }
}

/// Generate `count` projects in a temporary workspace, timing the batch.
/// The workspace is deleted afterwards.
pub fn run_bench(count: usize, with_config: bool) -> Result<BenchResult, ScaffoldError> {
    let workspace = tempfile::tempdir().map_err(|source| ScaffoldError::Io {
        path: std::env::temp_dir(),
        source,
    })?;
    let scaffolder = Scaffolder::new(workspace.path());
    let specs: Vec<ProjectSpec> = (0..count)
        .map(|i| {
            let mut spec = ProjectSpec::new(format!("bench{i}")).with_domain("example.com");
            if with_config {
                for (k, v) in BENCH_OVERRIDES {
                    spec = spec.with_override(*k, *v);
                }
            }
            spec
        })
        .collect();
    let report = scaffolder.generate_batch(&specs, 1);
    let elapsed = report.elapsed;
    if let Some(failed) = report.outcomes.into_iter().find_map(|o| o.result.err()) {
        return Err(failed);
    }
    Ok(BenchResult {
        count,
        with_config,
        elapsed,
    })
}
