//! Programmatic study runs and report emission.
//!
//! The same engine behind the `gaussrisk` binary is callable as a library:
//! build a `RunConfig`, run a study, inspect verdicts, and emit the JSON/CSV
//! report. Reports carry a determinism hash over everything except the
//! provenance block, so identical configs can be compared byte for byte.
//!
//! ```bash
//! cargo run --release --example report_workflow
//! ```

use gaussrisk::cli::{emit, run, ReportFormat, RunConfig};

fn main() -> gaussrisk::Result<()> {
    println!("=== Study runner as a library ===\n");

    let config = RunConfig::from_json(
        r#"{
            "problem": {"builder": "random", "n": 4, "d": 6, "seed": 11},
            "study": "verify",
            "samples": 50000,
            "seed": 0
        }"#,
    )?;

    let report = run(&config)?;
    println!("study: {} ({} checks)", report.study.name(), report.checks.len());
    for check in &report.checks {
        println!(
            "   [{}] {} (tolerance {:.3e}, {})",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.tolerance,
            check.tolerance_name
        );
    }
    println!("\nanalytic tr(post_cov): {:?}", report.analytic.posterior_trace);
    println!("determinism hash: {}", report.determinism_hash);

    let rerun = run(&config)?;
    println!("rerun hash matches: {}\n", rerun.determinism_hash == report.determinism_hash);

    let dir = std::env::temp_dir();
    let json_path = dir.join("gaussrisk_report.json");
    let csv_path = dir.join("gaussrisk_report.csv");
    emit(&report, &json_path, ReportFormat::Json)?;
    emit(&report, &csv_path, ReportFormat::Csv)?;
    println!("wrote {} and {}", json_path.display(), csv_path.display());

    Ok(())
}
