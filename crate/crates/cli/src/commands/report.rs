//! report: merge completed runs into the fixed-width accuracy table, one
//! column per task plus the AVG column.

use crate::args::ReportArgs;
use anyhow::{Context, Result};
use mcd_core::train::{render_order_deltas, render_table, RunReport};

pub fn run(args: &ReportArgs) -> Result<()> {
    let mut reports = Vec::new();
    for dir in &args.runs {
        let path = dir.join("report.json");
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("run directory {}", dir.display()))?;
        let report: RunReport = serde_json::from_str(&text)
            .with_context(|| format!("run directory {}", dir.display()))?;
        reports.push(report);
    }
    let table = render_table(&reports);
    let deltas = render_order_deltas(&reports);
    print!("{table}");
    println!();
    print!("{deltas}");

    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        let mut body = serde_json::to_string_pretty(&reports)?;
        body.push('\n');
        std::fs::write(out.join("combined.json"), body)?;
        std::fs::write(out.join("table.txt"), format!("{table}\n{deltas}"))?;
    }
    Ok(())
}
