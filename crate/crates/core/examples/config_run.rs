// Run a JSON config and write the report in every format.

use rigidity::analysis::{emit, run, AnalysisConfig, Format};

const CONFIG: &str = r#"{
    "sequence": {"kind": "powers", "base": 2},
    "budgets": {"horizon": 12},
    "seed": 1,
    "analyses": [
        {"analysis": "growth"},
        {"analysis": "obstruct"},
        {"analysis": "measure", "measure": {"kind": "atomic", "atoms": [{"angle": "1/3", "mass": "1"}]}}
    ]
}"#;

fn main() {
    let cfg = AnalysisConfig::from_json(CONFIG).unwrap();
    let (report, meta) = run(&cfg);
    for (key, e) in &report.entries {
        println!("{key}: {} ({})", e.status, e.checks);
    }
    println!("took {:.1} ms", meta.total_ms);
    let dir = std::env::temp_dir().join(format!("rigidity-config-run-{}", std::process::id()));
    for f in [Format::Json, Format::Csv, Format::PlotCsv] {
        for p in emit(&report, f, &dir).unwrap() {
            println!("wrote {}", p.display());
        }
    }
    std::fs::remove_dir_all(&dir).ok();
}
