//! The `acceptance` subcommand.
//!
//! acceptance.json holds the reports without timings so that two runs with
//! the same seed are byte-identical; timings and budgets go to stdout.
//! Budgets apply to the judged part of a criterion, not to oracle reruns.

use std::process::ExitCode;
use std::time::Instant;

use horoflow::acceptance::{determinism, rerun_oracle, run_criterion, Check, CriterionReport, LIBRARY_CRITERIA};
use serde_json::json;

use crate::output::{write_all, VERSION};
use crate::{AcceptanceArgs, Failure};

fn timed(id: u8, f: impl FnOnce() -> horoflow::Result<CriterionReport>) -> (CriterionReport, f64) {
    let start = Instant::now();
    let report = f().unwrap_or_else(|e| {
        let mut r = CriterionReport::new(id, "criterion", None);
        r.check(Check::flag(format!("error: {e}"), false));
        r
    });
    (report, start.elapsed().as_secs_f64())
}

fn within_budget(r: &CriterionReport, secs: f64) -> bool {
    r.budget_s.is_none_or(|b| secs <= b)
}

fn print(r: &CriterionReport, secs: f64) {
    let ok = r.pass() && within_budget(r, secs);
    let budget = r.budget_s.map_or(String::new(), |b| format!(", budget {b} s"));
    println!(
        "[{}] {:>2} {} ({secs:.2} s{budget})",
        if ok { "PASS" } else { "FAIL" },
        r.id,
        r.title
    );
    for c in &r.checks {
        println!(
            "       {} {}: {:e} {} {:e}",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.cmp.symbol(),
            c.bound
        );
    }
    for i in &r.info {
        println!("            {}: {:e}", i.name, i.value);
    }
}

pub fn run(args: &AcceptanceArgs) -> Result<ExitCode, Failure> {
    let mut reports = Vec::new();
    let mut all = true;
    for id in LIBRARY_CRITERIA {
        let (mut r, secs) = timed(id, || run_criterion(id, args.seed));
        if !args.quick {
            if let Err(e) = rerun_oracle(&mut r) {
                r.check(Check::flag(format!("oracle rerun error: {e}"), false));
            }
        }
        print(&r, secs);
        all &= r.pass() && within_budget(&r, secs);
        reports.push(r);
    }
    let doc = json!({"version": VERSION, "seed": args.seed, "quick": args.quick, "criteria": reports});
    let text = serde_json::to_string_pretty(&doc).expect("reports serialize") + "\n";
    write_all(&args.out, &[("acceptance.json", text)])?;
    if !args.no_determinism {
        let exe = std::env::current_exe().map_err(|e| Failure::config(format!("cannot locate the binary: {e}")))?;
        let (r, secs) = timed(10, || determinism(&exe, args.seed));
        print(&r, secs);
        all &= r.pass() && within_budget(&r, secs);
    }
    println!("{}", if all { "all criteria pass" } else { "some criteria fail" });
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
