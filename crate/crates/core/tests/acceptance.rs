//! Acceptance criteria, one line each. Exits non-zero if any fails.
//!
//! `cargo test -p cocart --test acceptance -- [criterion numbers]`

use std::process::ExitCode;
use std::time::Duration;

use cocart::suites::{find_suite, run, Bounds, Verdict};

/// Wall-time limits for criteria that state one.
fn limit(criterion: u8) -> Option<Duration> {
    match criterion {
        1 => Some(Duration::from_secs(10)),
        2 | 3 => Some(Duration::from_secs(60)),
        7 => Some(Duration::from_secs(300)),
        _ => None,
    }
}

fn main() -> ExitCode {
    let picked: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let bounds = Bounds::default();
    let mut failed = 0;
    for n in 1..=15u8 {
        if !picked.is_empty() && !picked.contains(&n) {
            continue;
        }
        let suite = find_suite(&n.to_string()).expect("numbered suite");
        let r = run(&suite, &bounds);
        let slow = limit(n).filter(|&l| r.wall_time > l);
        let ok = r.passed && slow.is_none();
        let mut line = format!(
            "criterion {n:>2} {:<24} {}  pass {} fail {} truncated {}  {:.2?}",
            r.suite,
            if ok { "PASS" } else { "FAIL" },
            r.tally.pass,
            r.tally.fail,
            r.tally.truncated,
            r.wall_time
        );
        if let Some(l) = slow {
            line.push_str(&format!("  (limit {l:?})"));
        }
        println!("{line}");
        if !ok {
            failed += 1;
            for q in r.requirements.iter().filter(|q| !q.met) {
                println!("    requirement {}: {} of {} passed", q.group, q.passed, q.min_pass);
            }
            for c in &r.checks {
                if let Verdict::Fail { witness } = &c.verdict {
                    println!("    {}: {witness}", c.id);
                }
            }
        }
    }
    println!("{} criteria failed", failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
