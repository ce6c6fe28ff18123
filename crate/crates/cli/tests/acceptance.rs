//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1-7 run the identity checks in-process and also hold each
//! criterion to its wall-clock budget. Criterion 8 drives the binary.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cfrht::verify::{self, CheckKind, Scope};
use cfrht::Complex64;
use cfrht_cli::io;
use common::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn criterion(k: u8) -> Verdict {
    let start = Instant::now();
    let checks = verify::run_criterion(k);
    let elapsed = start.elapsed();
    let budget = verify::criterion_budget(k);
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} residual={:e} tol={:e}{}", c.name, c.residual, c.tolerance, if c.note.is_empty() { String::new() } else { format!(" ({})", c.note) }))
        .collect();
    let asserts: Vec<String> = checks
        .iter()
        .filter(|c| c.kind != CheckKind::Info)
        .map(|c| format!("{}{}{:.1e}", c.name.split_once('.').map_or(c.name, |(_, n)| n), if c.kind == CheckKind::Negative { ">" } else { "=" }, c.residual))
        .collect();
    let in_budget = elapsed <= budget;
    let mut detail = format!("{} checks, {:.1}s of {}s: {}", checks.len(), elapsed.as_secs_f64(), budget.as_secs(), asserts.join(" "));
    if !failed.is_empty() {
        detail.push_str(&format!(" | failed: {}", failed.join("; ")));
    }
    if !in_budget {
        detail.push_str(" | over budget");
    }
    Verdict { pass: failed.is_empty() && in_budget && !checks.is_empty(), detail }
}

fn cli_contract() -> Verdict {
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // full verification through the binary
    let report_path = d.join("report.txt");
    let start = Instant::now();
    let r = cfrht(&["verify", "--scope", "all", "--output", path_str(&report_path)]);
    let elapsed = start.elapsed();
    notes.push(format!("verify --scope all exit={} in {:.1}s", r.code, elapsed.as_secs_f64()));
    if r.code != 0 {
        problems.push(format!("verify exit {}: {}", r.code, r.stderr.trim()));
    }
    if elapsed > Duration::from_secs(300) {
        problems.push("verify over 5 minutes".into());
    }
    match std::fs::read_to_string(&report_path) {
        Ok(report) => {
            let mut seen: HashMap<&str, usize> = HashMap::new();
            for line in report.lines().filter(|l| l.starts_with("check ")) {
                if let Some(name) = line.split(' ').find_map(|kv| kv.strip_prefix("name=")) {
                    *seen.entry(name).or_default() += 1;
                }
            }
            let expected = verify::check_names(Scope::All);
            for name in &expected {
                if seen.get(name) != Some(&1) {
                    problems.push(format!("report lists {name} {} times", seen.get(name).copied().unwrap_or(0)));
                }
            }
            if seen.len() != expected.len() {
                problems.push("report has unexpected checks".into());
            }
            let parity = report.lines().find(|l| l.contains("name=twomode.alpha_pi_parity"));
            if !parity.is_some_and(|l| l.contains("kind=info") && l.contains("pass=true")) {
                problems.push("alpha=pi parity finding missing or not informational".into());
            }
            for key in ["tool_version=", "convention.hbar=1", "convention.vacuum_cov=", "summary.status=pass"] {
                if !report.contains(key) {
                    problems.push(format!("report lacks `{key}`"));
                }
            }
            notes.push(format!("{} checks listed once each", expected.len()));
        }
        Err(e) => problems.push(format!("report not written: {e}")),
    }

    // bit-identical round trips of files the tool writes
    let x = linspace(-12.0, 12.0, 1024);
    let input = write_1d(d, "in.csv", &x, |x| gaussian(x, 0.4, 0.9) * Complex64::from_polar(1.0, 0.3 * x));
    let out1 = d.join("out1.csv");
    let out2 = d.join("out2.csv");
    let matrix = d.join("h.txt");
    let a = linspace(-7.0, 7.0, 96);
    let input2 = write_2d(d, "in2.csv", &a, |e| Complex64::new(1.0, 0.1 * e.re) * (-e.norm_sqr() / 2.0).exp());
    let steps = [
        cfrht(&["transform", "--alpha", "0.8", "--mu", "1.2", "--input", path_str(&input), "--output", path_str(&out1)]),
        cfrht(&["twomode", "--alpha", "0.8", "--input", path_str(&input2), "--output", path_str(&out2)]),
        cfrht(&["fock", "--alpha", "1.1", "--mu", "2", "--nu", "0.7", "--output", path_str(&matrix)]),
    ];
    for s in &steps {
        if s.code != 0 {
            problems.push(format!("producing round-trip file failed: {}", s.stderr.trim()));
        }
    }
    let mut round_trips = 0;
    for path in [&input, &out1, &input2, &out2] {
        let text = std::fs::read_to_string(path).unwrap_or_default();
        match io::parse_signal(&text) {
            Ok(s) if io::render_signal(&s) == text && io::parse_signal(&io::render_signal(&s)).ok() == Some(s.clone()) => round_trips += 1,
            _ => problems.push(format!("{} does not round-trip", path.display())),
        }
    }
    let text = std::fs::read_to_string(&matrix).unwrap_or_default();
    match io::parse_matrix(&text) {
        Ok(m) if io::render_matrix(&m) == text => round_trips += 1,
        _ => problems.push("matrix listing does not round-trip".into()),
    }
    notes.push(format!("{round_trips}/5 files round-trip bit-identically"));

    // documented error paths
    let bad = d.join("bad.csv");
    std::fs::write(&bad, "x,re,im\n0,1,0\n1,oops,0\n").unwrap();
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["transform", "--alpha", "1", "--input", path_str(&bad)], 2),
        (vec!["transform", "--alpha", "0", "--input", path_str(&input)], 2),
        (vec!["transform", "--alpha", "1", "--input", path_str(&input), "--grid-min", "-1", "--grid-max", "1", "--grid-points", "128"], 3),
        (vec!["fock", "--alpha", "0", "--route", "normal_ordered"], 2),
        (vec!["fock", "--alpha", "1", "--mu", "40", "--fock-dim", "32"], 3),
        (vec!["gaussian", "--alpha", "1", "--cov", "0.1,0,0,0.1"], 2),
        (vec!["plotdata", "--input", path_str(&input), "--format", "wigner"], 2),
        (vec!["verify", "--scope", "nothing"], 2),
        (vec![], 2),
    ];
    let mut matched = 0;
    for (args, want) in &cases {
        let got = cfrht(args).code;
        if got == *want {
            matched += 1;
        } else {
            problems.push(format!("`cfrht {}` exited {got}, expected {want}", args.join(" ")));
        }
    }
    notes.push(format!("{matched}/{} error paths exit as documented", cases.len()));

    let mut detail = notes.join(", ");
    if !problems.is_empty() {
        detail.push_str(&format!(" | {}", problems.join("; ")));
    }
    Verdict { pass: problems.is_empty(), detail }
}

fn main() -> ExitCode {
    let mut all = true;
    for k in 1..=8u8 {
        let v = if k == 8 { cli_contract() } else { criterion(k) };
        all &= v.pass;
        println!("AC{k} {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
