use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pinch_ee.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for symbol in [
        "typedef struct PeeScenario PeeScenario;",
        "PEE_STATUS_OK = 0",
        "PEE_STATUS_PANIC = 7",
        "PEE_SCHEME_EXHAUSTIVE = 4",
        "struct PeeParams pee_params_default(void);",
        "const char *pee_last_error(void);",
        "pee_scenario_new(",
        "pee_scenario_from_users(",
        "void pee_scenario_free(struct PeeScenario *scenario);",
        "pee_run_scheme(",
        "pee_solve_power_allocation(",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}

/// Directory holding the library artifacts next to this test binary.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = artifact_dir().join("libpinch_ee_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <math.h>
#include <stdio.h>
#include "pinch_ee.h"

int main(void) {
    PeeParams p = pee_params_default();
    p.num_positions = 10;
    PeeScenario *s = NULL;
    if (pee_scenario_new(&p, 7, &s) != PEE_STATUS_OK) return 1;
    PeeOutcome out;
    size_t active[10];
    if (pee_run_scheme(s, PEE_SCHEME_PROPOSED, 14, &out, active, 10) != PEE_STATUS_OK) return 2;
    if (!out.feasible || !(out.ee > 0.0)) return 3;
    double alpha[4];
    PeeOutcome fixed;
    if (pee_solve_power_allocation(s, active, out.n_active, &fixed, alpha, NULL) != PEE_STATUS_OK) return 4;
    if (fixed.ee != out.ee) return 5;
    PeeStatus st = pee_scenario_new(NULL, 1, &s);
    if (st != PEE_STATUS_NULL_POINTER || pee_last_error()[0] == '\0') return 6;
    pee_scenario_free(s);
    printf("%.6e\n", out.ee);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&bin).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let ee: f64 = String::from_utf8_lossy(&run.stdout).trim().parse().unwrap();
    assert!(ee > 0.0);
}
