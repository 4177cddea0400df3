//! Helpers shared by the acceptance checks.

use std::io::Write;
use std::path::PathBuf;

/// Prints `ID PASS|FAIL: detail` on stderr, bypassing the test harness
/// capture so every verdict lands in the log, then asserts `pass`.
pub fn verdict(id: &str, pass: bool, detail: String) {
    let line = format!("{id} {}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(pass, "{id}: {detail}");
}

/// Path of the `umbilic` executable built alongside the running test binary.
///
/// Test executables live in `target/<profile>/deps`; binaries one level up.
pub fn cli_binary() -> PathBuf {
    let exe = std::env::current_exe().expect("test executable path");
    let profile_dir = exe
        .parent()
        .and_then(|deps| deps.parent())
        .expect("test executable inside target/<profile>/deps");
    profile_dir.join(format!("umbilic{}", std::env::consts::EXE_SUFFIX))
}
