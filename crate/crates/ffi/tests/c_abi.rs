use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn exported_functions() -> Vec<String> {
    let src = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    src.lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap().to_string())
        .collect()
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/prefix_adder.h")).unwrap();
    let fns = exported_functions();
    assert!(fns.len() >= 20, "{fns:?}");
    for f in &fns {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    for ty in [
        "typedef struct PaNetwork PaNetwork;",
        "typedef struct PaNetlist PaNetlist;",
    ] {
        assert!(header.contains(ty), "{ty}");
    }
    assert!(header.contains("PA_STATUS_OK = 0"));
}

/// Directory holding the library artifacts of this build profile.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    // target/<profile>/deps/<test binary>
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "prefix_adder.h"

int main(void) {
    PaNetwork *net = NULL;
    if (pa_network_build(PA_TOPOLOGY_BRENT_KUNG, 32, &net) != PA_STATUS_OK) return 10;
    PaOperatorCounts c;
    if (pa_network_counts(net, &c) != PA_STATUS_OK || c.black + c.gray != 57) return 11;
    uint64_t sum = 0;
    bool cout = false;
    if (pa_evaluate(net, 2147483648u, 2147483648u, false, &sum, &cout) != PA_STATUS_OK) return 12;
    if (sum != 0 || !cout) return 13;
    PaNetwork *bad = NULL;
    if (pa_network_build(PA_TOPOLOGY_SKLANSKY, 0, &bad) != PA_STATUS_INVALID_ARGUMENT) return 14;
    if (strlen(pa_last_error_message()) == 0) return 15;
    PaNetlist *nl = NULL;
    if (pa_netlist_expand(net, &nl) != PA_STATUS_OK) return 16;
    char *text = NULL;
    if (pa_emit_verilog(nl, PA_EMIT_STYLE_FLAT, "bk32", &text) != PA_STATUS_OK) return 17;
    if (strstr(text, "module bk32 (") == NULL) return 18;
    pa_string_free(text);
    pa_netlist_free(nl);
    pa_network_free(net);
    printf("ok %s\n", pa_version());
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let lib = artifact_dir().join("libprefix_adder_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!(
            "skipping: no C compiler or static library at {}",
            lib.display()
        );
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
