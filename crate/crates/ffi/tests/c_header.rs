use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// Directory holding this crate's build outputs (`target/<profile>`).
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(manifest_dir().join("include/sparsrec.h")).unwrap();
    for sym in [
        "typedef struct SparsrecTransfer SparsrecTransfer",
        "SPARSREC_STATUS_OK = 0",
        "sparsrec_last_error_message",
        "sparsrec_transfer_build",
        "sparsrec_weights_new",
        "sparsrec_solver_solve",
        "sparsrec_max_property",
    ] {
        assert!(h.contains(sym), "header lacks {sym}");
    }
}

#[test]
fn c_program_links_and_runs() {
    let lib = profile_dir().join("libsparsrec_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let out = tempfile_path("sparsrec_smoke");
    let status = Command::new("cc")
        .arg(manifest_dir().join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&out)
        .status()
        .expect("C compiler is available");
    assert!(status.success(), "C smoke program failed to compile");
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "smoke program exited with {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("m=32 n=16"));
}

fn tempfile_path(stem: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{stem}_{}", std::process::id()))
}
