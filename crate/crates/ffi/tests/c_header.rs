use std::path::PathBuf;
use std::process::Command;

/// Compile the C smoke program against the generated header and the shared
/// library, then run it.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().to_path_buf();
    if !lib_dir.join("libphotonpress_ffi.so").exists() && !lib_dir.join("libphotonpress_ffi.dylib").exists() {
        eprintln!("shared library not found in {}, skipping", lib_dir.display());
        return;
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = tempfile_dir().join("smoke");
    let status = match Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-o")
        .arg(&out)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lphotonpress_ffi")
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-lm")
        .status()
    {
        Ok(s) => s,
        Err(e) => {
            eprintln!("no C compiler ({cc}): {e}, skipping");
            return;
        }
    };
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&out).env("LD_LIBRARY_PATH", &lib_dir).output().unwrap();
    assert!(
        run.status.success(),
        "smoke program exited with {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with(env!("CARGO_PKG_VERSION")));
}

fn tempfile_dir() -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi-smoke");
    std::fs::create_dir_all(&d).unwrap();
    d
}
