//! Generates the C header for this crate with cbindgen. The header lands in
//! `include/vsm_probe.h` (committed, so C consumers can build without Rust
//! tooling) and a copy goes to `OUT_DIR` for build scripts that prefer it.

use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("manifest dir"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml parses");
    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen generates the header");

    bindings.write_to_file(crate_dir.join("include").join("vsm_probe.h"));
    let out_dir = PathBuf::from(env::var("OUT_DIR").expect("out dir"));
    bindings.write_to_file(out_dir.join("vsm_probe.h"));
}
