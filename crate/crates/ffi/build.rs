use std::env;
use std::path::PathBuf;

use cbindgen::{Config, EnumConfig, Language, Style};

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");

    let config = Config {
        language: Language::C,
        include_guard: Some("RINGSIM_H".to_owned()),
        style: Style::Both,
        usize_is_size_t: true,
        cpp_compat: true,
        documentation: true,
        enumeration: EnumConfig {
            prefix_with_name: true,
            ..Default::default()
        },
        header: Some(
            "/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */".to_owned(),
        ),
        ..Default::default()
    };

    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(crate_dir.join("include/ringsim.h"));
        }
        Err(e) => panic!("cbindgen failed: {e}"),
    }
}
