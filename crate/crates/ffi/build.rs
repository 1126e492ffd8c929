use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = PathBuf::from(&crate_dir).join("include").join("dkcalc.h");
    std::fs::create_dir_all(header.parent().unwrap()).unwrap();
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(cbindgen::Config::from_file(
            PathBuf::from(&crate_dir).join("cbindgen.toml"),
        ).expect("cbindgen.toml parses"))
        .generate()
        .expect("unable to generate bindings")
        .write_to_file(header);
}
