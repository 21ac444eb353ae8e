use std::env;
use std::path::PathBuf;

// Regenerates include/saruav.h from the exported items. The committed
// header is kept so downstream C builds never need cbindgen themselves;
// generation failures only warn.
fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(crate_dir.join("include/saruav.h"));
        }
        Err(e) => println!("cargo:warning=saruav.h not regenerated: {e}"),
    }
}
