use std::path::PathBuf;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("mdsolve.h");
    std::fs::create_dir_all(header.parent().unwrap()).unwrap();
    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).unwrap();
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            // only touch the file when the content changed
            let mut buf = Vec::new();
            bindings.write(&mut buf);
            let new = String::from_utf8(buf).unwrap();
            let old = std::fs::read_to_string(&header).unwrap_or_default();
            if new != old {
                std::fs::write(&header, new).unwrap();
            }
        }
        Err(e) => panic!("header generation failed: {e}"),
    }
}
