fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("manifest dir");
    let out = std::path::Path::new(&crate_dir).join("include").join("euvac.h");
    std::fs::create_dir_all(out.parent().unwrap()).expect("include dir");
    let mut config = cbindgen::Config::default();
    config.language = cbindgen::Language::C;
    config.include_guard = Some("EUVAC_H".into());
    config.documentation = true;
    config.enumeration.prefix_with_name = true;
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("unable to generate bindings")
        .write_to_file(out);
    println!("cargo:rerun-if-changed=src/lib.rs");
}
