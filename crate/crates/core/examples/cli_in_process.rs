//! Drives the `mnw` command line from Rust, capturing its output instead of
//! spawning the binary.

use std::path::Path;

fn main() {
    let material = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample_material.json");
    let material = material.to_str().expect("utf-8 path");

    for args in [
        vec!["mnw", "validate", material],
        vec!["mnw", "speeds", "--material", material],
        vec!["mnw", "dispersion", "--num", "4", "--material", material],
        vec!["mnw", "blayer", "--eps", "0.1", "--material", material],
    ] {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = mnw::cli::run_with(args.iter().copied(), &mut out, &mut err);
        println!("$ {}  (exit {code})", args.join(" "));
        print!("{}", String::from_utf8_lossy(&out));
        eprint!("{}", String::from_utf8_lossy(&err));
    }
}
