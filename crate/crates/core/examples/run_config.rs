//! Drive the command layer from code: load a preset, adjust it and run
//! `verify` through a JSON config file.

use clap::Parser;
use harnack_lab::cli::{execute, Cli, RunConfig};

fn main() {
    let mut cfg = RunConfig::preset("sine").unwrap();
    cfg.sampler.count = 500;
    let dir = std::env::temp_dir().join("harnack-lab-example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sine.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();

    let cli = Cli::try_parse_from(["harnack-lab", "verify", "--config", path.to_str().unwrap()]).unwrap();
    let outcome = execute(&cli).unwrap();
    print!("{}", outcome.stdout);
    for (name, body) in &outcome.files {
        println!("would write {name} ({} bytes)", body.len());
    }
}
