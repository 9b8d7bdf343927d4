//! Driving the command-line front end from code with a JSON config and a flag override.

use quadrant_ruin::cli::run_with;
use std::io::Write;

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join("quadrant-ruin-example");
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("run.json");
    std::fs::File::create(&config)?.write_all(
        br#"{
            "model": {"driver": "cpe", "lambda": 1, "mu": 2, "p1": 3, "p2": 1},
            "query": {"event": ["or", "and"], "method": ["exact", "leading"], "ray": {"a": 0.3, "k": [10, 20, 40]}},
            "output": {"format": "csv"}
        }"#,
    )?;

    let mut out = Vec::new();
    let mut err = Vec::new();
    let path = config.to_string_lossy().into_owned();
    // the flag wins over the file's ray slope
    let code = run_with(
        ["quadrant-ruin", "sweep", "--config", &path, "--a", "0.9"],
        &mut out,
        &mut err,
    );
    std::io::stdout().write_all(&out)?;
    std::io::stderr().write_all(&err)?;
    println!("exit code {code}");
    Ok(())
}
