//! Parses a configuration file (or the built-in default), prints the
//! effective configuration and runs it through the same driver as the CLI.
//!
//!     cargo run --release --example config_run -- crates/core/configs/paper-2d.cfg

use maxwell_stefan::app;
use maxwell_stefan::config::RunConfig;

fn main() -> maxwell_stefan::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(p) => RunConfig::from_file(p.as_ref())?,
        None => RunConfig::parse("")?,
    };
    print!("{}", cfg.to_text());
    let out = app::run(&cfg, &cfg.out_dir, false)?;
    println!("audit {}", if out.passed() { "passed" } else { "failed" });
    Ok(())
}
