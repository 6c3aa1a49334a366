//! The property suite behind `mstefan verify`, with an optional seed.
//!
//!     cargo run --release --example invariants -- 99

use maxwell_stefan::config::DEFAULT_SEED;
use maxwell_stefan::diagnostics::verify_all;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    println!("seed {seed}");
    let mut failed = 0;
    for (name, r) in verify_all(seed) {
        match r {
            Ok(o) => {
                failed += usize::from(!o.passed);
                println!("{:<4} {:<46} {}", if o.passed { "ok" } else { "FAIL" }, o.name, o.detail);
            }
            Err(e) => {
                failed += 1;
                println!("err  {name:<46} {e}");
            }
        }
    }
    std::process::exit(i32::from(failed > 0));
}
