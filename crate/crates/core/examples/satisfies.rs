//! Check versions against constraints from the command line or stdin.
//!
//! ```console
//! $ cargo run --example satisfies -- 1.2.4 "~1.2.3"
//! true
//! $ printf '1.2.4\t~1.2.3\n' | cargo run --example satisfies
//! 1.2.4	~1.2.3	true
//! ```

use std::io::BufRead;

use retrograde_core::semver::{parse_constraint, parse_version};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() == 2 {
        match parse_version(&args[0]) {
            Ok(version) => println!("{}", parse_constraint(&args[1]).satisfies(&version)),
            Err(e) => {
                eprintln!("{e}");
                std::process::exit(2);
            }
        }
        return;
    }

    // Tab-separated "version<TAB>constraint" lines on stdin.
    let stdin = std::io::stdin();
    for line in stdin.lock().lines() {
        let line = line.expect("read stdin");
        let Some((vtext, ctext)) = line.split_once('\t') else {
            continue;
        };
        match parse_version(vtext) {
            Ok(version) => {
                let verdict = parse_constraint(ctext).satisfies(&version);
                println!("{vtext}\t{ctext}\t{verdict}");
            }
            Err(_) => println!("{vtext}\t{ctext}\tinvalid-version"),
        }
    }
}
