//! Runs each subcommand of the command-line tool in-process.
//!
//! `cargo run --example cli_tour`

fn main() {
    let out = std::env::temp_dir().join("orb-bergman-tour");
    let out = out.to_str().expect("utf-8 temp path");
    let runs: [&[&str]; 6] = [
        &["coeffs", "--m", "3", "--canonical-q", "2", "--check-P", "1"],
        &["kernel", "--model", "football:m=3,t=1", "--canonical-q", "2", "--rho", "0", "--krange", "1:5"],
        &["expand", "--model", "football:m=3,t=1", "--canonical-q", "2", "--rho", "1", "--out", out],
        &["rr", "--model", "football:m=5,t=1", "--canonical-q", "2", "--out", out],
        &["necessity", "--model", "football:m=3,t=1", "--rho", "0", "--out", out],
        &["localcheck", "--model", "flat:m=2", "--ks", "11,21", "--out", out],
    ];
    for args in runs {
        println!("$ orb-bergman {}", args.join(" "));
        let code = orb_bergman::cli::run(std::iter::once("orb-bergman").chain(args.iter().copied()));
        println!("exit {code}\n");
    }
    println!("files written to {out}");
}
