//! Thin command-line front end: parses a subcommand plus a config path,
//! applies scalar overrides, and delegates to the library runner.

use std::path::PathBuf;
use std::process::ExitCode;

use grauert::runner;

const USAGE: &str = "\
usage: grauert-lab <subcommand> <config.toml> [options]

subcommands:
  symplectic-check   symplectic/metaplectic property suite
  gaussian-check     Gaussian engine vs quadrature oracle
  kernel             raw kernel queries (CSV)
  scaling            diagonal and near-graph scaling comparison
  rapid-decay        off-locus decay orders vs on-locus controls
  weyl               tempered Weyl sums vs the closed-form density
  husimi             Husimi sup growth over a mode ladder
  qsymbol            normalized spherical profile ratios
  all                every experiment the config supports

options (scalar overrides only):
  --seed <u64>         reseed the property suites
  --output-dir <dir>   where reports and CSV tables go (default: out)
  --tau <f64>          tube radius
  --epsilon <f64>      cutoff half-width
  --t0 <f64>           cutoff center
  --trunc-tol <f64>    kernel truncation tolerance

exit codes: 0 ok, 1 criterion failure, 2 config error, 3 numerical guard
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 2 || args[0] == "--help" || args[0] == "-h" {
        eprint!("{USAGE}");
        return ExitCode::from(2);
    }
    let sub = args[0].as_str();
    if !runner::SUBCOMMANDS.contains(&sub) {
        eprintln!("unknown subcommand '{sub}'\n");
        eprint!("{USAGE}");
        return ExitCode::from(2);
    }
    let config = PathBuf::from(&args[1]);

    let mut seed = None;
    let mut output_dir = None;
    let mut tau = None;
    let mut epsilon = None;
    let mut t0 = None;
    let mut trunc_tol = None;
    let mut it = args[2..].iter();
    while let Some(flag) = it.next() {
        let value = match it.next() {
            Some(v) => v,
            None => {
                eprintln!("missing value for {flag}");
                return ExitCode::from(2);
            }
        };
        let parse_f = |v: &str| v.parse::<f64>().ok();
        match flag.as_str() {
            "--seed" => seed = value.parse::<u64>().ok(),
            "--output-dir" => output_dir = Some(value.clone()),
            "--tau" => tau = parse_f(value),
            "--epsilon" => epsilon = parse_f(value),
            "--t0" => t0 = parse_f(value),
            "--trunc-tol" => trunc_tol = parse_f(value),
            other => {
                eprintln!("unknown option '{other}'\n");
                eprint!("{USAGE}");
                return ExitCode::from(2);
            }
        }
    }

    let code = runner::run_from_path(sub, &config, seed, output_dir, tau, epsilon, t0, trunc_tol);
    ExitCode::from(code as u8)
}
