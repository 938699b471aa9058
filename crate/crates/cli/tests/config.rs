use std::path::Path;

use exec_solver::config::{KernelSpec, SignalSpec};
use exec_solver::{parse_config, ConfigError, Mode};
use volterra_exec::{InitialDistortion, Kernel};

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

fn parse(text: &str) -> Result<exec_solver::RunConfig, ConfigError> {
    parse_config(text, Path::new("."))
}

#[test]
fn empty_file_lists_required_keys() {
    let err = parse("").unwrap_err();
    assert_eq!(err, ConfigError::MissingKeys("mode, kernel.type, output_dir".into()));
    assert!(err.to_string().contains("mode, kernel.type, output_dir"));
}

#[test]
fn shipped_baseline_parses_to_its_parameters() {
    let text = std::fs::read_to_string(configs().join("kernels_no_signal.conf")).unwrap();
    let c = parse_config(&text, configs()).unwrap();
    assert_eq!(c.mode, Mode::Compare);
    assert_eq!(
        (c.scenario.q, c.scenario.horizon, c.scenario.lambda, c.scenario.varrho, c.scenario.phi),
        (10.0, 10.0, 0.5, 4.0, 0.0)
    );
    assert_eq!(c.scenario.h0, InitialDistortion::Zero);
    assert_eq!(c.signal, SignalSpec::Zero);
    assert_eq!(c.compare, ["zero", "exponential", "fractional"]);
    assert_eq!(c.n, 500);
    let kernels: Vec<Kernel> = c
        .compare
        .iter()
        .map(|k| KernelSpec { kind: k.clone(), ..c.kernel.clone() }.kernel(10.0))
        .collect();
    assert_eq!(
        kernels,
        [
            Kernel::Zero,
            Kernel::exponential(1.0, 0.5).unwrap(),
            Kernel::fractional(1.0, 0.55).unwrap()
        ]
    );
}

#[test]
fn every_shipped_config_parses() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        parse_config(&text, configs()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn defaults_fill_the_scenario() {
    let c = parse("mode = solve\nkernel.type = zero\noutput_dir = out\n").unwrap();
    assert_eq!((c.scenario.q, c.scenario.horizon, c.scenario.varrho), (10.0, 10.0, 4.0));
    assert_eq!((c.n, c.seed, c.mc_paths), (500, 0, 1000));
}

#[test]
fn unknown_key_reports_its_line() {
    let err = parse("mode = solve\n\n# comment\nkernel.alpah = 0.6\n").unwrap_err();
    assert_eq!(
        err,
        ConfigError::UnknownKey {
            line: 4,
            key: "kernel.alpah".into()
        }
    );
}

#[test]
fn malformed_and_repeated_lines_are_rejected() {
    assert!(matches!(parse("mode solve\n"), Err(ConfigError::Syntax { line: 1, .. })));
    assert!(matches!(
        parse("mode = solve\nmode = mc\n"),
        Err(ConfigError::DuplicateKey { line: 2, first: 1, .. })
    ));
}

#[test]
fn bad_values_name_key_and_line() {
    let err = parse("mode = solve\noutput_dir = o\nkernel.type = fractional\nkernel.alpha = 0.3\n").unwrap_err();
    let msg = err.to_string();
    assert!(msg.starts_with("line 4: `kernel.alpha`"), "{msg}");

    let err = parse("mode = solve\noutput_dir = o\nkernel.type = exponential\n").unwrap_err();
    assert!(err.to_string().contains("kernel.rho"), "{err}");

    let err = parse("mode = solve\noutput_dir = o\nkernel.type = zero\nscenario.lambda = 0\n").unwrap_err();
    assert!(err.to_string().contains("line 4: `scenario.lambda`"), "{err}");
}

#[test]
fn running_penalty_in_solve_mode_points_to_mc() {
    let err = parse("mode = solve\noutput_dir = o\nkernel.type = zero\nscenario.phi = 0.1\n").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("scenario.phi") && msg.contains("mode = mc") && msg.contains("oracle"), "{msg}");
    parse("mode = mc\noutput_dir = o\nkernel.type = zero\nscenario.phi = 0.1\n").unwrap();
}

#[test]
fn sweep_needs_a_numeric_parameter() {
    let base = "mode = sweep\noutput_dir = o\nkernel.type = fractional\nkernel.alpha = 0.6\n";
    assert!(matches!(parse(base), Err(ConfigError::MissingKeys(_))));
    let err = parse(&format!("{base}sweep.param = kernel.type\nsweep.values = 1\n")).unwrap_err();
    assert!(err.to_string().contains("cannot be swept"), "{err}");
    let c = parse(&format!("{base}sweep.param = kernel.alpha\nsweep.values = 0.6, 0.7\n")).unwrap();
    assert_eq!(c.sweep, Some(("kernel.alpha".into(), vec![0.6, 0.7])));
    // each value is validated when the sweep runs
    assert!(c.with_value("kernel.alpha", 1.2).is_err());
}

#[test]
fn missing_referenced_file_is_a_config_error() {
    let err = parse("mode = solve\noutput_dir = o\nkernel.type = tabulated\nkernel.file = nope.csv\n").unwrap_err();
    assert!(err.to_string().contains("nope.csv"), "{err}");
}
