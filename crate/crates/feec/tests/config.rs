use std::path::Path;

use feec::config::{Bc, Format, RefinementSpec, SweepProblem};
use feec::{parse_config, CliError, RunConfig};
use feec_core::conforming::BoundaryCondition;
use feec_core::geometry::Refinement;
use feec_core::solvers::ProblemConfig;

#[test]
fn minimal_config_fills_defaults() {
    let cfg = RunConfig::from_toml("[domain]\npreset = \"unit-square-grid\"\ndegree = 2\n").unwrap();
    assert_eq!(cfg.domain.cells, 4);
    assert_eq!((cfg.domain.nx, cfg.domain.ny), (2, 2));
    assert_eq!(cfg.domain.refinement, RefinementSpec::Named("uniform".into()));
    assert_eq!(cfg.output.samples, 32);
    assert_eq!(cfg.output.format, None);
    assert_eq!(cfg.case.pulse_width, 0.1);
    assert_eq!(cfg.problem_config(), ProblemConfig::default());
    assert!(cfg.sweep_cells().is_empty());
}

#[test]
fn overrides_reach_the_problem_config() {
    let cfg = RunConfig::from_toml(
        r#"
        [domain]
        preset = "square-pi-grid"
        degree = 3
        nx = 3
        ny = 3
        refinement = "surround"
        refine_level = 2

        [problem]
        bc = "none"
        alpha = 10.0
        order = 1
        seed = 99

        [output]
        format = "vtk"
        "#,
    )
    .unwrap();
    let p = cfg.problem_config();
    assert_eq!(p.bc, BoundaryCondition::None);
    assert_eq!((p.alpha, p.order, p.seed), (10.0, Some(1), 99));
    assert_eq!(cfg.problem.bc, Some(Bc::None));
    assert_eq!(cfg.output.format, Some(Format::Vtk));
    assert_eq!(cfg.preset_params().unwrap().refinement, Refinement::Surround(2));
    let explicit = RunConfig::from_toml("[domain]\npreset = \"unit-square-grid\"\ndegree = 2\nrefinement = [1, 0, 2, 0]\n").unwrap();
    assert_eq!(explicit.preset_params().unwrap().refinement, Refinement::Explicit(vec![1, 0, 2, 0]));
}

fn config_error(text: &str) -> String {
    match RunConfig::from_toml(text) {
        Err(CliError::Config(m)) => m,
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

#[test]
fn invalid_configs_are_rejected_with_context() {
    let m = config_error("[domain]\npreset = \"unit-square-grid\"\ncells = 4\n");
    assert!(m.contains("degree"), "{m}");
    let m = config_error("[domain]\npreset = \"unit-square-grid\"\ndegree = 2\n\n[problem]\nalpha = 1.0\nbeta = 2.0\n");
    assert!(m.contains("beta") && m.contains("line 7"), "{m}");
    let m = config_error("[domain]\npreset = \"unit-square-grid\"\ndegree = 2\n[extra]\n");
    assert!(m.contains("extra"), "{m}");
    assert!(matches!(
        RunConfig::from_toml("[domain]\npreset = \"pretzel\"\ndegree = 2\n"),
        Err(CliError::Core(feec_core::Error::Usage(_)))
    ));
    config_error("[domain]\npreset = \"unit-square-grid\"\ndegree = 9\n");
    config_error("[domain]\npreset = \"unit-square-grid\"\ndegree = 2\nrefinement = \"spiral\"\n");
    config_error("[domain]\npreset = \"unit-square-grid\"\ndegree = 2\n[problem]\nbc = \"periodic\"\n");
    assert!(RunConfig::from_toml("[domain]\npreset = \"unit-square-grid\"\ndegree = 2\n[problem]\nalpha = -1.0\n").is_err());
}

#[test]
fn sweep_axes_are_enumerated_in_declared_order() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cfg = parse_config(&dir.join("sweep.toml")).unwrap();
    assert_eq!(cfg.sweep.problem, Some(SweepProblem::MaxwellTh));
    let listed: String = cfg
        .sweep_cells()
        .iter()
        .map(|c| format!("p={} r={} level={}\n", c.degree, c.order.unwrap(), c.level))
        .collect();
    assert_eq!(listed, std::fs::read_to_string(dir.join("sweep_cells.txt")).unwrap());
}

#[test]
fn missing_files_are_io_errors() {
    let err = parse_config(Path::new("/nonexistent/feec.toml")).unwrap_err();
    assert!(matches!(err, CliError::Io { .. }));
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn sample_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}
