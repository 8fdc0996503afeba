mod common;

use common::default_table;
use equimap::experiments::*;
use equimap::soliton::{hdot1_distance, soliton_profile, SolitonParams};
use equimap::spectral::TableConfig;
use equimap::{Error, GridSpec};

#[test]
fn glued_data_matches_the_two_solitons_and_localizes_psi() {
    let grid = default_table().field_grid();
    let (eps, gamma) = (0.05, 0.1);
    let u = make_instability_data(eps, gamma, 0.0, 1.1, grid).unwrap();
    let inner = soliton_profile(&SolitonParams::new(1, 0.0, 1.1).unwrap(), grid);
    let outer = soliton_profile(&SolitonParams::unit(), grid);
    for j in 0..grid.len() {
        let r = grid.r(j);
        let x = u.at(j);
        assert!((x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 1.0).abs() < 1e-12);
        let target = if r <= 0.5 / eps {
            inner.at(j)
        } else if r >= 2.0 / eps {
            outer.at(j)
        } else {
            continue;
        };
        assert!((0..3).all(|k| (x[k] - target[k]).abs() < 1e-14), "r = {r}");
    }
    let d = hdot1_distance(&u, &inner, grid).unwrap();
    assert!(d <= 5.0 * eps * gamma, "proximity {d}");

    let psi = reduced_field(grid, &u).unwrap();
    let l2 = psi.norm_l2(grid);
    assert!(l2 <= 5.0 * gamma * eps, "L2 {l2}");
    let outside: f64 = (0..grid.len())
        .filter(|&j| grid.r(j) < 0.25 / eps || grid.r(j) > 4.0 / eps)
        .map(|j| grid.weights()[j] * psi.values()[j].norm_sqr())
        .sum();
    assert!(outside < 1e-6 * l2 * l2);
    let sup = psi.max_abs() / (gamma * eps * eps);
    assert!(sup > 0.1 && sup < 10.0, "sup / γε² = {sup}");
}

#[test]
fn glued_data_obeys_the_fourier_envelope() {
    let table = default_table();
    let grid = table.field_grid();
    let mut constants = Vec::new();
    for eps in [0.05, 0.1] {
        let u = make_instability_data(eps, 0.1, 0.0, 1.1, grid).unwrap();
        let psi = reduced_field(grid, &u).unwrap();
        constants.push(fourier_envelope_constant(table, &psi, eps, 0.1).unwrap());
    }
    // the bound holds with one constant for both ε
    assert!(constants.iter().all(|c| c.is_finite() && *c < 100.0), "{constants:?}");
    assert!(constants[0] / constants[1] < 3.0 && constants[1] / constants[0] < 3.0, "{constants:?}");
}

#[test]
fn instability_data_is_checked() {
    let grid = default_table().field_grid();
    assert!(matches!(make_instability_data(0.3, 0.1, 0.0, 1.1, grid), Err(Error::Parameter(_))));
    assert!(matches!(make_instability_data(0.05, 0.1, 0.0, 1.5, grid), Err(Error::Parameter(_))));
    let short = equimap::make_log_grid(1e-2, 1e1, 400).unwrap();
    assert!(matches!(make_instability_data(0.05, 0.1, 0.0, 1.1, &short), Err(Error::OutOfRange(_))));
}

#[test]
fn random_perturbations_are_seeded_and_scaled() {
    let table = default_table();
    let q = soliton_profile(&SolitonParams::unit(), table.field_grid());
    let (a, ba) = random_perturbation(table, 0.01, 7, 3).unwrap();
    let (b, bb) = random_perturbation(table, 0.01, 7, 3).unwrap();
    let (_, bc) = random_perturbation(table, 0.01, 8, 3).unwrap();
    assert_eq!(ba, bb);
    assert_ne!(ba, bc);
    assert_eq!(a.max_distance(&b), 0.0);
    let d = map_x_distance(table, &a, &q).unwrap();
    assert!((d / 0.01 - 1.0).abs() < 1e-6, "X distance {d}");
    for bump in &ba {
        assert!(bump.center - bump.width >= 0.3f64.ln() - 1e-12);
        assert!(bump.center + bump.width <= 5f64.ln() + 1e-12);
    }
    let (z, none) = random_perturbation(table, 0.0, 7, 3).unwrap();
    assert!(none.is_empty());
    assert_eq!(z.max_distance(&q), 0.0);
}

#[test]
fn unperturbed_stability_run_sits_at_the_soliton() {
    let table = default_table();
    let mut spec = ExperimentSpec::for_kind(ExperimentKind::Stability);
    spec.gamma = 0.0;
    spec.evolution.t_end = 2.0;
    let (traj, summary) = run_stability(&spec, table).unwrap();
    assert!(summary.completed);
    let s = summary.stability.unwrap();
    assert_eq!(s.x_distance_initial, 0.0);
    // the sampled soliton has a round-off sized reduced field
    assert!(s.sup_lx < 1e-8);
    assert!(s.sup_lambda_deviation < 1e-8 && s.sup_alpha < 1e-8);
    for row in &traj.samples {
        assert!(row.mass < 1e-16);
        assert!((row.a2_at_1 - 0.0).abs() < 1e-8);
        assert!((row.im_psi2_at_1 - 1.0).abs() < 1e-8 && row.re_psi2_at_1.abs() < 1e-8);
    }
}

#[test]
fn short_instability_run_reports_the_initial_data() {
    let table = default_table();
    let mut spec = ExperimentSpec::for_kind(ExperimentKind::Instability);
    spec.evolution.t_end = 20.0;
    spec.evolution.monitor_every = 2.0;
    let (traj, summary) = run_instability(&spec, table).unwrap();
    assert!(summary.completed);
    let r = summary.instability.unwrap();
    assert!((r.lambda_initial - 1.1).abs() < 1e-6, "{}", r.lambda_initial);
    assert!(r.initial_proximity_ratio <= 5.0);
    assert!(r.psi0_l2_ratio <= 5.0);
    assert!(r.psi0_mass_outside_annulus < 1e-6);
    assert!(r.psi0_lx < INSTABILITY_SMALLNESS);
    // no t = 100 snapshot on a short run
    assert!(r.linear_surrogate_distance.is_none());
    assert!(r.d_start.is_finite() && r.d_final.is_finite());
    assert_eq!(traj.samples.len(), 11);
    // λ barely moves in the first time units
    assert!((r.lambda_final - 1.1).abs() < 0.01);
}

#[test]
fn inverse_log_fit_recovers_its_model() {
    let t: Vec<f64> = (1..=100).map(|k| 10.0 * k as f64).collect();
    let d: Vec<f64> = t.iter().map(|t| 0.01 + 0.2 / t.ln()).collect();
    let fit = fit_inverse_log(&t, &d).unwrap();
    assert!((fit.a - 0.01).abs() < 1e-12 && (fit.b - 0.2).abs() < 1e-12);
    assert!(fit.rms < 1e-12);
    assert!(fit_inverse_log(&t[..1], &d[..1]).is_none());
}

#[test]
fn missing_table_names_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("absent.eqt");
    let spec = ExperimentSpec {
        table: Some(path.clone()),
        ..Default::default()
    };
    match load_or_build_table(&spec) {
        Err(Error::Parameter(msg)) => assert!(msg.contains(&path.display().to_string()), "{msg}"),
        other => panic!("expected a parameter error, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn small_table_is_built_cached_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.eqt");
    let grid = GridSpec {
        r_min: 1e-3,
        r_max: 1e3,
        n: 600,
    };
    let spec = ExperimentSpec {
        grid,
        xi_max: 4.0,
        table: Some(path.clone()),
        build_table: true,
        ..Default::default()
    };
    let built = load_or_build_table(&spec).unwrap();
    assert!(path.exists());
    let again = load_or_build_table(&ExperimentSpec {
        build_table: false,
        ..spec.clone()
    })
    .unwrap();
    assert_eq!(built.table_hash(), again.table_hash());
    let other = ExperimentSpec {
        xi_max: 8.0,
        ..spec
    };
    assert!(matches!(load_or_build_table(&other), Err(Error::Parameter(_))));
    assert_ne!(TableConfig::default().grid, grid);
}

#[test]
fn outputs_follow_the_documented_schema() {
    let table = default_table();
    let mut spec = ExperimentSpec::for_kind(ExperimentKind::LinearDecay);
    spec.evolution.t_end = 1.0;
    spec.evolution.monitor_every = 0.5;
    spec.evolution.snapshot_every = Some(0.5);
    let (traj, summary) = run_experiment(&spec, table).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(dir.path(), table, &traj, &summary).unwrap();

    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), equimap::evolve::CSV_COLUMNS.join(","));
    assert_eq!(csv.lines().count(), 1 + traj.samples.len());

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["kind"], "linear-decay");
    assert_eq!(json["table_hash"], table.table_hash());
    assert_eq!(json["completed"], true);
    let decay = &json["linear_decay"];
    assert_eq!(decay["times"].as_array().unwrap().len(), 2);
    assert!(json["stability"].is_null());

    let (hash, snaps) = equimap::spectral::io::read_snapshots(&dir.path().join("snapshots.eqs")).unwrap();
    assert_eq!(hash, table.grid_hash());
    assert_eq!(snaps.len(), 3);
    assert_eq!(snaps[2].values, traj.final_psi.unwrap().values());
}

#[test]
fn table_build_kind_has_no_trajectory() {
    let spec = ExperimentSpec::for_kind(ExperimentKind::TableBuild);
    assert!(run_experiment(&spec, default_table()).is_err());
}
