//! One line per primary acceptance criterion. Runs every criterion, prints
//! PASS or FAIL with the measured numbers, and exits nonzero if any failed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use equimap::evolve::{run, EvolutionConfig, Stepper};
use equimap::experiments::*;
use equimap::gauge::{coulomb_frame, derive_fields, reconstruct_fields, reconstruct_map, GaugeFields, ReconstructOptions};
use equimap::soliton::{energy, soliton_profile, SolitonParams};
use equimap::spectral::*;
use equimap::{ComplexField, Parity, RadialField, RadialGrid, RealField};

// Tolerances.
const EIGEN_RESIDUAL: f64 = 1e-4;
const CONJUGATION: f64 = 1e-4;
const BUILD_LIMIT: Duration = Duration::from_secs(120);
const PLANCHEREL: f64 = 1e-4;
const ROUND_TRIP: f64 = 1e-3;
const TRANSFORM_LIMIT: Duration = Duration::from_secs(10);
const ENERGY: f64 = 1e-5;
const SOLITON_PSI: f64 = 1e-8;
const MAP_ROUND_TRIP: f64 = 1e-5;
const SPHERE: f64 = 1e-8;
const MASS_DRIFT: f64 = 1e-6;
const ORDER: (f64, f64) = (2.0, 0.3);
const FIXED_POINT: f64 = 1e-8;
const STABILITY_C: f64 = 10.0;
const STABILITY_LIMIT: Duration = Duration::from_secs(300);
const PROXIMITY_C: f64 = 5.0;
const L2_C: f64 = 5.0;
const LAMBDA_RATIO: f64 = 0.5;
const INSTABILITY_LIMIT: Duration = Duration::from_secs(600);
const SYMMETRY: f64 = 1e-8;
const ENVELOPE: f64 = 2.0;

struct Line {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn bank(grid: &RadialGrid) -> Vec<RealField> {
    (0..10)
        .map(|i| {
            let (c, w) = (0.3 * 1.45f64.powi(i), 0.4 + 0.05 * i as f64);
            RadialField::from_fn(grid, Parity::Even, |r| {
                let s = (r / c).ln() / w;
                (-0.5 * s * s).exp()
            })
        })
        .collect()
}

fn calibration() -> (EigenTable, Line) {
    let t0 = Instant::now();
    let table = build_eigenbasis(&TableConfig::default()).expect("default table");
    let took = t0.elapsed();
    let h = table.factorization().h_matrix();
    let (wp, wd) = (table.primary_grid().weights(), table.field_grid().weights());
    let (mut res, mut conj) = (0.0f64, 0.0f64);
    for n in 0..table.n_modes() {
        let x = table.xi()[n];
        let phi = table.phi_unit(n);
        let r: f64 = h.apply(phi).iter().zip(phi).zip(wp).map(|((a, b), w)| (a - x * x * b).powi(2) * w).sum();
        res = res.max(r.sqrt());
        let l = table.factorization().apply_l(phi);
        let c: f64 = l.iter().zip(table.psi_unit(n)).zip(wd).map(|((a, b), w)| (a - x * b).powi(2) * w).sum();
        conj = conj.max(c.sqrt());
    }
    let line = Line {
        name: "spectral calibration",
        pass: res < EIGEN_RESIDUAL && conj < CONJUGATION && took < BUILD_LIMIT,
        detail: format!(
            "{} modes, max residual {res:.2e}, max conjugation {conj:.2e}, build {:.1} s",
            table.n_modes(),
            took.as_secs_f64()
        ),
    };
    (table, line)
}

fn plancherel(table: &EigenTable) -> Line {
    let grid = table.field_grid();
    let fields = bank(grid);
    let t0 = Instant::now();
    let (mut p, mut rt) = (0.0f64, 0.0f64);
    for f in &fields {
        let c = ft_forward(table, f, Frame::Ht).unwrap();
        let n = f.norm_l2(grid);
        p = p.max((c.mass(table).sqrt() / n - 1.0).abs());
        let back = ft_inverse(table, &c, Parity::Even).unwrap();
        rt = rt.max(back.sub(f).norm_l2(grid) / n);
    }
    let took = t0.elapsed();
    Line {
        name: "plancherel and inversion",
        pass: p < PLANCHEREL && rt < ROUND_TRIP && took < TRANSFORM_LIMIT,
        detail: format!("10 fields: norm error {p:.2e}, round trip {rt:.2e}, {:.2} s", took.as_secs_f64()),
    }
}

fn solitons(table: &EigenTable) -> Line {
    let grid = table.field_grid();
    let mut e_err = 0.0f64;
    let mut psi_max = 0.0f64;
    for m in [1u32, 2] {
        for (a, l) in [(0.0, 1.0), (0.3, 1.2)] {
            let q = soliton_profile(&SolitonParams::new(m, a, l).unwrap(), grid);
            let e = energy(&q, grid).unwrap();
            e_err = e_err.max((e / (4.0 * PI * m as f64) - 1.0).abs());
            if m == 1 {
                psi_max = psi_max.max(reduced_field(grid, &q).unwrap().max_abs());
            }
        }
    }
    Line {
        name: "soliton identities",
        pass: e_err < ENERGY && psi_max < SOLITON_PSI,
        detail: format!("energy error {e_err:.2e}, sup |psi| {psi_max:.2e}"),
    }
}

fn elliptic(table: &EigenTable) -> Line {
    let grid = table.field_grid();
    let (mut map_err, mut sphere) = (0.0f64, 0.0f64);
    for (gamma, seed) in [(0.01, 1), (0.03, 2), (0.05, 3)] {
        let (u, _) = random_perturbation(table, gamma, seed, 3).unwrap();
        let fields = derive_fields(&u, &coulomb_frame(&u, grid).unwrap(), grid).unwrap();
        sphere = sphere.max(fields.sphere_defect());
        let (psi2, a2) = reconstruct_fields(grid, &fields.psi, &ReconstructOptions::default()).unwrap();
        let rebuilt = GaugeFields::from_reduced(grid, fields.psi.clone(), psi2, a2).unwrap();
        sphere = sphere.max(rebuilt.sphere_defect());
        let (v, _) = reconstruct_map(grid, &rebuilt).unwrap();
        map_err = map_err.max(v.max_distance(&u));
    }
    Line {
        name: "elliptic round trip",
        pass: map_err < MAP_ROUND_TRIP && sphere < SPHERE,
        detail: format!("gamma <= 0.05: map error {map_err:.2e}, sphere defect {sphere:.2e}"),
    }
}

fn evolve(table: &EigenTable, psi0: &ComplexField, config: EvolutionConfig) -> ComplexField {
    let mut s = Stepper::new(table, config, psi0.clone()).unwrap();
    for _ in 0..config.steps() {
        s.step().unwrap();
    }
    s.state().psi.clone()
}

fn conservation(table: &EigenTable) -> Line {
    let grid = table.field_grid();
    let bump = unit_bump(grid);

    let psi0 = bump.map(Parity::Odd, |z| z * 0.05);
    let m0 = psi0.norm_l2(grid).powi(2);
    let psi = evolve(table, &psi0, EvolutionConfig { dt: 1e-3, t_end: 1.0, ..Default::default() });
    let drift = (psi.norm_l2(grid).powi(2) / m0 - 1.0).abs();

    // smooth data, periodic refresh only
    let smooth = bump.map(Parity::Odd, |z| z * 0.01);
    let at = |dt: f64| {
        evolve(
            table,
            &smooth,
            EvolutionConfig { dt, t_end: 0.2, refresh_tolerance: 1e9, ..Default::default() },
        )
    };
    let runs: Vec<ComplexField> = [2e-3, 1e-3, 5e-4, 2.5e-4].into_iter().map(at).collect();
    let d: Vec<f64> = runs.windows(2).map(|w| w[0].sub(&w[1]).norm_l2(grid)).collect();
    let orders: Vec<f64> = d.windows(2).map(|w| (w[0] / w[1]).log2()).collect();

    let zero = ComplexField::zeros(grid.len(), Parity::Odd);
    let traj = run(
        table,
        &EvolutionConfig { dt: STABILITY_DT, t_end: 10.0, monitor_every: 0.5, ..Default::default() },
        zero,
    )
    .unwrap();
    let flat = traj
        .samples
        .iter()
        .map(|s| (s.lambda - 1.0).abs().max(s.alpha.abs()).max(s.mass.sqrt()))
        .fold(0.0, f64::max);

    let pass = drift < MASS_DRIFT
        && orders.iter().all(|o| (o - ORDER.0).abs() <= ORDER.1)
        && flat < FIXED_POINT
        && traj.is_complete();
    Line {
        name: "conservation and convergence",
        pass,
        detail: format!(
            "mass drift {drift:.2e} over t = 1 at dt = 1e-3, orders {:.3}/{:.3}, soliton deviation {flat:.1e} on [0, 10]",
            orders[0], orders[1]
        ),
    }
}

fn stability(table: &EigenTable) -> Line {
    let spec = ExperimentSpec::for_kind(ExperimentKind::Stability);
    let t0 = Instant::now();
    let (_, summary) = run_stability(&spec, table).unwrap();
    let took = t0.elapsed();
    let r = summary.stability.as_ref().unwrap();
    let g = spec.gamma;
    Line {
        name: "stability property",
        pass: summary.completed
            && r.sup_lx <= STABILITY_C * g
            && r.sup_lambda_deviation <= STABILITY_C * g
            && took < STABILITY_LIMIT,
        detail: format!(
            "gamma {g}, t = {}: sup LX {:.2e} (limit {:.2e}), sup |lambda - 1| {:.2e}, {:.0} s",
            spec.evolution.t_end,
            r.sup_lx,
            STABILITY_C * g,
            r.sup_lambda_deviation,
            took.as_secs_f64()
        ),
    }
}

fn instability(table: &EigenTable) -> Line {
    let spec = ExperimentSpec::for_kind(ExperimentKind::Instability);
    let t0 = Instant::now();
    let (_, summary) = run_instability(&spec, table).unwrap();
    let took = t0.elapsed();
    let r = summary.instability.as_ref().unwrap();
    let fit = r.fit.map(|f| format!("d = {:.4} + {:.4}/ln t", f.a, f.b)).unwrap_or_else(|| "no fit".into());
    Line {
        name: "instability property",
        pass: summary.completed
            && r.initial_proximity_ratio <= PROXIMITY_C
            && r.psi0_l2_ratio <= L2_C
            && r.lambda_ratio < LAMBDA_RATIO
            && r.d_max_increase <= 0.0
            && r.fit.is_some()
            && took < INSTABILITY_LIMIT,
        detail: format!(
            "proximity {:.2} eps gamma, L2 {:.2} gamma eps, |lambda(t_end) - 1| / |lambda0 - 1| = {:.3} (needs < {LAMBDA_RATIO}), \
             d {:.4} -> {:.4} with largest rise {:.1e}, {fit}, {:.0} s",
            r.initial_proximity_ratio,
            r.psi0_l2_ratio,
            r.lambda_ratio,
            r.d_start,
            r.d_final,
            r.d_max_increase,
            took.as_secs_f64()
        ),
    }
}

fn transference(table: &EigenTable) -> Line {
    let probes = [1e-3, 3e-3, 0.02, 0.3, 1.0, 4.0, 30.0];
    let mut asym = 0.0f64;
    for &a in &probes {
        for &b in &probes {
            let scale = (transference_f(table, a, a) * transference_f(table, b, b)).abs().sqrt();
            asym = asym.max((transference_f(table, a, b) - transference_f(table, b, a)).abs() / scale);
        }
    }
    let vals: Vec<f64> = (0..=10)
        .map(|i| {
            let xi = table.xi()[table.nearest_mode(1e-3 * 10f64.powf(i as f64 / 10.0))];
            transference_f(table, xi, 1.0) * (1.0 + xi.ln().abs()) / xi.sqrt()
        })
        .collect();
    let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
    let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
    let f11 = transference_f(table, 1.0, 1.0);
    Line {
        name: "transference diagnostic",
        pass: asym < SYMMETRY && lo > 0.0 && hi / lo < ENVELOPE && f11 > 0.0,
        detail: format!("asymmetry {asym:.1e}, envelope spread {:.3} on [1e-3, 1e-2], F(1,1) = {f11:.4}", hi / lo),
    }
}

fn main() {
    let mut lines = Vec::new();
    let (table, line) = calibration();
    report(&line);
    lines.push(line);
    let checks: [fn(&EigenTable) -> Line; 7] =
        [plancherel, solitons, elliptic, conservation, stability, instability, transference];
    for f in checks {
        let line = f(&table);
        report(&line);
        lines.push(line);
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn report(line: &Line) {
    println!("{} {}: {}", if line.pass { "PASS" } else { "FAIL" }, line.name, line.detail);
}
