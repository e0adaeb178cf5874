//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use plate_harnack::calibration::{
    build_suite, calibrate_on, deepest_node, poincare_refinement, verify_degiorgi, verify_on, SuiteConfig, Target,
};
use plate_harnack::exponents::{default_exponents, sweep_exponents};
use plate_harnack::harnack::harnack_check;
use plate_harnack::io::{write_checks_csv, write_field, write_json, write_scan_csv};
use plate_harnack::levelset::check_degiorgi_sup;
use plate_harnack::linalg::DEFAULT_TOL;
use plate_harnack::positivity::{
    decompose_source, default_exhaustion, doubling_grid, dilation_check, gamma0_both, scan_gamma,
    superposition_check, Gamma0Variant, DEFAULT_TOL_POS,
};
use plate_harnack::source::SourceSpec;
use plate_harnack::{build_domain, PlateOperator, ScalarField, Shape};

use common::{disk_run, square_run, square_source};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Energy-identity residuals of every solve made along the way.
#[derive(Default)]
struct EnergyLog(Vec<(String, f64)>);

fn manufactured(log: &mut EnergyLog) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut slowest: f64 = 0.0;
    for gamma in [0.0, 4.0] {
        let (d32, d64) = (disk_run(1.0 / 32.0, gamma), disk_run(1.0 / 64.0, gamma));
        let (s32, s64) = (square_run(1.0 / 32.0, gamma), square_run(1.0 / 64.0, gamma));
        for (name, r) in [("disk32", &d32), ("disk64", &d64), ("square32", &s32), ("square64", &s64)] {
            log.0.push((format!("{name} γ={gamma}"), r.energy_residual));
            slowest = slowest.max(r.seconds);
            pass &= r.converged;
        }
        let bracket = 2.0 * d32.error / 4.0;
        let ratio = s32.error / s64.error;
        pass &= d64.error <= bracket && (3.2..=4.8).contains(&ratio);
        parts.push(format!(
            "γ={gamma}: disk e64 {:.3e} ≤ {:.3e}, square ratio {:.3}",
            d64.error, bracket, ratio
        ));
    }
    pass &= slowest < 60.0;
    parts.push(format!("slowest solve {slowest:.2}s"));
    outcome(pass, parts.join("; "))
}

fn boggio(log: &mut EnergyLog) -> Outcome {
    let m = Arc::new(build_domain(&Shape::unit_disk(), 1.0 / 64.0).unwrap());
    let f = ScalarField::from_fn(m.clone(), |_| 1.0).unwrap();
    let op = PlateOperator::assemble(m).unwrap();
    let (u, st) = op.solve(0.0, &f, DEFAULT_TOL).unwrap();
    log.0.push(("boggio".into(), op.energy_report(0.0, &u, &f).unwrap().identity_residual));
    let (lo, hi) = (u.min(), u.max());
    outcome(
        st.at_precision_limit() && lo >= -1e-8 * hi,
        format!("min u {lo:.3e}, max u {hi:.3e}"),
    )
}

fn exponent_identities() -> Outcome {
    let t0 = Instant::now();
    let reps = [sweep_exponents(2, 20), sweep_exponents(3, 20)];
    let secs = t0.elapsed().as_secs_f64();
    let mut pass = secs < 5.0;
    let mut parts = Vec::new();
    for r in &reps {
        pass &= r.points == 8000
            && r.rejected == 0
            && r.theta_violations == 0
            && r.a_bold_violations == 0
            && r.max_s_star_residual <= 1e-12
            && r.max_quadratic_residual <= 1e-12;
        parts.push(format!(
            "N={}: {} points, s* res {:.1e}, θ res {:.1e}, min θ {:.4}, max a {:.4}, violations {}+{}",
            r.n,
            r.points,
            r.max_s_star_residual,
            r.max_quadratic_residual,
            r.min_theta,
            r.max_a_bold,
            r.theta_violations,
            r.a_bold_violations
        ));
    }
    parts.push(format!("{secs:.2}s"));
    outcome(pass, parts.join("; "))
}

fn energy_identity(log: &mut EnergyLog) -> Outcome {
    for (name, shape) in [
        ("l_shape", Shape::LShape { size: 1.0 }),
        (
            "annulus",
            Shape::Annulus {
                center: None,
                inner: 0.4,
                outer: 1.0,
            },
        ),
    ] {
        let m = Arc::new(build_domain(&shape, 1.0 / 32.0).unwrap());
        let f = ScalarField::from_fn(m.clone(), |x| 1.0 + x[0] * x[0]).unwrap();
        let op = PlateOperator::assemble(m).unwrap();
        for gamma in [0.0, 10.0] {
            let (u, _) = op.solve(gamma, &f, DEFAULT_TOL).unwrap();
            log.0.push((format!("{name} γ={gamma}"), op.energy_report(gamma, &u, &f).unwrap().identity_residual));
        }
    }
    let (worst, val) = log
        .0
        .iter()
        .fold(("", 0.0), |a, (n, v)| if *v > a.1 { (n.as_str(), *v) } else { a });
    outcome(
        val <= 1e-6,
        format!("{} solves, worst {val:.2e} ({worst})", log.0.len()),
    )
}

fn degiorgi(train: &plate_harnack::calibration::Suite, held: &plate_harnack::calibration::Suite) -> Outcome {
    let e = default_exponents(2).unwrap();
    let thm = calibrate_on(train, 1.5, Target::DegiorgiSup, &e).unwrap();
    let lemma = calibrate_on(train, 1.5, Target::IteratedEstimate, &e).unwrap();
    let v = verify_degiorgi(held, thm.c, lemma.c, &e).unwrap();
    outcome(
        v.sup_violations == 0 && v.psi_violations == 0 && v.iteration_sup_violations == 0,
        format!(
            "c_thm {:.4} c_lemma {:.4}; {} held-out probes on {} fields: sup violations {}, Ψ violations {}, iterated sup violations {}",
            thm.c,
            lemma.c,
            v.evaluations,
            held.fields.len(),
            v.sup_violations,
            v.psi_violations,
            v.iteration_sup_violations
        ),
    )
}

fn harnack(train: &plate_harnack::calibration::Suite, held: &plate_harnack::calibration::Suite) -> (Outcome, f64) {
    let e = default_exponents(2).unwrap();
    let cal = calibrate_on(train, 1.5, Target::Harnack, &e).unwrap();
    let v = verify_on(held, &cal, &e).unwrap();
    // Shift invariance on dyadic copies of the held-out fields, where
    // adding a constant is exact in floating point.
    let q = 2f64.powi(-40);
    let mut shift_mismatches = 0;
    for p in &held.probes {
        let u = held.fields[p.field].map(|x| (x / q).round() * q).unwrap();
        let a = harnack_check(&u, &p.center, p.r, &e, cal.c).unwrap();
        let b = harnack_check(&u.map(|x| x + 3.0).unwrap(), &p.center, p.r, &e, cal.c).unwrap();
        shift_mismatches += usize::from(a.implied_constant.to_bits() != b.implied_constant.to_bits());
    }
    (
        outcome(
            v.violations == 0 && shift_mismatches == 0,
            format!(
                "c {:.4} (train max {:.4}); held-out max {:.4}, violations {}/{}; shift mismatches {}",
                cal.c, cal.train_max, v.max_implied, v.violations, v.evaluations, shift_mismatches
            ),
        ),
        cal.c,
    )
}

fn poincare() -> Outcome {
    let shape = Shape::unit_disk();
    let h = 1.0 / 32.0;
    let m = build_domain(&shape, h).unwrap();
    let (center, _) = deepest_node(&m);
    let s = poincare_refinement(&shape, h, &center, 0.3, &[2.0, 4.0], 20, 7).unwrap();
    outcome(
        s.all_finite && s.max_variation < 0.2 && s.rows.len() == 40,
        format!("{} evaluations, all finite {}, max variation {:.2}%", s.rows.len(), s.all_finite, 100.0 * s.max_variation),
    )
}

fn superposition() -> Outcome {
    let m = Arc::new(build_domain(&Shape::unit_disk(), 1.0 / 32.0).unwrap());
    let f = ScalarField::from_fn(m.clone(), |x| 1.0 + 0.5 * x[0]).unwrap();
    let ex = default_exhaustion(&m, 3, 0.4).unwrap();
    let d = decompose_source(&f, &ex).unwrap();
    let op = PlateOperator::assemble(m).unwrap();
    let r = superposition_check(&op, 1.0, &f, &d, DEFAULT_TOL).unwrap();
    let (part, sum) = (d.partition_residual(), d.sum_residual(&f));
    let monotone = r.partial_gaps.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        part <= 1e-12 && sum <= 1e-12 && r.relative_gap <= 1e-8 && r.converged,
        format!(
            "sets {:?}; Σg−f {sum:.1e}, partition {part:.1e}; solve gap {:.2e}; partial gaps {:?} (monotone {monotone})",
            (0..ex.len()).map(|i| ex.size(i)).collect::<Vec<_>>(),
            r.relative_gap,
            r.partial_gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>()
        ),
    )
}

fn gamma_scan(c: f64) -> Outcome {
    let strip = Shape::Rectangle {
        min: vec![0.0, 0.0],
        max: vec![4.0, 1.0],
    };
    let m = Arc::new(build_domain(&strip, 1.0 / 32.0).unwrap());
    let f = SourceSpec::two_bumps_on_strip().to_field(m.clone()).unwrap();
    let e = default_exponents(2).unwrap();
    let g0 = gamma0_both(f.integral(), m.diameter(), &e, c).unwrap();
    let two = g0[0].value;
    let op = PlateOperator::assemble(m).unwrap();
    let r = scan_gamma(&op, &f, &doubling_grid(2.0 * two), DEFAULT_TOL_POS, &e, c, DEFAULT_TOL).unwrap();
    let last = r.points.last().unwrap();
    let first = &r.points[0];
    let both = r.gamma0_value(Gamma0Variant::TwoEta).is_some() && r.gamma0_value(Gamma0Variant::FourEta).is_some();
    outcome(
        r.complete && r.energy_strictly_decreasing() && last.is_positive(DEFAULT_TOL_POS) && both,
        format!(
            "γ₀ two_eta {:.4e}, four_eta {:.4e} (c {c:.4}); {} grid points; energy strictly decreasing {}; \
             min/max at 2γ₀ {:.2e}; at γ=0 {:.2e}; first positive γ {:?}",
            two,
            g0[1].value,
            r.points.len(),
            r.energy_strictly_decreasing(),
            last.min_u / last.max_u,
            first.min_u / first.max_u,
            r.gamma_star_empirical
        ),
    )
}

fn scaling() -> Outcome {
    let h = 1.0 / 32.0;
    let gamma = 4.0;
    let base = square_run(h, gamma);
    let base_rel = base.error / base.scale;
    let r = dilation_check(&Shape::unit_square(), h, 2.0, gamma, |x| square_source(x, gamma), DEFAULT_TOL).unwrap();
    outcome(
        r.relative_gap <= 5.0 * base_rel,
        format!("dilated gap {:.2e} vs base error {:.2e}", r.relative_gap, base_rel),
    )
}

/// Writes a representative set of artifacts into `dir`.
fn artifacts(dir: &Path) {
    let e = default_exponents(2).unwrap();
    let cfg = SuiteConfig {
        h: 1.0 / 32.0,
        n_fields: 4,
        probes_per_field: 4,
        ..Default::default()
    };
    let suite = build_suite(&cfg, 99).unwrap();
    let cal = calibrate_on(&suite, 1.5, Target::DegiorgiSup, &e).unwrap();
    let reports: Vec<_> = suite
        .probes
        .iter()
        .map(|p| check_degiorgi_sup(&suite.fields[p.field], &p.center, p.k, p.r, &e).unwrap())
        .collect();
    write_checks_csv(&dir.join("checks.csv"), &reports, cal.c).unwrap();
    write_json(&dir.join("calibration.json"), &cal).unwrap();

    let m = Arc::new(build_domain(&Shape::unit_disk(), 1.0 / 32.0).unwrap());
    let f = ScalarField::from_fn(m.clone(), |_| 1.0).unwrap();
    let op = PlateOperator::assemble(m).unwrap();
    let scan = scan_gamma(&op, &f, &[0.0, 1.0, 10.0], DEFAULT_TOL_POS, &e, 1.0, DEFAULT_TOL).unwrap();
    write_scan_csv(&dir.join("scan.csv"), &scan).unwrap();
    write_json(&dir.join("scan.json"), &scan).unwrap();
    let (u, _) = op.solve(1.0, &f, DEFAULT_TOL).unwrap();
    write_field(dir, "u", &u, serde_json::Value::Null).unwrap();
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    artifacts(a.path());
    artifacts(b.path());
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let differing: Vec<_> = names
        .iter()
        .filter(|n| fs::read(a.path().join(n)).ok() != fs::read(b.path().join(n)).ok())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    outcome(
        differing.is_empty() && names.len() >= 6,
        format!("{} files compared, differing {:?}", names.len(), differing),
    )
}

fn main() {
    let t0 = Instant::now();
    let mut log = EnergyLog::default();
    let cfg = SuiteConfig::default();
    let train = build_suite(&cfg, cfg.seed).unwrap();
    let held = build_suite(&cfg, cfg.seed + 1).unwrap();

    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("manufactured solution", manufactured(&mut log)));
    results.push(("disk positivity at γ = 0", boggio(&mut log)));
    results.push(("exponent identities", exponent_identities()));
    results.push(("energy identity", energy_identity(&mut log)));
    results.push(("calibrated De Giorgi soundness", degiorgi(&train, &held)));
    let (h, c_harnack) = harnack(&train, &held);
    results.push(("calibrated Harnack soundness", h));
    results.push(("half-ball Poincaré stability", poincare()));
    results.push(("superposition and decomposition", superposition()));
    results.push(("γ-scan", gamma_scan(c_harnack)));
    results.push(("scaling consistency", scaling()));
    results.push(("determinism", determinism()));

    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "criterion {:>2} {:<32} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {} failed in {:.1}s",
        results.len() - failed,
        failed,
        t0.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
