//! One function per command. Each writes its artifacts into the output
//! directory and returns a JSON summary plus the number of checker
//! violations it saw.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Value};

use plate_harnack::calibration::{
    build_suite, calibrate_on, deepest_node, poincare_refinement, verify_degiorgi, verify_on, Target,
};
use plate_harnack::exponents::{
    default_t, derive_exponents, sweep_exponents, validate_exponents, ExponentSet, DEFAULT_P, DEFAULT_Q,
};
use plate_harnack::geometry::build_domain;
use plate_harnack::harnack::harnack_check;
use plate_harnack::io::{svg_heatmap, write_checks_csv, write_field, write_json, write_scan_csv};
use plate_harnack::levelset::check_degiorgi_sup;
use plate_harnack::positivity::{
    decompose_source, default_exhaustion, doubling_grid, gamma0_both, interpolation_scan, scan_gamma,
    Gamma0Variant,
};
use plate_harnack::source::SourceSpec;
use plate_harnack::{DomainMask, PlateOperator, ScalarField};

use crate::config::{Command, ExperimentConfig};

pub type RunResult = Result<Outcome, plate_harnack::Error>;

pub struct Outcome {
    pub summary: Value,
    pub violations: usize,
}

/// Runs `cfg.command` into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> RunResult {
    fs::create_dir_all(out)?;
    let outcome = match cfg.command {
        Command::Exponents => exponents(cfg, out),
        Command::Solve => solve(cfg, out),
        Command::Scan => scan(cfg, out),
        Command::Degiorgi => degiorgi(cfg, out),
        Command::Harnack => harnack(cfg, out),
        Command::Poincare => poincare(cfg, out),
        Command::Decompose => decompose(cfg, out),
        Command::Report => report(cfg, out),
    }?;
    let mut summary = json!({ "command": cfg.command.name(), "seed": cfg.seed, "violations": outcome.violations });
    merge(&mut summary, outcome.summary);
    write_json(&out.join("summary.json"), &summary)?;
    Ok(Outcome {
        summary,
        violations: outcome.violations,
    })
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn exponent_set(cfg: &ExperimentConfig) -> plate_harnack::Result<ExponentSet> {
    let n = cfg.dim();
    derive_exponents(
        n,
        cfg.t.unwrap_or_else(|| default_t(n)),
        cfg.p.unwrap_or(DEFAULT_P),
        cfg.q.unwrap_or(DEFAULT_Q),
    )
}

fn mask(cfg: &ExperimentConfig) -> plate_harnack::Result<Arc<DomainMask>> {
    let d = cfg.domain.as_ref().expect("validated config has a domain");
    Ok(Arc::new(build_domain(&d.shape, d.h)?))
}

fn source(cfg: &ExperimentConfig, m: &Arc<DomainMask>) -> plate_harnack::Result<ScalarField> {
    cfg.source
        .clone()
        .unwrap_or(SourceSpec::Constant { value: 1.0 })
        .to_field(m.clone())
}

fn write_svg(cfg: &ExperimentConfig, out: &Path, name: &str, u: &ScalarField) -> plate_harnack::Result<()> {
    if cfg.svg && u.mask().dim() == 2 {
        fs::write(out.join(format!("{name}.svg")), svg_heatmap(u, name))?;
    }
    Ok(())
}

fn exponents(cfg: &ExperimentConfig, out: &Path) -> RunResult {
    let e = exponent_set(cfg)?;
    let check = validate_exponents(&e);
    let sweep = sweep_exponents(e.n, 20);
    let summary = json!({ "exponents": e, "check": check, "sweep": sweep });
    write_json(&out.join("exponents.json"), &summary)?;
    let violations = usize::from(!check.is_valid(1e-12)) + sweep.theta_violations + sweep.a_bold_violations;
    Ok(Outcome { summary, violations })
}

fn solve(cfg: &ExperimentConfig, out: &Path) -> RunResult {
    let m = mask(cfg)?;
    let f = source(cfg, &m)?;
    let op = PlateOperator::assemble(m.clone())?;
    let (u, stats) = op.solve(cfg.gamma, &f, cfg.tolerances.solver)?;
    let energy = op.energy_report(cfg.gamma, &u, &f)?;
    let positive = u.min() >= -cfg.tolerances.positivity * u.max();
    write_field(out, "u", &u, json!({ "gamma": cfg.gamma }))?;
    write_field(out, "f", &f, Value::Null)?;
    write_svg(cfg, out, "u", &u)?;
    let violations = usize::from(energy.identity_residual > 1e-6);
    Ok(Outcome {
        summary: json!({
            "gamma": cfg.gamma,
            "stats": stats,
            "energy": energy,
            "min_u": u.min(),
            "max_u": u.max(),
            "positive": positive,
        }),
        violations,
    })
}

/// The Harnack constant from the config, or calibrated on the seeded suite.
fn harnack_constant(cfg: &ExperimentConfig, e: &ExponentSet) -> plate_harnack::Result<(f64, Value)> {
    if let Some(c) = cfg.harnack_c {
        return Ok((c, json!({ "source": "config", "c": c })));
    }
    let sc = cfg.suite_config(cfg.seed).expect("domain present");
    let suite = build_suite(&sc, cfg.seed)?;
    let cal = calibrate_on(&suite, sc.safety, Target::Harnack, e)?;
    Ok((cal.c, json!({ "source": "calibrated", "calibration": cal })))
}

fn scan(cfg: &ExperimentConfig, out: &Path) -> RunResult {
    let m = mask(cfg)?;
    let f = source(cfg, &m)?;
    let e = exponent_set(cfg)?;
    let (c, provenance) = harnack_constant(cfg, &e)?;
    let g0 = gamma0_both(f.integral(), m.diameter(), &e, c)?;
    let two_eta = g0.iter().find(|g| g.variant == Gamma0Variant::TwoEta).expect("both variants").value;
    let grid = cfg.gammas.clone().unwrap_or_else(|| doubling_grid(2.0 * two_eta));
    let op = PlateOperator::assemble(m.clone())?;
    let res = scan_gamma(&op, &f, &grid, cfg.tolerances.positivity, &e, c, cfg.tolerances.solver)?;
    write_scan_csv(&out.join("scan.csv"), &res)?;
    let interpolation = if cfg.n_tau >= 2 {
        Some(interpolation_scan(&op, &f, two_eta, cfg.n_tau, cfg.tolerances.positivity, cfg.tolerances.solver)?)
    } else {
        None
    };
    let violations =
        res.points.iter().filter(|p| !p.energy_sign_ok).count() + usize::from(!res.energy_strictly_decreasing());
    let summary = json!({
        "scan": res,
        "energy_strictly_decreasing": res.energy_strictly_decreasing(),
        "exponents": e,
        "harnack_constant": provenance,
        "interpolation": interpolation,
    });
    write_json(&out.join("scan.json"), &summary)?;
    Ok(Outcome { summary, violations })
}

fn degiorgi(cfg: &ExperimentConfig, out: &Path) -> RunResult {
    let e = exponent_set(cfg)?;
    let sc = cfg.suite_config(cfg.seed).expect("domain present");
    let train = build_suite(&sc, cfg.seed)?;
    let held = build_suite(&sc, cfg.seed + 1)?;
    let c_thm = calibrate_on(&train, sc.safety, Target::DegiorgiSup, &e)?;
    let c_lemma = calibrate_on(&train, sc.safety, Target::IteratedEstimate, &e)?;
    let ver = verify_degiorgi(&held, c_thm.c, c_lemma.c, &e)?;
    let reports = held
        .probes
        .iter()
        .map(|p| check_degiorgi_sup(&held.fields[p.field], &p.center, p.k, p.r, &e))
        .collect::<plate_harnack::Result<Vec<_>>>()?;
    write_checks_csv(&out.join("degiorgi_checks.csv"), &reports, c_thm.c)?;
    let violations = ver.sup_violations + ver.psi_violations + ver.iteration_sup_violations;
    Ok(Outcome {
        summary: json!({
            "exponents": e,
            "calibration": { "theorem": c_thm, "lemma": c_lemma },
            "held_out": ver,
            "held_out_seed": held.seed,
        }),
        violations,
    })
}

fn harnack(cfg: &ExperimentConfig, out: &Path) -> RunResult {
    let e = exponent_set(cfg)?;
    let sc = cfg.suite_config(cfg.seed).expect("domain present");
    let train = build_suite(&sc, cfg.seed)?;
    let held = build_suite(&sc, cfg.seed + 1)?;
    let cal = calibrate_on(&train, sc.safety, Target::Harnack, &e)?;
    let ver = verify_on(&held, &cal, &e)?;
    let h = held.mask.h();
    let reports = held
        .probes
        .iter()
        .map(|p| Ok(harnack_check(&held.fields[p.field], &p.center, p.r, &e, cal.c)?.to_check(h)))
        .collect::<plate_harnack::Result<Vec<_>>>()?;
    write_checks_csv(&out.join("harnack_checks.csv"), &reports, cal.c)?;
    Ok(Outcome {
        summary: json!({ "exponents": e, "calibration": cal, "held_out": ver }),
        violations: ver.violations,
    })
}

fn poincare(cfg: &ExperimentConfig, out: &Path) -> RunResult {
    let d = cfg.domain.as_ref().expect("domain present");
    let m = build_domain(&d.shape, d.h)?;
    let (center, depth) = deepest_node(&m);
    let r = cfg.poincare.radius.min(0.9 * depth);
    let study = poincare_refinement(
        &d.shape,
        d.h,
        &center,
        r,
        &cfg.poincare.p_norms,
        cfg.poincare.n_fields,
        cfg.seed,
    )?;
    write_checks_csv(&out.join("poincare_checks.csv"), &study.coarse_reports, f64::INFINITY)?;
    let violations = study
        .rows
        .iter()
        .filter(|r| !(r.coarse.is_finite() && r.fine.is_finite() && r.variation < 0.2))
        .count();
    Ok(Outcome {
        summary: json!({
            "center": study.center,
            "r": study.r,
            "h": study.h,
            "max_variation": study.max_variation,
            "all_finite": study.all_finite,
            "rows": study.rows,
        }),
        violations,
    })
}

fn decompose(cfg: &ExperimentConfig, out: &Path) -> RunResult {
    let m = mask(cfg)?;
    let f = source(cfg, &m)?;
    let ex = default_exhaustion(&m, cfg.exhaustion.levels, cfg.exhaustion.delta0)?;
    let dec = decompose_source(&f, &ex)?;
    let op = PlateOperator::assemble(m.clone())?;
    let sup = plate_harnack::positivity::superposition_check(&op, cfg.gamma, &f, &dec, cfg.tolerances.solver)?;
    write_field(out, "weights", &dec.weights, json!({ "deltas": ex.deltas }))?;
    for (i, g) in dec.parts.iter().enumerate() {
        write_field(out, &format!("part_{}", i + 1), g, json!({ "level": i + 1 }))?;
    }
    let (partition, sum) = (dec.partition_residual(), dec.sum_residual(&f));
    let violations = usize::from(partition > 1e-12) + usize::from(sum > 1e-12) + usize::from(sup.relative_gap > 1e-8);
    Ok(Outcome {
        summary: json!({
            "deltas": ex.deltas,
            "sizes": (0..ex.len()).map(|i| ex.size(i)).collect::<Vec<_>>(),
            "partition_residual": partition,
            "sum_residual": sum,
            "superposition": sup,
        }),
        violations,
    })
}

/// Every other command, each in its own subdirectory.
fn report(cfg: &ExperimentConfig, out: &Path) -> RunResult {
    let mut parts = serde_json::Map::new();
    let mut violations = 0;
    for cmd in [
        Command::Exponents,
        Command::Solve,
        Command::Scan,
        Command::Degiorgi,
        Command::Harnack,
        Command::Poincare,
        Command::Decompose,
    ] {
        let sub = ExperimentConfig {
            command: cmd,
            ..cfg.clone()
        };
        let o = run(&sub, &out.join(cmd.name()))?;
        violations += o.violations;
        parts.insert(cmd.name().into(), json!({ "violations": o.violations }));
    }
    Ok(Outcome {
        summary: json!({ "parts": parts }),
        violations,
    })
}
