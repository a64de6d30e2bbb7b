//! The pipelines behind each subcommand. Every pipeline computes a JSON
//! summary (reused by `report`) and optionally writes its own files.

use std::path::Path;
use std::sync::Arc;

use ermakov_core::integrate::{integrate_cart, resample_by_theta};
use ermakov_core::reduce::{
    check_angular_law, check_reduction_preconditions, condition_audit, reduced_residual, AngularLaw, Condition,
    ReducedForm, ReducedResidual,
};
use ermakov_core::shapefn::{ShapeExpr, Variable};
use ermakov_core::symexpr::{self, parse_ansatz, parse_generator, solve_coefficients, Coefficient, SolutionSet};
use ermakov_core::symflow::{
    self, dt_dtheta_crosscheck, induced_original_variables, time_translation_is_symmetry, verify_solution_mapping,
    PullbackReport, ReferenceSolution,
};
use ermakov_core::{AngularLaw64, ReducedTrajectory64, SystemSpec64, Trajectory64};
use serde_json::{json, Value};

use crate::error::{exit, CliError};
use crate::output::{fmt_f64, write_csv, write_json};
use crate::scenario::{ConditionSpec, Scenario};

pub const TRAJECTORY_HEADER: &str = "t,x,y,vx,vy,L,I";
pub const REDUCED_HEADER: &str = "theta,t,r,u,u_theta,u_thetatheta,L,L_sq,law_residual,\
res_derived_full,res_paper_2_4,res_paper_2_6_or_2_9,res_paper_2_13";
pub const AUDIT_HEADER: &str = "condition,theta,l_sq,dl_sq,integrand,defect";

fn row(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| fmt_f64(*v)).collect()
}

fn error_value(e: &CliError) -> Value {
    json!({ "error": e })
}

fn singularity_error(t: f64, x: f64, y: f64) -> CliError {
    CliError {
        code: exit::NUMERICAL,
        category: "numerical",
        kind: "singularity".into(),
        message: format!("trajectory reached a coordinate axis at t = {t} (x = {x}, y = {y})"),
    }
}

fn simulate_trajectory(sc: &Scenario, spec: &Arc<SystemSpec64>) -> Result<Trajectory64, CliError> {
    let (ic, t_end) = sc.initial_state()?;
    Ok(integrate_cart(spec.clone(), ic, t_end, sc.rtol, sc.atol)?)
}

fn singularity_of(traj: &Trajectory64) -> Option<CliError> {
    traj.singularity().map(|ev| singularity_error(ev.t, ev.x, ev.y))
}

// ---------------------------------------------------------------- simulate

struct Simulation {
    rows: Vec<[f64; 7]>,
    summary: Value,
    singular: Option<CliError>,
}

fn simulation(sc: &Scenario) -> Result<Simulation, CliError> {
    let spec = sc.spec()?;
    let traj = simulate_trajectory(sc, &spec)?;
    let stride = sc.report.trajectory_stride;
    let n = traj.len();
    let mut rows = Vec::with_capacity(n / stride + 1);
    let mut i0 = f64::NAN;
    let (mut max_abs, mut i_last) = (0.0f64, f64::NAN);
    for (i, st) in traj.nodes().enumerate() {
        // Near an axis the invariant itself is undefined; the singularity
        // is reported instead.
        let inv = match spec.ermakov_invariant(&st) {
            Ok(v) => v,
            Err(_) if traj.singularity().is_some() => f64::NAN,
            Err(e) => return Err(e.into()),
        };
        if i == 0 {
            i0 = inv;
        }
        max_abs = max_abs.max((inv - i0).abs());
        i_last = inv;
        if i % stride == 0 || i + 1 == n {
            rows.push([st.t, st.x, st.y, st.vx, st.vy, st.angular_momentum(), inv]);
        }
    }
    let stats = traj.stats();
    let singularity = traj.singularity().map(|ev| json!({ "t": ev.t, "x": ev.x, "y": ev.y }));
    let summary = json!({
        "class": spec.class().name(),
        "t_start": traj.t_start(),
        "t_end": traj.t_end(),
        "nodes": n,
        "steps_accepted": stats.accepted,
        "steps_rejected": stats.rejected,
        "invariant_initial": i0,
        "invariant_final": i_last,
        "invariant_max_abs_drift": max_abs,
        "invariant_max_rel_drift": max_abs / i0.abs(),
        "singularity": singularity,
    });
    Ok(Simulation { rows, summary, singular: singularity_of(&traj) })
}

pub fn simulate(sc: &Scenario, out: &Path) -> Result<(), CliError> {
    let sim = simulation(sc)?;
    write_csv(out, "trajectory.csv", TRAJECTORY_HEADER, sim.rows.iter().map(|r| row(r)))?;
    write_json(out, "invariant.json", &sim.summary)?;
    sim.singular.map_or(Ok(()), Err)
}

// ------------------------------------------------------------------ reduce

struct Reduction {
    spec: Arc<SystemSpec64>,
    rt: ReducedTrajectory64,
    law: AngularLaw64,
    singular: Option<CliError>,
}

fn reduction(sc: &Scenario) -> Result<Reduction, CliError> {
    let spec = sc.spec()?;
    check_reduction_preconditions(&*spec)?;
    let traj = simulate_trajectory(sc, &spec)?;
    let singular = singularity_of(&traj);
    let rt = resample_by_theta(Arc::new(traj), sc.theta_samples)?;
    let law = AngularLaw::calibrate(spec.clone(), sc.theta_ref, &rt)?;
    Ok(Reduction { spec, rt, law, singular })
}

struct ReducedOutput {
    rows: Vec<Vec<String>>,
    summary: Value,
}

fn reduced_output(red: &Reduction) -> Result<ReducedOutput, CliError> {
    let law_check = check_angular_law(&red.law, &red.rt)?;
    let forms: Vec<(ReducedForm, Result<ReducedResidual<f64>, CliError>)> = ReducedForm::ALL
        .into_iter()
        .map(|f| (f, reduced_residual(&red.law, &red.rt, f).map_err(CliError::from)))
        .collect();
    let rows = red
        .rt
        .samples()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut v =
                vec![s.theta, s.t, s.r, s.u, s.u_theta, s.u_thetatheta, s.l, s.l_squared(), law_check.residuals[k]];
            v.extend(forms.iter().map(|(_, r)| r.as_ref().map_or(f64::NAN, |r| r.residuals[k])));
            row(&v)
        })
        .collect();
    let form_summaries: Vec<Value> = forms
        .iter()
        .map(|(f, r)| match r {
            Ok(r) => json!({
                "form": f.name(),
                "max": r.stats.max,
                "rms": r.stats.rms,
                "u2_residual": r.u2_residual,
            }),
            Err(e) => json!({ "form": f.name(), "error": e }),
        })
        .collect();
    let (th0, th1) = red.rt.theta_span();
    let summary = json!({
        "class": red.spec.class().name(),
        "samples": red.rt.len(),
        "theta_span": [th0, th1],
        "angular_law": {
            "theta_ref": red.law.theta_ref(),
            "l0_sq": red.law.l0_sq(),
            "max": law_check.stats.max,
            "rms": law_check.stats.rms,
        },
        "forms": form_summaries,
    });
    Ok(ReducedOutput { rows, summary })
}

pub fn reduce(sc: &Scenario, out: &Path) -> Result<(), CliError> {
    let red = reduction(sc)?;
    let o = reduced_output(&red)?;
    write_csv(out, "reduced.csv", REDUCED_HEADER, o.rows)?;
    write_json(out, "reduced_residuals.json", &o.summary)?;
    red.singular.map_or(Ok(()), Err)
}

// ------------------------------------------------------------------- audit

fn conditions(sc: &Scenario) -> Result<Vec<(String, Condition)>, CliError> {
    let Some(list) = &sc.audit.conditions else {
        return Ok(vec![("eq_2_5".into(), Condition::Eq2_5), ("toy_L".into(), Condition::ToyL)]);
    };
    let mut custom = 0;
    list.iter()
        .map(|c| match &c.0 {
            ConditionSpec::Eq25 => Ok(("eq_2_5".into(), Condition::Eq2_5)),
            ConditionSpec::ToyL => Ok(("toy_L".into(), Condition::ToyL)),
            ConditionSpec::Custom(text) => {
                custom += 1;
                let e = ShapeExpr::parse(text).map_err(|e| CliError::config("parse", format!("condition: {e}")))?;
                if e.variable() == Some(Variable::S) {
                    return Err(CliError::config("invalid_spec", "custom conditions are written in t (the angle)"));
                }
                Ok((format!("custom_{custom}"), Condition::CustomLSquared(e)))
            }
        })
        .collect()
}

fn audit_thetas(sc: &Scenario) -> Vec<f64> {
    let [a, b] = sc.audit.theta_range;
    let n = sc.audit.samples;
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

struct Audit {
    rows: Vec<Vec<String>>,
    summary: Value,
}

fn audit_data(sc: &Scenario) -> Result<Audit, CliError> {
    let spec = sc.spec()?;
    let thetas = audit_thetas(sc);
    let mut rows = Vec::new();
    let mut per_condition = Vec::new();
    for (name, cond) in conditions(sc)? {
        let samples = condition_audit(&*spec, &cond, &thetas)?;
        let max = samples.iter().fold(0.0f64, |m, s| m.max(s.defect.abs()));
        per_condition.push(json!({
            "condition": name,
            "l_squared": cond.l_squared_expr().source(),
            "max_abs_defect": max,
        }));
        for s in samples {
            let mut r = vec![name.clone()];
            r.extend(row(&[s.theta, s.l_sq, s.dl_sq, s.integrand, s.defect]));
            rows.push(r);
        }
    }
    let summary = json!({ "class": spec.class().name(), "conditions": per_condition });
    Ok(Audit { rows, summary })
}

pub fn audit(sc: &Scenario, out: &Path) -> Result<(), CliError> {
    let a = audit_data(sc)?;
    write_csv(out, "audit.csv", AUDIT_HEADER, a.rows)
}

// ---------------------------------------------------------------- symmetry

fn symmetry_check_data(sc: &Scenario) -> Result<Value, CliError> {
    let list: Vec<(String, String)> = match &sc.symmetry.generators {
        Some(gs) => gs.iter().map(|g| (g.label.clone(), g.generator.clone())).collect(),
        None => [("printed", Coefficient::Printed), ("corrected", Coefficient::Corrected)]
            .into_iter()
            .flat_map(|(tag, c)| symexpr::catalog_texts(c).into_iter().map(move |(l, t)| (format!("{tag} {l}"), t)))
            .collect(),
    };
    let mut entries = Vec::with_capacity(list.len());
    for (label, text) in list {
        let g = parse_generator(&text).map_err(|e| CliError::config("parse", format!("{label}: {e}")))?;
        let res = g.symmetry_residual();
        entries.push(json!({
            "label": label,
            "generator": text,
            "symmetry": res.is_zero(),
            "residual_u1": res.r1.to_string(),
            "residual_u2": res.r2.to_string(),
        }));
    }
    Ok(json!({ "generators": entries }))
}

pub fn symmetry_check(sc: &Scenario, out: &Path) -> Result<(), CliError> {
    write_json(out, "symmetry_check.json", &symmetry_check_data(sc)?)
}

fn symmetry_solve_data(sc: &Scenario) -> Result<Value, CliError> {
    let list: Vec<(String, String, Vec<String>)> = match &sc.symmetry.ansatze {
        Some(a) => a.iter().map(|a| (a.label.clone(), a.generator.clone(), a.unknowns.clone())).collect(),
        None => vec![
            ("G6".into(), symexpr::G6_ANSATZ.into(), vec!["c".into()]),
            ("G8".into(), symexpr::G8_ANSATZ.into(), vec!["c".into()]),
            ("scaling".into(), symexpr::SCALING_ANSATZ.into(), vec!["c1".into(), "c2".into(), "c3".into()]),
        ],
    };
    let mut entries = Vec::with_capacity(list.len());
    for (label, text, unknowns) in list {
        let names: Vec<&str> = unknowns.iter().map(String::as_str).collect();
        let ansatz = parse_ansatz(&text, &names).map_err(|e| CliError::config("parse", format!("{label}: {e}")))?;
        let entry = match solve_coefficients(&ansatz) {
            SolutionSet::Inconsistent => json!({
                "label": label,
                "ansatz": text,
                "status": "inconsistent",
            }),
            SolutionSet::Affine { unknowns, particular, nullspace } => {
                let values: serde_json::Map<String, Value> =
                    unknowns.iter().zip(&particular).map(|(n, v)| (n.clone(), Value::String(v.to_string()))).collect();
                let basis: Vec<Vec<String>> =
                    nullspace.iter().map(|v| v.iter().map(|c| c.to_string()).collect()).collect();
                json!({
                    "label": label,
                    "ansatz": text,
                    "status": if nullspace.is_empty() { "unique" } else { "affine" },
                    "unknowns": unknowns,
                    "particular": values,
                    "nullspace": basis,
                })
            }
        };
        entries.push(entry);
    }
    Ok(json!({ "ansatze": entries }))
}

pub fn symmetry_solve(sc: &Scenario, out: &Path) -> Result<(), CliError> {
    write_json(out, "symmetry_solve.json", &symmetry_solve_data(sc)?)
}

// -------------------------------------------------------------------- flow

fn flow_data(sc: &Scenario) -> Result<Value, CliError> {
    let f = &sc.flow;
    if f.reference_samples < 6 {
        return Err(CliError::config("scenario", "flow.reference_samples must be at least 6"));
    }
    let reference = ReferenceSolution { n: f.reference_samples, ..ReferenceSolution::default() };
    let groups = [
        ("corrected", symflow::real_forms::<f64>(Coefficient::Corrected)),
        ("printed", symflow::real_forms(Coefficient::Printed)),
        ("corrupted", symflow::corrupted_forms()),
        ("negative_control", vec![symflow::negative_control()]),
    ];
    let mut checks = Vec::new();
    for (group, gens) in &groups {
        for g in gens {
            for &eps in &f.epsilons {
                let v = match verify_solution_mapping(g, eps, f.tol, &reference) {
                    Ok(c) => json!({
                        "group": group,
                        "label": c.label,
                        "epsilon": c.epsilon,
                        "max_defect": c.max_defect,
                        "u2_spread": c.u2_spread,
                        "passed": c.passed,
                    }),
                    Err(e) => json!({
                        "group": group,
                        "label": g.label(),
                        "epsilon": eps,
                        "passed": false,
                        "error": CliError::from(e),
                    }),
                };
                checks.push(v);
            }
        }
    }
    Ok(json!({
        "tol": f.tol,
        "reference": {
            "a": reference.a,
            "b": reference.b,
            "u2": reference.u2,
            "theta_range": [reference.theta0, reference.theta1],
            "samples": reference.n,
        },
        "checks": checks,
    }))
}

pub fn flow_verify(sc: &Scenario, out: &Path) -> Result<(), CliError> {
    write_json(out, "flow_verify.json", &flow_data(sc)?)
}

// ---------------------------------------------------------------- pullback

/// File-name form of a generator label: `Re G6+` becomes `Re_G6plus`.
pub fn file_label(label: &str) -> String {
    label.replace(' ', "_").replace('+', "plus").replace('-', "minus")
}

struct Pullback {
    reports: Vec<PullbackReport<f64>>,
    summary: Value,
    singular: Option<CliError>,
}

fn pullback_data(sc: &Scenario) -> Result<Pullback, CliError> {
    let red = reduction(sc)?;
    let mut gens = symflow::real_forms::<f64>(Coefficient::Corrected);
    if let Some(wanted) = &sc.pullback.generators {
        for w in wanted {
            if !gens.iter().any(|g| g.label() == w) {
                let known: Vec<&str> = gens.iter().map(|g| g.label()).collect();
                return Err(CliError::config("scenario", format!("unknown generator '{w}' (known: {known:?})")));
            }
        }
        gens.retain(|g| wanted.iter().any(|w| w == g.label()));
    }
    let reports =
        gens.iter().map(|g| induced_original_variables(g, &red.rt, &red.law)).collect::<Result<Vec<_>, _>>()?;
    let per_gen: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "label": r.label,
                "file": format!("pullback_{}.csv", file_label(&r.label)),
                "max_mismatch_dt": r.max_mismatch_dt,
                "max_mismatch_dr": r.max_mismatch_dr,
            })
        })
        .collect();
    let summary = json!({
        "class": red.spec.class().name(),
        "theta_ref": red.law.theta_ref(),
        "l0_sq": red.law.l0_sq(),
        "dt_dtheta_crosscheck": dt_dtheta_crosscheck(&red.rt)?,
        "time_translation_is_symmetry": time_translation_is_symmetry(&*red.spec),
        "generators": per_gen,
    });
    Ok(Pullback { reports, summary, singular: red.singular })
}

pub fn pullback(sc: &Scenario, out: &Path) -> Result<(), CliError> {
    let p = pullback_data(sc)?;
    for r in &p.reports {
        let rows = r.rows.iter().map(|x| {
            row(&[x.theta, x.t, x.r, x.dt_derived, x.dr_derived, x.dt_paper, x.dr_paper, x.mismatch_dt, x.mismatch_dr])
        });
        write_csv(out, &format!("pullback_{}.csv", file_label(&r.label)), PullbackReport::<f64>::CSV_HEADER, rows)?;
    }
    write_json(out, "pullback_summary.json", &p.summary)?;
    p.singular.map_or(Ok(()), Err)
}

// ------------------------------------------------------------------ report

/// Runs every section the scenario has inputs for and writes one
/// `report.json`. Section failures are recorded in the report; the exit
/// code is the worst of them.
pub fn report(sc: &Scenario, out: &Path) -> Result<(), CliError> {
    let mut worst: Option<CliError> = None;
    let mut note = |r: Result<(Value, Option<CliError>), CliError>| -> Value {
        let (v, err) = match r {
            Ok((mut v, Some(e))) => {
                v["error"] = json!(e);
                (v, Some(e))
            }
            Ok((v, None)) => (v, None),
            Err(e) => (error_value(&e), Some(e)),
        };
        if let Some(e) = err {
            if worst.as_ref().is_none_or(|w| e.code > w.code) {
                worst = Some(e);
            }
        }
        v
    };
    let has_system = sc.system.is_some();
    let has_orbit = has_system && sc.ic.is_some() && sc.t_span.is_some();
    let skipped = |what: &str| json!({ "skipped": format!("scenario has no {what}") });
    let simulate = if has_orbit { note(simulation(sc).map(|s| (s.summary, s.singular))) } else { skipped("orbit") };
    let reduce = if has_orbit {
        note(reduction(sc).and_then(|r| Ok((reduced_output(&r)?.summary, r.singular))))
    } else {
        skipped("orbit")
    };
    let audit = if has_system { note(audit_data(sc).map(|a| (a.summary, None))) } else { skipped("system") };
    let pullback = if has_orbit { note(pullback_data(sc).map(|p| (p.summary, p.singular))) } else { skipped("orbit") };
    let symmetry_check = note(symmetry_check_data(sc).map(|v| (v, None)));
    let symmetry_solve = note(symmetry_solve_data(sc).map(|v| (v, None)));
    let flow_verify = note(flow_data(sc).map(|v| (v, None)));
    let doc = json!({
        "simulate": simulate,
        "reduce": reduce,
        "audit": audit,
        "symmetry_check": symmetry_check,
        "symmetry_solve": symmetry_solve,
        "flow_verify": flow_verify,
        "pullback": pullback,
    });
    write_json(out, "report.json", &doc)?;
    worst.map_or(Ok(()), Err)
}
