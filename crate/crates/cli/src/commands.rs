use faberlab::conformal::{build_map, Direction};
use faberlab::curve::{
    check_regular, geometric_radii, resample, uniform_centers, DiscretizedCurve,
};
use faberlab::expansion::{
    expand_double, DoubleExpansion, SpaceParams, DECAY_SLOPE, MAP_TRUNCATION,
};
use faberlab::faber::{faber_minus, faber_plus, FaberOptions};
use faberlab::riemann::{
    assess, condition_alpha, jump_data, solve_homogeneous, solve_nonhomogeneous, Assessment,
    CoefficientPair, RiemannSolution, SolveOptions,
};
use faberlab::weights::{beta_exponents, default_scan_family, muckenhoupt_scan, BetaOptions};
use serde_json::{json, Value};

use crate::config::{Resolved, DEFAULT_EXPAND_M, DEFAULT_FIT_FROM, DEFAULT_STUDY_M};
use crate::output::{emit, num, report, write_json, write_text, Csv};
use crate::CliError;

const CARLESON_CENTERS: usize = 16;
const CARLESON_RADII: usize = 32;

fn curve(cfg: &Resolved) -> Result<DiscretizedCurve, CliError> {
    Ok(resample(&cfg.curve, cfg.nodes)?)
}

fn solve_opts(cfg: &Resolved) -> SolveOptions {
    SolveOptions {
        strict: cfg.strict,
        ..Default::default()
    }
}

fn announce(paths: &[std::path::PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

pub fn gen(cfg: &Resolved) -> Result<(), CliError> {
    let n = cfg
        .knobs
        .n
        .ok_or_else(|| CliError::Config("gen needs --n".into()))?;
    let side = cfg.knobs.side.as_deref().unwrap_or("plus");
    let p = cfg.p();
    let opts = FaberOptions::default();
    let poly = match side {
        "plus" => faber_plus(
            &build_map(&cfg.curve, Direction::Phi, MAP_TRUNCATION)?,
            p,
            n,
            opts,
        )?,
        "minus" => faber_minus(
            &build_map(&cfg.curve, Direction::Psi, MAP_TRUNCATION)?,
            p,
            n,
            opts,
        )?,
        other => {
            return Err(CliError::Config(format!(
                "--side must be plus or minus, got {other}"
            )))
        }
    };
    let mut csv = Csv::new(&cfg.hash, &["degree", "re", "im"]);
    let scale = poly.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let clean = |x: f64| if x.abs() <= 1e-14 * scale { 0.0 } else { x };
    for (deg, c) in poly.significant_terms() {
        csv.row(&[deg.to_string(), num(clean(c.re)), num(clean(c.im))]);
    }
    let stem = format!("faber_{side}_{n}");
    let csv_path = write_text(&cfg.out, &format!("{stem}.csv"), csv.as_str())?;
    let rep = report(
        cfg.report_header(),
        json!({
            "side": side,
            "n": n,
            "p": p,
            "degree": poly.degree(),
            "leading": [poly.leading().re, poly.leading().im],
            "agreement": poly.agreement,
            "residual": poly.residual,
            "samples": poly.samples,
            "radius": poly.radius,
            "check_radius": poly.check_radius,
            "dropped_factor": poly.dropped_factor.map(|c| [c.re, c.im]),
        }),
    );
    let json_path = write_json(&cfg.out, &format!("{stem}.json"), &rep)?;
    announce(&[csv_path, json_path]);
    emit(csv.as_str());
    Ok(())
}

pub fn check(cfg: &Resolved) -> Result<(), CliError> {
    let c = curve(cfg)?;
    let w = &cfg.weight;
    let (jumps, cond) = if cfg.knobs.pair.is_some() || cfg.knobs.phase_alpha.is_some() {
        let pair = CoefficientPair::from_spec(&cfg.pair, &c)?;
        let jd = jump_data(&pair, &c)?;
        let ca = condition_alpha(&jd, &cfg.curve, w, cfg.nodes);
        (jd.all_jumps(), Some(ca))
    } else {
        (vec![], None)
    };
    let adm = beta_exponents(w, &jumps, c.length, BetaOptions::default())?;
    let (centers, radii) = default_scan_family(w, &c);
    let scan = muckenhoupt_scan(w, &c, &centers, &radii)?;
    let carleson = check_regular(
        &cfg.curve,
        cfg.nodes,
        &uniform_centers(&cfg.curve, CARLESON_CENTERS),
        &geometric_radii(4.0 * c.h, c.diameter(), CARLESON_RADII),
    )?;

    let mut violations = adm.violations.clone();
    if !scan.in_class {
        violations.push("A_p scan does not stabilize under refinement".into());
    }
    if !carleson.is_regular {
        violations.push("Carleson estimate does not stabilize under refinement".into());
    }
    if let Some(ca) = &cond {
        if !ca.satisfied {
            violations.push("condition alpha) not confirmed for any trial exponent".into());
        }
    }
    let rep = report(
        cfg.report_header(),
        json!({
            "curve": cfg.curve.label(),
            "p": w.p,
            "in_class": scan.in_class,
            "ap_estimate": scan.ap_estimate,
            "ap_refinements": scan.refinements,
            "betas": adm.points.iter().map(|m| m.beta).collect::<Vec<_>>(),
            "points": adm.points,
            "window_ok": adm.window_ok,
            "disjoint": adm.disjoint,
            "alphas_below_q_over_p": adm.alphas_below_q_over_p,
            "carleson": carleson,
            "condition_alpha": cond,
            "violations": violations,
        }),
    );
    let path = write_json(&cfg.out, "check.json", &rep)?;
    announce(&[path]);
    emit(&format!(
        "{}\n",
        serde_json::to_string_pretty(&rep).expect("report serializes")
    ));
    if cfg.strict && !violations.is_empty() {
        return Err(CliError::Violation(violations));
    }
    Ok(())
}

fn trace_csv(cfg: &Resolved, c: &DiscretizedCurve, sol: &RiemannSolution) -> Csv {
    let mut csv = Csv::new(
        &cfg.hash,
        &["s", "re_plus", "im_plus", "re_minus", "im_minus"],
    );
    for j in 0..c.len() {
        csv.row(&[
            num(c.s[j]),
            num(sol.plus[j].re),
            num(sol.plus[j].im),
            num(sol.minus[j].re),
            num(sol.minus[j].im),
        ]);
    }
    csv
}

fn solution_summary(sol: &RiemannSolution) -> Value {
    json!({
        "m": sol.m,
        "polynomial": sol.polynomial.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "residual": sol.residual,
        "decay_ratio": sol.decay_ratio().ok(),
    })
}

fn finite_or_fail(what: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{what} is not finite")))
    }
}

pub fn solve(cfg: &Resolved) -> Result<(), CliError> {
    let c = curve(cfg)?;
    let pair = CoefficientPair::from_spec(&cfg.pair, &c)?;
    let opts = solve_opts(cfg);
    let mut paths = Vec::new();
    let (assessment, solutions) = match &cfg.data {
        Some(src) => {
            let f = src.load(&c)?;
            let m = cfg.knobs.m.unwrap_or(-1);
            let sol = solve_nonhomogeneous(&pair, &c, &cfg.weight, &f, m, m < 0, None, opts)?;
            finite_or_fail("solution residual", sol.residual)?;
            paths.push(write_text(
                &cfg.out,
                "solution.csv",
                trace_csv(cfg, &c, &sol).as_str(),
            )?);
            (sol.assessment.clone(), vec![solution_summary(&sol)])
        }
        None => {
            let m = cfg.knobs.m.unwrap_or(0);
            let sols = solve_homogeneous(&pair, &c, &cfg.weight, m, opts)?;
            let mut out = Vec::new();
            for (k, sol) in sols.iter().enumerate() {
                finite_or_fail("solution residual", sol.residual)?;
                paths.push(write_text(
                    &cfg.out,
                    &format!("homogeneous_{k}.csv"),
                    trace_csv(cfg, &c, sol).as_str(),
                )?);
                out.push(solution_summary(sol));
            }
            let assessment = match sols.first() {
                Some(s) => s.assessment.clone(),
                None => empty_assessment(cfg, &pair, &c)?,
            };
            (assessment, out)
        }
    };
    let rep = report(
        cfg.report_header(),
        json!({ "assessment": assessment, "solutions": solutions }),
    );
    paths.push(write_json(&cfg.out, "solve.json", &rep)?);
    announce(&paths);
    for s in &solutions {
        emit(&format!(
            "residual = {}\n",
            num(s["residual"].as_f64().unwrap_or(f64::NAN))
        ));
    }
    Ok(())
}

// Homogeneous runs with m < 0 have no solutions; report the admissibility
// data anyway.
fn empty_assessment(
    cfg: &Resolved,
    pair: &CoefficientPair,
    c: &DiscretizedCurve,
) -> Result<Assessment, CliError> {
    let jd = jump_data(pair, c)?;
    Ok(assess(&jd, c, &cfg.weight, solve_opts(cfg))?)
}

fn run_expansion(cfg: &Resolved, m1: usize, m2: usize) -> Result<DoubleExpansion, CliError> {
    let c = curve(cfg)?;
    let pair = CoefficientPair::from_spec(&cfg.pair, &c)?;
    let f = cfg
        .data
        .as_ref()
        .expect("expand and study default the data")
        .load(&c)?;
    let params = SpaceParams::new(&cfg.curve, cfg.weight.clone())?;
    let exp = expand_double(&f, &pair, &c, &params, m1, m2, solve_opts(cfg))?;
    finite_or_fail(
        "expansion residual",
        exp.residuals.last().map(|r| r.relative).unwrap_or(f64::NAN),
    )?;
    Ok(exp)
}

fn residual_csv(cfg: &Resolved, exp: &DoubleExpansion) -> Csv {
    let mut csv = Csv::new(&cfg.hash, &["m1", "m2", "residual", "relative"]);
    for r in &exp.residuals {
        csv.row(&[
            r.m1.to_string(),
            r.m2.to_string(),
            num(r.residual),
            num(r.relative),
        ]);
    }
    csv
}

pub fn expand(cfg: &Resolved) -> Result<(), CliError> {
    let m1 = cfg.knobs.m1.unwrap_or(DEFAULT_EXPAND_M);
    let m2 = cfg.knobs.m2.unwrap_or(DEFAULT_EXPAND_M);
    if m2 == 0 {
        return Err(CliError::Config("--m2 must be at least 1".into()));
    }
    let exp = run_expansion(cfg, m1, m2)?;
    let mut coeffs = Csv::new(&cfg.hash, &["degree", "re", "im"]);
    for (deg, c) in exp.coefficient_rows() {
        coeffs.row(&[deg.to_string(), num(c.re), num(c.im)]);
    }
    let p1 = write_text(&cfg.out, "coefficients.csv", coeffs.as_str())?;
    let p2 = write_text(&cfg.out, "residuals.csv", residual_csv(cfg, &exp).as_str())?;
    let rep = report(
        cfg.report_header(),
        json!({
            "expansion": exp,
            "tail_slope": exp.tail_slope(),
        }),
    );
    let p3 = write_json(&cfg.out, "expand.json", &rep)?;
    announce(&[p1, p2, p3]);
    let last = exp.residuals.last().expect("at least one row");
    emit(&format!(
        "relative residual at ({}, {}) = {}\n",
        last.m1,
        last.m2,
        num(last.relative)
    ));
    Ok(())
}

pub fn study(cfg: &Resolved) -> Result<(), CliError> {
    let m = cfg.knobs.m_max.unwrap_or(DEFAULT_STUDY_M);
    let lo = cfg.knobs.fit_from.unwrap_or(DEFAULT_FIT_FROM);
    if m < lo + 2 {
        return Err(CliError::Config(format!(
            "--m-max must exceed --fit-from by at least 2 ({m} vs {lo})"
        )));
    }
    let exp = run_expansion(cfg, m, m)?;
    let slope = exp.decay_slope(lo, m);
    let convergent = slope < DECAY_SLOPE;
    let path = write_text(&cfg.out, "residuals.csv", residual_csv(cfg, &exp).as_str())?;
    let rep = report(
        cfg.report_header(),
        json!({
            "fit_range": [lo, m],
            "slope": slope,
            "threshold": DECAY_SLOPE,
            "convergent": convergent,
            "monotone": exp.is_monotone(1e-12),
            "residuals": exp.residuals,
            "warnings": exp.warnings,
        }),
    );
    let json_path = write_json(&cfg.out, "study.json", &rep)?;
    announce(&[path, json_path]);
    emit(&format!(
        "slope = {} over M in [{lo}, {m}] (threshold {DECAY_SLOPE}): {}\n",
        num(slope),
        if convergent {
            "convergent"
        } else {
            "not convergent"
        }
    ));
    Ok(())
}
