//! Expansions in the single systems `{F+_{p,n}}`, `{F-_{p,n}}` and in the
//! double system `{A F+_{p,n}; B F-_{p,k}}`.
//!
//! Coefficients are read off on the unit circle: a plus-trace `F` pulled back
//! as `F(phi_{-1}(w)) phi_{-1}'(w)^{1/p}` has Taylor coefficients equal to its
//! Faber coefficients, and a minus-trace pulled back as
//! `Lambda(w) F(psi_{-1}(w))`, `Lambda = (w^2 psi_{-1}')^{1/p}`, has the
//! minus coefficients as its positive frequencies. The Fourier integrals are
//! evaluated by the trapezoid rule in arc length, so no resampling is needed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::cauchy::{cauchy_integral, singular_op, BoundaryFunction};
use crate::conformal::{branch_power, build_map, Direction, LaurentMap};
use crate::curve::{resample, CurveSpec, DiscretizedCurve};
use crate::riemann::{solve_nonhomogeneous, Assessment, CoefficientPair, SolveOptions};
use crate::spectral::{fit_slope, TrigInterpolant};
use crate::weights::{
    default_scan_family, muckenhoupt_scan, weighted_norm, MuckenhouptScan, WeightSpec,
};
use crate::{Error, Result, C64};

/// Truncation order of the map data used by [`SpaceParams`].
pub const MAP_TRUNCATION: usize = 32;

/// Slope (per truncation step) below which a residual sequence counts as
/// geometrically convergent.
pub const DECAY_SLOPE: f64 = -0.05;

/// Exponent `p`, weight and the two conformal maps of the curve.
#[derive(Clone, Debug)]
pub struct SpaceParams {
    pub p: f64,
    pub q: f64,
    pub weight: WeightSpec,
    pub phi: LaurentMap,
    pub psi: LaurentMap,
}

/// A_p scans of `rho` and of the transplanted weights.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightScans {
    pub rho: MuckenhouptScan,
    pub rho_plus: MuckenhouptScan,
    pub rho_minus: MuckenhouptScan,
}

impl WeightScans {
    pub fn in_class(&self) -> bool {
        self.rho.in_class && self.rho_plus.in_class && self.rho_minus.in_class
    }
}

impl SpaceParams {
    pub fn new(spec: &CurveSpec, weight: WeightSpec) -> Result<Self> {
        weight.validate()?;
        Ok(SpaceParams {
            p: weight.p,
            q: weight.q(),
            phi: build_map(spec, Direction::Phi, MAP_TRUNCATION)?,
            psi: build_map(spec, Direction::Psi, MAP_TRUNCATION)?,
            weight,
        })
    }

    fn map(&self, dir: Direction) -> &LaurentMap {
        match dir {
            Direction::Phi => &self.phi,
            Direction::Psi => &self.psi,
        }
    }

    /// `rho_+ = rho(phi_{-1})` or `rho_- = rho(psi_{-1})` as a power weight in
    /// the angle on the unit circle. The boundary correspondence is smooth
    /// with nonvanishing derivative, so each singular point keeps its
    /// exponent and moves to its image angle.
    pub fn transplanted_weight(&self, dir: Direction) -> WeightSpec {
        let map = self.map(dir);
        WeightSpec {
            points: self
                .weight
                .points
                .iter()
                .map(|&t| map.angle_of_param(t).rem_euclid(2.0 * PI))
                .collect(),
            alphas: self.weight.alphas.clone(),
            p: self.p,
        }
    }

    /// A_p scans of `rho` on the curve and `rho_+-` on the unit circle.
    pub fn scan_weights(&self, curve: &DiscretizedCurve) -> Result<WeightScans> {
        let scan = |w: &WeightSpec, c: &DiscretizedCurve| {
            let (centers, radii) = default_scan_family(w, c);
            muckenhoupt_scan(w, c, &centers, &radii)
        };
        let circle = resample(&CurveSpec::circle(1.0), curve.len())?;
        Ok(WeightScans {
            rho: scan(&self.weight, curve)?,
            rho_plus: scan(&self.transplanted_weight(Direction::Phi), &circle)?,
            rho_minus: scan(&self.transplanted_weight(Direction::Psi), &circle)?,
        })
    }
}

/// Transplant data at the nodes: circle points `w_j`, the branched factor
/// and `|d theta / ds|`.
struct Pullback {
    theta: Vec<f64>,
    factor: Vec<C64>,
    speed: Vec<f64>,
    /// `phi_{-1}'(w_j)^{-1/p}` or `1 / Lambda(w_j)`.
    inverse_factor: Vec<C64>,
}

fn pullback(map: &LaurentMap, curve: &DiscretizedCurve, p: f64) -> Result<Pullback> {
    let theta: Vec<f64> = curve.s.par_iter().map(|&s| map.angle_of_param(s)).collect();
    let ws: Vec<C64> = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let factor = map.kernel_power(&ws, 1.0 / p)?;
    let speed: Vec<f64> = ws
        .par_iter()
        .map(|&w| 1.0 / map.inverse_raw(w).1.norm())
        .collect();
    let inverse_factor = map.kernel_power(&ws, -1.0 / p)?;
    Ok(Pullback {
        theta,
        factor,
        speed,
        inverse_factor,
    })
}

// (1/2 pi) int g(theta) e^{-i n theta} d theta for n in range, by the
// trapezoid rule in s.
fn fourier(
    values: &[C64],
    pb: &Pullback,
    h: f64,
    range: std::ops::RangeInclusive<usize>,
) -> Vec<C64> {
    let weighted: Vec<C64> = (0..values.len())
        .map(|j| values[j] * pb.factor[j] * pb.speed[j] * h / (2.0 * PI))
        .collect();
    range
        .into_par_iter()
        .map(|n| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, v) in weighted.iter().enumerate() {
                acc += v * C64::from_polar(1.0, -(n as f64) * pb.theta[j]);
            }
            acc
        })
        .collect()
}

/// Side checks and strictness for single-system expansions.
#[derive(Clone, Copy, Debug)]
pub struct ExpandOptions {
    pub strict: bool,
    /// Relative sup-norm tolerance of the wrong-side Plemelj part.
    pub trace_tolerance: f64,
    pub scan_weights: bool,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions {
            strict: false,
            trace_tolerance: 1e-6,
            scan_weights: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingleExpansion {
    /// Plus: coefficients of `F+_{p,0..M}`. Minus: of `F-_{p,1..M}`.
    pub coeffs: Vec<C64>,
    /// Relative size of the wrong-side Plemelj part of the input.
    pub trace_defect: f64,
    /// `|F(infinity)|` for minus-side inputs.
    pub at_infinity: Option<f64>,
    pub scans: Option<WeightScans>,
    pub warnings: Vec<String>,
}

fn sup(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn trace_defect(curve: &DiscretizedCurve, f: &[C64], plus_side: bool) -> Result<f64> {
    let sf = singular_op(curve, f)?;
    let sign = if plus_side { -0.5 } else { 0.5 };
    let wrong: Vec<C64> = f.iter().zip(&sf).map(|(a, b)| sign * a + b).collect();
    let scale = sup(f);
    Ok(if scale > 0.0 {
        sup(&wrong) / scale
    } else {
        0.0
    })
}

fn scan_step(
    params: &SpaceParams,
    curve: &DiscretizedCurve,
    opts: ExpandOptions,
    warnings: &mut Vec<String>,
) -> Result<Option<WeightScans>> {
    if !opts.scan_weights {
        return Ok(None);
    }
    let scans = params.scan_weights(curve)?;
    let mut bad = Vec::new();
    for (name, s) in [
        ("rho", &scans.rho),
        ("rho_plus", &scans.rho_plus),
        ("rho_minus", &scans.rho_minus),
    ] {
        if !s.in_class {
            bad.push(format!(
                "A_p scan of {name} does not stabilize under refinement"
            ));
        }
    }
    if opts.strict && !bad.is_empty() {
        return Err(Error::Admissibility(bad));
    }
    warnings.extend(bad);
    Ok(Some(scans))
}

/// Coefficients `c_0..c_m` of a plus-trace in `{F+_{p,n}}`.
pub fn expand_smirnov_plus(
    f: &BoundaryFunction,
    curve: &DiscretizedCurve,
    params: &SpaceParams,
    m: usize,
    opts: ExpandOptions,
) -> Result<SingleExpansion> {
    let mut warnings = Vec::new();
    let defect = trace_defect(curve, &f.values, true)?;
    if defect > opts.trace_tolerance {
        return Err(Error::NotATrace(format!(
            "minus part is {defect:e} of the data"
        )));
    }
    let scans = scan_step(params, curve, opts, &mut warnings)?;
    let coeffs = plus_coefficients(&f.values, curve, params, m)?;
    Ok(SingleExpansion {
        coeffs,
        trace_defect: defect,
        at_infinity: None,
        scans,
        warnings,
    })
}

fn plus_coefficients(
    f: &[C64],
    curve: &DiscretizedCurve,
    params: &SpaceParams,
    m: usize,
) -> Result<Vec<C64>> {
    let pb = pullback(&params.phi, curve, params.p)?;
    let mut c = fourier(f, &pb, curve.h, 0..=m);
    // F+_{p,0} = 1 while the pulled-back constant is gamma^{-1/p}
    c[0] *= params.phi.leading().powf(1.0 / params.p);
    Ok(c)
}

fn minus_coefficients(
    f: &[C64],
    curve: &DiscretizedCurve,
    params: &SpaceParams,
    m: usize,
) -> Result<Vec<C64>> {
    if m == 0 {
        return Ok(vec![]);
    }
    let pb = pullback(&params.psi, curve, params.p)?;
    Ok(fourier(f, &pb, curve.h, 1..=m))
}

/// Coefficients `c_1..c_m` of a minus-trace vanishing at infinity in
/// `{F-_{p,n}}`.
pub fn expand_smirnov_minus(
    f: &BoundaryFunction,
    curve: &DiscretizedCurve,
    params: &SpaceParams,
    m: usize,
    opts: ExpandOptions,
) -> Result<SingleExpansion> {
    let mut warnings = Vec::new();
    let scale = sup(&f.values);
    // for a minus-trace the Cauchy integral inside is the constant F(infinity)
    let at_inf = cauchy_integral(curve, &f.values, curve.spec.interior_probe())?
        .value
        .norm();
    if scale > 0.0 && at_inf > opts.trace_tolerance * scale {
        return Err(Error::NonvanishingAtInfinity(at_inf));
    }
    let defect = trace_defect(curve, &f.values, false)?;
    if defect > opts.trace_tolerance {
        return Err(Error::NotATrace(format!(
            "plus part is {defect:e} of the data"
        )));
    }
    let scans = scan_step(params, curve, opts, &mut warnings)?;
    let coeffs = minus_coefficients(&f.values, curve, params, m)?;
    Ok(SingleExpansion {
        coeffs,
        trace_defect: defect,
        at_infinity: Some(at_inf),
        scans,
        warnings,
    })
}

/// `f_+(w) = f(phi_{-1}(w)) phi_{-1}'(w)^{1/p}` on `n` uniform circle nodes.
pub fn transplant_plus(
    f: &BoundaryFunction,
    curve: &DiscretizedCurve,
    params: &SpaceParams,
    n: usize,
) -> Result<(DiscretizedCurve, BoundaryFunction)> {
    transplant(f, curve, &params.phi, n, |map, ws| {
        map.kernel_power(ws, 1.0 / params.p)
    })
}

/// `f_-(w) = f(psi_{-1}(w)) psi_{-1}'(w)^{2/p}`, the power continued along
/// the circle from the principal argument at `w = 1`.
pub fn transplant_minus(
    f: &BoundaryFunction,
    curve: &DiscretizedCurve,
    params: &SpaceParams,
    n: usize,
) -> Result<(DiscretizedCurve, BoundaryFunction)> {
    transplant(f, curve, &params.psi, n, |map, ws| {
        let d: Vec<C64> = ws.iter().map(|&w| map.inverse_raw(w).1).collect();
        branch_power(&d, 2.0 / params.p, None)
    })
}

fn transplant(
    f: &BoundaryFunction,
    curve: &DiscretizedCurve,
    map: &LaurentMap,
    n: usize,
    factor: impl Fn(&LaurentMap, &[C64]) -> Result<Vec<C64>>,
) -> Result<(DiscretizedCurve, BoundaryFunction)> {
    if f.len() != curve.len() {
        return Err(Error::Data("boundary data does not match the grid".into()));
    }
    let circle = resample(&CurveSpec::circle(1.0), n)?;
    let interp = TrigInterpolant::new(&f.values, curve.length);
    let theta0 = map.angle_of_param(0.0);
    let params: Vec<f64> = circle
        .s
        .par_iter()
        .map(|&t| {
            // nearest lift of t to the continuous angle branch
            let k = ((theta0 - t) / (2.0 * PI)).round();
            map.param_of_angle(t + 2.0 * PI * k)
        })
        .collect::<Result<_>>()?;
    let fac = factor(map, &circle.z)?;
    let values = params
        .iter()
        .zip(&fac)
        .map(|(&s, a)| interp.eval(s) * a)
        .collect();
    Ok((circle, BoundaryFunction { values }))
}

/// Plemelj traces of the basis functions on the curve nodes.
#[derive(Clone, Debug)]
pub struct BasisTraces {
    /// `F+_{p,n}`, `n = 0..=m1`.
    pub plus: Vec<Vec<C64>>,
    /// `F-_{p,n}`, `n = 1..=m2` (index `n - 1`).
    pub minus: Vec<Vec<C64>>,
}

/// `F+_{p,n} = h/2 + S h` with `h = phi^n phi'^{1/p}` and
/// `F-_{p,n} = h/2 - S h` with `h = psi^{n - 2/p} psi'^{1/p}`, sampled
/// through the circle points. Stable at degrees where monomial coefficients
/// would cancel catastrophically.
pub fn basis_traces(
    curve: &DiscretizedCurve,
    params: &SpaceParams,
    m1: usize,
    m2: usize,
) -> Result<BasisTraces> {
    let n = curve.len();
    let pp = pullback(&params.phi, curve, params.p)?;
    let mut plus = vec![vec![C64::new(1.0, 0.0); n]];
    for k in 1..=m1 {
        let h: Vec<C64> = (0..n)
            .map(|j| C64::from_polar(1.0, k as f64 * pp.theta[j]) * pp.inverse_factor[j])
            .collect();
        let sh = singular_op(curve, &h)?;
        plus.push(h.iter().zip(&sh).map(|(a, b)| 0.5 * a + b).collect());
    }
    let mut minus = Vec::with_capacity(m2);
    if m2 > 0 {
        let pm = pullback(&params.psi, curve, params.p)?;
        for k in 1..=m2 {
            let h: Vec<C64> = (0..n)
                .map(|j| C64::from_polar(1.0, k as f64 * pm.theta[j]) * pm.inverse_factor[j])
                .collect();
            let sh = singular_op(curve, &h)?;
            minus.push(h.iter().zip(&sh).map(|(a, b)| 0.5 * a - b).collect());
        }
    }
    Ok(BasisTraces { plus, minus })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ResidualRow {
    pub m1: usize,
    pub m2: usize,
    pub residual: f64,
    pub relative: f64,
}

/// Coefficients of `f = A sum c_n F+_{p,n} + B sum d_n F-_{p,n}` with the
/// residuals of nested partial sums.
#[derive(Clone, Debug, Serialize)]
pub struct DoubleExpansion {
    pub p: f64,
    pub weight: WeightSpec,
    /// `c_0..c_{M1}`.
    pub plus_coeffs: Vec<C64>,
    /// `d_1..d_{M2}`.
    pub minus_coeffs: Vec<C64>,
    /// Partial sums `(k, k)` clipped to `(M1, M2)`, for `k = 0..=max(M1, M2)`.
    pub residuals: Vec<ResidualRow>,
    pub f_norm: f64,
    /// Boundary residual of the Riemann solve.
    pub solver_residual: f64,
    pub plus_trace_defect: f64,
    pub minus_trace_defect: f64,
    pub assessment: Assessment,
    pub warnings: Vec<String>,
    #[serde(skip)]
    basis: BasisTraces,
    #[serde(skip)]
    f: Vec<C64>,
    #[serde(skip)]
    curve: DiscretizedCurve,
}

fn partial_sum(exp: &DoubleExpansion, a: &[C64], b: &[C64], m1: usize, m2: usize) -> Vec<C64> {
    let n = exp.f.len();
    (0..n)
        .into_par_iter()
        .map(|j| {
            let mut plus = C64::new(0.0, 0.0);
            for k in 0..=m1 {
                plus += exp.plus_coeffs[k] * exp.basis.plus[k][j];
            }
            let mut minus = C64::new(0.0, 0.0);
            for k in 1..=m2 {
                minus += exp.minus_coeffs[k - 1] * exp.basis.minus[k - 1][j];
            }
            a[j] * plus + b[j] * minus
        })
        .collect()
}

/// Solve `A F+ + B F- = f` with `F-(infinity) = 0`, then expand both sides.
pub fn expand_double(
    f: &BoundaryFunction,
    pair: &CoefficientPair,
    curve: &DiscretizedCurve,
    params: &SpaceParams,
    m1: usize,
    m2: usize,
    opts: SolveOptions,
) -> Result<DoubleExpansion> {
    let sol = solve_nonhomogeneous(pair, curve, &params.weight, f, -1, true, None, opts)?;
    let plus_coeffs = plus_coefficients(&sol.plus, curve, params, m1)?;
    let minus_coeffs = minus_coefficients(&sol.minus, curve, params, m2)?;
    let basis = basis_traces(curve, params, m1, m2)?;
    let mut exp = DoubleExpansion {
        p: params.p,
        weight: params.weight.clone(),
        plus_coeffs,
        minus_coeffs,
        residuals: vec![],
        f_norm: weighted_norm(&f.values, curve, &params.weight, params.p)?,
        solver_residual: sol.residual,
        plus_trace_defect: trace_defect(curve, &sol.plus, true)?,
        minus_trace_defect: trace_defect(curve, &sol.minus, false)?,
        warnings: sol.assessment.warnings.clone(),
        assessment: sol.assessment,
        basis,
        f: f.values.clone(),
        curve: curve.clone(),
    };
    let top = m1.max(m2);
    let mut rows = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let (k1, k2) = (k.min(m1), k.min(m2));
        let s = partial_sum(&exp, &pair.a, &pair.b, k1, k2);
        let diff: Vec<C64> = exp.f.iter().zip(&s).map(|(x, y)| x - y).collect();
        let r = weighted_norm(&diff, curve, &params.weight, params.p)?;
        rows.push(ResidualRow {
            m1: k1,
            m2: k2,
            residual: r,
            relative: if exp.f_norm > 0.0 { r / exp.f_norm } else { r },
        });
    }
    exp.residuals = rows;
    Ok(exp)
}

/// The system `{e^{i alpha arg xi sign n} F_{p,n}}`: `A = e^{i alpha arg xi}`,
/// `B = e^{-i alpha arg xi}`; `n = 0` belongs to the plus side.
pub fn expand_phase_system(
    f: &BoundaryFunction,
    alpha: f64,
    curve: &DiscretizedCurve,
    params: &SpaceParams,
    m1: usize,
    m2: usize,
    opts: SolveOptions,
) -> Result<(CoefficientPair, DoubleExpansion)> {
    let pair = CoefficientPair::phase_system(curve, alpha)?;
    let exp = expand_double(f, &pair, curve, params, m1, m2, opts)?;
    Ok((pair, exp))
}

/// Partial sum `S_{M1,M2}` and its weighted distance to the expanded data.
pub fn reconstruct(
    exp: &DoubleExpansion,
    pair: &CoefficientPair,
    m1: usize,
    m2: usize,
) -> Result<(BoundaryFunction, f64)> {
    let max1 = exp.plus_coeffs.len() - 1;
    let max2 = exp.minus_coeffs.len();
    if m1 > max1 || m2 > max2 {
        return Err(Error::Truncation { m1, m2, max1, max2 });
    }
    let s = partial_sum(exp, &pair.a, &pair.b, m1, m2);
    let diff: Vec<C64> = exp.f.iter().zip(&s).map(|(x, y)| x - y).collect();
    let r = weighted_norm(&diff, &exp.curve, &exp.weight, exp.p)?;
    Ok((BoundaryFunction { values: s }, r))
}

impl DoubleExpansion {
    pub fn basis(&self) -> &BasisTraces {
        &self.basis
    }

    /// Least-squares slope of `ln(relative residual)` against the truncation
    /// step over rows with `lo <= k <= hi`.
    pub fn decay_slope(&self, lo: usize, hi: usize) -> f64 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .residuals
            .iter()
            .enumerate()
            .filter(|(k, r)| *k >= lo && *k <= hi && r.relative > 0.0)
            .map(|(k, r)| (k as f64, r.relative.ln()))
            .unzip();
        fit_slope(&xs, &ys)
    }

    /// Slope over the last half of the stored truncations.
    pub fn tail_slope(&self) -> f64 {
        let top = self.residuals.len().saturating_sub(1);
        self.decay_slope(top / 2, top)
    }

    pub fn is_convergent(&self) -> bool {
        self.tail_slope() < DECAY_SLOPE
    }

    /// Whether each enlargement of the truncation does not increase the
    /// residual beyond `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.residuals
            .windows(2)
            .all(|w| w[1].relative <= w[0].relative + slack)
    }

    /// Coefficient rows `degree, re, im`; minus coefficients carry negative
    /// degrees.
    pub fn coefficient_rows(&self) -> Vec<(i64, C64)> {
        let mut rows: Vec<(i64, C64)> = self
            .plus_coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (k as i64, *c))
            .collect();
        rows.extend(
            self.minus_coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (-(k as i64 + 1), *c)),
        );
        rows
    }

    pub fn write_coefficients_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["degree", "re", "im"])?;
        for (d, c) in self.coefficient_rows() {
            w.write_record([
                d.to_string(),
                format!("{:.17e}", c.re),
                format!("{:.17e}", c.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_residuals_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["m1", "m2", "residual", "relative"])?;
        for r in &self.residuals {
            w.write_record([
                r.m1.to_string(),
                r.m2.to_string(),
                format!("{:.17e}", r.residual),
                format!("{:.17e}", r.relative),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
