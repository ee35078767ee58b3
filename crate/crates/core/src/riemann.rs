//! The Riemann boundary value problem `A F+ + B F- = f` on a closed curve.
//!
//! The problem is normalized to `F+ - D F- = g` with `D = -B/A`, `g = f/A`.
//! With `L = ln|D| + i Omega` the canonical function is `Z = exp(C[L])`,
//! whose traces satisfy `Z+ = D Z-`. The non-homogeneous solution is
//! `F = Z (C[g/Z+] + P_m)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cauchy::{cauchy_integral, singular_op, BoundaryFunction};
use crate::curve::{CurveSpec, DiscretizedCurve};
use crate::weights::{beta_exponents, weighted_norm, AdmissibilityReport, BetaOptions, WeightSpec};
use crate::{Error, Result, C64};

/// Closed-form coefficient pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairSpec {
    /// `A = B = 1`.
    Unit,
    Constant {
        a: C64,
        b: C64,
    },
    /// `A = a[0] + a[1] xi`, `B = b[0] + b[1] xi`.
    Linear {
        a: [C64; 2],
        b: [C64; 2],
    },
    /// `A = 1`, `B = exp(i step)` for `s >= site` and 1 before.
    PhaseStep {
        site: f64,
        step: f64,
    },
    /// `A = exp(i alpha arg xi)`, `B = exp(-i alpha arg xi)`, with `arg xi`
    /// continuous on the curve minus its start point.
    PhaseSystem {
        alpha: f64,
    },
}

/// A jump site of the phase, optionally with its expected size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpSite {
    pub s: f64,
    pub h: Option<f64>,
}

/// `A`, `B` sampled at the nodes, with `Omega = arg D` on a branch that is
/// continuous between the jump sites. Nodes on a jump site carry the right
/// limit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientPair {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub omega: Vec<f64>,
    /// Interior jump sites `0 < s_k < S`, sorted.
    pub jump_sites: Vec<JumpSite>,
    /// Expected value of `h_0 = Omega(+0) - Omega(S-0)`, if known.
    pub declared_h0: Option<f64>,
}

/// Continuous argument of `z(s)` about the origin along the nodes, starting
/// from the principal value at `s = 0`.
pub fn continuous_arg(curve: &DiscretizedCurve) -> Vec<f64> {
    let mut out = Vec::with_capacity(curve.len());
    let mut prev = curve.z[0].arg();
    out.push(prev);
    for w in curve.z.windows(2) {
        prev += (w[1] / w[0]).arg();
        out.push(prev);
    }
    out
}

fn principal_omega(a: C64, b: C64) -> f64 {
    (-b / a).arg()
}

impl CoefficientPair {
    pub fn from_spec(spec: &PairSpec, curve: &DiscretizedCurve) -> Result<Self> {
        match spec {
            PairSpec::Unit => Self::constant(curve, C64::new(1.0, 0.0), C64::new(1.0, 0.0)),
            PairSpec::Constant { a, b } => Self::constant(curve, *a, *b),
            PairSpec::Linear { a, b } => {
                let av: Vec<C64> = curve.z.iter().map(|z| a[0] + a[1] * z).collect();
                let bv: Vec<C64> = curve.z.iter().map(|z| b[0] + b[1] * z).collect();
                Self::from_samples(curve, av, bv, vec![])
            }
            PairSpec::PhaseStep { site, step } => Self::phase_step(curve, *site, *step),
            PairSpec::PhaseSystem { alpha } => Self::phase_system(curve, *alpha),
        }
    }

    pub fn constant(curve: &DiscretizedCurve, a: C64, b: C64) -> Result<Self> {
        let n = curve.len();
        let pair = CoefficientPair {
            a: vec![a; n],
            b: vec![b; n],
            omega: vec![principal_omega(a, b); n],
            jump_sites: vec![],
            declared_h0: Some(0.0),
        };
        pair.check_moduli()?;
        Ok(pair)
    }

    /// `A = 1`, `B` stepping its phase by `step` at `site`.
    pub fn phase_step(curve: &DiscretizedCurve, site: f64, step: f64) -> Result<Self> {
        if !(site > 0.0 && site < curve.length) {
            return Err(Error::Parameter(format!(
                "jump site {site} must lie in (0, {}))",
                curve.length
            )));
        }
        let tol = 1e-12 * curve.length;
        let after: Vec<bool> = curve.s.iter().map(|&s| s >= site - tol).collect();
        let b: Vec<C64> = after
            .iter()
            .map(|&t| {
                if t {
                    C64::from_polar(1.0, step)
                } else {
                    C64::new(1.0, 0.0)
                }
            })
            .collect();
        let omega = after
            .iter()
            .map(|&t| PI + if t { step } else { 0.0 })
            .collect();
        let pair = CoefficientPair {
            a: vec![C64::new(1.0, 0.0); curve.len()],
            b,
            omega,
            jump_sites: vec![JumpSite {
                s: site,
                h: Some(step),
            }],
            declared_h0: Some(-step),
        };
        pair.check_moduli()?;
        Ok(pair)
    }

    /// The exponential phase pair; `Omega = pi - 2 alpha arg xi`, so the start
    /// point carries the jump `h_0 = 4 pi alpha`.
    pub fn phase_system(curve: &DiscretizedCurve, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Parameter("phase parameter must be finite".into()));
        }
        let args = continuous_arg(curve);
        let winding = ((args[args.len() - 1] + (curve.z[0] / curve.z[curve.len() - 1]).arg()
            - args[0])
            / (2.0 * PI))
            .round();
        if winding != 1.0 {
            return Err(Error::UnsupportedCurve(
                "the phase system needs the origin inside the curve".into(),
            ));
        }
        let pair = CoefficientPair {
            a: args
                .iter()
                .map(|t| C64::from_polar(1.0, alpha * t))
                .collect(),
            b: args
                .iter()
                .map(|t| C64::from_polar(1.0, -alpha * t))
                .collect(),
            omega: args.iter().map(|t| PI - 2.0 * alpha * t).collect(),
            jump_sites: vec![],
            declared_h0: Some(4.0 * PI * alpha),
        };
        Ok(pair)
    }

    /// Tabulated `A`, `B`. `Omega` is unwrapped node to node; across a declared
    /// site the increment is taken on the principal branch.
    pub fn from_samples(
        curve: &DiscretizedCurve,
        a: Vec<C64>,
        b: Vec<C64>,
        sites: Vec<f64>,
    ) -> Result<Self> {
        if a.len() != curve.len() || b.len() != curve.len() {
            return Err(Error::Data(
                "coefficient samples do not match the node count".into(),
            ));
        }
        let mut omega = Vec::with_capacity(a.len());
        let mut prev = principal_omega(a[0], b[0]);
        omega.push(prev);
        for j in 1..a.len() {
            let d = principal_omega(a[j], b[j]) - principal_omega(a[j - 1], b[j - 1]);
            prev += crate::spectral::wrap_angle(d);
            omega.push(prev);
        }
        let mut sites = sites;
        sites.sort_by(f64::total_cmp);
        let pair = CoefficientPair {
            a,
            b,
            omega,
            jump_sites: sites.into_iter().map(|s| JumpSite { s, h: None }).collect(),
            declared_h0: None,
        };
        pair.check_moduli()?;
        Ok(pair)
    }

    /// Condition i: `|A|^{+-1}`, `|B|^{+-1}` bounded on the grid.
    pub fn check_moduli(&self) -> Result<()> {
        for (name, v) in [("A", &self.a), ("B", &self.b)] {
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for (j, c) in v.iter().enumerate() {
                let m = c.norm();
                if !m.is_finite() {
                    return Err(Error::Coefficient(format!(
                        "|{name}| is not finite at node {j}"
                    )));
                }
                lo = lo.min(m);
                hi = hi.max(m);
            }
            if !(lo > 1e-12 * hi.max(1.0)) {
                return Err(Error::Coefficient(format!(
                    "|{name}| vanishes on the curve (min {lo:e}, max {hi:e})"
                )));
            }
        }
        Ok(())
    }
}

/// Sampled `D`, `Omega`, jumps and `sigma`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JumpData {
    pub d: Vec<C64>,
    pub omega: Vec<f64>,
    /// `h_0 = Omega(+0) - Omega(S-0)`.
    pub h0: f64,
    /// `(s_k, h_k)` for interior sites.
    pub jumps: Vec<(f64, f64)>,
    /// `sigma(s_j)`; NaN at nodes sitting on a jump with nonzero exponent.
    pub sigma: Vec<f64>,
    pub length: f64,
}

impl JumpData {
    /// All jumps including `(0, h_0)` when it is nonzero.
    pub fn all_jumps(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.jumps.len() + 1);
        if self.h0 != 0.0 {
            out.push((0.0, self.h0));
        }
        out.extend(self.jumps.iter().copied());
        out
    }

    /// `ln sigma(s)` for a point `z = z(s)` of the curve.
    fn log_sigma(&self, z0: C64, sites: &[C64], z: C64) -> f64 {
        let term = |h: f64, zk: C64| {
            if h == 0.0 {
                0.0
            } else {
                -h / (2.0 * PI) * (zk - z).norm().ln()
            }
        };
        let mut acc = term(self.h0, z0);
        for ((_, h), zk) in self.jumps.iter().zip(sites) {
            acc += term(*h, *zk);
        }
        acc
    }
}

// Polynomial extrapolation of (xs, ys) to x.
fn extrapolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut l = 1.0;
        for k in 0..n {
            if k != i {
                l *= (x - xs[k]) / (xs[i] - xs[k]);
            }
        }
        acc += l * ys[i];
    }
    acc
}

/// Nodes used for one-sided limits.
const ONE_SIDED: usize = 7;

/// Compute `D`, `Omega`, the jumps from one-sided grid limits and `sigma`.
pub fn jump_data(pair: &CoefficientPair, curve: &DiscretizedCurve) -> Result<JumpData> {
    let n = curve.len();
    if pair.a.len() != n {
        return Err(Error::Data(
            "coefficient pair sampled on a different grid".into(),
        ));
    }
    pair.check_moduli()?;
    let len = curve.length;
    let tol = 1e-12 * len;
    // segment boundaries as node indices: first node at or after each site
    let mut starts = vec![0usize];
    for site in &pair.jump_sites {
        if !(site.s > 0.0 && site.s < len) {
            return Err(Error::Parameter(format!(
                "jump site {} outside (0, {len})",
                site.s
            )));
        }
        let k = curve.s.iter().position(|&s| s >= site.s - tol).unwrap_or(n);
        starts.push(k);
    }
    starts.push(n);
    for w in starts.windows(2) {
        if w[1] < w[0] + 2 {
            return Err(Error::Sizing(
                "jump sites must be separated by at least two nodes".into(),
            ));
        }
    }
    let s_ext = |j: isize| j as f64 * curve.h;
    let om = |j: isize| pair.omega[j.rem_euclid(n as isize) as usize];
    let right_limit = |k: usize, end: usize, x: f64| {
        let m = (end - k).min(ONE_SIDED);
        let xs: Vec<f64> = (0..m).map(|i| s_ext((k + i) as isize)).collect();
        let ys: Vec<f64> = (0..m).map(|i| om((k + i) as isize)).collect();
        extrapolate(&xs, &ys, x)
    };
    let left_limit = |begin: usize, k: usize, x: f64| {
        let m = (k - begin).min(ONE_SIDED);
        let xs: Vec<f64> = (1..=m).map(|i| s_ext(k as isize - i as isize)).collect();
        let ys: Vec<f64> = (1..=m).map(|i| om(k as isize - i as isize)).collect();
        extrapolate(&xs, &ys, x)
    };
    let segs = starts.len() - 1;
    let h0 = right_limit(0, starts[1], 0.0) - left_limit(starts[segs - 1], n, len);
    let mut jumps = Vec::new();
    for (i, site) in pair.jump_sites.iter().enumerate() {
        let k = starts[i + 1];
        let h = right_limit(k, starts[i + 2], site.s) - left_limit(starts[i], k, site.s);
        if let Some(want) = site.h {
            if (h - want).abs() > 1e-6 {
                return Err(Error::Coefficient(format!(
                    "jump at s = {} reads {h:.9} from the grid, declared {want:.9}",
                    site.s
                )));
            }
        }
        jumps.push((site.s, h));
    }
    if let Some(want) = pair.declared_h0 {
        if (h0 - want).abs() > 1e-6 {
            return Err(Error::Coefficient(format!(
                "jump at the start point reads {h0:.9}, declared {want:.9}"
            )));
        }
    }
    // round-off from the extrapolation is not a jump
    let snap = |h: f64| if h.abs() <= 1e-12 { 0.0 } else { h };
    let h0 = snap(h0);
    jumps.iter_mut().for_each(|j| j.1 = snap(j.1));
    let d: Vec<C64> = pair.a.iter().zip(&pair.b).map(|(a, b)| -b / a).collect();
    let mut jd = JumpData {
        d,
        omega: pair.omega.clone(),
        h0,
        jumps,
        sigma: vec![],
        length: len,
    };
    let z0 = curve.spec.point(0.0).0;
    let sites: Vec<C64> = jd
        .jumps
        .iter()
        .map(|(s, _)| curve.spec.point(*s).0)
        .collect();
    jd.sigma = curve
        .z
        .iter()
        .map(|&z| {
            let singular = ((z - z0).norm() < tol && jd.h0 != 0.0)
                || jd
                    .jumps
                    .iter()
                    .zip(&sites)
                    .any(|((_, h), zk)| (z - zk).norm() < tol && *h != 0.0);
            if singular {
                f64::NAN
            } else {
                jd.log_sigma(z0, &sites, z).exp()
            }
        })
        .collect();
    Ok(jd)
}

/// The canonical function `Z = exp(C[L])` with its boundary traces.
#[derive(Clone, Debug)]
pub struct CanonicalSolution {
    /// `L = ln|D| + i Omega` at the nodes.
    pub log_d: Vec<C64>,
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
    curve: DiscretizedCurve,
}

pub fn canonical_solution(jd: &JumpData, curve: &DiscretizedCurve) -> Result<CanonicalSolution> {
    let mut log_d = Vec::with_capacity(jd.d.len());
    for (j, (d, om)) in jd.d.iter().zip(&jd.omega).enumerate() {
        let m = d.norm();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Coefficient(format!("ln|D| undefined at node {j}")));
        }
        log_d.push(C64::new(m.ln(), *om));
    }
    // a node sitting on a jump enters the quadrature with the mean of its
    // one-sided limits
    let mut density = log_d.clone();
    let tol = 1e-9 * curve.h;
    for (site, h) in jd.all_jumps() {
        if let Some(j) = curve.s.iter().position(|&s| (s - site).abs() < tol) {
            density[j] -= C64::new(0.0, 0.5 * h);
        }
    }
    let sl = singular_op(curve, &density)?;
    let plus = log_d
        .iter()
        .zip(&sl)
        .map(|(l, s)| (0.5 * l + s).exp())
        .collect();
    let minus = log_d
        .iter()
        .zip(&sl)
        .map(|(l, s)| (-0.5 * l + s).exp())
        .collect();
    Ok(CanonicalSolution {
        log_d,
        plus,
        minus,
        curve: curve.clone(),
    })
}

impl CanonicalSolution {
    /// `Z(z)` off the curve.
    pub fn eval(&self, z: C64) -> Result<C64> {
        Ok(cauchy_integral(&self.curve, &self.log_d, z)?.value.exp())
    }
}

/// Outcome of the operational check of condition alpha): both integrals
/// `int sigma^{p p1} rho^{p1}` and `int sigma^{-q p2} rho^{-(q/p) p2}` must
/// settle under grid refinement for some `p1 = p2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionAlpha {
    pub satisfied: bool,
    pub exponent: Option<f64>,
    /// `(p1, first integral at 4N, second integral at 4N, converged)`.
    pub trials: Vec<(f64, f64, f64, bool)>,
}

pub const ALPHA_CANDIDATES: [f64; 4] = [1.05, 1.1, 1.25, 1.5];

fn settles(v: [f64; 3]) -> bool {
    if !v.iter().all(|x| x.is_finite()) {
        return false;
    }
    let d1 = (v[1] - v[0]).abs();
    let d2 = (v[2] - v[1]).abs();
    d2 <= 1e-3 * v[2].abs() || d2 < 0.95 * d1
}

pub fn condition_alpha(
    jd: &JumpData,
    spec: &CurveSpec,
    weight: &WeightSpec,
    n: usize,
) -> ConditionAlpha {
    let p = weight.p;
    let q = weight.q();
    let len = jd.length;
    let z0 = spec.point(0.0).0;
    let sites: Vec<C64> = jd.jumps.iter().map(|(s, _)| spec.point(*s).0).collect();
    let log_weight = |s: f64| -> f64 {
        weight
            .points
            .iter()
            .zip(&weight.alphas)
            .map(|(t, a)| a * (s - t).abs().ln())
            .sum()
    };
    // (ln sigma, ln rho) at the nodes of three grids
    // Composite midpoint rule on the arcs between singular points, so every
    // singular endpoint sees the same local geometry on each grid.
    let mut breaks: Vec<f64> = jd.all_jumps().iter().map(|(s, _)| *s).collect();
    breaks.extend(
        weight
            .points
            .iter()
            .zip(&weight.alphas)
            .filter(|(_, a)| **a != 0.0)
            .map(|(t, _)| t.rem_euclid(len)),
    );
    breaks.push(0.0);
    breaks.push(len);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * len);
    // (ln sigma, ln rho, panel width) on three grids
    let grids: Vec<Vec<(f64, f64, f64)>> = [n, 2 * n, 4 * n]
        .iter()
        .map(|&m| {
            let mut pts = Vec::with_capacity(m + breaks.len());
            for w in breaks.windows(2) {
                let k = ((m as f64 * (w[1] - w[0]) / len).round() as usize).max(1);
                let h = (w[1] - w[0]) / k as f64;
                pts.extend((0..k).map(|i| (w[0] + (i as f64 + 0.5) * h, h)));
            }
            pts.into_par_iter()
                .map(|(s, h)| {
                    let z = spec.point(s).0;
                    (jd.log_sigma(z0, &sites, z), log_weight(s), h)
                })
                .collect()
        })
        .collect();
    let mut trials = Vec::new();
    let mut exponent = None;
    for &c in &ALPHA_CANDIDATES {
        let mut first = [0.0; 3];
        let mut second = [0.0; 3];
        for (g, vals) in grids.iter().enumerate() {
            first[g] = vals
                .iter()
                .map(|(ls, lr, h)| (c * (p * ls + lr)).exp() * h)
                .sum::<f64>();
            second[g] = vals
                .iter()
                .map(|(ls, lr, h)| (-c * q * (ls + lr / p)).exp() * h)
                .sum::<f64>();
        }
        let ok = settles(first) && settles(second);
        trials.push((c, first[2], second[2], ok));
        if ok && exponent.is_none() {
            exponent = Some(c);
        }
    }
    ConditionAlpha {
        satisfied: exponent.is_some(),
        exponent,
        trials,
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    /// Turn admissibility warnings into errors.
    pub strict: bool,
    pub beta: BetaOptions,
    /// Skip the condition alpha) refinement check.
    pub skip_condition_alpha: bool,
}

/// Admissibility and condition checks shared by the solvers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Assessment {
    pub admissibility: AdmissibilityReport,
    pub condition_alpha: Option<ConditionAlpha>,
    pub warnings: Vec<String>,
}

pub fn assess(
    jd: &JumpData,
    curve: &DiscretizedCurve,
    weight: &WeightSpec,
    opts: SolveOptions,
) -> Result<Assessment> {
    let admissibility = beta_exponents(weight, &jd.all_jumps(), curve.length, opts.beta)?;
    let mut warnings = admissibility.violations.clone();
    let condition_alpha = if opts.skip_condition_alpha {
        None
    } else {
        let c = condition_alpha(jd, &curve.spec, weight, curve.len());
        if !c.satisfied {
            warnings.push("condition alpha) not confirmed for any trial exponent".into());
        }
        Some(c)
    };
    if opts.strict && !warnings.is_empty() {
        return Err(Error::Admissibility(warnings));
    }
    Ok(Assessment {
        admissibility,
        condition_alpha,
        warnings,
    })
}

/// A solution given by its traces; off-curve values through the Cauchy
/// representation `F = Z (C[q] + P)`.
#[derive(Clone, Debug, Serialize)]
pub struct RiemannSolution {
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
    /// Order at infinity of the class `_m E(D-)`.
    pub m: i64,
    /// Coefficients of `P_m`, ascending.
    pub polynomial: Vec<C64>,
    /// `||A F+ + B F- - f|| / ||f||` in the weighted norm (relative to
    /// `||A F+||` for homogeneous solutions).
    pub residual: f64,
    pub assessment: Assessment,
    #[serde(skip)]
    density: Vec<C64>,
    #[serde(skip)]
    canonical: CanonicalSolution,
}

fn horner(c: &[C64], z: C64) -> C64 {
    c.iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, a| acc * z + a)
}

impl RiemannSolution {
    /// `F(z)` at a point off the curve.
    pub fn eval(&self, z: C64) -> Result<C64> {
        let zz = self.canonical.eval(z)?;
        let c = if self.density.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            C64::new(0.0, 0.0)
        } else {
            cauchy_integral(&self.canonical.curve, &self.density, z)?.value
        };
        Ok(zz * (c + horner(&self.polynomial, z)))
    }

    /// `|F(10 d)| / |F(100 d)|` along the positive real axis, `d` the
    /// diameter; about 10 for a simple zero at infinity.
    pub fn decay_ratio(&self) -> Result<f64> {
        let d = self.canonical.curve.diameter();
        let near = self.eval(C64::new(10.0 * d, 0.0))?.norm();
        let far = self.eval(C64::new(100.0 * d, 0.0))?.norm();
        Ok(near / far)
    }

    pub fn canonical(&self) -> &CanonicalSolution {
        &self.canonical
    }

    pub fn traces(&self) -> (BoundaryFunction, BoundaryFunction) {
        (
            BoundaryFunction {
                values: self.plus.clone(),
            },
            BoundaryFunction {
                values: self.minus.clone(),
            },
        )
    }
}

fn boundary_residual(
    pair: &CoefficientPair,
    plus: &[C64],
    minus: &[C64],
    f: Option<&[C64]>,
    curve: &DiscretizedCurve,
    weight: &WeightSpec,
) -> Result<f64> {
    let n = plus.len();
    let mut r = Vec::with_capacity(n);
    let mut scale = Vec::with_capacity(n);
    for j in 0..n {
        let lhs = pair.a[j] * plus[j] + pair.b[j] * minus[j];
        match f {
            Some(f) => {
                r.push(lhs - f[j]);
                scale.push(f[j]);
            }
            None => {
                r.push(lhs);
                scale.push(pair.a[j] * plus[j]);
            }
        }
    }
    let num = weighted_norm(&r, curve, weight, weight.p)?;
    let den = weighted_norm(&scale, curve, weight, weight.p)?;
    Ok(if den > 0.0 { num / den } else { num })
}

/// Basis `{Z z^k, k = 0..m}` of the homogeneous solutions; empty for `m < 0`.
pub fn solve_homogeneous(
    pair: &CoefficientPair,
    curve: &DiscretizedCurve,
    weight: &WeightSpec,
    m: i64,
    opts: SolveOptions,
) -> Result<Vec<RiemannSolution>> {
    let jd = jump_data(pair, curve)?;
    let assessment = assess(&jd, curve, weight, opts)?;
    if m < 0 {
        return Ok(vec![]);
    }
    let canonical = canonical_solution(&jd, curve)?;
    (0..=m as usize)
        .map(|k| {
            let mut poly = vec![C64::new(0.0, 0.0); k + 1];
            poly[k] = C64::new(1.0, 0.0);
            let zk: Vec<C64> = curve.z.iter().map(|z| z.powi(k as i32)).collect();
            let plus: Vec<C64> = canonical.plus.iter().zip(&zk).map(|(a, b)| a * b).collect();
            let minus: Vec<C64> = canonical
                .minus
                .iter()
                .zip(&zk)
                .map(|(a, b)| a * b)
                .collect();
            let residual = boundary_residual(pair, &plus, &minus, None, curve, weight)?;
            Ok(RiemannSolution {
                plus,
                minus,
                m,
                polynomial: poly,
                residual,
                assessment: assessment.clone(),
                density: vec![C64::new(0.0, 0.0); curve.len()],
                canonical: canonical.clone(),
            })
        })
        .collect()
}

/// Particular solution of `A F+ + B F- = f`. With `vanish_at_infinity` the
/// homogeneous part is dropped; otherwise `Z P_m` is added with the given
/// polynomial (at most `m + 1` coefficients, zero by default).
#[allow(clippy::too_many_arguments)]
pub fn solve_nonhomogeneous(
    pair: &CoefficientPair,
    curve: &DiscretizedCurve,
    weight: &WeightSpec,
    f: &BoundaryFunction,
    m: i64,
    vanish_at_infinity: bool,
    polynomial: Option<&[C64]>,
    opts: SolveOptions,
) -> Result<RiemannSolution> {
    if f.len() != curve.len() {
        return Err(Error::Data("boundary data does not match the grid".into()));
    }
    let jd = jump_data(pair, curve)?;
    let assessment = assess(&jd, curve, weight, opts)?;
    let canonical = canonical_solution(&jd, curve)?;
    let zmax = canonical.plus.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (j, z) in canonical.plus.iter().enumerate() {
        if !(z.norm() > 1e-13 * zmax) {
            return Err(Error::CanonicalTrace {
                index: j,
                modulus: z.norm(),
            });
        }
    }
    let density: Vec<C64> = (0..curve.len())
        .map(|j| f.values[j] / pair.a[j] / canonical.plus[j])
        .collect();
    let sq = singular_op(curve, &density)?;
    let (m, poly) = if vanish_at_infinity {
        (-1, vec![])
    } else {
        let poly = polynomial.map(|p| p.to_vec()).unwrap_or_default();
        if m < 0 && !poly.is_empty() {
            return Err(Error::Parameter("a polynomial part needs m >= 0".into()));
        }
        if poly.len() as i64 > m + 1 {
            return Err(Error::Parameter(format!(
                "polynomial of {} coefficients exceeds order m = {m}",
                poly.len()
            )));
        }
        (m, poly)
    };
    let pz: Vec<C64> = curve.z.iter().map(|z| horner(&poly, *z)).collect();
    let plus: Vec<C64> = (0..curve.len())
        .map(|j| canonical.plus[j] * (0.5 * density[j] + sq[j] + pz[j]))
        .collect();
    let minus: Vec<C64> = (0..curve.len())
        .map(|j| canonical.minus[j] * (-0.5 * density[j] + sq[j] + pz[j]))
        .collect();
    let residual = boundary_residual(pair, &plus, &minus, Some(&f.values), curve, weight)?;
    Ok(RiemannSolution {
        plus,
        minus,
        m,
        polynomial: poly,
        residual,
        assessment,
        density,
        canonical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::resample;

    fn circle(n: usize) -> DiscretizedCurve {
        resample(&CurveSpec::circle(1.0), n).unwrap()
    }

    fn quick() -> SolveOptions {
        SolveOptions {
            skip_condition_alpha: true,
            ..Default::default()
        }
    }

    #[test]
    fn trivial_jump_data() {
        let c = circle(64);
        let jd = jump_data(
            &CoefficientPair::constant(&c, 1.0.into(), (-1.0).into()).unwrap(),
            &c,
        )
        .unwrap();
        assert!(jd.d.iter().all(|d| (d - 1.0).norm() < 1e-15));
        assert!(jd.omega.iter().all(|o| o.abs() < 1e-15));
        assert!(jd.all_jumps().is_empty());
        assert!(jd.sigma.iter().all(|s| (s - 1.0).abs() < 1e-15));

        let pair =
            CoefficientPair::constant(&c, 1.0.into(), -C64::from_polar(1.0, PI / 2.0)).unwrap();
        let jd = jump_data(&pair, &c).unwrap();
        assert!(jd.omega.iter().all(|o| (o - PI / 2.0).abs() < 1e-15));
        assert!(jd.h0.abs() < 1e-12);
    }

    #[test]
    fn declared_step_read_back() {
        let c = circle(128);
        let pair = CoefficientPair::phase_step(&c, PI, PI / 2.0).unwrap();
        let jd = jump_data(&pair, &c).unwrap();
        assert_eq!(jd.jumps.len(), 1);
        assert!((jd.jumps[0].1 - PI / 2.0).abs() < 1e-6);
        assert!((jd.h0 + PI / 2.0).abs() < 1e-6);
        assert!(jd.sigma[64].is_nan());
        assert!(jd.sigma[10].is_finite());
    }

    #[test]
    fn phase_system_start_jump() {
        let c = resample(&CurveSpec::ellipse(2.0, 1.0), 1024).unwrap();
        let pair = CoefficientPair::phase_system(&c, 0.2).unwrap();
        let jd = jump_data(&pair, &c).unwrap();
        assert!((jd.h0 - 0.8 * PI).abs() < 1e-6);
    }

    #[test]
    fn zero_coefficient_rejected() {
        let c = circle(32);
        assert!(CoefficientPair::constant(&c, 0.0.into(), 1.0.into()).is_err());
    }

    #[test]
    fn canonical_constant_modulus() {
        let c = circle(256);
        let pair = CoefficientPair::constant(&c, 1.0.into(), (-3.0).into()).unwrap();
        let jd = jump_data(&pair, &c).unwrap();
        let z = canonical_solution(&jd, &c).unwrap();
        assert!((z.eval(C64::new(0.2, 0.1)).unwrap() - 3.0).norm() < 1e-10);
        assert!((z.eval(C64::new(2.0, -1.0)).unwrap() - 1.0).norm() < 1e-10);
        assert!(z.plus.iter().all(|v| (v - 3.0).norm() < 1e-10));
        assert!(z.minus.iter().all(|v| (v - 1.0).norm() < 1e-10));
    }

    #[test]
    fn canonical_constant_phase() {
        // Residue calculus: C[i pi/2] is i pi/2 inside and 0 outside.
        let c = circle(256);
        let pair = CoefficientPair::constant(&c, 1.0.into(), -C64::i()).unwrap();
        let jd = jump_data(&pair, &c).unwrap();
        let z = canonical_solution(&jd, &c).unwrap();
        assert!((z.eval(C64::new(-0.3, 0.4)).unwrap() - C64::i()).norm() < 1e-10);
        assert!((z.eval(C64::new(0.0, 3.0)).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn canonical_multiplicative() {
        let c = resample(&CurveSpec::ellipse(2.0, 1.0), 256).unwrap();
        let z = |a: [C64; 2], b: [C64; 2]| {
            let pair = CoefficientPair::from_spec(&PairSpec::Linear { a, b }, &c).unwrap();
            (
                pair.clone(),
                canonical_solution(&jump_data(&pair, &c).unwrap(), &c).unwrap(),
            )
        };
        let one = C64::new(1.0, 0.0);
        let (p1, z1) = z([3.0.into(), 0.5.into()], [one, 0.0.into()]);
        let (p2, z2) = z([one, 0.0.into()], [2.0.into(), C64::new(0.0, -0.4)]);
        // D1 D2 = -B1 B2 / (A1 A2): A = A1 A2, B = -B1 B2
        let a: Vec<C64> = p1.a.iter().zip(&p2.a).map(|(x, y)| x * y).collect();
        let b: Vec<C64> = p1.b.iter().zip(&p2.b).map(|(x, y)| -x * y).collect();
        let pair = CoefficientPair::from_samples(&c, a, b, vec![]).unwrap();
        let jd = jump_data(&pair, &c).unwrap();
        let z12 = canonical_solution(&jd, &c).unwrap();
        for j in 0..c.len() {
            assert!((z12.plus[j] - z1.plus[j] * z2.plus[j]).norm() < 1e-9);
        }
        let pt = C64::new(0.3, 0.2);
        assert!(
            (z12.eval(pt).unwrap() - z1.eval(pt).unwrap() * z2.eval(pt).unwrap()).norm() < 1e-9
        );
    }

    #[test]
    fn homogeneous_families() {
        let c = circle(128);
        let w = WeightSpec::unit(2.0);
        let pair = CoefficientPair::constant(&c, 1.0.into(), (-1.0).into()).unwrap();
        assert!(solve_homogeneous(&pair, &c, &w, -1, quick())
            .unwrap()
            .is_empty());
        let fam = solve_homogeneous(&pair, &c, &w, 0, quick()).unwrap();
        assert_eq!(fam.len(), 1);
        assert!(fam[0].plus.iter().all(|v| (v - 1.0).norm() < 1e-12));
        let fam = solve_homogeneous(&pair, &c, &w, 2, quick()).unwrap();
        assert_eq!(fam.len(), 3);
        for (k, s) in fam.iter().enumerate() {
            assert!(s.residual < 1e-8);
            let z = C64::new(0.3, -0.2);
            assert!((s.eval(z).unwrap() - z.powi(k as i32)).norm() < 1e-10);
        }
    }

    #[test]
    fn plemelj_split_examples() {
        let c = circle(256);
        let w = WeightSpec::unit(2.0);
        let pair = CoefficientPair::constant(&c, 1.0.into(), (-1.0).into()).unwrap();
        let f = BoundaryFunction::from_fn(&c, |z| z * z * z);
        let sol = solve_nonhomogeneous(&pair, &c, &w, &f, -1, true, None, quick()).unwrap();
        for j in 0..c.len() {
            assert!((sol.plus[j] - c.z[j].powi(3)).norm() < 1e-12);
            assert!(sol.minus[j].norm() < 1e-12);
        }
        let f = BoundaryFunction::from_fn(&c, |z| z + 2.0 / z);
        let sol = solve_nonhomogeneous(&pair, &c, &w, &f, -1, true, None, quick()).unwrap();
        for j in 0..c.len() {
            assert!((sol.plus[j] - c.z[j]).norm() < 1e-12);
            assert!((sol.minus[j] + 2.0 / c.z[j]).norm() < 1e-12);
        }
        assert!(sol.residual < 1e-10);
        let out = C64::new(3.0, 1.0);
        assert!((sol.eval(out).unwrap() + 2.0 / out).norm() < 1e-10);
        let r = sol.decay_ratio().unwrap();
        assert!((r - 10.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn linearity() {
        let c = resample(&CurveSpec::ellipse(2.0, 1.0), 256).unwrap();
        let w = WeightSpec::new(vec![1.0], vec![0.3], 2.0).unwrap();
        let pair = CoefficientPair::phase_step(&c, c.length / 2.0, PI / 2.0).unwrap();
        let f1 = BoundaryFunction::from_fn(&c, |z| 1.0 / (z - 3.0));
        let f2 = BoundaryFunction::from_fn(&c, |z| z.conj() * z);
        let lam = C64::new(0.7, -1.3);
        let f12 = BoundaryFunction {
            values: f1
                .values
                .iter()
                .zip(&f2.values)
                .map(|(a, b)| a + lam * b)
                .collect(),
        };
        let s1 = solve_nonhomogeneous(&pair, &c, &w, &f1, -1, true, None, quick()).unwrap();
        let s2 = solve_nonhomogeneous(&pair, &c, &w, &f2, -1, true, None, quick()).unwrap();
        let s12 = solve_nonhomogeneous(&pair, &c, &w, &f12, -1, true, None, quick()).unwrap();
        for j in 0..c.len() {
            assert!((s12.plus[j] - s1.plus[j] - lam * s2.plus[j]).norm() < 1e-9);
            assert!((s12.minus[j] - s1.minus[j] - lam * s2.minus[j]).norm() < 1e-9);
        }
        assert!(s12.residual < 1e-6);
    }

    #[test]
    fn strict_refuses_outside_window() {
        let c = resample(&CurveSpec::ellipse(2.0, 1.0), 256).unwrap();
        let w = WeightSpec::unit(2.0);
        let pair = CoefficientPair::phase_system(&c, 0.3).unwrap();
        let f = BoundaryFunction::from_fn(&c, |z| 1.0 / (z - 3.0));
        let strict = SolveOptions {
            strict: true,
            ..quick()
        };
        let err = solve_nonhomogeneous(&pair, &c, &w, &f, -1, true, None, strict).unwrap_err();
        assert!(err.is_condition_violation());
        let sol = solve_nonhomogeneous(&pair, &c, &w, &f, -1, true, None, quick()).unwrap();
        assert!(!sol.assessment.warnings.is_empty());
        let pair = CoefficientPair::phase_system(&c, 0.2).unwrap();
        assert!(solve_nonhomogeneous(&pair, &c, &w, &f, -1, true, None, strict).is_ok());
    }

    #[test]
    fn condition_alpha_window() {
        let c = resample(&CurveSpec::ellipse(2.0, 1.0), 256).unwrap();
        let w = WeightSpec::unit(2.0);
        let inside = jump_data(&CoefficientPair::phase_system(&c, 0.2).unwrap(), &c).unwrap();
        assert!(condition_alpha(&inside, &c.spec, &w, 256).satisfied);
        let outside = jump_data(&CoefficientPair::phase_system(&c, 0.3).unwrap(), &c).unwrap();
        assert!(!condition_alpha(&outside, &c.spec, &w, 256).satisfied);
        let smooth = jump_data(
            &CoefficientPair::constant(&c, 1.0.into(), 2.0.into()).unwrap(),
            &c,
        )
        .unwrap();
        let heavy = WeightSpec::new(vec![1.0], vec![1.5], 2.0).unwrap();
        assert!(!condition_alpha(&smooth, &c.spec, &heavy, 256).satisfied);
        assert!(
            condition_alpha(
                &smooth,
                &c.spec,
                &WeightSpec::new(vec![1.0], vec![0.5], 2.0).unwrap(),
                256
            )
            .satisfied
        );
    }
}
