//! Power weights `rho(z(s)) = prod |s - t_k|^{alpha_k}` on a curve, weighted
//! Lebesgue norms, numerical Muckenhoupt scans and admissibility exponents.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::curve::{resample, DiscretizedCurve};
use crate::{Error, Result, C64};

/// Relative tolerance (in units of the curve length) below which two
/// singular or jump points are treated as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(default)]
    pub points: Vec<f64>,
    #[serde(default)]
    pub alphas: Vec<f64>,
    pub p: f64,
}

impl WeightSpec {
    pub fn new(points: Vec<f64>, alphas: Vec<f64>, p: f64) -> Result<Self> {
        let w = WeightSpec { points, alphas, p };
        w.validate()?;
        Ok(w)
    }

    /// `rho = 1`.
    pub fn unit(p: f64) -> Self {
        WeightSpec {
            points: vec![],
            alphas: vec![],
            p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.alphas.len() {
            return Err(Error::Parameter(format!(
                "{} singular points but {} exponents",
                self.points.len(),
                self.alphas.len()
            )));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::Parameter(format!(
                "p must lie in (1, inf), got {}",
                self.p
            )));
        }
        for (i, a) in self.points.iter().enumerate() {
            if !a.is_finite() || !self.alphas[i].is_finite() {
                return Err(Error::Parameter("non-finite weight data".into()));
            }
            for b in &self.points[i + 1..] {
                if a == b {
                    return Err(Error::Parameter(format!("singular point {a} listed twice")));
                }
            }
        }
        Ok(())
    }

    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn is_unit(&self) -> bool {
        self.alphas.iter().all(|a| *a == 0.0)
    }

    /// Same singular points with exponents multiplied by `c`, i.e. `rho^c`.
    pub fn powered(&self, c: f64) -> WeightSpec {
        WeightSpec {
            points: self.points.clone(),
            alphas: self.alphas.iter().map(|a| a * c).collect(),
            p: self.p,
        }
    }

    /// Pointwise value. A singular point returns 0 for positive exponents and
    /// an error for negative ones.
    pub fn eval(&self, s: f64) -> Result<f64> {
        let mut v = 1.0;
        for (t, a) in self.points.iter().zip(&self.alphas) {
            let d = (s - t).abs();
            if d == 0.0 {
                if *a < 0.0 {
                    return Err(Error::Singularity { s, alpha: *a });
                }
                if *a > 0.0 {
                    return Ok(0.0);
                }
                continue;
            }
            v *= d.powf(*a);
        }
        Ok(v)
    }

    /// Whether the node at `s` sits on a singular point (grid tolerance `h`).
    fn hits_singularity(&self, s: f64, h: f64) -> bool {
        self.points
            .iter()
            .zip(&self.alphas)
            .any(|(t, a)| *a != 0.0 && (s - t).abs() < 1e-9 * h.max(1.0))
    }

    /// Value used by the quadrature at node `s`: singular nodes take the value
    /// half a step away so that integrable singularities stay finite.
    pub fn quadrature_value(&self, s: f64, h: f64) -> f64 {
        if self.hits_singularity(s, h) {
            let right = s + 0.5 * h;
            if !self.hits_singularity(right, h) {
                return self.eval(right).unwrap_or(f64::INFINITY);
            }
            return self.eval(s - 0.5 * h).unwrap_or(f64::INFINITY);
        }
        self.eval(s).unwrap_or(f64::INFINITY)
    }

    /// Quadrature values at all nodes of `curve`.
    pub fn node_values(&self, curve: &DiscretizedCurve) -> Vec<f64> {
        curve
            .s
            .iter()
            .map(|&s| self.quadrature_value(s, curve.h))
            .collect()
    }
}

/// Convenience wrapper around [`WeightSpec::eval`].
pub fn weight_eval(w: &WeightSpec, s: f64) -> Result<f64> {
    w.eval(s)
}

/// `(sum_j |f_j|^p rho_j |z'_j| h)^{1/p}`; here `p >= 1` is allowed.
pub fn weighted_norm(f: &[C64], curve: &DiscretizedCurve, w: &WeightSpec, p: f64) -> Result<f64> {
    if f.len() != curve.len() {
        return Err(Error::Data(format!(
            "{} samples on a {}-node curve",
            f.len(),
            curve.len()
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!(
            "norm exponent must be >= 1, got {p}"
        )));
    }
    if f.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Data("non-finite boundary samples".into()));
    }
    let rho = node_rho_for_norm(w, curve);
    let sum: f64 = (0..curve.len())
        .map(|j| f[j].norm().powf(p) * rho[j] * curve.arc_weight(j))
        .sum();
    Ok(sum.powf(1.0 / p))
}

// the offset is only needed where the weight blows up
fn node_rho_for_norm(w: &WeightSpec, curve: &DiscretizedCurve) -> Vec<f64> {
    curve
        .s
        .iter()
        .map(|&s| match w.eval(s) {
            Ok(v) if v.is_finite() => v,
            _ => w.quadrature_value(s, curve.h),
        })
        .collect()
}

/// A_p quotient `(r^-1 int rho)(r^-1 int rho^{-1/(p-1)})^{p-1}` maximized over
/// node centers and radii on a single grid.
pub fn ap_estimate(
    w: &WeightSpec,
    curve: &DiscretizedCurve,
    centers: &[usize],
    radii: &[f64],
) -> Result<f64> {
    if radii.is_empty() || centers.is_empty() {
        return Err(Error::Parameter("empty center set or radii grid".into()));
    }
    let p = w.p;
    let rho = w.node_values(curve);
    let dual: Vec<f64> = rho.iter().map(|r| r.powf(-1.0 / (p - 1.0))).collect();
    let arc: Vec<f64> = (0..curve.len()).map(|j| curve.arc_weight(j)).collect();
    let pairs: Vec<(usize, f64)> = centers
        .iter()
        .flat_map(|&c| radii.iter().map(move |&r| (c, r)))
        .collect();
    let best = pairs
        .par_iter()
        .map(|&(c, r)| {
            let zc = curve.z[c % curve.len()];
            let (mut i1, mut i2) = (0.0, 0.0);
            for j in 0..curve.len() {
                if (curve.z[j] - zc).norm() < r {
                    i1 += rho[j] * arc[j];
                    i2 += dual[j] * arc[j];
                }
            }
            (i1 / r) * (i2 / r).powf(p - 1.0)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MuckenhouptScan {
    /// Estimate on the supplied grid.
    pub ap_estimate: f64,
    /// Estimates at `N`, `2N` and `4N`.
    pub refinements: Vec<f64>,
    pub in_class: bool,
}

/// Numerical A_p test. Centers are arc parameters; the scan is repeated on
/// grids of `N`, `2N` and `4N` nodes and the weight is declared in class when
/// the estimate grows by less than 10% at each doubling.
pub fn muckenhoupt_scan(
    w: &WeightSpec,
    curve: &DiscretizedCurve,
    center_params: &[f64],
    radii: &[f64],
) -> Result<MuckenhouptScan> {
    w.validate()?;
    let mut refinements = Vec::with_capacity(3);
    for factor in [1usize, 2, 4] {
        let grid = if factor == 1 {
            curve.clone()
        } else {
            resample(&curve.spec, curve.len() * factor)?
        };
        let centers: Vec<usize> = center_params
            .iter()
            .map(|&s| grid.nearest_node(s))
            .collect();
        refinements.push(ap_estimate(w, &grid, &centers, radii)?);
    }
    let in_class = refinements.iter().all(|e| e.is_finite())
        && refinements.windows(2).all(|pair| pair[1] < 1.1 * pair[0]);
    Ok(MuckenhouptScan {
        ap_estimate: refinements[0],
        refinements,
        in_class,
    })
}

/// Default scan family: centers at every singular point plus a uniform set,
/// radii geometric on `[h, diam]`.
pub fn default_scan_family(w: &WeightSpec, curve: &DiscretizedCurve) -> (Vec<f64>, Vec<f64>) {
    let mut centers = crate::curve::uniform_centers(&curve.spec, 16);
    centers.extend(w.points.iter().copied());
    let radii = crate::curve::geometric_radii(curve.h, curve.diameter(), 24);
    (centers, radii)
}

/// A point of the merged set `{tau_k}`: phase jumps and weight singularities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MergedPoint {
    pub s: f64,
    pub jump: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub in_window: bool,
}

/// Per-list conditions for disjoint jump and singular sets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DisjointCheck {
    /// `-1/q < h_k/2pi < 1/p` for every jump.
    pub jumps_ok: bool,
    /// `-1 < alpha_i < upper` for every singular point.
    pub alphas_ok: bool,
    /// The bound used for `alpha_i`: `p/q` by default, `q/p` in literal mode.
    pub alpha_upper: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub p: f64,
    pub points: Vec<MergedPoint>,
    pub window_ok: bool,
    /// Present only when no jump coincides with a singular point.
    pub disjoint: Option<DisjointCheck>,
    /// `alpha_k < q/p` for every singular point (extra hypothesis of the
    /// non-homogeneous problem).
    pub alphas_below_q_over_p: bool,
    pub ap_estimate: Option<f64>,
    pub violations: Vec<String>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Options for [`beta_exponents`].
#[derive(Clone, Copy, Debug, Default)]
pub struct BetaOptions {
    /// Use the literal `alpha_i < q/p` bound in the disjoint-case check.
    pub literal_disjoint_bound: bool,
}

/// Merge weight points and jump points `(s_k, h_k)` and compute
/// `beta_k = -(p/2pi) h + alpha` at each merged point, with the window
/// `-1 < beta_k < p/q`.
pub fn beta_exponents(
    w: &WeightSpec,
    jumps: &[(f64, f64)],
    length: f64,
    opts: BetaOptions,
) -> Result<AdmissibilityReport> {
    w.validate()?;
    let p = w.p;
    let q = w.q();
    let tol = COINCIDENCE_TOL * length;
    let same = |a: f64, b: f64| {
        let d = (a - b).abs();
        d < tol || (length - d).abs() < tol
    };
    let mut points: Vec<MergedPoint> = Vec::new();
    for &(s, h) in jumps {
        match points.iter_mut().find(|m| same(m.s, s)) {
            Some(m) => m.jump = Some(m.jump.unwrap_or(0.0) + h),
            None => points.push(MergedPoint {
                s,
                jump: Some(h),
                alpha: None,
                beta: 0.0,
                in_window: true,
            }),
        }
    }
    let mut coincident = false;
    for (&t, &a) in w.points.iter().zip(&w.alphas) {
        match points.iter_mut().find(|m| same(m.s, t)) {
            Some(m) => {
                coincident |= m.jump.is_some();
                m.alpha = Some(m.alpha.unwrap_or(0.0) + a);
            }
            None => points.push(MergedPoint {
                s: t,
                jump: None,
                alpha: Some(a),
                beta: 0.0,
                in_window: true,
            }),
        }
    }
    points.sort_by(|a, b| a.s.total_cmp(&b.s));
    let mut violations = Vec::new();
    for m in &mut points {
        m.beta = -(p / (2.0 * PI)) * m.jump.unwrap_or(0.0) + m.alpha.unwrap_or(0.0);
        m.in_window = -1.0 < m.beta && m.beta < p / q;
        if !m.in_window {
            violations.push(format!(
                "beta = {:.6} at s = {:.6} outside (-1, {:.6})",
                m.beta,
                m.s,
                p / q
            ));
        }
    }
    let window_ok = points.iter().all(|m| m.in_window);
    let disjoint = (!coincident).then(|| {
        let alpha_upper = if opts.literal_disjoint_bound {
            q / p
        } else {
            p / q
        };
        DisjointCheck {
            jumps_ok: jumps.iter().all(|&(_, h)| {
                let x = h / (2.0 * PI);
                -1.0 / q < x && x < 1.0 / p
            }),
            alphas_ok: w.alphas.iter().all(|&a| -1.0 < a && a < alpha_upper),
            alpha_upper,
        }
    });
    Ok(AdmissibilityReport {
        p,
        points,
        window_ok,
        disjoint,
        alphas_below_q_over_p: w.alphas.iter().all(|&a| a < q / p),
        ap_estimate: None,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{geometric_radii, CurveSpec};

    fn circle(n: usize) -> DiscretizedCurve {
        resample(&CurveSpec::circle(1.0), n).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(WeightSpec::unit(2.0).eval(1.234).unwrap(), 1.0);
        let w = WeightSpec::new(vec![PI], vec![0.5], 2.0).unwrap();
        assert!((w.eval(PI + 4.0).unwrap() - 2.0).abs() < 1e-15);
        let w = WeightSpec::new(vec![1.0, 2.0], vec![1.0, -0.5], 2.0).unwrap();
        assert!((w.eval(3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(w.eval(2.0), Err(Error::Singularity { .. })));
        assert_eq!(w.eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn norm_examples() {
        let c = circle(256);
        let one = vec![C64::new(1.0, 0.0); 256];
        let n = weighted_norm(&one, &c, &WeightSpec::unit(2.0), 2.0).unwrap();
        assert!((n - (2.0 * PI).sqrt()).abs() < 1e-12);
        let w = WeightSpec::new(vec![PI], vec![1.0], 2.0).unwrap();
        let n = weighted_norm(&one, &c, &w, 1.0).unwrap();
        assert!((n - PI * PI).abs() < 1e-10);
        let n = weighted_norm(&c.z, &c, &WeightSpec::unit(2.0), 4.0).unwrap();
        assert!((n - (2.0 * PI).powf(0.25)).abs() < 1e-12);
        let mut bad = one.clone();
        bad[3] = C64::new(f64::NAN, 0.0);
        assert!(matches!(
            weighted_norm(&bad, &c, &w, 2.0),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn constant_weight_scan_matches_node_count() {
        let c = circle(256);
        let r = 0.5;
        let est = ap_estimate(&WeightSpec::unit(2.0), &c, &[0], &[r]).unwrap();
        let inside = c.z.iter().filter(|z| (*z - c.z[0]).norm() < r).count() as f64;
        assert!((est - (inside * c.h / r).powi(2)).abs() < 1e-12);
        let (centers, radii) = default_scan_family(&WeightSpec::unit(2.0), &c);
        assert!(
            muckenhoupt_scan(&WeightSpec::unit(2.0), &c, &centers, &radii)
                .unwrap()
                .in_class
        );
    }

    #[test]
    fn scan_is_scale_invariant() {
        let c = circle(256);
        let w = WeightSpec::new(vec![PI], vec![0.5], 2.0).unwrap();
        let centers: Vec<usize> = (0..256).step_by(8).collect();
        let radii = geometric_radii(c.h, 2.0, 12);
        let a = ap_estimate(&w, &c, &centers, &radii).unwrap();
        // c * rho: add a far-away factor |s - t|^0 is a no-op, so scale nodes directly
        let rho = w.node_values(&c);
        let scaled: Vec<f64> = rho.iter().map(|r| 7.5 * r).collect();
        let dual: Vec<f64> = scaled.iter().map(|r| 1.0 / r).collect();
        let mut best: f64 = 0.0;
        for &ci in &centers {
            for &r in &radii {
                let (mut i1, mut i2) = (0.0, 0.0);
                for j in 0..256 {
                    if (c.z[j] - c.z[ci]).norm() < r {
                        i1 += scaled[j] * c.h;
                        i2 += dual[j] * c.h;
                    }
                }
                best = best.max(i1 * i2 / (r * r));
            }
        }
        assert!((a - best).abs() < 1e-12 * a);
    }

    #[test]
    fn quadratic_weight_scan_blows_up() {
        let c = circle(256);
        let w = WeightSpec::new(vec![PI], vec![2.0], 2.0).unwrap();
        let (centers, radii) = default_scan_family(&w, &c);
        let scan = muckenhoupt_scan(&w, &c, &centers, &radii).unwrap();
        assert!(!scan.in_class);
        for pair in scan.refinements.windows(2) {
            assert!(pair[1] > 1.9 * pair[0], "{:?}", scan.refinements);
        }
    }

    #[test]
    fn beta_examples() {
        let w = WeightSpec::new(vec![1.0], vec![0.5], 2.0).unwrap();
        let r = beta_exponents(&w, &[], 2.0 * PI, BetaOptions::default()).unwrap();
        assert_eq!(r.points.len(), 1);
        assert!((r.points[0].beta - 0.5).abs() < 1e-15 && r.window_ok);

        let w = WeightSpec::new(vec![1.0], vec![0.0], 2.0).unwrap();
        let r = beta_exponents(&w, &[(1.0, PI)], 2.0 * PI, BetaOptions::default()).unwrap();
        assert_eq!(r.points.len(), 1);
        assert!((r.points[0].beta + 1.0).abs() < 1e-15);
        assert!(!r.window_ok && !r.violations.is_empty());

        let w = WeightSpec::new(vec![2.0], vec![0.5], 2.0).unwrap();
        let r = beta_exponents(&w, &[(1.0, PI / 2.0)], 2.0 * PI, BetaOptions::default()).unwrap();
        assert!((r.points[0].beta + 0.5).abs() < 1e-15);
        assert!((r.points[1].beta - 0.5).abs() < 1e-15);
        assert!(r.window_ok);
        let d = r.disjoint.unwrap();
        assert!(d.jumps_ok && d.alphas_ok);
    }

    #[test]
    fn zero_jumps_leave_alphas() {
        let w = WeightSpec::new(vec![0.5, 2.0, 4.0], vec![0.3, -0.2, 0.7], 3.0).unwrap();
        let jumps = [(0.5, 0.0), (2.0, 0.0)];
        let r = beta_exponents(&w, &jumps, 2.0 * PI, BetaOptions::default()).unwrap();
        for (m, a) in r.points.iter().zip(&w.alphas) {
            assert_eq!(m.beta, *a);
        }
    }

    #[test]
    fn near_coincident_points_merge() {
        let w = WeightSpec::new(vec![1.0 + 1e-12], vec![0.5], 2.0).unwrap();
        let r = beta_exponents(&w, &[(1.0, PI / 2.0)], 2.0 * PI, BetaOptions::default()).unwrap();
        assert_eq!(r.points.len(), 1);
        assert!(r.points[0].beta.abs() < 1e-15);
        assert!(r.disjoint.is_none());
    }

    #[test]
    fn json_shape() {
        let w: WeightSpec =
            serde_json::from_str(r#"{"points":[3.25],"alphas":[0.5],"p":2.0}"#).unwrap();
        assert_eq!(w.points, vec![3.25]);
        assert!(WeightSpec::new(vec![1.0], vec![], 2.0).is_err());
        assert!(WeightSpec::new(vec![], vec![], 1.0).is_err());
    }
}
