//! Parametric Jordan curves, arc-length discretization and a numerical
//! Carleson (regularity) estimator.
//!
//! Every curve is traversed in the positive direction (interior on the
//! left) and parametrized by arc length `s in [0, S]`, starting at the
//! point `a = z(0)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use crate::spectral::{dft_coefficients, TrigInterpolant};
use crate::{Error, Result, C64};

/// Smallest accepted node count.
pub const MIN_NODES: usize = 4;

/// Curve description. Catalog curves carry closed forms; custom curves are
/// tabulated in arc length.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CurveSpec {
    Circle {
        #[serde(default = "one")]
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    Custom(TabulatedCurve),
}

fn one() -> f64 {
    1.0
}

impl PartialEq for CurveSpec {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (CurveSpec::Circle { radius: r1 }, CurveSpec::Circle { radius: r2 }) => r1 == r2,
            (CurveSpec::Ellipse { a: a1, b: b1 }, CurveSpec::Ellipse { a: a2, b: b2 }) => {
                a1 == a2 && b1 == b2
            }
            (CurveSpec::Custom(t1), CurveSpec::Custom(t2)) => {
                t1.z == t2.z && t1.length == t2.length
            }
            _ => false,
        }
    }
}

impl CurveSpec {
    pub fn circle(radius: f64) -> Self {
        CurveSpec::Circle { radius }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        CurveSpec::Ellipse { a, b }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CurveSpec::Circle { radius } if !(radius.is_finite() && *radius > 0.0) => Err(
                Error::Parameter(format!("circle radius must be positive, got {radius}")),
            ),
            CurveSpec::Ellipse { a, b }
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) =>
            {
                Err(Error::Parameter(format!(
                    "ellipse semi-axes must be positive, got ({a}, {b})"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Total arc length `S`.
    pub fn length(&self) -> f64 {
        match self {
            CurveSpec::Circle { radius } => 2.0 * PI * radius,
            CurveSpec::Ellipse { a, b } => EllipseArc::new(*a, *b).length(),
            CurveSpec::Custom(t) => t.length,
        }
    }

    /// Point and unit tangent `(z(s), z'(s))` at an arbitrary arc parameter.
    pub fn point(&self, s: f64) -> (C64, C64) {
        match self {
            CurveSpec::Circle { radius } => {
                let e = C64::from_polar(1.0, s / radius);
                (e * radius, e * C64::i())
            }
            CurveSpec::Ellipse { a, b } => EllipseArc::new(*a, *b).point(s),
            CurveSpec::Custom(t) => t.point(s),
        }
    }

    /// Diameter of the curve (largest chord).
    pub fn diameter(&self) -> f64 {
        match self {
            CurveSpec::Circle { radius } => 2.0 * radius,
            CurveSpec::Ellipse { a, b } => 2.0 * a.max(*b),
            CurveSpec::Custom(t) => {
                let z = &t.z;
                let mut d: f64 = 0.0;
                for i in 0..z.len() {
                    for j in (i + 1)..z.len() {
                        d = d.max((z[i] - z[j]).norm());
                    }
                }
                d
            }
        }
    }

    /// Whether `z` lies strictly inside the curve. Catalog curves use their
    /// implicit equation; custom curves use the winding number of the table.
    pub fn contains(&self, z: C64) -> bool {
        match self {
            CurveSpec::Circle { radius } => z.norm() < *radius,
            CurveSpec::Ellipse { a, b } => (z.re / a).powi(2) + (z.im / b).powi(2) < 1.0,
            CurveSpec::Custom(t) => winding_number(&t.z, z).round() as i64 != 0,
        }
    }

    /// A point known to lie in the interior region.
    pub fn interior_probe(&self) -> C64 {
        match self {
            CurveSpec::Custom(t) => t.centroid(),
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn label(&self) -> String {
        match self {
            CurveSpec::Circle { radius } => format!("circle:{radius}"),
            CurveSpec::Ellipse { a, b } => format!("ellipse:{a},{b}"),
            CurveSpec::Custom(t) => format!("custom[{} nodes]", t.z.len()),
        }
    }
}

/// Arc-length bookkeeping for the ellipse `a cos t + i b sin t`.
///
/// The speed `|z'(t)|` is even and pi-periodic, so the cumulative length is
/// `s(t) = v0 t + sum_k v_k sin(2kt) / (2k)` with `v_k` from a cosine series.
#[derive(Clone, Debug)]
pub struct EllipseArc {
    a: f64,
    b: f64,
    mean_speed: f64,
    cosine: Vec<f64>,
}

impl EllipseArc {
    pub fn new(a: f64, b: f64) -> Self {
        let m = 2048;
        let samples: Vec<C64> = (0..m)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / m as f64;
                C64::new(Self::speed_of(a, b, t), 0.0)
            })
            .collect();
        let c = dft_coefficients(&samples);
        let mean_speed = c[0].re;
        let mut cosine = Vec::new();
        for k in 1..(m / 4) {
            let vk = 2.0 * c[2 * k].re;
            if vk.abs() < 1e-18 * mean_speed {
                break;
            }
            cosine.push(vk);
        }
        EllipseArc {
            a,
            b,
            mean_speed,
            cosine,
        }
    }

    fn speed_of(a: f64, b: f64, t: f64) -> f64 {
        (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt()
    }

    pub fn speed(&self, t: f64) -> f64 {
        Self::speed_of(self.a, self.b, t)
    }

    pub fn length(&self) -> f64 {
        2.0 * PI * self.mean_speed
    }

    /// Arc length from `t = 0` to `t`.
    pub fn s_of_t(&self, t: f64) -> f64 {
        let mut s = self.mean_speed * t;
        for (k, vk) in self.cosine.iter().enumerate() {
            let m = 2.0 * (k + 1) as f64;
            s += vk * (m * t).sin() / m;
        }
        s
    }

    /// Inverse of [`Self::s_of_t`] by Newton iteration.
    pub fn t_of_s(&self, s: f64) -> f64 {
        let len = self.length();
        let mut t = 2.0 * PI * s / len;
        for _ in 0..50 {
            let dt = (self.s_of_t(t) - s) / self.speed(t);
            t -= dt;
            if dt.abs() < 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        t
    }

    pub fn point_at_angle(&self, t: f64) -> (C64, C64) {
        let z = C64::new(self.a * t.cos(), self.b * t.sin());
        let dz = C64::new(-self.a * t.sin(), self.b * t.cos());
        (z, dz)
    }

    pub fn point(&self, s: f64) -> (C64, C64) {
        let t = self.t_of_s(s);
        let (z, dz) = self.point_at_angle(t);
        (z, dz / dz.norm())
    }
}

/// Custom curve tabulated on a uniform arc-length grid. Optional columns give
/// the boundary values of the exterior map (`phi`) and of the interior map
/// (`psi`) at the same nodes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TabulatedRaw", into = "TabulatedRaw")]
pub struct TabulatedCurve {
    pub length: f64,
    pub z: Vec<C64>,
    pub dz: Vec<C64>,
    pub phi: Option<Vec<C64>>,
    pub psi: Option<Vec<C64>>,
    interp: Arc<(TrigInterpolant, TrigInterpolant)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TabulatedRaw {
    length: f64,
    z: Vec<C64>,
    dz: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    psi: Option<Vec<C64>>,
}

impl TryFrom<TabulatedRaw> for TabulatedCurve {
    type Error = Error;
    fn try_from(r: TabulatedRaw) -> Result<Self> {
        TabulatedCurve::new(r.length, r.z, r.dz, r.phi, r.psi)
    }
}

impl From<TabulatedCurve> for TabulatedRaw {
    fn from(t: TabulatedCurve) -> Self {
        TabulatedRaw {
            length: t.length,
            z: t.z,
            dz: t.dz,
            phi: t.phi,
            psi: t.psi,
        }
    }
}

impl TabulatedCurve {
    pub fn new(
        length: f64,
        z: Vec<C64>,
        dz: Vec<C64>,
        phi: Option<Vec<C64>>,
        psi: Option<Vec<C64>>,
    ) -> Result<Self> {
        let n = z.len();
        if n < MIN_NODES || dz.len() != n {
            return Err(Error::Data(format!(
                "tabulated curve needs at least {MIN_NODES} rows with matching derivative columns"
            )));
        }
        for col in [&phi, &psi].into_iter().flatten() {
            if col.len() != n {
                return Err(Error::Data(
                    "boundary correspondence column length mismatch".into(),
                ));
            }
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Data(format!(
                "curve length must be positive, got {length}"
            )));
        }
        let h = length / n as f64;
        for (j, d) in dz.iter().enumerate() {
            let speed = d.norm();
            if speed < 1e-12 {
                return Err(Error::Cusp {
                    s: j as f64 * h,
                    speed,
                });
            }
            if (speed - 1.0).abs() > 1e-3 {
                return Err(Error::Data(format!(
                    "custom curves must be parametrized by arc length: |z'| = {speed} at row {j}"
                )));
            }
        }
        if signed_area(&z) <= 0.0 {
            return Err(Error::Data(
                "custom curve must be positively oriented".into(),
            ));
        }
        let interp = Arc::new((
            TrigInterpolant::new(&z, length),
            TrigInterpolant::new(&dz, length),
        ));
        Ok(TabulatedCurve {
            length,
            z,
            dz,
            phi,
            psi,
            interp,
        })
    }

    /// Load from CSV with header `s,re_z,im_z,re_dz,im_dz[,re_phi,im_phi][,re_psi,im_psi]`.
    /// Rows are uniform in `s` starting at 0; the closing row `s = S` is
    /// omitted, so `S = N * (s_1 - s_0)`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let need = |name: &str| {
            col(name)
                .ok_or_else(|| Error::Data(format!("missing column {name} in {}", path.display())))
        };
        let (cs, crz, ciz, crd, cid) = (
            need("s")?,
            need("re_z")?,
            need("im_z")?,
            need("re_dz")?,
            need("im_dz")?,
        );
        let phi_cols = col("re_phi").zip(col("im_phi"));
        let psi_cols = col("re_psi").zip(col("im_psi"));
        let (mut s, mut z, mut dz, mut phi, mut psi) = (vec![], vec![], vec![], vec![], vec![]);
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .unwrap_or("")
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Data(format!("bad number in {}: {e}", path.display())))
            };
            s.push(num(cs)?);
            z.push(C64::new(num(crz)?, num(ciz)?));
            dz.push(C64::new(num(crd)?, num(cid)?));
            if let Some((r, i)) = phi_cols {
                phi.push(C64::new(num(r)?, num(i)?));
            }
            if let Some((r, i)) = psi_cols {
                psi.push(C64::new(num(r)?, num(i)?));
            }
        }
        if s.len() < MIN_NODES {
            return Err(Error::Data("too few rows in custom curve table".into()));
        }
        let h = s[1] - s[0];
        if s[0].abs() > 1e-12 || h <= 0.0 {
            return Err(Error::Data(
                "custom curve rows must start at s = 0 and increase".into(),
            ));
        }
        for (j, sj) in s.iter().enumerate() {
            if (sj - j as f64 * h).abs() > 1e-9 * (1.0 + sj.abs()) {
                return Err(Error::Data(format!("non-uniform arc parameter at row {j}")));
            }
        }
        let length = h * s.len() as f64;
        let opt = |v: Vec<C64>| if v.is_empty() { None } else { Some(v) };
        TabulatedCurve::new(length, z, dz, opt(phi), opt(psi))
    }

    pub fn point(&self, s: f64) -> (C64, C64) {
        (self.interp.0.eval(s), self.interp.1.eval(s))
    }

    fn centroid(&self) -> C64 {
        let z = &self.z;
        let n = z.len();
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for j in 0..n {
            let (p, q) = (z[j], z[(j + 1) % n]);
            let cross = p.re * q.im - q.re * p.im;
            a += cross;
            cx += (p.re + q.re) * cross;
            cy += (p.im + q.im) * cross;
        }
        C64::new(cx / (3.0 * a), cy / (3.0 * a))
    }
}

fn signed_area(z: &[C64]) -> f64 {
    let n = z.len();
    (0..n)
        .map(|j| {
            let (p, q) = (z[j], z[(j + 1) % n]);
            p.re * q.im - q.re * p.im
        })
        .sum::<f64>()
        / 2.0
}

/// Winding number of the closed polygon through `nodes` around `point`.
pub fn winding_number(nodes: &[C64], point: C64) -> f64 {
    let n = nodes.len();
    let mut total = 0.0;
    for j in 0..n {
        let a = nodes[j] - point;
        let b = nodes[(j + 1) % n] - point;
        total += (b / a).arg();
    }
    total / (2.0 * PI)
}

/// Uniform arc-length discretization `(s_j, z_j, z'_j)`, `s_j = j h`.
#[derive(Clone, Debug)]
pub struct DiscretizedCurve {
    pub spec: CurveSpec,
    pub length: f64,
    pub h: f64,
    pub s: Vec<f64>,
    pub z: Vec<C64>,
    pub dz: Vec<C64>,
    diameter: f64,
}

impl DiscretizedCurve {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Trapezoid weight `|z'_j| h` of node `j` for integrals against `|d xi|`.
    pub fn arc_weight(&self, j: usize) -> f64 {
        self.dz[j].norm() * self.h
    }

    /// Trapezoid approximation of the curve length.
    pub fn quadrature_length(&self) -> f64 {
        (0..self.len()).map(|j| self.arc_weight(j)).sum()
    }

    pub fn winding_number(&self, point: C64) -> f64 {
        winding_number(&self.z, point)
    }

    /// Distance from `point` to the nearest node.
    pub fn node_distance(&self, point: C64) -> f64 {
        self.z
            .iter()
            .map(|z| (z - point).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Node index nearest to the arc parameter `s` (periodic).
    pub fn nearest_node(&self, s: f64) -> usize {
        let n = self.len();
        ((s.rem_euclid(self.length) / self.h).round() as usize) % n
    }
}

/// Discretize `spec` with `n` nodes uniformly spaced in arc length.
pub fn resample(spec: &CurveSpec, n: usize) -> Result<DiscretizedCurve> {
    spec.validate()?;
    if n < MIN_NODES || !n.is_power_of_two() {
        return Err(Error::Sizing(format!(
            "node count must be a power of two >= {MIN_NODES}, got {n}"
        )));
    }
    let length = spec.length();
    let h = length / n as f64;
    let s: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
    let (z, dz): (Vec<C64>, Vec<C64>) = match spec {
        CurveSpec::Custom(t) if t.z.len() % n == 0 => {
            let stride = t.z.len() / n;
            (0..n).map(|j| (t.z[j * stride], t.dz[j * stride])).unzip()
        }
        CurveSpec::Ellipse { a, b } => {
            let arc = EllipseArc::new(*a, *b);
            s.iter().map(|&sj| arc.point(sj)).unzip()
        }
        _ => s.iter().map(|&sj| spec.point(sj)).unzip(),
    };
    for (j, d) in dz.iter().enumerate() {
        if d.norm() < 1e-12 {
            return Err(Error::Cusp {
                s: s[j],
                speed: d.norm(),
            });
        }
    }
    if let CurveSpec::Custom(_) = spec {
        check_simple_polygon(&z)?;
    }
    Ok(DiscretizedCurve {
        diameter: spec.diameter(),
        spec: spec.clone(),
        length,
        h,
        s,
        z,
        dz,
    })
}

fn check_simple_polygon(z: &[C64]) -> Result<()> {
    let n = z.len();
    let cross = |a: C64, b: C64| a.re * b.im - a.im * b.re;
    for i in 0..n {
        let (p1, p2) = (z[i], z[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (q1, q2) = (z[j], z[(j + 1) % n]);
            let d1 = cross(p2 - p1, q1 - p1);
            let d2 = cross(p2 - p1, q2 - p1);
            let d3 = cross(q2 - q1, p1 - q1);
            let d4 = cross(q2 - q1, p2 - q1);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return Err(Error::Data(format!(
                    "curve self-intersects between segments {i} and {j}"
                )));
            }
        }
    }
    Ok(())
}

/// Geometric grid of `count` radii from `r_min` to `r_max` inclusive.
pub fn geometric_radii(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![r_max];
    }
    let ratio = (r_max / r_min).powf(1.0 / (count - 1) as f64);
    let mut radii: Vec<f64> = (0..count).map(|k| r_min * ratio.powi(k as i32)).collect();
    radii[count - 1] = r_max;
    radii
}

/// Arc length of the polygonal curve inside the open disc `|xi - center| < r`.
/// Each segment contributes its inside fraction times its parameter length.
pub fn arc_in_disc(curve: &DiscretizedCurve, center: C64, r: f64) -> f64 {
    let n = curve.len();
    let mut total = 0.0;
    for j in 0..n {
        let p = curve.z[j] - center;
        let d = curve.z[(j + 1) % n] - curve.z[j];
        let seg = 0.5 * (curve.arc_weight(j) + curve.arc_weight((j + 1) % n));
        total += seg * inside_fraction(p, d, r);
    }
    total
}

// fraction of t in [0,1] with |p + t d| < r
fn inside_fraction(p: C64, d: C64, r: f64) -> f64 {
    let a = d.norm_sqr();
    let b = 2.0 * (p.re * d.re + p.im * d.im);
    let c = p.norm_sqr() - r * r;
    if a == 0.0 {
        return if c < 0.0 { 1.0 } else { 0.0 };
    }
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let t1 = (-b - sq) / (2.0 * a);
    let t2 = (-b + sq) / (2.0 * a);
    (t2.min(1.0) - t1.max(0.0)).max(0.0)
}

/// Outcome of the Carleson scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub sup_ratio: f64,
    pub refined_sup_ratio: f64,
    pub relative_change: f64,
    pub is_regular: bool,
    /// Arc parameter of the maximizing center and the maximizing radius.
    pub argmax: (f64, f64),
}

/// `max |Gamma cap O_r(z_c)| / r` over the given node centers and radii.
/// Returns the maximum together with `(s_center, r)` where it is attained.
pub fn sup_ratio(
    curve: &DiscretizedCurve,
    centers: &[usize],
    radii: &[f64],
) -> Result<(f64, (f64, f64))> {
    if radii.is_empty() {
        return Err(Error::Parameter("empty radii grid".into()));
    }
    if centers.is_empty() {
        return Err(Error::Parameter("empty center set".into()));
    }
    let mut best = (f64::NEG_INFINITY, (0.0, 0.0));
    for &c in centers {
        let zc = curve.z[c % curve.len()];
        for &r in radii {
            let ratio = arc_in_disc(curve, zc, r) / r;
            if ratio > best.0 {
                best = (ratio, (curve.s[c % curve.len()], r));
            }
        }
    }
    Ok(best)
}

/// Carleson check: scans centers at the given arc parameters over `radii`
/// with `n` nodes and again with `2n`; regular when the estimate is finite
/// and moves by less than 5% under refinement.
pub fn check_regular(
    spec: &CurveSpec,
    n: usize,
    center_params: &[f64],
    radii: &[f64],
) -> Result<CarlesonReport> {
    let coarse = resample(spec, n)?;
    let fine = resample(spec, 2 * n)?;
    let pick = |c: &DiscretizedCurve| -> Vec<usize> {
        center_params.iter().map(|&s| c.nearest_node(s)).collect()
    };
    let (r1, arg) = sup_ratio(&coarse, &pick(&coarse), radii)?;
    let (r2, _) = sup_ratio(&fine, &pick(&fine), radii)?;
    let relative_change = (r2 - r1).abs() / r1.abs().max(f64::MIN_POSITIVE);
    Ok(CarlesonReport {
        sup_ratio: r1,
        refined_sup_ratio: r2,
        relative_change,
        is_regular: r1.is_finite() && r2.is_finite() && relative_change < 0.05,
        argmax: arg,
    })
}

/// Evenly spaced arc parameters, a convenient default center set.
pub fn uniform_centers(spec: &CurveSpec, count: usize) -> Vec<f64> {
    let len = spec.length();
    (0..count).map(|k| k as f64 * len / count as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = (m - a) / 6.0 * (f(a) + 4.0 * f(lm) + f(m));
        let right = (b - m) / 6.0 * (f(m) + 4.0 * f(rm) + f(b));
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            simpson(f, a, m, tol / 2.0, depth - 1) + simpson(f, m, b, tol / 2.0, depth - 1)
        }
    }

    #[test]
    fn circle_four_nodes() {
        let c = resample(&CurveSpec::circle(1.0), 4).unwrap();
        let want = [C64::new(1.0, 0.0), C64::i(), C64::new(-1.0, 0.0), -C64::i()];
        for (z, w) in c.z.iter().zip(want) {
            assert!((z - w).norm() < 1e-15);
        }
        assert_eq!(c.s[0], 0.0);
    }

    #[test]
    fn sizing_errors() {
        assert!(matches!(
            resample(&CurveSpec::circle(1.0), 7),
            Err(Error::Sizing(_))
        ));
        assert!(matches!(
            resample(&CurveSpec::circle(1.0), 2),
            Err(Error::Sizing(_))
        ));
    }

    #[test]
    fn ellipse_length_matches_adaptive_quadrature() {
        let (a, b) = (2.0, 1.0);
        let speed = |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
        let oracle = simpson(&speed, 0.0, 2.0 * PI, 1e-13, 40);
        let c = resample(&CurveSpec::ellipse(a, b), 256).unwrap();
        assert!((c.quadrature_length() - oracle).abs() < 1e-6 * oracle);
        assert!((c.length - oracle).abs() < 1e-10 * oracle);
    }

    #[test]
    fn ellipse_nodes_are_arc_length_spaced() {
        let arc = EllipseArc::new(2.0, 1.0);
        let c = resample(&CurveSpec::ellipse(2.0, 1.0), 64).unwrap();
        for j in 0..64 {
            let t = arc.t_of_s(c.s[j]);
            assert!((arc.s_of_t(t) - c.s[j]).abs() < 1e-12);
            assert!((c.dz[j].norm() - 1.0).abs() < 1e-14);
            let zz = c.z[j];
            assert!(((zz.re / 2.0).powi(2) + zz.im.powi(2) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn circle_nodes_on_radius() {
        let c = resample(&CurveSpec::circle(2.5), 128).unwrap();
        assert!(c.z.iter().all(|z| (z.norm() - 2.5).abs() < 1e-14));
    }

    #[test]
    fn interior_winding_is_positive() {
        for spec in [
            CurveSpec::circle(1.0),
            CurveSpec::ellipse(2.0, 1.0),
            CurveSpec::ellipse(1.0, 3.0),
        ] {
            let c = resample(&spec, 128).unwrap();
            assert!((c.winding_number(spec.interior_probe()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reversed_custom_curve_is_rejected() {
        let n = 64;
        let len = 2.0 * PI;
        let z: Vec<C64> = (0..n)
            .map(|j| C64::from_polar(1.0, -(j as f64) * len / n as f64))
            .collect();
        let dz: Vec<C64> = z.iter().map(|z| -C64::i() * z).collect();
        assert!(TabulatedCurve::new(len, z, dz, None, None).is_err());
    }

    #[test]
    fn custom_cusp_rejected() {
        let n = 16;
        let len = 2.0 * PI;
        let z: Vec<C64> = (0..n)
            .map(|j| C64::from_polar(1.0, j as f64 * len / n as f64))
            .collect();
        let mut dz: Vec<C64> = z.iter().map(|z| C64::i() * z).collect();
        dz[3] = C64::new(0.0, 0.0);
        assert!(matches!(
            TabulatedCurve::new(len, z, dz, None, None),
            Err(Error::Cusp { .. })
        ));
    }

    #[test]
    fn carleson_circle_whole_range() {
        let spec = CurveSpec::circle(1.0);
        let c = resample(&spec, 1024).unwrap();
        let radii = geometric_radii(c.h, 2.0, 40);
        let centers: Vec<usize> = (0..1024).step_by(64).collect();
        let (ratio, (_, r)) = sup_ratio(&c, &centers, &radii).unwrap();
        // oracle: 4 asin(r/2)/r is increasing on (0, 2] and equals pi at r = 2
        assert!((ratio - PI).abs() < 0.02 * PI, "ratio {ratio}");
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn carleson_circle_small_radii() {
        let spec = CurveSpec::circle(1.0);
        let c = resample(&spec, 1024).unwrap();
        let radii = geometric_radii(c.h, 0.1, 30);
        let centers: Vec<usize> = (0..1024).step_by(128).collect();
        let (ratio, _) = sup_ratio(&c, &centers, &radii).unwrap();
        let oracle = radii
            .iter()
            .map(|r| 4.0 * (r / 2.0).asin() / r)
            .fold(0.0, f64::max);
        assert!((ratio - 2.0).abs() < 0.04, "ratio {ratio}");
        assert!((ratio - oracle).abs() < 0.02 * oracle);
    }

    #[test]
    fn carleson_ellipse_regular_and_empty_radii() {
        let spec = CurveSpec::ellipse(2.0, 1.0);
        let centers = uniform_centers(&spec, 16);
        let radii = geometric_radii(0.02, 4.0, 24);
        let rep = check_regular(&spec, 256, &centers, &radii).unwrap();
        assert!(rep.is_regular, "{rep:?}");
        assert!(matches!(
            check_regular(&spec, 256, &centers, &[]),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn refining_radii_never_lowers_sup() {
        let c = resample(&CurveSpec::ellipse(2.0, 1.0), 256).unwrap();
        let centers: Vec<usize> = (0..256).step_by(16).collect();
        let coarse = geometric_radii(0.05, 4.0, 8);
        let mut fine = geometric_radii(0.05, 4.0, 29);
        fine.extend(&coarse);
        let (a, _) = sup_ratio(&c, &centers, &coarse).unwrap();
        let (b, _) = sup_ratio(&c, &centers, &fine).unwrap();
        assert!(b >= a);
    }

    #[test]
    fn ellipse_spec_roundtrips_through_json() {
        let spec: CurveSpec =
            serde_json::from_str(r#"{"kind":"ellipse","a":2.0,"b":1.0}"#).unwrap();
        assert_eq!(spec, CurveSpec::ellipse(2.0, 1.0));
        let circle: CurveSpec = serde_json::from_str(r#"{"kind":"circle"}"#).unwrap();
        assert_eq!(circle, CurveSpec::circle(1.0));
    }
}
