//! Conformal maps of the exterior (`phi`) and interior (`psi`) of a curve
//! onto the exterior of the unit disc, their inverses, and continuous
//! branches of real powers along sample paths.
//!
//! * `phi(z) = gamma z + gamma_0 + gamma_1 / z + ...`, `gamma > 0`.
//! * `psi(z) = alpha / z + alpha_0 + alpha_1 z + ...`, `alpha > 0`.
//!
//! Catalog curves are evaluated in closed form (the ellipse interior uses a
//! quotient of Jacobi theta functions); custom curves are evaluated through
//! a Laurent series of the inverse map fitted to a supplied boundary
//! correspondence, with Newton iteration for the forward map.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::curve::{CurveSpec, EllipseArc, TabulatedCurve};
use crate::spectral::{dft_coefficients, frequency, wrap_angle, TrigInterpolant};
use crate::{Error, Result, C64};

/// Smallest accepted truncation order.
pub const MIN_TRUNCATION: usize = 8;

/// Samples used to fit inverse series and correspondence tables.
const FIT_SAMPLES: usize = 1024;

/// Tolerance of the conformality (round-trip) residual, relative to the diameter.
pub const ROUND_TRIP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Phi,
    Psi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Evaluator {
    /// `phi = z / R`, `psi = R / z`.
    Circle { radius: f64 },
    /// Exterior ellipse map; the inverse is a scaled Joukowski map.
    Joukowski { a: f64, b: f64 },
    /// Interior ellipse map `psi = 1 / f`, `f = theta_1 / theta_4` in `asin(z / c)`.
    ThetaQuotient { a: f64, b: f64 },
    /// Inverse Laurent series with Newton iteration for the forward map.
    Series,
}

#[derive(Clone, Debug)]
struct Cache {
    arc: Option<EllipseArc>,
    // theta(s) - orient * 2 pi s / S, periodic
    table: Option<TrigInterpolant>,
    // boundary nodes for Newton starting points (custom maps)
    nodes: Vec<(C64, f64)>,
}

/// A conformal map with its inverse, stored as truncated Laurent data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaurentMap {
    pub direction: Direction,
    pub truncation: usize,
    /// Forward coefficients: `[gamma, gamma_0, gamma_1, ...]` for `phi`
    /// (powers `z^1, z^0, z^-1, ...`), `[alpha, alpha_0, alpha_1, ...]` for
    /// `psi` (powers `z^-1, z^0, z^1, ...`).
    pub coeffs: Vec<C64>,
    /// Inverse map at `w = infinity`: powers `w^1, w^0, w^-1, ...` for
    /// `phi_{-1}`, powers `w^0, w^-1, w^-2, ...` for `psi_{-1}`.
    pub inverse_coeffs: Vec<C64>,
    pub round_trip_residual: f64,
    pub branch_convention: String,
    pub evaluator: Evaluator,
    pub curve: CurveSpec,
    #[serde(skip)]
    cache: OnceLock<Cache>,
}

const PHI_BRANCH: &str = "(phi_{-1}')^e is continued from w = infinity where it is positive";
const PSI_BRANCH: &str =
    "(w^2 psi_{-1}'(w))^e is continued from w = infinity where its argument is e*pi (upper half-plane root of -alpha)";

/// Build the map of `spec` in the given direction.
pub fn build_map(spec: &CurveSpec, direction: Direction, truncation: usize) -> Result<LaurentMap> {
    spec.validate()?;
    if truncation < MIN_TRUNCATION {
        return Err(Error::Parameter(format!(
            "truncation must be >= {MIN_TRUNCATION}, got {truncation}"
        )));
    }
    let evaluator = match (spec, direction) {
        (CurveSpec::Circle { radius }, _) => Evaluator::Circle { radius: *radius },
        (CurveSpec::Ellipse { a, b }, _) if a == b => Evaluator::Circle { radius: *a },
        (CurveSpec::Ellipse { a, b }, Direction::Phi) => Evaluator::Joukowski { a: *a, b: *b },
        (CurveSpec::Ellipse { a, b }, Direction::Psi) => Evaluator::ThetaQuotient { a: *a, b: *b },
        (CurveSpec::Custom(t), _) => {
            let has = match direction {
                Direction::Phi => t.phi.is_some(),
                Direction::Psi => t.psi.is_some(),
            };
            if !has {
                return Err(Error::UnsupportedCurve(format!(
                    "custom curve has no boundary correspondence for {direction:?}; supply re_{0},im_{0} columns",
                    if direction == Direction::Phi { "phi" } else { "psi" }
                )));
            }
            Evaluator::Series
        }
    };
    let mut map = LaurentMap {
        direction,
        truncation,
        coeffs: vec![],
        inverse_coeffs: vec![],
        round_trip_residual: f64::NAN,
        branch_convention: match direction {
            Direction::Phi => PHI_BRANCH.into(),
            Direction::Psi => PSI_BRANCH.into(),
        },
        evaluator,
        curve: spec.clone(),
        cache: OnceLock::new(),
    };
    map.inverse_coeffs = map.fit_inverse_coeffs()?;
    map.coeffs = map.fit_forward_coeffs()?;
    map.check_leading()?;
    let residual = map.measure_round_trip(FIT_SAMPLES.min(512))?;
    map.round_trip_residual = residual;
    if !(residual < ROUND_TRIP_TOL) {
        return Err(Error::Accuracy {
            what: "conformal round trip".into(),
            residual,
            tolerance: ROUND_TRIP_TOL,
        });
    }
    Ok(map)
}

// theta_1 / theta_4 with nome q and their derivatives in zeta
fn theta_quotient(zeta: C64, q: f64) -> (C64, C64) {
    let lq = q.ln();
    let mut t1 = C64::new(0.0, 0.0);
    let mut t1d = C64::new(0.0, 0.0);
    let mut t4 = C64::new(1.0, 0.0);
    let mut t4d = C64::new(0.0, 0.0);
    for n in 0..40 {
        let nf = n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let w1 = sign * 2.0 * (lq * (nf + 0.5).powi(2)).exp();
        let m = 2.0 * nf + 1.0;
        t1 += w1 * (m * zeta).sin();
        t1d += w1 * m * (m * zeta).cos();
        if n >= 1 {
            let w4 = sign * 2.0 * (lq * nf * nf).exp();
            t4 += w4 * (2.0 * nf * zeta).cos();
            t4d -= w4 * 2.0 * nf * (2.0 * nf * zeta).sin();
        }
        if n > 2 && (lq * nf * nf).exp() * (m * zeta.im.abs()).exp() < 1e-18 {
            break;
        }
    }
    (t1 / t4, (t1d * t4 - t1 * t4d) / (t4 * t4))
}

// interior disc map of the horizontal ellipse (a >= b) and its derivative
fn ellipse_disc_map(a: f64, b: f64, z: C64) -> (C64, C64) {
    let c = (a * a - b * b).sqrt();
    let q = ((a - b) / (a + b)).powi(2);
    let zeta = (z / c).asin();
    let (f, df_dzeta) = theta_quotient(zeta, q);
    let cz = zeta.cos();
    let df = if cz.norm() > 1e-4 {
        df_dzeta / (c * cz)
    } else {
        // near a focus: Cauchy formula on a small circle
        let r = 1e-2 * b;
        let m = 32;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..m {
            let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
            let zk = z + r * e;
            acc += theta_quotient((zk / c).asin(), q).0 / e;
        }
        acc / (m as f64 * r)
    };
    (f, df)
}

impl LaurentMap {
    fn orient(&self) -> f64 {
        match self.direction {
            Direction::Phi => 1.0,
            Direction::Psi => -1.0,
        }
    }

    fn cache(&self) -> &Cache {
        self.cache.get_or_init(|| self.build_cache())
    }

    fn build_cache(&self) -> Cache {
        let length = self.curve.length();
        let arc = match &self.curve {
            CurveSpec::Ellipse { a, b } => Some(EllipseArc::new(*a, *b)),
            _ => None,
        };
        let mut cache = Cache {
            arc,
            table: None,
            nodes: vec![],
        };
        let (thetas, nodes): (Vec<f64>, Vec<(C64, f64)>) = match (&self.evaluator, &self.curve) {
            (Evaluator::ThetaQuotient { .. }, _) => {
                let m = FIT_SAMPLES;
                let mut th = Vec::with_capacity(m);
                for j in 0..m {
                    let s = j as f64 * length / m as f64;
                    let (z, _) = match &cache.arc {
                        Some(arc) => arc.point(s),
                        None => self.curve.point(s),
                    };
                    th.push(self.forward_raw(z).0.arg());
                }
                (th, vec![])
            }
            (Evaluator::Series, CurveSpec::Custom(t)) => {
                let col = match self.direction {
                    Direction::Phi => t.phi.as_ref(),
                    Direction::Psi => t.psi.as_ref(),
                }
                .expect("checked at build");
                let th: Vec<f64> = col.iter().map(|w| w.arg()).collect();
                let nodes = t.z.iter().copied().zip(th.iter().copied()).collect();
                (th, nodes)
            }
            _ => return cache,
        };
        let m = thetas.len();
        let orient = self.orient();
        let mut unwrapped = Vec::with_capacity(m);
        let mut acc = thetas[0];
        unwrapped.push(acc);
        for j in 1..m {
            acc += wrap_angle(thetas[j] - thetas[j - 1]);
            unwrapped.push(acc);
        }
        let periodic: Vec<C64> = unwrapped
            .iter()
            .enumerate()
            .map(|(j, th)| C64::new(th - orient * 2.0 * PI * j as f64 / m as f64, 0.0))
            .collect();
        cache.table = Some(TrigInterpolant::new(&periodic, length));
        let mut nodes = nodes;
        for (j, n) in nodes.iter_mut().enumerate() {
            n.1 = unwrapped[j];
        }
        cache.nodes = nodes;
        cache
    }

    /// Leading coefficient: `gamma` for `phi`, `alpha` for `psi`.
    pub fn leading(&self) -> f64 {
        match self.direction {
            Direction::Phi => 1.0 / self.inverse_coeffs[0].re,
            Direction::Psi => self.inverse_coeffs[1].re,
        }
    }

    fn check_leading(&self) -> Result<()> {
        let lead = match self.direction {
            Direction::Phi => 1.0 / self.inverse_coeffs[0],
            Direction::Psi => self.inverse_coeffs[1],
        };
        if lead.re <= 0.0 || lead.im.abs() > 1e-8 * lead.norm() {
            return Err(Error::Data(format!(
                "leading coefficient {lead} is not real positive; the boundary correspondence must be normalized"
            )));
        }
        Ok(())
    }

    fn fit_inverse_coeffs(&self) -> Result<Vec<C64>> {
        let m = self.truncation.max(FIT_SAMPLES / 2);
        match (&self.evaluator, self.direction) {
            (Evaluator::Circle { radius }, Direction::Phi) => {
                let mut v = vec![C64::new(0.0, 0.0); self.truncation];
                v[0] = C64::new(*radius, 0.0);
                Ok(v)
            }
            (Evaluator::Circle { radius }, Direction::Psi) => {
                let mut v = vec![C64::new(0.0, 0.0); self.truncation];
                v[1] = C64::new(*radius, 0.0);
                Ok(v)
            }
            (Evaluator::Joukowski { a, b }, _) => {
                let mut v = vec![C64::new(0.0, 0.0); self.truncation];
                v[0] = C64::new((a + b) / 2.0, 0.0);
                v[2] = C64::new((a - b) / 2.0, 0.0);
                Ok(v)
            }
            _ => {
                // boundary values of the inverse at uniform angles
                let k = FIT_SAMPLES;
                let mut vals = Vec::with_capacity(k);
                for j in 0..k {
                    let theta = 2.0 * PI * j as f64 / k as f64;
                    let s = self.param_of_angle(theta)?;
                    vals.push(self.boundary_point(s));
                }
                let c = dft_coefficients(&vals);
                let (keep, wrong): (Vec<C64>, f64) = match self.direction {
                    Direction::Phi => (
                        (0..m.min(k / 2))
                            .map(|i| frequency(&c, 1 - i as isize))
                            .collect(),
                        (2..(k / 2) as isize)
                            .map(|i| frequency(&c, i).norm())
                            .fold(0.0, f64::max),
                    ),
                    Direction::Psi => (
                        (0..m.min(k / 2))
                            .map(|i| frequency(&c, -(i as isize)))
                            .collect(),
                        (1..(k / 2) as isize)
                            .map(|i| frequency(&c, i).norm())
                            .fold(0.0, f64::max),
                    ),
                };
                let scale = self.curve.diameter();
                if wrong > 1e-6 * scale {
                    return Err(Error::Accuracy {
                        what: "boundary correspondence (analytic continuation of the inverse)"
                            .into(),
                        residual: wrong / scale,
                        tolerance: 1e-6,
                    });
                }
                Ok(keep)
            }
        }
    }

    fn fit_forward_coeffs(&self) -> Result<Vec<C64>> {
        let k = 256.max(4 * self.truncation.next_power_of_two());
        let m = self.truncation;
        let reach = self.boundary_reach();
        match self.direction {
            Direction::Phi => {
                let r0 = 1.5 * reach.1;
                let vals: Vec<C64> = (0..k)
                    .map(|j| {
                        self.forward_raw(C64::from_polar(r0, 2.0 * PI * j as f64 / k as f64))
                            .0
                    })
                    .collect();
                let c = dft_coefficients(&vals);
                Ok((0..m)
                    .map(|i| frequency(&c, 1 - i as isize) * r0.powi(i as i32 - 1))
                    .collect())
            }
            Direction::Psi => {
                let r0 = 0.5 * reach.0;
                let vals: Vec<C64> = (0..k)
                    .map(|j| {
                        self.forward_raw(C64::from_polar(r0, 2.0 * PI * j as f64 / k as f64))
                            .0
                    })
                    .collect();
                let c = dft_coefficients(&vals);
                Ok((0..m)
                    .map(|i| frequency(&c, i as isize - 1) / r0.powi(i as i32 - 1))
                    .collect())
            }
        }
    }

    // (min |z|, max |z|) over the boundary
    fn boundary_reach(&self) -> (f64, f64) {
        let len = self.curve.length();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for j in 0..256 {
            let z = self.boundary_point(j as f64 * len / 256.0);
            lo = lo.min(z.norm());
            hi = hi.max(z.norm());
        }
        (lo, hi)
    }

    fn boundary_point(&self, s: f64) -> C64 {
        match (&self.cache().arc, &self.curve) {
            (Some(arc), _) => arc.point(s).0,
            (None, CurveSpec::Custom(t)) => t.point(s).0,
            _ => self.curve.point(s).0,
        }
    }

    fn measure_round_trip(&self, samples: usize) -> Result<f64> {
        let len = self.curve.length();
        let diam = self.curve.diameter();
        let mut worst: f64 = 0.0;
        for j in 0..samples {
            let z = self.boundary_point(j as f64 * len / samples as f64);
            let w = self.forward_raw(z).0;
            worst = worst.max((self.inverse_raw(w).0 - z).norm() / diam);
        }
        Ok(worst)
    }

    /// Forward map and derivative without domain checks.
    pub fn forward_raw(&self, z: C64) -> (C64, C64) {
        match (&self.evaluator, self.direction) {
            (Evaluator::Circle { radius }, Direction::Phi) => {
                (z / radius, C64::new(1.0 / radius, 0.0))
            }
            (Evaluator::Circle { radius }, Direction::Psi) => (*radius / z, -*radius / (z * z)),
            (Evaluator::Joukowski { a, b }, _) => {
                let c2 = a * a - b * b;
                let root = (z * z - c2).sqrt();
                let (p, m) = (z + root, z - root);
                let w = if p.norm() >= m.norm() { p } else { m } / (a + b);
                (w, 1.0 / self.inverse_raw(w).1)
            }
            (Evaluator::ThetaQuotient { a, b }, _) => {
                let (f, df) = if a >= b {
                    ellipse_disc_map(*a, *b, z)
                } else {
                    let (f, df) = ellipse_disc_map(*b, *a, -C64::i() * z);
                    // f(z) = i f_h(-iz) keeps f'(0) > 0
                    (C64::i() * f, df)
                };
                (1.0 / f, -df / (f * f))
            }
            (Evaluator::Series, _) => self.newton_forward(z),
        }
    }

    /// Inverse map and derivative at `w`, `|w| >= 1`.
    pub fn inverse_raw(&self, w: C64) -> (C64, C64) {
        match (&self.evaluator, self.direction) {
            (Evaluator::Circle { radius }, Direction::Phi) => (w * radius, C64::new(*radius, 0.0)),
            (Evaluator::Circle { radius }, Direction::Psi) => (*radius / w, -*radius / (w * w)),
            (Evaluator::Joukowski { a, b }, _) => {
                let (p, m) = ((a + b) / 2.0, (a - b) / 2.0);
                (p * w + m / w, p - m / (w * w))
            }
            (_, Direction::Phi) => {
                // sum c_k w^{1-k}
                let inv = 1.0 / w;
                let mut val = C64::new(0.0, 0.0);
                let mut der = C64::new(0.0, 0.0);
                let mut pw = w;
                for (k, c) in self.inverse_coeffs.iter().enumerate() {
                    val += c * pw;
                    der += c * (1.0 - k as f64) * pw * inv;
                    pw *= inv;
                }
                (val, der)
            }
            (_, Direction::Psi) => {
                // sum g_k w^{-k}
                let inv = 1.0 / w;
                let mut val = C64::new(0.0, 0.0);
                let mut der = C64::new(0.0, 0.0);
                let mut pw = C64::new(1.0, 0.0);
                for (k, g) in self.inverse_coeffs.iter().enumerate() {
                    val += g * pw;
                    der -= g * k as f64 * pw * inv;
                    pw *= inv;
                }
                (val, der)
            }
        }
    }

    fn newton_forward(&self, z: C64) -> (C64, C64) {
        let cache = self.cache();
        let (zj, thj) = cache
            .nodes
            .iter()
            .copied()
            .min_by(|a, b| (a.0 - z).norm().total_cmp(&(b.0 - z).norm()))
            .unwrap_or((z, 0.0));
        let e = C64::from_polar(1.0, thj);
        let speed = 1.0 / self.inverse_raw(e).1.norm();
        let mut w = e * (1.0 + (z - zj).norm() * speed);
        if self.direction == Direction::Psi && z.norm() < 0.1 * self.inverse_coeffs[1].norm() {
            w = self.inverse_coeffs[1] / z;
        }
        for _ in 0..100 {
            let (val, der) = self.inverse_raw(w);
            let step = (val - z) / der;
            let mut next = w - step;
            if next.norm() < 1.0 {
                next = next / next.norm() * (1.0 + 0.5 * (w.norm() - 1.0).max(1e-12));
            }
            let done = step.norm() < 1e-15 * w.norm();
            w = next;
            if done {
                break;
            }
        }
        (w, 1.0 / self.inverse_raw(w).1)
    }

    fn check_domain(&self, z: C64) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain {
                point: format!("{z}"),
                reason: "non-finite point".into(),
            });
        }
        let inside = self.curve.contains(z);
        let on = match &self.curve {
            CurveSpec::Circle { radius } => (z.norm() - radius).abs() < 1e-12 * radius,
            CurveSpec::Ellipse { a, b } => {
                ((z.re / a).powi(2) + (z.im / b).powi(2) - 1.0).abs() < 1e-12
            }
            CurveSpec::Custom(t) => t.z.iter().any(|p| (p - z).norm() < 1e-12),
        };
        if on {
            return Err(Error::Domain {
                point: format!("{z}"),
                reason: "point lies on the curve".into(),
            });
        }
        match self.direction {
            Direction::Phi if inside => Err(Error::Domain {
                point: format!("{z}"),
                reason: "phi is defined outside the curve".into(),
            }),
            Direction::Psi if !inside => Err(Error::Domain {
                point: format!("{z}"),
                reason: "psi is defined inside the curve".into(),
            }),
            Direction::Psi if z.norm() == 0.0 => Err(Error::Pole),
            _ => Ok(()),
        }
    }

    /// Inverse map `phi_{-1}` / `psi_{-1}` (defined for `|w| >= 1`).
    pub fn inverse(&self, w: C64) -> Result<C64> {
        check_unit_exterior(w)?;
        Ok(self.inverse_raw(w).0)
    }

    pub fn inverse_derivative(&self, w: C64) -> Result<C64> {
        check_unit_exterior(w)?;
        Ok(self.inverse_raw(w).1)
    }

    /// Boundary correspondence: the angle `theta(s)` with
    /// `map(z(s)) = e^{i theta}`, continuous in `s` with `theta(0)` in `(-pi, pi]`.
    pub fn angle_of_param(&self, s: f64) -> f64 {
        let len = self.curve.length();
        match &self.evaluator {
            Evaluator::Circle { radius } => self.orient() * s / radius,
            Evaluator::Joukowski { .. } => {
                let arc = self.cache().arc.as_ref().expect("ellipse");
                arc.t_of_s(s.rem_euclid(len)) + 2.0 * PI * (s / len).floor()
            }
            _ => {
                let cache = self.cache();
                let table = cache.table.as_ref().expect("correspondence table");
                let est = table.eval(s).re + self.orient() * 2.0 * PI * s / len;
                if matches!(self.evaluator, Evaluator::ThetaQuotient { .. }) {
                    let z = self.boundary_point(s);
                    est + wrap_angle(self.forward_raw(z).0.arg() - est)
                } else {
                    est
                }
            }
        }
    }

    /// Inverse of [`Self::angle_of_param`], returning `s` for the angle.
    pub fn param_of_angle(&self, theta: f64) -> Result<f64> {
        let len = self.curve.length();
        match &self.evaluator {
            Evaluator::Circle { radius } => return Ok(self.orient() * theta * radius),
            Evaluator::Joukowski { .. } => {
                let arc = self.cache().arc.as_ref().expect("ellipse");
                return Ok(arc.s_of_t(theta));
            }
            _ => {}
        }
        let th0 = self.angle_of_param(0.0);
        let mut s = self.orient() * (theta - th0) * len / (2.0 * PI);
        let ds = 1e-5 * len;
        for _ in 0..60 {
            let f = self.angle_of_param(s) - theta;
            let d = (self.angle_of_param(s + ds) - self.angle_of_param(s - ds)) / (2.0 * ds);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let step = f / d;
            s -= step;
            if step.abs() < 1e-14 * len {
                return Ok(s);
            }
        }
        let f = (self.angle_of_param(s) - theta).abs();
        if f < 1e-10 {
            Ok(s)
        } else {
            Err(Error::Accuracy {
                what: "boundary correspondence inversion".into(),
                residual: f,
                tolerance: 1e-10,
            })
        }
    }

    /// `|map'(z(s))|` at a boundary point, i.e. `d theta / ds` up to sign.
    pub fn boundary_speed(&self, theta: f64) -> f64 {
        1.0 / self.inverse_raw(C64::from_polar(1.0, theta)).1.norm()
    }

    /// Base function whose power carries the branch of this map:
    /// `phi_{-1}'(w)` for `phi`, `w^2 psi_{-1}'(w)` for `psi`.
    pub fn kernel_base(&self, w: C64) -> C64 {
        match self.direction {
            Direction::Phi => self.inverse_raw(w).1,
            Direction::Psi => w * w * self.inverse_raw(w).1,
        }
    }

    fn kernel_anchor_arg(&self) -> f64 {
        match self.direction {
            Direction::Phi => 0.0,
            Direction::Psi => PI,
        }
    }

    /// Argument of the kernel base at `w`, continued radially from infinity.
    fn kernel_arg_from_infinity(&self, w: C64) -> Result<f64> {
        let r = w.norm().max(1.0);
        let far = w / w.norm() * (1e6 * r);
        let steps = 96;
        let base0 = self.kernel_base(far);
        let anchor = self.kernel_anchor_arg();
        let mut arg = anchor + wrap_angle(base0.arg() - anchor);
        let mut prev = base0;
        for k in 1..=steps {
            let t = k as f64 / steps as f64;
            let wk = far * (w.norm() / far.norm()).powf(t);
            let b = self.kernel_base(wk);
            if b.norm() == 0.0 {
                return Err(Error::BranchPoint { index: k });
            }
            arg += wrap_angle((b / prev).arg());
            prev = b;
        }
        Ok(arg)
    }

    /// `kernel_base(w)^exponent` along the path `ws` (consecutive points
    /// close together), on the branch fixed at infinity.
    pub fn kernel_power(&self, ws: &[C64], exponent: f64) -> Result<Vec<C64>> {
        if ws.is_empty() {
            return Ok(vec![]);
        }
        let start_arg = self.kernel_arg_from_infinity(ws[0])?;
        let base: Vec<C64> = ws.iter().map(|&w| self.kernel_base(w)).collect();
        branch_power(&base, exponent, Some(start_arg))
    }

    /// Same as [`Self::kernel_power`] on the closed circle `|w| = r` with `k`
    /// uniform samples; verifies single-valuedness after a full turn.
    pub fn kernel_power_on_circle(&self, r: f64, k: usize, exponent: f64) -> Result<Vec<C64>> {
        let mut ws: Vec<C64> = (0..k)
            .map(|j| C64::from_polar(r, 2.0 * PI * j as f64 / k as f64))
            .collect();
        ws.push(ws[0]);
        let mut vals = self.kernel_power(&ws, exponent)?;
        let closing = vals.pop().expect("nonempty");
        let gap = (closing - vals[0]).norm() / vals[0].norm();
        if gap > 1e-8 {
            return Err(Error::Extraction(format!(
                "branch is not single-valued on |w| = {r}: closing mismatch {gap:e}"
            )));
        }
        Ok(vals)
    }

    /// Value of the branch at a single point, continued radially from infinity.
    pub fn kernel_power_at(&self, w: C64, exponent: f64) -> Result<C64> {
        let arg = self.kernel_arg_from_infinity(w)?;
        let b = self.kernel_base(w);
        Ok(C64::from_polar(b.norm().powf(exponent), arg * exponent))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_unit_exterior(w: C64) -> Result<()> {
    if w.norm() < 1.0 - 1e-12 || !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::Domain {
            point: format!("{w}"),
            reason: "inverse maps are defined for |w| >= 1".into(),
        });
    }
    Ok(())
}

/// Evaluate the map at a point of its domain.
pub fn eval_map(map: &LaurentMap, z: C64) -> Result<C64> {
    map.check_domain(z)?;
    Ok(map.forward_raw(z).0)
}

pub fn eval_derivative(map: &LaurentMap, z: C64) -> Result<C64> {
    map.check_domain(z)?;
    Ok(map.forward_raw(z).1)
}

/// Continuous p-th root of sampled values along an ordered path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchedRoot {
    pub base: Vec<C64>,
    pub p: f64,
    pub roots: Vec<C64>,
    /// Argument assigned to the first sample.
    pub start_arg: f64,
}

/// Continuous branch of `samples^(1/p)`; `start_arg` defaults to the
/// principal argument of the first sample.
pub fn branch_root(samples: &[C64], p: f64, start_arg: Option<f64>) -> Result<BranchedRoot> {
    if !(p > 0.0) {
        return Err(Error::Parameter(format!(
            "root order must be positive, got {p}"
        )));
    }
    let roots = branch_power(samples, 1.0 / p, start_arg)?;
    let start_arg = start_arg.unwrap_or_else(|| samples.first().map(|s| s.arg()).unwrap_or(0.0));
    Ok(BranchedRoot {
        base: samples.to_vec(),
        p,
        roots,
        start_arg,
    })
}

/// Continuous branch of `samples^exponent` by cumulative unwinding of the
/// argument. Consecutive samples whose argument differs by `pi` or more
/// cannot be disambiguated and are rejected.
pub fn branch_power(samples: &[C64], exponent: f64, start_arg: Option<f64>) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(samples.len());
    let Some(first) = samples.first() else {
        return Ok(out);
    };
    if first.norm() == 0.0 {
        return Err(Error::BranchPoint { index: 0 });
    }
    let mut arg = match start_arg {
        Some(a) => a + wrap_angle(first.arg() - a),
        None => first.arg(),
    };
    out.push(C64::from_polar(first.norm().powf(exponent), arg * exponent));
    for j in 1..samples.len() {
        let s = samples[j];
        if s.norm() == 0.0 {
            return Err(Error::BranchPoint { index: j });
        }
        let gap = (s / samples[j - 1]).arg();
        if gap.abs() >= PI - 1e-12 {
            return Err(Error::BranchResolution {
                index: j - 1,
                next: j,
                gap: gap.abs(),
            });
        }
        arg += gap;
        out.push(C64::from_polar(s.norm().powf(exponent), arg * exponent));
    }
    Ok(out)
}

/// Tabulate a catalog curve together with the boundary values of both maps,
/// producing a custom curve that exercises the fitted-series path.
pub fn tabulate_with_correspondence(spec: &CurveSpec, n: usize) -> Result<TabulatedCurve> {
    let phi = build_map(spec, Direction::Phi, MIN_TRUNCATION)?;
    let psi = build_map(spec, Direction::Psi, MIN_TRUNCATION)?;
    let len = spec.length();
    let (mut z, mut dz, mut wp, mut wm) = (vec![], vec![], vec![], vec![]);
    for j in 0..n {
        let s = j as f64 * len / n as f64;
        let (zj, dzj) = spec.point(s);
        z.push(zj);
        dz.push(dzj);
        wp.push(C64::from_polar(1.0, phi.angle_of_param(s)));
        wm.push(C64::from_polar(1.0, psi.angle_of_param(s)));
    }
    TabulatedCurve::new(len, z, dz, Some(wp), Some(wm))
}
