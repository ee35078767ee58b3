//! Generalized p-Faber polynomials.
//!
//! `F+_{p,n}` is the polynomial part at infinity of `phi(z)^n phi'(z)^{1/p}`;
//! `F-_{p,n}` is the principal part at 0 of `psi(z)^{n-2/p} psi'(z)^{1/p}`.
//! Both are extracted from contour integrals over `|w| = R > 1` in the image
//! plane of the map, so the contour always encloses the curve:
//!
//! ```text
//! c+_k = (1/2 pi i) \oint w^n phi_{-1}'(w)^{1-1/p} phi_{-1}(w)^{-k-1} dw
//! c-_k = -(1/2 pi i) \oint w^n (w^2 psi_{-1}'(w))^{-1/p} psi_{-1}'(w) psi_{-1}(w)^{k-1} dw
//! ```

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::conformal::{eval_map, Direction, LaurentMap};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

/// Extraction knobs. `radius` and `check_radius` are radii in the image
/// plane (`|w| > 1`); `samples = 0` picks a count from the degree.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FaberOptions {
    pub radius: f64,
    pub check_radius: f64,
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for FaberOptions {
    fn default() -> Self {
        FaberOptions {
            radius: 1.5,
            check_radius: 2.0,
            samples: 0,
            tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaberPolynomial {
    pub side: Side,
    pub n: usize,
    pub p: f64,
    /// Plus side: coefficients of `z^0 .. z^n`. Minus side: coefficients of
    /// `z^-1 .. z^-n`.
    pub coeffs: Vec<C64>,
    pub radius: f64,
    pub check_radius: f64,
    pub samples: usize,
    /// Largest coefficient beyond degree `n` found by the extraction.
    pub residual: f64,
    /// Relative disagreement between the two extraction radii.
    pub agreement: f64,
    /// For `F+_{p,0}`: the constant `gamma^{1/p}` replaced by 1.
    pub dropped_factor: Option<C64>,
}

fn sample_count(n: usize, opts: &FaberOptions) -> usize {
    if opts.samples > 0 {
        opts.samples
    } else {
        (8 * (n + 8)).next_power_of_two().max(256)
    }
}

fn circle(r: f64, k: usize) -> Vec<C64> {
    (0..k)
        .map(|j| C64::from_polar(r, 2.0 * PI * j as f64 / k as f64))
        .collect()
}

// coefficients of z^k, k = 0 .. kmax
fn extract_plus(
    map: &LaurentMap,
    p: f64,
    n: usize,
    r: f64,
    k: usize,
    kmax: usize,
) -> Result<Vec<C64>> {
    let ws = circle(r, k);
    let roots = map.kernel_power_on_circle(r, k, 1.0 - 1.0 / p)?;
    let mut base = Vec::with_capacity(k);
    let mut inv_z = Vec::with_capacity(k);
    for (w, root) in ws.iter().zip(&roots) {
        let z = map.inverse_raw(*w).0;
        // w^n * root * z^{-1} * w  (the trailing w is dw / (i dtheta))
        base.push(w.powi(n as i32 + 1) * root / z);
        inv_z.push(1.0 / z);
    }
    let mut out = Vec::with_capacity(kmax + 1);
    for _ in 0..=kmax {
        out.push(base.iter().sum::<C64>() / k as f64);
        base.iter_mut().zip(&inv_z).for_each(|(b, iz)| *b *= iz);
    }
    Ok(out)
}

// coefficients of z^-k, k = 1 .. kmax
fn extract_minus(
    map: &LaurentMap,
    p: f64,
    n: usize,
    r: f64,
    k: usize,
    kmax: usize,
) -> Result<Vec<C64>> {
    let ws = circle(r, k);
    let inv_lambda = map.kernel_power_on_circle(r, k, -1.0 / p)?;
    let mut base = Vec::with_capacity(k);
    let mut zs = Vec::with_capacity(k);
    for (w, il) in ws.iter().zip(&inv_lambda) {
        let (z, dz) = map.inverse_raw(*w);
        base.push(-w.powi(n as i32 + 1) * il * dz);
        zs.push(z);
    }
    let mut out = Vec::with_capacity(kmax);
    for _ in 1..=kmax {
        out.push(base.iter().sum::<C64>() / k as f64);
        base.iter_mut().zip(&zs).for_each(|(b, z)| *b *= z);
    }
    Ok(out)
}

fn relative_gap(a: &[C64], b: &[C64]) -> f64 {
    let scale = a
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

fn check_inputs(map: &LaurentMap, want: Direction, p: f64, opts: &FaberOptions) -> Result<()> {
    if map.direction != want {
        return Err(Error::Parameter(format!(
            "expected a {want:?} map, got {:?}",
            map.direction
        )));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("p must lie in (1, inf), got {p}")));
    }
    if !(opts.radius > 1.0 && opts.check_radius > 1.0) || opts.radius == opts.check_radius {
        return Err(Error::Parameter(
            "extraction radii must be distinct and exceed 1".into(),
        ));
    }
    Ok(())
}

const TAIL: usize = 4;

/// `F+_{p,n}` from the exterior map. `F+_{p,0}` is the constant 1.
pub fn faber_plus(
    map: &LaurentMap,
    p: f64,
    n: usize,
    opts: FaberOptions,
) -> Result<FaberPolynomial> {
    check_inputs(map, Direction::Phi, p, &opts)?;
    let k = sample_count(n, &opts);
    let c1 = extract_plus(map, p, n, opts.radius, k, n + TAIL)?;
    let c2 = extract_plus(map, p, n, opts.check_radius, k, n + TAIL)?;
    let agreement = relative_gap(&c1[..=n], &c2[..=n]);
    if agreement > opts.tolerance {
        return Err(Error::Extraction(format!(
            "radii {} and {} disagree by {agreement:e} for n = {n}",
            opts.radius, opts.check_radius
        )));
    }
    let residual = c1[n + 1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let (coeffs, dropped_factor) = if n == 0 {
        (vec![C64::new(1.0, 0.0)], Some(c1[0]))
    } else {
        (c1[..=n].to_vec(), None)
    };
    Ok(FaberPolynomial {
        side: Side::Plus,
        n,
        p,
        coeffs,
        radius: opts.radius,
        check_radius: opts.check_radius,
        samples: k,
        residual,
        agreement,
        dropped_factor,
    })
}

/// `F-_{p,n}`, `n >= 1`, from the interior map.
pub fn faber_minus(
    map: &LaurentMap,
    p: f64,
    n: usize,
    opts: FaberOptions,
) -> Result<FaberPolynomial> {
    check_inputs(map, Direction::Psi, p, &opts)?;
    if n == 0 {
        return Err(Error::Parameter(
            "minus-side Faber polynomials start at n = 1".into(),
        ));
    }
    let k = sample_count(n, &opts);
    let c1 = extract_minus(map, p, n, opts.radius, k, n + TAIL)?;
    let c2 = extract_minus(map, p, n, opts.check_radius, k, n + TAIL)?;
    let agreement = relative_gap(&c1[..n], &c2[..n]);
    if agreement > opts.tolerance {
        return Err(Error::Extraction(format!(
            "radii {} and {} disagree by {agreement:e} for n = {n}",
            opts.radius, opts.check_radius
        )));
    }
    let residual = c1[n..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(FaberPolynomial {
        side: Side::Minus,
        n,
        p,
        coeffs: c1[..n].to_vec(),
        radius: opts.radius,
        check_radius: opts.check_radius,
        samples: k,
        residual,
        agreement,
        dropped_factor: None,
    })
}

impl FaberPolynomial {
    pub fn eval(&self, z: C64) -> C64 {
        match self.side {
            Side::Plus => self
                .coeffs
                .iter()
                .rev()
                .fold(C64::new(0.0, 0.0), |acc, c| acc * z + c),
            Side::Minus => {
                let u = 1.0 / z;
                self.coeffs
                    .iter()
                    .rev()
                    .fold(C64::new(0.0, 0.0), |acc, c| (acc + c) * u)
            }
        }
    }

    /// Highest-order coefficient (of `z^n` or `z^-n`).
    pub fn leading(&self) -> C64 {
        *self.coeffs.last().expect("nonempty")
    }

    /// Signed degree of the highest nonzero term.
    pub fn degree(&self) -> i64 {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let top = self
            .coeffs
            .iter()
            .rposition(|c| c.norm() > 1e-12 * scale)
            .unwrap_or(0);
        match self.side {
            Side::Plus => top as i64,
            Side::Minus => -(top as i64 + 1),
        }
    }

    /// `(degree, coefficient)` pairs; negative degrees on the minus side.
    pub fn terms(&self) -> Vec<(i64, C64)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| match self.side {
                Side::Plus => (k as i64, *c),
                Side::Minus => (-(k as i64 + 1), *c),
            })
            .collect()
    }

    /// CSV rows `degree, re, im`. Terms below `1e-14` of the largest
    /// coefficient are round-off and omitted.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["degree", "re", "im"])?;
        for (d, c) in self.significant_terms() {
            w.write_record([
                d.to_string(),
                format!("{:.17e}", c.re),
                format!("{:.17e}", c.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn significant_terms(&self) -> Vec<(i64, C64)> {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.terms()
            .into_iter()
            .filter(|(_, c)| c.norm() > 1e-14 * scale)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `E_{p,n}(z)`: the full product minus the extracted principal part, at a
/// point of the map's domain. For `n = 0` on the plus side the unnormalized
/// constant `gamma^{1/p}` is subtracted so that the remainder vanishes at
/// infinity.
pub fn faber_remainder(map: &LaurentMap, poly: &FaberPolynomial, z: C64) -> Result<C64> {
    let w = eval_map(map, z)?;
    let n = poly.n as i32;
    let p = poly.p;
    match (poly.side, map.direction) {
        (Side::Plus, Direction::Phi) => {
            let full = w.powi(n) * map.kernel_power_at(w, -1.0 / p)?;
            let part = match poly.dropped_factor {
                Some(c) => c,
                None => poly.eval(z),
            };
            Ok(full - part)
        }
        (Side::Minus, Direction::Psi) => {
            let full = w.powi(n) * map.kernel_power_at(w, -1.0 / p)?;
            Ok(full - poly.eval(z))
        }
        _ => Err(Error::Parameter(
            "polynomial side does not match the map direction".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::build_map;
    use crate::curve::CurveSpec;

    fn maps(spec: &CurveSpec) -> (LaurentMap, LaurentMap) {
        (
            build_map(spec, Direction::Phi, 16).unwrap(),
            build_map(spec, Direction::Psi, 32).unwrap(),
        )
    }

    #[test]
    fn circle_plus_is_monomial() {
        let (phi, _) = maps(&CurveSpec::circle(1.0));
        for p in [1.5, 2.0, 3.0] {
            let f = faber_plus(&phi, p, 3, FaberOptions::default()).unwrap();
            let want = [0.0, 0.0, 0.0, 1.0];
            for (c, w) in f.coeffs.iter().zip(want) {
                assert!((c - w).norm() < 1e-14);
            }
            assert_eq!(f.significant_terms(), vec![(3, f.coeffs[3])]);
        }
    }

    #[test]
    fn zero_index_is_one() {
        let (phi, _) = maps(&CurveSpec::ellipse(2.0, 1.0));
        let f = faber_plus(&phi, 2.0, 0, FaberOptions::default()).unwrap();
        assert_eq!(f.coeffs, vec![C64::new(1.0, 0.0)]);
        let dropped = f.dropped_factor.unwrap();
        assert!((dropped - (2.0f64 / 3.0).sqrt()).norm() < 1e-12);
    }

    #[test]
    fn ellipse_plus_two_radius_and_symbolic() {
        let (phi, _) = maps(&CurveSpec::ellipse(2.0, 1.0));
        let f = faber_plus(&phi, 2.0, 4, FaberOptions::default()).unwrap();
        assert_eq!(f.degree(), 4);
        assert!(f.agreement < 1e-8);
        // phi = (2z - 3/(2z) - ...)/3, so phi (phi')^{1/2} = gamma^{3/2} z + O(1/z)
        let f1 = faber_plus(&phi, 2.0, 1, FaberOptions::default()).unwrap();
        let g = 2.0f64 / 3.0;
        assert!((f1.coeffs[1] - g.powf(1.5)).norm() < 1e-12);
        assert!(f1.coeffs[0].norm() < 1e-12);
    }

    #[test]
    fn plus_leading_coefficient() {
        for spec in [CurveSpec::circle(1.0), CurveSpec::ellipse(2.0, 1.0)] {
            let (phi, _) = maps(&spec);
            let g = phi.leading();
            for p in [1.5, 2.0, 3.0] {
                for n in 1..=16 {
                    let f = faber_plus(&phi, p, n, FaberOptions::default()).unwrap();
                    let want = g.powf(n as f64 + 1.0 / p);
                    assert!((f.leading() - want).norm() < 1e-6 * want);
                    assert_eq!(f.degree(), n as i64);
                }
            }
        }
    }

    #[test]
    fn circle_minus_is_unit_monomial() {
        let (_, psi) = maps(&CurveSpec::circle(1.0));
        let f = faber_minus(&psi, 2.0, 2, FaberOptions::default()).unwrap();
        assert!(f.coeffs[0].norm() < 1e-14);
        assert!((f.coeffs[1].norm() - 1.0).abs() < 1e-14);
        assert!((f.coeffs[1] + C64::i()).norm() < 1e-14);
    }

    #[test]
    fn minus_first_index_has_one_term() {
        let (_, psi) = maps(&CurveSpec::ellipse(2.0, 1.0));
        let f = faber_minus(&psi, 2.0, 1, FaberOptions::default()).unwrap();
        assert_eq!(f.coeffs.len(), 1);
        assert_eq!(f.degree(), -1);
        assert!(faber_minus(&psi, 2.0, 0, FaberOptions::default()).is_err());
    }

    #[test]
    fn ellipse_minus() {
        let (_, psi) = maps(&CurveSpec::ellipse(2.0, 1.0));
        let a = psi.leading();
        for p in [1.5, 2.0, 3.0] {
            for n in 1..=8 {
                let f = faber_minus(&psi, p, n, FaberOptions::default()).unwrap();
                assert_eq!(f.degree(), -(n as i64));
                assert!(f.agreement < 1e-8);
                assert!(f.residual < 1e-10, "{}", f.residual);
                let want = C64::from_polar(a.powf(n as f64 - 1.0 / p), -PI / p);
                assert!((f.leading() - want).norm() < 1e-8 * want.norm());
            }
        }
    }

    #[test]
    fn extraction_stable_under_refinement() {
        let (phi, psi) = maps(&CurveSpec::ellipse(2.0, 1.0));
        let o1 = FaberOptions {
            samples: 256,
            ..Default::default()
        };
        let o2 = FaberOptions {
            samples: 512,
            ..Default::default()
        };
        let a = faber_plus(&phi, 2.5, 7, o1).unwrap();
        let b = faber_plus(&phi, 2.5, 7, o2).unwrap();
        assert!(relative_gap(&a.coeffs, &b.coeffs) < 1e-8);
        let a = faber_minus(&psi, 2.5, 7, o1).unwrap();
        let b = faber_minus(&psi, 2.5, 7, o2).unwrap();
        assert!(relative_gap(&a.coeffs, &b.coeffs) < 1e-8);
    }

    #[test]
    fn remainders() {
        let (phi, psi) = maps(&CurveSpec::circle(1.0));
        let f = faber_plus(&phi, 2.0, 3, FaberOptions::default()).unwrap();
        for z in [C64::new(3.0, 0.0), C64::new(-1.0, 2.0), C64::new(0.0, 10.0)] {
            assert!(faber_remainder(&phi, &f, z).unwrap().norm() < 1e-12);
        }
        let g = faber_minus(&psi, 2.0, 1, FaberOptions::default()).unwrap();
        let e = faber_remainder(&psi, &g, C64::new(0.5, 0.0)).unwrap();
        assert!(e.re.is_finite() && e.im.is_finite());

        let (phi, _) = maps(&CurveSpec::ellipse(2.0, 1.0));
        let f = faber_plus(&phi, 2.0, 2, FaberOptions::default()).unwrap();
        let e10 = faber_remainder(&phi, &f, C64::new(10.0, 0.0))
            .unwrap()
            .norm();
        let e100 = faber_remainder(&phi, &f, C64::new(100.0, 0.0))
            .unwrap()
            .norm();
        assert!(e10 >= 5.0 * e100, "{e10} {e100}");
        assert!(e100 / e10 < 0.2);
        assert!(faber_remainder(&phi, &f, C64::new(0.1, 0.0)).is_err());
    }

    #[test]
    fn wrong_map_rejected() {
        let (phi, psi) = maps(&CurveSpec::circle(1.0));
        assert!(faber_plus(&psi, 2.0, 1, FaberOptions::default()).is_err());
        assert!(faber_minus(&phi, 2.0, 1, FaberOptions::default()).is_err());
    }
}
