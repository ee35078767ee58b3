//! Cauchy-type integrals off the curve, the principal-value singular
//! operator `S_Gamma` on the curve, and Sokhotskii-Plemelj traces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::curve::DiscretizedCurve;
use crate::weights::{weighted_norm, WeightSpec};
use crate::{Error, Result, C64};

/// Samples of a function on the nodes of a discretized curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFunction {
    pub values: Vec<C64>,
}

impl BoundaryFunction {
    pub fn new(curve: &DiscretizedCurve, values: Vec<C64>) -> Result<Self> {
        if values.len() != curve.len() {
            return Err(Error::Data(format!(
                "{} samples for a {}-node curve",
                values.len(),
                curve.len()
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Data("non-finite boundary samples".into()));
        }
        Ok(BoundaryFunction { values })
    }

    /// Restriction of `g` to the nodes.
    pub fn from_fn(curve: &DiscretizedCurve, g: impl Fn(C64) -> C64 + Sync) -> Self {
        BoundaryFunction {
            values: curve.z.par_iter().map(|&z| g(z)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Write `s, re, im` rows.
    pub fn write_csv(&self, curve: &DiscretizedCurve, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["s", "re", "im"])?;
        for (s, v) in curve.s.iter().zip(&self.values) {
            w.write_record([
                format!("{s:.17e}"),
                format!("{:.17e}", v.re),
                format!("{:.17e}", v.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(curve: &DiscretizedCurve, path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let get = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Data("short row in boundary CSV".into()))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Data(format!("bad number in boundary CSV: {e}")))
            };
            values.push(C64::new(get(1)?, get(2)?));
        }
        BoundaryFunction::new(curve, values)
    }
}

/// A Cauchy integral value, possibly flagged as close to the curve.
#[derive(Clone, Debug)]
pub struct CauchyValue {
    pub value: C64,
    pub warning: Option<String>,
}

fn cauchy_sum(curve: &DiscretizedCurve, f: &[C64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..curve.len() {
        acc += f[j] * curve.dz[j] / (curve.z[j] - z);
    }
    acc * curve.h / (2.0 * PI * C64::i())
}

/// `(1/2 pi i) int f(xi) d xi / (xi - z)` by the trapezoid rule.
///
/// Points closer than one grid spacing are refused; points closer than two
/// spacings carry a warning.
pub fn cauchy_integral(curve: &DiscretizedCurve, f: &[C64], z: C64) -> Result<CauchyValue> {
    check_len(curve, f)?;
    let dist = curve.node_distance(z);
    let spacing = curve.h;
    if dist < spacing {
        return Err(Error::NearBoundary {
            point: format!("{z}"),
            distance: dist,
            spacing,
        });
    }
    let warning = (dist < 2.0 * spacing).then(|| {
        format!("point {z} is {dist:.3e} from the curve; accuracy degrades below two grid spacings")
    });
    Ok(CauchyValue {
        value: cauchy_sum(curve, f, z),
        warning,
    })
}

/// Cauchy integral at many points; near-boundary points are refused.
pub fn cauchy_integral_many(
    curve: &DiscretizedCurve,
    f: &[C64],
    points: &[C64],
) -> Result<Vec<C64>> {
    check_len(curve, f)?;
    points
        .par_iter()
        .map(|&z| cauchy_integral(curve, f, z).map(|v| v.value))
        .collect()
}

fn check_len(curve: &DiscretizedCurve, f: &[C64]) -> Result<()> {
    if f.len() != curve.len() {
        return Err(Error::Data(format!(
            "{} samples for a {}-node curve",
            f.len(),
            curve.len()
        )));
    }
    Ok(())
}

/// Principal value `S_Gamma f` at every node. The value at node `j` sums
/// over nodes of opposite parity with weight `2h`.
pub fn singular_op(curve: &DiscretizedCurve, f: &[C64]) -> Result<Vec<C64>> {
    check_len(curve, f)?;
    let n = curve.len();
    if n % 2 != 0 {
        return Err(Error::Sizing(format!(
            "singular operator needs an even node count, got {n}"
        )));
    }
    let scale = 2.0 * curve.h / (2.0 * PI * C64::i());
    let weighted: Vec<C64> = (0..n).map(|k| f[k] * curve.dz[k]).collect();
    Ok((0..n)
        .into_par_iter()
        .map(|j| {
            let tau = curve.z[j];
            let mut acc = C64::new(0.0, 0.0);
            let mut k = (j + 1) % 2;
            while k < n {
                acc += weighted[k] / (curve.z[k] - tau);
                k += 2;
            }
            acc * scale
        })
        .collect())
}

/// Boundary traces `F+ = f/2 + S f` (interior side) and `F- = -f/2 + S f`.
pub fn plemelj_values(curve: &DiscretizedCurve, f: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let s = singular_op(curve, f)?;
    let plus = f.iter().zip(&s).map(|(a, b)| 0.5 * a + b).collect();
    let minus = f.iter().zip(&s).map(|(a, b)| -0.5 * a + b).collect();
    Ok((plus, minus))
}

/// Dense matrix of the discrete singular operator (row `j` = node `j`).
pub fn singular_matrix(curve: &DiscretizedCurve) -> Result<Vec<Vec<C64>>> {
    let n = curve.len();
    if n % 2 != 0 {
        return Err(Error::Sizing(format!(
            "singular operator needs an even node count, got {n}"
        )));
    }
    let scale = 2.0 * curve.h / (2.0 * PI * C64::i());
    Ok((0..n)
        .into_par_iter()
        .map(|j| {
            (0..n)
                .map(|k| {
                    if (j + k) % 2 == 1 {
                        scale * curve.dz[k] / (curve.z[k] - curve.z[j])
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormEstimate {
    /// Largest `||S f|| / ||f||` over the random band-limited trials.
    pub random_max: f64,
    /// Power-iteration estimate of the weighted L2 operator norm.
    pub power: Option<f64>,
}

/// Empirical size of `S_Gamma` in the weighted space: Rayleigh-type
/// quotients over seeded random band-limited densities, plus (for `p = 2`)
/// power iteration on the symmetrized operator.
pub fn operator_norm_estimate(
    curve: &DiscretizedCurve,
    w: &WeightSpec,
    trials: usize,
    bandwidth: usize,
    seed: u64,
) -> Result<NormEstimate> {
    let p = w.p;
    let n = curve.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_max: f64 = 0.0;
    for _ in 0..trials {
        let coeffs: Vec<C64> = (0..(2 * bandwidth + 1))
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f: Vec<C64> = curve
            .s
            .iter()
            .map(|&s| {
                let t = 2.0 * PI * s / curve.length;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * C64::from_polar(1.0, (k as f64 - bandwidth as f64) * t))
                    .sum()
            })
            .collect();
        let sf = singular_op(curve, &f)?;
        let ratio = weighted_norm(&sf, curve, w, p)? / weighted_norm(&f, curve, w, p)?;
        random_max = random_max.max(ratio);
    }
    let power = if (p - 2.0).abs() < 1e-12 {
        let rho = w.node_values(curve);
        let d: Vec<f64> = (0..n)
            .map(|j| (rho[j] * curve.arc_weight(j)).sqrt())
            .collect();
        let m = singular_matrix(curve)?;
        // M = D S D^{-1}; iterate x <- M^* M x
        let apply = |x: &[C64]| -> Vec<C64> {
            let y: Vec<C64> = (0..n).map(|k| x[k] / d[k]).collect();
            (0..n)
                .into_par_iter()
                .map(|j| d[j] * m[j].iter().zip(&y).map(|(a, b)| a * b).sum::<C64>())
                .collect()
        };
        let apply_adj = |x: &[C64]| -> Vec<C64> {
            let y: Vec<C64> = (0..n).map(|k| x[k] * d[k]).collect();
            (0..n)
                .into_par_iter()
                .map(|j| (0..n).map(|k| m[k][j].conj() * y[k]).sum::<C64>() / d[j])
                .collect()
        };
        let mut x: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut est = 0.0;
        for _ in 0..60 {
            let nx = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nx);
            let y = apply_adj(&apply(&x));
            let lambda = y
                .iter()
                .zip(&x)
                .map(|(a, b)| (a * b.conj()).re)
                .sum::<f64>();
            let next = lambda.max(0.0).sqrt();
            let done = (next - est).abs() < 1e-10 * next;
            est = next;
            x = y;
            if done {
                break;
            }
        }
        Some(est)
    } else {
        None
    };
    Ok(NormEstimate { random_max, power })
}
