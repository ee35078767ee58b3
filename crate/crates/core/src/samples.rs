//! Built-in boundary functions for studies: `runge[:re[,im]]`, `poly:k`,
//! `laurent:k`.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::curve::{CurveSpec, DiscretizedCurve};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleFunction {
    /// `1 / (z - z0)` with the pole outside the curve.
    Runge { z0: C64 },
    /// `z^k`.
    Poly { k: u32 },
    /// `z^-k`, `k >= 1`.
    Laurent { k: u32 },
}

impl SampleFunction {
    pub const DEFAULT_POLE: f64 = 3.0;

    pub fn eval(&self, z: C64) -> C64 {
        match self {
            SampleFunction::Runge { z0 } => 1.0 / (z - z0),
            SampleFunction::Poly { k } => z.powi(*k as i32),
            SampleFunction::Laurent { k } => z.powi(-(*k as i32)),
        }
    }

    /// Reject data that is singular on or inside the curve where the
    /// construction requires otherwise.
    pub fn check(&self, spec: &CurveSpec) -> Result<()> {
        match self {
            SampleFunction::Runge { z0 } if spec.contains(*z0) => Err(Error::Parameter(format!(
                "runge pole {z0} must lie outside the curve"
            ))),
            SampleFunction::Laurent { k: 0 } => {
                Err(Error::Parameter("laurent:k needs k >= 1".into()))
            }
            SampleFunction::Laurent { .. } if !spec.contains(C64::new(0.0, 0.0)) => Err(
                Error::Parameter("laurent samples need the origin inside the curve".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn sample(&self, curve: &DiscretizedCurve) -> Result<Vec<C64>> {
        self.check(&curve.spec)?;
        let out: Vec<C64> = curve.z.iter().map(|&z| self.eval(z)).collect();
        if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Data(
                "sample function is singular on the curve".into(),
            ));
        }
        Ok(out)
    }
}

impl FromStr for SampleFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("sample:").unwrap_or(s);
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let bad = || Error::Parameter(format!("cannot parse sample function '{s}'"));
        match (name, arg) {
            ("runge", None) => Ok(SampleFunction::Runge {
                z0: C64::new(Self::DEFAULT_POLE, 0.0),
            }),
            ("runge", Some(a)) => {
                let parts: Vec<f64> = a
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad())?;
                match parts.as_slice() {
                    [re] => Ok(SampleFunction::Runge {
                        z0: C64::new(*re, 0.0),
                    }),
                    [re, im] => Ok(SampleFunction::Runge {
                        z0: C64::new(*re, *im),
                    }),
                    _ => Err(bad()),
                }
            }
            ("poly", Some(k)) => Ok(SampleFunction::Poly {
                k: k.trim().parse().map_err(|_| bad())?,
            }),
            ("laurent", Some(k)) => Ok(SampleFunction::Laurent {
                k: k.trim().parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}
