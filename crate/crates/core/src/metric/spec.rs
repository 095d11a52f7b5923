//! Structured-text chart descriptions.

use serde::{Deserialize, Serialize};

use super::chart::{
    confocal_elliptic, confocal_parabolic, conformal, euclidean_cartesian, euclidean_polar,
    liouville_chart, ConformalPoly, Domain, LiouvilleSpec, MetricChart,
};
use super::func::{CubicSpline, Func1};
use crate::error::{Error, Result};

/// One-variable function in a chart description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuncSpec {
    Const(f64),
    /// Coefficients in increasing degree.
    Poly(Vec<f64>),
    Spline {
        x: Vec<f64>,
        y: Vec<f64>,
    },
}

impl FuncSpec {
    pub fn build(&self) -> Result<Func1> {
        Ok(match self {
            FuncSpec::Const(c) => Func1::Const(*c),
            FuncSpec::Poly(c) => Func1::Poly(c.clone()),
            FuncSpec::Spline { x, y } => Func1::Spline(CubicSpline::new(x.clone(), y.clone())?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case")]
pub enum ChartKindSpec {
    EuclideanCartesian,
    EuclideanPolar,
    ConfocalElliptic {
        a: f64,
        b: f64,
    },
    ConfocalParabolic {
        a: f64,
    },
    SyntheticLiouville {
        u1: FuncSpec,
        v1: FuncSpec,
        u2: FuncSpec,
        v2: FuncSpec,
    },
    /// `F(u, v)(du² + dv²)` with `F = Σ c u^i v^j`, terms as `[i, j, c]`.
    Conformal {
        poly: Vec<(u32, u32, f64)>,
    },
}

/// A chart description: builder plus optional overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    #[serde(flatten)]
    pub kind: ChartKindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convexity_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl ChartSpec {
    pub fn new(kind: ChartKindSpec) -> Self {
        ChartSpec {
            kind,
            domain: None,
            margin: None,
            convexity_radius: None,
        }
    }

    pub fn with_domain(mut self, u: (f64, f64), v: (f64, f64)) -> Self {
        self.domain = Some(DomainSpec { u, v });
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<MetricChart> {
        let need_domain = || {
            self.domain.ok_or_else(|| {
                Error::Config("this chart builder requires an explicit \"domain\"".into())
            })
        };
        let mut chart = match &self.kind {
            ChartKindSpec::EuclideanCartesian => euclidean_cartesian(),
            ChartKindSpec::EuclideanPolar => euclidean_polar(),
            ChartKindSpec::ConfocalElliptic { a, b } => confocal_elliptic(*a, *b)?,
            ChartKindSpec::ConfocalParabolic { a } => confocal_parabolic(*a)?,
            ChartKindSpec::SyntheticLiouville { u1, v1, u2, v2 } => {
                let d = need_domain()?;
                liouville_chart(LiouvilleSpec {
                    u1: u1.build()?,
                    v1: v1.build()?,
                    u2: u2.build()?,
                    v2: v2.build()?,
                    u_range: d.u,
                    v_range: d.v,
                })?
            }
            ChartKindSpec::Conformal { poly } => {
                let d = need_domain()?;
                conformal(
                    ConformalPoly {
                        terms: poly.clone(),
                    },
                    Domain::new(d.u, d.v, 1e-6),
                )?
            }
        };
        if let Some(d) = self.domain {
            if !(d.u.0 < d.u.1 && d.v.0 < d.v.1) {
                return Err(Error::Config("domain bounds must be increasing".into()));
            }
            let margin = chart.domain.margin;
            chart.domain = Domain::new(d.u, d.v, margin);
            if !matches!(
                self.kind,
                ChartKindSpec::EuclideanCartesian
                    | ChartKindSpec::ConfocalElliptic { .. }
                    | ChartKindSpec::ConfocalParabolic { .. }
            ) {
                chart.convexity_radius = 0.2 * chart.domain.min_span();
            }
            chart.fd_step = 1e-5 * chart.domain.max_span();
            chart.validate(41)?;
        }
        if let Some(m) = self.margin {
            if !(m >= 0.0) {
                return Err(Error::Config("margin must be non-negative".into()));
            }
            chart.domain.margin = m;
        }
        if let Some(r) = self.convexity_radius {
            if !(r > 0.0) {
                return Err(Error::Config("convexity_radius must be positive".into()));
            }
            chart.convexity_radius = r;
        }
        Ok(chart.with_spec(self.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builders() {
        let s = ChartSpec::from_json(r#"{"builder":"confocal_elliptic","a":2.0,"b":1.0}"#).unwrap();
        let c = s.build().unwrap();
        let g = c.eval_metric([0.618034, -1.618034]).unwrap();
        assert!((g.g11 - 0.1320).abs() < 1e-3);

        let s = ChartSpec::from_json(
            r#"{"builder":"synthetic_liouville","u1":{"poly":[0,1]},"v1":{"const":-1},
                "u2":{"const":1},"v2":{"const":1},"domain":{"u":[0,2],"v":[0,1]}}"#,
        )
        .unwrap();
        let c = s.build().unwrap();
        assert_eq!(c.eval_metric([0.5, 0.5]).unwrap().g11, 1.5);
        let round = serde_json::to_string(&s).unwrap();
        assert_eq!(ChartSpec::from_json(&round).unwrap(), s);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ChartSpec::from_json(r#"{"builder":"nope"}"#).is_err());
        let s = ChartSpec::from_json(r#"{"builder":"conformal","poly":[[0,0,1.0]]}"#).unwrap();
        assert!(matches!(s.build(), Err(Error::Config(_))));
        let s = ChartSpec::from_json(
            r#"{"builder":"synthetic_liouville","u1":{"poly":[0,1]},"v1":{"const":0},
                "u2":{"const":1},"v2":{"const":1},"domain":{"u":[-1,1],"v":[0,1]}}"#,
        )
        .unwrap();
        assert!(matches!(s.build(), Err(Error::NotPositiveDefinite { .. })));
    }
}
