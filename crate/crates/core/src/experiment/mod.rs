//! Configured runs: phase portraits and the four-property suite on one chart.
//!
//! A suite evaluates, on the same metric, the Graves check between nested
//! leaves, the shift defect of the constructed string parameter, the Ivory
//! defect of random net quads and the reconstruction of the Liouville form.
//! Each check ends up as one entry of the report; an error inside a check
//! fails that entry and the remaining checks still run.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::billiard::{phase_portrait, PhasePoint, PhasePortrait};
use crate::curve::{ConvexCurve, CurveSpec};
use crate::error::{Error, Result};
use crate::metric::{ChartSpec, MetricChart};
use crate::net::{ivory_sweep, NetQuad};
use crate::string::{
    graves_check, poritsky_check_with, poritsky_parameter, poritsky_to_liouville, tune_p_ref,
    ConjugacyMethod, PoritskyParam, ReconstructionGrid,
};

/// Pass thresholds of the suite checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest distance from a constructed curve to the outer leaf.
    pub graves: f64,
    /// Largest shift defect of the string diffeomorphisms.
    pub poritsky: f64,
    /// Largest `|L+ − L−|` over the sampled quads.
    pub ivory: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            graves: 1e-6,
            poritsky: 1e-4,
            ivory: 1e-7,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        for (name, t) in [
            ("graves", self.graves),
            ("poritsky", self.poritsky),
            ("ivory", self.ivory),
        ] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!(
                    "tolerance {name} must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Random quads inside a coordinate box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSampling {
    #[serde(default = "default_quad_count")]
    pub count: usize,
    pub u: (f64, f64),
    pub v: (f64, f64),
    /// Range of side lengths, as coordinate differences.
    pub side: (f64, f64),
}

fn default_quad_count() -> usize {
    20
}

impl QuadSampling {
    /// Deterministic for a given seed.
    pub fn sample(&self, seed: u64) -> Result<Vec<NetQuad>> {
        let (lo, hi) = self.side;
        if !(lo > 0.0 && lo <= hi && hi < self.u.1 - self.u.0 && hi < self.v.1 - self.v.0) {
            return Err(Error::Config(format!(
                "quad sides {:?} do not fit the sampling box",
                self.side
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.count)
            .map(|_| {
                let du = rng.random_range(lo..=hi);
                let dv = rng.random_range(lo..=hi);
                let u1 = rng.random_range(self.u.0..=self.u.1 - du);
                let v1 = rng.random_range(self.v.0..=self.v.1 - dv);
                NetQuad::new(u1, u1 + du, v1, v1 + dv)
            })
            .collect()
    }
}

/// Where the reconstruction grid sits in the string parameters: `x` as a
/// fraction of the caustic, `y` spanned by the half shifts of two excesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionConfig {
    pub x: (f64, f64),
    pub excess: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            x: (0.05, 0.2),
            excess: (0.05, 0.3),
            nx: 21,
            ny: 13,
        }
    }
}

/// Inputs of [`run_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Nested convex curves, innermost first. The innermost one is the
    /// caustic of the string checks. Curves without a chart live in the
    /// suite chart.
    pub leaves: Vec<CurveSpec>,
    #[serde(default = "default_graves_samples")]
    pub graves_samples: usize,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    /// Orbit length of the conjugacy.
    #[serde(default = "default_orbit")]
    pub n: usize,
    /// Reference excess; tuned to a noble rotation number when absent.
    #[serde(default)]
    pub p_ref: Option<f64>,
    #[serde(default = "default_method")]
    pub method: ConjugacyMethod,
    #[serde(default = "default_shift_samples")]
    pub shift_samples: usize,
    pub quads: QuadSampling,
    #[serde(default)]
    pub reconstruction: ReconstructionConfig,
}

fn default_graves_samples() -> usize {
    9
}
fn default_p_list() -> Vec<f64> {
    vec![0.05, 0.1, 0.15, 0.2, 0.3]
}
fn default_orbit() -> usize {
    20_000
}
fn default_method() -> ConjugacyMethod {
    ConjugacyMethod::Spectral
}
fn default_shift_samples() -> usize {
    50
}

/// Inputs of [`run_phase_portrait`]: orbits started at arc length `s0` with
/// `p` evenly spaced over `p_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitConfig {
    pub table: CurveSpec,
    #[serde(default = "default_orbits")]
    pub orbits: usize,
    #[serde(default = "default_iterates")]
    pub iterates: usize,
    #[serde(default = "default_p_range")]
    pub p_range: (f64, f64),
    #[serde(default)]
    pub s0: f64,
}

fn default_orbits() -> usize {
    20
}
fn default_iterates() -> usize {
    200
}
fn default_p_range() -> (f64, f64) {
    (0.05, 0.95)
}

impl PortraitConfig {
    pub fn starts(&self) -> Vec<PhasePoint> {
        let (a, b) = self.p_range;
        let m = self.orbits;
        (0..m)
            .map(|k| {
                let p = if m == 1 {
                    a
                } else {
                    a + (b - a) * k as f64 / (m - 1) as f64
                };
                PhasePoint::new(self.s0, p)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// A complete experiment description, read from one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub chart: ChartSpec,
    /// Seed of the random quad sampling.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub suite: Option<SuiteConfig>,
    #[serde(default)]
    pub phase_portrait: Option<PortraitConfig>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.tolerances.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Phase portrait of the configured table.
pub fn run_phase_portrait(config: &ExperimentConfig) -> Result<PhasePortrait> {
    let pc = config
        .phase_portrait
        .as_ref()
        .ok_or_else(|| Error::Config("no \"phase_portrait\" section".into()))?;
    if pc.orbits == 0 || pc.iterates == 0 {
        return Err(Error::Config(
            "phase portrait needs orbits and iterates".into(),
        ));
    }
    let table = build_curve(&pc.table, &config.chart)?;
    Ok(phase_portrait(&table, &pc.starts(), pc.iterates))
}

/// One suite entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: String,
    pub passed: bool,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Value::is_null", default)]
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    /// The error came from the input rather than from a failed check.
    #[serde(default)]
    pub configuration_error: bool,
}

impl CheckOutcome {
    fn measured(check: &str, residual: f64, tolerance: f64, details: Value) -> Self {
        CheckOutcome {
            check: check.into(),
            passed: residual < tolerance,
            residual: Some(residual),
            tolerance: Some(tolerance),
            details,
            error: None,
            configuration_error: false,
        }
    }

    fn failed(check: &str, e: &Error) -> Self {
        CheckOutcome {
            check: check.into(),
            passed: false,
            residual: None,
            tolerance: None,
            details: Value::Null,
            error: Some(e.to_string()),
            configuration_error: e.is_configuration(),
        }
    }

    fn from_result(check: &str, r: Result<CheckOutcome>) -> Self {
        r.unwrap_or_else(|e| Self::failed(check, &e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    /// 0 when every check passes, 2 when any entry failed on bad input,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else if self.checks.iter().any(|c| c.configuration_error) {
            2
        } else {
            1
        }
    }

    pub fn get(&self, check: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.check == check)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

fn build_curve(spec: &CurveSpec, chart: &ChartSpec) -> Result<ConvexCurve> {
    match spec.chart {
        Some(_) => spec.build(),
        None => spec.build_in(chart.build()?),
    }
}

/// Runs the Graves, Poritsky, Ivory and reconstruction checks. Fails only
/// when the configuration has no suite section or the chart cannot be built.
pub fn run_suite(config: &ExperimentConfig) -> Result<SuiteReport> {
    let sc = config
        .suite
        .as_ref()
        .ok_or_else(|| Error::Config("no \"suite\" section".into()))?;
    config.tolerances.validate()?;
    let chart = config.chart.build()?;
    let tol = config.tolerances;

    let leaves: Result<Vec<ConvexCurve>> = sc
        .leaves
        .iter()
        .map(|l| build_curve(l, &config.chart))
        .collect();

    let graves = CheckOutcome::from_result(
        "graves",
        leaves
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|l| graves_entry(l, sc, tol.graves)),
    );

    let param = leaves.as_ref().map_err(Clone::clone).and_then(|l| {
        let caustic = l
            .first()
            .ok_or_else(|| Error::Config("suite needs at least one leaf".into()))?;
        let p_ref = match sc.p_ref {
            Some(p) => p,
            None => tune_p_ref(caustic, None, 2000)?,
        };
        Ok((
            caustic.clone(),
            poritsky_parameter(caustic, p_ref, sc.n, 0.0)?,
        ))
    });

    let poritsky = CheckOutcome::from_result(
        "poritsky",
        param
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|(c, par)| poritsky_entry(c, par, sc, tol.poritsky)),
    );

    let ivory = CheckOutcome::from_result("ivory", ivory_entry(&chart, sc, config.seed, tol.ivory));

    let reconstruction = CheckOutcome::from_result(
        "reconstruction",
        param
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|(c, par)| reconstruction_entry(c, par, sc)),
    );

    let checks = vec![graves, poritsky, ivory, reconstruction];
    Ok(SuiteReport {
        name: config.name.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn graves_entry(leaves: &[ConvexCurve], sc: &SuiteConfig, tol: f64) -> Result<CheckOutcome> {
    if leaves.len() < 2 {
        return Err(Error::Config("the Graves check needs two leaves".into()));
    }
    let mut pairs = vec![];
    let mut worst: f64 = 0.0;
    for j in 1..leaves.len() {
        for i in 0..j {
            let r = graves_check(leaves, i, j, sc.graves_samples)?;
            worst = worst.max(r.residual);
            pairs.push(json!({"inner": i, "outer": j, "excess": r.excess, "residual": r.residual}));
        }
    }
    Ok(CheckOutcome::measured(
        "graves",
        worst,
        tol,
        json!({ "pairs": pairs }),
    ))
}

fn poritsky_entry(
    caustic: &ConvexCurve,
    par: &PoritskyParam,
    sc: &SuiteConfig,
    tol: f64,
) -> Result<CheckOutcome> {
    let shifts = poritsky_check_with(caustic, par, &sc.p_list, sc.method, sc.shift_samples)?;
    let worst = shifts.iter().map(|s| s.defect).fold(0.0, f64::max);
    Ok(CheckOutcome::measured(
        "poritsky",
        worst,
        tol,
        json!({
            "p_ref": par.p_ref,
            "rotation_number": par.rho,
            "orbit": par.n,
            "shifts": shifts,
        }),
    ))
}

fn ivory_entry(chart: &MetricChart, sc: &SuiteConfig, seed: u64, tol: f64) -> Result<CheckOutcome> {
    let quads = sc.quads.sample(seed)?;
    let mut worst: f64 = 0.0;
    let mut rows = vec![];
    for (q, r) in quads.iter().zip(ivory_sweep(chart, &quads)) {
        let r = r?;
        worst = worst.max(r.defect);
        rows.push(json!({"quad": [q.u1, q.u2, q.v1, q.v2], "defect": r.defect}));
    }
    Ok(CheckOutcome::measured(
        "ivory",
        worst,
        tol,
        json!({ "quads": rows }),
    ))
}

fn reconstruction_entry(
    caustic: &ConvexCurve,
    par: &PoritskyParam,
    sc: &SuiteConfig,
) -> Result<CheckOutcome> {
    let rc = sc.reconstruction;
    let (p0, p1) = rc.excess;
    let shifts = poritsky_check_with(caustic, par, &[p0, p1], sc.method, 8)?;
    let grid = ReconstructionGrid::new(
        rc.x,
        (0.5 * shifts[0].shift, 0.5 * shifts[1].shift),
        rc.nx,
        rc.ny,
    );
    let rec = poritsky_to_liouville(caustic, par, &grid)?;
    let r = rec.report;
    // worst stage relative to its own tolerance
    let fields = serde_json::to_value(r)?;
    let ratio = crate::string::ReconstructionReport::TOLERANCES
        .iter()
        .map(|(k, t)| fields[*k].as_f64().unwrap_or(f64::INFINITY) / t)
        .fold(0.0, f64::max);
    let mut out = CheckOutcome::measured("reconstruction", ratio, 1.0, json!({ "report": r }));
    out.passed = r.passes();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quads_are_seeded() {
        let qs = QuadSampling {
            count: 5,
            u: (0.0, 1.0),
            v: (-1.0, 0.0),
            side: (0.1, 0.3),
        };
        let a = qs.sample(7).unwrap();
        assert_eq!(a, qs.sample(7).unwrap());
        assert_ne!(a, qs.sample(8).unwrap());
        for q in a {
            assert!(q.u1 >= 0.0 && q.u2 <= 1.0 && q.v1 >= -1.0 && q.v2 <= 0.0);
            assert!((0.1..=0.3).contains(&(q.u2 - q.u1)));
        }
        let bad = QuadSampling {
            side: (0.1, 2.0),
            ..qs
        };
        assert!(bad.sample(0).unwrap_err().is_configuration());
    }

    #[test]
    fn tolerances_must_be_positive() {
        let text = r#"{"name": "x", "chart": {"builder": "euclidean_cartesian"},
                       "tolerances": {"ivory": 0.0}}"#;
        assert!(matches!(
            ExperimentConfig::from_json(text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"name": "x", "chart": {"builder": "euclidean_cartesian"}, "sead": 3}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn circle_portrait_is_flat() {
        let text = r#"{"name": "circle", "chart": {"builder": "euclidean_cartesian"},
            "phase_portrait": {"table": {"shape": {"kind": "circle", "radius": 1.0}},
                               "orbits": 4, "iterates": 30}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let pp = run_phase_portrait(&cfg).unwrap();
        assert!(pp.failures.is_empty());
        assert_eq!(pp.rows.len(), 4 * 31);
        for &(o, _, _, p) in &pp.rows {
            let p0 = cfg.phase_portrait.as_ref().unwrap().starts()[o].p;
            assert!((p - p0).abs() < 1e-10);
        }
    }

    #[test]
    fn missing_section_is_configuration_error() {
        let text = r#"{"name": "x", "chart": {"builder": "euclidean_cartesian"}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert!(run_suite(&cfg).unwrap_err().is_configuration());
        assert!(run_phase_portrait(&cfg).unwrap_err().is_configuration());
    }
}
