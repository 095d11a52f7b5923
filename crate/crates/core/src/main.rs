use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use caustics::billiard::{orbit, poncelet_family_search, poncelet_search, PhasePoint};
use caustics::curve::{ConvexCurve, CurveSpec, ShapeSpec};
use caustics::experiment::{run_phase_portrait, run_suite, ExperimentConfig};
use caustics::geodesic::{connect, geodesic_ivp, GeodesicState};
use caustics::metric::{ChartSpec, MetricChart};
use caustics::net::{classify_planar_net, ivory_check, ClassifierOptions, NetQuad, SampledNet};
use caustics::string::{
    graves_check, poritsky_check_with, poritsky_parameter, poritsky_to_liouville, string_curve,
    string_diffeo, string_potential_check, tune_p_ref, ConjugacyMethod, ReconstructionGrid,
};
use caustics::{Error, Result};

/// Billiards, caustics and Liouville nets on Riemannian surfaces.
///
/// Charts and curves are given as JSON, either inline or as a file path.
/// Exit status: 0 success, 1 failed check, 2 bad input.
#[derive(Parser)]
#[command(name = "caustics", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Metric tensor queries.
    #[command(subcommand)]
    Metric(MetricCmd),
    /// Geodesic integration and two-point problems.
    #[command(subcommand)]
    Geodesic(GeodesicCmd),
    /// Billiard orbits, phase portraits, periodic orbits.
    #[command(subcommand)]
    Billiard(BilliardCmd),
    /// String construction and the properties built on it.
    #[command(subcommand)]
    String(StringCmd),
    /// Orthogonal nets.
    #[command(subcommand)]
    Net(NetCmd),
    /// Batch checks from a config file.
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(Args)]
struct ChartArg {
    /// Chart spec (JSON or path); the Euclidean plane by default.
    #[arg(long)]
    chart: Option<String>,
}

impl ChartArg {
    fn spec(&self) -> Result<ChartSpec> {
        match &self.chart {
            Some(s) => ChartSpec::from_json(&read_spec(s)?),
            None => ChartSpec::from_json(r#"{"builder": "euclidean_cartesian"}"#),
        }
    }

    fn build(&self) -> Result<MetricChart> {
        self.spec()?.build()
    }

    /// A curve spec without its own chart is placed in this chart.
    fn curve(&self, spec: &str) -> Result<ConvexCurve> {
        let c = CurveSpec::from_json(&read_spec(spec)?)?;
        match (&c.chart, &self.chart) {
            (None, Some(_)) => c.build_in(self.build()?),
            _ => c.build(),
        }
    }
}

#[derive(Args)]
struct OutArg {
    /// Output file; stdout when absent or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArg {
    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) if p.as_os_str() != "-" => Box::new(BufWriter::new(File::create(p)?)),
            _ => Box::new(io::stdout().lock()),
        })
    }

    fn json(&self, v: &Value) -> Result<()> {
        let mut w = self.writer()?;
        writeln!(w, "{}", serde_json::to_string_pretty(v)?)?;
        Ok(())
    }
}

#[derive(Subcommand)]
enum MetricCmd {
    /// Metric tensor and Christoffel symbols at a point.
    Eval {
        #[command(flatten)]
        chart: ChartArg,
        /// Point `u,v`.
        #[arg(long, value_parser = pair)]
        at: [f64; 2],
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum GeodesicCmd {
    /// Integrate from a point and direction; writes the path as CSV with `--out`.
    Shoot {
        #[command(flatten)]
        chart: ChartArg,
        #[arg(long, value_parser = pair)]
        from: [f64; 2],
        /// Direction `du,dv` (normalized).
        #[arg(long, value_parser = pair)]
        dir: [f64; 2],
        #[arg(long)]
        length: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Shortest geodesic between two points.
    Connect {
        #[command(flatten)]
        chart: ChartArg,
        #[arg(long, value_parser = pair)]
        from: [f64; 2],
        #[arg(long, value_parser = pair)]
        to: [f64; 2],
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum BilliardCmd {
    /// Iterates of the billiard map as CSV `k,s,p`.
    Orbit {
        #[command(flatten)]
        chart: ChartArg,
        /// Table curve spec.
        #[arg(long)]
        table: String,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Phase portrait CSV `orbit,k,s,p` from an experiment config.
    PhasePortrait {
        #[arg(long)]
        config: PathBuf,
        /// Ignored: the start grid is deterministic. Accepted for uniformity.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Periodic orbit tangent to a caustic, and closure of ten more. Without
    /// `--caustic` the table must be a confocal ellipse, and the caustic is
    /// searched for in its confocal family (one turn per period).
    Poncelet {
        #[command(flatten)]
        chart: ChartArg,
        #[arg(long)]
        table: String,
        #[arg(long)]
        caustic: Option<String>,
        /// Period.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum StringCmd {
    /// The curve Γ_p as CSV `a,b,x,y,len_ac,len_bc,excess`.
    Build {
        #[command(flatten)]
        chart: ChartArg,
        #[arg(long)]
        caustic: String,
        #[arg(long)]
        excess: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Image of a caustic parameter under the string diffeomorphism.
    Diffeo {
        #[command(flatten)]
        chart: ChartArg,
        #[arg(long)]
        caustic: String,
        #[arg(long)]
        excess: f64,
        #[arg(long)]
        at: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Shift parameter of a closed caustic and its defect over `--p-list`.
    Poritsky {
        #[command(flatten)]
        chart: ChartArg,
        #[arg(long)]
        caustic: String,
        /// Reference excess; tuned automatically when absent.
        #[arg(long)]
        pref: Option<f64>,
        #[arg(long = "N", default_value_t = 20_000)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
        p_list: Vec<f64>,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Builds each outer leaf from each inner one.
    Graves {
        #[command(flatten)]
        chart: ChartArg,
        /// Leaf specs, innermost first (repeat the flag).
        #[arg(long = "leaf", required = true, num_args = 1)]
        leaves: Vec<String>,
        #[arg(long, default_value_t = 9)]
        samples: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Checks that Γ_p is a level set of the string potentials φ + ψ and
    /// that φ − ψ is orthogonal to it.
    Potentials {
        #[command(flatten)]
        chart: ChartArg,
        #[arg(long)]
        caustic: String,
        #[arg(long)]
        excess: f64,
        #[arg(long, default_value_t = 12)]
        samples: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Liouville form of the exterior metric from the shift parameter.
    Reconstruct {
        #[command(flatten)]
        chart: ChartArg,
        #[arg(long)]
        caustic: String,
        #[arg(long)]
        pref: Option<f64>,
        #[arg(long = "N", default_value_t = 20_000)]
        n: usize,
        /// Range of `x` as a fraction of the caustic.
        #[arg(long, value_parser = pair, default_value = "0.05,0.2")]
        x: [f64; 2],
        /// Excesses whose half shifts bound `y`.
        #[arg(long, value_parser = pair, default_value = "0.05,0.3")]
        excess: [f64; 2],
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum NetCmd {
    /// Diagonal lengths of a coordinate quad.
    Ivory {
        #[command(flatten)]
        chart: ChartArg,
        /// `u1,u2,v1,v2`.
        #[arg(long, value_parser = quad)]
        quad: NetQuad,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Type of a sampled planar net (CSV with columns u,v,x,y).
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Tolerance of the conic and line fits.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum SuiteCmd {
    /// Graves, Poritsky, Ivory and reconstruction checks on one chart.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArg,
    },
}

fn pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let v = floats(s)?;
    <[f64; 2]>::try_from(v).map_err(|_| format!("expected two numbers, got `{s}`"))
}

fn quad(s: &str) -> std::result::Result<NetQuad, String> {
    let v = floats(s)?;
    match v[..] {
        [u1, u2, v1, v2] => NetQuad::new(u1, u2, v1, v2).map_err(|e| e.to_string()),
        _ => Err(format!("expected u1,u2,v1,v2, got `{s}`")),
    }
}

fn floats(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

/// Inline JSON, or the contents of the named file.
fn read_spec(s: &str) -> Result<String> {
    if s.trim_start().starts_with('{') {
        Ok(s.to_string())
    } else {
        std::fs::read_to_string(Path::new(s)).map_err(|e| Error::Io(format!("{s}: {e}")))
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

/// Runs one command; the value is the exit status once output is written.
fn run(cli: Cli) -> Result<u8> {
    let verdict = |ok: bool| if ok { 0 } else { 1 };
    match cli.command {
        Command::Metric(MetricCmd::Eval { chart, at, out }) => {
            let c = chart.build()?;
            let g = c.eval_metric(at)?;
            let gamma = c.christoffel(at)?.gamma;
            out.json(&json!({"point": at, "metric": g, "christoffel": gamma}))?;
        }
        Command::Geodesic(GeodesicCmd::Shoot {
            chart,
            from,
            dir,
            length,
            out,
        }) => {
            let c = chart.build()?;
            let path = geodesic_ivp(&c, GeodesicState::new(from, dir), length)?;
            match &out.out {
                Some(_) => path.write_csv(out.writer()?)?,
                None => {
                    let e = path.end();
                    OutArg { out: None }.json(&json!({
                        "end": e.pos, "velocity": e.vel,
                        "length": path.length, "exited": path.exited,
                    }))?;
                }
            }
        }
        Command::Geodesic(GeodesicCmd::Connect {
            chart,
            from,
            to,
            out,
        }) => {
            let c = chart.build()?;
            let k = connect(&c, from, to)?;
            out.json(&json!({
                "length": k.length,
                "start_velocity": k.start.vel,
                "end_velocity": k.end.vel,
            }))?;
        }
        Command::Billiard(BilliardCmd::Orbit {
            chart,
            table,
            s,
            p,
            n,
            out,
        }) => {
            let t = chart.curve(&table)?;
            let orb = orbit(&t, PhasePoint::new(s, p), n)?;
            let mut w = csv::Writer::from_writer(out.writer()?);
            w.write_record(["k", "s", "p"])?;
            for (k, (_, ph, _)) in orb.iter().enumerate() {
                w.write_record(&[k.to_string(), fmt(ph.s), fmt(ph.p)])?;
            }
            w.flush()?;
        }
        Command::Billiard(BilliardCmd::PhasePortrait {
            config,
            seed: _,
            out,
        }) => {
            let cfg = ExperimentConfig::load(&config)?;
            let pp = run_phase_portrait(&cfg)?;
            let target = out.out.clone().or(cfg.outputs.csv.clone());
            pp.write_csv(OutArg { out: target }.writer()?)?;
            for (o, k, e) in &pp.failures {
                eprintln!("orbit {o} stopped at iterate {k}: {e}");
            }
        }
        Command::Billiard(BilliardCmd::Poncelet {
            chart,
            table,
            caustic,
            n,
            tol,
            out,
        }) => {
            let t = chart.curve(&table)?;
            let (c, lambda) = match caustic {
                Some(c) => (chart.curve(&c)?, None),
                None => {
                    let spec = CurveSpec::from_json(&read_spec(&table)?)?;
                    let ShapeSpec::ConfocalEllipse { a, b, lambda } = spec.shape else {
                        return Err(Error::Config(
                            "--caustic is required unless the table is a confocal ellipse".into(),
                        ));
                    };
                    let eps = 0.02 * (lambda + b);
                    let fam = |l: f64| ConvexCurve::confocal_ellipse(a, b, l);
                    match poncelet_family_search(&t, fam, (-b + eps, lambda - eps), n, 1)? {
                        Some((l, c)) => (c, Some(l)),
                        None => {
                            out.json(&json!({"found": false}))?;
                            return Ok(1);
                        }
                    }
                }
            };
            match poncelet_search(&t, &c, n, tol)? {
                Some(o) => {
                    out.json(&json!({
                        "found": true,
                        "caustic_lambda": lambda,
                        "start": {"s": o.start.s, "p": o.start.p},
                        "winding": o.winding,
                        "closure": o.closure,
                        "others_max_closure": o.others.max,
                        "others": o.others.closures,
                    }))?;
                    return Ok(verdict(o.others.max < tol));
                }
                None => {
                    out.json(&json!({"found": false}))?;
                    return Ok(1);
                }
            }
        }
        Command::String(StringCmd::Build {
            chart,
            caustic,
            excess,
            samples,
            out,
        }) => {
            let g = chart.curve(&caustic)?;
            let sc = string_curve(&g, excess, samples)?;
            let mut w = csv::Writer::from_writer(out.writer()?);
            w.write_record(["a", "b", "x", "y", "len_ac", "len_bc", "excess"])?;
            for r in &sc.records {
                w.write_record(&[
                    fmt(r.a_param),
                    fmt(r.b_param),
                    fmt(r.c[0]),
                    fmt(r.c[1]),
                    fmt(r.len_ac),
                    fmt(r.len_bc),
                    fmt(r.excess),
                ])?;
            }
            w.flush()?;
        }
        Command::String(StringCmd::Diffeo {
            chart,
            caustic,
            excess,
            at,
            out,
        }) => {
            let g = chart.curve(&caustic)?;
            let b = string_diffeo(&g, excess, at)?;
            out.json(&json!({"a": at, "b": b, "excess": excess}))?;
        }
        Command::String(StringCmd::Poritsky {
            chart,
            caustic,
            pref,
            n,
            p_list,
            tol,
            out,
        }) => {
            let g = chart.curve(&caustic)?;
            let p_ref = match pref {
                Some(p) => p,
                None => tune_p_ref(&g, None, 2000)?,
            };
            let par = poritsky_parameter(&g, p_ref, n, 0.0)?;
            let shifts = poritsky_check_with(&g, &par, &p_list, ConjugacyMethod::Spectral, 50)?;
            let worst = shifts.iter().map(|s| s.defect).fold(0.0, f64::max);
            out.json(&json!({
                "parameter": par,
                "shifts": shifts,
                "max_defect": worst,
                "passed": worst < tol,
            }))?;
            return Ok(verdict(worst < tol));
        }
        Command::String(StringCmd::Graves {
            chart,
            leaves,
            samples,
            tol,
            out,
        }) => {
            let ls = leaves
                .iter()
                .map(|l| chart.curve(l))
                .collect::<Result<Vec<_>>>()?;
            let mut pairs = vec![];
            let mut worst: f64 = 0.0;
            for j in 1..ls.len() {
                for i in 0..j {
                    let r = graves_check(&ls, i, j, samples)?;
                    worst = worst.max(r.residual);
                    pairs.push(
                        json!({"inner": i, "outer": j, "excess": r.excess, "residual": r.residual}),
                    );
                }
            }
            out.json(&json!({"pairs": pairs, "max_residual": worst, "passed": worst < tol}))?;
            return Ok(verdict(worst < tol));
        }
        Command::String(StringCmd::Potentials {
            chart,
            caustic,
            excess,
            samples,
            tol,
            out,
        }) => {
            let g = chart.curve(&caustic)?;
            let r = string_potential_check(&g, excess, samples, 1e-5)?;
            let ok = r.worst() < tol;
            let mut v = serde_json::to_value(r)?;
            v["passed"] = json!(ok);
            out.json(&v)?;
            return Ok(verdict(ok));
        }
        Command::String(StringCmd::Reconstruct {
            chart,
            caustic,
            pref,
            n,
            x,
            excess,
            out,
        }) => {
            let g = chart.curve(&caustic)?;
            let p_ref = match pref {
                Some(p) => p,
                None => tune_p_ref(&g, None, 2000)?,
            };
            let par = poritsky_parameter(&g, p_ref, n, 0.0)?;
            let sh = poritsky_check_with(&g, &par, &excess, ConjugacyMethod::Spectral, 8)?;
            let grid = ReconstructionGrid::new(
                (x[0], x[1]),
                (0.5 * sh[0].shift, 0.5 * sh[1].shift),
                21,
                13,
            );
            let rec = poritsky_to_liouville(&g, &par, &grid)?;
            out.json(&serde_json::to_value(rec.report)?)?;
            return Ok(verdict(rec.report.passes()));
        }
        Command::Net(NetCmd::Ivory {
            chart,
            quad,
            tol,
            out,
        }) => {
            let c = chart.build()?;
            let r = ivory_check(&c, quad)?;
            out.json(&json!({
                "quad": quad,
                "l_plus": r.l_plus,
                "l_minus": r.l_minus,
                "defect": r.defect,
                "passed": r.defect < tol,
            }))?;
            return Ok(verdict(r.defect < tol));
        }
        Command::Net(NetCmd::Classify { input, tol, out }) => {
            let net = SampledNet::read_csv(File::open(&input)?)?;
            let mut opts = ClassifierOptions::default();
            if let Some(t) = tol {
                opts.tol_conic = t;
                opts.tol_line = t;
            }
            let c = classify_planar_net(&net, &opts)?;
            out.json(&serde_json::to_value(c)?)?;
        }
        Command::Suite(SuiteCmd::Run { config, seed, out }) => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = run_suite(&cfg)?;
            let target = out.out.clone().or(cfg.outputs.report.clone());
            OutArg { out: target }
                .writer()?
                .write_all(report.to_json().as_bytes())?;
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!(
                    "{}: FAIL{}",
                    c.check,
                    c.error
                        .as_ref()
                        .map(|e| format!(" ({e})"))
                        .unwrap_or_default()
                );
            }
            return Ok(report.exit_code() as u8);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_configuration() { 2 } else { 1 })
        }
    }
}
