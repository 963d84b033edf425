//! The `plt` command line. Every subcommand is a file-to-file transform;
//! failures print one JSON line `{"error": ..., "command": ...}` to stderr.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::estimators::{empirical_fv, empirical_g, estimate_f, estimate_f0, EmpiricalInputs, Erosion};
use crate::harness::{run_study, write_curves_csv, write_results_csv, write_summary_json, StudyConfig};
use crate::io::{load_gens, load_step, save_gens, save_step, write_curve_csv};
use crate::numeric::ExtReal;
use crate::plot::{render_plot, render_tessellation, Curve, CurveData, CurveStyle, PlotSpec};
use crate::process::{
    default_guard, sample, section_sample, window_for_target_count, CdfModel, SectionModel, Window,
};
use crate::stepfn::StepCdf;
use crate::stereology::{isotonic_h, plugin_h};

#[derive(Debug, Parser)]
#[command(name = "plt", version, about = "Poisson–Laguerre tessellations: simulation and estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a planar weighted Poisson generator set.
    Simulate(SimulateArgs),
    /// Sample the planar section of a spatial process.
    Section(SectionArgs),
    /// Render the Laguerre tessellation of a generator set as SVG.
    Tessellate(TessellateArgs),
    /// Estimate a distribution function from a generator set.
    Estimate(EstimateArgs),
    /// Isotonic estimate of the spatial weight distribution from section data.
    Stereo(StereoArgs),
    /// Run a Monte Carlo study described by a JSON config.
    Study(StudyArgs),
    /// Plot step functions and curves as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Expected number of own-cell generators in the window.
    #[arg(long, conflicts_with = "window")]
    pub pn: Option<f64>,
    /// Observation window `xmin,ymin,xmax,ymax`.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub window: Option<Vec<f64>>,
    /// Guard margin, or `auto`.
    #[arg(long, default_value = "auto")]
    pub guard: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `step:<csv>`, `discrete:<csv>`, `uniform:M=<v>` or `f2`.
    #[arg(long)]
    pub dist: String,
    #[command(flatten)]
    pub common: WindowArgs,
}

#[derive(Debug, Args)]
pub struct SectionArgs {
    /// Distribution of the spatial weights, same syntax as `simulate --dist`.
    #[arg(long = "distH")]
    pub dist_h: String,
    /// Truncation of the planar weights, or `auto`.
    #[arg(long, default_value = "auto")]
    pub hmax: String,
    #[command(flatten)]
    pub common: WindowArgs,
}

#[derive(Debug, Args)]
pub struct TessellateArgs {
    #[arg(long)]
    pub gens: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Draw a circle at each generator with radius proportional to its weight.
    #[arg(long)]
    pub circles: bool,
    /// Clip to the observation window instead of the simulation region.
    #[arg(long)]
    pub window_only: bool,
    #[arg(long, default_value_t = 640.0)]
    pub width: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimateKind {
    G,
    F0,
    Fv,
    F,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(value_enum)]
    pub kind: EstimateKind,
    #[arg(long)]
    pub gens: PathBuf,
    /// Erosion margin of the counting window, or `auto` (the guard).
    #[arg(long, default_value = "auto")]
    pub erode: String,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON sidecar for `estimate f`; defaults to the output path with a
    /// `.meta.json` extension.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StereoArgs {
    #[arg(long)]
    pub fbar: PathBuf,
    /// Truncation point, or `inf`.
    #[arg(long = "M", default_value = "inf")]
    pub m: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the plug-in estimate as `z,value` rows.
    #[arg(long)]
    pub plugin: Option<PathBuf>,
    /// Plug-in grid `start,end,count`; jump points are always added.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results.csv")]
    pub out: PathBuf,
    #[arg(long)]
    pub curves: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Overrides the config's root seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Input files: `h,value` step CSVs or `z,value` curve CSVs.
    #[arg(long = "in", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Reference: a step CSV, `f2`, or `uniform:M=<v>`.
    #[arg(long = "ref")]
    pub reference: Option<String>,
    /// Add the pointwise average of the step inputs as a thick line.
    #[arg(long)]
    pub average: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub xrange: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub yrange: Option<Vec<f64>>,
    #[arg(long, default_value_t = 640.0)]
    pub width: f64,
    #[arg(long, default_value_t = 420.0)]
    pub height: f64,
}

/// Parses a distribution spec relative to the working directory.
pub fn parse_distribution(spec: &str) -> Result<CdfModel> {
    let spec = spec.trim();
    let model = if let Some(path) = spec.strip_prefix("step:").or_else(|| spec.strip_prefix("discrete:")) {
        CdfModel::Step(load_step(Path::new(path))?)
    } else if let Some(rest) = spec.strip_prefix("uniform:") {
        let m = rest
            .strip_prefix("M=")
            .ok_or_else(|| Error::invalid(format!("expected `uniform:M=<v>`, found `{spec}`")))?;
        CdfModel::f1(parse_number(m)?)
    } else if spec.eq_ignore_ascii_case("f2") {
        CdfModel::f2()
    } else {
        return Err(Error::invalid(format!("unknown distribution `{spec}`")));
    };
    model.validate()?;
    Ok(model)
}

fn parse_number(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| Error::invalid(format!("`{s}` is not a number"))),
    }
}

fn auto_or(s: &str) -> Result<Option<f64>> {
    if s.trim() == "auto" {
        Ok(None)
    } else {
        parse_number(s).map(Some)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::from(e).context(path.display().to_string()))
}

fn resolve_window(args: &WindowArgs, for_target: impl FnOnce(f64) -> Result<Window>) -> Result<Window> {
    match (&args.window, args.pn) {
        (Some(w), None) => Window::new(vec![w[0], w[1]], vec![w[2], w[3]]),
        (None, Some(pn)) if pn > 0.0 => for_target(pn),
        (None, Some(pn)) => Err(Error::invalid(format!("--pn must be positive, got {pn}"))),
        _ => Err(Error::invalid("give exactly one of --pn and --window")),
    }
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let model = parse_distribution(&a.dist)?;
    let window = resolve_window(&a.common, |pn| window_for_target_count(&model, 2, pn))?;
    let guard = auto_or(&a.common.guard)?.unwrap_or_else(|| default_guard(&model));
    let gens = sample(&model, &window, guard, a.common.seed)?;
    save_gens(&gens, &a.common.out)
}

fn section(a: &SectionArgs) -> Result<()> {
    let h = parse_distribution(&a.dist_h)?;
    let sm = SectionModel::new(h.clone())?;
    let hmax = auto_or(&a.hmax)?.unwrap_or_else(|| sm.default_hmax());
    let window = resolve_window(&a.common, |pn| sm.window_for_target_count(pn))?;
    let guard = auto_or(&a.common.guard)?.unwrap_or_else(|| sm.default_guard(hmax));
    let gens = section_sample(&h, &window, guard, hmax, a.common.seed)?;
    save_gens(&gens, &a.common.out)
}

fn tessellate_cmd(a: &TessellateArgs) -> Result<()> {
    let gens = load_gens(&a.gens)?;
    if gens.d != 2 {
        return Err(Error::Dimension { expected: 2, found: gens.d });
    }
    let clip = if a.window_only { gens.window.rect()? } else { gens.region().rect()? };
    let tess = crate::geometry::tessellate(&gens.points, &clip)?;
    let svg = render_tessellation(&tess, a.circles.then_some(&gens), a.width);
    let mut w = create(&a.out)?;
    w.write_all(svg.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn estimate(a: &EstimateArgs) -> Result<()> {
    let gens = load_gens(&a.gens)?;
    let erosion = match auto_or(&a.erode)? {
        None => Erosion::Auto,
        Some(m) => Erosion::Margin(m),
    };
    let inp = EmpiricalInputs::new(gens, erosion)?;
    let out = match a.kind {
        EstimateKind::G => empirical_g(&inp)?,
        EstimateKind::F0 => estimate_f0(&inp)?,
        EstimateKind::Fv => empirical_fv(&inp.with_tessellation()?)?.1,
        EstimateKind::F => {
            let est = estimate_f(&inp.with_tessellation()?)?;
            let side = a.sidecar.clone().unwrap_or_else(|| a.out.with_extension("meta.json"));
            if side == a.gens {
                return Err(Error::invalid("the sidecar path would overwrite the generator file"));
            }
            let doc = serde_json::json!({
                "m_hat": est.m_hat,
                "warnings": est.warnings.iter().map(|w| serde_json::json!({
                    "index": w.index,
                    "location": w.location,
                    "numerator": w.numerator,
                    "denominator": w.denominator,
                    "message": w.to_string(),
                })).collect::<Vec<_>>(),
            });
            let mut w = create(&side)?;
            serde_json::to_writer_pretty(&mut w, &doc)?;
            w.flush()?;
            for warn in &est.warnings {
                eprintln!("warning: {warn}");
            }
            est.f
        }
    };
    save_step(&out, &a.out)
}

fn stereo(a: &StereoArgs) -> Result<()> {
    let fbar = load_step(&a.fbar)?;
    let m = parse_number(&a.m)?;
    let res = isotonic_h(&fbar, m.is_finite().then_some(m))?;
    save_step(&res.h, &a.out)?;
    if let Some(path) = &a.plugin {
        let top = fbar.locations().last().copied().unwrap_or(1.0);
        let (start, end, n) = match &a.grid {
            Some(g) => (g[0], g[1], g[2]),
            None => (0.0, 1.05 * top, 200.0),
        };
        if !(n >= 2.0 && end > start && n.fract() == 0.0) {
            return Err(Error::invalid("--grid needs start < end and an integer count >= 2"));
        }
        let n = n as usize;
        let mut zs: Vec<f64> = (0..n).map(|i| start + (end - start) * i as f64 / (n - 1) as f64).collect();
        zs.extend(fbar.locations().iter().filter(|&&h| h >= start && h <= end));
        zs.sort_by(f64::total_cmp);
        zs.dedup();
        let rows: Vec<(f64, ExtReal)> = zs.into_iter().map(|z| (z, plugin_h(&fbar, z))).collect();
        let mut w = create(path)?;
        write_curve_csv(&rows, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn study(a: &StudyArgs) -> Result<()> {
    let mut cfg = StudyConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let stats = run_study(&cfg)?;
    let mut w = create(&a.out)?;
    write_results_csv(&stats, &mut w)?;
    w.flush()?;
    if let Some(p) = &a.curves {
        let mut w = create(p)?;
        write_curves_csv(&stats, &cfg.distribution.model(), &mut w)?;
        w.flush()?;
    }
    if let Some(p) = &a.summary {
        let mut w = create(p)?;
        write_summary_json(&cfg, &stats, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn read_curve_file(path: &Path) -> Result<CurveData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    let header = text.lines().next().unwrap_or("").trim();
    if header == "h,value" {
        return Ok(CurveData::Step(
            crate::io::read_step_csv(text.as_bytes()).map_err(|e| e.context(path.display().to_string()))?,
        ));
    }
    if header != "z,value" {
        return Err(Error::invalid(format!("unrecognised header `{header}`")).context(path.display().to_string()));
    }
    let mut rows = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let (z, v) = line
            .split_once(',')
            .ok_or_else(|| Error::invalid(format!("malformed row `{line}`")))?;
        let z = parse_number(z)?;
        let v = parse_number(v)?;
        rows.push((z, if v.is_finite() { ExtReal::Finite(v) } else { ExtReal::Infinite }));
    }
    Ok(CurveData::Points(rows))
}

fn reference_curve(spec: &str, top: f64) -> Result<CurveData> {
    if Path::new(spec).is_file() {
        return Ok(CurveData::Step(load_step(Path::new(spec))?));
    }
    let model = parse_distribution(spec)?;
    Ok(match model {
        CdfModel::Step(f) => CurveData::Step(f),
        m => {
            let top = top.max(1.05 * m.support().1);
            CurveData::Points(
                (0..=400)
                    .map(|i| {
                        let z = top * i as f64 / 400.0;
                        (z, ExtReal::Finite(m.eval(z)))
                    })
                    .collect(),
            )
        }
    })
}

fn plot(a: &PlotArgs) -> Result<()> {
    let data: Vec<CurveData> = a.inputs.iter().map(|p| read_curve_file(p)).collect::<Result<_>>()?;
    let single = data.len() == 1;
    let mut curves: Vec<Curve> = a
        .inputs
        .iter()
        .zip(data)
        .map(|(p, data)| Curve {
            label: p.display().to_string(),
            data,
            style: if single && !a.average { CurveStyle::Average } else { CurveStyle::Realization },
        })
        .collect();
    let top = curves
        .iter()
        .filter_map(|c| match &c.data {
            CurveData::Step(f) => f.locations().last().copied(),
            CurveData::Points(p) => p.last().map(|r| r.0),
        })
        .fold(0.0, f64::max);
    if a.average {
        let steps: Vec<&StepCdf> = curves
            .iter()
            .filter_map(|c| match &c.data {
                CurveData::Step(f) => Some(f),
                CurveData::Points(_) => None,
            })
            .collect();
        if steps.is_empty() {
            return Err(Error::invalid("--average needs step-function inputs"));
        }
        let mut locs: Vec<f64> = steps.iter().flat_map(|f| f.locations().iter().copied()).collect();
        locs.sort_by(f64::total_cmp);
        locs.dedup();
        let n = steps.len() as f64;
        let avg = StepCdf::new(locs.iter().map(|&z| (z, steps.iter().map(|f| f.eval(z)).sum::<f64>() / n)))?;
        curves.push(Curve {
            label: "average".into(),
            data: CurveData::Step(avg),
            style: CurveStyle::Average,
        });
    }
    if let Some(r) = &a.reference {
        curves.push(Curve {
            label: r.clone(),
            data: reference_curve(r, top)?,
            style: CurveStyle::Reference,
        });
    }
    let mut spec = PlotSpec::new(curves);
    spec.x_range = a.xrange.as_ref().map(|v| (v[0], v[1]));
    spec.y_range = a.yrange.as_ref().map(|v| (v[0], v[1]));
    spec.width = a.width;
    spec.height = a.height;
    let svg = render_plot(&spec)?;
    let mut w = create(&a.out)?;
    w.write_all(svg.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate(_) => "simulate",
        Command::Section(_) => "section",
        Command::Tessellate(_) => "tessellate",
        Command::Estimate(_) => "estimate",
        Command::Stereo(_) => "stereo",
        Command::Study(_) => "study",
        Command::Plot(_) => "plot",
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let name = command_name(&cli.command);
    let r = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Section(a) => section(a),
        Command::Tessellate(a) => tessellate_cmd(a),
        Command::Estimate(a) => estimate(a),
        Command::Stereo(a) => stereo(a),
        Command::Study(a) => study(a),
        Command::Plot(a) => plot(a),
    };
    r.map_err(|e| e.context(name))
}

fn error_line(command: &str, message: &str) -> String {
    serde_json::json!({ "error": message, "command": command }).to_string()
}

/// Parses `argv` (including the program name) and runs it; returns the exit
/// status: 0 on success, 1 on a runtime failure, 2 on a usage error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("{}", error_line("usage", e.render().to_string().lines().next().unwrap_or("")));
            return 2;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(command_name(&cli.command), &e.to_string()));
            1
        }
    }
}
