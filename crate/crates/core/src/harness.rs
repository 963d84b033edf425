//! Monte Carlo studies: repeated simulate → (tessellate) → estimate runs with
//! error statistics at probe points and pointwise-average curves.
//!
//! Every replication draws its realisation from a child seed of the root
//! seed, so a study is reproducible bit for bit and independent of the
//! number of worker threads. All estimators selected in a study see the same
//! realisations.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_f, estimate_f0, EmpiricalInputs, Erosion};
use crate::numeric::quantile_sorted;
use crate::process::{
    child_seed, default_guard, purpose, sample, section_sample, window_for_target_count, CdfModel, SectionModel,
};
use crate::stepfn::StepCdf;
use crate::stereology::isotonic_h;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// First estimator (own-cell counts).
    F0,
    /// Second estimator (cell areas).
    F,
    /// Isotonic estimator of the 3D weight distribution from sections.
    Stereo,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::F0 => "f0",
            EstimatorKind::F => "f",
            EstimatorKind::Stereo => "stereo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GuardPolicy {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    /// `min(z, M)`.
    F1 { m: f64 },
    /// The three-atom distribution on {1, 8, 10}.
    F2,
    Step(StepCdf),
}

impl DistributionSpec {
    pub fn model(&self) -> CdfModel {
        match self {
            DistributionSpec::F1 { m } => CdfModel::f1(*m),
            DistributionSpec::F2 => CdfModel::f2(),
            DistributionSpec::Step(f) => CdfModel::Step(f.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub name: String,
    /// `F` for the planar estimators, `H` for the stereological one.
    pub distribution: DistributionSpec,
    pub pn: Vec<f64>,
    pub replications: usize,
    pub probes: Vec<f64>,
    pub estimators: Vec<EstimatorKind>,
    pub seed: u64,
    pub guard: GuardPolicy,
    pub erode: Erosion,
    /// Section truncation; `None` picks the default.
    pub hmax: Option<f64>,
    /// Isotonic truncation `M`; `None` means infinity.
    pub truncation: Option<f64>,
    pub curve_points: usize,
}

impl StudyConfig {
    pub fn new(name: impl Into<String>, distribution: DistributionSpec, estimators: Vec<EstimatorKind>) -> Self {
        Self {
            name: name.into(),
            distribution,
            pn: vec![1000.0],
            replications: 100,
            probes: Vec::new(),
            estimators,
            seed: 1,
            guard: GuardPolicy::Auto,
            erode: Erosion::Auto,
            hmax: None,
            truncation: None,
            curve_points: 512,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("study needs at least one replication"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("study selects no estimator"));
        }
        if self.pn.is_empty() || self.pn.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::invalid("P_n values must be positive"));
        }
        if self.probes.iter().any(|&z| !(z > 0.0 && z.is_finite())) {
            return Err(Error::invalid("probe locations must be positive"));
        }
        self.distribution.model().validate()
    }

    /// Reads the JSON form; relative `file` paths resolve against the config
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text)?;
        raw.resolve(base)
    }

    fn model(&self) -> CdfModel {
        self.distribution.model()
    }

    /// Upper end of the average-curve grid.
    pub fn curve_extent(&self) -> f64 {
        1.05 * self.model().support().1
    }

    pub fn curve_grid(&self) -> Vec<f64> {
        let top = self.curve_extent();
        let n = self.curve_points.max(2);
        (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect()
    }

    /// Seeds of the replications at `pn`, in replication order.
    pub fn replication_seeds(&self, pn: f64) -> Vec<u64> {
        let root = child_seed(self.seed, pn.to_bits(), 0);
        (0..self.replications as u64)
            .map(|r| child_seed(root, r, purpose::SAMPLE))
            .collect()
    }
}

/// Numbers may be given as JSON numbers or as decimal strings.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Num {
    Number(f64),
    Text(String),
}

impl Num {
    fn value(&self) -> Result<f64> {
        match self {
            Num::Number(v) => Ok(*v),
            Num::Text(s) => match s.trim() {
                "inf" | "Infinity" => Ok(f64::INFINITY),
                t => t.parse().map_err(|_| Error::invalid(format!("`{s}` is not a number"))),
            },
        }
    }

    fn auto_or_value(&self) -> Result<Option<f64>> {
        match self {
            Num::Text(s) if s.trim() == "auto" => Ok(None),
            other => other.value().map(Some),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    kind: String,
    #[serde(default, rename = "M")]
    m: Option<Num>,
    #[serde(default)]
    file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    name: Option<String>,
    distribution: RawDistribution,
    pn: Vec<Num>,
    replications: Num,
    #[serde(default)]
    probes: Vec<Num>,
    estimators: Vec<EstimatorKind>,
    seed: Num,
    #[serde(default)]
    guard: Option<Num>,
    #[serde(default)]
    erode: Option<Num>,
    #[serde(default)]
    hmax: Option<Num>,
    #[serde(default, rename = "M")]
    truncation: Option<Num>,
    #[serde(default)]
    curve_points: Option<Num>,
}

fn as_count(n: &Num, what: &str) -> Result<u64> {
    let v = n.value()?;
    if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(63) {
        Ok(v as u64)
    } else if let Num::Text(s) = n {
        s.trim().parse().map_err(|_| Error::invalid(format!("{what} `{s}` is not an integer")))
    } else {
        Err(Error::invalid(format!("{what} {v} is not an integer")))
    }
}

impl RawConfig {
    fn resolve(self, base: &Path) -> Result<StudyConfig> {
        let distribution = match self.distribution.kind.to_ascii_lowercase().as_str() {
            "f1" | "uniform" => DistributionSpec::F1 {
                m: self.distribution.m.as_ref().map_or(Ok(1.0), Num::value)?,
            },
            "f2" => DistributionSpec::F2,
            "step" | "discrete" => {
                let file = self
                    .distribution
                    .file
                    .ok_or_else(|| Error::invalid("step distribution needs a `file`"))?;
                DistributionSpec::Step(crate::io::load_step(&base.join(file))?)
            }
            other => return Err(Error::invalid(format!("unknown distribution kind `{other}`"))),
        };
        let guard = match self.guard.as_ref().map(Num::auto_or_value).transpose()?.flatten() {
            None => GuardPolicy::Auto,
            Some(g) => GuardPolicy::Fixed(g),
        };
        let erode = match self.erode.as_ref().map(Num::auto_or_value).transpose()?.flatten() {
            None => Erosion::Auto,
            Some(e) => Erosion::Margin(e),
        };
        let truncation = self.truncation.as_ref().map(Num::value).transpose()?.filter(|m| m.is_finite());
        let cfg = StudyConfig {
            name: self.name.unwrap_or_else(|| "study".into()),
            distribution,
            pn: self.pn.iter().map(Num::value).collect::<Result<_>>()?,
            replications: as_count(&self.replications, "replications")? as usize,
            probes: self.probes.iter().map(Num::value).collect::<Result<_>>()?,
            estimators: self.estimators,
            seed: as_count(&self.seed, "seed")?,
            guard,
            erode,
            hmax: self.hmax.as_ref().map(Num::auto_or_value).transpose()?.flatten(),
            truncation,
            curve_points: self.curve_points.as_ref().map_or(Ok(512), |n| as_count(n, "curve_points"))? as usize,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One estimator's outcome on one realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOutcome {
    pub estimate: StepCdf,
    /// Clamped steps of the second estimator.
    pub warnings: Vec<String>,
}

/// All selected estimators on one realisation, in `cfg.estimators` order.
#[derive(Debug, Clone)]
pub struct Replication {
    pub seed: u64,
    pub own_cell_count: usize,
    pub outcomes: Vec<std::result::Result<EstimateOutcome, String>>,
}

/// Geometry of one planar realisation for the given study setting.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub window_area: f64,
    pub guard: f64,
    pub hmax: Option<f64>,
}

fn planar_design(cfg: &StudyConfig, pn: f64) -> Result<(crate::process::Window, f64)> {
    let model = cfg.model();
    let window = window_for_target_count(&model, 2, pn)?;
    let guard = match cfg.guard {
        GuardPolicy::Auto => default_guard(&model),
        GuardPolicy::Fixed(g) => g,
    };
    Ok((window, guard))
}

fn section_design(cfg: &StudyConfig, pn: f64) -> Result<(SectionModel, crate::process::Window, f64, f64)> {
    let sec = SectionModel::new(cfg.model())?;
    let hmax = cfg.hmax.unwrap_or_else(|| sec.default_hmax());
    let window = sec.window_for_target_count(pn)?;
    let guard = match cfg.guard {
        GuardPolicy::Auto => sec.default_guard(hmax),
        GuardPolicy::Fixed(g) => g,
    };
    Ok((sec, window, guard, hmax))
}

/// The window, guard and truncation used at `pn`.
pub fn design(cfg: &StudyConfig, pn: f64) -> Result<Design> {
    if cfg.estimators.contains(&EstimatorKind::Stereo) {
        let (_, w, guard, hmax) = section_design(cfg, pn)?;
        Ok(Design {
            window_area: w.volume(),
            guard,
            hmax: Some(hmax),
        })
    } else {
        let (w, guard) = planar_design(cfg, pn)?;
        Ok(Design {
            window_area: w.volume(),
            guard,
            hmax: None,
        })
    }
}

/// Runs every selected estimator on the realisation drawn from `seed`.
pub fn run_replication(cfg: &StudyConfig, pn: f64, seed: u64) -> Result<Replication> {
    let stereo = cfg.estimators.contains(&EstimatorKind::Stereo);
    if stereo && cfg.estimators.len() > 1 {
        return Err(Error::invalid("the stereological estimator cannot share a study with planar ones"));
    }
    let gens = if stereo {
        let (sec, window, guard, hmax) = section_design(cfg, pn)?;
        section_sample(&sec.h, &window, guard, hmax, seed)?
    } else {
        let (window, guard) = planar_design(cfg, pn)?;
        sample(&cfg.model(), &window, guard, seed)?
    };
    let mut inputs = EmpiricalInputs::new(gens, cfg.erode)?;
    if cfg.estimators.contains(&EstimatorKind::F) {
        inputs = inputs.with_tessellation()?;
    }
    let outcomes = cfg
        .estimators
        .iter()
        .map(|&kind| run_estimator(kind, &inputs, cfg).map_err(|e| e.to_string()))
        .collect();
    Ok(Replication {
        seed,
        own_cell_count: inputs.own_cell_count(),
        outcomes,
    })
}

fn run_estimator(kind: EstimatorKind, inputs: &EmpiricalInputs, cfg: &StudyConfig) -> Result<EstimateOutcome> {
    if inputs.own_cell_count() == 0 {
        return Err(Error::invalid("no own-cell generators in the window"));
    }
    match kind {
        EstimatorKind::F0 => Ok(EstimateOutcome {
            estimate: estimate_f0(inputs)?,
            warnings: Vec::new(),
        }),
        EstimatorKind::F => {
            let est = estimate_f(inputs)?;
            Ok(EstimateOutcome {
                estimate: est.f,
                warnings: est.warnings.iter().map(ToString::to_string).collect(),
            })
        }
        EstimatorKind::Stereo => {
            let f0 = estimate_f0(inputs)?;
            Ok(EstimateOutcome {
                estimate: isotonic_h(&f0, cfg.truncation)?.h,
                warnings: Vec::new(),
            })
        }
    }
}

/// Mean of right-continuous evaluations at each grid point.
pub fn average_curve(realizations: &[StepCdf], grid: &[f64]) -> Vec<f64> {
    assert!(!realizations.is_empty(), "average of no curves");
    let n = realizations.len() as f64;
    grid.iter()
        .map(|&z| realizations.iter().map(|f| f.eval(z)).sum::<f64>() / n)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeStats {
    pub z: f64,
    pub mean_abs_err: f64,
    /// Quantiles of the signed error `F(z) - estimate(z)`.
    pub q025: f64,
    pub q975: f64,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyStats {
    pub estimator: EstimatorKind,
    pub pn: f64,
    pub n_reps: usize,
    pub n_excluded: usize,
    pub probes: Vec<ProbeStats>,
    pub grid: Vec<f64>,
    pub average: Vec<f64>,
    /// Clamp warnings summed over replications.
    pub n_warnings: usize,
    /// Excluded replications and their reasons.
    pub exclusions: Vec<(usize, String)>,
    #[serde(skip)]
    pub realizations: Vec<StepCdf>,
}

/// Signed errors `truth(z) - f(z)` summarised at `z`.
pub fn probe_stats(z: f64, truth: f64, realizations: &[StepCdf]) -> ProbeStats {
    let errors: Vec<f64> = realizations.iter().map(|f| truth - f.eval(z)).collect();
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    let (q025, q975) = if sorted.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (quantile_sorted(&sorted, 0.025), quantile_sorted(&sorted, 0.975))
    };
    let mean_abs_err = errors.iter().map(|e| e.abs()).sum::<f64>() / errors.len() as f64;
    ProbeStats {
        z,
        mean_abs_err,
        q025,
        q975,
        errors,
    }
}

/// Runs the study over all `P_n` values; one [`StudyStats`] per
/// `(P_n, estimator)` in that order.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<StudyStats>> {
    cfg.validate()?;
    let truth = cfg.model();
    let grid = cfg.curve_grid();
    let mut out = Vec::new();
    for &pn in &cfg.pn {
        let seeds = cfg.replication_seeds(pn);
        let reps: Vec<Result<Replication>> = seeds.par_iter().map(|&s| run_replication(cfg, pn, s)).collect();
        for (k, &kind) in cfg.estimators.iter().enumerate() {
            let mut realizations = Vec::new();
            let mut exclusions = Vec::new();
            let mut n_warnings = 0;
            for (r, rep) in reps.iter().enumerate() {
                let outcome = match rep {
                    Ok(rep) => rep.outcomes[k].clone(),
                    Err(e) => Err(e.to_string()),
                };
                match outcome {
                    Ok(o) => {
                        n_warnings += o.warnings.len();
                        realizations.push(o.estimate);
                    }
                    Err(e) => exclusions.push((r, e)),
                }
            }
            for (r, e) in &exclusions {
                eprintln!("warning: {} replication {r} at P_n = {pn} excluded: {e}", kind.name());
            }
            let probes = cfg
                .probes
                .iter()
                .map(|&z| probe_stats(z, truth.eval(z), &realizations))
                .collect();
            let average = if realizations.is_empty() {
                vec![f64::NAN; grid.len()]
            } else {
                average_curve(&realizations, &grid)
            };
            out.push(StudyStats {
                estimator: kind,
                pn,
                n_reps: cfg.replications,
                n_excluded: exclusions.len(),
                probes,
                grid: grid.clone(),
                average,
                n_warnings,
                exclusions,
                realizations,
            });
        }
    }
    Ok(out)
}

/// A study of the isotonic estimator; the configured distribution is `H`.
pub fn stereo_study(cfg: &StudyConfig) -> Result<Vec<StudyStats>> {
    let mut cfg = cfg.clone();
    cfg.estimators = vec![EstimatorKind::Stereo];
    run_study(&cfg)
}

pub fn write_results_csv<W: Write>(stats: &[StudyStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["estimator", "P_n", "probe_z", "mean_abs_err", "q025", "q975", "n_reps", "n_excluded"])?;
    for s in stats {
        for p in &s.probes {
            w.write_record([
                s.estimator.name().to_string(),
                s.pn.to_string(),
                p.z.to_string(),
                p.mean_abs_err.to_string(),
                p.q025.to_string(),
                p.q975.to_string(),
                s.n_reps.to_string(),
                s.n_excluded.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves_csv<W: Write>(stats: &[StudyStats], truth: &CdfModel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["estimator", "P_n", "z", "average", "truth"])?;
    for s in stats {
        for (z, a) in s.grid.iter().zip(&s.average) {
            w.write_record([
                s.estimator.name().to_string(),
                s.pn.to_string(),
                z.to_string(),
                a.to_string(),
                truth.eval(*z).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Summary without per-replication curves, for the JSON sidecar.
pub fn write_summary_json<W: Write>(cfg: &StudyConfig, stats: &[StudyStats], out: W) -> Result<()> {
    #[derive(Serialize)]
    struct Summary<'a> {
        name: &'a str,
        seed: u64,
        replications: usize,
        stats: &'a [StudyStats],
    }
    serde_json::to_writer_pretty(
        out,
        &Summary {
            name: &cfg.name,
            seed: cfg.seed,
            replications: cfg.replications,
            stats,
        },
    )?;
    Ok(())
}
