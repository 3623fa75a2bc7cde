//! Convergence, stabilisation and Poisson-ratio studies on the manufactured
//! cases, with CSV reports and pass/fail gates.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::assembly::{Discretisation, StabilisationParam};
use crate::error::{HdgError, Result};
use crate::fespace::ElementType;
use crate::global::{solve, SolutionFields};
use crate::manufactured::{case_incompressible_2d_variant, case_sinusoidal_2d, l2_error, IncompressibleVariant, ManufacturedCase};
use crate::mesh::{extract_faces, structured_quad_mesh, structured_tri_mesh, Mesh, Rectangle, TriPattern};
use crate::postprocess::{postprocess, PostProcessor, PostprocessedField, RotationalConstraint};
use crate::voigt::{build_constitutive, MaterialParams, PlaneAssumption};
use crate::vtk::{solution_to_vtk, write_vtk};

pub const CSV_HEADER: &str = "n,h,ndof_trace,err_u,err_L,err_ustar,eoc_u,eoc_L,eoc_ustar";
pub const DEFAULT_TAU_LIST: [f64; 9] = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0];
pub const DEFAULT_NU_LIST: [f64; 4] = [0.49, 0.499, 0.4999, 0.49999];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CaseId {
    #[default]
    Sinusoidal2d,
    Incompressible2d,
}

impl std::str::FromStr for CaseId {
    type Err = HdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinusoidal2d" => Ok(Self::Sinusoidal2d),
            "incompressible2d" => Ok(Self::Incompressible2d),
            other => Err(HdgError::InvalidConfig(format!("unknown case `{other}`"))),
        }
    }
}

/// Refinement levels used when none are given.
pub fn default_levels(degree: usize) -> Vec<usize> {
    if degree >= 3 {
        vec![4, 8, 16]
    } else {
        vec![4, 8, 16, 32]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub case: CaseId,
    pub elem: ElementType,
    pub pattern: TriPattern,
    pub degree: usize,
    pub levels: Vec<usize>,
    pub tau: f64,
    /// Overrides the case's Poisson ratio.
    pub nu: Option<f64>,
    pub plane: PlaneAssumption,
    pub postprocess: RotationalConstraint,
    pub incompressible_variant: IncompressibleVariant,
    pub vtk_dir: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            case: CaseId::Sinusoidal2d,
            elem: ElementType::Quadrilateral,
            pattern: TriPattern::Alternating,
            degree: 1,
            levels: default_levels(1),
            tau: 3.0,
            nu: None,
            plane: PlaneAssumption::PlaneStrain,
            postprocess: RotationalConstraint::BoundaryTraceCurl,
            incompressible_variant: IncompressibleVariant::DivergenceFree,
            vtk_dir: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| HdgError::InvalidConfig(format!("bad value `{value}` for `{key}`")))
}

/// Parses a comma-separated list such as `4,8,16`.
pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(key, s)).collect()
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.degree) {
            return Err(HdgError::UnsupportedDegree(self.degree));
        }
        if self.levels.is_empty() || self.levels.contains(&0) {
            return Err(HdgError::InvalidRefinement);
        }
        StabilisationParam::new(self.tau)?;
        Ok(())
    }

    /// Applies one `key = value` setting (keys match the CLI flag names).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "case" => self.case = parse(key, value)?,
            "elem" => self.elem = parse(key, value)?,
            "pattern" => self.pattern = parse(key, value)?,
            "degree" => self.degree = parse(key, value)?,
            "levels" => self.levels = parse_list(key, value)?,
            "tau" => self.tau = parse(key, value)?,
            "nu" => self.nu = Some(parse(key, value)?),
            "plane" => self.plane = parse(key, value)?,
            "postprocess" => self.postprocess = parse(key, value)?,
            "variant" => self.incompressible_variant = parse(key, value)?,
            "vtk" => self.vtk_dir = Some(PathBuf::from(value)),
            other => return Err(HdgError::InvalidConfig(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// The manufactured case with the configured material overrides.
    pub fn build_case(&self) -> Result<ManufacturedCase> {
        let case = match self.case {
            CaseId::Sinusoidal2d => case_sinusoidal_2d(),
            CaseId::Incompressible2d => {
                case_incompressible_2d_variant(self.nu.unwrap_or(0.49), self.incompressible_variant)?
            }
        };
        let material = MaterialParams::new(
            case.material.youngs_modulus,
            self.nu.unwrap_or(case.material.poisson_ratio),
            self.plane,
        )?;
        case.with_material(material)
    }

    pub fn build_mesh(&self, n: usize) -> Result<Mesh> {
        let unit = Rectangle::unit();
        match self.elem {
            ElementType::Quadrilateral => structured_quad_mesh(n, &unit),
            ElementType::Triangle => structured_tri_mesh(n, self.pattern, &unit),
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| HdgError::InvalidConfig(format!("expected `key = value`, got `{l}`")))
        })
        .collect()
}

/// Errors of one refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub n: usize,
    pub h: f64,
    pub ndof_trace: usize,
    pub err_u: f64,
    pub err_l: f64,
    pub err_ustar: f64,
    /// Largest relative violation of the post-processing constraints.
    pub constraint_residual: f64,
    pub trace_residual: f64,
}

/// Everything computed on one mesh.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub result: LevelResult,
    pub mesh: Mesh,
    pub fields: SolutionFields,
    pub ustar: PostprocessedField,
}

/// Solves, post-processes and measures the errors on the `n x n` mesh.
pub fn run_level(config: &StudyConfig, case: &ManufacturedCase, n: usize) -> Result<LevelRun> {
    let mesh = config.build_mesh(n)?;
    let topo = extract_faces(&mesh, &case.boundary)?;
    let law = build_constitutive(&case.material, 2)?;
    let disc = Discretisation::new(config.elem, config.degree, &law, StabilisationParam::new(config.tau)?)?;
    let fields = solve(&mesh, &topo, &disc, case)?;
    let processor = PostProcessor::new(&disc, config.postprocess)?;
    let ustar = postprocess(&mesh, &topo, &processor, &fields, case)?;
    let order = 2 * (config.degree + 2) + 1;
    let err_u = l2_error(&mesh, &disc.reference, &fields.u, |x| case.displacement(x).into(), order)?;
    let err_l = l2_error(&mesh, &disc.reference, &fields.l, |x| case.mixed(x).into(), order)?;
    let err_ustar = l2_error(&mesh, &processor.star, &ustar.ustar, |x| case.displacement(x).into(), order)?;
    if let Some(dir) = &config.vtk_dir {
        std::fs::create_dir_all(dir)?;
        let name = format!("{}_{}_k{}_n{}.vtk", case.name, elem_name(config.elem), config.degree, n);
        write_vtk(&dir.join(name), &solution_to_vtk(&mesh, &disc.reference, &fields, &case.material))?;
    }
    Ok(LevelRun {
        result: LevelResult {
            n,
            h: mesh.h,
            ndof_trace: fields.n_trace_dofs(),
            err_u,
            err_l,
            err_ustar,
            constraint_residual: ustar.max_constraint_residual,
            trace_residual: fields.trace_residual,
        },
        mesh,
        fields,
        ustar,
    })
}

fn elem_name(elem: ElementType) -> &'static str {
    match elem {
        ElementType::Triangle => "tri",
        ElementType::Quadrilateral => "quad",
    }
}

/// Observed order between two levels.
pub fn eoc(e_prev: f64, e_cur: f64, h_prev: f64, h_cur: f64) -> f64 {
    (e_prev / e_cur).ln() / (h_prev / h_cur).ln()
}

/// One report row: the level's errors, or the reason it failed.
pub type LevelOutcome = std::result::Result<LevelResult, String>;

#[derive(Debug, Clone, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<(usize, LevelOutcome)>,
}

/// Observed orders of `(u, L, u*)` from a row to the next.
pub type EocTriple = [f64; 3];

impl ConvergenceReport {
    pub fn results(&self) -> impl Iterator<Item = &LevelResult> {
        self.rows.iter().filter_map(|(_, r)| r.as_ref().ok())
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|(_, r)| r.is_ok())
    }

    /// Orders between consecutive rows; `None` where a row failed or is first.
    pub fn eocs(&self) -> Vec<Option<EocTriple>> {
        let mut out = vec![None];
        for w in self.rows.windows(2) {
            out.push(match (&w[0].1, &w[1].1) {
                (Ok(a), Ok(b)) => Some([
                    eoc(a.err_u, b.err_u, a.h, b.h),
                    eoc(a.err_l, b.err_l, a.h, b.h),
                    eoc(a.err_ustar, b.err_ustar, a.h, b.h),
                ]),
                _ => None,
            });
        }
        out.truncate(self.rows.len());
        out
    }

    /// Orders between the last two rows.
    pub fn last_eoc(&self) -> Option<EocTriple> {
        self.eocs().last().copied().flatten()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{CSV_HEADER}");
        for ((n, row), eoc) in self.rows.iter().zip(self.eocs()) {
            match row {
                Ok(r) => {
                    let _ = write!(s, "{},{:e},{},{:e},{:e},{:e}", r.n, r.h, r.ndof_trace, r.err_u, r.err_l, r.err_ustar);
                    match eoc {
                        Some([a, b, c]) => {
                            let _ = writeln!(s, ",{a:e},{b:e},{c:e}");
                        }
                        None => {
                            let _ = writeln!(s, ",,,");
                        }
                    }
                }
                Err(msg) => {
                    let _ = writeln!(s, "# level n={n} failed: {}", msg.replace('\n', " "));
                }
            }
        }
        s
    }
}

/// Runs every refinement level in sequence.
pub fn run_convergence(config: &StudyConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let case = config.build_case()?;
    let rows = config
        .levels
        .iter()
        .map(|&n| (n, run_level(config, &case, n).map(|r| r.result).map_err(|e| e.to_string())))
        .collect();
    Ok(ConvergenceReport { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauSweepRow {
    pub tau: f64,
    pub outcome: LevelOutcome,
}

#[derive(Debug, Clone, Default)]
pub struct TauSweepReport {
    pub n: usize,
    pub rows: Vec<TauSweepRow>,
}

impl TauSweepReport {
    fn argmin(&self, key: impl Fn(&LevelResult) -> f64) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|o| (r.tau, key(o))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(tau, _)| tau)
    }

    /// `tau` minimising the error in `L`.
    pub fn argmin_l(&self) -> Option<f64> {
        self.argmin(|r| r.err_l)
    }

    /// `tau` minimising the error in `u`.
    pub fn argmin_u(&self) -> Option<f64> {
        self.argmin(|r| r.err_u)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("tau,err_u,err_L,err_ustar\n");
        for row in &self.rows {
            match &row.outcome {
                Ok(r) => {
                    let _ = writeln!(s, "{:e},{:e},{:e},{:e}", row.tau, r.err_u, r.err_l, r.err_ustar);
                }
                Err(msg) => {
                    let _ = writeln!(s, "# tau={} failed: {}", row.tau, msg.replace('\n', " "));
                }
            }
        }
        s
    }
}

/// Errors as a function of `tau` on the mesh given by the last configured level.
pub fn run_tau_sweep(config: &StudyConfig, taus: &[f64]) -> Result<TauSweepReport> {
    config.validate()?;
    let n = *config.levels.last().ok_or(HdgError::InvalidRefinement)?;
    let case = config.build_case()?;
    let rows = taus
        .iter()
        .map(|&tau| {
            let cfg = StudyConfig { tau, ..config.clone() };
            TauSweepRow {
                tau,
                outcome: run_level(&cfg, &case, n).map(|r| r.result).map_err(|e| e.to_string()),
            }
        })
        .collect();
    Ok(TauSweepReport { n, rows })
}

/// One convergence study per Poisson ratio.
pub fn run_nu_sweep(config: &StudyConfig, nus: &[f64]) -> Result<Vec<(f64, ConvergenceReport)>> {
    nus.iter()
        .map(|&nu| {
            let cfg = StudyConfig {
                nu: Some(nu),
                ..config.clone()
            };
            Ok((nu, run_convergence(&cfg)?))
        })
        .collect()
}

/// Outcome of one acceptance check.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Gate {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for Gate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Expected range of the last-pair order of `u*` for the configured option.
pub fn ustar_order_band(config: &StudyConfig) -> (f64, f64) {
    let k = config.degree as f64;
    match (config.postprocess, config.elem) {
        (RotationalConstraint::BoundaryTraceCurl, _) => (k + 1.8, f64::INFINITY),
        (RotationalConstraint::MeanCurlOfUh, ElementType::Triangle) => (f64::NEG_INFINITY, k + 1.3),
        (RotationalConstraint::BarycentreMoment, ElementType::Triangle) if config.degree == 1 => (2.1, 2.7),
        (RotationalConstraint::BarycentreMoment, _) if config.degree >= 2 => (k + 1.7, f64::INFINITY),
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    }
}

/// Order and constraint gates of a convergence study.
pub fn convergence_gates(config: &StudyConfig, report: &ConvergenceReport) -> Vec<Gate> {
    let k = config.degree as f64;
    let mut gates = vec![Gate::new(
        "all levels solved",
        report.all_ok(),
        format!("{} of {} levels", report.results().count(), report.rows.len()),
    )];
    match report.last_eoc() {
        Some([eu, el, es]) => {
            gates.push(Gate::new("EOC_u", eu >= k + 0.9, format!("{eu:.3} >= {:.1}", k + 0.9)));
            gates.push(Gate::new("EOC_L", el >= k + 0.9, format!("{el:.3} >= {:.1}", k + 0.9)));
            let (lo, hi) = ustar_order_band(config);
            gates.push(Gate::new("EOC_u*", es >= lo && es <= hi, format!("{es:.3} in [{lo}, {hi}]")));
        }
        None => gates.push(Gate::new("EOC", false, "fewer than two successful levels")),
    }
    let worst = report.results().map(|r| r.constraint_residual).fold(0.0, f64::max);
    gates.push(Gate::new("post-process constraints", worst <= 1e-10, format!("{worst:.2e} <= 1e-10")));
    gates
}

/// Gates of a stabilisation sweep.
pub fn tau_sweep_gates(report: &TauSweepReport) -> Vec<Gate> {
    match (report.argmin_l(), report.argmin_u()) {
        (Some(tl), Some(tu)) => vec![
            Gate::new("argmin_tau e_L", [1.0, 3.0, 10.0].contains(&tl), format!("{tl} in {{1, 3, 10}}")),
            Gate::new("argmin_tau e_u", tu >= tl, format!("{tu} >= {tl}")),
        ],
        _ => vec![Gate::new("tau sweep", false, "no successful run")],
    }
}

/// Ratio of the largest to the smallest fixed-mesh (last level) `e_u` across
/// a Poisson-ratio sweep.
pub fn nu_spread(reports: &[(f64, ConvergenceReport)]) -> Option<f64> {
    let errs: Vec<f64> = reports
        .iter()
        .map(|(_, r)| r.rows.last().and_then(|(_, o)| o.as_ref().ok()).map(|o| o.err_u))
        .collect::<Option<_>>()?;
    let max = errs.iter().copied().fold(f64::MIN, f64::max);
    let min = errs.iter().copied().fold(f64::MAX, f64::min);
    Some(max / min)
}
