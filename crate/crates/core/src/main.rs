use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hdg_voigt::harness::{
    convergence_gates, nu_spread, parse_config, parse_list, run_convergence, run_nu_sweep, run_tau_sweep,
    tau_sweep_gates, Gate, StudyConfig, DEFAULT_NU_LIST, DEFAULT_TAU_LIST,
};
use hdg_voigt::{HdgError, Result};

#[derive(Parser)]
#[command(name = "hdg-voigt", version, about = "HDG solver for 2D linear elasticity in Voigt notation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// h-convergence study
    Run(Common),
    /// Errors on a fixed mesh (the last level) for a list of tau values
    TauSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tau_list: Option<String>,
    },
    /// One convergence study per Poisson ratio; reports are written next to --out
    NuSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nu_list: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// key=value file with defaults for the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    /// sinusoidal2d | incompressible2d
    #[arg(long)]
    case: Option<String>,
    /// quad | tri
    #[arg(long)]
    elem: Option<String>,
    /// alternating | single-diagonal
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    /// comma-separated subdivisions, e.g. 4,8,16,32
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    /// strain | stress
    #[arg(long)]
    plane: Option<String>,
    /// opt1 | opt2 | opt3
    #[arg(long)]
    postprocess: Option<String>,
    #[arg(long, default_value = "report.csv")]
    out: PathBuf,
    /// directory for VTK output of every level
    #[arg(long)]
    vtk: Option<PathBuf>,
    /// exit with a nonzero status when an acceptance gate fails
    #[arg(long)]
    assert: bool,
}

impl Common {
    fn study(&self) -> Result<StudyConfig> {
        let mut cfg = StudyConfig::default();
        let mut levels_given = false;
        if let Some(path) = &self.config {
            for (k, v) in parse_config(&std::fs::read_to_string(path)?)? {
                levels_given |= k == "levels";
                cfg.set(&k, &v)?;
            }
        }
        let flags = [
            ("case", &self.case),
            ("elem", &self.elem),
            ("pattern", &self.pattern),
            ("degree", &self.degree),
            ("levels", &self.levels),
            ("tau", &self.tau),
            ("nu", &self.nu),
            ("plane", &self.plane),
            ("postprocess", &self.postprocess),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                levels_given |= key == "levels";
                cfg.set(key, v)?;
            }
        }
        if let Some(dir) = &self.vtk {
            cfg.vtk_dir = Some(dir.clone());
        }
        if !levels_given {
            cfg.levels = hdg_voigt::harness::default_levels(cfg.degree);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn report_gates(gates: &[Gate]) -> bool {
    for g in gates {
        eprintln!("{g}");
    }
    gates.iter().all(|g| g.passed)
}

fn with_suffix(path: &std::path::Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.study()?;
            let report = run_convergence(&cfg)?;
            std::fs::write(&common.out, report.to_csv())?;
            print!("{}", report.to_csv());
            let ok = report_gates(&convergence_gates(&cfg, &report));
            Ok(ok || !common.assert)
        }
        Command::TauSweep { common, tau_list } => {
            let cfg = common.study()?;
            let taus = match tau_list {
                Some(list) => parse_list("tau-list", &list)?,
                None => DEFAULT_TAU_LIST.to_vec(),
            };
            let report = run_tau_sweep(&cfg, &taus)?;
            std::fs::write(&common.out, report.to_csv())?;
            print!("{}", report.to_csv());
            let ok = report_gates(&tau_sweep_gates(&report));
            Ok(ok || !common.assert)
        }
        Command::NuSweep { common, nu_list } => {
            let cfg = common.study()?;
            let nus = match nu_list {
                Some(list) => parse_list("nu-list", &list)?,
                None => DEFAULT_NU_LIST.to_vec(),
            };
            let reports = run_nu_sweep(&cfg, &nus)?;
            let mut ok = true;
            for (nu, report) in &reports {
                let path = with_suffix(&common.out, &format!("nu{nu}"));
                std::fs::write(&path, report.to_csv())?;
                println!("# nu = {nu} -> {}", path.display());
                print!("{}", report.to_csv());
                let mut gates = convergence_gates(&cfg, report);
                for g in &mut gates {
                    g.name = format!("nu={nu} {}", g.name);
                }
                ok &= report_gates(&gates);
            }
            let spread = nu_spread(&reports).ok_or_else(|| HdgError::InvalidConfig("a level failed".into()));
            let gate = match spread {
                Ok(s) => Gate { name: "e_u spread across nu".into(), passed: s < 5.0, detail: format!("{s:.3} < 5") },
                Err(e) => Gate { name: "e_u spread across nu".into(), passed: false, detail: e.to_string() },
            };
            ok &= report_gates(&[gate]);
            Ok(ok || !common.assert)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
