//! Command dispatch and report assembly for the `k3sd` binary.
//!
//! Exit codes: 0 when every check passes, 1 when a verified check fails,
//! 2 for input errors (unreadable or invalid scenarios, bad flags, inputs
//! outside a hypothesis).

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::fourier_mukai::{self, det_transform, FmError, NumClass};
use crate::kodaira::{FiberConfig, FiberType, KodairaError, DEFAULT_BOX_BOUND};
use crate::lattice::DivisorClass;
use crate::linalg;
use crate::mukai::{self, MukaiError};
use crate::nl_divisor::{self, NlError};
use crate::report::{Check, Report, Verdict};
use crate::scenario::{self, Scenario, MAX_BOX_BOUND, MAX_SEARCH_BOUND};
use crate::verlinde::{self, VerlindeError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct InputError(pub String);

fn input(e: impl std::fmt::Display) -> InputError {
    InputError(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    AnalyzeNl {
        bound: Option<i64>,
    },
    Fm,
    SdCheck,
    Kodaira {
        /// Fiber type and 0-based attach index; otherwise the scenario's fibers.
        fiber: Option<(FiberType, usize)>,
        bound: Option<i64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::AnalyzeNl { .. } => "analyze-nl",
            Command::Fm => "fm",
            Command::SdCheck => "sd-check",
            Command::Kodaira { .. } => "kodaira",
        }
    }
}

fn check_range(flag: &str, v: i64, lo: i64, hi: i64) -> Result<i64, InputError> {
    if v < lo || v > hi {
        return Err(InputError(format!("{flag} = {v} violates {lo} <= {flag} <= {hi}")));
    }
    Ok(v)
}

fn require<'a>(scenario: Option<&'a Scenario>, cmd: &str) -> Result<&'a Scenario, InputError> {
    scenario.ok_or_else(|| InputError(format!("{cmd} needs --scenario")))
}

/// Runs one command; `Err` is an input error, a failing check is reported
/// inside the `Report`.
pub fn run_and_report(scenario: Option<&Scenario>, command: &Command) -> Result<Report, InputError> {
    let mut report = Report::new(command.name());
    match command {
        Command::AnalyzeNl { bound } => analyze_nl(require(scenario, "analyze-nl")?, *bound, &mut report)?,
        Command::Fm => fm(scenario, &mut report)?,
        Command::SdCheck => sd_check(require(scenario, "sd-check")?, &mut report)?,
        Command::Kodaira { fiber, bound } => kodaira(scenario, *fiber, *bound, &mut report)?,
    }
    Ok(report)
}

pub fn exit_code(result: &Result<Report, InputError>) -> i32 {
    match result {
        Ok(r) if r.overall() == Verdict::Pass => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(_) => EXIT_INPUT,
    }
}

fn list(classes: &[DivisorClass], sc: &Scenario) -> String {
    let parts: Vec<String> = classes.iter().map(|c| sc.model.describe(c)).collect();
    format!("{{{}}}", parts.join(", "))
}

fn analyze_nl(sc: &Scenario, bound: Option<i64>, report: &mut Report) -> Result<(), InputError> {
    let m = &sc.model;
    if m.ell_excluded() {
        return Err(InputError(
            "ell = 1 is excluded: the section/fiber decomposition requires ell != 1".into(),
        ));
    }
    let bound = check_range("--bound", bound.unwrap_or(sc.options.bound), 0, MAX_SEARCH_BOUND)?;
    let inertia = linalg::inertia(m.gram());
    report.push(Check::info("model.ell", m.ell()));
    report.push(Check::info("model.rank", m.rank()));
    report.push(Check::info("model.basis", m.labels().join(",")));
    report.push(Check::pass_if(
        "model.signature",
        inertia.positive == 1 && inertia.zero == 0,
        format!("({}, {})", inertia.positive, inertia.negative),
    ));
    if let Some(a) = m.reference_ample() {
        report.push(Check::info("model.reference_ample", m.describe(a)));
    }
    report.push(Check::info("H", m.describe(&sc.polarization)));
    report.push(Check::info("F", m.describe(&sc.candidate)));

    let fiber = match nl_divisor::lemma1_analyze(m, &sc.polarization, &sc.candidate) {
        Ok(rep) => {
            report.extend_prefixed("lemma1", rep.checks.iter().cloned());
            report.push(Check::info("lemma1.section_class", m.describe(&rep.section)));
            rep.fiber
        }
        Err(e @ (NlError::ExcludedDegreeOne | NlError::Precondition(_) | NlError::Lattice(_))) => {
            return Err(input(e));
        }
        Err(e) => {
            report.push(Check::pass_if("lemma1.error", false, e));
            return Ok(());
        }
    };
    match nl_divisor::uniqueness_search(m, &sc.polarization, bound) {
        Ok(classes) => {
            report.push(Check::info("uniqueness.bound", bound));
            report.push(Check::info("uniqueness.classes", list(&classes, sc)));
            report.push(Check::pass_if(
                "uniqueness.unique",
                classes == [fiber.clone()],
                format!("{} class(es)", classes.len()),
            ));
        }
        Err(e @ NlError::SearchTooLarge(_)) => return Err(InputError(format!("{e}; lower --bound"))),
        Err(e) => return Err(input(e)),
    }
    Ok(())
}

fn push_admissibility(sc: &Scenario, report: &mut Report) -> Result<bool, InputError> {
    let (v, w) = sc
        .mukai_vectors()
        .ok_or_else(|| InputError("scenario has no [vectors] section".into()))?;
    let adm = mukai::admissibility_check(&sc.model, &v, &w).map_err(input)?;
    let ok = adm.passed();
    report.extend_prefixed("admissibility", adm.checks);
    Ok(ok)
}

fn fm(sc: Option<&Scenario>, report: &mut Report) -> Result<(), InputError> {
    let matrix = fourier_mukai::matrix_checks().map_err(input)?;
    report.extend_prefixed("matrix", matrix);
    let Some(sc) = sc else { return Ok(()) };
    if !push_admissibility(sc, report)? {
        report.push(Check::pass_if("fm.precondition", false, "admissibility fails"));
        return Ok(());
    }
    let (v, w) = sc.mukai_vectors().expect("checked above");
    let e_dual = NumClass::from_mukai(&sc.model, &v).map_err(input)?.dual();
    let det = det_transform(e_dual);
    report.push(Check::info("det.fiber_degree", det.fiber_degree));
    report.push(Check::info(
        "det.diagonal_inverse",
        format!("{:?}", det.diagonal_inverse),
    ));
    report.push(Check::info("det.diagonal_sum", format!("{:?}", det.diagonal_sum)));
    report.push(Check::info("det.twisted_euler", det.twisted_euler));
    report.push(Check::info("det.total", format!("{:?}", det.total)));
    match fourier_mukai::fm_consistency(&sc.model, &v, &w) {
        Ok(rep) => report.extend_prefixed("fm", rep.checks),
        Err(e @ (FmError::Precondition(_) | FmError::Mukai(_) | FmError::OffSublattice(_))) => return Err(input(e)),
        Err(e) => report.push(Check::pass_if("fm.error", false, e)),
    }
    Ok(())
}

fn sd_check(sc: &Scenario, report: &mut Report) -> Result<(), InputError> {
    push_admissibility(sc, report)?;
    let (v, w) = sc.mukai_vectors().expect("checked above");
    match verlinde::sd_counts(&sc.model, &v, &w) {
        Ok(sd) => {
            let ranks = verlinde::pushforward_rank(&sd);
            report.extend_prefixed("sd", sd.checks);
            report.push(Check::info("rank.pi_theta", ranks.theta));
            report.push(Check::info("rank.pi_L", ranks.l));
            report.push(Check::info("rank.det_factor", ranks.det_factor));
        }
        Err(VerlindeError::NotOrthogonal(c)) => {
            report.push(Check::pass_if("sd.orthogonal", false, format!("integral of v.w = {c}")));
            return Ok(());
        }
        Err(e @ VerlindeError::Mukai(MukaiError::EmptyModuli(_))) => {
            report.push(Check::pass_if("sd.moduli", false, e));
            return Ok(());
        }
        Err(e) => return Err(input(e)),
    }
    let x = sc.vectors.expect("checked above");
    let (d, e) = (sc.options.d, sc.options.e);
    let t = verlinde::theta_normalization(sc.ell, x.r, x.a, x.s, x.b, d, e);
    report.push(Check::info("theta.d_e", format!("{d},{e}")));
    report.push(Check::info("theta.alpha", t.alpha));
    report.push(Check::info("theta.beta", t.beta));
    report.push(Check::info("theta.restriction_exponent", t.restriction_exponent));
    report.push(Check::info("theta.normalization_exponent", t.normalization_exponent));
    report.push(Check::info("twist_T", verlinde::twist_t(x.r, x.s, d, e)));
    Ok(())
}

fn kodaira(
    sc: Option<&Scenario>,
    fiber: Option<(FiberType, usize)>,
    bound: Option<i64>,
    report: &mut Report,
) -> Result<(), InputError> {
    let default_bound = sc.map_or(DEFAULT_BOX_BOUND, |s| s.options.box_bound);
    let bound = check_range("--bound", bound.unwrap_or(default_bound), 1, MAX_BOX_BOUND)?;
    let configs: Vec<(String, FiberConfig)> = match fiber {
        Some((ty, attach)) => vec![(ty.to_string(), FiberConfig::build(ty, attach).map_err(input)?)],
        None => {
            let sc = sc.ok_or_else(|| InputError("kodaira needs --type or --scenario".into()))?;
            if sc.fibers.is_empty() {
                return Err(InputError("scenario declares no fibers".into()));
            }
            sc.fibers
                .iter()
                .enumerate()
                .map(|(i, c)| (format!("fiber{}.{}", i + 1, c.fiber_type), c.clone()))
                .collect()
        }
    };
    for (prefix, cfg) in configs {
        report.push(Check::info(format!("{prefix}.components"), cfg.labels.join(",")));
        report.push(Check::info(format!("{prefix}.attach"), &cfg.labels[cfg.attach]));
        report.extend_prefixed(&prefix, cfg.zariski_check().checks);
        match cfg.forced_multiple_check(bound) {
            Ok(rep) => report.extend_prefixed(&prefix, rep.checks()),
            Err(e @ KodairaError::AttachMultiplicity { .. }) => return Err(input(e)),
            Err(e) => report.push(Check::pass_if(format!("{prefix}.forced_multiple"), false, e)),
        }
    }
    Ok(())
}

#[derive(Debug, Parser)]
#[command(
    name = "k3sd",
    version,
    about = "Exact lattice checks for strange duality on elliptic K3 surfaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Emit `name<TAB>verdict<TAB>value` records.
    #[arg(long)]
    pub machine: bool,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Section/fiber decomposition of the polarization and uniqueness of F.
    AnalyzeNl {
        #[arg(long)]
        scenario: PathBuf,
        /// Half-width of the uniqueness search box.
        #[arg(long, allow_negative_numbers = true)]
        bound: Option<i64>,
        #[command(flatten)]
        output: Output,
    },
    /// Transform matrices and, with a scenario, the fm1/fm2 consistency.
    Fm {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Strange-duality counts, theta normalization and the twist T.
    SdCheck {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Zariski and forced-multiple checks for a Kodaira fiber.
    Kodaira {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Fiber type: I2.., III, IV, Istar0.., IIstar, IIIstar, IVstar.
        #[arg(long = "type")]
        fiber_type: Option<String>,
        /// 1-based index of the component meeting the section.
        #[arg(long)]
        attach: Option<usize>,
        /// Brute-force box half-width.
        #[arg(long, allow_negative_numbers = true)]
        bound: Option<i64>,
        #[command(flatten)]
        output: Output,
    },
}

/// Result of a full invocation, before anything is printed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn load(path: &PathBuf) -> Result<Scenario, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    scenario::parse_scenario(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn dispatch(cmd: CliCommand) -> (Result<Report, InputError>, bool) {
    let (result, machine) = match cmd {
        CliCommand::AnalyzeNl {
            scenario,
            bound,
            output,
        } => (
            load(&scenario).and_then(|sc| run_and_report(Some(&sc), &Command::AnalyzeNl { bound })),
            output.machine,
        ),
        CliCommand::Fm { scenario, output } => (
            scenario
                .as_ref()
                .map(load)
                .transpose()
                .and_then(|sc| run_and_report(sc.as_ref(), &Command::Fm)),
            output.machine,
        ),
        CliCommand::SdCheck { scenario, output } => (
            load(&scenario).and_then(|sc| run_and_report(Some(&sc), &Command::SdCheck)),
            output.machine,
        ),
        CliCommand::Kodaira {
            scenario,
            fiber_type,
            attach,
            bound,
            output,
        } => {
            let run = || {
                let fiber = match (fiber_type, attach) {
                    (Some(t), k) => {
                        let ty: FiberType = t.parse().map_err(input)?;
                        let k = k.unwrap_or(1);
                        if k == 0 {
                            return Err(InputError("--attach is 1-based".into()));
                        }
                        Some((ty, k - 1))
                    }
                    (None, Some(_)) => return Err(InputError("--attach needs --type".into())),
                    (None, None) => None,
                };
                let sc = scenario.as_ref().map(load).transpose()?;
                run_and_report(sc.as_ref(), &Command::Kodaira { fiber, bound })
            };
            (run(), output.machine)
        }
    };
    (result, machine)
}

/// Parses arguments, runs the command and renders its report.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            } else {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            };
        }
    };
    let (result, machine) = dispatch(cli.command);
    let code = exit_code(&result);
    match result {
        Ok(report) => Outcome {
            stdout: if machine {
                report.render_machine()
            } else {
                report.render_human()
            },
            stderr: String::new(),
            code,
        },
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code,
        },
    }
}
