use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use sirdro::dro::moment::solve_first_stage_moment;
use sirdro::dro::{solve_first_stage_large_eps, solve_first_stage_pragmatic_w1, solve_first_stage_rowgen};
use sirdro::sir::{expected_recourse, RecourseVariant};

use crate::problem::{Ambiguity, Problem};
use crate::{fmt17, numerical, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Exact,
    Usc,
    Hat,
    Lp,
}

impl From<Variant> for RecourseVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Exact => RecourseVariant::Exact,
            Variant::Usc => RecourseVariant::Usc,
            Variant::Hat => RecourseVariant::Hat,
            Variant::Lp => RecourseVariant::Lp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    PragmaticW1,
    PragmaticRowgen,
    StandardLargeEps,
    Moment,
}

pub fn load(path: &Path) -> Result<Problem, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    Problem::parse(&text).map_err(|source| CliError::Parse { path: path.display().to_string(), source })
}

/// Comma-separated numbers.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("`{t}` in --x is not a finite number")))
        })
        .collect()
}

/// CSV text with LF line endings; rows may differ in length.
pub fn to_csv(rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for r in rows {
        w.write_record(r).map_err(numerical)?;
    }
    let bytes = w.into_inner().map_err(numerical)?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Write { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn check_x(problem: &Problem, x: &[f64]) -> Result<(), CliError> {
    if x.len() != problem.dim() {
        return Err(CliError::Usage(format!("--x has {} entries but the problem has {} dimensions", x.len(), problem.dim())));
    }
    Ok(())
}

/// Expected recourse under the reference distribution.
pub fn eval(problem: &Problem, x: &[f64], variant: Variant) -> Result<Vec<Vec<String>>, CliError> {
    check_x(problem, x)?;
    let q = problem.cost_vector()?;
    let reference = problem.reference()?;
    let value = expected_recourse(&q, &reference, x, variant.into()).map_err(numerical)?;
    let mut header = vec!["variant".to_string()];
    header.extend((1..=x.len()).map(|i| format!("x{i}")));
    header.push("value".into());
    let mut row = vec![variant.to_possible_value().unwrap().get_name().to_string()];
    row.extend(x.iter().map(|&v| fmt17(v)));
    row.push(fmt17(value));
    Ok(vec![header, row])
}

pub struct SolveOutput {
    /// `field,value...` rows: x, objective and the dual certificate.
    pub solution: Vec<Vec<String>>,
    /// Iteration log with a header row.
    pub log: Vec<Vec<String>>,
}

fn ball_order(problem: &Problem) -> Option<f64> {
    match problem.ambiguity {
        Ambiguity::Ball { order, .. } => Some(order),
        Ambiguity::Moment(_) => None,
    }
}

pub fn solve(problem: &Problem, method: Method, tol: f64) -> Result<SolveOutput, CliError> {
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("--tol {tol} must be positive")));
    }
    let method_name = method.to_possible_value().unwrap().get_name().to_string();
    let needs_ball = method != Method::Moment;
    match (needs_ball, ball_order(problem)) {
        (true, None) => return Err(CliError::Usage(format!("method {method_name} needs a `ball` block"))),
        (false, Some(_)) => return Err(CliError::Usage("method moment needs a `moment` block".into())),
        (true, Some(p)) if p != 1.0 && method != Method::PragmaticRowgen => {
            return Err(CliError::Usage(format!("method {method_name} needs order 1, the ball has order {p}")))
        }
        _ => {}
    }
    let q = problem.cost_vector()?;
    let prob = problem.first_stage()?;
    let row = |field: &str, values: Vec<String>| {
        let mut r = vec![field.to_string()];
        r.extend(values);
        r
    };
    let mut solution = vec![row("method", vec![method_name])];
    let mut log = Vec::new();
    let (x, objective) = match method {
        Method::PragmaticW1 | Method::StandardLargeEps => {
            let ball = problem.ball()?;
            let sol = if method == Method::PragmaticW1 {
                solve_first_stage_pragmatic_w1(&prob, &q, &ball)
            } else {
                solve_first_stage_large_eps(&prob, &q, &ball)
            }
            .map_err(numerical)?;
            // the multiplier ‖q‖∞ is optimal for both closed forms
            solution.push(row("lambda", vec![fmt17(q.qinf())]));
            log.push(vec!["iteration".into(), "objective".into()]);
            log.push(vec!["0".into(), fmt17(sol.objective)]);
            (sol.x, sol.objective)
        }
        Method::PragmaticRowgen => {
            let ball = problem.ball()?;
            let (sol, cert) = solve_first_stage_rowgen(&prob, &q, &ball, tol).map_err(numerical)?;
            solution.push(row("lambda", vec![fmt17(cert.lambda)]));
            for (i, nus) in cert.nu.iter().enumerate() {
                for (k, nu) in nus.iter().enumerate() {
                    solution.push(row("nu", vec![i.to_string(), k.to_string(), fmt17(*nu)]));
                }
            }
            solution.push(row("max_violation", vec![fmt17(cert.max_violation)]));
            log.push(["iteration", "lambda", "objective", "cuts", "max_violation"].map(String::from).to_vec());
            for (k, it) in cert.log.iter().enumerate() {
                log.push(vec![k.to_string(), fmt17(it.lambda), fmt17(it.objective), it.cuts.to_string(), fmt17(it.max_violation)]);
            }
            (sol.x, sol.objective)
        }
        Method::Moment => {
            let set = problem.moment_set()?;
            let sol = solve_first_stage_moment(&prob, &q, &set, tol).map_err(numerical)?;
            log.push(["dim", "iteration", "objective", "max_violation"].map(String::from).to_vec());
            for (i, d) in sol.duals.iter().enumerate() {
                solution.push(row("pi", vec![i.to_string(), fmt17(d.pi)]));
                for (j, nu) in d.nu.iter().enumerate() {
                    solution.push(row("nu", vec![i.to_string(), j.to_string(), fmt17(*nu)]));
                }
                solution.push(row("max_violation", vec![i.to_string(), fmt17(d.max_violation)]));
                for (k, (obj, viol)) in d.history.iter().enumerate() {
                    log.push(vec![i.to_string(), k.to_string(), fmt17(*obj), fmt17(*viol)]);
                }
            }
            (sol.x, sol.objective)
        }
    };
    solution.insert(1, row("x", x.iter().map(|&v| fmt17(v)).collect()));
    solution.insert(2, row("objective", vec![fmt17(objective)]));
    Ok(SolveOutput { solution, log })
}
