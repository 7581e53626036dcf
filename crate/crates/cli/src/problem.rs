//! Problem files.
//!
//! A problem is a sequence of blocks, each opened by a header line. Blank
//! lines and text after `#` are ignored.
//!
//! ```text
//! cost
//! q 2 0                 # q⁺ q⁻, one line per dimension
//! distribution
//! atom 0.5 0.25         # location mass
//! segment 0 1 1         # a b c0 c1 ... (density polynomial in s on [a, b])
//! ---                   # next marginal
//! atom 1 1
//! ball
//! order 1
//! radius 0.5
//! first-stage
//! c 1 1
//! box 0 -inf 4          # dimension lower upper
//! ```
//!
//! Instead of `ball` a `moment` block lists per-dimension conditions:
//!
//! ```text
//! moment
//! dim 0 support -3 3
//! mean 0
//! mad 0 0.5             # center target
//! power 2 1.1           # degree target
//! poly 0.4 0 0 0 1      # target c0 c1 ... (polynomial on support ± 1)
//! ```

use std::fmt::{self, Write as _};

use sirdro::distributions::{Distribution1D, ProductDistribution};
use sirdro::dro::moment::{MomentAmbiguitySet, MomentDim, MomentFunction, MomentSpec};
use sirdro::dro::WassersteinBall;
use sirdro::numerics::PiecewisePolynomial;
use sirdro::sir::{CostVector, FirstStageProblem};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarginalSpec {
    pub atoms: Vec<(f64, f64)>,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MomentCondition {
    Mean(f64),
    Mad { center: f64, target: f64 },
    Power { degree: u32, target: f64 },
    Poly { target: f64, coeffs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentDimSpec {
    pub lower: f64,
    pub upper: f64,
    pub conditions: Vec<MomentCondition>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ambiguity {
    Ball { order: f64, radius: f64 },
    Moment(Vec<MomentDimSpec>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstStageSpec {
    pub cost: Vec<f64>,
    /// `(dimension, lower, upper)` in file order.
    pub boxes: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub q: Vec<(f64, f64)>,
    pub marginals: Vec<MarginalSpec>,
    pub ambiguity: Ambiguity,
    pub first_stage: Option<FirstStageSpec>,
}

/// Failure to turn a parsed problem into library objects.
#[derive(Debug, Error)]
pub enum BuildError {
    #[error("problem has no distribution block")]
    NoDistribution,
    #[error("problem has a moment block, not a ball")]
    NotBall,
    #[error("problem has a ball, not a moment block")]
    NotMoment,
    #[error(transparent)]
    Sir(#[from] sirdro::sir::SirError),
    #[error(transparent)]
    Distribution(#[from] sirdro::distributions::DistributionError),
    #[error(transparent)]
    Dro(#[from] sirdro::dro::DroError),
    #[error(transparent)]
    Numerics(#[from] sirdro::numerics::NumericsError),
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

impl Line<'_> {
    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { line: self.number, column, message: message.into() }
    }

    fn end_column(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.column + t.text.chars().count())
    }

    fn number(&self, k: usize, what: &str) -> Result<f64, ParseError> {
        let Some(tok) = self.tokens.get(k) else {
            return Err(self.err(self.end_column(), format!("missing {what}")));
        };
        let v: f64 = tok.text.parse().map_err(|_| self.err(tok.column, format!("{what} `{}` is not a number", tok.text)))?;
        if v.is_nan() {
            return Err(self.err(tok.column, format!("{what} is NaN")));
        }
        Ok(v)
    }

    fn finite(&self, k: usize, what: &str) -> Result<f64, ParseError> {
        let v = self.number(k, what)?;
        if !v.is_finite() {
            return Err(self.err(self.tokens[k].column, format!("{what} must be finite")));
        }
        Ok(v)
    }

    fn index(&self, k: usize, what: &str) -> Result<usize, ParseError> {
        let Some(tok) = self.tokens.get(k) else {
            return Err(self.err(self.end_column(), format!("missing {what}")));
        };
        tok.text.parse().map_err(|_| self.err(tok.column, format!("{what} `{}` is not a non-negative integer", tok.text)))
    }

    fn finite_rest(&self, from: usize, what: &str) -> Result<Vec<f64>, ParseError> {
        (from..self.tokens.len()).map(|k| self.finite(k, what)).collect()
    }

    fn arity(&self, n: usize) -> Result<(), ParseError> {
        if self.tokens.len() > n {
            return Err(self.err(self.tokens[n].column, format!("unexpected `{}`", self.tokens[n].text)));
        }
        Ok(())
    }
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let chars: Vec<(usize, char)> = body.char_indices().collect();
        let mut tokens = Vec::new();
        let mut k = 0;
        while k < chars.len() {
            if chars[k].1.is_whitespace() {
                k += 1;
                continue;
            }
            let start = k;
            while k < chars.len() && !chars[k].1.is_whitespace() {
                k += 1;
            }
            let end = chars.get(k).map_or(body.len(), |c| c.0);
            tokens.push(Token { text: &body[chars[start].0..end], column: start + 1 });
        }
        if !tokens.is_empty() {
            out.push(Line { number: i + 1, tokens });
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Block {
    Cost,
    Distribution,
    Ball,
    Moment,
    FirstStage,
}

fn header(word: &str) -> Option<Block> {
    match word {
        "cost" => Some(Block::Cost),
        "distribution" => Some(Block::Distribution),
        "ball" => Some(Block::Ball),
        "moment" => Some(Block::Moment),
        "first-stage" => Some(Block::FirstStage),
        _ => None,
    }
}

impl Problem {
    pub fn parse(text: &str) -> Result<Problem, ParseError> {
        let lines = tokenize(text);
        let mut q = Vec::new();
        let mut marginals: Vec<MarginalSpec> = Vec::new();
        let mut seen: Vec<Block> = Vec::new();
        let mut order: Option<f64> = None;
        let mut radius: Option<f64> = None;
        let mut moment_dims: Vec<(usize, MomentDimSpec)> = Vec::new();
        let mut first_stage: Option<FirstStageSpec> = None;
        let mut current: Option<Block> = None;
        let mut ambiguity_line = 0;

        for line in &lines {
            let head = &line.tokens[0];
            if let Some(block) = header(head.text) {
                line.arity(1)?;
                if seen.contains(&block) {
                    return Err(line.err(head.column, format!("duplicate `{}` block", head.text)));
                }
                if matches!(block, Block::Ball | Block::Moment) {
                    if seen.iter().any(|b| matches!(b, Block::Ball | Block::Moment)) {
                        return Err(line.err(head.column, "only one of `ball` and `moment` may appear"));
                    }
                    ambiguity_line = line.number;
                }
                match block {
                    Block::Distribution => marginals.push(MarginalSpec::default()),
                    Block::FirstStage => first_stage = Some(FirstStageSpec { cost: Vec::new(), boxes: Vec::new() }),
                    _ => {}
                }
                seen.push(block);
                current = Some(block);
                continue;
            }
            let Some(block) = current else {
                return Err(line.err(head.column, format!("`{}` outside of a block", head.text)));
            };
            match (block, head.text) {
                (Block::Cost, "q") => {
                    line.arity(3)?;
                    let qp = line.finite(1, "q⁺")?;
                    let qm = line.finite(2, "q⁻")?;
                    if qp < 0.0 || qm < 0.0 {
                        return Err(line.err(line.tokens[if qp < 0.0 { 1 } else { 2 }].column, "costs must be non-negative"));
                    }
                    q.push((qp, qm));
                }
                (Block::Distribution, "atom") => {
                    line.arity(3)?;
                    let loc = line.finite(1, "location")?;
                    let mass = line.finite(2, "mass")?;
                    if mass < 0.0 {
                        return Err(line.err(line.tokens[2].column, "mass must be non-negative"));
                    }
                    marginals.last_mut().unwrap().atoms.push((loc, mass));
                }
                (Block::Distribution, "segment") => {
                    let a = line.finite(1, "segment start")?;
                    let b = line.finite(2, "segment end")?;
                    if b <= a {
                        return Err(line.err(line.tokens[2].column, "segment end must exceed its start"));
                    }
                    let coeffs = line.finite_rest(3, "coefficient")?;
                    if coeffs.is_empty() {
                        return Err(line.err(line.end_column(), "missing density coefficients"));
                    }
                    marginals.last_mut().unwrap().segments.push(Segment { a, b, coeffs });
                }
                (Block::Distribution, "---") => {
                    line.arity(1)?;
                    marginals.push(MarginalSpec::default());
                }
                (Block::Ball, "order") => {
                    line.arity(2)?;
                    let p = line.finite(1, "order")?;
                    if p < 1.0 {
                        return Err(line.err(line.tokens[1].column, "order must be at least 1"));
                    }
                    order = Some(p);
                }
                (Block::Ball, "radius") => {
                    line.arity(2)?;
                    let eps = line.finite(1, "radius")?;
                    if eps < 0.0 {
                        return Err(line.err(line.tokens[1].column, "radius must be non-negative"));
                    }
                    radius = Some(eps);
                }
                (Block::Moment, "dim") => {
                    line.arity(5)?;
                    let i = line.index(1, "dimension")?;
                    if line.tokens.get(2).map(|t| t.text) != Some("support") {
                        return Err(line.err(line.tokens.get(2).map_or(line.end_column(), |t| t.column), "expected `support`"));
                    }
                    let lower = line.finite(3, "support lower end")?;
                    let upper = line.finite(4, "support upper end")?;
                    if upper < lower {
                        return Err(line.err(line.tokens[4].column, "support upper end below lower end"));
                    }
                    if moment_dims.iter().any(|(j, _)| *j == i) {
                        return Err(line.err(line.tokens[1].column, format!("dimension {i} listed twice")));
                    }
                    moment_dims.push((i, MomentDimSpec { lower, upper, conditions: Vec::new() }));
                }
                (Block::Moment, word @ ("mean" | "mad" | "power" | "poly")) => {
                    let Some((_, dim)) = moment_dims.last_mut() else {
                        return Err(line.err(head.column, format!("`{word}` before any `dim` line")));
                    };
                    let cond = match word {
                        "mean" => {
                            line.arity(2)?;
                            MomentCondition::Mean(line.finite(1, "target")?)
                        }
                        "mad" => {
                            line.arity(3)?;
                            MomentCondition::Mad { center: line.finite(1, "center")?, target: line.finite(2, "target")? }
                        }
                        "power" => {
                            line.arity(3)?;
                            let degree = line.index(1, "degree")?;
                            if degree > 4 {
                                return Err(line.err(line.tokens[1].column, "degree must be at most 4"));
                            }
                            MomentCondition::Power { degree: degree as u32, target: line.finite(2, "target")? }
                        }
                        _ => {
                            let target = line.finite(1, "target")?;
                            let coeffs = line.finite_rest(2, "coefficient")?;
                            if coeffs.is_empty() || coeffs.len() > 4 {
                                return Err(line.err(line.end_column(), "a moment polynomial needs 1 to 4 coefficients"));
                            }
                            MomentCondition::Poly { target, coeffs }
                        }
                    };
                    dim.conditions.push(cond);
                }
                (Block::FirstStage, "c") => {
                    let fs = first_stage.as_mut().unwrap();
                    if !fs.cost.is_empty() {
                        return Err(line.err(head.column, "duplicate `c` line"));
                    }
                    fs.cost = line.finite_rest(1, "cost")?;
                    if fs.cost.is_empty() {
                        return Err(line.err(line.end_column(), "missing costs"));
                    }
                }
                (Block::FirstStage, "box") => {
                    line.arity(4)?;
                    let i = line.index(1, "dimension")?;
                    let lo = line.number(2, "lower bound")?;
                    let hi = line.number(3, "upper bound")?;
                    if lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                        return Err(line.err(line.tokens[3].column, "empty box"));
                    }
                    first_stage.as_mut().unwrap().boxes.push((i, lo, hi));
                }
                (_, word) => return Err(line.err(head.column, format!("unknown keyword `{word}` in this block"))),
            }
        }

        let end = lines.last().map_or(1, |l| l.number);
        let at_end = |message: &str| ParseError { line: end, column: 1, message: message.to_string() };
        let m = q.len();
        if m == 0 {
            return Err(at_end("missing `cost` block or `q` lines"));
        }
        let ambiguity = if seen.contains(&Block::Ball) {
            let at = |message: &str| ParseError { line: ambiguity_line, column: 1, message: message.to_string() };
            Ambiguity::Ball {
                order: order.ok_or_else(|| at("ball needs an `order` line"))?,
                radius: radius.ok_or_else(|| at("ball needs a `radius` line"))?,
            }
        } else if seen.contains(&Block::Moment) {
            moment_dims.sort_by_key(|(i, _)| *i);
            if moment_dims.len() != m || moment_dims.iter().enumerate().any(|(k, (i, _))| k != *i) {
                return Err(ParseError {
                    line: ambiguity_line,
                    column: 1,
                    message: format!("moment block must list dimensions 0..{m} once each"),
                });
            }
            Ambiguity::Moment(moment_dims.into_iter().map(|(_, d)| d).collect())
        } else {
            return Err(at_end("missing `ball` or `moment` block"));
        };
        if !marginals.is_empty() {
            if let Some(k) = marginals.iter().position(|d| d.atoms.is_empty() && d.segments.is_empty()) {
                return Err(at_end(&format!("marginal {k} is empty")));
            }
            if marginals.len() != m {
                return Err(at_end(&format!("{} marginals for {m} cost dimensions", marginals.len())));
            }
        }
        if let Some(fs) = &first_stage {
            if fs.cost.len() != m {
                return Err(at_end(&format!("{} first-stage costs for {m} dimensions", fs.cost.len())));
            }
            if let Some(&(i, _, _)) = fs.boxes.iter().find(|b| b.0 >= m) {
                return Err(at_end(&format!("box for dimension {i} but only {m} dimensions")));
            }
        }
        Ok(Problem { q, marginals, ambiguity, first_stage })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn cost_vector(&self) -> Result<CostVector, BuildError> {
        Ok(CostVector::new(&self.q)?)
    }

    pub fn reference(&self) -> Result<ProductDistribution, BuildError> {
        if self.marginals.is_empty() {
            return Err(BuildError::NoDistribution);
        }
        let marginals: Result<Vec<Distribution1D>, BuildError> = self.marginals.iter().map(marginal).collect();
        Ok(ProductDistribution::new(marginals?)?)
    }

    pub fn ball(&self) -> Result<WassersteinBall, BuildError> {
        match self.ambiguity {
            Ambiguity::Ball { order, radius } => Ok(WassersteinBall::new(self.reference()?, order, radius)?),
            Ambiguity::Moment(_) => Err(BuildError::NotBall),
        }
    }

    pub fn moment_set(&self) -> Result<MomentAmbiguitySet, BuildError> {
        let Ambiguity::Moment(dims) = &self.ambiguity else {
            return Err(BuildError::NotMoment);
        };
        let mut out = Vec::with_capacity(dims.len());
        for d in dims {
            let mut specs = Vec::with_capacity(d.conditions.len());
            for c in &d.conditions {
                let (function, target) = match c {
                    MomentCondition::Mean(t) => (MomentFunction::power(1)?, *t),
                    MomentCondition::Mad { center, target } => (MomentFunction::abs_dev(*center)?, *target),
                    MomentCondition::Power { degree, target } => (MomentFunction::power(*degree)?, *target),
                    MomentCondition::Poly { target, coeffs } => {
                        let g = PiecewisePolynomial::new(vec![d.lower - 1.0, d.upper + 1.0], vec![coeffs.clone()])?;
                        (MomentFunction::custom(g)?, *target)
                    }
                };
                specs.push(MomentSpec::new(function, target)?);
            }
            out.push(MomentDim { lower: d.lower, upper: d.upper, specs });
        }
        Ok(MomentAmbiguitySet::new(out)?)
    }

    /// The first-stage block, or zero costs and no bounds when absent.
    pub fn first_stage(&self) -> Result<FirstStageProblem, BuildError> {
        let m = self.dim();
        let Some(fs) = &self.first_stage else {
            return Ok(FirstStageProblem::unconstrained(vec![0.0; m])?);
        };
        let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); m];
        for &(i, lo, hi) in &fs.boxes {
            bounds[i] = (lo, hi);
        }
        Ok(FirstStageProblem::new(fs.cost.clone(), bounds)?)
    }

    /// Text that parses back to an identical problem.
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

fn marginal(spec: &MarginalSpec) -> Result<Distribution1D, BuildError> {
    if spec.segments.is_empty() {
        return Ok(Distribution1D::discrete(&spec.atoms)?);
    }
    let mut segs = spec.segments.clone();
    segs.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    // Gaps between segments are filled with zero density.
    let mut breaks = vec![segs[0].a];
    let mut coeffs = Vec::new();
    for s in &segs {
        let last = *breaks.last().unwrap();
        if s.a > last {
            coeffs.push(vec![0.0]);
            breaks.push(s.a);
        }
        coeffs.push(s.coeffs.clone());
        breaks.push(s.b);
    }
    let density = PiecewisePolynomial::new(breaks, coeffs)?;
    Ok(Distribution1D::new(spec.atoms.clone(), density)?)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::from("cost\n");
        for (qp, qm) in &self.q {
            writeln!(out, "q {qp} {qm}")?;
        }
        if !self.marginals.is_empty() {
            out.push_str("distribution\n");
            for (k, d) in self.marginals.iter().enumerate() {
                if k > 0 {
                    out.push_str("---\n");
                }
                for (loc, mass) in &d.atoms {
                    writeln!(out, "atom {loc} {mass}")?;
                }
                for s in &d.segments {
                    writeln!(out, "segment {} {} {}", s.a, s.b, join(&s.coeffs))?;
                }
            }
        }
        match &self.ambiguity {
            Ambiguity::Ball { order, radius } => writeln!(out, "ball\norder {order}\nradius {radius}")?,
            Ambiguity::Moment(dims) => {
                out.push_str("moment\n");
                for (i, d) in dims.iter().enumerate() {
                    writeln!(out, "dim {i} support {} {}", d.lower, d.upper)?;
                    for c in &d.conditions {
                        match c {
                            MomentCondition::Mean(t) => writeln!(out, "mean {t}")?,
                            MomentCondition::Mad { center, target } => writeln!(out, "mad {center} {target}")?,
                            MomentCondition::Power { degree, target } => writeln!(out, "power {degree} {target}")?,
                            MomentCondition::Poly { target, coeffs } => writeln!(out, "poly {target} {}", join(coeffs))?,
                        }
                    }
                }
            }
        }
        if let Some(fs) = &self.first_stage {
            writeln!(out, "first-stage\nc {}", join(&fs.cost))?;
            for (i, lo, hi) in &fs.boxes {
                writeln!(out, "box {i} {lo} {hi}")?;
            }
        }
        f.write_str(&out)
    }
}
