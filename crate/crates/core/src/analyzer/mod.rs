//! Front end and abstract interpreter for a small real-valued language.
//!
//! ```
//! use czono::analyzer::{analyze_source, AnalyzerConfig};
//!
//! let r = analyze_source("real x = [0,1]; real y = [0,0]; y = x;", &AnalyzerConfig::default()).unwrap();
//! let y = r.final_range("y").unwrap();
//! assert!(y.lo <= 0.0 && y.hi >= 1.0 && y.hi - 1.0 < 1e-12);
//! ```

mod bench;
mod domain;
mod engine;
mod parser;
mod soundness;

use std::fmt;

pub use bench::{bench, bench_entry, bundled_corpus, BenchRow, CorpusEntry};
pub use domain::{AffineDomain, Domain, IntervalDomain, UNBOUNDED};
pub use engine::analyze_with;
pub use parser::{parse, Diagnostic, DiagnosticKind};
pub use soundness::{check_soundness, sampled_hull, SoundnessReport, Violation};

use crate::affine::AffineForm;
use crate::ast::Program;
use crate::error::Result;
use crate::interval::Interval;
use crate::noise::NoiseBox;
use crate::scalar::Rational;
use crate::transfer::MulMode;

/// Numerical domain underneath the symbols. Only intervals exist.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SubDomain {
    #[default]
    Interval,
}

/// Which abstraction runs over the program.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AnalysisKind {
    #[default]
    Constrained,
    /// Plain interval analysis, no correlations.
    IntervalBaseline,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Precision {
    #[default]
    Float64,
    Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyzerConfig {
    pub domain: SubDomain,
    pub kind: AnalysisKind,
    /// Head joins before widening kicks in.
    pub unroll: usize,
    pub max_symbols: usize,
    pub precision: Precision,
    pub mul_mode: MulMode,
    /// Positive widening steps; mirrored to the negative side, with 0 and
    /// `±1e38` always present.
    pub thresholds: Vec<f64>,
    /// Head iterations after widening before giving up.
    pub max_widenings: usize,
    pub seed: u64,
    pub samples: usize,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig {
            domain: SubDomain::Interval,
            kind: AnalysisKind::Constrained,
            unroll: 3,
            max_symbols: 4096,
            precision: Precision::Float64,
            mul_mode: MulMode::Centered,
            thresholds: vec![1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6],
            max_widenings: 16,
            seed: 0,
            samples: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarState {
    pub name: String,
    pub range: Interval<f64>,
    /// `None` for the interval baseline.
    pub form: Option<AffineForm<f64>>,
}

/// Exact bounds as text, kept when the analysis runs over rationals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExactPoint {
    /// `(name, lo, hi)`.
    pub vars: Vec<(String, String, String)>,
    pub central: Vec<(String, String)>,
    pub perturbation: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointState {
    pub id: String,
    pub reachable: bool,
    pub vars: Vec<VarState>,
    pub noise: Option<NoiseBox<f64>>,
    pub exact: Option<ExactPoint>,
}

impl PointState {
    pub fn unreachable(id: String) -> Self {
        PointState { id, reachable: false, vars: Vec::new(), noise: None, exact: None }
    }

    pub fn var(&self, name: &str) -> Option<&VarState> {
        self.vars.iter().find(|v| v.name == name)
    }
}

/// Invariants at every program point, in program order.
///
/// Ids are `L<line>:<col>` after a declaration or statement,
/// `L<line>:<col>.head` at a loop head and `end` after the program.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisResult {
    pub points: Vec<PointState>,
    pub loops: Vec<LoopStats>,
}

/// How a loop head stabilized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopStats {
    pub id: String,
    /// Head joins, widened ones included.
    pub joins: usize,
    pub widenings: usize,
}

impl AnalysisResult {
    pub fn point(&self, id: &str) -> Option<&PointState> {
        self.points.iter().find(|p| p.id == id)
    }

    pub fn final_state(&self) -> &PointState {
        self.points.last().expect("analysis records the end point")
    }

    pub fn final_range(&self, name: &str) -> Option<Interval<f64>> {
        self.final_state().var(name).map(|v| v.range.clone())
    }
}

impl fmt::Display for AnalysisResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.points {
            writeln!(f, "{}:", p.id)?;
            if !p.reachable {
                writeln!(f, "  unreachable")?;
            }
            match &p.exact {
                Some(e) => {
                    for (name, lo, hi) in &e.vars {
                        writeln!(f, "  {name} in [{lo}, {hi}]")?;
                    }
                }
                None => {
                    for v in &p.vars {
                        writeln!(f, "  {} in [{}, {}]", v.name, v.range.lo, v.range.hi)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Why an analysis produced no result.
#[derive(Debug)]
pub enum AnalyzeError {
    Parse(Diagnostic),
    Analysis(crate::error::Error),
}

impl fmt::Display for AnalyzeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyzeError::Parse(d) => write!(f, "{d}"),
            AnalyzeError::Analysis(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AnalyzeError {}

pub fn analyze(p: &Program, cfg: &AnalyzerConfig) -> Result<AnalysisResult> {
    match (cfg.kind, cfg.precision) {
        (AnalysisKind::Constrained, Precision::Float64) => analyze_with(p, cfg, AffineDomain::<f64>::new(cfg.mul_mode)),
        (AnalysisKind::Constrained, Precision::Rational) => {
            analyze_with(p, cfg, AffineDomain::<Rational>::new(cfg.mul_mode))
        }
        (AnalysisKind::IntervalBaseline, Precision::Float64) => analyze_with(p, cfg, IntervalDomain::<f64>::default()),
        (AnalysisKind::IntervalBaseline, Precision::Rational) => {
            analyze_with(p, cfg, IntervalDomain::<Rational>::default())
        }
    }
}

pub fn analyze_source(src: &str, cfg: &AnalyzerConfig) -> std::result::Result<AnalysisResult, AnalyzeError> {
    let p = parse(src).map_err(AnalyzeError::Parse)?;
    analyze(&p, cfg).map_err(AnalyzeError::Analysis)
}
