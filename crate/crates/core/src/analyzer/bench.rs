//! Benchmark corpus: constrained analysis against the interval baseline.

use std::fmt;

use crate::interval::Interval;

use super::{analyze, parse, sampled_hull, AnalysisKind, AnalyzeError, AnalyzerConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub source: String,
}

impl CorpusEntry {
    pub fn new(name: &str, source: &str) -> Self {
        CorpusEntry { name: name.to_string(), source: source.to_string() }
    }

    /// Variable named by a `// interest: v` line.
    pub fn interest(&self) -> Option<&str> {
        self.source
            .lines()
            .filter_map(|l| l.trim().strip_prefix("//"))
            .find_map(|l| l.trim().strip_prefix("interest:"))
            .map(str::trim)
    }
}

/// The programs shipped with the crate, sorted by name.
pub fn bundled_corpus() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry::new("cosine", include_str!("../../corpus/cosine.real")),
        CorpusEntry::new("damped", include_str!("../../corpus/damped.real")),
        CorpusEntry::new("interl2", include_str!("../../corpus/interl2.real")),
        CorpusEntry::new("interq1", include_str!("../../corpus/interq1.real")),
        CorpusEntry::new("interq2", include_str!("../../corpus/interq2.real")),
        CorpusEntry::new("itvpoly", include_str!("../../corpus/itvpoly.real")),
        CorpusEntry::new("running", include_str!("../../corpus/running.real")),
    ]
}

/// Relative gap below which two bounds count as equal.
pub const ROUNDOFF: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub name: String,
    pub var: String,
    pub constrained: Interval<f64>,
    pub baseline: Interval<f64>,
    /// `None` when no run finished.
    pub sampled: Option<Interval<f64>>,
}

impl BenchRow {
    /// The constrained range is wider than the baseline on some side, by
    /// more than [`ROUNDOFF`] relative to the bound.
    pub fn wider_than_baseline(&self) -> bool {
        let slack = |v: f64| ROUNDOFF * v.abs().max(1.0);
        self.constrained.lo < self.baseline.lo - slack(self.baseline.lo)
            || self.constrained.hi > self.baseline.hi + slack(self.baseline.hi)
    }

    /// Both ranges contain every sampled value.
    pub fn contains_samples(&self) -> bool {
        self.sampled.as_ref().is_none_or(|s| s.is_subset(&self.constrained) && s.is_subset(&self.baseline))
    }
}

pub fn bench_entry(entry: &CorpusEntry, cfg: &AnalyzerConfig) -> Result<BenchRow, AnalyzeError> {
    let p = parse(&entry.source).map_err(AnalyzeError::Parse)?;
    let var = entry
        .interest()
        .or_else(|| p.decls.last().map(|d| d.name.as_str()))
        .unwrap_or_default()
        .to_string();
    let run = |kind| -> Result<Interval<f64>, AnalyzeError> {
        let r = analyze(&p, &AnalyzerConfig { kind, ..cfg.clone() }).map_err(AnalyzeError::Analysis)?;
        r.final_range(&var)
            .ok_or_else(|| AnalyzeError::Analysis(crate::error::Error::UnknownVariable(var.clone())))
    };
    Ok(BenchRow {
        name: entry.name.clone(),
        constrained: run(AnalysisKind::Constrained)?,
        baseline: run(AnalysisKind::IntervalBaseline)?,
        sampled: sampled_hull(&p, &var, cfg.samples, cfg.seed),
        var,
    })
}

/// Rows in name order.
pub fn bench(entries: &[CorpusEntry], cfg: &AnalyzerConfig) -> Vec<(String, Result<BenchRow, AnalyzeError>)> {
    let mut sorted: Vec<&CorpusEntry> = entries.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    sorted.into_iter().map(|e| (e.name.clone(), bench_entry(e, cfg))).collect()
}

fn short(i: &Interval<f64>) -> String {
    format!("[{:.4}, {:.4}]", i.lo, i.hi)
}

impl fmt::Display for BenchRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sampled = self.sampled.as_ref().map_or("-".to_string(), short);
        let flag = if self.wider_than_baseline() { "  WIDER" } else { "" };
        write!(
            f,
            "{:<10} {:<4} {:<24} {:<24} {:<24}{flag}",
            self.name,
            self.var,
            short(&self.constrained),
            short(&self.baseline),
            sampled
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interest_marker() {
        let e = CorpusEntry::new("t", "// interest:  zz \nreal zz = [0,1];");
        assert_eq!(e.interest(), Some("zz"));
        assert_eq!(CorpusEntry::new("t", "real a = [0,1];").interest(), None);
    }

    #[test]
    fn running_row() {
        let cfg = AnalyzerConfig { samples: 500, ..AnalyzerConfig::default() };
        let row = bench_entry(&bundled_corpus()[6], &cfg).unwrap();
        assert_eq!(row.name, "running");
        assert!(row.constrained.hi < 9.73 && row.baseline.hi >= 102.0);
        assert!(!row.wider_than_baseline() && row.contains_samples());
    }
}
