//! JSON and text renderings of an analysis.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use czono::analyzer::{AnalysisResult, PointState, SoundnessReport};
use czono::{AffineForm, NoiseBox};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    pub center: f64,
    pub central: BTreeMap<usize, f64>,
    pub perturbation: BTreeMap<usize, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarJson {
    pub lo: f64,
    pub hi: f64,
    pub form: Option<FormJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseJson {
    pub central: Vec<[f64; 2]>,
    pub perturbation: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub id: String,
    pub reachable: bool,
    pub vars: BTreeMap<String, VarJson>,
    pub noise: Option<NoiseJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessJson {
    pub samples: usize,
    pub violations: usize,
    pub points_reached: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub points: Vec<PointJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soundness: Option<SoundnessJson>,
}

fn form_json(f: &AffineForm<f64>) -> FormJson {
    FormJson {
        center: f.center,
        central: f.central().clone(),
        perturbation: f.perturbation().clone(),
    }
}

fn noise_json(n: &NoiseBox<f64>) -> NoiseJson {
    let pairs = |list: &[czono::Interval<f64>]| list.iter().map(|i| [i.lo, i.hi]).collect();
    NoiseJson { central: pairs(n.central()), perturbation: pairs(n.perturbation()) }
}

fn point_json(p: &PointState) -> PointJson {
    PointJson {
        id: p.id.clone(),
        reachable: p.reachable,
        vars: p
            .vars
            .iter()
            .map(|v| (v.name.clone(), VarJson { lo: v.range.lo, hi: v.range.hi, form: v.form.as_ref().map(form_json) }))
            .collect(),
        noise: p.noise.as_ref().map(noise_json),
    }
}

pub fn to_json(r: &AnalysisResult, check: Option<&SoundnessReport>) -> ReportJson {
    ReportJson {
        points: r.points.iter().map(point_json).collect(),
        soundness: check.map(|c| SoundnessJson {
            samples: c.samples,
            violations: c.violations.len(),
            points_reached: c.points_reached,
        }),
    }
}

fn noise_text(out: &mut String, p: &PointState) {
    if let Some(e) = &p.exact {
        for (k, (lo, hi)) in e.central.iter().enumerate() {
            let _ = writeln!(out, "    ε{} in [{lo}, {hi}]", k + 1);
        }
        for (k, (lo, hi)) in e.perturbation.iter().enumerate() {
            let _ = writeln!(out, "    η{} in [{lo}, {hi}]", k + 1);
        }
    } else if let Some(n) = &p.noise {
        for (k, i) in n.central().iter().enumerate() {
            let _ = writeln!(out, "    ε{} in [{}, {}]", k + 1, i.lo, i.hi);
        }
        for (k, i) in n.perturbation().iter().enumerate() {
            let _ = writeln!(out, "    η{} in [{}, {}]", k + 1, i.lo, i.hi);
        }
    }
}

/// One `var in [lo, hi]` line per variable and point; `trace` adds forms
/// and noise boxes.
pub fn to_text(r: &AnalysisResult, trace: bool) -> String {
    let mut out = String::new();
    for p in &r.points {
        let _ = writeln!(out, "{}:", p.id);
        if !p.reachable {
            let _ = writeln!(out, "  unreachable");
            continue;
        }
        for (k, v) in p.vars.iter().enumerate() {
            match p.exact.as_ref().and_then(|e| e.vars.get(k)) {
                Some((_, lo, hi)) => {
                    let _ = writeln!(out, "  {} in [{lo}, {hi}]", v.name);
                }
                None => {
                    let _ = writeln!(out, "  {} in [{}, {}]", v.name, v.range.lo, v.range.hi);
                }
            }
            if trace {
                if let Some(f) = &v.form {
                    let _ = writeln!(out, "    = {f}");
                }
            }
        }
        if trace {
            noise_text(&mut out, p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use czono::analyzer::{analyze_source, AnalyzerConfig};

    const RUNNING: &str = "real x = [0,10];\nreal y = x*x - x;\nif (y >= 0) y = x/10;\nelse y = x*x+2;\n";

    #[test]
    fn json_round_trips() {
        let r = analyze_source(RUNNING, &AnalyzerConfig::default()).unwrap();
        let first = serde_json::to_string(&to_json(&r, None)).unwrap();
        let parsed: ReportJson = serde_json::from_str(&first).unwrap();
        let second = serde_json::to_string(&parsed).unwrap();
        assert_eq!(first, second);
        assert_eq!(parsed, to_json(&r, None));
    }

    #[test]
    fn text_has_one_line_per_variable() {
        let r = analyze_source(RUNNING, &AnalyzerConfig::default()).unwrap();
        let text = to_text(&r, false);
        assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("y in [")).count(), 5);
        assert!(to_text(&r, true).contains("ε1 in [-1, "));
    }
}
