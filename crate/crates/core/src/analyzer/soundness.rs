//! Checks an analysis result against concrete runs.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Cond, DeclInit, Pos, Program, Stmt, StmtKind};
use crate::interval::Interval;

use super::{AnalysisResult, PointState};

/// Loop iterations per run before the run is abandoned.
const MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub sample: usize,
    pub point: String,
    /// `None` when the point is claimed unreachable.
    pub var: Option<String>,
    pub value: f64,
    pub range: Option<Interval<f64>>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.var, &self.range) {
            (Some(v), Some(r)) => write!(f, "sample {} at {}: {v} = {} outside {r}", self.sample, self.point, self.value),
            (Some(v), None) => write!(f, "sample {} at {}: {v} has no range", self.sample, self.point),
            _ => write!(f, "sample {} reached {}, claimed unreachable", self.sample, self.point),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoundnessReport {
    pub samples: usize,
    pub violations: Vec<Violation>,
    /// Distinct points reached by at least one run.
    pub points_reached: usize,
    /// Runs cut short by the iteration cap.
    pub abandoned: usize,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} samples, {} points reached, {} violations",
            self.samples,
            self.points_reached,
            self.violations.len()
        )?;
        for v in self.violations.iter().take(20) {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

struct Abandoned;

struct Run<'a> {
    sample: usize,
    points: &'a HashMap<&'a str, &'a PointState>,
    store: Vec<(String, f64)>,
    reached: &'a mut Vec<bool>,
    order: &'a HashMap<&'a str, usize>,
    violations: &'a mut Vec<Violation>,
    steps: usize,
}

fn tolerance(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

impl Run<'_> {
    fn get(&self, name: &str) -> f64 {
        self.store.iter().find(|(n, _)| n == name).map(|(_, v)| *v).unwrap_or(f64::NAN)
    }

    fn set(&mut self, name: &str, v: f64) {
        match self.store.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = v,
            None => self.store.push((name.to_string(), v)),
        }
    }

    fn check(&mut self, id: &str) {
        if let Some(&k) = self.order.get(id) {
            self.reached[k] = true;
        }
        let Some(point) = self.points.get(id) else { return };
        if !point.reachable {
            self.violations.push(Violation {
                sample: self.sample,
                point: id.to_string(),
                var: None,
                value: f64::NAN,
                range: None,
            });
            return;
        }
        for (name, value) in &self.store {
            let range = point.var(name).map(|v| v.range.clone());
            let ok = range.as_ref().is_some_and(|r| r.contains_with(value, &tolerance(*value)));
            if !ok {
                self.violations.push(Violation {
                    sample: self.sample,
                    point: id.to_string(),
                    var: Some(name.clone()),
                    value: *value,
                    range,
                });
            }
        }
    }

    fn holds(&self, c: &Cond) -> bool {
        let lookup = |n: &str| self.get(n);
        c.op.holds(c.lhs.eval_f64(&lookup), c.rhs.eval_f64(&lookup))
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), Abandoned> {
        for st in stmts {
            match &st.kind {
                StmtKind::Assign(name, e) => {
                    let v = e.eval_f64(&|n: &str| self.get(n));
                    self.set(name, v);
                }
                StmtKind::If(c, then, otherwise) => {
                    if self.holds(c) {
                        self.block(then)?;
                    } else {
                        self.block(otherwise)?;
                    }
                }
                StmtKind::While(c, body) => {
                    let head = format!("{}.head", id(st.pos));
                    loop {
                        self.check(&head);
                        if !self.holds(c) {
                            break;
                        }
                        self.steps += 1;
                        if self.steps > MAX_ITERATIONS {
                            return Err(Abandoned);
                        }
                        self.block(body)?;
                    }
                }
            }
            self.check(&id(st.pos));
        }
        Ok(())
    }
}

fn id(pos: Pos) -> String {
    format!("L{}:{}", pos.line, pos.col)
}

fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Executes one run; `None` when the iteration cap cut it short.
fn execute(p: &Program, rng: &mut ChaCha8Rng, run: &mut Run<'_>) -> Option<()> {
    for d in &p.decls {
        let v = match &d.init {
            DeclInit::Range(lo, hi) => draw(rng, lo.as_f64(), hi.as_f64()),
            DeclInit::Expr(e) => e.eval_f64(&|n: &str| run.get(n)),
        };
        run.set(&d.name, v);
        run.check(&id(d.pos));
    }
    run.block(&p.stmts).ok()?;
    run.check("end");
    Some(())
}

/// Runs `p` on `samples` inputs drawn uniformly from the declared ranges and
/// checks every visited point against `r`.
pub fn check_soundness(p: &Program, r: &AnalysisResult, samples: usize, seed: u64) -> SoundnessReport {
    let points: HashMap<&str, &PointState> = r.points.iter().map(|pt| (pt.id.as_str(), pt)).collect();
    let order: HashMap<&str, usize> = r.points.iter().enumerate().map(|(k, pt)| (pt.id.as_str(), k)).collect();
    let mut reached = vec![false; r.points.len()];
    let mut violations = Vec::new();
    let mut abandoned = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for sample in 0..samples {
        let mut run = Run {
            sample,
            points: &points,
            store: Vec::new(),
            reached: &mut reached,
            order: &order,
            violations: &mut violations,
            steps: 0,
        };
        if execute(p, &mut rng, &mut run).is_none() {
            abandoned += 1;
        }
    }
    SoundnessReport {
        samples,
        violations,
        points_reached: reached.iter().filter(|&&b| b).count(),
        abandoned,
    }
}

/// Hull of the final values of `var` over `samples` concrete runs.
pub fn sampled_hull(p: &Program, var: &str, samples: usize, seed: u64) -> Option<Interval<f64>> {
    let (points, order) = (HashMap::new(), HashMap::new());
    let (mut reached, mut violations) = (Vec::new(), Vec::new());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hull: Option<Interval<f64>> = None;
    for sample in 0..samples {
        let mut run = Run {
            sample,
            points: &points,
            store: Vec::new(),
            reached: &mut reached,
            order: &order,
            violations: &mut violations,
            steps: 0,
        };
        if execute(p, &mut rng, &mut run).is_some() {
            let v = run.get(var);
            if !v.is_nan() {
                let point = Interval::point(v);
                hull = Some(hull.map_or(point.clone(), |h| h.hull(&point)));
            }
        }
    }
    hull
}
