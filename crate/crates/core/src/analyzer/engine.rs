use crate::ast::{Cond, DeclInit, Pos, Program, Stmt, StmtKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num::Zero;

use super::domain::Domain;
use super::{AnalysisResult, AnalyzerConfig, LoopStats, PointState};

fn point_id(pos: Pos) -> String {
    format!("L{}:{}", pos.line, pos.col)
}

struct Engine<'a, D: Domain> {
    cfg: &'a AnalyzerConfig,
    thresholds: Vec<D::Scalar>,
    points: Vec<PointState>,
    loops: Vec<LoopStats>,
    recording: bool,
}

impl<D: Domain> Engine<'_, D> {
    fn record(&mut self, id: String, s: Option<&D>) -> Result<()> {
        if !self.recording {
            return Ok(());
        }
        let point = match s {
            None => PointState::unreachable(id),
            Some(d) => PointState { id, reachable: true, vars: d.snapshot()?, noise: d.noise(), exact: d.exact()? },
        };
        self.points.push(point);
        Ok(())
    }

    fn record_unreachable(&mut self, stmts: &[Stmt]) {
        if !self.recording {
            return;
        }
        for st in stmts {
            match &st.kind {
                StmtKind::Assign(..) => {}
                StmtKind::If(_, then, otherwise) => {
                    self.record_unreachable(then);
                    self.record_unreachable(otherwise);
                }
                StmtKind::While(_, body) => {
                    self.points.push(PointState::unreachable(format!("{}.head", point_id(st.pos))));
                    self.record_unreachable(body);
                }
            }
            self.points.push(PointState::unreachable(point_id(st.pos)));
        }
    }

    fn check_cap(&self, s: &D) -> Result<()> {
        let count = s.symbol_count();
        if count > self.cfg.max_symbols {
            return Err(Error::CapExceeded { count, cap: self.cfg.max_symbols });
        }
        Ok(())
    }

    /// Runs `stmts`; `top` marks statements outside any branch or loop,
    /// where renumbering symbols is safe.
    fn block(&mut self, stmts: &[Stmt], mut s: Option<D>, top: bool) -> Result<Option<D>> {
        for (k, st) in stmts.iter().enumerate() {
            let Some(cur) = s else {
                self.record_unreachable(&stmts[k..]);
                return Ok(None);
            };
            s = self.stmt(st, cur, top)?;
            if top {
                s = s.map(|d| d.compact());
            }
            self.record(point_id(st.pos), s.as_ref())?;
        }
        Ok(s)
    }

    fn stmt(&mut self, st: &Stmt, mut s: D, top: bool) -> Result<Option<D>> {
        match &st.kind {
            StmtKind::Assign(name, e) => {
                s.assign(name, e)?;
                self.check_cap(&s)?;
                Ok(Some(s))
            }
            StmtKind::If(cond, then, otherwise) => {
                let then_in = s.guard(cond)?;
                let then_out = self.block(then, then_in, false)?;
                let else_base = match &then_out {
                    Some(t) => s.align(t),
                    None => s,
                };
                let else_in = else_base.guard(&cond.negate())?;
                let else_out = self.block(otherwise, else_in, false)?;
                let out = match (then_out, else_out) {
                    (Some(a), Some(b)) => Some(a.join(&b)?),
                    (a, b) => a.or(b),
                };
                if let Some(d) = &out {
                    self.check_cap(d)?;
                }
                Ok(out)
            }
            StmtKind::While(cond, body) => self.while_loop(st.pos, cond, body, s, top),
        }
    }

    fn while_loop(&mut self, pos: Pos, cond: &Cond, body: &[Stmt], entry: D, top: bool) -> Result<Option<D>> {
        let recording = self.recording;
        self.recording = false;
        let mut head = entry;
        let (mut joins, mut widenings) = (0, 0);
        loop {
            let post = match head.guard(cond)? {
                Some(g) => self.block(body, Some(g), false)?,
                None => None,
            };
            let Some(post) = post else { break };
            if head.includes(&post) {
                break;
            }
            let joined = head.join(&post)?;
            joins += 1;
            head = if joins > self.cfg.unroll {
                widenings += 1;
                if widenings > self.cfg.max_widenings {
                    self.recording = recording;
                    return Err(Error::Diverged { at: point_id(pos), iterations: joins });
                }
                head.widen(&joined, &self.thresholds)?
            } else {
                joined
            };
            if top {
                head = head.compact();
            }
            self.check_cap(&head)?;
        }
        self.recording = recording;
        if self.recording {
            self.loops.push(LoopStats { id: format!("{}.head", point_id(pos)), joins, widenings });
        }
        self.record(format!("{}.head", point_id(pos)), Some(&head))?;
        if self.recording {
            let inside = head.guard(cond)?;
            self.block(body, inside, false)?;
        }
        head.guard(&cond.negate())
    }
}

/// Forward analysis of `p` starting from `init`.
pub fn analyze_with<D: Domain>(p: &Program, cfg: &AnalyzerConfig, init: D) -> Result<AnalysisResult> {
    let mut thresholds: Vec<D::Scalar> = vec![D::Scalar::zero(), D::Scalar::of_f64(1e38), D::Scalar::of_f64(-1e38)];
    for &t in &cfg.thresholds {
        thresholds.push(D::Scalar::of_f64(t));
        thresholds.push(D::Scalar::of_f64(-t));
    }
    let mut eng = Engine { cfg, thresholds, points: Vec::new(), loops: Vec::new(), recording: true };
    let mut s = init;
    for d in &p.decls {
        match &d.init {
            DeclInit::Range(lo, hi) => s.declare_range(&d.name, lo, hi)?,
            DeclInit::Expr(e) => s.assign(&d.name, e)?,
        }
        eng.check_cap(&s)?;
        s = s.compact();
        eng.record(point_id(d.pos), Some(&s))?;
    }
    let out = eng.block(&p.stmts, Some(s), true)?;
    eng.record("end".to_string(), out.as_ref())?;
    Ok(AnalysisResult { points: eng.points, loops: eng.loops })
}

#[cfg(test)]
mod tests {
    use crate::analyzer::{analyze_source, AnalysisKind, AnalyzerConfig};

    const RUNNING: &str = "real x = [0,10];
real y = x*x - x;
if (y >= 0) y = x/10;
else y = x*x+2;
";

    fn baseline() -> AnalyzerConfig {
        AnalyzerConfig { kind: AnalysisKind::IntervalBaseline, ..AnalyzerConfig::default() }
    }

    fn close(i: &crate::interval::Interval<f64>, lo: f64, hi: f64) -> bool {
        i.lo <= lo && i.hi >= hi && hi - i.hi > -1e-12 && i.lo - lo > -1e-12
    }

    #[test]
    fn running_example() {
        let r = analyze_source(RUNNING, &AnalyzerConfig::default()).unwrap();
        let y = r.final_range("y").unwrap();
        assert!(y.lo.abs() < 1e-9, "{y:?}");
        assert!((y.hi - 9.7161).abs() < 1e-3, "{y:?}");
        let ids: Vec<&str> = r.points.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["L1:1", "L2:1", "L3:13", "L4:6", "L3:1", "end"]);
    }

    #[test]
    fn running_example_baseline() {
        let r = analyze_source(RUNNING, &baseline()).unwrap();
        let y = r.final_range("y").unwrap();
        assert!(y.lo.abs() < 1e-9 && (y.hi - 102.0).abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn copy_shares_symbol() {
        let r = analyze_source("real x = [0,1]; real y = [5,6]; y = x;", &AnalyzerConfig::default()).unwrap();
        let end = r.final_state();
        let (x, y) = (end.var("x").unwrap(), end.var("y").unwrap());
        assert!(close(&y.range, 0.0, 1.0), "{:?}", y.range);
        assert_eq!(x.form, y.form);
    }

    #[test]
    fn disequality_constrains_nothing() {
        let src = "real x = [0,3]; real y = [0,0]; if (x != x) { y = 1; } else { y = 2; }";
        let r = analyze_source(src, &AnalyzerConfig::default()).unwrap();
        let y = r.final_range("y").unwrap();
        assert!(close(&y, 1.0, 2.0), "{y:?}");
    }

    #[test]
    fn dead_branch_is_unreachable() {
        let src = "real x = [0,1]; real y = [0,0]; if (x > 2) { y = 1; } else { y = 2; }";
        let r = analyze_source(src, &AnalyzerConfig::default()).unwrap();
        assert!(!r.point("L1:46").unwrap().reachable);
        assert!(r.point("L1:62").unwrap().reachable);
        assert!(close(&r.final_range("y").unwrap(), 2.0, 2.0));
    }

    #[test]
    fn counting_loop_terminates_soundly() {
        let src = "real i = [0,0]; real s = [0,1];\nwhile (i < 100) { i = i + 1; s = s + 0.5; }";
        for cfg in [AnalyzerConfig::default(), baseline()] {
            let r = analyze_source(src, &cfg).unwrap();
            let i = r.final_range("i").unwrap();
            assert!(i.lo <= 100.0 && i.hi >= 101.0 - 1e-9, "{i:?}");
            let head = r.point("L2:1.head").unwrap();
            assert!(head.var("i").unwrap().range.lo <= 0.0);
            // s grows without bound, so every threshold is visited
            assert!(r.loops[0].widenings <= cfg.thresholds.len() + 2, "{:?}", r.loops);
            let s = r.final_range("s").unwrap();
            assert!(s.lo <= 0.0 && s.hi >= 51.0, "{s:?}");
        }
    }

    #[test]
    fn rational_running_example_is_exact() {
        let cfg = AnalyzerConfig { precision: crate::analyzer::Precision::Rational, ..AnalyzerConfig::default() };
        let r = analyze_source(RUNNING, &cfg).unwrap();
        let guard = r.point("L4:6").unwrap().exact.clone().unwrap();
        assert_eq!(guard.central[0], ("-1".to_string(), "-4/9".to_string()));
        let x = guard.vars.iter().find(|v| v.0 == "x").unwrap();
        assert_eq!((x.1.as_str(), x.2.as_str()), ("0", "25/9"));
    }

    #[test]
    fn symbol_cap() {
        let cfg = AnalyzerConfig { max_symbols: 3, ..AnalyzerConfig::default() };
        let err = analyze_source("real x = [0,1]; real y = [0,1]; y = x*x; y = y*y;", &cfg).unwrap_err();
        assert!(err.to_string().contains("exceed"), "{err}");
    }
}
