//! Explicit time integration of the semidiscrete system.

use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

use super::{first_non_finite, Field, RunConfig, Semidiscretization};

/// An explicit Runge-Kutta method `(A, b, c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ButcherTableau {
    /// `a` may list full rows or only the strictly lower part of each row.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let s = b.len();
        if s == 0 || a.len() != s || c.len() != s {
            return invalid(format!("tableau sizes disagree: {} rows of A, {} weights, {} nodes", a.len(), s, c.len()));
        }
        let mut lower = Vec::with_capacity(s);
        for (i, row) in a.into_iter().enumerate() {
            if row.len() != i && row.len() != s {
                return invalid(format!("row {} of A has {} entries, expected {i} or {s}", i + 1, row.len()));
            }
            if row[i.min(row.len())..].iter().any(|&v| v != 0.0) {
                return invalid("only explicit tableaux (strictly lower triangular A) are supported");
            }
            lower.push(row[..i].to_vec());
        }
        for (i, row) in lower.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - c[i]).abs() > 1e-12 {
                return invalid(format!("node c[{}] = {} differs from the row sum {sum} of A", i + 1, c[i]));
            }
        }
        if [&b, &c].iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return invalid("tableau entries must be finite");
        }
        Ok(Self { a: lower, b, c })
    }

    /// Three-stage strong-stability-preserving method of order 3.
    pub fn ssprk3() -> Self {
        Self {
            a: vec![vec![], vec![1.0], vec![0.25, 0.25]],
            b: vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            c: vec![0.0, 1.0, 0.5],
        }
    }

    /// The classical four-stage method of order 4.
    pub fn rk4() -> Self {
        Self {
            a: vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
        }
    }

    /// Plain-text format: the stage count `s`, then the `s` rows of `A`,
    /// then `b`, then `c`. Numbers are separated by whitespace or commas;
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nums = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split(|ch: char| ch.is_whitespace() || ch == ','))
            .filter(|t| !t.is_empty());
        let s: usize = nums
            .next()
            .ok_or_else(|| Error::Parse("empty tableau file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("stage count: {e}")))?;
        if s == 0 || s > 64 {
            return Err(Error::Parse(format!("unreasonable stage count {s}")));
        }
        let mut take = |count: usize, what: &str| -> Result<Vec<f64>> {
            (0..count)
                .map(|_| {
                    let tok = nums.next().ok_or_else(|| Error::Parse(format!("tableau ends inside {what}")))?;
                    tok.parse::<f64>().map_err(|e| Error::Parse(format!("{what}: `{tok}`: {e}")))
                })
                .collect()
        };
        let a = (0..s).map(|_| take(s, "A")).collect::<Result<Vec<_>>>()?;
        let b = take(s, "b")?;
        let c = take(s, "c")?;
        if nums.next().is_some() {
            return Err(Error::Parse("trailing numbers after c".into()));
        }
        Self::new(a, b, c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Classical order, checked through order 4 (higher orders report 4).
    pub fn order(&self) -> usize {
        let s = self.stages();
        let (a, b, c) = (&self.a, &self.b, &self.c);
        let ac: Vec<f64> = (0..s).map(|i| (0..i).map(|j| a[i][j] * c[j]).sum()).collect();
        let ac2: Vec<f64> = (0..s).map(|i| (0..i).map(|j| a[i][j] * c[j] * c[j]).sum()).collect();
        let aac: Vec<f64> = (0..s).map(|i| (0..i).map(|j| a[i][j] * ac[j]).sum()).collect();
        let dot = |v: &dyn Fn(usize) -> f64| (0..s).map(|i| b[i] * v(i)).sum::<f64>();
        let close = |x: f64, y: f64| (x - y).abs() < 1e-12;
        let conditions: [&[(f64, f64)]; 4] = [
            &[(dot(&|_| 1.0), 1.0)],
            &[(dot(&|i| c[i]), 0.5)],
            &[(dot(&|i| c[i] * c[i]), 1.0 / 3.0), (dot(&|i| ac[i]), 1.0 / 6.0)],
            &[
                (dot(&|i| c[i].powi(3)), 0.25),
                (dot(&|i| c[i] * ac[i]), 0.125),
                (dot(&|i| ac2[i]), 1.0 / 12.0),
                (dot(&|i| aac[i]), 1.0 / 24.0),
            ],
        ];
        conditions.iter().take_while(|conds| conds.iter().all(|&(x, y)| close(x, y))).count()
    }
}

/// Time integrator.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Integrator {
    #[default]
    Ssprk3,
    Rk4,
    /// Polynomial extrapolation of the explicit midpoint rule with step
    /// sequence 2, 4, 6, 8 (17 right-hand side evaluations, order 8).
    Extrapolated8,
    Tableau(ButcherTableau),
}

/// Step counts of the extrapolated midpoint rule.
const MIDPOINT_STEPS: [usize; 4] = [2, 4, 6, 8];

impl Integrator {
    pub fn order(&self) -> usize {
        match self {
            Integrator::Ssprk3 => 3,
            Integrator::Rk4 => 4,
            Integrator::Extrapolated8 => 8,
            Integrator::Tableau(t) => t.order(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Integrator::Ssprk3 => "ssprk3",
            Integrator::Rk4 => "rk4",
            Integrator::Extrapolated8 => "extrap8",
            Integrator::Tableau(_) => "tableau",
        }
    }
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ssprk3" => Ok(Integrator::Ssprk3),
            "rk4" => Ok(Integrator::Rk4),
            "extrap8" => Ok(Integrator::Extrapolated8),
            other => Err(Error::Parse(format!("unknown integrator `{other}` (ssprk3, rk4, extrap8)"))),
        }
    }
}

/// Time-step law.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum DtLaw {
    /// `dt = cfl * min h / max speed`.
    #[default]
    Cfl,
    /// The CFL step, further capped by `c * h^(s/p)` when the spatial order
    /// `s` exceeds the integrator order `p`, so that the temporal error
    /// decays at the spatial rate under refinement.
    OrderMatched { c: f64 },
}

/// Counters of a completed integration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub steps: usize,
    pub rhs_evaluations: usize,
}

/// Time step allowed by `cfg` for the state `u`.
pub fn stable_dt<const M: usize>(scheme: &impl Semidiscretization<M>, u: &[[f64; M]], cfg: &RunConfig) -> f64 {
    let h = scheme.grid().min_size();
    let speed = scheme.max_wave_speed(u);
    let mut dt = if speed > 0.0 { cfg.cfl * h / speed } else { f64::INFINITY };
    if let DtLaw::OrderMatched { c } = cfg.dt_law {
        let (s, p) = (scheme.order(), cfg.integrator.order());
        if s > p {
            dt = dt.min(c * h.powf(s as f64 / p as f64));
        }
    }
    dt
}

/// Stage buffers reused across steps.
#[derive(Clone, Debug, Default)]
pub struct Stepper<const M: usize> {
    k: Vec<Vec<[f64; M]>>,
    y: Vec<[f64; M]>,
    acc: Vec<[f64; M]>,
    prev: Vec<[f64; M]>,
    evaluations: usize,
}

impl<const M: usize> Stepper<M> {
    pub fn new() -> Self {
        Self { k: Vec::new(), y: Vec::new(), acc: Vec::new(), prev: Vec::new(), evaluations: 0 }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Advances `u` from `t` to `t + dt`.
    pub fn step(
        &mut self,
        scheme: &impl Semidiscretization<M>,
        integrator: &Integrator,
        u: &mut [[f64; M]],
        t: f64,
        dt: f64,
    ) -> Result<()> {
        match integrator {
            Integrator::Ssprk3 => self.step_tableau(scheme, &ButcherTableau::ssprk3(), u, t, dt),
            Integrator::Rk4 => self.step_tableau(scheme, &ButcherTableau::rk4(), u, t, dt),
            Integrator::Tableau(tab) => self.step_tableau(scheme, tab, u, t, dt),
            Integrator::Extrapolated8 => self.step_extrapolated(scheme, u, t, dt),
        }
    }

    fn eval(
        &mut self,
        scheme: &impl Semidiscretization<M>,
        input: &[[f64; M]],
        t: f64,
        slot: usize,
        stage: usize,
        t0: f64,
    ) -> Result<()> {
        self.evaluations += 1;
        scheme.rhs(input, t, &mut self.k[slot])?;
        if let Some(cell) = first_non_finite(&self.k[slot]) {
            return Err(Error::NonFinite { cell, stage, time: t0 });
        }
        Ok(())
    }

    fn ensure(&mut self, n: usize, slots: usize) {
        if self.k.len() < slots {
            self.k.resize(slots, Vec::new());
        }
        for v in self.k.iter_mut().chain([&mut self.y, &mut self.acc, &mut self.prev]) {
            v.resize(n, [0.0; M]);
        }
    }

    fn step_tableau(
        &mut self,
        scheme: &impl Semidiscretization<M>,
        tab: &ButcherTableau,
        u: &mut [[f64; M]],
        t: f64,
        dt: f64,
    ) -> Result<()> {
        let s = tab.stages();
        self.ensure(u.len(), s);
        for i in 0..s {
            let mut y = std::mem::take(&mut self.y);
            y.copy_from_slice(u);
            for (j, &aij) in tab.a[i].iter().enumerate() {
                if aij != 0.0 {
                    axpy(&mut y, dt * aij, &self.k[j]);
                }
            }
            let r = self.eval(scheme, &y, t + tab.c[i] * dt, i, i + 1, t);
            self.y = y;
            r?;
        }
        for (i, &bi) in tab.b.iter().enumerate() {
            if bi != 0.0 {
                axpy(u, dt * bi, &self.k[i]);
            }
        }
        if let Some(cell) = first_non_finite(u) {
            return Err(Error::NonFinite { cell, stage: s, time: t });
        }
        Ok(())
    }

    fn step_extrapolated(
        &mut self,
        scheme: &impl Semidiscretization<M>,
        u: &mut [[f64; M]],
        t: f64,
        dt: f64,
    ) -> Result<()> {
        // slot 0 keeps f(u), slot 1 is the working derivative
        self.ensure(u.len(), 2);
        let mut stage = 1;
        self.eval(scheme, u, t, 0, stage, t)?;
        for a in self.acc.iter_mut() {
            *a = [0.0; M];
        }
        for (jn, &n) in MIDPOINT_STEPS.iter().enumerate() {
            let weight = extrapolation_weight(jn);
            let hh = dt / n as f64;
            // z_0 = u, z_1 = u + hh f(u), z_{m+1} = z_{m-1} + 2 hh f(z_m)
            let (mut prev, mut cur) = (std::mem::take(&mut self.prev), std::mem::take(&mut self.y));
            prev.copy_from_slice(u);
            cur.copy_from_slice(u);
            axpy(&mut cur, hh, &self.k[0]);
            for m in 1..n {
                stage += 1;
                if let Err(e) = self.eval(scheme, &cur, t + m as f64 * hh, 1, stage, t) {
                    self.prev = prev;
                    self.y = cur;
                    return Err(e);
                }
                axpy(&mut prev, 2.0 * hh, &self.k[1]);
                std::mem::swap(&mut prev, &mut cur);
            }
            axpy(&mut self.acc, weight, &cur);
            self.prev = prev;
            self.y = cur;
        }
        u.copy_from_slice(&self.acc);
        if let Some(cell) = first_non_finite(u) {
            return Err(Error::NonFinite { cell, stage, time: t });
        }
        Ok(())
    }
}

/// Weight of the `j`-th midpoint result in the extrapolation to step 0 of
/// an expansion in even powers of the substep.
fn extrapolation_weight(j: usize) -> f64 {
    let nj = (MIDPOINT_STEPS[j] * MIDPOINT_STEPS[j]) as f64;
    MIDPOINT_STEPS
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, &ni)| nj / (nj - (ni * ni) as f64))
        .product()
}

fn axpy<const M: usize>(y: &mut [[f64; M]], a: f64, x: &[[f64; M]]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        for m in 0..M {
            yi[m] += a * xi[m];
        }
    }
}

/// Integrates `field` up to `t_end` (no-op if already there).
pub fn advance_to<const M: usize>(
    scheme: &impl Semidiscretization<M>,
    field: &mut Field<M>,
    t_end: f64,
    cfg: &RunConfig,
) -> Result<StepStats> {
    if field.grid.len() != scheme.grid().len() {
        return invalid("field and scheme live on different grids");
    }
    let mut stepper = Stepper::new();
    let mut steps = 0;
    while field.time < t_end {
        let remaining = t_end - field.time;
        let mut dt = stable_dt(scheme, &field.values, cfg);
        if !(dt > 0.0) {
            return Err(Error::NonFinite { cell: first_non_finite(&field.values).unwrap_or(0), stage: 0, time: field.time });
        }
        // avoid a sliver step at the end
        if dt >= remaining || remaining - dt < 1e-9 * dt {
            dt = remaining;
        }
        stepper.step(scheme, &cfg.integrator, &mut field.values, field.time, dt)?;
        steps += 1;
        field.time = if dt == remaining { t_end } else { field.time + dt };
    }
    Ok(StepStats { steps, rhs_evaluations: stepper.evaluations() })
}

/// Integrates a copy of `field` up to `cfg.t_end`.
pub fn run_to_time<const M: usize>(
    scheme: &impl Semidiscretization<M>,
    field: &Field<M>,
    cfg: &RunConfig,
) -> Result<Field<M>> {
    let mut out = field.clone();
    advance_to(scheme, &mut out, cfg.t_end, cfg)?;
    Ok(out)
}
