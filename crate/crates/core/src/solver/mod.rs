//! Method-of-lines finite-volume semidiscretization with the Local
//! Lax-Friedrichs flux, optional characteristic projection, source
//! quadratures, a well-balanced shallow water variant and explicit
//! Runge-Kutta time stepping.

mod balanced;
mod time;

pub use balanced::{desingularized_velocity, WellBalancedSwe};
pub use time::{advance_to, run_to_time, stable_dt, ButcherTableau, DtLaw, Integrator, StepStats, Stepper};

use crate::error::{invalid, Error, Result};
use crate::grid::{GhostPad, Grid1D};
use crate::models::{Eigen, Model};
use crate::par::{try_fill, Parallelism};
use crate::poly::{Poly, MAX_STENCIL};
use crate::quadrature::{gauss_on, richardson_combine, richardson_finest};
use crate::reconstruction::{reconstruct_cell, CellStencil, CellTables, CwenoConfig, CwenoResult, Scratch};

/// Cell averages of an `M`-component system on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<const M: usize> {
    pub grid: Grid1D,
    pub values: Vec<[f64; M]>,
    pub time: f64,
}

impl<const M: usize> Field<M> {
    pub fn new(grid: Grid1D, values: Vec<[f64; M]>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!("{} values for {} cells", values.len(), grid.len()));
        }
        Ok(Self { grid, values, time: 0.0 })
    }

    /// Cell averages of `f` by a 10-point Gauss rule per cell.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> [f64; M]) -> Self {
        let values = (0..grid.len())
            .map(|j| cell_average_of(&f, grid.cell(j)))
            .collect();
        Self { grid, values, time: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn component(&self, m: usize) -> Vec<f64> {
        self.values.iter().map(|u| u[m]).collect()
    }

    /// `sum_j h_j u_j` per component.
    pub fn total(&self) -> [f64; M] {
        let mut tot = [0.0; M];
        for (u, h) in self.values.iter().zip(self.grid.sizes()) {
            for m in 0..M {
                tot[m] += h * u[m];
            }
        }
        tot
    }
}

pub(crate) fn cell_average_of<const M: usize>(f: &impl Fn(f64) -> [f64; M], (lo, hi): (f64, f64)) -> [f64; M] {
    let mut avg = [0.0; M];
    for (x, w) in gauss_on(lo, hi, 10) {
        let v = f(x);
        for m in 0..M {
            avg[m] += w * v[m];
        }
    }
    avg
}

/// First cell holding a non-finite value.
pub(crate) fn first_non_finite<const M: usize>(u: &[[f64; M]]) -> Option<usize> {
    u.iter().position(|v| v.iter().any(|x| !x.is_finite()))
}

/// Quadrature used for the cell average of the source term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SourceQuadrature {
    /// Gauss with `(order + 1) / 2` nodes on the generic path, Richardson of
    /// order `order + 1` on the well-balanced path.
    #[default]
    Matched,
    Gauss(usize),
    Richardson(usize),
}

impl std::str::FromStr for SourceQuadrature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_n = |v: &str| v.parse::<usize>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
        match s.split_once(':') {
            None if s == "matched" => Ok(SourceQuadrature::Matched),
            Some(("gauss", n)) => Ok(SourceQuadrature::Gauss(parse_n(n)?)),
            Some(("richardson", q)) => Ok(SourceQuadrature::Richardson(parse_n(q)?)),
            _ => Err(Error::Parse(format!("unknown quadrature `{s}` (expected gauss:<n> or richardson:<q>)"))),
        }
    }
}

/// Everything that controls a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub cweno: CwenoConfig,
    pub cfl: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub dt_law: DtLaw,
    /// Reconstruct characteristic variables (frozen at the central cell state).
    pub char_proj: bool,
    pub quadrature: SourceQuadrature,
    pub well_balanced: bool,
    /// Desingularization threshold for `q / h`; `None` uses the cell size.
    pub desing_eps: Option<f64>,
    pub parallelism: Parallelism,
}

impl RunConfig {
    /// Defaults: CFL 0.45, SSP-RK3, plain CFL time step, no projection.
    pub fn new(cweno: CwenoConfig, t_end: f64) -> Self {
        Self {
            cweno,
            cfl: 0.45,
            t_end,
            integrator: Integrator::Ssprk3,
            dt_law: DtLaw::Cfl,
            char_proj: false,
            quadrature: SourceQuadrature::Matched,
            well_balanced: false,
            desing_eps: None,
            parallelism: Parallelism::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cweno.validate()?;
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return invalid(format!("cfl must lie in (0, 1), got {}", self.cfl));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return invalid(format!("final time must be finite and non-negative, got {}", self.t_end));
        }
        if let Some(e) = self.desing_eps {
            if !(e > 0.0) {
                return invalid("desingularization threshold must be positive");
            }
        }
        if let DtLaw::OrderMatched { c } = self.dt_law {
            if !(c > 0.0) {
                return invalid("order-matching constant must be positive");
            }
        }
        Ok(())
    }
}

/// A spatial discretization `du/dt = L(u)` of cell averages.
pub trait Semidiscretization<const M: usize>: Sync {
    fn grid(&self) -> &Grid1D;

    /// Spatial order of accuracy.
    fn order(&self) -> usize;

    fn rhs(&self, u: &[[f64; M]], t: f64, out: &mut [[f64; M]]) -> Result<()>;

    /// Largest wave speed over the cell averages, for the time-step law.
    fn max_wave_speed(&self, u: &[[f64; M]]) -> f64;
}

/// Ghost padding and coefficient tables for cell-by-cell CWENO
/// reconstruction on a fixed grid.
///
/// Reconstructions are computed on the `N + 2` "traced" cells `-1..=N`
/// (traced index `c` is grid cell `c - 1`). Polynomials are centred at 0
/// in local coordinates.
#[derive(Clone, Debug)]
pub struct Reconstructor {
    cfg: CwenoConfig,
    pad: GhostPad,
    sizes: Vec<f64>,
    tables: Tables,
    n: usize,
    uniform_h: Option<f64>,
}

#[derive(Clone, Debug)]
enum Tables {
    Uniform(CellTables),
    PerCell(Vec<CellTables>),
}

impl Reconstructor {
    pub fn new(grid: &Grid1D, cfg: &CwenoConfig) -> Result<Self> {
        cfg.validate()?;
        let g = cfg.g;
        let n = grid.len();
        if n < 2 * g + 1 {
            return invalid(format!("order {} needs at least {} cells, got {n}", cfg.order(), 2 * g + 1));
        }
        let pad = GhostPad::new(g + 1, grid.bc());
        let sizes = pad.pad_sizes(grid);
        let tables = match grid.uniform_size() {
            Some(h) => Tables::Uniform(CellTables::uniform(g, h)?),
            None => Tables::PerCell(
                (0..n + 2)
                    .map(|c| CellTables::nonuniform(g, &sizes[c..=c + 2 * g]))
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(Self { cfg: cfg.clone(), pad, sizes, tables, n, uniform_h: grid.uniform_size() })
    }

    pub fn config(&self) -> &CwenoConfig {
        &self.cfg
    }

    pub fn traced_cells(&self) -> usize {
        self.n + 2
    }

    /// Size of traced cell `c`.
    pub fn cell_size(&self, c: usize) -> f64 {
        self.uniform_h.unwrap_or(self.sizes[c + self.cfg.g])
    }

    /// Pads cell data with `g + 1` ghosts per side.
    pub fn pad<T: Copy>(&self, data: &[T], mirror: impl Fn(T) -> T) -> Vec<T> {
        self.pad.pad(data, mirror)
    }

    /// Reconstruction on traced cell `c` from the `2g + 1` stencil values.
    pub fn reconstruct(&self, c: usize, stencil: &[f64], scratch: &mut Scratch) -> Result<CwenoResult> {
        let g = self.cfg.g;
        let h = self.cell_size(c);
        let (tables, scaled) = match &self.tables {
            Tables::Uniform(t) => (t, true),
            Tables::PerCell(v) => (&v[c], false),
        };
        let st = CellStencil { averages: stencil, sizes: &self.sizes[c..=c + 2 * g], center: 0.0, h, scaled };
        reconstruct_cell(&st, tables, &self.cfg, scratch)
    }

    /// Scalar reconstruction on traced cell `c` of padded data.
    pub fn reconstruct_scalar(&self, padded: &[f64], c: usize, scratch: &mut Scratch) -> Result<CwenoResult> {
        let width = 2 * self.cfg.g + 1;
        self.reconstruct(c, &padded[c..c + width], scratch)
    }

    /// Componentwise or characteristic reconstruction of padded states.
    pub fn reconstruct_state<const M: usize>(
        &self,
        model: &impl Model<M>,
        padded: &[[f64; M]],
        c: usize,
        char_proj: bool,
        scratch: &mut Scratch,
    ) -> Result<[CwenoResult; M]> {
        let eig = if char_proj && M > 1 { Some(model.eigen(&padded[c + self.cfg.g])?) } else { None };
        self.reconstruct_projected(eig.as_ref(), padded, c, scratch)
    }

    /// Reconstruction of padded states along the characteristic fields of
    /// `eig`, or componentwise when `eig` is `None`.
    pub fn reconstruct_projected<const M: usize>(
        &self,
        eig: Option<&Eigen<M>>,
        padded: &[[f64; M]],
        c: usize,
        scratch: &mut Scratch,
    ) -> Result<[CwenoResult; M]> {
        let g = self.cfg.g;
        let width = 2 * g + 1;
        let window = &padded[c..c + width];
        let mut buf = [0.0; MAX_STENCIL];
        let Some(eig) = eig else {
            let mut gather = |m: usize, scratch: &mut Scratch| {
                for (b, u) in buf.iter_mut().zip(window) {
                    *b = u[m];
                }
                self.reconstruct(c, &buf[..width], scratch)
            };
            let first = gather(0, scratch)?;
            let mut out = [first; M];
            for (m, slot) in out.iter_mut().enumerate().skip(1) {
                *slot = gather(m, scratch)?;
            }
            return Ok(out);
        };
        let mut chars = [[0.0; M]; MAX_STENCIL];
        for (w, u) in chars.iter_mut().zip(window) {
            *w = eig.to_characteristic(u);
        }
        let mut gather = |k: usize, scratch: &mut Scratch| {
            for (b, w) in buf.iter_mut().zip(&chars[..width]) {
                *b = w[k];
            }
            self.reconstruct(c, &buf[..width], scratch)
        };
        let first = gather(0, scratch)?;
        let mut out = [first; M];
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            *slot = gather(k, scratch)?;
        }
        let scale = out[0].prec.scale();
        let mut cons = [Poly::zero(0.0, scale, 2 * g); M];
        for (m, p) in cons.iter_mut().enumerate() {
            for (k, r) in out.iter().enumerate() {
                p.add_scaled(eig.right[m][k], &r.prec);
            }
        }
        for (r, p) in out.iter_mut().zip(cons) {
            r.prec = p;
        }
        Ok(out)
    }
}

/// CWENO reconstruction of every interior cell of `field`, per component.
///
/// Polynomials are centred at 0 in the cell's local coordinate. With
/// `cfg.char_proj` the returned polynomials are the conserved-variable
/// back-projections, while weights and indicators refer to the
/// characteristic fields.
pub fn reconstruct_field<const M: usize>(
    model: &impl Model<M>,
    field: &Field<M>,
    cfg: &RunConfig,
) -> Result<Vec<[CwenoResult; M]>> {
    let recon = Reconstructor::new(&field.grid, &cfg.cweno)?;
    let padded = recon.pad(&field.values, |u| model.mirror(u));
    let mut out: Vec<Option<[CwenoResult; M]>> = vec![None; field.len()];
    try_fill(&mut out, cfg.parallelism, Scratch::default, |scratch, j, slot| {
        *slot = Some(recon.reconstruct_state(model, &padded, j + 1, cfg.char_proj, scratch)?);
        Ok(())
    })?;
    Ok(out.into_iter().map(|r| r.expect("filled")).collect())
}

/// Local Lax-Friedrichs (Rusanov) flux.
pub fn llf_flux<const M: usize>(model: &impl Model<M>, ul: &[f64; M], ur: &[f64; M]) -> [f64; M] {
    let a = model.max_wave_speed(ul).max(model.max_wave_speed(ur));
    let (fl, fr) = (model.flux(ul), model.flux(ur));
    let mut f = [0.0; M];
    for m in 0..M {
        f[m] = 0.5 * (fl[m] + fr[m]) - 0.5 * a * (ur[m] - ul[m]);
    }
    f
}

/// Cell average of the source by an `n`-point Gauss rule on `[lo, hi]`,
/// evaluating the per-component polynomials at physical nodes.
pub fn source_quadrature_gauss<const M: usize>(
    polys: &[Poly; M],
    (lo, hi): (f64, f64),
    model: &impl Model<M>,
    n: usize,
) -> Result<[f64; M]> {
    let mut avg = [0.0; M];
    for (x, w) in gauss_on(lo, hi, n) {
        let u: [f64; M] = std::array::from_fn(|m| polys[m].eval(x));
        let s = model.source(&u, x)?;
        for m in 0..M {
            avg[m] += w * s[m];
        }
    }
    Ok(avg)
}

/// Cell average of `-g h z_x` over `[lo, hi]` by the order-`q` Richardson
/// combination of the well-balanced trapezoid sums
/// `S_n = sum_k -g/2 (h_k + h_{k+1}) (z_{k+1} - z_k)`, with `h = eta - z`.
pub fn source_quadrature_richardson(
    eta: impl Fn(f64) -> f64,
    z: impl Fn(f64) -> f64,
    (lo, hi): (f64, f64),
    q: usize,
    gravity: f64,
) -> Result<f64> {
    let finest = richardson_finest(q)?;
    let x = |k: usize| lo + (hi - lo) * k as f64 / finest as f64;
    let zs: Vec<f64> = (0..=finest).map(|k| z(x(k))).collect();
    let hs: Vec<f64> = (0..=finest).map(|k| eta(x(k)) - zs[k]).collect();
    Ok(wb_trapezoid(q, &hs, &zs, gravity)? / (hi - lo))
}

/// Richardson-combined well-balanced trapezoid integral from node values.
pub(crate) fn wb_trapezoid(q: usize, h: &[f64], z: &[f64], gravity: f64) -> Result<f64> {
    richardson_combine(q, |a, b| -0.5 * gravity * (h[a] + h[b]) * (z[b] - z[a]))
}

/// [`wb_trapezoid`] minus its exact lake-at-rest part `g/2 (h_n^2 - h_0^2)`,
/// written with `eta = h + z` so that only differences of `eta` remain.
pub(crate) fn wb_trapezoid_remainder(q: usize, h: &[f64], eta: &[f64], gravity: f64) -> Result<f64> {
    richardson_combine(q, |a, b| -0.5 * gravity * (h[a] + h[b]) * (eta[b] - eta[a]))
}

/// Boundary values and source average of one traced cell.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Trace<const M: usize> {
    pub left: [f64; M],
    pub right: [f64; M],
    pub source: [f64; M],
}

impl<const M: usize> Trace<M> {
    pub(crate) fn zero() -> Self {
        Self { left: [0.0; M], right: [0.0; M], source: [0.0; M] }
    }
}

#[derive(Clone, Debug)]
enum SourceRule {
    None,
    /// Nodes as fractions of the cell size around the centre, weights summing to 1.
    Gauss(Vec<(f64, f64)>),
    Richardson(usize),
}

/// The generic finite-volume scheme for any [`Model`].
#[derive(Clone, Debug)]
pub struct FvScheme<const M: usize, Mo> {
    model: Mo,
    grid: Grid1D,
    recon: Reconstructor,
    char_proj: bool,
    source: SourceRule,
    parallelism: Parallelism,
}

impl<const M: usize, Mo: Model<M>> FvScheme<M, Mo> {
    pub fn new(model: Mo, grid: Grid1D, cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.well_balanced {
            return invalid("the generic scheme is not well-balanced; use WellBalancedSwe");
        }
        let recon = Reconstructor::new(&grid, &cfg.cweno)?;
        let order = cfg.cweno.order();
        let source = if !model.has_source() {
            SourceRule::None
        } else {
            match cfg.quadrature {
                SourceQuadrature::Matched => SourceRule::Gauss(gauss_on(-0.5, 0.5, order.div_ceil(2))),
                SourceQuadrature::Gauss(n) if n >= 1 => SourceRule::Gauss(gauss_on(-0.5, 0.5, n)),
                SourceQuadrature::Gauss(_) => return invalid("a Gauss rule needs at least one node"),
                SourceQuadrature::Richardson(q) => {
                    richardson_finest(q)?;
                    SourceRule::Richardson(q)
                }
            }
        };
        Ok(Self { model, grid, recon, char_proj: cfg.char_proj, source, parallelism: cfg.parallelism })
    }

    pub fn model(&self) -> &Mo {
        &self.model
    }

    fn source_average(&self, polys: &[Poly; M], center: f64, h: f64) -> Result<[f64; M]> {
        let mut avg = [0.0; M];
        let mut add = |xi: f64, w: f64| -> Result<()> {
            let u: [f64; M] = std::array::from_fn(|m| polys[m].eval(xi * h));
            let s = self.model.source(&u, center + xi * h)?;
            for m in 0..M {
                avg[m] += w * s[m];
            }
            Ok(())
        };
        match &self.source {
            SourceRule::None => {}
            SourceRule::Gauss(nodes) => {
                for &(xi, w) in nodes {
                    add(xi, w)?;
                }
            }
            SourceRule::Richardson(q) => {
                let finest = richardson_finest(*q)?;
                let mut vals = Vec::with_capacity(finest + 1);
                for k in 0..=finest {
                    let xi = k as f64 / finest as f64 - 0.5;
                    let u: [f64; M] = std::array::from_fn(|m| polys[m].eval(xi * h));
                    vals.push(self.model.source(&u, center + xi * h)?);
                }
                for (m, a) in avg.iter_mut().enumerate() {
                    *a = richardson_combine(*q, |i, j| {
                        0.5 * (vals[i][m] + vals[j][m]) * (j - i) as f64 / finest as f64
                    })?;
                }
            }
        }
        Ok(avg)
    }
}

impl<const M: usize, Mo: Model<M>> Semidiscretization<M> for FvScheme<M, Mo> {
    fn grid(&self) -> &Grid1D {
        &self.grid
    }

    fn order(&self) -> usize {
        self.recon.config().order()
    }

    fn rhs(&self, u: &[[f64; M]], _t: f64, out: &mut [[f64; M]]) -> Result<()> {
        let n = self.grid.len();
        let padded = self.recon.pad(u, |s| self.model.mirror(s));
        let mut traces = vec![Trace::<M>::zero(); n + 2];
        let with_source = !matches!(self.source, SourceRule::None);
        try_fill(&mut traces, self.parallelism, Scratch::default, |scratch, c, tr| {
            let res = self.recon.reconstruct_state(&self.model, &padded, c, self.char_proj, scratch)?;
            let h = self.recon.cell_size(c);
            for m in 0..M {
                tr.left[m] = res[m].prec.eval(-0.5 * h);
                tr.right[m] = res[m].prec.eval(0.5 * h);
            }
            if with_source && (1..=n).contains(&c) {
                let polys = res.map(|r| r.prec);
                tr.source = self.source_average(&polys, self.grid.centers()[c - 1], h)?;
            }
            Ok(())
        })?;
        let flux: Vec<[f64; M]> =
            (0..=n).map(|i| llf_flux(&self.model, &traces[i].right, &traces[i + 1].left)).collect();
        for (j, o) in out.iter_mut().enumerate() {
            let h = self.grid.sizes()[j];
            for m in 0..M {
                o[m] = -(flux[j + 1][m] - flux[j][m]) / h + traces[j + 1].source[m];
            }
        }
        Ok(())
    }

    fn max_wave_speed(&self, u: &[[f64; M]]) -> f64 {
        u.iter().map(|s| self.model.max_wave_speed(s)).fold(0.0, f64::max)
    }
}

/// Right-hand side of the generic scheme for `field`.
pub fn semidiscrete_rhs<const M: usize>(
    model: &(impl Model<M> + Clone),
    field: &Field<M>,
    cfg: &RunConfig,
) -> Result<Vec<[f64; M]>> {
    let scheme = FvScheme::new(model.clone(), field.grid.clone(), cfg)?;
    let mut out = vec![[0.0; M]; field.len()];
    scheme.rhs(&field.values, field.time, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests;
