//! The CWENO reconstruction operator and, for comparison, classical WENO
//! point reconstruction at cell boundaries.
//!
//! A reconstruction of order `2g + 1` on the stencil `-g..=g` blends the
//! optimal polynomial `P_opt` (degree `2g`, offset `g`) with the `g + 1`
//! degree-`g` polynomials of offsets `0..=g`:
//!
//! 1. `P_0 = (P_opt - sum_{k>=1} d_k P_k) / d_0`
//! 2. `alpha_k = d_k / (I[P_k] + eps)^t`, `omega_k = alpha_k / sum alpha`
//! 3. `P_rec = sum_{k>=0} omega_k P_k`
//!
//! Candidate `k = 1..=g+1` has offset `r = g + 1 - k`, so `P_1` is the
//! leftmost stencil.

use crate::error::{invalid, Error, Result};
use crate::poly::{interpolant_into, DiffMode, DiffTable, GammaTable, Poly, MAX_STENCIL};
use crate::smoothness::jiang_shu;

/// Largest supported half-degree (order 9).
pub const MAX_G: usize = 4;
/// `P_0` plus `g + 1` low-degree candidates.
pub const MAX_CANDIDATES: usize = MAX_G + 2;

/// Parameters of a CWENO reconstruction of order `2g + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CwenoConfig {
    /// Half-degree; the order is `2g + 1`.
    pub g: usize,
    /// Linear coefficients `d_0, d_1..d_{g+1}`.
    pub d: Vec<f64>,
    /// `eps = eps_hat * h^eps_power`.
    pub eps_hat: f64,
    pub eps_power: i32,
    /// Exponent `t` of the weight formula.
    pub t_exp: i32,
}

impl CwenoConfig {
    /// Order `3, 5, 7` or `9` with the centre-biased linear coefficients
    /// and defaults `eps_hat = 1`, `p = 2`, `t = 2`.
    pub fn new(order: usize, d0: f64) -> Result<Self> {
        let g = half_degree(order)?;
        Ok(Self { g, d: linear_coefficients(g, d0)?, eps_hat: 1.0, eps_power: 2, t_exp: 2 })
    }

    pub fn with_eps(mut self, eps_hat: f64, eps_power: i32) -> Self {
        self.eps_hat = eps_hat;
        self.eps_power = eps_power;
        self
    }

    pub fn with_t(mut self, t_exp: i32) -> Self {
        self.t_exp = t_exp;
        self
    }

    pub fn order(&self) -> usize {
        2 * self.g + 1
    }

    pub fn d0(&self) -> f64 {
        self.d[0]
    }

    /// Number of blended polynomials, `P_0` included.
    pub fn candidates(&self) -> usize {
        self.g + 2
    }

    pub fn eps(&self, h: f64) -> f64 {
        self.eps_hat * h.powi(self.eps_power)
    }

    pub fn validate(&self) -> Result<()> {
        if self.g == 0 || self.g > MAX_G {
            return invalid(format!("half-degree g must be in 1..={MAX_G}, got {}", self.g));
        }
        if self.d.len() != self.g + 2 {
            return invalid(format!(
                "expected {} linear coefficients, got {}",
                self.g + 2,
                self.d.len()
            ));
        }
        if self.d.iter().any(|&d| !(d > 0.0 && d <= 1.0)) {
            return invalid("linear coefficients must lie in (0, 1]");
        }
        let sum: f64 = self.d.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return invalid(format!("linear coefficients sum to {sum}, not 1"));
        }
        if !(self.eps_hat >= 0.0) || !(0..=2).contains(&self.eps_power) {
            return invalid("eps_hat must be >= 0 and eps_power in {0, 1, 2}");
        }
        if self.t_exp < 2 {
            return invalid(format!("exponent t must be >= 2, got {}", self.t_exp));
        }
        Ok(())
    }
}

pub fn half_degree(order: usize) -> Result<usize> {
    match order {
        3 | 5 | 7 | 9 => Ok((order - 1) / 2),
        _ => invalid(format!("order must be 3, 5, 7 or 9, got {order}")),
    }
}

/// `(d_0, d_1, ..., d_{g+1})` with `d_j` proportional to `min(j, g + 2 - j)`
/// and scaled to share `1 - d_0`.
pub fn linear_coefficients(g: usize, d0: f64) -> Result<Vec<f64>> {
    if !(d0 > 0.0 && d0 < 1.0) {
        return invalid(format!("d0 must lie in (0, 1), got {d0}"));
    }
    if g == 0 {
        return invalid("g must be at least 1");
    }
    let m = g + 1;
    let tilde: Vec<f64> = (1..=m).map(|j| j.min(m + 1 - j) as f64).collect();
    let total: f64 = tilde.iter().sum();
    let mut d = Vec::with_capacity(m + 1);
    d.push(d0);
    d.extend(tilde.iter().map(|t| t / total * (1.0 - d0)));
    Ok(d)
}

/// Normalised weights `omega_k` from linear coefficients and indicators.
///
/// Evaluated as `(m / (I_k + eps))^t` with `m = min_k (I_k + eps)`, which
/// gives the same ratios without overflow and stays defined when
/// `eps = 0` and some indicators vanish.
pub fn nonlinear_weights(d: &[f64], indicators: &[f64], eps: f64, t: i32, out: &mut [f64]) {
    let min = indicators.iter().fold(f64::INFINITY, |m, &i| m.min(i + eps));
    let mut sum = 0.0;
    for ((o, &dk), &ik) in out.iter_mut().zip(d).zip(indicators) {
        let denom = ik + eps;
        let ratio = if denom == min { 1.0 } else if min == 0.0 { 0.0 } else { min / denom };
        *o = dk * ratio.powi(t);
        sum += *o;
    }
    for o in out.iter_mut().take(d.len()) {
        *o /= sum;
    }
}

/// Result of one cell reconstruction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CwenoResult {
    pub prec: Poly,
    omegas: [f64; MAX_CANDIDATES],
    indicators: [f64; MAX_CANDIDATES],
    count: usize,
}

impl CwenoResult {
    /// `omega_0` (for `P_0`) followed by the low-degree candidates.
    pub fn omegas(&self) -> &[f64] {
        &self.omegas[..self.count]
    }

    /// `I[P_0]` followed by the low-degree candidates.
    pub fn indicators(&self) -> &[f64] {
        &self.indicators[..self.count]
    }
}

/// All polynomials entering one reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidates {
    pub opt: Poly,
    pub p0: Poly,
    /// `P_1..P_{g+1}`, leftmost stencil first.
    pub low: Vec<Poly>,
}

impl Candidates {
    /// `(P_opt - sum_k d_k P_k) / d_0` for an arbitrary coefficient vector
    /// `d = (d_0, d_1, ..)`; no normalisation is imposed.
    pub fn p0_with(&self, d: &[f64]) -> Poly {
        let mut p = self.opt;
        for (dk, pk) in d[1..].iter().zip(&self.low) {
            p.add_scaled(-dk, pk);
        }
        let inv = 1.0 / d[0];
        for a in p.coeffs_mut() {
            *a *= inv;
        }
        p
    }
}

/// Gamma tables for one reconstruction cell.
#[derive(Clone, Debug)]
pub struct CellTables {
    g: usize,
    opt: GammaTable,
    /// Indexed by offset `r`.
    low: Vec<GammaTable>,
}

impl CellTables {
    /// Scaled tables for a uniform grid of cell size `h`.
    pub fn uniform(g: usize, h: f64) -> Result<Self> {
        Ok(Self {
            g,
            opt: GammaTable::uniform(g, 2 * g + 1, h)?,
            low: (0..=g).map(|r| GammaTable::uniform(r, g + 1, h)).collect::<Result<_>>()?,
        })
    }

    /// Physical tables for the centre of a `2g + 1` stencil of sizes.
    pub fn nonuniform(g: usize, sizes: &[f64]) -> Result<Self> {
        if sizes.len() != 2 * g + 1 {
            return invalid(format!("expected {} stencil sizes, got {}", 2 * g + 1, sizes.len()));
        }
        Ok(Self {
            g,
            opt: GammaTable::nonuniform(g, 2 * g + 1, sizes, g)?,
            low: (0..=g)
                .map(|r| GammaTable::nonuniform(r, g + 1, sizes, g))
                .collect::<Result<_>>()?,
        })
    }
}

/// Stencil geometry for a standalone reconstruction.
#[derive(Clone, Copy, Debug)]
pub enum StencilGeometry<'a> {
    /// Uniform cells of size `h`.
    Uniform { h: f64 },
    /// Sizes of the `2g + 1` stencil cells, centre cell in the middle.
    NonUniform { sizes: &'a [f64] },
}

/// Reusable per-thread buffers.
#[derive(Clone, Debug)]
pub struct Scratch {
    diffs: DiffTable,
    dev: [f64; MAX_STENCIL],
}

impl Default for Scratch {
    fn default() -> Self {
        Self { diffs: DiffTable::undivided(0, &[0.0]).expect("non-empty"), dev: [0.0; MAX_STENCIL] }
    }
}

/// Reconstruction on one cell with prepared tables.
///
/// `averages` holds the `2g + 1` stencil averages, `sizes` the matching
/// cell sizes (only read for physical tables), `center` the centre of the
/// middle cell.
pub struct CellStencil<'a> {
    pub averages: &'a [f64],
    pub sizes: &'a [f64],
    pub center: f64,
    pub h: f64,
    pub scaled: bool,
}

fn build_candidates(
    st: &CellStencil<'_>,
    tables: &CellTables,
    cfg: &CwenoConfig,
    scratch: &mut Scratch,
    opt: &mut Poly,
    low: &mut [Poly],
    p0: &mut Poly,
) -> Result<f64> {
    let g = tables.g;
    let n = 2 * g + 1;
    debug_assert_eq!(st.averages.len(), n);
    let mean = st.averages[g];
    for (d, &a) in scratch.dev.iter_mut().zip(st.averages) {
        *d = a - mean;
    }
    let mode = if st.scaled { DiffMode::Undivided } else { DiffMode::Divided };
    scratch.diffs.rebuild(-(g as isize), &scratch.dev[..n], st.sizes, mode)?;
    let scale = tables.opt.scale();
    *opt = Poly::zero(st.center, scale, 2 * g);
    interpolant_into(2 * g, 0, &scratch.diffs, &tables.opt, opt);
    *p0 = *opt;
    for (k, cand) in low.iter_mut().enumerate().take(g + 1) {
        let r = g - k;
        *cand = Poly::zero(st.center, scale, g);
        interpolant_into(g, g - r, &scratch.diffs, &tables.low[r], cand);
        p0.add_scaled(-cfg.d[k + 1], cand);
    }
    let inv = 1.0 / cfg.d[0];
    for a in p0.coeffs_mut() {
        *a *= inv;
    }
    Ok(mean)
}

/// Reconstruction kernel shared by the standalone entry point and the solver.
pub fn reconstruct_cell(
    st: &CellStencil<'_>,
    tables: &CellTables,
    cfg: &CwenoConfig,
    scratch: &mut Scratch,
) -> Result<CwenoResult> {
    let g = tables.g;
    let zero = Poly::zero(st.center, tables.opt.scale(), 0);
    let (mut opt, mut p0) = (zero, zero);
    let mut low = [zero; MAX_G + 1];
    let mean = build_candidates(st, tables, cfg, scratch, &mut opt, &mut low, &mut p0)?;

    let count = g + 2;
    let mut indicators = [0.0; MAX_CANDIDATES];
    indicators[0] = jiang_shu(&p0, st.h).value();
    for k in 0..=g {
        indicators[k + 1] = jiang_shu(&low[k], st.h).value();
    }
    let mut omegas = [0.0; MAX_CANDIDATES];
    nonlinear_weights(&cfg.d, &indicators[..count], cfg.eps(st.h), cfg.t_exp, &mut omegas[..count]);

    let mut prec = Poly::zero(st.center, tables.opt.scale(), 2 * g);
    prec.add_scaled(omegas[0], &p0);
    for k in 0..=g {
        prec.add_scaled(omegas[k + 1], &low[k]);
    }
    prec.coeffs_mut()[0] += mean;
    Ok(CwenoResult { prec, omegas, indicators, count })
}

fn standalone_tables(
    averages: &[f64],
    geometry: StencilGeometry<'_>,
    cfg: &CwenoConfig,
) -> Result<(CellTables, f64, bool)> {
    cfg.validate()?;
    let n = 2 * cfg.g + 1;
    if averages.len() != n {
        return invalid(format!("order {} needs {} averages, got {}", cfg.order(), n, averages.len()));
    }
    match geometry {
        StencilGeometry::Uniform { h } => {
            if !(h > 0.0) {
                return invalid("cell size must be positive");
            }
            Ok((CellTables::uniform(cfg.g, h)?, h, true))
        }
        StencilGeometry::NonUniform { sizes } => {
            let t = CellTables::nonuniform(cfg.g, sizes)?;
            Ok((t, sizes[cfg.g], false))
        }
    }
}

/// CWENO reconstruction on the cell at the middle of `averages`.
pub fn cweno_reconstruct(
    averages: &[f64],
    geometry: StencilGeometry<'_>,
    center: f64,
    cfg: &CwenoConfig,
) -> Result<CwenoResult> {
    let (tables, h, scaled) = standalone_tables(averages, geometry, cfg)?;
    let sizes = match geometry {
        StencilGeometry::NonUniform { sizes } => sizes,
        StencilGeometry::Uniform { .. } => &[],
    };
    let st = CellStencil { averages, sizes, center, h, scaled };
    reconstruct_cell(&st, &tables, cfg, &mut Scratch::default())
}

/// `P_opt`, `P_0` and the low-degree candidates for the same data.
pub fn cweno_candidates(
    averages: &[f64],
    geometry: StencilGeometry<'_>,
    center: f64,
    cfg: &CwenoConfig,
) -> Result<Candidates> {
    let (tables, h, scaled) = standalone_tables(averages, geometry, cfg)?;
    let sizes = match geometry {
        StencilGeometry::NonUniform { sizes } => sizes,
        StencilGeometry::Uniform { .. } => &[],
    };
    let st = CellStencil { averages, sizes, center, h, scaled };
    let zero = Poly::zero(center, tables.opt.scale(), 0);
    let (mut opt, mut p0) = (zero, zero);
    let mut low = [zero; MAX_G + 1];
    let mean = build_candidates(&st, &tables, cfg, &mut Scratch::default(), &mut opt, &mut low, &mut p0)?;
    let shift = |mut p: Poly| {
        p.coeffs_mut()[0] += mean;
        p
    };
    Ok(Candidates {
        opt: shift(opt),
        p0: shift(p0),
        low: low[..=cfg.g].iter().copied().map(shift).collect(),
    })
}

/// Optimal WENO weights at the right cell boundary on uniform grids,
/// ordered from the leftmost stencil (offset `g`) to offset `0`.
const WENO_RIGHT_WEIGHTS: [&[f64]; MAX_G] = [
    &[1.0 / 3.0, 2.0 / 3.0],
    &[1.0 / 10.0, 6.0 / 10.0, 3.0 / 10.0],
    &[1.0 / 35.0, 12.0 / 35.0, 18.0 / 35.0, 4.0 / 35.0],
    &[1.0 / 126.0, 10.0 / 63.0, 10.0 / 21.0, 20.0 / 63.0, 5.0 / 126.0],
];

/// Tabulated optimal weights at `x_hat = -1/2` or `+1/2` (scaled
/// coordinates), leftmost stencil first.
pub fn weno_optimal_weights(g: usize, x_hat: f64) -> Result<Vec<f64>> {
    if g == 0 || g > MAX_G {
        return invalid(format!("half-degree g must be in 1..={MAX_G}"));
    }
    let right = WENO_RIGHT_WEIGHTS[g - 1];
    if x_hat == 0.5 {
        Ok(right.to_vec())
    } else if x_hat == -0.5 {
        Ok(right.iter().rev().copied().collect())
    } else {
        Err(Error::Unsupported(format!(
            "WENO optimal weights exist only at cell boundaries, not at x = {x_hat}"
        )))
    }
}

/// Classical WENO value at a boundary of the middle cell of a uniform
/// stencil of `2g + 1` averages. `x_hat` is `-1/2` or `+1/2` in units of
/// the cell size.
pub fn weno_reconstruct_point(averages: &[f64], x_hat: f64, g: usize, eps: f64, t: i32) -> Result<f64> {
    let d = weno_optimal_weights(g, x_hat)?;
    if averages.len() != 2 * g + 1 {
        return invalid(format!("expected {} averages, got {}", 2 * g + 1, averages.len()));
    }
    let tables = CellTables::uniform(g, 1.0)?;
    let diffs = DiffTable::undivided(-(g as isize), averages)?;
    let mut values = Vec::with_capacity(g + 1);
    let mut indicators = Vec::with_capacity(g + 1);
    for k in 0..=g {
        let r = g - k;
        let mut p = Poly::zero(0.0, 1.0, g);
        interpolant_into(g, g - r, &diffs, &tables.low[r], &mut p);
        values.push(p.eval_scaled(x_hat));
        indicators.push(jiang_shu(&p, 1.0).value());
    }
    let mut w = vec![0.0; g + 1];
    nonlinear_weights(&d, &indicators, eps, t, &mut w);
    Ok(w.iter().zip(&values).map(|(w, v)| w * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn linear_coefficient_profiles() {
        let d = linear_coefficients(2, 0.75).unwrap();
        assert_eq!(d, vec![0.75, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 16.0]);
        let d0 = 0.4;
        let d = linear_coefficients(3, d0).unwrap();
        assert_relative_eq!(d[1], (1.0 - d0) / 6.0, max_relative = 1e-15);
        assert_relative_eq!(d[2], (1.0 - d0) / 3.0, max_relative = 1e-15);
        assert_relative_eq!(d[3], (1.0 - d0) / 3.0, max_relative = 1e-15);
        assert_relative_eq!(d[4], (1.0 - d0) / 6.0, max_relative = 1e-15);
        assert_eq!(linear_coefficients(1, 0.5).unwrap(), vec![0.5, 0.25, 0.25]);
        assert!(linear_coefficients(2, 1.0).is_err());
        assert!(linear_coefficients(2, 0.0).is_err());
        for g in 1..=4 {
            let s: f64 = linear_coefficients(g, 0.3).unwrap().iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        assert!(CwenoConfig::new(4, 0.5).is_err());
        let mut c = CwenoConfig::new(5, 0.5).unwrap();
        assert!(c.validate().is_ok());
        c.t_exp = 1;
        assert!(c.validate().is_err());
        let mut c = CwenoConfig::new(3, 0.5).unwrap();
        c.d = vec![0.5, 0.6, -0.1];
        assert!(c.validate().is_err());
    }

    #[test]
    fn weights_handle_zero_indicators() {
        let d = [0.5, 0.25, 0.25];
        let mut w = [0.0; 3];
        nonlinear_weights(&d, &[0.0, 0.0, 0.0], 0.0, 2, &mut w);
        assert_eq!(w, d);
        nonlinear_weights(&d, &[1.0, 0.0, 2.0], 0.0, 2, &mut w);
        assert_eq!(w, [0.0, 1.0, 0.0]);
        nonlinear_weights(&d, &[1.0, 1.0, 3.0], 1.0, 2, &mut w);
        let a = [0.5 / 4.0, 0.25 / 4.0, 0.25 / 16.0];
        let s: f64 = a.iter().sum();
        for k in 0..3 {
            assert_relative_eq!(w[k], a[k] / s, max_relative = 1e-15);
        }
    }

    fn heaviside_cweno3(d: &[f64]) -> f64 {
        let cfg = CwenoConfig::new(3, 0.5).unwrap();
        let c = cweno_candidates(&[1.0, 0.0, 0.0], StencilGeometry::Uniform { h: 0.1 }, 0.0, &cfg).unwrap();
        jiang_shu(&c.p0_with(d), 0.1).value() / jiang_shu(&c.opt, 0.1).value()
    }

    #[test]
    fn cweno3_heaviside_ratio() {
        // normalised coefficients d_L = d_R = (1 - d0) / 2:
        // P_opt = -1/24 - x/2 + x^2/2, P_L = -x, P_R = 0 on unit cells
        for d0 in [0.25, 0.5, 0.75, 0.9] {
            let dl = 0.5 * (1.0 - d0);
            let expect = (3.0 * d0 * d0 + 13.0) / (16.0 * d0 * d0);
            assert_relative_eq!(heaviside_cweno3(&[d0, dl, dl]), expect, max_relative = 1e-12);
        }
        // side weights proportional to d0 (d_L = d_R = d0 / 2)
        for d0 in [0.25, 0.5, 0.75, 1.0] {
            let expect = (3.0 * d0 * d0 - 6.0 * d0 + 16.0) / (16.0 * d0 * d0);
            assert_relative_eq!(heaviside_cweno3(&[d0, d0 / 2.0, d0 / 2.0]), expect, max_relative = 1e-12);
        }
        assert_relative_eq!(heaviside_cweno3(&[0.5, 0.25, 0.25]), 3.4375, max_relative = 1e-12);
        // the standard candidates reproduce p0_with on the configured coefficients
        let cfg = CwenoConfig::new(3, 0.75).unwrap();
        let c = cweno_candidates(&[1.0, 0.0, 0.0], StencilGeometry::Uniform { h: 0.1 }, 0.0, &cfg).unwrap();
        assert_eq!(c.p0_with(&cfg.d).coeffs().len(), c.p0.coeffs().len());
        for (a, b) in c.p0_with(&cfg.d).coeffs().iter().zip(c.p0.coeffs()) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn polynomial_data_is_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for order in [3, 5, 7, 9] {
            let cfg = CwenoConfig::new(order, 0.75).unwrap();
            let g = cfg.g;
            for _ in 0..20 {
                // exact averages of a degree-g polynomial on a random stencil
                let coeffs: Vec<f64> = (0..=g).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let u = Poly::new(0.0, 1.0, &coeffs).unwrap();
                let sizes: Vec<f64> = (0..2 * g + 1).map(|_| rng.gen_range(0.05..0.15)).collect();
                let mut lo = -0.5 * sizes[g] - sizes[..g].iter().sum::<f64>();
                let mut avg = Vec::new();
                for &h in &sizes {
                    avg.push(u.cell_average(lo, lo + h));
                    lo += h;
                }
                let res = cweno_reconstruct(&avg, StencilGeometry::NonUniform { sizes: &sizes }, 0.0, &cfg).unwrap();
                for x in [-0.04, 0.0, 0.03] {
                    assert_relative_eq!(res.prec.eval(x), u.eval(x), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn weno_tables_are_consistent() {
        // sum_k d_k P_k(x_hat) must equal P_opt(x_hat) for any data
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for g in 1..=4 {
            let avg: Vec<f64> = (0..2 * g + 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cfg = CwenoConfig::new(2 * g + 1, 0.5).unwrap();
            let c = cweno_candidates(&avg, StencilGeometry::Uniform { h: 1.0 }, 0.0, &cfg).unwrap();
            for x_hat in [-0.5, 0.5] {
                let d = weno_optimal_weights(g, x_hat).unwrap();
                let blend: f64 = d.iter().zip(&c.low).map(|(d, p)| d * p.eval_scaled(x_hat)).sum();
                assert_relative_eq!(blend, c.opt.eval_scaled(x_hat), epsilon = 1e-13);
            }
        }
        assert!(matches!(weno_optimal_weights(2, 0.0), Err(Error::Unsupported(_))));
        assert!(weno_reconstruct_point(&[0.0; 5], 0.1, 2, 1e-6, 2).is_err());
    }

    #[test]
    fn weno_reproduces_low_degree_polynomials() {
        for g in 1..=4 {
            let coeffs: Vec<f64> = (0..=g).map(|i| 0.3 * i as f64 - 0.5).collect();
            let u = Poly::new(0.0, 1.0, &coeffs).unwrap();
            let avg: Vec<f64> = (0..2 * g + 1)
                .map(|j| {
                    let c = j as f64 - g as f64;
                    u.cell_average(c - 0.5, c + 0.5)
                })
                .collect();
            for x_hat in [-0.5, 0.5] {
                let v = weno_reconstruct_point(&avg, x_hat, g, 1e-6, 2).unwrap();
                assert_relative_eq!(v, u.eval(x_hat), epsilon = 1e-12);
            }
        }
    }
}
