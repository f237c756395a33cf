//! Single-cell studies of the reconstruction: bounds on data with a jump
//! inside the cell, the indicator ratio `I[P_0] / I[P_opt]` on Heaviside
//! data, and the decay of `omega - d` on smooth data.

use super::{Table, Value};
use crate::error::Result;
use crate::poly::Poly;
use crate::reconstruction::{cweno_candidates, cweno_reconstruct, half_degree, CwenoConfig, StencilGeometry};
use crate::smoothness::jiang_shu;

/// Cell size and weight parameters of the single-cell studies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub h: f64,
    pub eps_hat: f64,
    pub eps_power: i32,
    pub t_exp: i32,
    /// Uniform samples per cell before refining at critical points.
    pub samples: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { h: 0.01, eps_hat: 1.0, eps_power: 2, t_exp: 2, samples: 200 }
    }
}

impl ScanOptions {
    fn config(&self, order: usize, d0: f64) -> Result<CwenoConfig> {
        let cfg = CwenoConfig::new(order, d0)?.with_eps(self.eps_hat, self.eps_power).with_t(self.t_exp);
        cfg.validate()?;
        Ok(cfg)
    }

    fn meta(&self, t: Table) -> Table {
        t.meta("h", self.h).meta("eps", format!("{}*h^{}", self.eps_hat, self.eps_power)).meta("t", self.t_exp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub d0: f64,
    pub d: f64,
    pub min: f64,
    pub max: f64,
}

/// Minimum and maximum of `p` on `[lo, hi]`: uniform samples plus the
/// critical points bracketed by sign changes of `p'`.
pub fn poly_range(p: &Poly, lo: f64, hi: f64, samples: usize) -> (f64, f64) {
    let dp = p.derivative();
    let x = |k: usize| lo + (hi - lo) * k as f64 / samples as f64;
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut visit = |v: f64| {
        min = min.min(v);
        max = max.max(v);
    };
    for k in 0..=samples {
        visit(p.eval(x(k)));
    }
    for k in 0..samples {
        let (mut a, mut b) = (x(k), x(k + 1));
        let (fa, fb) = (dp.eval(a), dp.eval(b));
        if fa == 0.0 || fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        let sa = fa.signum();
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if dp.eval(m).signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        visit(p.eval(a));
        visit(p.eval(b));
    }
    (min, max)
}

/// Range of the reconstruction on the centre cell for the data
/// `(.., 1, 1, D, 0, 0, ..)`, for every `d0` and `D`.
pub fn run_disc_scan(order: usize, d0s: &[f64], ds: &[f64], so: &ScanOptions) -> Result<Vec<ScanRow>> {
    let g = half_degree(order)?;
    let h = so.h;
    let mut rows = Vec::with_capacity(d0s.len() * ds.len());
    for &d0 in d0s {
        let cfg = so.config(order, d0)?;
        for &d in ds {
            let avg: Vec<f64> = (0..2 * g + 1).map(|i| if i < g { 1.0 } else if i == g { d } else { 0.0 }).collect();
            let rec = cweno_reconstruct(&avg, StencilGeometry::Uniform { h }, 0.0, &cfg)?;
            let (min, max) = poly_range(&rec.prec, -0.5 * h, 0.5 * h, so.samples);
            rows.push(ScanRow { d0, d, min, max });
        }
    }
    Ok(rows)
}

/// Scan table `d0,D,min,max`.
pub fn disc_scan_table(order: usize, rows: &[ScanRow], so: &ScanOptions) -> Table {
    let mut t = so.meta(Table::new(&["d0", "D", "min", "max"]).meta("test", "disc_scan").meta("order", order));
    for r in rows {
        t.push(vec![r.d0.into(), r.d.into(), r.min.into(), r.max.into()]);
    }
    t
}

/// `I[P_0] / I[P_opt]` for unit-jump Heaviside data on `2g + 1` cells of
/// size `h`, equal to 1 on cells `0..=jump` and 0 beyond.
pub fn heaviside_ratio(order: usize, d0: f64, h: f64, jump: usize, so: &ScanOptions) -> Result<f64> {
    let g = half_degree(order)?;
    let cfg = so.config(order, d0)?;
    let avg: Vec<f64> = (0..2 * g + 1).map(|i| if i <= jump { 1.0 } else { 0.0 }).collect();
    let c = cweno_candidates(&avg, StencilGeometry::Uniform { h }, 0.0, &cfg)?;
    Ok(jiang_shu(&c.p0, h).value() / jiang_shu(&c.opt, h).value())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropertyRRow {
    pub order: usize,
    pub d0: f64,
    pub h: f64,
    /// Smallest ratio over all jump positions inside the stencil.
    pub ratio: f64,
}

pub fn run_property_r(orders: &[usize], d0s: &[f64], hs: &[f64], so: &ScanOptions) -> Result<Vec<PropertyRRow>> {
    let mut rows = Vec::new();
    for &order in orders {
        let g = half_degree(order)?;
        for &d0 in d0s {
            for &h in hs {
                let mut ratio = f64::INFINITY;
                for jump in 0..2 * g {
                    ratio = ratio.min(heaviside_ratio(order, d0, h, jump, so)?);
                }
                rows.push(PropertyRRow { order, d0, h, ratio });
            }
        }
    }
    Ok(rows)
}

/// Property-R table `order,d0,h,ratio`.
pub fn property_r_table(rows: &[PropertyRRow], so: &ScanOptions) -> Table {
    let mut t = so.meta(Table::new(&["order", "d0", "h", "ratio"]).meta("test", "property_r"));
    t.meta.retain(|(k, _)| k != "h");
    for r in rows {
        t.push(vec![r.order.into(), r.d0.into(), r.h.into(), Value::Real(r.ratio)]);
    }
    t
}

/// `max_k |omega_k - d_k|` for exact averages of `sin` on cells of size
/// `h` around `x0`.
pub fn weight_deviation(order: usize, d0: f64, eps_power: i32, h: f64, x0: f64) -> Result<f64> {
    let g = half_degree(order)?;
    let cfg = CwenoConfig::new(order, d0)?.with_eps(1.0, eps_power);
    let avg: Vec<f64> = (0..2 * g + 1)
        .map(|i| {
            let c = x0 + (i as f64 - g as f64) * h;
            let (a, b) = (c - 0.5 * h, c + 0.5 * h);
            (a.cos() - b.cos()) / h
        })
        .collect();
    let rec = cweno_reconstruct(&avg, StencilGeometry::Uniform { h }, x0, &cfg)?;
    Ok(rec.omegas().iter().zip(&cfg.d).fold(0.0f64, |m, (w, d)| m.max((w - d).abs())))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightRow {
    pub order: usize,
    pub eps_power: i32,
    pub h: f64,
    pub deviation: f64,
}

pub fn run_weight_convergence(
    orders: &[usize],
    eps_powers: &[i32],
    hs: &[f64],
    d0: f64,
    x0: f64,
) -> Result<Vec<WeightRow>> {
    let mut rows = Vec::new();
    for &order in orders {
        for &eps_power in eps_powers {
            for &h in hs {
                let deviation = weight_deviation(order, d0, eps_power, h, x0)?;
                rows.push(WeightRow { order, eps_power, h, deviation });
            }
        }
    }
    Ok(rows)
}
