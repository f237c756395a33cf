//! Grid refinement studies.

use std::time::Instant;

use super::{
    advection_exact, error_1norm_components, swe_scheme, swe_smooth_bottom, swe_smooth_initial, Options, Table, TestId,
    Value,
};
use crate::error::{invalid, Result};
use crate::models::Advection;
use crate::par;
use crate::solver::{advance_to, Field, FvScheme, Integrator};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// 1-norm error summed over components.
    pub error: f64,
    /// 1-norm error of each component.
    pub components: Vec<f64>,
    /// `None` on the first row.
    pub rate: Option<f64>,
    /// Wall-clock time of the run.
    pub seconds: f64,
}

/// `log(e_{i-1} / e_i) / log(n_i / n_{i-1})` for every row after the first.
pub fn observed_rates(ns: &[usize], errors: &[f64]) -> Vec<Option<f64>> {
    (0..ns.len())
        .map(|i| {
            (i > 0).then(|| (errors[i - 1] / errors[i]).ln() / (ns[i] as f64 / ns[i - 1] as f64).ln())
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Errors at the final time on each grid size of `ns`.
///
/// Advection tests compare with exact cell averages of the shifted initial
/// data. `swe_smooth` compares with a run of order `opts.reference_order`
/// on `opts.reference_n` cells, restricted to each coarse grid.
pub fn run_convergence(test: TestId, ns: &[usize], opts: &Options) -> Result<Vec<ConvergenceRow>> {
    if ns.is_empty() {
        return invalid("no grid sizes given");
    }
    let results: Vec<Result<(Vec<f64>, f64)>> = match test {
        TestId::AdvectLow | TestId::AdvectHigh => {
            par::map(ns, opts.parallelism, |&n| timed(|| advection_error(test, n, opts)))
        }
        TestId::SweSmooth => {
            let reference = swe_reference(opts)?;
            par::map(ns, opts.parallelism, |&n| {
                timed(|| {
                    let field = swe_smooth_run(n, opts)?;
                    Ok(error_1norm_components(&field, &reference)?.to_vec())
                })
            })
        }
        other => return invalid(format!("no convergence study for `{other}`; use advect_low, advect_high or swe_smooth")),
    };
    let mut rows = Vec::with_capacity(ns.len());
    for (&n, r) in ns.iter().zip(results) {
        let (components, seconds) = r?;
        rows.push(ConvergenceRow { n, error: components.iter().sum(), components, rate: None, seconds });
    }
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    for (row, rate) in rows.iter_mut().zip(observed_rates(ns, &errors)) {
        row.rate = rate;
    }
    Ok(rows)
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64()))
}

fn final_time(test: TestId, opts: &Options) -> f64 {
    opts.t_end.unwrap_or(*test.setup().times.last().expect("non-empty"))
}

fn advection_error(test: TestId, n: usize, opts: &Options) -> Result<Vec<f64>> {
    let t_end = final_time(test, opts);
    let cfg = opts.run_config(test, t_end)?;
    let grid = opts.grid(&test.setup(), n)?;
    let scheme = FvScheme::new(Advection, grid.clone(), &cfg)?;
    let mut field = advection_exact(test, &grid, 0.0);
    advance_to(&scheme, &mut field, t_end, &cfg)?;
    Ok(error_1norm_components(&field, &advection_exact(test, &grid, t_end))?.to_vec())
}

fn swe_smooth_run(n: usize, opts: &Options) -> Result<Field<2>> {
    let test = TestId::SweSmooth;
    let t_end = final_time(test, opts);
    let cfg = opts.run_config(test, t_end)?;
    let grid = opts.grid(&test.setup(), n)?;
    let scheme = swe_scheme(test, swe_smooth_bottom(), &grid, &cfg, opts)?;
    let mut field = Field::from_fn(grid, swe_smooth_initial);
    advance_to(&scheme, &mut field, t_end, &cfg)?;
    Ok(field)
}

fn swe_reference(opts: &Options) -> Result<Field<2>> {
    let ref_opts = Options {
        order: opts.reference_order,
        integrator: Some(Integrator::Extrapolated8),
        ..opts.clone()
    };
    swe_smooth_run(opts.reference_n, &ref_opts)
}

/// Convergence table `N,error,rate`, followed by one error column per
/// component for systems. Timings are left out so that the table is
/// reproducible byte for byte.
pub fn convergence_table(test: TestId, rows: &[ConvergenceRow], opts: &Options) -> Result<Table> {
    let ns: Vec<String> = rows.iter().map(|r| r.n.to_string()).collect();
    let cfg = opts.run_config(test, final_time(test, opts))?;
    let m = rows.first().map_or(1, |r| r.components.len());
    let mut header = vec!["N".to_string(), "error".into(), "rate".into()];
    if m > 1 {
        header.extend((0..m).map(|k| format!("error_comp{k}")));
    }
    let mut t = Table { header, ..Table::default() };
    t.meta = opts.metadata(test, &ns.join(","), &cfg);
    if test == TestId::SweSmooth {
        t.meta.push(("reference".into(), format!("order{}:N{}", opts.reference_order, opts.reference_n)));
    }
    for r in rows {
        let mut row = vec![r.n.into(), r.error.into(), r.rate.into()];
        if m > 1 {
            row.extend(r.components.iter().map(|&e| Value::Real(e)));
        }
        t.push(row);
    }
    Ok(t)
}
