//! Experiment drivers: error norms, convergence studies, reconstruction
//! scans and the named test problems, with CSV output.

mod convergence;
mod scans;
mod table;

pub use convergence::{convergence_table, fitted_slope, observed_rates, run_convergence, ConvergenceRow};
pub use scans::{
    disc_scan_table, heaviside_ratio, poly_range, property_r_table, run_disc_scan, run_property_r,
    run_weight_convergence, weight_deviation, PropertyRRow, ScanOptions, ScanRow, WeightRow,
};
pub use table::{Table, Value};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::grid::{Boundary, Grid1D};
use crate::models::{Advection, Burgers, Euler, EulerRadial, ShallowWater, Topography};
use crate::par::Parallelism;
use crate::reconstruction::CwenoConfig;
use crate::solver::{
    advance_to, DtLaw, Field, FvScheme, Integrator, RunConfig, Semidiscretization, SourceQuadrature, StepStats,
    WellBalancedSwe,
};

/// Grid family for a run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum GridKind {
    #[default]
    Uniform,
    /// Random cell sizes with largest/smallest ratio at most `ratio`.
    Random { ratio: f64 },
}

impl FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "uniform" => Ok(GridKind::Uniform),
            Some(("random", r)) => {
                let ratio = r.parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")))?;
                Ok(GridKind::Random { ratio })
            }
            _ => Err(Error::Parse(format!("unknown grid `{s}` (expected uniform or random:<ratio>)"))),
        }
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridKind::Uniform => write!(f, "uniform"),
            GridKind::Random { ratio } => write!(f, "random:{ratio}"),
        }
    }
}

/// The named test problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestId {
    AdvectLow,
    AdvectHigh,
    Burgers,
    Lax,
    SweSmooth,
    LakeAtRest,
    DamBreak,
    RadialSod,
}

impl TestId {
    pub const ALL: [TestId; 8] = [
        TestId::AdvectLow,
        TestId::AdvectHigh,
        TestId::Burgers,
        TestId::Lax,
        TestId::SweSmooth,
        TestId::LakeAtRest,
        TestId::DamBreak,
        TestId::RadialSod,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestId::AdvectLow => "advect_low",
            TestId::AdvectHigh => "advect_high",
            TestId::Burgers => "burgers",
            TestId::Lax => "lax",
            TestId::SweSmooth => "swe_smooth",
            TestId::LakeAtRest => "lake_at_rest",
            TestId::DamBreak => "dam_break",
            TestId::RadialSod => "radial_sod",
        }
    }

    /// Name of the model the test solves.
    pub fn model_name(self) -> &'static str {
        match self {
            TestId::AdvectLow | TestId::AdvectHigh => "advection",
            TestId::Burgers => "burgers",
            TestId::Lax => "euler",
            TestId::SweSmooth | TestId::LakeAtRest | TestId::DamBreak => "swe",
            TestId::RadialSod => "euler_radial",
        }
    }

    /// Number of the test in the standard numbering of the experiments.
    pub fn number(self) -> u32 {
        match self {
            TestId::AdvectLow => 1,
            TestId::AdvectHigh => 2,
            TestId::Burgers => 3,
            TestId::Lax => 4,
            TestId::SweSmooth => 5,
            TestId::LakeAtRest => 6,
            TestId::DamBreak => 7,
            TestId::RadialSod => 8,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            TestId::AdvectLow => "linear advection of smooth low-frequency data on [-1,1], T=2",
            TestId::AdvectHigh => "linear advection with a localised high-frequency bump, T=2",
            TestId::Burgers => "Burgers shock formation and interaction, snapshots T=1/(2pi), 0.6, 1",
            TestId::Lax => "Lax shock tube for the Euler equations on [-5,5], T=1.3",
            TestId::SweSmooth => "smooth shallow water flow over z=sin^2(pi x), T=0.1",
            TestId::LakeAtRest => "lake at rest over a random rough bottom, T=0.1",
            TestId::DamBreak => "shallow water dam break over a Gaussian hump on [-2,2], T=0.2",
            TestId::RadialSod => "spherical Sod explosion on [-1,1], T=0.25",
        }
    }

    fn setup(self) -> Setup {
        let s = |a, b, bc, n, times: &[f64]| Setup { a, b, bc, n, times: times.to_vec() };
        match self {
            TestId::AdvectLow | TestId::AdvectHigh => s(-1.0, 1.0, Boundary::Periodic, 80, &[2.0]),
            TestId::Burgers => s(-1.0, 1.0, Boundary::Periodic, 160, &[1.0 / (2.0 * PI), 0.6, 1.0]),
            TestId::Lax => s(-5.0, 5.0, Boundary::Outflow, 200, &[LAX_FINAL_TIME]),
            TestId::SweSmooth => s(0.0, 1.0, Boundary::Periodic, 64, &[0.1]),
            TestId::LakeAtRest => s(0.0, 1.0, Boundary::Outflow, 100, &[0.1]),
            TestId::DamBreak => s(-2.0, 2.0, Boundary::Outflow, 200, &[0.2]),
            TestId::RadialSod => s(-1.0, 1.0, Boundary::Outflow, 400, &[0.25]),
        }
    }

    /// Smooth problems use the eighth-order extrapolated integrator so that
    /// time errors stay below the spatial ones at every order.
    fn is_smooth(self) -> bool {
        matches!(self, TestId::AdvectLow | TestId::AdvectHigh | TestId::SweSmooth)
    }

    fn default_char_proj(self) -> bool {
        matches!(self, TestId::Lax | TestId::DamBreak | TestId::RadialSod)
    }

    fn is_shallow_water(self) -> bool {
        matches!(self, TestId::SweSmooth | TestId::LakeAtRest | TestId::DamBreak)
    }

    /// Gravitational constant of the shallow water tests. The smooth
    /// convergence test uses `g = 1`, the value at which its published error
    /// table is reproduced; the others use [`ShallowWater::DEFAULT_GRAVITY`].
    pub fn default_gravity(self) -> f64 {
        if self == TestId::SweSmooth {
            1.0
        } else {
            ShallowWater::DEFAULT_GRAVITY
        }
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        TestId::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .or(if key == "rough" { Some(TestId::LakeAtRest) } else { None })
            .ok_or_else(|| {
                let names: Vec<_> = TestId::ALL.iter().map(|t| t.name()).collect();
                Error::Parse(format!("unknown test `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Final time of the Lax shock tube on `[-5, 5]`.
pub const LAX_FINAL_TIME: f64 = 1.3;
/// Still water level of the lake-at-rest test.
pub const LAKE_LEVEL: f64 = 1.5;

struct Setup {
    a: f64,
    b: f64,
    bc: Boundary,
    n: usize,
    times: Vec<f64>,
}

/// Settings shared by all drivers; `None` fields take per-test defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub order: usize,
    pub d0: f64,
    pub eps_hat: f64,
    pub eps_power: i32,
    pub t_exp: i32,
    pub cfl: Option<f64>,
    pub char_proj: Option<bool>,
    pub t_end: Option<f64>,
    pub seed: u64,
    pub grid: GridKind,
    pub quadrature: SourceQuadrature,
    pub well_balanced: Option<bool>,
    pub integrator: Option<Integrator>,
    pub dt_law: DtLaw,
    /// `None`: the test's own value, see [`TestId::default_gravity`].
    pub gravity: Option<f64>,
    /// Spatial dimension of the radial Euler test.
    pub radial_dim: usize,
    /// Order and size of the self-computed reference of `swe_smooth`.
    pub reference_order: usize,
    pub reference_n: usize,
    pub parallelism: Parallelism,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            order: 5,
            d0: 0.75,
            eps_hat: 1.0,
            eps_power: 2,
            t_exp: 2,
            cfl: None,
            char_proj: None,
            t_end: None,
            seed: 0,
            grid: GridKind::Uniform,
            quadrature: SourceQuadrature::Matched,
            well_balanced: None,
            integrator: None,
            dt_law: DtLaw::Cfl,
            gravity: None,
            radial_dim: 3,
            reference_order: 9,
            reference_n: 1024,
            parallelism: Parallelism::default(),
        }
    }
}

impl Options {
    pub fn with_order(order: usize) -> Self {
        Self { order, ..Self::default() }
    }

    pub fn cweno(&self) -> Result<CwenoConfig> {
        let cfg = CwenoConfig::new(self.order, self.d0)?.with_eps(self.eps_hat, self.eps_power).with_t(self.t_exp);
        cfg.validate()?;
        Ok(cfg)
    }

    fn run_config(&self, test: TestId, t_end: f64) -> Result<RunConfig> {
        let mut cfg = RunConfig::new(self.cweno()?, t_end);
        if let Some(c) = self.cfl {
            cfg.cfl = c;
        }
        cfg.integrator = match &self.integrator {
            Some(i) => i.clone(),
            None if test.is_smooth() && self.order > 3 => Integrator::Extrapolated8,
            None => Integrator::Ssprk3,
        };
        cfg.dt_law = self.dt_law;
        cfg.char_proj = self.char_proj.unwrap_or(test.default_char_proj());
        cfg.quadrature = self.quadrature;
        cfg.well_balanced = test.is_shallow_water() && self.well_balanced.unwrap_or(true);
        cfg.parallelism = self.parallelism;
        cfg.validate()?;
        Ok(cfg)
    }

    fn grid(&self, setup: &Setup, n: usize) -> Result<Grid1D> {
        match self.grid {
            GridKind::Uniform => Grid1D::uniform(setup.a, setup.b, n, setup.bc),
            GridKind::Random { ratio } => Grid1D::random_nonuniform(setup.a, setup.b, n, self.seed, ratio, setup.bc),
        }
    }

    pub fn gravity_for(&self, test: TestId) -> f64 {
        self.gravity.unwrap_or(test.default_gravity())
    }

    fn eps_label(&self) -> String {
        format!("{}*h^{}", self.eps_hat, self.eps_power)
    }

    /// `key=value` pairs describing a run, for CSV metadata.
    pub fn metadata(&self, test: TestId, n: &str, cfg: &RunConfig) -> Vec<(String, String)> {
        let mut meta = vec![
            ("test", test.name().to_string()),
            ("order", self.order.to_string()),
            ("N", n.to_string()),
            ("d0", self.d0.to_string()),
            ("eps", self.eps_label()),
            ("t", self.t_exp.to_string()),
            ("seed", self.seed.to_string()),
            ("grid", self.grid.to_string()),
            ("integrator", cfg.integrator.name().to_string()),
            ("cfl", cfg.cfl.to_string()),
            ("char_proj", on_off(cfg.char_proj).to_string()),
        ];
        if test.is_shallow_water() {
            meta.push(("wb", on_off(cfg.well_balanced).to_string()));
            meta.push(("g", self.gravity_for(test).to_string()));
        }
        if test == TestId::Lax {
            meta.push(("note", "final_time_not_fixed_by_source,_conventional_T=1.3".to_string()));
        }
        meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

/// Cell averages at one output time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub x: Vec<f64>,
    /// Component names, e.g. `rho, m, E`.
    pub names: Vec<&'static str>,
    /// `columns[m][j]`: component `m` in cell `j`; extra columns such as
    /// the bottom follow the model components.
    pub columns: Vec<Vec<f64>>,
    /// Headers of the extra columns.
    pub extra: Vec<&'static str>,
}

impl Snapshot {
    fn from_field<const M: usize>(field: &Field<M>, names: &[&'static str]) -> Self {
        Self {
            time: field.time,
            x: field.grid.centers().to_vec(),
            names: names.to_vec(),
            columns: (0..M).map(|m| field.component(m)).collect(),
            extra: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let i = self.names.iter().chain(&self.extra).position(|n| *n == name)?;
        Some(&self.columns[i])
    }

    /// Solution table `x,comp0,comp1,...` followed by extra columns.
    pub fn to_table(&self, meta: &[(String, String)]) -> Table {
        let comps: Vec<String> = (0..self.names.len()).map(|m| format!("comp{m}")).collect();
        let mut header: Vec<&str> = vec!["x"];
        header.extend(comps.iter().map(String::as_str));
        header.extend(self.extra.iter().copied());
        let mut t = Table::new(&header);
        t.meta = meta.to_vec();
        t.meta.push(("components".into(), self.names.join(",")));
        t.meta.push(("time".into(), format!("{:.16e}", self.time)));
        for j in 0..self.x.len() {
            let mut row = vec![Value::Real(self.x[j])];
            row.extend(self.columns.iter().map(|c| Value::Real(c[j])));
            t.push(row);
        }
        t
    }
}

/// Result of a named test run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub snapshots: Vec<Snapshot>,
    pub stats: StepStats,
    pub seconds: f64,
    pub meta: Vec<(String, String)>,
}

impl RunOutcome {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("at least one snapshot")
    }

    pub fn tables(&self) -> Vec<Table> {
        self.snapshots.iter().map(|s| s.to_table(&self.meta)).collect()
    }
}

/// Advances `field` through `times` (increasing), keeping a copy at each.
fn evolve<const M: usize>(
    scheme: &impl Semidiscretization<M>,
    mut field: Field<M>,
    times: &[f64],
    cfg: &RunConfig,
) -> Result<(Vec<Field<M>>, StepStats)> {
    let mut out = Vec::with_capacity(times.len());
    let mut stats = StepStats::default();
    for &t in times {
        let s = advance_to(scheme, &mut field, t, cfg)?;
        stats.steps += s.steps;
        stats.rhs_evaluations += s.rhs_evaluations;
        out.push(field.clone());
    }
    Ok((out, stats))
}

/// Average of a piecewise constant function with one jump at `x0`.
fn step_average(left: f64, right: f64, x0: f64, (lo, hi): (f64, f64)) -> f64 {
    let cut = x0.clamp(lo, hi);
    (left * (cut - lo) + right * (hi - cut)) / (hi - lo)
}

fn wrap(x: f64, a: f64, b: f64) -> f64 {
    a + (x - a).rem_euclid(b - a)
}

/// Initial data of the advection tests.
pub fn advection_initial(test: TestId, x: f64) -> f64 {
    match test {
        TestId::AdvectHigh => {
            let y = wrap(x, -1.0, 1.0);
            (PI * y).sin() + 0.25 * (15.0 * PI * y).sin() * (-20.0 * y * y).exp()
        }
        _ => (PI * x - (PI * x).sin() / PI).sin(),
    }
}

/// Exact cell averages of an advection test at time `t`.
pub fn advection_exact(test: TestId, grid: &Grid1D, t: f64) -> Field<1> {
    let mut f = Field::from_fn(grid.clone(), |x| [advection_initial(test, wrap(x - t, -1.0, 1.0))]);
    f.time = t;
    f
}

/// Smooth shallow water data: bottom, depth and discharge.
pub fn swe_smooth_bottom() -> Topography {
    Topography::analytic(|x| (PI * x).sin().powi(2), |x| PI * (2.0 * PI * x).sin())
}

pub fn swe_smooth_initial(x: f64) -> [f64; 2] {
    let c = (2.0 * PI * x).cos();
    [5.0 + c.exp(), c.sin()]
}

pub fn dam_break_bottom() -> Topography {
    Topography::analytic(|x| 0.3 * (-10.0 * x * x).exp(), |x| -6.0 * x * (-10.0 * x * x).exp())
}

/// Bottom cell averages drawn uniformly from `[0, 1)`.
pub fn rough_bottom(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()
}

fn swe_scheme(test: TestId, bottom: Topography, grid: &Grid1D, cfg: &RunConfig, opts: &Options) -> Result<SweScheme> {
    let model = ShallowWater::new(opts.gravity_for(test), bottom)?;
    if cfg.well_balanced {
        Ok(SweScheme::Balanced(WellBalancedSwe::new(model, grid.clone(), cfg)?))
    } else {
        Ok(SweScheme::Plain(FvScheme::new(model, grid.clone(), cfg)?))
    }
}

/// Either shallow water discretization behind one type.
enum SweScheme {
    Balanced(WellBalancedSwe),
    Plain(FvScheme<2, ShallowWater>),
}

impl SweScheme {
    fn bottom_averages(&self, grid: &Grid1D) -> Vec<f64> {
        match self {
            SweScheme::Balanced(s) => s.bottom_averages().to_vec(),
            SweScheme::Plain(s) => match s.model().bottom() {
                Topography::CellAverages(v) => v.clone(),
                bottom => Field::from_fn(grid.clone(), |x| [bottom.value(x).unwrap_or(0.0)]).component(0),
            },
        }
    }
}

impl Semidiscretization<2> for SweScheme {
    fn grid(&self) -> &Grid1D {
        match self {
            SweScheme::Balanced(s) => s.grid(),
            SweScheme::Plain(s) => s.grid(),
        }
    }

    fn order(&self) -> usize {
        match self {
            SweScheme::Balanced(s) => s.order(),
            SweScheme::Plain(s) => s.order(),
        }
    }

    fn rhs(&self, u: &[[f64; 2]], t: f64, out: &mut [[f64; 2]]) -> Result<()> {
        match self {
            SweScheme::Balanced(s) => s.rhs(u, t, out),
            SweScheme::Plain(s) => s.rhs(u, t, out),
        }
    }

    fn max_wave_speed(&self, u: &[[f64; 2]]) -> f64 {
        match self {
            SweScheme::Balanced(s) => s.max_wave_speed(u),
            SweScheme::Plain(s) => s.max_wave_speed(u),
        }
    }
}

/// Runs a named test on `n` cells (`None`: the test's default size) and
/// returns the solution at the output times. With `opts.t_end` set, only
/// that time is returned.
pub fn run_named_test(test: TestId, n: Option<usize>, opts: &Options) -> Result<RunOutcome> {
    let setup = test.setup();
    let n = n.unwrap_or(setup.n);
    let times = match opts.t_end {
        Some(t) => vec![t],
        None => setup.times.clone(),
    };
    let t_last = *times.last().expect("non-empty");
    let cfg = opts.run_config(test, t_last)?;
    let grid = opts.grid(&setup, n)?;
    let meta = opts.metadata(test, &n.to_string(), &cfg);
    let start = Instant::now();
    let (snapshots, stats) = match test {
        TestId::AdvectLow | TestId::AdvectHigh => {
            let scheme = FvScheme::new(Advection, grid.clone(), &cfg)?;
            let field = advection_exact(test, &grid, 0.0);
            let (fields, stats) = evolve(&scheme, field, &times, &cfg)?;
            (fields.iter().map(|f| Snapshot::from_field(f, &["u"])).collect(), stats)
        }
        TestId::Burgers => {
            let scheme = FvScheme::new(Burgers, grid.clone(), &cfg)?;
            let field = Field::from_fn(grid, |x| [burgers_initial(x)]);
            let (fields, stats) = evolve(&scheme, field, &times, &cfg)?;
            (fields.iter().map(|f| Snapshot::from_field(f, &["u"])).collect(), stats)
        }
        TestId::Lax => {
            let e = Euler::new(1.4)?;
            let (l, r) = (e.conserved(0.445, 0.6989, 3.5277), e.conserved(0.5, 0.0, 0.571));
            let values = (0..n).map(|j| piecewise_state(&l, &r, 0.0, grid.cell(j))).collect();
            let field = Field::new(grid.clone(), values)?;
            let scheme = FvScheme::new(e, grid, &cfg)?;
            let (fields, stats) = evolve(&scheme, field, &times, &cfg)?;
            (fields.iter().map(|f| Snapshot::from_field(f, &["rho", "m", "E"])).collect(), stats)
        }
        TestId::RadialSod => {
            let model = EulerRadial::new(1.4, opts.radial_dim)?;
            let e = *model.euler();
            let (inner, outer) = (e.conserved(1.0, 0.0, 1.0), e.conserved(0.125, 0.0, 0.1));
            let values = (0..n)
                .map(|j| {
                    let (lo, hi) = grid.cell(j);
                    // symmetric data: inner state on |x| < 0.5
                    let left = piecewise_state(&outer, &inner, -0.5, (lo, hi));
                    let right = piecewise_state(&inner, &outer, 0.5, (lo, hi));
                    std::array::from_fn(|m| left[m] + right[m] - inner[m])
                })
                .collect();
            let field = Field::new(grid.clone(), values)?;
            let scheme = FvScheme::new(model, grid, &cfg)?;
            let (fields, stats) = evolve(&scheme, field, &times, &cfg)?;
            (fields.iter().map(|f| Snapshot::from_field(f, &["rho", "m", "E"])).collect(), stats)
        }
        TestId::SweSmooth | TestId::LakeAtRest | TestId::DamBreak => {
            let bottom = match test {
                TestId::SweSmooth => swe_smooth_bottom(),
                TestId::DamBreak => dam_break_bottom(),
                _ => Topography::CellAverages(rough_bottom(n, opts.seed)),
            };
            let scheme = swe_scheme(test, bottom, &grid, &cfg, opts)?;
            let zbar = scheme.bottom_averages(&grid);
            let field = match test {
                TestId::SweSmooth => Field::from_fn(grid.clone(), swe_smooth_initial),
                TestId::DamBreak => {
                    let values = (0..n)
                        .map(|j| [step_average(1.5, 0.5, 0.0, grid.cell(j)) - zbar[j], 0.0])
                        .collect();
                    Field::new(grid.clone(), values)?
                }
                _ => Field::new(grid.clone(), zbar.iter().map(|z| [LAKE_LEVEL - z, 0.0]).collect())?,
            };
            let (fields, stats) = evolve(&scheme, field, &times, &cfg)?;
            let snaps = fields
                .iter()
                .map(|f| {
                    let mut s = Snapshot::from_field(f, &["h", "q"]);
                    s.columns.push(zbar.clone());
                    s.extra.push("bottom");
                    s
                })
                .collect();
            (snaps, stats)
        }
    };
    Ok(RunOutcome { snapshots, stats, seconds: start.elapsed().as_secs_f64(), meta })
}

pub fn burgers_initial(x: f64) -> f64 {
    0.2 - (PI * x).sin() + (2.0 * PI * x).sin()
}

fn piecewise_state<const M: usize>(left: &[f64; M], right: &[f64; M], x0: f64, cell: (f64, f64)) -> [f64; M] {
    std::array::from_fn(|m| step_average(left[m], right[m], x0, cell))
}

/// Lake-at-rest preservation on a rough bottom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WellBalanceReport {
    pub n: usize,
    pub order: usize,
    pub time: f64,
    /// `max_j |q_j|`.
    pub max_discharge: f64,
    /// `max_j |h_j + z_j - level|`.
    pub max_surface: f64,
    pub steps: usize,
}

pub fn run_well_balance(n: usize, opts: &Options) -> Result<WellBalanceReport> {
    let out = run_named_test(TestId::LakeAtRest, Some(n), opts)?;
    let s = out.last();
    let (h, q, z) = (s.column("h").unwrap(), s.column("q").unwrap(), s.column("bottom").unwrap());
    let max_discharge = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_surface = h.iter().zip(z).fold(0.0f64, |m, (h, z)| m.max((h + z - LAKE_LEVEL).abs()));
    Ok(WellBalanceReport { n, order: opts.order, time: s.time, max_discharge, max_surface, steps: out.stats.steps })
}

pub fn well_balance_table(reports: &[WellBalanceReport], opts: &Options) -> Table {
    let mut t = Table::new(&["order", "N", "max_q", "max_surface"])
        .meta("test", TestId::LakeAtRest)
        .meta("d0", opts.d0)
        .meta("eps", opts.eps_label())
        .meta("seed", opts.seed)
        .meta("time", reports.first().map_or(0.0, |r| r.time));
    for r in reports {
        t.push(vec![r.order.into(), r.n.into(), r.max_discharge.into(), r.max_surface.into()]);
    }
    t
}

/// `sum_j h_j |u_j - ref_j|` summed over components.
///
/// A reference on a grid refined by an integer factor, with nested
/// cells, is first restricted by exact averaging.
pub fn error_1norm<const M: usize>(field: &Field<M>, reference: &Field<M>) -> Result<f64> {
    Ok(error_1norm_components(field, reference)?.iter().sum())
}

/// The terms of [`error_1norm`], one per component.
pub fn error_1norm_components<const M: usize>(field: &Field<M>, reference: &Field<M>) -> Result<[f64; M]> {
    let (n, nr) = (field.len(), reference.len());
    if n == 0 || nr % n != 0 {
        return invalid(format!("cannot compare {n} cells with a reference of {nr} cells"));
    }
    let r = nr / n;
    let (edges, ref_edges) = (field.grid.edges(), reference.grid.edges());
    let tol = 1e-12 * (field.grid.b() - field.grid.a()).abs();
    if (0..=n).any(|j| (edges[j] - ref_edges[j * r]).abs() > tol) {
        return invalid("reference cells are not nested in the field's cells");
    }
    let sizes = reference.grid.sizes();
    let mut err = [0.0; M];
    for j in 0..n {
        let h = field.grid.sizes()[j];
        for (m, e) in err.iter_mut().enumerate() {
            let avg: f64 = (j * r..(j + 1) * r).map(|k| sizes[k] * reference.values[k][m]).sum::<f64>() / h;
            *e += h * (field.values[j][m] - avg).abs();
        }
    }
    Ok(err)
}

/// Total variation `sum_j |u_{j+1} - u_j|`, periodic when asked.
pub fn total_variation(u: &[f64], periodic: bool) -> f64 {
    let mut tv: f64 = u.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    if periodic && u.len() > 1 {
        tv += (u[0] - u[u.len() - 1]).abs();
    }
    tv
}
