//! Flux functions, wave speeds, characteristic decompositions and source
//! terms of the systems solved by the finite-volume scheme.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

/// Left and right eigenvector matrices (`left * right = I`) and the
/// eigenvalues of the flux Jacobian. `right` stores eigenvectors as columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigen<const M: usize> {
    pub left: [[f64; M]; M],
    pub right: [[f64; M]; M],
    pub lambda: [f64; M],
}

impl<const M: usize> Eigen<M> {
    pub fn identity(lambda: [f64; M]) -> Self {
        let mut id = [[0.0; M]; M];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self { left: id, right: id, lambda }
    }

    /// Characteristic variables `L u`.
    pub fn to_characteristic(&self, u: &[f64; M]) -> [f64; M] {
        mat_vec(&self.left, u)
    }

    /// Conserved variables `R w`.
    pub fn to_conserved(&self, w: &[f64; M]) -> [f64; M] {
        mat_vec(&self.right, w)
    }
}

pub(crate) fn mat_vec<const M: usize>(a: &[[f64; M]; M], v: &[f64; M]) -> [f64; M] {
    let mut out = [0.0; M];
    for (o, row) in out.iter_mut().zip(a) {
        *o = row.iter().zip(v).map(|(x, y)| x * y).sum();
    }
    out
}

/// A hyperbolic system `u_t + f(u)_x = s(u, x)` with `M` components.
pub trait Model<const M: usize>: Send + Sync {
    fn name(&self) -> &'static str;

    fn flux(&self, u: &[f64; M]) -> [f64; M];

    /// Upper bound of the spectral radius of the flux Jacobian at `u`.
    fn max_wave_speed(&self, u: &[f64; M]) -> f64;

    fn eigen(&self, u: &[f64; M]) -> Result<Eigen<M>>;

    fn has_source(&self) -> bool {
        false
    }

    fn source(&self, _u: &[f64; M], _x: f64) -> Result<[f64; M]> {
        Ok([0.0; M])
    }

    /// Components that change sign under the reflection `x -> -x`.
    fn odd_components(&self) -> [bool; M] {
        [false; M]
    }

    /// Applies the reflection sign flips to a state.
    fn mirror(&self, u: [f64; M]) -> [f64; M] {
        let odd = self.odd_components();
        let mut out = u;
        for (v, flip) in out.iter_mut().zip(odd) {
            if flip {
                *v = -*v;
            }
        }
        out
    }
}

/// Linear advection `u_t + u_x = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Advection;

impl Model<1> for Advection {
    fn name(&self) -> &'static str {
        "advection"
    }

    fn flux(&self, u: &[f64; 1]) -> [f64; 1] {
        *u
    }

    fn max_wave_speed(&self, _u: &[f64; 1]) -> f64 {
        1.0
    }

    fn eigen(&self, _u: &[f64; 1]) -> Result<Eigen<1>> {
        Ok(Eigen::identity([1.0]))
    }
}

/// Inviscid Burgers equation, flux `u^2 / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Burgers;

impl Model<1> for Burgers {
    fn name(&self) -> &'static str {
        "burgers"
    }

    fn flux(&self, u: &[f64; 1]) -> [f64; 1] {
        [0.5 * u[0] * u[0]]
    }

    fn max_wave_speed(&self, u: &[f64; 1]) -> f64 {
        u[0].abs()
    }

    fn eigen(&self, u: &[f64; 1]) -> Result<Eigen<1>> {
        Ok(Eigen::identity([u[0]]))
    }

    fn odd_components(&self) -> [bool; 1] {
        [true]
    }
}

/// Euler equations of gas dynamics for `(rho, rho u, E)` with an ideal gas law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Euler {
    gamma: f64,
}

impl Euler {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return invalid(format!("gamma must exceed 1, got {gamma}"));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pressure(&self, u: &[f64; 3]) -> f64 {
        (u[2] - 0.5 * u[1] * u[1] / u[0]) * (self.gamma - 1.0)
    }

    /// Conserved state from density, velocity and pressure.
    pub fn conserved(&self, rho: f64, vel: f64, p: f64) -> [f64; 3] {
        [rho, rho * vel, p / (self.gamma - 1.0) + 0.5 * rho * vel * vel]
    }

    /// `(rho, u, p)` from a conserved state.
    pub fn primitive(&self, u: &[f64; 3]) -> [f64; 3] {
        [u[0], u[1] / u[0], self.pressure(u)]
    }

    fn sound_speed(&self, u: &[f64; 3]) -> Result<(f64, f64, f64)> {
        let rho = u[0];
        let p = self.pressure(u);
        if !(rho > 0.0) || !(p > 0.0) {
            return Err(Error::InvalidState(format!("density {rho} and pressure {p} must be positive")));
        }
        Ok((u[1] / rho, (self.gamma * p / rho).sqrt(), p))
    }
}

impl Model<3> for Euler {
    fn name(&self) -> &'static str {
        "euler"
    }

    fn flux(&self, u: &[f64; 3]) -> [f64; 3] {
        let vel = u[1] / u[0];
        let p = self.pressure(u);
        [u[1], u[1] * vel + p, vel * (u[2] + p)]
    }

    fn max_wave_speed(&self, u: &[f64; 3]) -> f64 {
        let vel = u[1] / u[0];
        let p = self.pressure(u).max(0.0);
        vel.abs() + (self.gamma * p / u[0]).sqrt()
    }

    fn eigen(&self, u: &[f64; 3]) -> Result<Eigen<3>> {
        let (vel, c, p) = self.sound_speed(u)?;
        let enthalpy = (u[2] + p) / u[0];
        let right = [
            [1.0, 1.0, 1.0],
            [vel - c, vel, vel + c],
            [enthalpy - vel * c, 0.5 * vel * vel, enthalpy + vel * c],
        ];
        let b1 = (self.gamma - 1.0) / (c * c);
        let b2 = 0.5 * b1 * vel * vel;
        let left = [
            [0.5 * (b2 + vel / c), -0.5 * (b1 * vel + 1.0 / c), 0.5 * b1],
            [1.0 - b2, b1 * vel, -b1],
            [0.5 * (b2 - vel / c), -0.5 * (b1 * vel - 1.0 / c), 0.5 * b1],
        ];
        Ok(Eigen { left, right, lambda: [vel - c, vel, vel + c] })
    }

    fn odd_components(&self) -> [bool; 3] {
        [false, true, false]
    }
}

/// Euler equations in `n_dim`-dimensional radial symmetry, written on a
/// line through the origin: the geometric source is
/// `-(n_dim - 1) / x * (rho u, rho u^2, u p)` with signed `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerRadial {
    euler: Euler,
    n_dim: usize,
}

impl EulerRadial {
    pub fn new(gamma: f64, n_dim: usize) -> Result<Self> {
        if !(2..=3).contains(&n_dim) {
            return invalid(format!("radial symmetry needs 2 or 3 dimensions, got {n_dim}"));
        }
        Ok(Self { euler: Euler::new(gamma)?, n_dim })
    }

    pub fn euler(&self) -> &Euler {
        &self.euler
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }
}

impl Model<3> for EulerRadial {
    fn name(&self) -> &'static str {
        "euler_radial"
    }

    fn flux(&self, u: &[f64; 3]) -> [f64; 3] {
        self.euler.flux(u)
    }

    fn max_wave_speed(&self, u: &[f64; 3]) -> f64 {
        self.euler.max_wave_speed(u)
    }

    fn eigen(&self, u: &[f64; 3]) -> Result<Eigen<3>> {
        self.euler.eigen(u)
    }

    fn has_source(&self) -> bool {
        true
    }

    fn source(&self, u: &[f64; 3], x: f64) -> Result<[f64; 3]> {
        if x == 0.0 {
            return Err(Error::SingularPoint(x));
        }
        let vel = u[1] / u[0];
        let p = self.euler.pressure(u);
        let k = -((self.n_dim - 1) as f64) / x;
        Ok([k * u[1], k * u[1] * vel, k * vel * p])
    }

    fn odd_components(&self) -> [bool; 3] {
        [false, true, false]
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Bottom topography of the shallow water equations.
#[derive(Clone)]
pub enum Topography {
    Flat,
    /// Closed form `z(x)` with derivative `z'(x)`.
    Analytic { z: ScalarFn, dz: ScalarFn },
    /// Only cell averages are known (one per grid cell).
    CellAverages(Vec<f64>),
}

impl Topography {
    pub fn analytic(
        z: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dz: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Topography::Analytic { z: Arc::new(z), dz: Arc::new(dz) }
    }

    /// Point value, when known.
    pub fn value(&self, x: f64) -> Option<f64> {
        match self {
            Topography::Flat => Some(0.0),
            Topography::Analytic { z, .. } => Some(z(x)),
            Topography::CellAverages(_) => None,
        }
    }

    /// Slope, when known.
    pub fn slope(&self, x: f64) -> Option<f64> {
        match self {
            Topography::Flat => Some(0.0),
            Topography::Analytic { dz, .. } => Some(dz(x)),
            Topography::CellAverages(_) => None,
        }
    }
}

impl fmt::Debug for Topography {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topography::Flat => f.write_str("Flat"),
            Topography::Analytic { .. } => f.write_str("Analytic"),
            Topography::CellAverages(v) => write!(f, "CellAverages({} cells)", v.len()),
        }
    }
}

/// Shallow water equations for `(h, q)` over a bottom `z`, source
/// `(0, -g h z_x)`.
#[derive(Clone, Debug)]
pub struct ShallowWater {
    g: f64,
    bottom: Topography,
}

impl ShallowWater {
    pub const DEFAULT_GRAVITY: f64 = 9.81;

    pub fn new(g: f64, bottom: Topography) -> Result<Self> {
        if !(g > 0.0) {
            return invalid(format!("gravitational constant must be positive, got {g}"));
        }
        Ok(Self { g, bottom })
    }

    pub fn gravity(&self) -> f64 {
        self.g
    }

    pub fn bottom(&self) -> &Topography {
        &self.bottom
    }
}

impl Model<2> for ShallowWater {
    fn name(&self) -> &'static str {
        "swe"
    }

    fn flux(&self, u: &[f64; 2]) -> [f64; 2] {
        let (h, q) = (u[0], u[1]);
        let qq = if h > 0.0 { q * q / h } else { 0.0 };
        [q, qq + 0.5 * self.g * h * h]
    }

    fn max_wave_speed(&self, u: &[f64; 2]) -> f64 {
        let h = u[0].max(0.0);
        let vel = if h > 0.0 { u[1] / h } else { 0.0 };
        vel.abs() + (self.g * h).sqrt()
    }

    fn eigen(&self, u: &[f64; 2]) -> Result<Eigen<2>> {
        let h = u[0];
        if !(h > 0.0) {
            return Err(Error::InvalidState(format!("water height {h} must be positive")));
        }
        let vel = u[1] / h;
        let c = (self.g * h).sqrt();
        let k = 0.5 / c;
        Ok(Eigen {
            left: [[k * (vel + c), -k], [-k * (vel - c), k]],
            right: [[1.0, 1.0], [vel - c, vel + c]],
            lambda: [vel - c, vel + c],
        })
    }

    fn has_source(&self) -> bool {
        !matches!(self.bottom, Topography::Flat)
    }

    fn source(&self, u: &[f64; 2], x: f64) -> Result<[f64; 2]> {
        let dz = self.bottom.slope(x).ok_or_else(|| {
            Error::Unsupported("the pointwise source needs a topography with a known slope".into())
        })?;
        Ok([0.0, -self.g * u[0] * dz])
    }

    fn odd_components(&self) -> [bool; 2] {
        [false, true]
    }
}
