//! One-dimensional cell partitions and ghost-cell padding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// Boundary treatment applied when padding cell data with ghost cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    /// Zeroth-order extrapolation: ghosts copy the nearest interior cell.
    Outflow,
    /// Mirror image; components flagged odd by the model change sign.
    Reflective,
}

impl std::str::FromStr for Boundary {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "outflow" | "free" => Ok(Boundary::Outflow),
            "reflective" => Ok(Boundary::Reflective),
            other => invalid(format!("unknown boundary tag `{other}`")),
        }
    }
}

/// A partition of `[a, b]` into `N` cells.
///
/// Immutable once built; cell sizes and centres are derived from the edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    edges: Vec<f64>,
    sizes: Vec<f64>,
    centers: Vec<f64>,
    bc: Boundary,
    uniform: bool,
}

impl Grid1D {
    /// `N` equal cells on `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize, bc: Boundary) -> Result<Self> {
        check_interval(a, b, n)?;
        let len = b - a;
        let mut edges: Vec<f64> = (0..=n).map(|j| a + len * (j as f64) / (n as f64)).collect();
        edges[n] = b;
        let mut grid = Self::assemble(edges, bc);
        grid.uniform = true;
        Ok(grid)
    }

    /// Seeded random partition whose extreme size ratio is bounded by `ratio_max`.
    ///
    /// Unit sizes are perturbed by a uniform variable in `[-θ, θ]` with
    /// `(1 + θ) / (1 - θ) < ratio_max` and then rescaled to fill `[a, b]`.
    /// `ratio_max == 1` yields exactly [`Grid1D::uniform`].
    pub fn random_nonuniform(
        a: f64,
        b: f64,
        n: usize,
        seed: u64,
        ratio_max: f64,
        bc: Boundary,
    ) -> Result<Self> {
        check_interval(a, b, n)?;
        if !(ratio_max >= 1.0) {
            return invalid(format!("ratio_max must be >= 1, got {ratio_max}"));
        }
        if ratio_max == 1.0 {
            return Self::uniform(a, b, n, bc);
        }
        let theta = (ratio_max - 1.0) / (ratio_max + 1.0) * 0.999;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..n).map(|_| 1.0 + theta * rng.gen_range(-1.0..=1.0)).collect();
        let total: f64 = raw.iter().sum();
        let scale = (b - a) / total;
        let mut edges = Vec::with_capacity(n + 1);
        let mut acc = a;
        edges.push(a);
        for s in &raw[..n - 1] {
            acc += s * scale;
            edges.push(acc);
        }
        edges.push(b);
        Ok(Self::assemble(edges, bc))
    }

    /// Builds a grid from explicit, strictly increasing edges.
    pub fn from_edges(edges: Vec<f64>, bc: Boundary) -> Result<Self> {
        if edges.len() < 2 {
            return invalid("a grid needs at least two edges");
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) || edges.iter().any(|e| !e.is_finite()) {
            return invalid("grid edges must be finite and strictly increasing");
        }
        Ok(Self::assemble(edges, bc))
    }

    fn assemble(edges: Vec<f64>, bc: Boundary) -> Self {
        let sizes = edges.windows(2).map(|w| w[1] - w[0]).collect();
        let centers = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Self { edges, sizes, centers, bc, uniform: false }
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn a(&self) -> f64 {
        self.edges[0]
    }

    pub fn b(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn bc(&self) -> Boundary {
        self.bc
    }

    /// True when built by [`Grid1D::uniform`]; reconstruction then uses the
    /// constant coefficient tables in scaled coordinates.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Nominal cell size of a uniform grid.
    pub fn uniform_size(&self) -> Option<f64> {
        self.uniform.then(|| (self.b() - self.a()) / self.len() as f64)
    }

    pub fn min_size(&self) -> f64 {
        self.sizes.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_size(&self) -> f64 {
        self.sizes.iter().copied().fold(0.0, f64::max)
    }

    /// Cell `j` as `(left edge, right edge)`.
    pub fn cell(&self, j: usize) -> (f64, f64) {
        (self.edges[j], self.edges[j + 1])
    }

    pub fn with_bc(&self, bc: Boundary) -> Self {
        Self { bc, ..self.clone() }
    }
}

fn check_interval(a: f64, b: f64, n: usize) -> Result<()> {
    if n == 0 {
        return invalid("number of cells must be at least 1");
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return invalid(format!("interval [{a}, {b}] is empty or not finite"));
    }
    Ok(())
}

/// Ghost-cell layout: `width` cells on each side filled according to `bc`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GhostPad {
    pub width: usize,
    pub bc: Boundary,
}

impl GhostPad {
    pub fn new(width: usize, bc: Boundary) -> Self {
        Self { width, bc }
    }

    /// Interior cell feeding padded position `k` (interior cells are
    /// `0..n`), and whether the value is mirrored.
    pub fn source(&self, n: usize, k: isize) -> (usize, bool) {
        let ni = n as isize;
        if (0..ni).contains(&k) {
            return (k as usize, false);
        }
        match self.bc {
            Boundary::Periodic => (k.rem_euclid(ni) as usize, false),
            Boundary::Outflow => (k.clamp(0, ni - 1) as usize, false),
            Boundary::Reflective => {
                let m = if k < 0 { -1 - k } else { 2 * ni - 1 - k };
                (m.clamp(0, ni - 1) as usize, true)
            }
        }
    }

    /// Cell sizes extended by `width` ghosts per side; index `i` of the
    /// result corresponds to cell `i - width`.
    pub fn pad_sizes(&self, grid: &Grid1D) -> Vec<f64> {
        self.pad(grid.sizes(), |h| h)
    }

    /// Pads `data` (one entry per interior cell). `mirror` is applied to
    /// entries copied by a reflective boundary.
    pub fn pad<T: Copy>(&self, data: &[T], mirror: impl Fn(T) -> T) -> Vec<T> {
        let n = data.len();
        let w = self.width as isize;
        (-w..n as isize + w)
            .map(|k| {
                let (src, mirrored) = self.source(n, k);
                if mirrored {
                    mirror(data[src])
                } else {
                    data[src]
                }
            })
            .collect()
    }
}
