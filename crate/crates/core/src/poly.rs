//! Difference tables of cell averages and interpolating polynomials in
//! monomial form.
//!
//! The degree-`k` polynomial with stencil offset `r` interpolates (in the
//! sense of cell averages) the cells `-r, ..., -r + k` around a reference
//! cell `0`. It is the derivative of the Newton interpolant of the
//! primitive `S_i = sum_{l <= i} h_l u_l` through the cell edges, written as
//!
//! ```text
//! p(x) = sum_{i=1}^{k+1} delta_{-r,i} sum_{m=1}^{i} Gamma_{r,i,m} x^(m-1)
//! ```
//!
//! where `delta` are divided (or, on uniform grids in the scaled variable
//! `x / h`, undivided) differences of the averages and `Gamma_{r,i,m}` is
//! `m` times the coefficient of `x^m` in `prod_{l<i} (x - x_{l-r-1/2})`.

use crate::error::{invalid, Result};

/// Highest polynomial degree handled (`G = 2g` for order 9).
pub const MAX_DEGREE: usize = 8;
/// Widest stencil handled (`2g + 1` for order 9).
pub const MAX_STENCIL: usize = MAX_DEGREE + 1;
/// Largest offset with a precomputed uniform table.
pub const MAX_UNIFORM_OFFSET: usize = 4;

/// Polynomial `sum_i a_i ((x - center) / scale)^i`.
///
/// `scale == 1` stores it in physical coordinates; `scale == h` in the
/// scaled variable used on uniform grids.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Poly {
    center: f64,
    scale: f64,
    degree: usize,
    coeffs: [f64; MAX_DEGREE + 1],
}

impl Poly {
    pub fn new(center: f64, scale: f64, coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > MAX_DEGREE + 1 {
            return invalid(format!(
                "polynomial needs between 1 and {} coefficients, got {}",
                MAX_DEGREE + 1,
                coeffs.len()
            ));
        }
        if !(scale > 0.0) {
            return invalid("polynomial scale must be positive");
        }
        let mut c = [0.0; MAX_DEGREE + 1];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Self { center, scale, degree: coeffs.len() - 1, coeffs: c })
    }

    pub fn constant(center: f64, scale: f64, value: f64) -> Self {
        let mut coeffs = [0.0; MAX_DEGREE + 1];
        coeffs[0] = value;
        Self { center, scale, degree: 0, coeffs }
    }

    pub(crate) fn zero(center: f64, scale: f64, degree: usize) -> Self {
        Self { center, scale, degree, coeffs: [0.0; MAX_DEGREE + 1] }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..=self.degree]
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs[..=self.degree]
    }

    /// Horner evaluation at physical `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_scaled((x - self.center) / self.scale)
    }

    /// Horner evaluation in the stored variable `xi = (x - center) / scale`.
    pub fn eval_scaled(&self, xi: f64) -> f64 {
        self.coeffs()
            .iter()
            .rev()
            .fold(0.0, |acc, &a| acc * xi + a)
    }

    /// Exact mean over `[lo, hi]` from the antiderivative.
    pub fn cell_average(&self, lo: f64, hi: f64) -> f64 {
        let s = self.scale;
        let (u, v) = ((lo - self.center) / s, (hi - self.center) / s);
        let prim = |xi: f64| {
            self.coeffs()
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (i, &a)| acc * xi + a / (i + 1) as f64)
                * xi
        };
        (prim(v) - prim(u)) * s / (hi - lo)
    }

    /// Derivative with respect to physical `x`.
    pub fn derivative(&self) -> Self {
        let mut d = Self::zero(self.center, self.scale, self.degree.saturating_sub(1));
        for i in 1..=self.degree {
            d.coeffs[i - 1] = self.coeffs[i] * i as f64 / self.scale;
        }
        d
    }

    /// Same polynomial expressed with a different scale.
    pub fn rescaled(&self, scale: f64) -> Self {
        let ratio = scale / self.scale;
        let mut out = *self;
        out.scale = scale;
        let mut f = 1.0;
        for a in out.coeffs_mut() {
            *a *= f;
            f *= ratio;
        }
        out
    }

    /// `self += w * other`; both must share centre and scale.
    pub(crate) fn add_scaled(&mut self, w: f64, other: &Poly) {
        debug_assert_eq!(self.scale, other.scale);
        if other.degree > self.degree {
            self.degree = other.degree;
        }
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs()) {
            *a += w * b;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffMode {
    Divided,
    Undivided,
}

/// Triangular table `delta_{j,p}` for `j` in `base .. base + len` and
/// `1 <= p <= len - (j - base)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffTable {
    base: isize,
    len: usize,
    mode: DiffMode,
    values: Vec<f64>,
}

impl DiffTable {
    /// `sizes` is ignored in undivided mode.
    pub fn build(base: isize, averages: &[f64], sizes: &[f64], mode: DiffMode) -> Result<Self> {
        let mut t = Self { base, len: 0, mode, values: Vec::new() };
        t.rebuild(base, averages, sizes, mode)?;
        Ok(t)
    }

    pub fn divided(base: isize, averages: &[f64], sizes: &[f64]) -> Result<Self> {
        Self::build(base, averages, sizes, DiffMode::Divided)
    }

    pub fn undivided(base: isize, averages: &[f64]) -> Result<Self> {
        Self::build(base, averages, &[], DiffMode::Undivided)
    }

    /// Recomputes the table in place, reusing the allocation.
    pub fn rebuild(
        &mut self,
        base: isize,
        averages: &[f64],
        sizes: &[f64],
        mode: DiffMode,
    ) -> Result<()> {
        let n = averages.len();
        if n == 0 {
            return invalid("difference table needs at least one average");
        }
        if mode == DiffMode::Divided {
            if sizes.len() != n {
                return invalid(format!("{} averages but {} cell sizes", n, sizes.len()));
            }
            if sizes.iter().any(|&h| !(h > 0.0)) {
                return invalid("cell sizes must be positive");
            }
        }
        self.base = base;
        self.len = n;
        self.mode = mode;
        self.values.clear();
        self.values.resize(n * (n + 1) / 2, 0.0);
        self.values[..n].copy_from_slice(averages);
        for p in 2..=n {
            let prev = Self::row_offset(n, p - 1);
            let cur = Self::row_offset(n, p);
            for j in 0..=(n - p) {
                let width = match mode {
                    DiffMode::Divided => sizes[j..j + p].iter().sum::<f64>(),
                    DiffMode::Undivided => p as f64,
                };
                self.values[cur + j] = (self.values[prev + j + 1] - self.values[prev + j]) / width;
            }
        }
        Ok(())
    }

    fn row_offset(len: usize, p: usize) -> usize {
        (p - 1) * len - (p - 1) * (p.saturating_sub(2)) / 2
    }

    pub fn base(&self) -> isize {
        self.base
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mode(&self) -> DiffMode {
        self.mode
    }

    /// `delta_{j,p}`, or `None` outside the table.
    pub fn get(&self, j: isize, p: usize) -> Option<f64> {
        let off = j - self.base;
        if p == 0 || off < 0 || off as usize + p > self.len {
            return None;
        }
        Some(self.values[Self::row_offset(self.len, p) + off as usize])
    }

    #[inline]
    fn at(&self, off: usize, p: usize) -> f64 {
        self.values[Self::row_offset(self.len, p) + off]
    }
}

/// Uniform-grid table `Gamma[r][i][m] = m * gamma_{r,i,m}` for
/// `r <= MAX_UNIFORM_OFFSET`, `1 <= m <= i <= MAX_STENCIL`.
pub const UNIFORM_GAMMA: [[[f64; MAX_STENCIL + 1]; MAX_STENCIL + 1]; MAX_UNIFORM_OFFSET + 1] =
    uniform_gamma_table();

const fn uniform_gamma_table() -> [[[f64; MAX_STENCIL + 1]; MAX_STENCIL + 1]; MAX_UNIFORM_OFFSET + 1]
{
    let mut table = [[[0.0; MAX_STENCIL + 1]; MAX_STENCIL + 1]; MAX_UNIFORM_OFFSET + 1];
    let mut r = 0;
    while r <= MAX_UNIFORM_OFFSET {
        let mut i = 1;
        while i <= MAX_STENCIL {
            let mut c = [0.0; MAX_STENCIL + 1];
            c[0] = 1.0;
            let mut l = 0;
            while l < i {
                let node = l as f64 - r as f64 - 0.5;
                let mut k = l + 1;
                while k > 0 {
                    c[k] = c[k - 1] - node * c[k];
                    k -= 1;
                }
                c[0] = -node * c[0];
                l += 1;
            }
            let mut m = 1;
            while m <= i {
                table[r][i][m] = m as f64 * c[m];
                m += 1;
            }
            i += 1;
        }
        r += 1;
    }
    table
}

/// Coefficients `c_0..c_n` of `prod (x - node)` by repeated convolution.
pub fn expand_node_product(nodes: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; nodes.len() + 1];
    c[0] = 1.0;
    for (l, &node) in nodes.iter().enumerate() {
        for k in (1..=l + 1).rev() {
            c[k] = c[k - 1] - node * c[k];
        }
        c[0] *= -node;
    }
    c
}

/// `gamma_{r,i,m}` on a uniform grid in the scaled variable; 0 for `m > i`.
pub fn gamma_uniform(r: usize, i: usize, m: usize) -> f64 {
    if m == 0 || m > i {
        return 0.0;
    }
    if r <= MAX_UNIFORM_OFFSET && i <= MAX_STENCIL {
        return UNIFORM_GAMMA[r][i][m] / m as f64;
    }
    let nodes: Vec<f64> = (0..i).map(|l| l as f64 - r as f64 - 0.5).collect();
    expand_node_product(&nodes)[m]
}

/// Left edge of cell `o` relative to the centre of cell 0.
///
/// `sizes[center]` is the size of cell 0.
fn left_edge(o: isize, sizes: &[f64], center: usize) -> Option<f64> {
    let c = center as isize;
    let h0 = *sizes.get(center)?;
    if o <= 0 {
        let mut x = -0.5 * h0;
        for q in o..0 {
            x -= sizes.get(usize::try_from(c + q).ok()?)?;
        }
        Some(x)
    } else {
        let mut x = 0.5 * h0;
        for q in 1..o {
            x += sizes.get(usize::try_from(c + q).ok()?)?;
        }
        Some(x)
    }
}

fn nonuniform_nodes(r: usize, i: usize, sizes: &[f64], center: usize) -> Result<Vec<f64>> {
    (0..i)
        .map(|l| {
            left_edge(l as isize - r as isize, sizes, center).ok_or_else(|| {
                crate::Error::InvalidArgument(format!(
                    "neighbour sizes do not cover offset {} with {} terms",
                    r, i
                ))
            })
        })
        .collect()
}

/// `tilde gamma_{r,i,m}` on a non-uniform grid in physical coordinates
/// centred on cell 0, whose size is `sizes[center]`.
pub fn gamma_nonuniform(r: usize, i: usize, m: usize, sizes: &[f64], center: usize) -> Result<f64> {
    if m == 0 {
        return invalid("m must be at least 1");
    }
    if m > i {
        return Ok(0.0);
    }
    let nodes = nonuniform_nodes(r, i, sizes, center)?;
    Ok(expand_node_product(&nodes)[m])
}

/// Lower-triangular `Gamma_{r,i,m}` (`1 <= m <= i <= size`) for one offset.
///
/// Entries do not depend on the interpolation degree, so a table of size
/// `s` serves every degree `k < s`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaTable {
    r: usize,
    size: usize,
    scale: f64,
    entries: [[f64; MAX_STENCIL + 1]; MAX_STENCIL + 1],
}

impl GammaTable {
    /// Scaled-variable table for a uniform grid of cell size `h`.
    pub fn uniform(r: usize, size: usize, h: f64) -> Result<Self> {
        if size == 0 || size > MAX_STENCIL {
            return invalid(format!("table size must be in 1..={MAX_STENCIL}"));
        }
        let mut entries = [[0.0; MAX_STENCIL + 1]; MAX_STENCIL + 1];
        for (i, row) in entries.iter_mut().enumerate().take(size + 1).skip(1) {
            for (m, e) in row.iter_mut().enumerate().take(i + 1).skip(1) {
                *e = m as f64 * gamma_uniform(r, i, m);
            }
        }
        Ok(Self { r, size, scale: h, entries })
    }

    /// Physical-coordinate table for the cell at `sizes[center]`.
    pub fn nonuniform(r: usize, size: usize, sizes: &[f64], center: usize) -> Result<Self> {
        if size == 0 || size > MAX_STENCIL {
            return invalid(format!("table size must be in 1..={MAX_STENCIL}"));
        }
        let nodes = nonuniform_nodes(r, size, sizes, center)?;
        let mut entries = [[0.0; MAX_STENCIL + 1]; MAX_STENCIL + 1];
        for i in 1..=size {
            let c = expand_node_product(&nodes[..i]);
            for m in 1..=i {
                entries[i][m] = m as f64 * c[m];
            }
        }
        Ok(Self { r, size, scale: 1.0, entries })
    }

    pub fn offset(&self) -> usize {
        self.r
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Scale of the polynomials this table produces.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `Gamma_{r,i,m}`; zero outside the triangle.
    pub fn get(&self, i: usize, m: usize) -> f64 {
        if i == 0 || i > self.size || m == 0 || m > i {
            0.0
        } else {
            self.entries[i][m]
        }
    }
}

/// Degree-`k` interpolant with offset `r` centred at `center`.
///
/// `diffs` must be divided differences for a physical table and undivided
/// differences for a scaled uniform table.
pub fn interpolant(
    k: usize,
    r: usize,
    diffs: &DiffTable,
    table: &GammaTable,
    center: f64,
) -> Result<Poly> {
    if k > MAX_DEGREE {
        return invalid(format!("degree {k} exceeds {MAX_DEGREE}"));
    }
    if table.r != r || table.size < k + 1 {
        return invalid(format!(
            "gamma table (offset {}, size {}) cannot build degree {} with offset {}",
            table.r, table.size, k, r
        ));
    }
    let start = -(r as isize) - diffs.base;
    if start < 0 || start as usize + k + 1 > diffs.len {
        return invalid(format!(
            "stencil of offset {r} and degree {k} exceeds the difference table"
        ));
    }
    let mut p = Poly::zero(center, table.scale, k);
    interpolant_into(k, start as usize, diffs, table, &mut p);
    Ok(p)
}

#[inline]
pub(crate) fn interpolant_into(
    k: usize,
    start: usize,
    diffs: &DiffTable,
    table: &GammaTable,
    out: &mut Poly,
) {
    out.degree = k;
    out.coeffs = [0.0; MAX_DEGREE + 1];
    for i in 1..=k + 1 {
        let d = diffs.at(start, i);
        let row = &table.entries[i];
        for m in 1..=i {
            out.coeffs[m - 1] += d * row[m];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_data_has_vanishing_differences() {
        let t = DiffTable::divided(0, &[2.5; 4], &[0.3, 0.1, 0.7, 0.2]).unwrap();
        for p in 2..=4 {
            for j in 0..=(4 - p) as isize {
                assert_eq!(t.get(j, p), Some(0.0));
            }
        }
    }

    #[test]
    fn two_point_slope() {
        let t = DiffTable::divided(0, &[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(t.get(0, 2), Some(0.5));
        assert_eq!(t.get(0, 3), None);
        assert_eq!(t.get(1, 2), None);
    }

    #[test]
    fn linear_function_differences() {
        // averages of u(x) = x on cells of size 0.25 are the centres
        let h = 0.25;
        let avg: Vec<f64> = (0..6).map(|j| (j as f64 + 0.5) * h).collect();
        let t = DiffTable::divided(0, &avg, &[h; 6]).unwrap();
        for j in 0..5 {
            assert_relative_eq!(t.get(j, 2).unwrap(), 0.5, epsilon = 1e-14);
        }
        for j in 0..4 {
            assert!(t.get(j, 3).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(DiffTable::divided(0, &[1.0, 2.0], &[1.0]).is_err());
        assert!(DiffTable::undivided(0, &[]).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(1.0 * gamma_uniform(0, 3, 1), -0.25);
        assert_eq!(2.0 * gamma_uniform(0, 3, 2), -3.0);
        assert_eq!(3.0 * gamma_uniform(0, 3, 3), 3.0);
        assert_eq!(1.0 * gamma_uniform(1, 2, 1), 2.0);
        assert_eq!(2.0 * gamma_uniform(1, 2, 2), 2.0);
        assert_eq!(7.0 * gamma_uniform(3, 7, 7), 7.0);
        assert_eq!(gamma_uniform(2, 3, 4), 0.0);
        // outside the precomputed range the product is expanded at run time
        assert_eq!(gamma_uniform(6, 11, 11), 1.0);
    }

    #[test]
    fn gamma_nonuniform_basics() {
        let sizes = [0.3, 0.9, 0.2, 0.5, 0.4];
        for r in 0..=2 {
            assert_eq!(gamma_nonuniform(r, 1, 1, &sizes, 2).unwrap(), 1.0);
        }
        for r in 0..=2 {
            for i in 1..=3 {
                for m in 1..=i {
                    let unit = gamma_nonuniform(r, i, m, &[1.0; 5], 2).unwrap();
                    assert_eq!(unit, gamma_uniform(r, i, m));
                    let h: f64 = 0.37;
                    let scaled = gamma_nonuniform(r, i, m, &[h; 5], 2).unwrap();
                    assert_relative_eq!(
                        scaled,
                        h.powi((i - m) as i32) * gamma_uniform(r, i, m),
                        max_relative = 1e-14
                    );
                }
            }
        }
        assert!(gamma_nonuniform(3, 2, 1, &sizes, 2).is_err());
    }

    /// Direct m-fold sums over subsets of excluded nodes.
    fn gamma_direct(nodes: &[f64], m: usize) -> f64 {
        let i = nodes.len();
        let mut total = 0.0;
        for mask in 0u32..(1 << i) {
            if mask.count_ones() as usize != m {
                continue;
            }
            let prod: f64 = (0..i).filter(|l| mask & (1 << l) == 0).map(|l| nodes[l]).product();
            total += prod;
        }
        if (i - m) % 2 == 1 {
            -total
        } else {
            total
        }
    }

    #[test]
    fn convolution_matches_direct_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let sizes: Vec<f64> = (0..11).map(|_| rng.gen_range(0.2..2.0)).collect();
            for r in 0..=4 {
                for i in 1..=5 {
                    let nodes = nonuniform_nodes(r, i, &sizes, 5).unwrap();
                    for m in 1..=i {
                        let direct = if m == i { 1.0 } else { gamma_direct(&nodes, m) };
                        let conv = gamma_nonuniform(r, i, m, &sizes, 5).unwrap();
                        assert_relative_eq!(conv, direct, max_relative = 1e-12, epsilon = 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn interpolant_degree_zero_and_parabola() {
        let avg = [4.0, -1.0, 7.0];
        let diffs = DiffTable::undivided(-1, &avg).unwrap();
        for r in 0..=1 {
            let t = GammaTable::uniform(r, 1, 1.0).unwrap();
            let p = interpolant(0, r, &diffs, &t, 0.0).unwrap();
            assert_eq!(p.coeffs(), &[avg[1 - r]]);
        }
        // exact averages of x^2 on unit cells centred at -1, 0, 1
        let avg: Vec<f64> = [-1.0f64, 0.0, 1.0].iter().map(|x| x * x + 1.0 / 12.0).collect();
        let diffs = DiffTable::undivided(-1, &avg).unwrap();
        let t = GammaTable::uniform(1, 3, 1.0).unwrap();
        let p = interpolant(2, 1, &diffs, &t, 0.0).unwrap();
        assert!(p.coeffs()[0].abs() < 1e-15);
        assert!(p.coeffs()[1].abs() < 1e-15);
        assert_relative_eq!(p.coeffs()[2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn interpolant_rejects_short_table() {
        let diffs = DiffTable::undivided(0, &[1.0, 2.0]).unwrap();
        let t = GammaTable::uniform(1, 3, 1.0).unwrap();
        assert!(interpolant(1, 1, &diffs, &t, 0.0).is_err());
    }

    #[test]
    fn poly_evaluation() {
        let c = Poly::constant(0.3, 1.0, 5.0);
        assert_eq!(c.eval(-17.0), 5.0);
        let h = 0.2;
        let lin = Poly::new(0.0, 1.0, &[0.0, 1.0]).unwrap();
        assert!(lin.cell_average(-h / 2.0, h / 2.0).abs() < 1e-17);
        let sq = Poly::new(0.0, 1.0, &[0.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(sq.cell_average(-0.5, 0.5), 1.0 / 12.0, epsilon = 1e-16);
        let p = Poly::new(1.0, 0.5, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.eval(1.0), 1.0);
        let q = p.rescaled(1.0);
        for x in [0.3, 1.0, 2.2] {
            assert_relative_eq!(p.eval(x), q.eval(x), max_relative = 1e-14);
        }
        let d = p.derivative();
        // d/dx [1 + 2 xi + 3 xi^2], xi = 2 (x - 1)
        assert_relative_eq!(d.eval(1.5), 4.0 + 12.0 * 1.0, max_relative = 1e-14);
    }

    /// Random averages on a random stencil; returns (averages, sizes).
    fn random_stencil(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
        let sizes = (0..n).map(|_| rng.gen_range(0.3..1.7)).collect();
        let avg = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (avg, sizes)
    }

    #[test]
    fn interpolation_exactness_on_random_stencils() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for draw in 0..200 {
            let k = draw % (MAX_DEGREE + 1);
            let r = rng.gen_range(0..=k);
            let (avg, sizes) = random_stencil(&mut rng, k + 1);
            // reference cell sits at index r of the stencil
            let diffs = DiffTable::divided(-(r as isize), &avg, &sizes).unwrap();
            let t = GammaTable::nonuniform(r, k + 1, &sizes, r).unwrap();
            let p = interpolant(k, r, &diffs, &t, 0.0).unwrap();
            let mut lo = -0.5 * sizes[r] - sizes[..r].iter().sum::<f64>();
            for l in 0..=k {
                let hi = lo + sizes[l];
                let got = crate::quadrature::average(|x| p.eval(x), lo, hi, 5);
                // relative to the magnitude of the terms summed by the monomial formula
                let terms = |x: f64| {
                    (1..=k + 1)
                        .map(|i| {
                            let d = diffs.get(-(r as isize), i).unwrap().abs();
                            d * (1..=i).map(|m| (t.get(i, m) * x.powi(m as i32 - 1)).abs()).sum::<f64>()
                        })
                        .sum::<f64>()
                };
                let scale = crate::quadrature::average(terms, lo, hi, 5).max(avg[l].abs());
                let tol = 16.0 * (k + 1) as f64 * f64::EPSILON * scale;
                assert!(
                    (got - avg[l]).abs() <= tol,
                    "k={k} r={r} cell {l}: {got} vs {}",
                    avg[l]
                );
                lo = hi;
            }
        }
    }

    #[test]
    fn newton_form_matches_monomial_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let k = rng.gen_range(1..=6);
            let r = rng.gen_range(0..=k);
            let (avg, sizes) = random_stencil(&mut rng, k + 1);
            let diffs = DiffTable::divided(-(r as isize), &avg, &sizes).unwrap();
            let t = GammaTable::nonuniform(r, k + 1, &sizes, r).unwrap();
            let p = interpolant(k, r, &diffs, &t, 0.0).unwrap();
            let nodes = nonuniform_nodes(r, k + 1, &sizes, r).unwrap();
            let newton = |x: f64| {
                (1..=k + 1)
                    .map(|i| {
                        diffs.get(-(r as isize), i).unwrap()
                            * nodes[..i].iter().map(|n| x - n).product::<f64>()
                    })
                    .sum::<f64>()
            };
            let x0 = nodes[0];
            for _ in 0..10 {
                let x = rng.gen_range(-2.0..2.0);
                let via_newton = newton(x) - newton(x0);
                let via_monomial = p.cell_average(x0, x) * (x - x0);
                assert_relative_eq!(via_newton, via_monomial, max_relative = 1e-12, epsilon = 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn divided_with_unit_sizes_is_undivided(avg in prop::collection::vec(-5.0f64..5.0, 1..10)) {
            let ones = vec![1.0; avg.len()];
            let a = DiffTable::divided(-2, &avg, &ones).unwrap();
            let b = DiffTable::undivided(-2, &avg).unwrap();
            for p in 1..=avg.len() {
                for j in 0..=(avg.len() - p) as isize {
                    prop_assert_eq!(a.get(j - 2, p), b.get(j - 2, p));
                }
            }
        }

        #[test]
        fn divided_recurrence_holds(
            avg in prop::collection::vec(-5.0f64..5.0, 2..10),
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sizes: Vec<f64> = avg.iter().map(|_| rng.gen_range(0.1..3.0)).collect();
            let t = DiffTable::divided(0, &avg, &sizes).unwrap();
            for (j, &a) in avg.iter().enumerate() {
                prop_assert_eq!(t.get(j as isize, 1), Some(a));
            }
            for p in 2..=avg.len() {
                for j in 0..=(avg.len() - p) {
                    let w: f64 = sizes[j..j + p].iter().sum();
                    let expect = (t.get(j as isize + 1, p - 1).unwrap() - t.get(j as isize, p - 1).unwrap()) / w;
                    prop_assert_eq!(t.get(j as isize, p).unwrap(), expect);
                }
            }
        }
    }
}
