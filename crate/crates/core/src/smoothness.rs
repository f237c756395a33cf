//! Jiang-Shu regularity indicators in closed form.
//!
//! For `P(x) = sum a_i x^i` centred on a cell of width `h`,
//! `I[P] = sum_{l>=1} h^(2l-1) int (d^l P / dx^l)^2 dx` reduces to a
//! quadratic form in the cell-scaled coefficients `c_i = a_i h^i` whose
//! matrix depends only on the degree.

use crate::poly::{Poly, MAX_DEGREE};

/// Non-negative indicator value.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct IndicatorValue(pub f64);

impl IndicatorValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

const N: usize = MAX_DEGREE + 1;

/// Upper-triangular coefficients `W[j][i]`, `j <= i`, of the quadratic form
/// on a unit cell: off-diagonal pairs are counted once with a factor 2.
pub const INDICATOR_WEIGHTS: [[f64; N]; N] = indicator_weights();

const fn indicator_weights() -> [[f64; N]; N] {
    let mut w = [[0.0; N]; N];
    let mut j = 1;
    while j < N {
        let mut i = j;
        while i < N {
            if (i + j) % 2 == 0 {
                let mut total = 0.0;
                let mut l = 1;
                while l <= j {
                    // j! i! / ((j-l)! (i-l)!)
                    let falling = falling_factorial(j, l) * falling_factorial(i, l);
                    let e = (2 * l + 1) as i32 - (j + i) as i32 - if i == j { 1 } else { 0 };
                    total += falling * pow2(e) / (j + i + 1 - 2 * l) as f64;
                    l += 1;
                }
                w[j][i] = total;
            }
            i += 1;
        }
        j += 1;
    }
    w
}

const fn falling_factorial(n: usize, l: usize) -> f64 {
    let mut f = 1.0;
    let mut k = 0;
    while k < l {
        f *= (n - k) as f64;
        k += 1;
    }
    f
}

const fn pow2(e: i32) -> f64 {
    let mut v = 1.0;
    let mut k = 0;
    if e >= 0 {
        while k < e {
            v *= 2.0;
            k += 1;
        }
    } else {
        while k < -e {
            v *= 0.5;
            k += 1;
        }
    }
    v
}

/// Indicator of coefficients already scaled to the unit cell.
#[inline]
pub fn indicator_scaled(c: &[f64]) -> f64 {
    let mut total = 0.0;
    for j in 1..c.len() {
        if c[j] == 0.0 {
            continue;
        }
        let row = &INDICATOR_WEIGHTS[j];
        let mut s = 0.0;
        let mut i = j;
        while i < c.len() {
            s += row[i] * c[i];
            i += 2;
        }
        total += c[j] * s;
    }
    total.max(0.0)
}

/// Jiang-Shu indicator of `p` on the cell of width `cell_width` centred at
/// `p.center()`.
pub fn jiang_shu(p: &Poly, cell_width: f64) -> IndicatorValue {
    let ratio = cell_width / p.scale();
    let mut c = [0.0; N];
    let mut f = 1.0;
    for (ci, &a) in c.iter_mut().zip(p.coeffs()) {
        *ci = a * f;
        f *= ratio;
    }
    IndicatorValue(indicator_scaled(&c[..=p.degree()]))
}
