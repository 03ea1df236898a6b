//! Cylindrical and spherical Bessel/Hankel functions of real argument, and
//! Legendre polynomials.
//!
//! First-kind functions are evaluated by Miller's downward recurrence (power
//! series below `x = 1`), second-kind functions by upward recurrence seeded
//! with closed forms (spherical) or Neumann series (cylindrical). The accuracy
//! target is 1e-12 relative for orders up to 60 and arguments up to 60.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_ABOVE: f64 = 1e250;
const SERIES_BELOW: f64 = 1.0;

/// Truncation of a partial-wave expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTruncation {
    /// Highest retained order.
    pub max_order: usize,
    /// Relative magnitude below which trailing coefficients are negligible.
    pub tail_tolerance: f64,
}

impl SeriesTruncation {
    pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-14;

    pub fn new(max_order: usize, tail_tolerance: f64) -> Result<Self> {
        if !(tail_tolerance.is_finite() && tail_tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tail_tolerance must be positive, got {tail_tolerance}"
            )));
        }
        Ok(Self {
            max_order,
            tail_tolerance,
        })
    }

    /// `⌈ka + 8 (ka)^{1/3} + 12⌉` orders, past the transition region where
    /// Bessel functions start decaying.
    pub fn for_size_parameter(ka: f64) -> Self {
        let ka = ka.abs();
        Self {
            max_order: (ka + 8.0 * ka.cbrt() + 12.0).ceil() as usize,
            tail_tolerance: Self::DEFAULT_TAIL_TOLERANCE,
        }
    }
}

/// Kind of cylindrical Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylKind {
    J,
    H1,
}

fn miller_start(order: usize, x: f64) -> usize {
    let base = (order as f64).max(x);
    let m = (base + (160.0 * base).sqrt() + 20.0).ceil() as usize;
    m + (m & 1)
}

/// Unnormalised downward recurrence `f[n-1] = c(n)/x * f[n] - f[n+1]`
/// started from `f[top] = 1`, `f[top+1] = 0`.
fn miller_downward(top: usize, x: f64, c: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut f = vec![0.0; top + 1];
    f[top] = 1.0;
    let mut above = 0.0;
    for n in (1..=top).rev() {
        let next = c(n) / x * f[n] - above;
        above = f[n];
        f[n - 1] = next;
        if next.abs() > RESCALE_ABOVE {
            for v in &mut f[n - 1..] {
                *v /= RESCALE_ABOVE;
            }
            above /= RESCALE_ABOVE;
        }
    }
    f
}

// ---------------------------------------------------------------------------
// Spherical functions

fn sph_j_series(l: usize, x: f64) -> f64 {
    let mut lead = 1.0;
    for i in 1..=l {
        lead *= x / (2 * i + 1) as f64;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let half_x2 = 0.5 * x * x;
    for k in 1..200 {
        term *= -half_x2 / (k as f64 * (2 * (l + k) + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// `j_0(x) .. j_lmax(x)`. Odd/even parity extends the table to `x < 0`.
pub fn sph_bessel_j_seq(lmax: usize, x: f64) -> Vec<f64> {
    if x < 0.0 {
        let mut v = sph_bessel_j_seq(lmax, -x);
        for (l, val) in v.iter_mut().enumerate() {
            if l % 2 == 1 {
                *val = -*val;
            }
        }
        return v;
    }
    if x == 0.0 {
        let mut v = vec![0.0; lmax + 1];
        v[0] = 1.0;
        return v;
    }
    if x < SERIES_BELOW {
        return (0..=lmax).map(|l| sph_j_series(l, x)).collect();
    }
    let top = miller_start(lmax, x);
    let f = miller_downward(top, x, |l| (2 * l + 1) as f64);
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let scale = if j0.abs() >= j1.abs() {
        j0 / f[0]
    } else {
        j1 / f[1]
    };
    f[..=lmax].iter().map(|v| v * scale).collect()
}

/// `y_0(x) .. y_lmax(x)` by upward recurrence.
pub fn sph_bessel_y_seq(lmax: usize, x: f64) -> Result<Vec<f64>> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("y_l(x) requires x > 0, got {x}")));
    }
    let (s, c) = x.sin_cos();
    let mut y = Vec::with_capacity(lmax + 1);
    y.push(-c / x);
    if lmax >= 1 {
        y.push(-c / (x * x) - s / x);
    }
    for l in 1..lmax {
        let next = (2 * l + 1) as f64 / x * y[l] - y[l - 1];
        y.push(next);
    }
    Ok(y)
}

/// `h_0^{(1)}(x) .. h_lmax^{(1)}(x)`.
pub fn sph_hankel1_seq(lmax: usize, x: f64) -> Result<Vec<Complex64>> {
    let y = sph_bessel_y_seq(lmax, x)?;
    let j = sph_bessel_j_seq(lmax, x);
    Ok(j.into_iter()
        .zip(y)
        .map(|(a, b)| Complex64::new(a, b))
        .collect())
}

/// Spherical Bessel function of the first kind. `j_0(0) = 1`, `j_l(0) = 0`.
pub fn sph_bessel_j(l: usize, x: f64) -> f64 {
    if x.abs() < SERIES_BELOW {
        return sph_j_series(l, x);
    }
    sph_bessel_j_seq(l, x)[l]
}

pub fn sph_bessel_y(l: usize, x: f64) -> Result<f64> {
    Ok(sph_bessel_y_seq(l, x)?[l])
}

/// Spherical Hankel function `h_l^{(1)} = j_l + i y_l`.
pub fn sph_hankel1(l: usize, x: f64) -> Result<Complex64> {
    Ok(sph_hankel1_seq(l, x)?[l])
}

/// Derivatives of a spherical table via `f_l' = f_{l-1} - (l+1)/x f_l`
/// and `f_0' = -f_1`. The table must hold one order more than is returned.
pub fn sph_derivatives<T>(table: &[T], x: f64) -> Vec<T>
where
    T: Copy
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>
        + std::ops::Neg<Output = T>,
{
    let n = table.len().saturating_sub(1);
    (0..n)
        .map(|l| {
            if l == 0 {
                -table[1]
            } else {
                table[l - 1] - table[l] * ((l + 1) as f64 / x)
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Cylindrical functions

fn cyl_j_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for i in 1..=n {
        lead *= half / i as f64;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let q = half * half;
    for m in 1..200 {
        term *= -q / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// `J_0 .. J_top` with `top >= nmax`, long enough for Neumann sums.
fn cyl_j_table(nmax: usize, x: f64) -> Vec<f64> {
    if x < SERIES_BELOW {
        let top = nmax.max(30) + 2;
        return (0..=top).map(|n| cyl_j_series(n, x)).collect();
    }
    let top = miller_start(nmax, x);
    let f = miller_downward(top, x, |n| 2.0 * n as f64);
    let norm = f[0] + 2.0 * f.iter().skip(2).step_by(2).sum::<f64>();
    f.into_iter().map(|v| v / norm).collect()
}

/// `J_0(x) .. J_nmax(x)` for `x >= 0`.
pub fn bessel_j_seq(nmax: usize, x: f64) -> Result<Vec<f64>> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "J_n(x) requires finite x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    let mut t = cyl_j_table(nmax, x);
    t.truncate(nmax + 1);
    Ok(t)
}

/// `J_n` and `Y_n` for `n = 0 ..= nmax` at `x > 0`.
pub fn bessel_jy_seq(nmax: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "Y_n(x) requires finite x > 0, got {x}"
        )));
    }
    let j = cyl_j_table(nmax.max(1), x);
    let log_term = 2.0 / PI * ((0.5 * x).ln() + EULER_GAMMA);
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = log_term * j[0] - 4.0 / PI * s0;
    let y1 = -2.0 / (PI * x) * j[0] + log_term * j[1] + 2.0 / PI * s1;
    let mut y = Vec::with_capacity(nmax + 2);
    y.push(y0);
    y.push(y1);
    for n in 1..nmax {
        let next = 2.0 * n as f64 / x * y[n] - y[n - 1];
        y.push(next);
    }
    y.truncate(nmax + 1);
    let mut jv = j;
    jv.truncate(nmax + 1);
    Ok((jv, y))
}

/// `H_0^{(1)}(x) .. H_nmax^{(1)}(x)`.
pub fn hankel1_seq(nmax: usize, x: f64) -> Result<Vec<Complex64>> {
    let (j, y) = bessel_jy_seq(nmax, x)?;
    Ok(j.into_iter()
        .zip(y)
        .map(|(a, b)| Complex64::new(a, b))
        .collect())
}

/// `(J_0, J_1, Y_0, Y_1)` at `x > 0`; the kernel evaluations of the Nyström
/// solver only need these four.
pub fn bessel_01(x: f64) -> Result<[f64; 4]> {
    let (j, y) = bessel_jy_seq(1, x)?;
    Ok([j[0], j[1], y[0], y[1]])
}

/// Cylindrical `J_n(x)` or `H_n^{(1)}(x)` for any integer order, with
/// `f_{-n} = (-1)^n f_n`.
pub fn bessel_cyl(kind: CylKind, n: i32, x: f64) -> Result<Complex64> {
    let order = n.unsigned_abs() as usize;
    let value = match kind {
        CylKind::J => Complex64::new(bessel_j_seq(order, x)?[order], 0.0),
        CylKind::H1 => hankel1_seq(order, x)?[order],
    };
    Ok(if n < 0 && order % 2 == 1 {
        -value
    } else {
        value
    })
}

/// Derivatives of a cylindrical table via `f_n' = (f_{n-1} - f_{n+1})/2`
/// and `f_0' = -f_1`. The table must hold one order more than is returned.
pub fn cyl_derivatives<T>(table: &[T]) -> Vec<T>
where
    T: Copy
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>
        + std::ops::Neg<Output = T>,
{
    let n = table.len().saturating_sub(1);
    (0..n)
        .map(|m| {
            if m == 0 {
                -table[1]
            } else {
                (table[m - 1] - table[m + 1]) * 0.5
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Legendre polynomials

/// `P_0(t) .. P_lmax(t)` by the three-term recurrence; no domain check.
pub(crate) fn legendre_seq_unchecked(lmax: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if lmax == 0 {
        return;
    }
    out.push(t);
    for l in 1..lmax {
        let next = ((2 * l + 1) as f64 * t * out[l] - l as f64 * out[l - 1]) / (l + 1) as f64;
        out.push(next);
    }
}

pub fn legendre_p_seq(lmax: usize, t: f64) -> Result<Vec<f64>> {
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain(format!("P_l(t) requires |t| <= 1, got {t}")));
    }
    let mut out = Vec::with_capacity(lmax + 1);
    legendre_seq_unchecked(lmax, t, &mut out);
    Ok(out)
}

pub fn legendre_p(l: usize, t: f64) -> Result<f64> {
    Ok(legendre_p_seq(l, t)?[l])
}
