//! Direction quadratures on the unit sphere and circle, and parametrised
//! boundary curves in the plane.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Dimension, Error, Result};

/// A unit vector. Planar directions keep a zero third component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(pub [f64; 3]);

impl Direction {
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Direction([c, s, 0.0])
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn dot_vec(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl std::ops::Neg for Direction {
    type Output = Direction;

    fn neg(self) -> Direction {
        Direction([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Gauss–Legendre nodes (ascending) and weights on [-1, 1], mirrored so
/// that `nodes[n-1-i] == -nodes[i]` exactly.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for l in 1..n {
                let p2 = ((2 * l + 1) as f64 * z * p1 - l as f64 * p0) / (l + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        // i counts from the largest root downward
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Unit-circle angles `2πa/N` with cos/sin of the second half taken as exact
/// negations of the first half.
fn circle_cos_sin(n: usize) -> Vec<(f64, f64)> {
    let half = n / 2;
    let mut cs: Vec<(f64, f64)> = (0..half)
        .map(|a| {
            let (s, c) = (TAU * a as f64 / n as f64).sin_cos();
            (c, s)
        })
        .collect();
    for a in 0..half {
        let (c, s) = cs[a];
        cs.push((-c, -s));
    }
    cs
}

/// Gauss–Legendre in cos θ × uniform azimuth product rule on S².
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub n_polar: usize,
    pub n_azimuth: usize,
    pub nodes: Vec<Direction>,
    pub weights: Vec<f64>,
    pub antipodes: Vec<usize>,
}

impl SphereQuadrature {
    /// Degree up to which spherical polynomials are integrated exactly.
    pub fn exact_degree(&self) -> usize {
        (2 * self.n_polar - 1).min(self.n_azimuth - 1)
    }
}

/// Node index `p * n_azimuth + a` for polar index `p`, azimuth index `a`.
pub fn build_s2_rule(n_polar: usize, n_azimuth: usize) -> Result<SphereQuadrature> {
    if n_polar == 0 || n_azimuth == 0 || n_azimuth % 2 == 1 {
        return Err(Error::InvalidInput(format!(
            "S² rule needs n_polar >= 1 and even n_azimuth >= 2, got {n_polar} x {n_azimuth}"
        )));
    }
    let (t, gw) = gauss_legendre(n_polar);
    let cs = circle_cos_sin(n_azimuth);
    let dphi = TAU / n_azimuth as f64;
    let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
    let mut weights = Vec::with_capacity(n_polar * n_azimuth);
    let mut antipodes = Vec::with_capacity(n_polar * n_azimuth);
    for p in 0..n_polar {
        let sin_theta = (1.0 - t[p] * t[p]).sqrt();
        for (a, &(c, s)) in cs.iter().enumerate() {
            nodes.push(Direction([sin_theta * c, sin_theta * s, t[p]]));
            weights.push(gw[p] * dphi);
            let ap = n_polar - 1 - p;
            let aa = (a + n_azimuth / 2) % n_azimuth;
            antipodes.push(ap * n_azimuth + aa);
        }
    }
    Ok(SphereQuadrature {
        n_polar,
        n_azimuth,
        nodes,
        weights,
        antipodes,
    })
}

/// Uniform rule on S¹ with weights 2π/N.
#[derive(Debug, Clone)]
pub struct CircleQuadrature {
    pub angles: Vec<f64>,
    pub nodes: Vec<Direction>,
    pub weights: Vec<f64>,
}

pub fn build_s1_rule(n: usize) -> Result<CircleQuadrature> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidInput(format!(
            "S¹ rule needs a positive even node count, got {n}"
        )));
    }
    let cs = circle_cos_sin(n);
    Ok(CircleQuadrature {
        angles: (0..n).map(|a| TAU * a as f64 / n as f64).collect(),
        nodes: cs.iter().map(|&(c, s)| Direction([c, s, 0.0])).collect(),
        weights: vec![TAU / n as f64; n],
    })
}

/// Declarative description of a direction rule, as it appears in configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleSpec {
    Sphere { n_polar: usize, n_azimuth: usize },
    Circle { n_circle: usize },
}

impl RuleSpec {
    pub fn build(&self) -> Result<DirectionRule> {
        match *self {
            RuleSpec::Sphere { n_polar, n_azimuth } => {
                build_s2_rule(n_polar, n_azimuth).map(DirectionRule::Sphere)
            }
            RuleSpec::Circle { n_circle } => build_s1_rule(n_circle).map(DirectionRule::Circle),
        }
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            RuleSpec::Sphere { .. } => Dimension::Three,
            RuleSpec::Circle { .. } => Dimension::Two,
        }
    }

    /// Both rule parameters scaled by `factor` (azimuth kept even).
    pub fn scaled(&self, num: usize, den: usize) -> RuleSpec {
        let s = |v: usize| (v * num).div_ceil(den);
        match *self {
            RuleSpec::Sphere { n_polar, n_azimuth } => RuleSpec::Sphere {
                n_polar: s(n_polar),
                n_azimuth: s(n_azimuth) + s(n_azimuth) % 2,
            },
            RuleSpec::Circle { n_circle } => RuleSpec::Circle {
                n_circle: s(n_circle) + s(n_circle) % 2,
            },
        }
    }
}

/// A direction quadrature shared by observation and incidence directions.
#[derive(Debug, Clone)]
pub enum DirectionRule {
    Sphere(SphereQuadrature),
    Circle(CircleQuadrature),
}

impl DirectionRule {
    pub fn len(&self) -> usize {
        self.nodes().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> &[Direction] {
        match self {
            DirectionRule::Sphere(q) => &q.nodes,
            DirectionRule::Circle(q) => &q.nodes,
        }
    }

    pub fn weights(&self) -> &[f64] {
        match self {
            DirectionRule::Sphere(q) => &q.weights,
            DirectionRule::Circle(q) => &q.weights,
        }
    }

    pub fn antipode(&self, i: usize) -> usize {
        match self {
            DirectionRule::Sphere(q) => q.antipodes[i],
            DirectionRule::Circle(q) => (i + q.nodes.len() / 2) % q.nodes.len(),
        }
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            DirectionRule::Sphere(_) => Dimension::Three,
            DirectionRule::Circle(_) => Dimension::Two,
        }
    }

    pub fn spec(&self) -> RuleSpec {
        match self {
            DirectionRule::Sphere(q) => RuleSpec::Sphere {
                n_polar: q.n_polar,
                n_azimuth: q.n_azimuth,
            },
            DirectionRule::Circle(q) => RuleSpec::Circle {
                n_circle: q.nodes.len(),
            },
        }
    }

    /// Quadrature of sampled values.
    pub fn integrate(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        self.weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// One row per node: `x,y,z,weight`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,z,weight")?;
        for (d, w) in self.nodes().iter().zip(self.weights()) {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                d.0[0], d.0[1], d.0[2], w
            )?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Boundary curves

/// Closed planar curve shapes, parametrised counterclockwise over [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CurveShape {
    /// `(cos t + 0.65 cos 2t - 0.65, 1.5 sin t)`.
    Kite,
    Circle {
        radius: f64,
    },
}

impl CurveShape {
    /// Point, first and second derivative at parameter `t`.
    pub fn eval(&self, t: f64) -> [[f64; 2]; 3] {
        let (s, c) = t.sin_cos();
        match *self {
            CurveShape::Kite => {
                let (s2, c2) = (2.0 * t).sin_cos();
                [
                    [c + 0.65 * c2 - 0.65, 1.5 * s],
                    [-s - 1.3 * s2, 1.5 * c],
                    [-c - 2.6 * c2, -1.5 * s],
                ]
            }
            CurveShape::Circle { radius } => [
                [radius * c, radius * s],
                [-radius * s, radius * c],
                [-radius * c, -radius * s],
            ],
        }
    }
}

/// Samples of a closed curve at `N` equispaced parameters `t_j = 2πj/N`.
#[derive(Debug, Clone)]
pub struct BoundaryCurve2D {
    pub shape: CurveShape,
    pub offset: [f64; 2],
    pub params: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub tangents: Vec<[f64; 2]>,
    pub second: Vec<[f64; 2]>,
}

impl BoundaryCurve2D {
    pub const MIN_POINTS: usize = 8;

    pub fn sample(shape: CurveShape, offset: [f64; 2], n: usize) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(Error::InvalidInput(format!(
                "boundary curves need at least {} samples, got {n}",
                Self::MIN_POINTS
            )));
        }
        if let CurveShape::Circle { radius } = shape {
            if !(radius > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "circle radius must be positive, got {radius}"
                )));
            }
        }
        let params: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        let mut points = Vec::with_capacity(n);
        let mut tangents = Vec::with_capacity(n);
        let mut second = Vec::with_capacity(n);
        for &t in &params {
            let [p, d1, d2] = shape.eval(t);
            points.push([p[0] + offset[0], p[1] + offset[1]]);
            tangents.push(d1);
            second.push(d2);
        }
        let curve = Self {
            shape,
            offset,
            params,
            points,
            tangents,
            second,
        };
        if curve.min_speed() <= 0.0 {
            return Err(Error::InvalidInput(
                "curve parametrisation is not regular".into(),
            ));
        }
        Ok(curve)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `min_j |x'(t_j)|`.
    pub fn min_speed(&self) -> f64 {
        self.tangents
            .iter()
            .map(|d| d[0].hypot(d[1]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn translated(&self, by: [f64; 2]) -> Result<Self> {
        Self::sample(
            self.shape,
            [self.offset[0] + by[0], self.offset[1] + by[1]],
            self.len(),
        )
    }
}

pub fn kite_curve(n: usize) -> Result<BoundaryCurve2D> {
    BoundaryCurve2D::sample(CurveShape::Kite, [0.0, 0.0], n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_small_cases() {
        let (x, w) = gauss_legendre(2);
        assert_relative_eq!(x[1], 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(w[0], 1.0, max_relative = 1e-15);
        let (x, w) = gauss_legendre(5);
        assert_eq!(x[2], 0.0);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn odd_counts_rejected() {
        assert!(build_s2_rule(4, 7).is_err());
        assert!(build_s1_rule(9).is_err());
        assert!(build_s2_rule(0, 8).is_err());
    }

    #[test]
    fn s1_antipodes_are_exact() {
        let rule = DirectionRule::Circle(build_s1_rule(12).unwrap());
        for i in 0..12 {
            assert_eq!(rule.nodes()[rule.antipode(i)], -rule.nodes()[i]);
        }
    }

    #[test]
    fn kite_endpoints() {
        let [p0, _, _] = CurveShape::Kite.eval(0.0);
        assert_relative_eq!(p0[0], 1.0);
        assert_relative_eq!(p0[1], 0.0);
        let [pp, _, _] = CurveShape::Kite.eval(PI);
        let expect = PI.cos() + 0.65 * (TAU).cos() - 0.65;
        assert_relative_eq!(pp[0], expect, epsilon = 1e-15);
        assert_relative_eq!(pp[0], -1.0, epsilon = 1e-15);
        assert!(pp[1].abs() < 1e-15);
        assert!(kite_curve(7).is_err());
    }
}
