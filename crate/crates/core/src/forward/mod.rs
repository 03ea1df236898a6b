//! Forward scattering: sampled far-field kernels `u∞(x̂_i, d_j)` for
//! spheres and disks (Mie series) and sound-soft planar curves (Nyström).

mod kernel;
mod mie;
mod nystrom;

pub use kernel::{shift_kernel, FarFieldKernel, KernelHeader};
pub use mie::{disk_farfield_constant, mie_coeff, mie_coefficients, mie_kernel, truncation_for};
pub use nystrom::{kress_log_weights, nystrom_farfield, single_layer_farfield_constant};

use serde::{Deserialize, Serialize};

use crate::geometry::{BoundaryCurve2D, CurveShape, DirectionRule};
use crate::specfun::SeriesTruncation;
use crate::{Dimension, Error, Result};

/// Smallest admissible `|n - 1|` for penetrable scatterers.
pub const MIN_INDEX_CONTRAST: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Sphere {
        radius: f64,
    },
    Disk {
        radius: f64,
    },
    Curve {
        curve: CurveShape,
        boundary_points: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Condition {
    Dirichlet,
    /// `∂u/∂ν + η u = 0` with real `η`.
    Impedance {
        eta: f64,
    },
    /// Constant real refractive index `n` inside the scatterer.
    Penetrable {
        n: f64,
    },
}

/// Scatterer classes with a known limit of the normalised eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScattererClass {
    SoundSoft,
    Impedance,
    /// Medium with `n - 1 >= c₁ > 0`.
    MediumPositive,
    /// Medium with `n - 1 <= -c₁ < 0`.
    MediumNegative,
}

impl ScattererClass {
    /// Limit of `λ_n / |λ_n|` in the canonical circle frame.
    pub fn limit(self) -> f64 {
        match self {
            ScattererClass::SoundSoft | ScattererClass::MediumNegative => -1.0,
            ScattererClass::Impedance | ScattererClass::MediumPositive => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererSpec {
    pub shape: Shape,
    pub condition: Condition,
    pub wavenumber: f64,
    /// Translation of the scatterer; empty means centred.
    #[serde(default)]
    pub offset: Vec<f64>,
}

impl ScattererSpec {
    pub fn new(shape: Shape, condition: Condition, wavenumber: f64) -> Result<Self> {
        let spec = Self {
            shape,
            condition,
            wavenumber,
            offset: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sphere(radius: f64, condition: Condition, wavenumber: f64) -> Result<Self> {
        Self::new(Shape::Sphere { radius }, condition, wavenumber)
    }

    pub fn disk(radius: f64, condition: Condition, wavenumber: f64) -> Result<Self> {
        Self::new(Shape::Disk { radius }, condition, wavenumber)
    }

    pub fn kite(wavenumber: f64, boundary_points: usize) -> Result<Self> {
        Self::new(
            Shape::Curve {
                curve: CurveShape::Kite,
                boundary_points,
            },
            Condition::Dirichlet,
            wavenumber,
        )
    }

    pub fn with_offset(mut self, offset: Vec<f64>) -> Result<Self> {
        self.offset = offset;
        self.validate()?;
        Ok(self)
    }

    pub fn dimension(&self) -> Dimension {
        match self.shape {
            Shape::Sphere { .. } => Dimension::Three,
            Shape::Disk { .. } | Shape::Curve { .. } => Dimension::Two,
        }
    }

    pub fn class(&self) -> ScattererClass {
        match self.condition {
            Condition::Dirichlet => ScattererClass::SoundSoft,
            Condition::Impedance { .. } => ScattererClass::Impedance,
            Condition::Penetrable { n } if n > 1.0 => ScattererClass::MediumPositive,
            Condition::Penetrable { .. } => ScattererClass::MediumNegative,
        }
    }

    /// Offset as a vector of the scatterer's dimension (zeros when unset).
    pub fn offset_vector(&self) -> Vec<f64> {
        if self.offset.is_empty() {
            vec![0.0; self.dimension().as_usize()]
        } else {
            self.offset.clone()
        }
    }

    pub fn centered(&self) -> Self {
        Self {
            offset: Vec::new(),
            ..self.clone()
        }
    }

    /// All violated constraints, in declaration order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.wavenumber.is_finite() && self.wavenumber > 0.0) {
            out.push(format!(
                "wavenumber must be positive, got {}",
                self.wavenumber
            ));
        }
        match self.shape {
            Shape::Sphere { radius } | Shape::Disk { radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    out.push(format!("radius must be positive, got {radius}"));
                }
            }
            Shape::Curve {
                curve,
                boundary_points,
            } => {
                if boundary_points < BoundaryCurve2D::MIN_POINTS || boundary_points % 2 == 1 {
                    out.push(format!(
                        "boundary_points must be even and >= {}, got {boundary_points}",
                        BoundaryCurve2D::MIN_POINTS
                    ));
                }
                if let CurveShape::Circle { radius } = curve {
                    if !(radius > 0.0) {
                        out.push(format!("curve radius must be positive, got {radius}"));
                    }
                }
                if self.condition != Condition::Dirichlet {
                    out.push("curve scatterers support only the dirichlet condition".into());
                }
            }
        }
        match self.condition {
            Condition::Dirichlet => {}
            Condition::Impedance { eta } => {
                if !eta.is_finite() {
                    out.push(format!("impedance eta must be finite and real, got {eta}"));
                }
            }
            Condition::Penetrable { n } => {
                if !(n.is_finite() && n > 0.0) {
                    out.push(format!("refractive index must be positive, got {n}"));
                } else if (n - 1.0).abs() < MIN_INDEX_CONTRAST {
                    out.push(format!(
                        "|n - 1| must be at least {MIN_INDEX_CONTRAST}, got n = {n}"
                    ));
                }
            }
        }
        if !self.offset.is_empty() {
            if self.offset.len() != self.dimension().as_usize() {
                out.push(format!(
                    "offset has {} components, scatterer is {}-dimensional",
                    self.offset.len(),
                    self.dimension().as_usize()
                ));
            }
            if self.offset.iter().any(|v| !v.is_finite()) {
                out.push("offset components must be finite".into());
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(v.join("; ")))
        }
    }
}

/// Far-field kernel of `spec` on `rule`. Mie path for spheres and disks,
/// Nyström for curves; translations are applied with [`shift_kernel`].
pub fn farfield_kernel(
    spec: &ScattererSpec,
    rule: &DirectionRule,
    truncation: Option<SeriesTruncation>,
) -> Result<FarFieldKernel> {
    spec.validate()?;
    if spec.dimension() != rule.dimension() {
        return Err(Error::InvalidInput(format!(
            "{}-dimensional scatterer on a {}-dimensional rule",
            spec.dimension().as_usize(),
            rule.dimension().as_usize()
        )));
    }
    let centered = match spec.shape {
        Shape::Sphere { .. } | Shape::Disk { .. } => {
            let trunc = truncation.unwrap_or_else(|| truncation_for(spec));
            mie_kernel(&spec.centered(), rule, trunc)?
        }
        Shape::Curve {
            curve,
            boundary_points,
        } => {
            let DirectionRule::Circle(circle) = rule else {
                unreachable!("dimension checked above")
            };
            let bdry = BoundaryCurve2D::sample(curve, [0.0, 0.0], boundary_points)?;
            nystrom_farfield(&bdry, spec.wavenumber, circle)?
        }
    };
    if spec.offset.iter().all(|&v| v == 0.0) {
        Ok(centered)
    } else {
        shift_kernel(&centered, &spec.offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(ScattererSpec::sphere(1.0, Condition::Dirichlet, 1.0).is_ok());
        assert!(ScattererSpec::sphere(-1.0, Condition::Dirichlet, 1.0).is_err());
        assert!(ScattererSpec::sphere(1.0, Condition::Penetrable { n: 1.001 }, 1.0).is_err());
        assert!(ScattererSpec::sphere(1.0, Condition::Impedance { eta: f64::NAN }, 1.0).is_err());
        let curve = Shape::Curve {
            curve: CurveShape::Kite,
            boundary_points: 64,
        };
        assert!(ScattererSpec::new(curve, Condition::Impedance { eta: 1.0 }, 1.0).is_err());
        let bad_offset = ScattererSpec::sphere(1.0, Condition::Dirichlet, 1.0)
            .unwrap()
            .with_offset(vec![0.1, 0.0]);
        assert!(bad_offset.is_err());
    }

    #[test]
    fn class_from_condition() {
        let c = |cond| ScattererSpec::sphere(1.0, cond, 1.0).unwrap().class();
        assert_eq!(c(Condition::Dirichlet), ScattererClass::SoundSoft);
        assert_eq!(
            c(Condition::Impedance { eta: 0.0 }),
            ScattererClass::Impedance
        );
        assert_eq!(
            c(Condition::Penetrable { n: 2.0 }),
            ScattererClass::MediumPositive
        );
        assert_eq!(
            c(Condition::Penetrable { n: 0.5 }),
            ScattererClass::MediumNegative
        );
    }
}
