//! Convex piecewise-linear approximation of cosine: one chord from below and
//! evenly spaced tangents from above.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use serde::Serialize;

use crate::error::PwlError;

/// Default segment count used by every model.
pub const DEFAULT_SEGMENTS: usize = 20;

/// A line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cut {
    pub slope: f64,
    pub intercept: f64,
}

impl Cut {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PwlCosine {
    pub lower: f64,
    pub upper: f64,
    pub segments: usize,
    /// Lower bound `y >= chord(x)`.
    pub chord: Cut,
    /// Upper bounds `y <= tangent(x)`.
    pub tangents: Vec<Cut>,
    pub points: Vec<f64>,
}

impl PwlCosine {
    pub fn generate(lower: f64, upper: f64, segments: usize) -> Result<Self, PwlError> {
        if !(lower > -FRAC_PI_2 && upper < FRAC_PI_2 && lower < upper) {
            return Err(PwlError::Domain { lower, upper });
        }
        if segments == 0 {
            return Err(PwlError::Segments);
        }
        let slope = (upper.cos() - lower.cos()) / (upper - lower);
        let chord = Cut {
            slope,
            intercept: lower.cos() - slope * lower,
        };
        let inc = (upper - lower) / (segments as f64 + 1.0);
        let points: Vec<f64> = (1..=segments).map(|i| lower + i as f64 * inc).collect();
        let tangents = points
            .iter()
            .map(|&a| Cut {
                slope: -a.sin(),
                intercept: a.sin() * a + a.cos(),
            })
            .collect();
        Ok(Self {
            lower,
            upper,
            segments,
            chord,
            tangents,
            points,
        })
    }

    /// Default domain `(-pi/3, pi/3)`.
    pub fn standard(segments: usize) -> Result<Self, PwlError> {
        Self::generate(-FRAC_PI_3, FRAC_PI_3, segments)
    }

    /// Smallest tangent value at `x`, the value an LP maximizing the
    /// cosine variable reaches.
    pub fn envelope_value(&self, x: f64) -> Result<f64, PwlError> {
        if !(x >= self.lower && x <= self.upper) {
            return Err(PwlError::OutOfDomain {
                x,
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(self.envelope_unchecked(x))
    }

    pub fn envelope_unchecked(&self, x: f64) -> f64 {
        self.tangents
            .iter()
            .map(|t| t.at(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn inequality_count(&self) -> usize {
        self.tangents.len() + 1
    }
}
