//! Piecewise-linear core magnetization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Odd-symmetric piecewise-linear B-H curve.
///
/// Only the positive branch is stored; the origin is implicit. The flux
/// density at rated peak voltage is `rated_flux_density`, which must lie on
/// the first (linear) segment so that the healthy operating point is
/// unsaturated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaturationCurve {
    /// `(H [A/m], B [T])` pairs, strictly increasing in both coordinates.
    pub breakpoints: Vec<(f64, f64)>,
    pub rated_flux_density: f64,
}

impl Default for SaturationCurve {
    fn default() -> Self {
        SaturationCurve {
            breakpoints: vec![
                (10.0, 1.40),
                (27.9, 1.495),
                (139.0, 1.586),
                (1393.0, 1.690),
                (8357.0, 1.950),
                (24140.0, 2.340),
                (55710.0, 3.120),
            ],
            rated_flux_density: 1.30,
        }
    }
}

impl SaturationCurve {
    pub fn validate(&self) -> Result<()> {
        if self.breakpoints.is_empty() {
            return Err(Error::invalid("saturation curve needs at least one breakpoint"));
        }
        let mut prev = (0.0, 0.0);
        for &(h, b) in &self.breakpoints {
            if !(h.is_finite() && b.is_finite()) || h <= prev.0 || b <= prev.1 {
                return Err(Error::invalid(format!(
                    "saturation breakpoints must be strictly increasing from the origin; ({h}, {b}) follows {prev:?}"
                )));
            }
            prev = (h, b);
        }
        let b1 = self.breakpoints[0].1;
        if !(self.rated_flux_density > 0.0 && self.rated_flux_density <= b1) {
            return Err(Error::invalid(format!(
                "rated flux density {} must lie in (0, {b1}] (first linear segment)",
                self.rated_flux_density
            )));
        }
        Ok(())
    }

    /// `B(H)` on the odd extension, extrapolating the last segment.
    pub fn flux_density(&self, h: f64) -> f64 {
        let s = h.signum();
        let h = h.abs();
        let mut prev = (0.0, 0.0);
        for (k, &(hk, bk)) in self.breakpoints.iter().enumerate() {
            if h <= hk || k + 1 == self.breakpoints.len() {
                let slope = (bk - prev.1) / (hk - prev.0);
                return s * (prev.1 + slope * (h - prev.0));
            }
            prev = (hk, bk);
        }
        unreachable!()
    }

    /// Scale the curve into a flux-linkage/current characteristic for a core
    /// whose reference winding has unsaturated inductance `l_ref` and rated
    /// peak flux linkage `flux_rated`.
    pub fn core_curve(&self, l_ref: f64, flux_rated: f64) -> CoreCurve {
        let (h1, b1) = self.breakpoints[0];
        let flux_scale = flux_rated / self.rated_flux_density;
        let current_scale = flux_scale * (b1 / h1) / l_ref;
        let points = self.breakpoints.iter().map(|&(h, b)| (h * current_scale, b * flux_scale)).collect();
        CoreCurve::new(points)
    }
}

/// Odd piecewise-linear flux-linkage vs magnetizing-current characteristic
/// `phi = F(m)`.
///
/// Segment `0` spans `[-m1, m1]`; segment `s > 0` spans `[m_s, m_{s+1}]` with
/// the last one open-ended; negative indices mirror them.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreCurve {
    points: Vec<(f64, f64)>,
    slopes: Vec<f64>,
    offsets: Vec<f64>,
}

impl CoreCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        let n = points.len();
        let mut slopes = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        slopes.push(points[0].1 / points[0].0);
        offsets.push(0.0);
        for s in 1..n {
            let (m0, p0) = points[s - 1];
            let (m1, p1) = points[s];
            let slope = (p1 - p0) / (m1 - m0);
            slopes.push(slope);
            offsets.push(p0 - slope * m0);
        }
        // open-ended tail continues the last finite segment
        let tail = *slopes.last().unwrap();
        let (m_last, p_last) = points[n - 1];
        slopes.push(tail);
        offsets.push(p_last - tail * m_last);
        CoreCurve { points, slopes, offsets }
    }

    pub fn segments(&self) -> i32 {
        self.points.len() as i32
    }

    pub fn segment_of(&self, m: f64) -> i32 {
        let a = m.abs();
        let k = self.points.iter().position(|&(mk, _)| a <= mk).unwrap_or(self.points.len()) as i32;
        if m < 0.0 {
            -k
        } else {
            k
        }
    }

    /// Incremental inductance and flux offset of segment `s`:
    /// `phi = slope * m + offset`.
    pub fn segment(&self, s: i32) -> (f64, f64) {
        let k = s.unsigned_abs() as usize;
        let k = k.min(self.slopes.len() - 1);
        let offset = if s < 0 { -self.offsets[k] } else { self.offsets[k] };
        (self.slopes[k], offset)
    }

    pub fn flux(&self, m: f64) -> f64 {
        let (slope, offset) = self.segment(self.segment_of(m));
        slope * m + offset
    }

    pub fn unsaturated_inductance(&self) -> f64 {
        self.slopes[0]
    }
}
