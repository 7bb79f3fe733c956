//! Current transformer with a saturable magnetizing branch and resistive
//! burden, in referred form.
//!
//! With burden `R_b` and magnetizing flux `lambda`, dividing by `R_b` gives
//! the state `s = lambda / R_b` (ampere-seconds):
//! `ds/dt = i_sec`, `i_sec = i_prim - i_mu(s)`, with `i_mu` piecewise linear
//! (slope `1/t_m` below the knee, `1/t_sat` above).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtParams {
    /// Knee as a multiple of the symmetric rated current that reaches it.
    pub knee_multiple: f64,
    /// Unsaturated magnetizing time constant `L_m / R_b` (s).
    pub t_m: f64,
    /// Saturated time constant (s).
    pub t_sat: f64,
}

impl CtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.knee_multiple > 0.0 && self.t_m > 0.0 && self.t_sat > 0.0 && self.t_sat < self.t_m) {
            return Err(Error::invalid("CT parameters must be positive with t_sat < t_m"));
        }
        Ok(())
    }
}

/// Referred magnetizing current for state `s`.
fn magnetizing(p: &CtParams, knee: f64, s: f64) -> f64 {
    let a = s.abs();
    let m = if a <= knee { a / p.t_m } else { knee / p.t_m + (a - knee) / p.t_sat };
    m.copysign(s)
}

/// Secondary (referred) currents for a primary current record.
///
/// The state starts in the discrete periodic steady state of the linear
/// branch driven by the fundamental of the first `cycle` samples.
pub fn secondary_current(p: &CtParams, rated: f64, omega: f64, h: f64, prim: &[f64], cycle: usize) -> Vec<f64> {
    let knee = p.knee_multiple * std::f64::consts::SQRT_2 * rated / omega;
    let mut s = initial_state(p, omega, h, prim, cycle);
    let mut out = Vec::with_capacity(prim.len());
    let mut sec_prev = prim.first().map_or(0.0, |i| i - magnetizing(p, knee, s));
    for (k, &ip) in prim.iter().enumerate() {
        if k == 0 {
            out.push(sec_prev);
            continue;
        }
        // trapezoidal step on ds/dt = ip - i_mu(s), solved on the segment of
        // the new state (piecewise linear, so at most a couple of passes)
        let base = s + 0.5 * h * sec_prev;
        let mut next = s;
        for _ in 0..8 {
            let seg_sat = next.abs() > knee;
            let (slope, offset) = if seg_sat {
                (1.0 / p.t_sat, (knee / p.t_m - knee / p.t_sat) * next.signum())
            } else {
                (1.0 / p.t_m, 0.0)
            };
            // s1 = base + h/2 (ip - slope s1 - offset)
            let cand = (base + 0.5 * h * (ip - offset)) / (1.0 + 0.5 * h * slope);
            let consistent = (cand.abs() > knee) == seg_sat && (!seg_sat || cand.signum() == next.signum());
            next = cand;
            if consistent {
                break;
            }
        }
        s = next;
        sec_prev = ip - magnetizing(p, knee, s);
        out.push(sec_prev);
    }
    out
}

fn initial_state(p: &CtParams, omega: f64, h: f64, prim: &[f64], cycle: usize) -> f64 {
    let n = cycle.min(prim.len());
    if n < 2 {
        return 0.0;
    }
    // fundamental phasor of the first cycle
    let (mut re, mut im) = (0.0, 0.0);
    for (k, &x) in prim[..n].iter().enumerate() {
        let th = omega * k as f64 * h;
        re += x * th.cos();
        im -= x * th.sin();
    }
    re *= 2.0 / n as f64;
    im *= 2.0 / n as f64;
    // S = I / (j W + 1/t_m) with the trapezoidal frequency W
    let w = (2.0 / h) * (omega * h / 2.0).tan();
    let a = 1.0 / p.t_m;
    let den = a * a + w * w;
    (re * a + im * w) / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const P: CtParams = CtParams { knee_multiple: 8.0, t_m: 2.0, t_sat: 0.002 };

    #[test]
    fn linear_ct_tracks_rated_current() {
        let omega = 2.0 * PI * 60.0;
        let h = 1e-4;
        let prim: Vec<f64> = (0..2000).map(|k| 1000.0 * (omega * k as f64 * h).sin()).collect();
        let sec = secondary_current(&P, 1000.0 / 2f64.sqrt(), omega, h, &prim, 167);
        let err = prim.iter().zip(&sec).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // ratio error ~ 1/(omega t_m)
        assert!(err < 1000.0 * 2.0 / (omega * P.t_m), "{err}");
        assert!(err > 0.0);
    }

    #[test]
    fn offset_fault_current_saturates() {
        let omega = 2.0 * PI * 60.0;
        let h = 1e-4;
        let rated = 1000.0;
        let prim: Vec<f64> = (0..2000)
            .map(|k| {
                let t = k as f64 * h;
                if t < 0.05 {
                    0.0
                } else {
                    let tf = t - 0.05;
                    20.0 * rated * 2f64.sqrt() * ((-tf / 0.05).exp() - (omega * tf).cos())
                }
            })
            .collect();
        let sec = secondary_current(&P, rated, omega, h, &prim, 167);
        let worst = prim.iter().zip(&sec).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst > 0.5 * rated, "worst error {worst}");
    }

    #[test]
    fn zero_primary_gives_zero_secondary() {
        let sec = secondary_current(&P, 1.0, 377.0, 1e-4, &[0.0; 50], 20);
        assert!(sec.iter().all(|&x| x == 0.0));
    }
}
