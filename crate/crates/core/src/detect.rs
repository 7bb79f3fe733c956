//! Cycle-over-cycle event detector and post-transient capture.
//!
//! `ED(t)` compares the summed magnitude of the cycle `[t, t + n_c)` with
//! the cycle before it. The cycle ending at sample `t + n_c - 1` is the last
//! one seen when the index is evaluated, so that sample is the trigger
//! instant, and the captured window is the following cycle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::event::Phase;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdConfig {
    pub alpha: f64,
    pub cycle_samples: usize,
}

impl Default for EdConfig {
    fn default() -> Self {
        EdConfig { alpha: 0.05, cycle_samples: 167 }
    }
}

impl EdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.cycle_samples < 8 {
            return Err(Error::invalid(format!("cycle length must be at least 8 samples, got {}", self.cycle_samples)));
        }
        Ok(())
    }
}

/// One cycle of three-phase samples captured after a trigger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureWindow {
    /// Index of the first captured sample in the source record.
    pub start_index: usize,
    /// Sample at which the index first reached the threshold.
    pub trigger_index: usize,
    pub samples: [Vec<f64>; 3],
    pub trigger_phase: Phase,
}

impl CaptureWindow {
    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn abs_sum(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Fractional change of the summed magnitude of cycle `[t, t + n_c)` over
/// the previous cycle; 0 when the current cycle is all zero.
pub fn ed_index(id: &[f64], t: usize, cfg: &EdConfig) -> Result<f64> {
    let n = cfg.cycle_samples;
    if t < n || t + n > id.len() {
        return Err(Error::invalid(format!(
            "index window at {t} with cycle {n} does not fit a record of {} samples",
            id.len()
        )));
    }
    Ok(ed_unchecked(id, t, n))
}

fn ed_unchecked(id: &[f64], t: usize, n: usize) -> f64 {
    let cur = abs_sum(&id[t..t + n]);
    if cur == 0.0 {
        return 0.0;
    }
    let prev = abs_sum(&id[t - n..t]);
    (cur - prev) / cur
}

/// Scan forward and capture the cycle after the first threshold crossing in
/// any phase; `None` if the index never reaches `alpha` while a full cycle
/// is still left to capture.
pub fn detect_and_capture(channels: &[Vec<f64>; 3], cfg: &EdConfig) -> Result<Option<CaptureWindow>> {
    cfg.validate()?;
    let n = cfg.cycle_samples;
    let len = channels[0].len();
    if channels.iter().any(|c| c.len() != len) {
        return Err(Error::invalid("phase channels differ in length"));
    }
    if len < 3 * n {
        return Err(Error::invalid(format!("record of {len} samples is shorter than three cycles of {n}")));
    }
    for t in n..=len - 2 * n {
        for phase in Phase::ALL {
            if ed_unchecked(&channels[phase.index()], t, n) >= cfg.alpha {
                let start = t + n;
                return Ok(Some(CaptureWindow {
                    start_index: start,
                    trigger_index: t + n - 1,
                    samples: std::array::from_fn(|k| channels[k][start..start + n].to_vec()),
                    trigger_phase: phase,
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sine(n: usize, period: usize, amp: f64) -> Vec<f64> {
        (0..n).map(|k| amp * (2.0 * std::f64::consts::PI * k as f64 / period as f64 + 0.3).sin()).collect()
    }

    #[test]
    fn periodic_signal_has_zero_index() {
        let cfg = EdConfig { alpha: 0.05, cycle_samples: 20 };
        let x = sine(200, 20, 3.0);
        for t in 20..=180 {
            assert!(ed_index(&x, t, &cfg).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn cycle_aligned_doubling_gives_one_half() {
        let cfg = EdConfig { alpha: 0.05, cycle_samples: 20 };
        let mut x = sine(200, 20, 1.0);
        for v in &mut x[100..] {
            *v *= 2.0;
        }
        assert!((ed_index(&x, 100, &cfg).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_signal_and_bounds() {
        let cfg = EdConfig { alpha: 0.05, cycle_samples: 10 };
        let x = vec![0.0; 50];
        assert_eq!(ed_index(&x, 10, &cfg).unwrap(), 0.0);
        assert!(ed_index(&x, 9, &cfg).is_err());
        assert!(ed_index(&x, 41, &cfg).is_err());
    }

    #[test]
    fn healthy_record_never_triggers() {
        let cfg = EdConfig { alpha: 0.05, cycle_samples: 20 };
        let ch = [sine(200, 20, 1.0), sine(200, 20, 2.0), sine(200, 20, 0.5)];
        assert!(detect_and_capture(&ch, &cfg).unwrap().is_none());
    }

    #[test]
    fn trigger_in_one_phase_captures_all_phases() {
        let cfg = EdConfig { alpha: 0.05, cycle_samples: 20 };
        let mut ch = [sine(200, 20, 1.0), sine(200, 20, 1.0), sine(200, 20, 1.0)];
        for v in &mut ch[1][90..] {
            *v *= 3.0;
        }
        let w = detect_and_capture(&ch, &cfg).unwrap().unwrap();
        assert_eq!(w.trigger_phase, Phase::B);
        assert!(w.trigger_index >= 90);
        assert_eq!(w.start_index, w.trigger_index + 1);
        for k in 0..3 {
            assert_eq!(w.samples[k], ch[k][w.start_index..w.start_index + 20]);
        }
    }

    #[test]
    fn short_records_are_rejected() {
        let cfg = EdConfig { alpha: 0.05, cycle_samples: 20 };
        let ch = [vec![0.0; 59], vec![0.0; 59], vec![0.0; 59]];
        assert!(detect_and_capture(&ch, &cfg).is_err());
    }

    proptest! {
        #[test]
        fn scale_invariant(x in proptest::collection::vec(-1e3f64..1e3, 60..120), c in 1e-3f64..1e3, t in 20usize..40) {
            let cfg = EdConfig { alpha: 0.05, cycle_samples: 20 };
            let y: Vec<f64> = x.iter().map(|v| v * c).collect();
            let a = ed_index(&x, t, &cfg).unwrap();
            let b = ed_index(&y, t, &cfg).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn raising_alpha_never_triggers_earlier(x in proptest::collection::vec(-10f64..10.0, 90..150), a1 in 0.01f64..0.5, d in 0.0f64..0.4) {
            let n = 15;
            let ch = [x.clone(), x.iter().rev().copied().collect(), x.iter().map(|v| v * v).collect()];
            let lo = detect_and_capture(&ch, &EdConfig { alpha: a1, cycle_samples: n }).unwrap();
            let hi = detect_and_capture(&ch, &EdConfig { alpha: (a1 + d).min(0.99), cycle_samples: n }).unwrap();
            if let Some(h) = hi {
                let l = lo.expect("lower threshold must trigger too");
                prop_assert!(l.trigger_index <= h.trigger_index);
            }
        }

        #[test]
        fn window_lies_inside_record(x in proptest::collection::vec(-10f64..10.0, 60..150)) {
            let ch = [x.clone(), x.clone(), x.clone()];
            if let Some(w) = detect_and_capture(&ch, &EdConfig { alpha: 0.05, cycle_samples: 20 }).unwrap() {
                prop_assert!(w.start_index >= 20);
                prop_assert!(w.start_index + 20 <= x.len());
                prop_assert_eq!(w.len(), 20);
            }
        }
    }
}
