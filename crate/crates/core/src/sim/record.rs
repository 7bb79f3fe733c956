//! Simulated waveform records and their binary store format.
//!
//! A record file is a 64-byte little-endian header followed by the three
//! differential-current channels interleaved sample by sample as `f64`:
//!
//! | offset | type | field |
//! |---|---|---|
//! | 0 | `[u8; 8]` | magic `XFMRWAVE` |
//! | 8 | `u32` | format version |
//! | 12 | `u32` | channel count (3) |
//! | 16 | `f64` | sample rate (Hz) |
//! | 24 | `u64` | samples per channel |
//! | 32 | `u32` | event label code |
//! | 36 | `u32` | unit label code |
//! | 40 | `u64` | seed |
//! | 48 | `f64` | inception time (s) |
//! | 56 | `f64` | time of the first sample (s) |

use std::io::{Read, Write};
use std::path::Path;

use super::event::{unit_code, unit_from_code, EventKind, EventSpec, Unit};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"XFMRWAVE";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct WaveformRecord {
    /// Differential currents of phases A, B, C (amperes).
    pub id: [Vec<f64>; 3],
    pub sample_rate: f64,
    pub label: EventKind,
    pub unit_label: Option<Unit>,
    pub spec: EventSpec,
    pub seed: u64,
    /// Time of sample 0 (s).
    pub start_time: f64,
}

impl WaveformRecord {
    pub fn len(&self) -> usize {
        self.id[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time_of(&self, index: usize) -> f64 {
        self.start_time + index as f64 / self.sample_rate
    }

    /// First sample index at or after `t`.
    pub fn index_at(&self, t: f64) -> usize {
        ((t - self.start_time) * self.sample_rate - 1e-9).ceil().max(0.0) as usize
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len();
        let mut out = Vec::with_capacity(HEADER_LEN + 24 * n);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&3u32.to_le_bytes());
        out.extend_from_slice(&self.sample_rate.to_le_bytes());
        out.extend_from_slice(&(n as u64).to_le_bytes());
        out.extend_from_slice(&self.label.code().to_le_bytes());
        out.extend_from_slice(&unit_code(self.unit_label).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.spec.inception_time.to_le_bytes());
        out.extend_from_slice(&self.start_time.to_le_bytes());
        for k in 0..n {
            for ch in &self.id {
                out.extend_from_slice(&ch[k].to_le_bytes());
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }
}

/// Contents of a record file without the generating spec (which lives in
/// the manifest).
#[derive(Clone, Debug, PartialEq)]
pub struct StoredWaveform {
    pub id: [Vec<f64>; 3],
    pub sample_rate: f64,
    pub label: EventKind,
    pub unit_label: Option<Unit>,
    pub seed: u64,
    pub inception_time: f64,
    pub start_time: f64,
}

impl StoredWaveform {
    pub fn from_bytes(bytes: &[u8]) -> Result<StoredWaveform> {
        let bad = |d: String| Error::format("waveform record", d);
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[0..8] != MAGIC {
            return Err(bad("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let channels = u32_at(12);
        if channels != 3 {
            return Err(bad(format!("expected 3 channels, found {channels}")));
        }
        let n = u64_at(24) as usize;
        if bytes.len() != HEADER_LEN + 24 * n {
            return Err(bad(format!("length field {n} does not match file size {}", bytes.len())));
        }
        let mut id = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        for k in 0..n {
            for (c, ch) in id.iter_mut().enumerate() {
                ch.push(f64_at(HEADER_LEN + 8 * (3 * k + c)));
            }
        }
        Ok(StoredWaveform {
            id,
            sample_rate: f64_at(16),
            label: EventKind::from_code(u32_at(32))?,
            unit_label: unit_from_code(u32_at(36))?,
            seed: u64_at(40),
            inception_time: f64_at(48),
            start_time: f64_at(56),
        })
    }

    pub fn read(path: &Path) -> Result<StoredWaveform> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        StoredWaveform::from_bytes(&bytes)
    }

    /// Reattach the generating spec.
    pub fn into_record(self, spec: EventSpec) -> Result<WaveformRecord> {
        if spec.kind != self.label || spec.inception_time != self.inception_time {
            return Err(Error::SchemaMismatch("manifest entry does not match the record header".into()));
        }
        Ok(WaveformRecord {
            id: self.id,
            sample_rate: self.sample_rate,
            label: self.label,
            unit_label: self.unit_label,
            spec,
            seed: self.seed,
            start_time: self.start_time,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::event::PhaseShift;

    fn record() -> WaveformRecord {
        WaveformRecord {
            id: [vec![1.0, -2.5, 3.0], vec![0.0, 1e-300, f64::MAX], vec![-0.0, 7.0, 8.0]],
            sample_rate: 10_000.0,
            label: EventKind::Healthy,
            unit_label: None,
            spec: EventSpec::healthy(0.6, PhaseShift::Backward),
            seed: 0xdead_beef,
            start_time: 9.95,
        }
    }

    #[test]
    fn header_layout() {
        let b = record().to_bytes();
        assert_eq!(b.len(), 64 + 3 * 3 * 8);
        assert_eq!(&b[..8], b"XFMRWAVE");
        assert_eq!(u64::from_le_bytes(b[24..32].try_into().unwrap()), 3);
        // interleaved: sample 0 of A, B, C then sample 1
        assert_eq!(f64::from_le_bytes(b[64..72].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(b[72..80].try_into().unwrap()), 0.0);
        assert_eq!(f64::from_le_bytes(b[88..96].try_into().unwrap()), -2.5);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let r = record();
        let s = StoredWaveform::from_bytes(&r.to_bytes()).unwrap();
        let back = s.into_record(r.spec.clone()).unwrap();
        assert_eq!(back.id[2][0].to_bits(), (-0.0f64).to_bits());
        assert_eq!(back, r);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let mut b = record().to_bytes();
        assert!(StoredWaveform::from_bytes(&b[..40]).is_err());
        b.pop();
        assert!(StoredWaveform::from_bytes(&b).is_err());
        let mut b = record().to_bytes();
        b[0] = b'Y';
        assert!(StoredWaveform::from_bytes(&b).is_err());
    }

    #[test]
    fn index_of_time() {
        let r = record();
        assert_eq!(r.index_at(9.95), 0);
        assert_eq!(r.index_at(10.0), 500);
        assert_eq!(r.index_at(10.00001), 501);
    }
}
