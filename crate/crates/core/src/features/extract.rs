//! Feature matrices over captured windows.

use serde::{Deserialize, Serialize};

use super::time::{feature_names, feature_values, FeatureFlags, TimeFeature, TimeFeatureParams, TimeSchema};
use super::wavelet::{decompose, wavelet, wavelet_energy, WaveletSpec};
use crate::detect::CaptureWindow;
use crate::error::{Error, Result};
use crate::par::{map_with, Exec};
use crate::sim::event::Phase;

pub fn phase_prefix(p: Phase) -> &'static str {
    match p {
        Phase::A => "phaseA",
        Phase::B => "phaseB",
        Phase::C => "phaseC",
    }
}

/// Energy of detail level `level` of one phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyColumn {
    pub phase: Phase,
    pub wavelet: String,
    pub level: usize,
}

impl EnergyColumn {
    pub fn name(&self) -> String {
        format!("{}.{}.E_d{}", phase_prefix(self.phase), self.wavelet, self.level)
    }

    pub fn parse(name: &str) -> Option<EnergyColumn> {
        let mut parts = name.splitn(2, '.');
        let phase = match parts.next()? {
            "phaseA" => Phase::A,
            "phaseB" => Phase::B,
            "phaseC" => Phase::C,
            _ => return None,
        };
        let rest = parts.next()?;
        let (wavelet, level) = rest.rsplit_once(".E_d")?;
        Some(EnergyColumn { phase, wavelet: wavelet.to_string(), level: level.parse().ok()? })
    }
}

/// Every level `1..=spec.level` of every spec, phases A, B, C in turn.
pub fn energy_pool(specs: &[WaveletSpec]) -> Vec<EnergyColumn> {
    let mut out = Vec::new();
    for phase in Phase::ALL {
        for s in specs {
            for level in 1..=s.level {
                out.push(EnergyColumn { phase, wavelet: s.wavelet.clone(), level });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum FeatureMode {
    /// Detail coefficients `d_1..d_L` of every phase.
    Coeffs(WaveletSpec),
    Time { features: Vec<TimeFeature>, params: TimeFeatureParams, schema: TimeSchema },
    Energies(Vec<EnergyColumn>),
    /// Time block followed by the energy block.
    Combined { features: Vec<TimeFeature>, params: TimeFeatureParams, energies: Vec<EnergyColumn> },
}

/// A record dropped because one of its features was not finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dropped {
    pub index: usize,
    pub column: String,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagCounts {
    pub ar_ridge: usize,
    pub zero_variance: usize,
    pub zero_energy: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub schema: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Source window index of each kept row.
    pub source: Vec<usize>,
    pub dropped: Vec<Dropped>,
    pub flags: FlagCounts,
}

impl FeatureMatrix {
    pub fn width(&self) -> usize {
        self.schema.len()
    }

    /// Columns by name, in the requested order.
    pub fn columns(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.schema
                    .iter()
                    .position(|s| s == n)
                    .ok_or_else(|| Error::SchemaMismatch(format!("column '{n}' is not in the feature schema")))
            })
            .collect()
    }
}

pub fn schema(mode: &FeatureMode, window_len: usize) -> Result<Vec<String>> {
    let mut names = Vec::new();
    match mode {
        FeatureMode::Coeffs(spec) => {
            spec.validate(window_len)?;
            let lens = super::wavelet::detail_lengths(window_len, spec.level);
            for phase in Phase::ALL {
                for (l, n) in lens.iter().enumerate() {
                    for k in 0..*n {
                        names.push(format!("{}.d{}.coeff[{k}]", phase_prefix(phase), l + 1));
                    }
                }
            }
        }
        FeatureMode::Time { features, params, schema } => {
            time_names(&mut names, features, params, *schema, window_len)?;
        }
        FeatureMode::Energies(cols) => energy_names(&mut names, cols, window_len)?,
        FeatureMode::Combined { features, params, energies } => {
            time_names(&mut names, features, params, TimeSchema::Scalar, window_len)?;
            energy_names(&mut names, energies, window_len)?;
        }
    }
    Ok(names)
}

fn time_names(
    names: &mut Vec<String>,
    features: &[TimeFeature],
    params: &TimeFeatureParams,
    schema: TimeSchema,
    n: usize,
) -> Result<()> {
    params.validate(n)?;
    if features.is_empty() {
        return Err(Error::invalid("time feature set is empty"));
    }
    for phase in Phase::ALL {
        for f in features {
            names.extend(feature_names(*f, params, schema).into_iter().map(|s| format!("{}.{s}", phase_prefix(phase))));
        }
    }
    Ok(())
}

fn energy_names(names: &mut Vec<String>, cols: &[EnergyColumn], n: usize) -> Result<()> {
    for c in cols {
        WaveletSpec::new(&c.wavelet, c.level).validate(n)?;
        names.push(c.name());
    }
    Ok(())
}

fn time_row(
    out: &mut Vec<f64>,
    w: &CaptureWindow,
    features: &[TimeFeature],
    params: &TimeFeatureParams,
    schema: TimeSchema,
    flags: &mut FeatureFlags,
) -> Result<()> {
    for x in &w.samples {
        for f in features {
            out.extend(feature_values(*f, x, params, schema, flags)?);
        }
    }
    Ok(())
}

fn energy_row(out: &mut Vec<f64>, w: &CaptureWindow, cols: &[EnergyColumn]) -> Result<()> {
    // decompose each (phase, wavelet) once to the deepest requested level
    let mut cache: Vec<(Phase, &str, Vec<f64>)> = Vec::new();
    for c in cols {
        let hit = cache.iter().position(|(p, name, e)| *p == c.phase && *name == c.wavelet && e.len() >= c.level);
        let idx = match hit {
            Some(i) => i,
            None => {
                let depth = cols
                    .iter()
                    .filter(|o| o.phase == c.phase && o.wavelet == c.wavelet)
                    .map(|o| o.level)
                    .max()
                    .unwrap_or(c.level);
                let wv = wavelet(&c.wavelet)?;
                let d = decompose(&w.samples[c.phase.index()], wv, depth);
                cache.push((c.phase, &c.wavelet, wavelet_energy(&d.details)));
                cache.len() - 1
            }
        };
        out.push(cache[idx].2[c.level - 1]);
    }
    Ok(())
}

fn row(w: &CaptureWindow, mode: &FeatureMode, width: usize) -> Result<(Vec<f64>, FeatureFlags)> {
    let mut out = Vec::with_capacity(width);
    let mut flags = FeatureFlags::default();
    match mode {
        FeatureMode::Coeffs(spec) => {
            let wv = wavelet(&spec.wavelet)?;
            for x in &w.samples {
                let d = decompose(x, wv, spec.level);
                for level in &d.details {
                    out.extend_from_slice(level);
                }
            }
        }
        FeatureMode::Time { features, params, schema } => time_row(&mut out, w, features, params, *schema, &mut flags)?,
        FeatureMode::Energies(cols) => energy_row(&mut out, w, cols)?,
        FeatureMode::Combined { features, params, energies } => {
            time_row(&mut out, w, features, params, TimeSchema::Scalar, &mut flags)?;
            energy_row(&mut out, w, energies)?;
        }
    }
    debug_assert_eq!(out.len(), width);
    Ok((out, flags))
}

/// Feature row of one window; non-finite values are an error.
pub fn window_features(w: &CaptureWindow, mode: &FeatureMode) -> Result<Vec<f64>> {
    let names = schema(mode, w.len())?;
    if w.samples.iter().any(|c| c.len() != w.len()) {
        return Err(Error::invalid("window phases differ in length"));
    }
    let (values, _) = row(w, mode, names.len())?;
    if let Some(c) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("feature {} = {} is not finite", names[c], values[c])));
    }
    Ok(values)
}

/// Features of every window; rows with a non-finite value are dropped and
/// reported in `dropped`.
pub fn extract_feature_matrix(windows: &[CaptureWindow], mode: &FeatureMode, exec: Exec) -> Result<FeatureMatrix> {
    let n = match windows.first() {
        Some(w) => w.len(),
        None => return Ok(FeatureMatrix {
            schema: Vec::new(),
            rows: Vec::new(),
            source: Vec::new(),
            dropped: Vec::new(),
            flags: FlagCounts::default(),
        }),
    };
    if let Some(i) = windows.iter().position(|w| w.samples.iter().any(|c| c.len() != n)) {
        return Err(Error::invalid(format!("window {i} differs from the common length {n}")));
    }
    let schema = schema(mode, n)?;
    let width = schema.len();
    let computed = map_with(exec, windows, |w| row(w, mode, width));
    let mut m = FeatureMatrix { schema, rows: Vec::new(), source: Vec::new(), dropped: Vec::new(), flags: FlagCounts::default() };
    for (index, r) in computed.into_iter().enumerate() {
        let (values, flags) = r?;
        m.flags.ar_ridge += usize::from(flags.ar_ridge);
        m.flags.zero_variance += usize::from(flags.zero_variance);
        m.flags.zero_energy += usize::from(flags.zero_energy);
        if let Some(c) = values.iter().position(|v| !v.is_finite()) {
            log::warn!("dropping window {index}: feature {} = {}", m.schema[c], values[c]);
            m.dropped.push(Dropped { index, column: m.schema[c].clone(), value: values[c] });
            continue;
        }
        m.rows.push(values);
        m.source.push(index);
    }
    Ok(m)
}
