//! Parameter grids, dataset generation and the record manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::event::*;
use super::record::WaveformRecord;
use super::saturation::SaturationCurve;
use super::system::{simulate_event, IsparRating, NetworkConstants};
use crate::error::{Error, Result};
use crate::par::{self, Exec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTable {
    PhaseGround,
    TurnTurn,
    WindingWinding,
    Overexcitation,
    MagnetizingInrush,
    SympatheticInrush,
    External,
    Healthy,
}

impl SweepTable {
    pub const EVENTS: [SweepTable; 7] = [
        SweepTable::PhaseGround,
        SweepTable::TurnTurn,
        SweepTable::WindingWinding,
        SweepTable::Overexcitation,
        SweepTable::MagnetizingInrush,
        SweepTable::SympatheticInrush,
        SweepTable::External,
    ];

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

/// Value domains of the grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Domains {
    pub inception_times: Vec<f64>,
    pub taps: Vec<f64>,
    pub exciting_taps: Vec<f64>,
    pub phase_ground_resistances: Vec<f64>,
    pub winding_fault_resistances: Vec<f64>,
    pub external_resistances: Vec<f64>,
    pub winding_percents: Vec<f64>,
    pub residual_levels: Vec<f64>,
    pub switch_levels: Vec<f64>,
}

impl Default for Domains {
    fn default() -> Self {
        Domains {
            inception_times: (0..12).map(|k| 10.0 + k as f64 / 720.0).collect(),
            taps: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            exciting_taps: vec![1.0, 0.5],
            phase_ground_resistances: vec![0.01, 0.1, 1.0],
            winding_fault_resistances: vec![0.01, 0.5, 1.0],
            external_resistances: vec![0.01, 0.1, 1.0],
            winding_percents: vec![20.0, 50.0, 70.0],
            residual_levels: vec![0.8, 0.6, 0.4, 0.0, -0.4, -0.6, -0.8],
            switch_levels: vec![1.25, 1.3, 1.4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub tables: Vec<SweepTable>,
    /// Fraction of every grid to keep (`round(fraction * size)` specs,
    /// chosen under the seed).
    pub fraction: f64,
    /// Upper bound on the records kept per table after `fraction`.
    pub max_per_table: Option<usize>,
    /// Number of healthy records when the healthy table is selected.
    pub healthy_count: usize,
    pub domains: Domains,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            tables: SweepTable::EVENTS.to_vec(),
            fraction: 1.0,
            max_per_table: None,
            healthy_count: 0,
            domains: Domains::default(),
        }
    }
}

fn base(kind: EventKind, t: f64, shift: PhaseShift, tap: f64) -> EventSpec {
    EventSpec { kind, inception_time: t, ..EventSpec::healthy(tap, shift) }
}

const SHIFTS: [PhaseShift; 2] = [PhaseShift::Forward, PhaseShift::Backward];
const SIDES: [Side; 2] = [Side::Primary, Side::Secondary];

/// Full cartesian grid of one table, in a fixed order.
pub fn grid(table: SweepTable, d: &Domains, healthy_count: usize) -> Vec<EventSpec> {
    let mut out = Vec::new();
    let unit_taps = [(Unit::Series, &d.taps), (Unit::Exciting, &d.exciting_taps)];
    match table {
        SweepTable::PhaseGround => {
            for (unit, taps) in unit_taps {
                for &r in &d.phase_ground_resistances {
                    for &pct in &d.winding_percents {
                        for ft in FaultType::ALL {
                            for &t in &d.inception_times {
                                for side in SIDES {
                                    for shift in SHIFTS {
                                        for &tap in taps.iter() {
                                            let mut s = base(EventKind::InternalPhaseGround, t, shift, tap);
                                            s.unit = Some(unit);
                                            s.side = Some(side);
                                            s.fault_type = Some(ft);
                                            s.fault_resistance = Some(r);
                                            s.winding_percent = Some(pct);
                                            out.push(s);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        SweepTable::TurnTurn | SweepTable::WindingWinding => {
            let tt = table == SweepTable::TurnTurn;
            let sides: &[Option<Side>] = if tt { &[Some(Side::Primary), Some(Side::Secondary)] } else { &[None] };
            for (unit, taps) in unit_taps {
                for &r in &d.winding_fault_resistances {
                    for &pct in &d.winding_percents {
                        for &t in &d.inception_times {
                            for phase in Phase::ALL {
                                for &side in sides {
                                    for shift in SHIFTS {
                                        for &tap in taps.iter() {
                                            let kind = if tt {
                                                EventKind::InternalTurnTurn
                                            } else {
                                                EventKind::InternalWindingWinding
                                            };
                                            let mut s = base(kind, t, shift, tap);
                                            s.unit = Some(unit);
                                            s.side = side;
                                            s.phase = Some(phase);
                                            s.fault_resistance = Some(r);
                                            s.winding_percent = Some(pct);
                                            out.push(s);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        SweepTable::Overexcitation => {
            for target in [SwitchTarget::Load, SwitchTarget::Capacitor] {
                for &level in &d.switch_levels {
                    for &t in &d.inception_times {
                        for &tap in &d.taps {
                            for shift in SHIFTS {
                                let mut s = base(EventKind::Overexcitation, t, shift, tap);
                                s.switch_target = Some(target);
                                s.switch_level = Some(level);
                                out.push(s);
                            }
                        }
                    }
                }
            }
        }
        SweepTable::MagnetizingInrush | SweepTable::SympatheticInrush => {
            let kind = if table == SweepTable::MagnetizingInrush {
                EventKind::MagnetizingInrush
            } else {
                EventKind::SympatheticInrush
            };
            for &level in &d.residual_levels {
                for phase in Phase::ALL {
                    for &t in &d.inception_times {
                        for &tap in &d.taps {
                            for shift in SHIFTS {
                                let mut s = base(kind, t, shift, tap);
                                s.residual_flux = Some(ResidualFlux { phase, level });
                                out.push(s);
                            }
                        }
                    }
                }
            }
        }
        SweepTable::External => {
            for &r in &d.external_resistances {
                for ft in FaultType::ALL {
                    for &t in &d.inception_times {
                        for &tap in &d.taps {
                            for shift in SHIFTS {
                                for line in [Line::Line1, Line::Line2] {
                                    let mut s = base(EventKind::ExternalFaultCtSat, t, shift, tap);
                                    s.fault_type = Some(ft);
                                    s.fault_resistance = Some(r);
                                    s.fault_location = Some(line);
                                    out.push(s);
                                }
                            }
                        }
                    }
                }
            }
        }
        SweepTable::Healthy => {
            for k in 0..healthy_count {
                let tap = d.taps[k % d.taps.len()];
                let shift = SHIFTS[(k / d.taps.len()) % 2];
                out.push(EventSpec::healthy(tap, shift));
            }
        }
    }
    out
}

/// Subsample a grid to `round(fraction * len)` entries, kept in grid order.
pub fn subsample(specs: Vec<EventSpec>, fraction: f64, seed: u64, table: SweepTable) -> Vec<EventSpec> {
    let keep = ((fraction.clamp(0.0, 1.0)) * specs.len() as f64).round() as usize;
    subsample_count(specs, keep, seed, table)
}

/// Keep `keep` specs chosen under the seed, in grid order.
pub fn subsample_count(specs: Vec<EventSpec>, keep: usize, seed: u64, table: SweepTable) -> Vec<EventSpec> {
    let n = specs.len();
    if keep >= n {
        return specs;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, table.tag()));
    let mut idx = sample(&mut rng, n, keep).into_vec();
    idx.sort_unstable();
    let mut specs: Vec<Option<EventSpec>> = specs.into_iter().map(Some).collect();
    idx.into_iter().map(|i| specs[i].take().expect("distinct indices")).collect()
}

/// SplitMix64 finalizer over `a ^ b * golden`.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A planned record: id, seed and spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannedRecord {
    pub id: String,
    pub table: SweepTable,
    pub seed: u64,
    pub spec: EventSpec,
}

/// Expand the configured grids into an ordered, seeded plan.
pub fn plan(cfg: &SweepConfig, seed: u64) -> Result<Vec<PlannedRecord>> {
    if !(0.0..=1.0).contains(&cfg.fraction) {
        return Err(Error::invalid(format!("sweep fraction must lie in [0, 1], got {}", cfg.fraction)));
    }
    let mut out = Vec::new();
    for &table in &cfg.tables {
        let g = grid(table, &cfg.domains, cfg.healthy_count);
        let keep = ((cfg.fraction * g.len() as f64).round() as usize).min(cfg.max_per_table.unwrap_or(usize::MAX));
        let specs = subsample_count(g, keep, seed, table);
        for spec in specs {
            spec.validate()?;
            let k = out.len();
            out.push(PlannedRecord { id: format!("r{k:06}"), table, seed: mix(seed, k as u64), spec });
        }
    }
    Ok(out)
}

/// One manifest line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub file: String,
    pub label: EventKind,
    pub unit_label: Option<Unit>,
    pub seed: u64,
    pub table: SweepTable,
    pub spec: EventSpec,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub const FILE: &'static str = "manifest.jsonl";
    pub const SUMMARY: &'static str = "manifest-summary.json";

    pub fn class_counts(&self) -> BTreeMap<String, usize> {
        let mut c = BTreeMap::new();
        for e in &self.entries {
            *c.entry(e.label.name().to_string()).or_insert(0) += 1;
        }
        c
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(Self::FILE))?);
        for e in &self.entries {
            serde_json::to_writer(&mut f, e)?;
            f.write_all(b"\n")?;
        }
        f.flush()?;
        let summary = serde_json::json!({ "records": self.entries.len(), "class_counts": self.class_counts() });
        std::fs::write(dir.join(Self::SUMMARY), serde_json::to_string_pretty(&summary)? + "\n")?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(dir.join(Self::FILE))?;
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            entries.push(
                serde_json::from_str(line)
                    .map_err(|e| Error::format("manifest", format!("line {}: {e}", n + 1)))?,
            );
        }
        Ok(Manifest { entries })
    }
}

/// Everything needed to simulate a plan.
#[derive(Clone, Debug, Default)]
pub struct Plant {
    pub rating: IsparRating,
    pub saturation: SaturationCurve,
    pub network: NetworkConstants,
}

/// Simulate a plan in memory.
pub fn simulate_plan(plan: &[PlannedRecord], plant: &Plant, exec: Exec) -> Result<Vec<WaveformRecord>> {
    par::map_with(exec, plan, |p| simulate_event(&p.spec, &plant.rating, &plant.saturation, &plant.network, p.seed))
        .into_iter()
        .collect()
}

/// Simulate a plan into `dir` (one file per record plus the manifest). On
/// failure every file written by this call is removed.
pub fn generate(plan: &[PlannedRecord], plant: &Plant, dir: &Path, exec: Exec) -> Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let results: Vec<Result<ManifestEntry>> = par::map_with(exec, plan, |p| {
        let rec = simulate_event(&p.spec, &plant.rating, &plant.saturation, &plant.network, p.seed)?;
        let file = format!("{}.wave", p.id);
        rec.write(&dir.join(&file))?;
        Ok(ManifestEntry {
            id: p.id.clone(),
            file,
            label: rec.label,
            unit_label: rec.unit_label,
            seed: p.seed,
            table: p.table,
            spec: p.spec.clone(),
        })
    });
    let mut entries = Vec::with_capacity(results.len());
    let mut failure = None;
    for r in results {
        match r {
            Ok(e) => entries.push(e),
            Err(e) if failure.is_none() => failure = Some(e),
            Err(_) => {}
        }
    }
    if let Some(e) = failure {
        cleanup(dir, plan);
        return Err(e);
    }
    let manifest = Manifest { entries };
    if let Err(e) = manifest.write(dir) {
        cleanup(dir, plan);
        return Err(e);
    }
    Ok(manifest)
}

fn cleanup(dir: &Path, plan: &[PlannedRecord]) {
    let mut paths: Vec<PathBuf> = plan.iter().map(|p| dir.join(format!("{}.wave", p.id))).collect();
    paths.push(dir.join(Manifest::FILE));
    paths.push(dir.join(Manifest::SUMMARY));
    for p in paths {
        let _ = std::fs::remove_file(p);
    }
}
