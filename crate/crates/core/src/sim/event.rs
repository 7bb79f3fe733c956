//! Event descriptions and class labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Healthy,
    InternalPhaseGround,
    InternalTurnTurn,
    InternalWindingWinding,
    MagnetizingInrush,
    SympatheticInrush,
    Overexcitation,
    ExternalFaultCtSat,
}

impl EventKind {
    pub const ALL: [EventKind; 8] = [
        EventKind::Healthy,
        EventKind::InternalPhaseGround,
        EventKind::InternalTurnTurn,
        EventKind::InternalWindingWinding,
        EventKind::MagnetizingInrush,
        EventKind::SympatheticInrush,
        EventKind::Overexcitation,
        EventKind::ExternalFaultCtSat,
    ];

    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Result<EventKind> {
        EventKind::ALL
            .get(code as usize)
            .copied()
            .ok_or_else(|| Error::format("event kind", format!("unknown label code {code}")))
    }

    pub fn is_internal(self) -> bool {
        matches!(
            self,
            EventKind::InternalPhaseGround | EventKind::InternalTurnTurn | EventKind::InternalWindingWinding
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            EventKind::Healthy => "healthy",
            EventKind::InternalPhaseGround => "internal-phase-ground",
            EventKind::InternalTurnTurn => "internal-turn-turn",
            EventKind::InternalWindingWinding => "internal-winding-winding",
            EventKind::MagnetizingInrush => "magnetizing-inrush",
            EventKind::SympatheticInrush => "sympathetic-inrush",
            EventKind::Overexcitation => "overexcitation",
            EventKind::ExternalFaultCtSat => "external-fault-ct-sat",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unit {
    Series,
    Exciting,
}

/// Unit label stored with a record (`None` for non-internal events).
pub fn unit_code(unit: Option<Unit>) -> u32 {
    match unit {
        None => 0,
        Some(Unit::Series) => 1,
        Some(Unit::Exciting) => 2,
    }
}

pub fn unit_from_code(code: u32) -> Result<Option<Unit>> {
    match code {
        0 => Ok(None),
        1 => Ok(Some(Unit::Series)),
        2 => Ok(Some(Unit::Exciting)),
        _ => Err(Error::format("unit label", format!("unknown code {code}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Primary,
    Secondary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    A,
    B,
    C,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::A, Phase::B, Phase::C];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// The eleven shunt fault types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultType {
    Ag,
    Bg,
    Cg,
    Abg,
    Acg,
    Bcg,
    Ab,
    Ac,
    Bc,
    Abc,
    Abcg,
}

impl FaultType {
    pub const ALL: [FaultType; 11] = [
        FaultType::Ag,
        FaultType::Bg,
        FaultType::Cg,
        FaultType::Abg,
        FaultType::Acg,
        FaultType::Bcg,
        FaultType::Ab,
        FaultType::Ac,
        FaultType::Bc,
        FaultType::Abc,
        FaultType::Abcg,
    ];

    pub fn phases(self) -> &'static [Phase] {
        use Phase::*;
        match self {
            FaultType::Ag => &[A],
            FaultType::Bg => &[B],
            FaultType::Cg => &[C],
            FaultType::Abg | FaultType::Ab => &[A, B],
            FaultType::Acg | FaultType::Ac => &[A, C],
            FaultType::Bcg | FaultType::Bc => &[B, C],
            FaultType::Abc | FaultType::Abcg => &[A, B, C],
        }
    }

    pub fn grounded(self) -> bool {
        !matches!(self, FaultType::Ab | FaultType::Ac | FaultType::Bc | FaultType::Abc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseShift {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwitchTarget {
    Load,
    Capacitor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Line {
    Line1,
    Line2,
}

/// Residual flux pattern: `phase` carries `level` (fraction of peak rated
/// flux), the other two phases carry `-level / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualFlux {
    pub phase: Phase,
    pub level: f64,
}

impl ResidualFlux {
    pub const ZERO: ResidualFlux = ResidualFlux { phase: Phase::A, level: 0.0 };

    pub fn per_phase(&self) -> [f64; 3] {
        let mut out = [-self.level / 2.0; 3];
        out[self.phase.index()] = self.level;
        if self.level == 0.0 {
            out = [0.0; 3];
        }
        out
    }
}

/// One simulated event. Fields that do not apply to `kind` are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub kind: EventKind,
    #[serde(default)]
    pub unit: Option<Unit>,
    #[serde(default)]
    pub side: Option<Side>,
    #[serde(default)]
    pub fault_type: Option<FaultType>,
    /// Faulted phase for turn-to-turn and winding-to-winding faults.
    #[serde(default)]
    pub phase: Option<Phase>,
    #[serde(default)]
    pub fault_resistance: Option<f64>,
    #[serde(default)]
    pub winding_percent: Option<f64>,
    pub inception_time: f64,
    pub phase_shift: PhaseShift,
    pub tap_ratio: f64,
    #[serde(default)]
    pub switch_target: Option<SwitchTarget>,
    /// Overvoltage level for overexcitation events (e.g. 1.25).
    #[serde(default)]
    pub switch_level: Option<f64>,
    #[serde(default)]
    pub fault_location: Option<Line>,
    #[serde(default)]
    pub residual_flux: Option<ResidualFlux>,
}

impl EventSpec {
    /// Steady operation, nothing switched.
    pub fn healthy(tap_ratio: f64, phase_shift: PhaseShift) -> EventSpec {
        EventSpec {
            kind: EventKind::Healthy,
            unit: None,
            side: None,
            fault_type: None,
            phase: None,
            fault_resistance: None,
            winding_percent: None,
            inception_time: 10.0,
            phase_shift,
            tap_ratio,
            switch_target: None,
            switch_level: None,
            fault_location: None,
            residual_flux: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(format!("{} event: {m}", self.kind.name())));
        if !(self.tap_ratio > 0.0 && self.tap_ratio <= 1.0) {
            return bad("tap ratio must lie in (0, 1]");
        }
        if !self.inception_time.is_finite() {
            return bad("inception time must be finite");
        }
        if let Some(r) = self.fault_resistance {
            if !(r > 0.0 && r.is_finite()) {
                return bad("fault resistance must be positive");
            }
        }
        if let Some(p) = self.winding_percent {
            if !(p > 0.0 && p < 100.0) {
                return bad("winding percent must lie in (0, 100)");
            }
        }
        if let Some(r) = self.residual_flux {
            if !(r.level.abs() <= 0.8) {
                return bad("residual flux must lie in [-0.8, 0.8]");
            }
        }
        if let Some(l) = self.switch_level {
            if !(l > 1.0 && l < 2.0) {
                return bad("switch level must lie in (1, 2)");
            }
        }
        let internal = self.kind.is_internal();
        if internal != self.unit.is_some() {
            return bad("unit is required for internal faults and forbidden otherwise");
        }
        let has = |present: bool, needed: bool, name: &str| -> Result<()> {
            if present != needed {
                let verb = if needed { "requires" } else { "does not take" };
                return Err(Error::invalid(format!("{} event {verb} {name}", self.kind.name())));
            }
            Ok(())
        };
        use EventKind::*;
        let k = self.kind;
        has(self.side.is_some(), matches!(k, InternalPhaseGround | InternalTurnTurn), "side")?;
        has(self.fault_type.is_some(), matches!(k, InternalPhaseGround | ExternalFaultCtSat), "fault_type")?;
        has(self.phase.is_some(), matches!(k, InternalTurnTurn | InternalWindingWinding), "phase")?;
        has(self.fault_resistance.is_some(), internal || k == ExternalFaultCtSat, "fault_resistance")?;
        has(self.winding_percent.is_some(), internal, "winding_percent")?;
        has(self.switch_target.is_some(), k == Overexcitation, "switch_target")?;
        has(self.switch_level.is_some(), k == Overexcitation, "switch_level")?;
        has(self.fault_location.is_some(), k == ExternalFaultCtSat, "fault_location")?;
        has(self.residual_flux.is_some(), matches!(k, MagnetizingInrush | SympatheticInrush), "residual_flux")?;
        Ok(())
    }
}

/// Target class of a record for each of the three applications.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Application {
    /// 0 = internal fault, 1 = disturbance.
    Detect,
    /// 0 = series unit, 1 = exciting unit (internal faults only).
    Locate,
    /// 0 = magnetizing inrush, 1 = sympathetic inrush, 2 = overexcitation,
    /// 3 = external fault with CT saturation (disturbances only).
    Identify,
}

impl Application {
    pub const ALL: [Application; 3] = [Application::Detect, Application::Locate, Application::Identify];

    pub fn name(self) -> &'static str {
        match self {
            Application::Detect => "detect",
            Application::Locate => "locate",
            Application::Identify => "identify",
        }
    }

    pub fn class_names(self) -> &'static [&'static str] {
        match self {
            Application::Detect => &["internal fault", "disturbance"],
            Application::Locate => &["series unit", "exciting unit"],
            Application::Identify => {
                &["magnetizing inrush", "sympathetic inrush", "overexcitation", "external fault with CT saturation"]
            }
        }
    }

    /// Class of an event under this application, `None` when the event is
    /// outside its population.
    pub fn class_of(self, kind: EventKind, unit: Option<Unit>) -> Option<usize> {
        use EventKind::*;
        match self {
            Application::Detect => match kind {
                Healthy => None,
                k if k.is_internal() => Some(0),
                _ => Some(1),
            },
            Application::Locate => match (kind.is_internal(), unit) {
                (true, Some(Unit::Series)) => Some(0),
                (true, Some(Unit::Exciting)) => Some(1),
                _ => None,
            },
            Application::Identify => match kind {
                MagnetizingInrush => Some(0),
                SympatheticInrush => Some(1),
                Overexcitation => Some(2),
                ExternalFaultCtSat => Some(3),
                _ => None,
            },
        }
    }
}
