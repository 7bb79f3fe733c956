//! Cascaded decision on one captured window: the fault detector runs
//! first, then the unit locator on a fault or the disturbance identifier
//! otherwise.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::detect::CaptureWindow;
use crate::error::{Error, Result};
use crate::features::extract::schema;
use crate::features::{window_features, FeatureMode};
use crate::models::TrainedModel;
use crate::sim::event::{Application, EventKind, Unit};

/// A trained model together with the features it was trained on.
#[derive(Clone, Debug)]
pub struct DecisionModel {
    pub application: Application,
    pub mode: FeatureMode,
    pub columns: Vec<String>,
    pub window_len: usize,
    pub model: TrainedModel,
}

impl DecisionModel {
    pub fn new(
        application: Application,
        mode: FeatureMode,
        columns: Vec<String>,
        window_len: usize,
        model: TrainedModel,
    ) -> Result<DecisionModel> {
        let names = schema(&mode, window_len)?;
        if names != columns {
            return Err(Error::SchemaMismatch(format!(
                "{} model: feature mode yields {} columns that differ from the {} training columns",
                application.name(),
                names.len(),
                columns.len()
            )));
        }
        if model.n_features != columns.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} model expects {} features, schema has {}",
                application.name(),
                model.n_features,
                columns.len()
            )));
        }
        let classes = application.class_names().len();
        if model.n_classes != classes {
            return Err(Error::SchemaMismatch(format!(
                "{} model has {} classes, the application has {classes}",
                application.name(),
                model.n_classes
            )));
        }
        Ok(DecisionModel { application, mode, columns, window_len, model })
    }

    pub fn predict(&self, w: &CaptureWindow) -> Result<usize> {
        if w.len() != self.window_len {
            return Err(Error::SchemaMismatch(format!(
                "window of {} samples, {} model was trained on {}",
                w.len(),
                self.application.name(),
                self.window_len
            )));
        }
        self.model.predict(&window_features(w, &self.mode)?)
    }
}

#[derive(Clone, Debug)]
pub struct DecisionModels {
    pub detector: DecisionModel,
    pub locator: DecisionModel,
    pub identifier: DecisionModel,
}

impl DecisionModels {
    pub fn new(detector: DecisionModel, locator: DecisionModel, identifier: DecisionModel) -> Result<DecisionModels> {
        let roles = [
            (&detector, Application::Detect),
            (&locator, Application::Locate),
            (&identifier, Application::Identify),
        ];
        for (m, app) in roles {
            if m.application != app {
                return Err(Error::SchemaMismatch(format!(
                    "a {} model was given where the {} model belongs",
                    m.application.name(),
                    app.name()
                )));
            }
        }
        if locator.window_len != detector.window_len || identifier.window_len != detector.window_len {
            return Err(Error::SchemaMismatch("the three models were trained on different window lengths".into()));
        }
        Ok(DecisionModels { detector, locator, identifier })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "decision")]
pub enum Verdict {
    Trip { unit: Unit },
    NoTrip { disturbance: EventKind },
}

impl Verdict {
    pub fn describe(&self) -> String {
        match self {
            Verdict::Trip { unit: Unit::Series } => "trip: internal fault in the series unit".into(),
            Verdict::Trip { unit: Unit::Exciting } => "trip: internal fault in the exciting unit".into(),
            Verdict::NoTrip { disturbance } => format!("no trip: {}", disturbance.name()),
        }
    }

    /// Whether the verdict agrees with the true event.
    pub fn matches(&self, kind: EventKind, unit: Option<Unit>) -> bool {
        match self {
            Verdict::Trip { unit: u } => kind.is_internal() && unit == Some(*u),
            Verdict::NoTrip { disturbance } => *disturbance == kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    /// Models consulted, in order.
    pub invoked: Vec<Application>,
    /// Seconds spent on feature extraction and prediction.
    pub latency: f64,
}

const UNITS: [Unit; 2] = [Unit::Series, Unit::Exciting];
const DISTURBANCES: [EventKind; 4] = [
    EventKind::MagnetizingInrush,
    EventKind::SympatheticInrush,
    EventKind::Overexcitation,
    EventKind::ExternalFaultCtSat,
];

pub fn three_stage_decision(window: &CaptureWindow, models: &DecisionModels) -> Result<Decision> {
    let t0 = Instant::now();
    let fault = models.detector.predict(window)? == 0;
    let verdict = if fault {
        Verdict::Trip { unit: UNITS[models.locator.predict(window)?] }
    } else {
        Verdict::NoTrip { disturbance: DISTURBANCES[models.identifier.predict(window)?] }
    };
    let latency = t0.elapsed().as_secs_f64();
    let second = if fault { Application::Locate } else { Application::Identify };
    Ok(Decision { verdict, invoked: vec![Application::Detect, second], latency })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{TimeFeature, TimeFeatureParams};
    use crate::models::{train, Dataset, DtParams, ModelSpec};
    use crate::par::Exec;
    use crate::sim::event::Phase;

    fn window(level: f64, freq: f64) -> CaptureWindow {
        CaptureWindow {
            start_index: 0,
            trigger_index: 0,
            samples: std::array::from_fn(|p| {
                (0..64).map(|t| level * (freq * t as f64 + p as f64).sin() + 0.01 * (t as f64 * 0.37).cos()).collect()
            }),
            trigger_phase: Phase::A,
        }
    }

    fn mode() -> FeatureMode {
        FeatureMode::Time {
            features: vec![TimeFeature::F2],
            params: TimeFeatureParams { trend_window: 16, ..Default::default() },
            schema: crate::features::TimeSchema::Scalar,
        }
    }

    /// A tree on per-phase maxima where class `c` has amplitude `c + 1`.
    fn model(app: Application) -> DecisionModel {
        let k = app.class_names().len();
        let m = mode();
        let cols = schema(&m, 64).unwrap();
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for c in 0..k {
            for j in 0..5 {
                rows.push(window_features(&window(c as f64 + 1.0, 0.2 + 0.01 * j as f64), &m).unwrap());
                y.push(c);
            }
        }
        let ds = Dataset::new(rows, y, cols.clone()).unwrap();
        let t = train(&ModelSpec::Dt(DtParams::default()), &ds, 0, Exec::Sequential).unwrap();
        DecisionModel::new(app, m, cols, 64, t).unwrap()
    }

    fn models() -> DecisionModels {
        DecisionModels::new(model(Application::Detect), model(Application::Locate), model(Application::Identify)).unwrap()
    }

    #[test]
    fn fault_branch_never_consults_the_identifier() {
        let d = three_stage_decision(&window(1.0, 0.21), &models()).unwrap();
        assert_eq!(d.verdict, Verdict::Trip { unit: Unit::Series });
        assert_eq!(d.invoked, vec![Application::Detect, Application::Locate]);
        assert!(d.latency >= 0.0);
    }

    #[test]
    fn disturbance_branch_never_consults_the_locator() {
        let d = three_stage_decision(&window(2.0, 0.21), &models()).unwrap();
        assert_eq!(d.verdict, Verdict::NoTrip { disturbance: EventKind::SympatheticInrush });
        assert_eq!(d.invoked, vec![Application::Detect, Application::Identify]);
    }

    #[test]
    fn mismatched_models_are_rejected() {
        let m = models();
        assert!(DecisionModels::new(m.locator.clone(), m.locator.clone(), m.identifier.clone()).is_err());
        let mut bad = m.detector.clone();
        bad.columns.pop();
        assert!(matches!(
            DecisionModel::new(Application::Detect, bad.mode, bad.columns, 64, bad.model),
            Err(Error::SchemaMismatch(_))
        ));
        let short = CaptureWindow { samples: std::array::from_fn(|_| vec![0.5; 40]), ..window(1.0, 0.2) };
        assert!(matches!(three_stage_decision(&short, &m), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn verdicts_match_truth() {
        assert!(Verdict::Trip { unit: Unit::Exciting }.matches(EventKind::InternalTurnTurn, Some(Unit::Exciting)));
        assert!(!Verdict::Trip { unit: Unit::Exciting }.matches(EventKind::InternalTurnTurn, Some(Unit::Series)));
        assert!(Verdict::NoTrip { disturbance: EventKind::Overexcitation }.matches(EventKind::Overexcitation, None));
    }
}
