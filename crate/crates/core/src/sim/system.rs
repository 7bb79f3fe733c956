//! Three-phase regulating transformer (series + exciting unit) in a simple
//! source / line / load network, and event simulation on it.
//!
//! Per phase, the series winding runs from the source-side terminal `S`
//! through the midpoint `M` to the load-side terminal `L`. The exciting unit
//! primary is connected from `M` to ground, its tapped secondary from `X` to
//! ground, and the series unit's third winding of phase `k` is fed between
//! `X` of the two other phases, which produces the quadrature boost.

use std::f64::consts::{PI, SQRT_2};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::ct::{secondary_current, CtParams};
use super::event::{EventKind, EventSpec, FaultType, Line, Phase, PhaseShift, Side, SwitchTarget, Unit};
use super::inductance::{three_winding_matrix, two_winding_matrix, InductanceModel, TransformerRating};
use super::network::{Branch, Core, Emf, Network, Node, Transient, Window, GROUND};
use super::record::WaveformRecord;
use super::saturation::SaturationCurve;
use crate::error::{Error, Result};

/// Ratings of the two units at full tap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsparRating {
    /// Windings 1 and 2 are the two halves of the series winding, winding 3
    /// the excitation winding.
    pub series: TransformerRating,
    /// Winding 1 is the shunt primary, winding 2 the regulating winding at
    /// full tap.
    pub exciting: TransformerRating,
}

impl Default for IsparRating {
    fn default() -> Self {
        let f = 60.0;
        let v_ph = 230e3 / 3f64.sqrt();
        let unit_va = 114e6;
        // windings of one core share a volt-ampere base so that the
        // per-winding magnetizing terms describe a single core
        let half_va = 45.4e3 * 1255.0;
        IsparRating {
            series: TransformerRating {
                v1: 45.4e3,
                v2: 45.4e3,
                v3: 69.28e3,
                i1: 1255.0,
                i2: 1255.0,
                i3: half_va / 69.28e3,
                x12: 0.08,
                x13: 0.10,
                x23: 0.10,
                im: 0.004,
                f,
            },
            exciting: TransformerRating::two_winding(v_ph, 40e3, unit_va / v_ph, unit_va / 40e3, 0.06, 0.004, f),
        }
    }
}

impl IsparRating {
    /// Exciting unit with the regulating winding at `tap` of its turns.
    pub fn exciting_at(&self, tap: f64) -> TransformerRating {
        let mut r = self.exciting.clone();
        r.v2 *= tap;
        r.i2 /= tap;
        r
    }

    /// Rated through current of the regulator (RMS amperes).
    pub fn rated_current(&self) -> f64 {
        self.series.i1
    }

    pub fn validate(&self) -> Result<()> {
        self.series.validate()?;
        self.exciting.validate()?;
        if self.series.f != self.exciting.f {
            return Err(Error::invalid("series and exciting units must share one frequency"));
        }
        Ok(())
    }
}

/// Source, lines, load and auxiliary equipment. Impedances are per-unit on
/// the system base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConstants {
    pub base_mva: f64,
    pub base_kv: f64,
    pub frequency: f64,
    pub sample_rate: f64,
    /// Source EMF magnitude (pu).
    pub source_pu: f64,
    pub rsys_pu: f64,
    pub xsys_pu: f64,
    /// Winding resistance of every regulator winding (pu on its own base).
    pub winding_r_pu: f64,
    pub line1: [f64; 2],
    pub line2: [f64; 2],
    pub load_pu: f64,
    pub load_pf: f64,
    /// Split point used for unfaulted windings (percent).
    pub healthy_split: f64,
    /// Conductance from every node to ground (S).
    pub node_shunt: f64,
    /// Record span before / after the nominal event time (cycles).
    pub pre_cycles: f64,
    pub post_cycles: f64,
    pub nominal_event_time: f64,
    /// Signal-to-noise ratio of the additive measurement noise (dB), `None`
    /// for noiseless records.
    pub snr_db: Option<f64>,
    /// Incoming transformer for sympathetic inrush (three-phase MVA).
    pub incoming_mva: f64,
    pub incoming_x_pu: f64,
    pub incoming_r_pu: f64,
    pub incoming_im: f64,
    /// Series damping of the switched capacitor, as fractions of its
    /// reactance.
    pub capacitor_r_frac: f64,
    pub capacitor_x_frac: f64,
    pub ct_source: CtParams,
    pub ct_load: CtParams,
}

impl Default for NetworkConstants {
    fn default() -> Self {
        NetworkConstants {
            base_mva: 500.0,
            base_kv: 230.0,
            frequency: 60.0,
            sample_rate: 10_000.0,
            source_pu: 1.0,
            rsys_pu: 0.02,
            xsys_pu: 0.05,
            winding_r_pu: 0.002,
            line1: [0.005, 0.05],
            line2: [0.008, 0.08],
            load_pu: 0.8,
            load_pf: 0.9,
            healthy_split: 50.0,
            node_shunt: 1e-8,
            pre_cycles: 3.0,
            post_cycles: 6.0,
            nominal_event_time: 10.0,
            snr_db: Some(60.0),
            incoming_mva: 500.0,
            incoming_x_pu: 0.12,
            incoming_r_pu: 0.003,
            incoming_im: 0.004,
            capacitor_r_frac: 0.02,
            capacitor_x_frac: 0.01,
            ct_source: CtParams { knee_multiple: 4.0, t_m: 1.0, t_sat: 0.002 },
            ct_load: CtParams { knee_multiple: 8.0, t_m: 2.0, t_sat: 0.004 },
        }
    }
}

impl NetworkConstants {
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    pub fn step(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn z_base(&self) -> f64 {
        self.base_kv * self.base_kv / self.base_mva
    }

    /// Phase-to-ground RMS voltage (V).
    pub fn v_phase(&self) -> f64 {
        self.base_kv * 1e3 / 3f64.sqrt()
    }

    /// Samples per power-frequency cycle.
    pub fn cycle_samples(&self) -> usize {
        (self.sample_rate / self.frequency).round() as usize
    }

    pub fn record_start(&self) -> f64 {
        self.nominal_event_time - self.pre_cycles / self.frequency
    }

    pub fn record_len(&self) -> usize {
        ((self.pre_cycles + self.post_cycles) / self.frequency * self.sample_rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.base_mva,
            self.base_kv,
            self.frequency,
            self.sample_rate,
            self.rsys_pu,
            self.xsys_pu,
            self.winding_r_pu,
            self.load_pu,
            self.node_shunt,
            self.incoming_mva,
            self.incoming_x_pu,
            self.incoming_r_pu,
            self.incoming_im,
            self.line1[1],
            self.line2[1],
        ];
        if pos.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("network constants must be positive and finite"));
        }
        if !(self.source_pu >= 0.0) || self.line1[0] < 0.0 || self.line2[0] < 0.0 {
            return Err(Error::invalid("source magnitude and line resistances must be non-negative"));
        }
        if !(self.load_pf > 0.0 && self.load_pf <= 1.0) {
            return Err(Error::invalid("load power factor must lie in (0, 1]"));
        }
        if !(self.healthy_split > 0.0 && self.healthy_split < 100.0) {
            return Err(Error::invalid("healthy split must lie in (0, 100)"));
        }
        if self.pre_cycles < 2.0 || self.post_cycles < 3.0 {
            return Err(Error::invalid("record must span at least 2 cycles before and 3 after the event"));
        }
        self.ct_source.validate()?;
        self.ct_load.validate()
    }
}

/// Core flux at time `t` after energization at `t_prime` (driving flux of a
/// transformer switched onto a sinusoidal source).
pub fn inrush_flux(t: f64, phi_r: f64, phi_m: f64, t_prime: f64, omega: f64) -> f64 {
    phi_r + phi_m * (omega * t_prime).cos() - phi_m * (omega * (t + t_prime)).cos()
}

/// Matrix `T` with `i_S = T i_L` for the ideal (lossless, unmagnetized)
/// regulator, so that `Id = i_S - T i_L`.
pub fn differential_transform(rating: &IsparRating, tap: f64, shift: PhaseShift) -> [[f64; 3]; 3] {
    let s = &rating.series;
    let e = rating.exciting_at(tap);
    let c = e.v2 / (e.v1 * s.v3);
    let sign = match shift {
        PhaseShift::Forward => 1.0,
        PhaseShift::Backward => -1.0,
    };
    let p = [[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]];
    let mut a = [[0.0; 3]; 3];
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            a[i][j] = id - c * s.v1 * sign * p[i][j];
            b[i][j] = id + c * s.v2 * sign * p[i][j];
        }
    }
    let ainv = nalgebra::Matrix3::from_fn(|i, j| a[i][j]).try_inverse().expect("well conditioned for physical ratings");
    let t = ainv * nalgebra::Matrix3::from_fn(|i, j| b[i][j]);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = t[(i, j)];
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
struct PhaseNodes {
    s: Node,
    p1: Node,
    m: Node,
    p2: Node,
    l: Node,
    q1: Node,
    x: Node,
    q2: Node,
    p3: Node,
    n1: Node,
    n2: Node,
    lb: Node,
}

struct Built {
    net: Network,
    series: [usize; 3],
    exciting: [usize; 3],
}

/// Terminal and differential currents of one run.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub start_time: f64,
    pub sample_rate: f64,
    /// Source-side terminal currents (into the regulator).
    pub source_current: [Vec<f64>; 3],
    /// Load-side terminal currents (out of the regulator).
    pub load_current: [Vec<f64>; 3],
    /// Differential currents, after CT models where they apply.
    pub differential: [Vec<f64>; 3],
    /// Exciting-unit core flux referred to its primary, per unit of rated.
    pub exciting_flux: [Vec<f64>; 3],
    pub inception_index: usize,
}

/// Resistance and inductance of a per-unit impedance on the system base.
fn rl(net: &NetworkConstants, r_pu: f64, x_pu: f64) -> (f64, f64) {
    let zb = net.z_base();
    (r_pu * zb, x_pu * zb / net.omega())
}

fn core_for(
    model: &InductanceModel,
    rating: &TransformerRating,
    windings: Vec<(Node, Node)>,
    resistance: Vec<f64>,
    sat: &SaturationCurve,
    residual: f64,
    window: Window,
) -> Core {
    let omega = rating.omega();
    let l_ref = rating.v1 / (omega * rating.im * rating.i1);
    let flux_rated = SQRT_2 * rating.v1 / omega;
    Core {
        windings,
        leakage: model.leakage.clone(),
        resistance,
        turns: model.turns_vector(l_ref),
        curve: sat.core_curve(l_ref, flux_rated),
        residual_flux: residual * flux_rated,
        window,
    }
}

fn split_resistances(r_pu: f64, bases: &[(f64, f64)], fractions: &[f64]) -> Vec<f64> {
    bases.iter().zip(fractions).map(|(&(v, i), f)| r_pu * v / i * f).collect()
}

fn build(spec: &EventSpec, rating: &IsparRating, sat: &SaturationCurve, nc: &NetworkConstants) -> Result<Built> {
    let omega = nc.omega();
    let tap = spec.tap_ratio;
    let t_ev = spec.inception_time;
    let mut net = Network { shunt: nc.node_shunt, ..Default::default() };
    let mut nodes = Vec::with_capacity(3);
    for _ in 0..3 {
        let mut n = || net.add_node();
        nodes.push(PhaseNodes {
            s: n(),
            p1: n(),
            m: n(),
            p2: n(),
            l: n(),
            q1: n(),
            x: n(),
            q2: n(),
            p3: n(),
            n1: n(),
            n2: n(),
            lb: n(),
        });
    }
    let star = net.add_node();

    // source
    let (rs, ls) = rl(nc, nc.rsys_pu, nc.xsys_pu);
    let emf_peak = SQRT_2 * nc.v_phase() * nc.source_pu;
    let steps = match (spec.kind, spec.switch_target, spec.switch_level) {
        (EventKind::Overexcitation, Some(SwitchTarget::Load), Some(level)) => vec![(t_ev, level)],
        _ => vec![],
    };
    for (k, pn) in nodes.iter().enumerate() {
        net.add_branch(Branch {
            p: GROUND,
            q: pn.s,
            r: rs,
            l: ls,
            c: None,
            emf: Some(Emf { peak: emf_peak, omega, phase: -2.0 * PI * k as f64 / 3.0, steps: steps.clone() }),
            window: Window::ALWAYS,
        });
    }

    // lines and load
    let load_z = nc.v_phase().powi(2) / (nc.load_pu * nc.base_mva * 1e6 / 3.0);
    let load_r = load_z * nc.load_pf;
    let load_l = load_z * (1.0 - nc.load_pf * nc.load_pf).sqrt() / omega;
    for pn in &nodes {
        let (r1, l1) = rl(nc, nc.line1[0] / 2.0, nc.line1[1] / 2.0);
        let (r2, l2) = rl(nc, nc.line2[0] / 2.0, nc.line2[1] / 2.0);
        net.add_branch(Branch::rl(pn.l, pn.n1, r1, l1));
        net.add_branch(Branch::rl(pn.n1, pn.lb, r1, l1));
        net.add_branch(Branch::rl(pn.l, pn.n2, r2, l2));
        net.add_branch(Branch::rl(pn.n2, pn.lb, r2, l2));
        net.add_branch(Branch::rl(pn.lb, GROUND, load_r, load_l));
    }

    // regulator
    let internal_pct = if spec.kind.is_internal() { spec.winding_percent } else { None };
    let series_split = match spec.unit {
        Some(Unit::Series) => internal_pct.unwrap_or(nc.healthy_split),
        _ => nc.healthy_split,
    };
    let exciting_split = match spec.unit {
        Some(Unit::Exciting) => internal_pct.unwrap_or(nc.healthy_split),
        _ => nc.healthy_split,
    };
    let sr = &rating.series;
    let er = rating.exciting_at(tap);
    let series_model = three_winding_matrix(sr, series_split, nc.healthy_split)?;
    let exciting_model = two_winding_matrix(&er, exciting_split)?;
    let (fa, fc) = (series_split / 100.0, nc.healthy_split / 100.0);
    let series_r = split_resistances(
        nc.winding_r_pu,
        &[(sr.v1, sr.i1), (sr.v1, sr.i1), (sr.v2, sr.i2), (sr.v2, sr.i2), (sr.v3, sr.i3), (sr.v3, sr.i3)],
        &[fa, 1.0 - fa, fc, 1.0 - fc, fa, 1.0 - fa],
    );
    let fe = exciting_split / 100.0;
    let exciting_r = split_resistances(
        nc.winding_r_pu,
        &[(er.v1, er.i1), (er.v1, er.i1), (er.v2, er.i2), (er.v2, er.i2)],
        &[fe, 1.0 - fe, fe, 1.0 - fe],
    );

    let energize = if spec.kind == EventKind::MagnetizingInrush { Window::from(t_ev) } else { Window::ALWAYS };
    let residual =
        if spec.kind == EventKind::MagnetizingInrush { spec.residual_flux.map(|r| r.per_phase()) } else { None }
            .unwrap_or([0.0; 3]);
    let mut series = [0; 3];
    let mut exciting = [0; 3];
    for k in 0..3 {
        let pn = nodes[k];
        let (xa, xb) = (nodes[(k + 1) % 3].x, nodes[(k + 2) % 3].x);
        let (from, to) = match spec.phase_shift {
            PhaseShift::Forward => (xa, xb),
            PhaseShift::Backward => (xb, xa),
        };
        let sw = vec![(pn.s, pn.p1), (pn.p1, pn.m), (pn.m, pn.p2), (pn.p2, pn.l), (from, pn.p3), (pn.p3, to)];
        series[k] = net.add_core(core_for(&series_model, sr, sw, series_r.clone(), sat, 0.0, energize));
        let ew = vec![(pn.m, pn.q1), (pn.q1, GROUND), (pn.x, pn.q2), (pn.q2, GROUND)];
        exciting[k] = net.add_core(core_for(&exciting_model, &er, ew, exciting_r.clone(), sat, residual[k], energize));
    }

    if spec.kind == EventKind::SympatheticInrush {
        let residual = spec.residual_flux.map(|r| r.per_phase()).unwrap_or([0.0; 3]);
        let v = nc.v_phase();
        let i = nc.incoming_mva * 1e6 / 3.0 / v;
        let z = v / i;
        let l_ref = z / (omega * nc.incoming_im);
        let flux_rated = SQRT_2 * v / omega;
        for k in 0..3 {
            net.add_core(Core {
                windings: vec![(nodes[k].s, GROUND)],
                leakage: vec![nc.incoming_x_pu * z / omega],
                resistance: vec![nc.incoming_r_pu * z],
                turns: vec![1.0],
                curve: sat.core_curve(l_ref, flux_rated),
                residual_flux: residual[k] * flux_rated,
                window: Window::from(t_ev),
            });
        }
    }

    if spec.kind == EventKind::Overexcitation && spec.switch_target == Some(SwitchTarget::Capacitor) {
        let level = spec.switch_level.expect("validated");
        let x_th = nc.xsys_pu * nc.z_base();
        let b = (1.0 - 1.0 / level) / x_th;
        let xc = 1.0 / (b * (1.0 - nc.capacitor_x_frac));
        for pn in &nodes {
            net.add_branch(Branch {
                p: pn.s,
                q: GROUND,
                r: nc.capacitor_r_frac * xc,
                l: nc.capacitor_x_frac * xc / omega,
                c: Some(1.0 / (omega * xc)),
                emf: None,
                window: Window::from(t_ev),
            });
        }
    }

    let fault = |net: &mut Network, p: Node, q: Node, r: f64| {
        net.add_branch(Branch::rl(p, q, r, 0.0).active_from(t_ev));
    };
    let shunt_fault = |net: &mut Network, at: &dyn Fn(Phase) -> Node, ft: FaultType, r: f64| {
        let ph = ft.phases();
        if ft.grounded() {
            for &p in ph {
                fault(net, at(p), GROUND, r);
            }
        } else if ph.len() == 2 {
            fault(net, at(ph[0]), at(ph[1]), r);
        } else {
            for &p in ph {
                fault(net, at(p), star, r);
            }
        }
    };

    if spec.kind.is_internal() {
        let unit = spec.unit.expect("validated");
        let r = spec.fault_resistance.expect("validated");
        // first sub-coil of the faulted winding
        let first = |side: Side| match (unit, side) {
            (Unit::Series, Side::Primary) => 0,
            (Unit::Series, Side::Secondary) => 4,
            (Unit::Exciting, Side::Primary) => 0,
            (Unit::Exciting, Side::Secondary) => 2,
        };
        let cores = match unit {
            Unit::Series => series,
            Unit::Exciting => exciting,
        };
        let winding = |net: &Network, p: Phase, w: usize| net.cores[cores[p.index()]].windings[w];
        match spec.kind {
            EventKind::InternalPhaseGround => {
                let w = first(spec.side.expect("validated"));
                let snapshot = net.clone();
                shunt_fault(&mut net, &|p| winding(&snapshot, p, w).1, spec.fault_type.expect("validated"), r);
            }
            EventKind::InternalTurnTurn => {
                let (p, q) = winding(&net, spec.phase.expect("validated"), first(spec.side.expect("validated")));
                fault(&mut net, p, q, r);
            }
            EventKind::InternalWindingWinding => {
                let ph = spec.phase.expect("validated");
                let a = winding(&net, ph, first(Side::Primary)).1;
                let b = winding(&net, ph, first(Side::Secondary)).1;
                fault(&mut net, a, b, r);
            }
            _ => unreachable!(),
        }
    }

    if spec.kind == EventKind::ExternalFaultCtSat {
        let r = spec.fault_resistance.expect("validated");
        let line = spec.fault_location.expect("validated");
        let at = |p: Phase| match line {
            Line::Line1 => nodes[p.index()].n1,
            Line::Line2 => nodes[p.index()].n2,
        };
        shunt_fault(&mut net, &at, spec.fault_type.expect("validated"), r);
    }

    Ok(Built { net, series, exciting })
}

/// Run the network for one event and form the differential currents
/// (noiseless).
pub fn simulate_currents(
    spec: &EventSpec,
    rating: &IsparRating,
    sat: &SaturationCurve,
    nc: &NetworkConstants,
) -> Result<Simulation> {
    spec.validate()?;
    rating.validate()?;
    sat.validate()?;
    nc.validate()?;
    if (rating.series.f - nc.frequency).abs() > 1e-9 {
        return Err(Error::invalid("rating frequency differs from the network frequency"));
    }
    let start = nc.record_start();
    let end = start + nc.record_len() as f64 / nc.sample_rate;
    let cyc = 1.0 / nc.frequency;
    if spec.kind != EventKind::Healthy
        && (spec.inception_time < start + 2.0 * cyc - 1e-9 || spec.inception_time > end - 3.0 * cyc + 1e-9)
    {
        return Err(Error::invalid(format!(
            "inception time {} leaves less than 2 cycles before or 3 cycles after it in [{start}, {end}]",
            spec.inception_time
        )));
    }

    let built = build(spec, rating, sat, nc)?;
    let h = nc.step();
    let n = nc.record_len();
    let mut tr = Transient::steady_state(&built.net, start, h, nc.omega())?;
    let mut i_s: [Vec<f64>; 3] = Default::default();
    let mut i_l: [Vec<f64>; 3] = Default::default();
    let mut flux: [Vec<f64>; 3] = Default::default();
    let er = rating.exciting_at(spec.tap_ratio);
    let flux_rated = SQRT_2 * er.v1 / er.omega();
    for k in 0..n {
        if k > 0 {
            tr.step()?;
        }
        for p in 0..3 {
            i_s[p].push(tr.winding_current(built.series[p], 0));
            i_l[p].push(tr.winding_current(built.series[p], 3));
            // primary flux linkage of the exciting unit minus leakage
            let c = &built.net.cores[built.exciting[p]];
            let psi: f64 = (0..2)
                .map(|w| tr.winding_flux(built.exciting[p], w) - c.leakage[w] * tr.winding_current(built.exciting[p], w))
                .sum();
            flux[p].push(psi / flux_rated);
        }
    }

    let (src_sec, load_sec) = if spec.kind == EventKind::ExternalFaultCtSat {
        let rated = rating.rated_current();
        let cyc_n = nc.cycle_samples();
        let ct = |p: &CtParams, x: &[Vec<f64>; 3]| -> [Vec<f64>; 3] {
            std::array::from_fn(|k| secondary_current(p, rated, nc.omega(), h, &x[k], cyc_n))
        };
        (ct(&nc.ct_source, &i_s), ct(&nc.ct_load, &i_l))
    } else {
        (i_s.clone(), i_l.clone())
    };
    let t = differential_transform(rating, spec.tap_ratio, spec.phase_shift);
    let differential: [Vec<f64>; 3] = std::array::from_fn(|p| {
        (0..n).map(|k| src_sec[p][k] - (0..3).map(|q| t[p][q] * load_sec[q][k]).sum::<f64>()).collect()
    });
    if differential.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::SimulationFault { time: end, detail: "non-finite differential current".into() });
    }
    let inception_index = ((spec.inception_time - start) * nc.sample_rate - 1e-9).ceil().max(0.0) as usize;
    Ok(Simulation {
        start_time: start,
        sample_rate: nc.sample_rate,
        source_current: i_s,
        load_current: i_l,
        differential,
        exciting_flux: flux,
        inception_index,
    })
}

/// Add zero-mean Gaussian noise at `snr_db` relative to the RMS of the
/// samples before `event_index`. A channel that is zero before the event
/// (de-energized regulator) is left untouched.
pub fn add_noise(channels: &mut [Vec<f64>; 3], event_index: usize, snr_db: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rms = |x: &[f64]| (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt();
    for ch in channels.iter_mut() {
        let pre = &ch[..event_index.min(ch.len())];
        let sigma = rms(pre) * 10f64.powf(-snr_db / 20.0);
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma).expect("finite sigma");
            for x in ch.iter_mut() {
                *x += normal.sample(&mut rng);
            }
        }
    }
}

/// Simulate one event into a labeled record; bit-reproducible from
/// `(spec, seed)`.
pub fn simulate_event(
    spec: &EventSpec,
    rating: &IsparRating,
    sat: &SaturationCurve,
    nc: &NetworkConstants,
    seed: u64,
) -> Result<WaveformRecord> {
    let sim = simulate_currents(spec, rating, sat, nc)?;
    let mut id = sim.differential;
    if let Some(snr) = nc.snr_db {
        add_noise(&mut id, sim.inception_index, snr, seed);
    }
    Ok(WaveformRecord {
        id,
        sample_rate: sim.sample_rate,
        label: spec.kind,
        unit_label: if spec.kind.is_internal() { spec.unit } else { None },
        spec: spec.clone(),
        seed,
        start_time: sim.start_time,
    })
}
