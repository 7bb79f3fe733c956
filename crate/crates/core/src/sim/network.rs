//! Fixed-step trapezoidal-rule network solver.
//!
//! Every element is replaced by its trapezoidal companion (a conductance in
//! parallel with a history current source) and the resulting nodal system is
//! solved once per step. Node `0` is ground. Elements carry an activity
//! window, which is how breakers and faults are represented: an element
//! switched in starts from zero history, an element switched out is removed
//! from the nodal matrix.

use std::collections::HashMap;
use nalgebra::{Complex, DMatrix, DVector};

use super::saturation::CoreCurve;
use crate::error::{Error, Result};

pub type Node = usize;
pub const GROUND: Node = 0;

/// Half-open activity interval `[on, off)` in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub on: f64,
    pub off: f64,
}

impl Window {
    pub const ALWAYS: Window = Window { on: f64::NEG_INFINITY, off: f64::INFINITY };

    pub fn from(on: f64) -> Window {
        Window { on, off: f64::INFINITY }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.on && t < self.off
    }
}

/// Sinusoidal EMF `peak * scale(t) * cos(omega t + phase)`, where `scale`
/// is piecewise constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Emf {
    pub peak: f64,
    pub omega: f64,
    pub phase: f64,
    /// `(time, scale)` steps, sorted by time; scale is 1 before the first.
    pub steps: Vec<(f64, f64)>,
}

impl Emf {
    pub fn scale(&self, t: f64) -> f64 {
        self.steps.iter().take_while(|(ts, _)| t >= *ts).last().map_or(1.0, |&(_, s)| s)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.peak * self.scale(t) * (self.omega * t + self.phase).cos()
    }
}

/// Series R-L-C branch with an optional EMF, current positive from `p` to
/// `q`: `v_p - v_q + e = R i + L di/dt + u_C`.
#[derive(Clone, Debug)]
pub struct Branch {
    pub p: Node,
    pub q: Node,
    pub r: f64,
    pub l: f64,
    pub c: Option<f64>,
    pub emf: Option<Emf>,
    pub window: Window,
}

impl Branch {
    pub fn rl(p: Node, q: Node, r: f64, l: f64) -> Branch {
        Branch { p, q, r, l, c: None, emf: None, window: Window::ALWAYS }
    }

    pub fn active_from(mut self, on: f64) -> Branch {
        self.window = Window::from(on);
        self
    }
}

/// Windings coupled through one saturable core.
///
/// Flux linkages are `psi = diag(leakage) i + turns * F(turns . i)` where `F`
/// is the core characteristic referred to a reference winding.
#[derive(Clone, Debug)]
pub struct Core {
    pub windings: Vec<(Node, Node)>,
    pub leakage: Vec<f64>,
    pub resistance: Vec<f64>,
    pub turns: Vec<f64>,
    pub curve: CoreCurve,
    /// Core flux linkage (reference winding) when the core is switched in.
    pub residual_flux: f64,
    pub window: Window,
}

#[derive(Clone, Debug, Default)]
struct BranchState {
    i: f64,
    /// `v_p - v_q + e` at the last accepted step.
    ue: f64,
    uc: f64,
    active: bool,
}

#[derive(Clone, Debug, Default)]
struct CoreState {
    psi: Vec<f64>,
    i: Vec<f64>,
    u: Vec<f64>,
    segment: i32,
    active: bool,
}

/// Static network description.
#[derive(Clone, Debug, Default)]
pub struct Network {
    pub nodes: usize,
    pub branches: Vec<Branch>,
    pub cores: Vec<Core>,
    /// Leakage conductance from every node to ground (keeps isolated
    /// sub-networks solvable).
    pub shunt: f64,
}

impl Network {
    pub fn add_node(&mut self) -> Node {
        self.nodes += 1;
        self.nodes
    }

    pub fn add_branch(&mut self, b: Branch) -> usize {
        self.branches.push(b);
        self.branches.len() - 1
    }

    pub fn add_core(&mut self, c: Core) -> usize {
        self.cores.push(c);
        self.cores.len() - 1
    }
}

/// Companion data of one core on one segment.
#[derive(Clone, Debug)]
struct CoreCompanion {
    /// `(h/2) (L_seg + (h/2) R)^-1`
    g: DMatrix<f64>,
    /// `(L_seg + (h/2) R)^-1`
    a: DMatrix<f64>,
    offset: f64,
}

/// Transient solver state.
pub struct Transient<'a> {
    net: &'a Network,
    h: f64,
    t0: f64,
    steps: u64,
    t: f64,
    v: Vec<f64>,
    branches: Vec<BranchState>,
    cores: Vec<CoreState>,
    companions: HashMap<(usize, i32), CoreCompanion>,
    factors: HashMap<Vec<i32>, nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

const MAX_SEGMENT_ITERATIONS: usize = 24;

impl<'a> Transient<'a> {
    /// Start at `t0` in the sinusoidal steady state of the elements active at
    /// `t0` (all cores on their unsaturated segment), evaluated for the
    /// discretized network so the trapezoidal recursion is exactly periodic.
    pub fn steady_state(net: &'a Network, t0: f64, h: f64, omega: f64) -> Result<Self> {
        let mut tr = Transient {
            net,
            h,
            t0,
            steps: 0,
            t: t0,
            v: vec![0.0; net.nodes + 1],
            branches: vec![BranchState::default(); net.branches.len()],
            cores: net
                .cores
                .iter()
                .map(|c| CoreState {
                    psi: vec![0.0; c.windings.len()],
                    i: vec![0.0; c.windings.len()],
                    u: vec![0.0; c.windings.len()],
                    segment: 0,
                    active: false,
                })
                .collect(),
            companions: HashMap::new(),
            factors: HashMap::new(),
        };
        tr.init_phasor(omega)?;
        Ok(tr)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn node_voltage(&self, n: Node) -> f64 {
        self.v[n]
    }

    pub fn branch_current(&self, b: usize) -> f64 {
        self.branches[b].i
    }

    pub fn capacitor_voltage(&self, b: usize) -> f64 {
        self.branches[b].uc
    }

    pub fn winding_current(&self, core: usize, w: usize) -> f64 {
        self.cores[core].i[w]
    }

    pub fn winding_flux(&self, core: usize, w: usize) -> f64 {
        self.cores[core].psi[w]
    }

    pub fn core_segment(&self, core: usize) -> i32 {
        self.cores[core].segment
    }

    pub fn branch_active(&self, b: usize) -> bool {
        self.branches[b].active
    }

    fn init_phasor(&mut self, omega: f64) -> Result<()> {
        let net = self.net;
        let t0 = self.t;
        let h = self.h;
        let big_omega = (2.0 / h) * (omega * h / 2.0).tan();
        let n = net.nodes;
        let j = Complex::new(0.0, 1.0);
        let mut y = DMatrix::<Complex<f64>>::zeros(n, n);
        let mut rhs = DVector::<Complex<f64>>::zeros(n);
        for k in 0..n {
            y[(k, k)] += Complex::new(net.shunt, 0.0);
        }
        let stamp = |y: &mut DMatrix<Complex<f64>>, a: Node, b: Node, g: Complex<f64>| {
            if a != GROUND && b != GROUND {
                y[(a - 1, b - 1)] += g;
            }
        };

        let mut branch_adm = vec![None; net.branches.len()];
        for (bi, b) in net.branches.iter().enumerate() {
            if !b.window.contains(t0) {
                continue;
            }
            let mut z = Complex::new(b.r, big_omega * b.l);
            if let Some(c) = b.c {
                z += Complex::new(1.0, 0.0) / (j * big_omega * c);
            }
            let yb = Complex::new(1.0, 0.0) / z;
            branch_adm[bi] = Some(yb);
            stamp(&mut y, b.p, b.p, yb);
            stamp(&mut y, b.q, b.q, yb);
            stamp(&mut y, b.p, b.q, -yb);
            stamp(&mut y, b.q, b.p, -yb);
            if let Some(e) = &b.emf {
                let ep = Complex::from_polar(e.peak * e.scale(t0), e.phase);
                let inj = yb * ep;
                if b.p != GROUND {
                    rhs[b.p - 1] -= inj;
                }
                if b.q != GROUND {
                    rhs[b.q - 1] += inj;
                }
            }
        }

        let mut core_adm = vec![None; net.cores.len()];
        for (ci, c) in net.cores.iter().enumerate() {
            if !c.window.contains(t0) {
                continue;
            }
            let w = c.windings.len();
            let l = core_inductance(c, c.curve.unsaturated_inductance());
            let mut z = DMatrix::<Complex<f64>>::zeros(w, w);
            for a in 0..w {
                for b in 0..w {
                    z[(a, b)] = Complex::new(if a == b { c.resistance[a] } else { 0.0 }, big_omega * l[(a, b)]);
                }
            }
            let yc = z
                .try_inverse()
                .ok_or_else(|| Error::invalid(format!("core {ci} has a singular impedance matrix")))?;
            for a in 0..w {
                for b in 0..w {
                    let g = yc[(a, b)];
                    let (pa, qa) = c.windings[a];
                    let (pb, qb) = c.windings[b];
                    stamp(&mut y, pa, pb, g);
                    stamp(&mut y, qa, qb, g);
                    stamp(&mut y, pa, qb, -g);
                    stamp(&mut y, qa, pb, -g);
                }
            }
            core_adm[ci] = Some(yc);
        }

        let vph = y
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SimulationFault { time: t0, detail: "singular steady-state system".into() })?;
        let rot = Complex::from_polar(1.0, omega * t0);
        let node_v = |k: Node| if k == GROUND { Complex::new(0.0, 0.0) } else { vph[k - 1] };
        for k in 1..=n {
            self.v[k] = (node_v(k) * rot).re;
        }
        for (bi, b) in net.branches.iter().enumerate() {
            let Some(yb) = branch_adm[bi] else { continue };
            let mut ue = node_v(b.p) - node_v(b.q);
            if let Some(e) = &b.emf {
                ue += Complex::from_polar(e.peak * e.scale(t0), e.phase);
            }
            let i = yb * ue;
            let st = &mut self.branches[bi];
            st.active = true;
            st.i = (i * rot).re;
            st.ue = (ue * rot).re;
            if let Some(c) = b.c {
                st.uc = (i / (j * big_omega * c) * rot).re;
            }
        }
        for (ci, c) in net.cores.iter().enumerate() {
            let Some(yc) = &core_adm[ci] else { continue };
            let w = c.windings.len();
            let u: DVector<Complex<f64>> = DVector::from_fn(w, |a, _| node_v(c.windings[a].0) - node_v(c.windings[a].1));
            let i = yc * &u;
            let l = core_inductance(c, c.curve.unsaturated_inductance());
            let st = &mut self.cores[ci];
            st.active = true;
            st.segment = 0;
            for a in 0..w {
                st.u[a] = (u[a] * rot).re;
                st.i[a] = (i[a] * rot).re;
            }
            for a in 0..w {
                st.psi[a] = (0..w).map(|b| l[(a, b)] * st.i[b]).sum();
            }
        }
        Ok(())
    }

    fn companion(&mut self, ci: usize, segment: i32) -> &CoreCompanion {
        let h = self.h;
        let core = &self.net.cores[ci];
        self.companions.entry((ci, segment)).or_insert_with(|| {
            let (slope, offset) = core.curve.segment(segment);
            let mut m = core_inductance(core, slope);
            for a in 0..core.windings.len() {
                m[(a, a)] += 0.5 * h * core.resistance[a];
            }
            let a = m.try_inverse().expect("core inductance matrix must be invertible");
            CoreCompanion { g: &a * (0.5 * h), a, offset }
        })
    }

    /// Advance one step.
    pub fn step(&mut self) -> Result<()> {
        let net = self.net;
        let h = self.h;
        let t1 = self.t0 + (self.steps + 1) as f64 * h;

        // switching
        for (bi, b) in net.branches.iter().enumerate() {
            let on = b.window.contains(t1);
            let st = &mut self.branches[bi];
            if on && !st.active {
                *st = BranchState { active: true, ..Default::default() };
            } else if !on && st.active {
                *st = BranchState::default();
            }
        }
        for (ci, c) in net.cores.iter().enumerate() {
            let on = c.window.contains(t1);
            let st = &mut self.cores[ci];
            if on && !st.active {
                let w = c.windings.len();
                st.active = true;
                st.i = vec![0.0; w];
                st.u = vec![0.0; w];
                st.psi = c.turns.iter().map(|n| n * c.residual_flux).collect();
                st.segment = c.curve.segment_of(0.0);
            } else if !on && st.active {
                st.active = false;
                st.i.iter_mut().for_each(|x| *x = 0.0);
                st.u.iter_mut().for_each(|x| *x = 0.0);
            }
        }

        // per-branch companion: i1 = g * (v_p - v_q) + j
        let mut bg = vec![0.0; net.branches.len()];
        let mut bj = vec![0.0; net.branches.len()];
        for (bi, b) in net.branches.iter().enumerate() {
            let st = &self.branches[bi];
            if !st.active {
                continue;
            }
            let hc = b.c.map_or(0.0, |c| h / (2.0 * c));
            let d = b.r + 2.0 * b.l / h + hc;
            let e1 = b.emf.as_ref().map_or(0.0, |e| e.value(t1));
            let hist = if b.l == 0.0 && b.c.is_none() {
                0.0
            } else {
                st.ue - (b.r - 2.0 * b.l / h + hc) * st.i - 2.0 * st.uc
            };
            bg[bi] = 1.0 / d;
            bj[bi] = (hist + e1) / d;
        }

        // per-core history b_k = psi + (h/2)(u - R i)
        let hist: Vec<Vec<f64>> = net
            .cores
            .iter()
            .zip(&self.cores)
            .map(|(c, st)| {
                (0..c.windings.len()).map(|a| st.psi[a] + 0.5 * h * (st.u[a] - c.resistance[a] * st.i[a])).collect()
            })
            .collect();

        let mut segments: Vec<i32> = self.cores.iter().map(|s| s.segment).collect();
        let mut solution = None;
        for _ in 0..MAX_SEGMENT_ITERATIONS {
            let v = self.solve_nodal(&segments, &bg, &bj, &hist, t1)?;
            let mut changed = false;
            let mut next = segments.clone();
            for (ci, c) in net.cores.iter().enumerate() {
                if !self.cores[ci].active {
                    continue;
                }
                let i = self.core_currents(ci, segments[ci], &v, &hist[ci]);
                let m: f64 = c.turns.iter().zip(&i).map(|(n, i)| n * i).sum();
                let s = c.curve.segment_of(m);
                if s != segments[ci] {
                    // move one segment at a time to avoid overshooting
                    next[ci] = segments[ci] + (s - segments[ci]).signum();
                    changed = true;
                }
            }
            solution = Some(v);
            if !changed {
                break;
            }
            segments = next;
        }
        let v = solution.expect("at least one iteration");

        // commit
        for (bi, b) in net.branches.iter().enumerate() {
            if !self.branches[bi].active {
                continue;
            }
            let e1 = b.emf.as_ref().map_or(0.0, |e| e.value(t1));
            let ue = v[b.p] - v[b.q] + e1;
            let i1 = bg[bi] * (v[b.p] - v[b.q]) + bj[bi];
            let st = &mut self.branches[bi];
            if let Some(c) = b.c {
                st.uc += h / (2.0 * c) * (i1 + st.i);
            }
            st.i = i1;
            st.ue = ue;
        }
        for (ci, c) in net.cores.iter().enumerate() {
            if !self.cores[ci].active {
                continue;
            }
            let i = self.core_currents(ci, segments[ci], &v, &hist[ci]);
            let st = &mut self.cores[ci];
            for a in 0..c.windings.len() {
                let (p, q) = c.windings[a];
                st.u[a] = v[p] - v[q];
                st.psi[a] = hist[ci][a] + 0.5 * h * (st.u[a] - c.resistance[a] * i[a]);
            }
            st.i = i;
            st.segment = segments[ci];
        }
        self.v = v;
        self.t = t1;
        self.steps += 1;
        if self.v.iter().any(|x| !x.is_finite()) {
            return Err(Error::SimulationFault { time: t1, detail: "non-finite node voltage (integration diverged)".into() });
        }
        Ok(())
    }

    fn core_currents(&mut self, ci: usize, segment: i32, v: &[f64], hist: &[f64]) -> Vec<f64> {
        let c = &self.net.cores[ci];
        let u: Vec<f64> = c.windings.iter().map(|&(p, q)| v[p] - v[q]).collect();
        let turns = c.turns.clone();
        let comp = self.companion(ci, segment);
        let w = u.len();
        (0..w)
            .map(|a| {
                (0..w)
                    .map(|b| comp.g[(a, b)] * u[b] + comp.a[(a, b)] * (hist[b] - turns[b] * comp.offset))
                    .sum()
            })
            .collect()
    }

    fn solve_nodal(&mut self, segments: &[i32], bg: &[f64], bj: &[f64], hist: &[Vec<f64>], t1: f64) -> Result<Vec<f64>> {
        let net = self.net;
        let n = net.nodes;
        let mut key: Vec<i32> = Vec::with_capacity(net.branches.len() + 2 * net.cores.len());
        key.extend(self.branches.iter().map(|s| s.active as i32));
        for (ci, st) in self.cores.iter().enumerate() {
            key.push(st.active as i32);
            key.push(if st.active { segments[ci] } else { 0 });
        }

        if !self.factors.contains_key(&key) {
            let mut y = DMatrix::<f64>::zeros(n, n);
            for k in 0..n {
                y[(k, k)] += net.shunt;
            }
            let stamp = |y: &mut DMatrix<f64>, a: Node, b: Node, g: f64| {
                if a != GROUND && b != GROUND {
                    y[(a - 1, b - 1)] += g;
                }
            };
            for (bi, b) in net.branches.iter().enumerate() {
                if !self.branches[bi].active {
                    continue;
                }
                let g = bg[bi];
                stamp(&mut y, b.p, b.p, g);
                stamp(&mut y, b.q, b.q, g);
                stamp(&mut y, b.p, b.q, -g);
                stamp(&mut y, b.q, b.p, -g);
            }
            for ci in 0..net.cores.len() {
                if !self.cores[ci].active {
                    continue;
                }
                let g = self.companion(ci, segments[ci]).g.clone();
                let c = &net.cores[ci];
                for a in 0..c.windings.len() {
                    for b in 0..c.windings.len() {
                        let (pa, qa) = c.windings[a];
                        let (pb, qb) = c.windings[b];
                        stamp(&mut y, pa, pb, g[(a, b)]);
                        stamp(&mut y, qa, qb, g[(a, b)]);
                        stamp(&mut y, pa, qb, -g[(a, b)]);
                        stamp(&mut y, qa, pb, -g[(a, b)]);
                    }
                }
            }
            self.factors.insert(key.clone(), y.lu());
        }

        let mut rhs = DVector::<f64>::zeros(n);
        let mut inject = |p: Node, q: Node, j: f64| {
            if p != GROUND {
                rhs[p - 1] -= j;
            }
            if q != GROUND {
                rhs[q - 1] += j;
            }
        };
        for (bi, b) in net.branches.iter().enumerate() {
            if self.branches[bi].active {
                inject(b.p, b.q, bj[bi]);
            }
        }
        for ci in 0..net.cores.len() {
            if !self.cores[ci].active {
                continue;
            }
            let c = &net.cores[ci];
            let turns = c.turns.clone();
            let windings = c.windings.clone();
            let comp = self.companion(ci, segments[ci]);
            let w = windings.len();
            let src: Vec<f64> = (0..w)
                .map(|a| (0..w).map(|b| comp.a[(a, b)] * (hist[ci][b] - turns[b] * comp.offset)).sum())
                .collect();
            for a in 0..w {
                let (p, q) = windings[a];
                if p != GROUND {
                    rhs[p - 1] -= src[a];
                }
                if q != GROUND {
                    rhs[q - 1] += src[a];
                }
            }
        }
        let sol = self.factors[&key]
            .solve(&rhs)
            .ok_or_else(|| Error::SimulationFault { time: t1, detail: "singular nodal matrix".into() })?;
        let mut v = vec![0.0; n + 1];
        v[1..].copy_from_slice(sol.as_slice());
        Ok(v)
    }
}

/// `diag(leakage) + slope * n n^T`.
fn core_inductance(c: &Core, slope: f64) -> DMatrix<f64> {
    let w = c.windings.len();
    DMatrix::from_fn(w, w, |a, b| {
        let leak = if a == b { c.leakage[a] } else { 0.0 };
        leak + slope * c.turns[a] * c.turns[b]
    })
}

/// Trapezoidal-rule reactance factor: `(2/h) tan(omega h / 2)`.
pub fn discrete_omega(omega: f64, h: f64) -> f64 {
    (2.0 / h) * (omega * h / 2.0).tan()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn source(net: &mut Network, n: Node, peak: f64, r: f64, l: f64, omega: f64) -> usize {
        net.add_branch(Branch {
            p: GROUND,
            q: n,
            r,
            l,
            c: None,
            emf: Some(Emf { peak, omega, phase: 0.3, steps: vec![] }),
            window: Window::ALWAYS,
        })
    }

    #[test]
    fn rl_circuit_stays_in_discrete_steady_state() {
        let omega = 2.0 * PI * 60.0;
        let mut net = Network { shunt: 0.0, ..Default::default() };
        let a = net.add_node();
        let src = source(&mut net, a, 100.0, 1.0, 0.01, omega);
        net.add_branch(Branch::rl(a, GROUND, 10.0, 0.02));
        let h = 1e-4;
        let mut tr = Transient::steady_state(&net, 0.0, h, omega).unwrap();
        let i0 = tr.branch_current(src);
        let big = discrete_omega(omega, h);
        let z = Complex::new(11.0, big * 0.03);
        let ip = Complex::from_polar(100.0, 0.3) / z;
        assert!((i0 - ip.re).abs() < 1e-9);
        for k in 1..=2000 {
            tr.step().unwrap();
            let t = k as f64 * h;
            let expect = (ip * Complex::from_polar(1.0, omega * t)).re;
            assert!((tr.branch_current(src) - expect).abs() < 1e-8 * ip.norm(), "step {k}");
        }
    }

    #[test]
    fn rl_energization_matches_analytic_response() {
        // closing an R-L load on a DC-like slow source: compare with exact
        // exponential response at small step
        let omega = 1e-9;
        let mut net = Network { shunt: 0.0, ..Default::default() };
        let a = net.add_node();
        net.add_branch(Branch {
            p: GROUND,
            q: a,
            r: 0.0,
            l: 0.0,
            c: None,
            emf: Some(Emf { peak: 10.0, omega, phase: 0.0, steps: vec![] }),
            window: Window::ALWAYS,
        });
        // the source above has zero impedance; give it a tiny resistance
        net.branches[0].r = 1e-6;
        let load = net.add_branch(Branch::rl(a, GROUND, 2.0, 0.1).active_from(0.0));
        let h = 1e-5;
        let mut tr = Transient::steady_state(&net, -h / 2.0, h, omega).unwrap();
        for _ in 0..5000 {
            tr.step().unwrap();
        }
        let t = tr.time();
        let expect = 5.0 * (1.0 - (-t * 2.0 / 0.1).exp());
        assert!((tr.branch_current(load) - expect).abs() < 1e-3, "{} vs {}", tr.branch_current(load), expect);
    }

    #[test]
    fn series_rlc_rings_at_resonance() {
        // capacitor precharged by steady state then source stepped to zero
        let omega = 2.0 * PI * 60.0;
        let mut net = Network { shunt: 0.0, ..Default::default() };
        let a = net.add_node();
        net.add_branch(Branch {
            p: GROUND,
            q: a,
            r: 0.5,
            l: 0.0,
            c: None,
            emf: Some(Emf { peak: 1.0, omega, phase: 0.0, steps: vec![(0.0, 0.0)] }),
            window: Window::ALWAYS,
        });
        let rlc = net.add_branch(Branch { p: a, q: GROUND, r: 0.0, l: 1e-3, c: Some(1e-3), emf: None, window: Window::ALWAYS });
        let h = 1e-5;
        let mut tr = Transient::steady_state(&net, -1e-3, h, omega).unwrap();
        let mut crossings = vec![];
        let mut prev = tr.branch_current(rlc);
        while tr.time() < 0.05 {
            tr.step().unwrap();
            let i = tr.branch_current(rlc);
            if tr.time() > 0.0 && prev.signum() != i.signum() && prev != 0.0 {
                crossings.push(tr.time());
            }
            prev = i;
        }
        // loop R = 0.5, L = 1e-3, C = 1e-3: damped frequency sqrt(1/LC - (R/2L)^2)
        let wd = (1e6f64 - 250.0f64.powi(2)).sqrt();
        let spacing: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = spacing.iter().sum::<f64>() / spacing.len() as f64;
        assert!((mean - PI / wd).abs() < 2e-5, "mean half period {mean}");
    }
}
