//! Per-unit network representation and derived admittance data.
//!
//! A [`PowerNetwork`] is immutable once built. All electrical quantities are
//! per-unit on the network's MVA base and all angles are radians; unit
//! conversion happens only when reading case files or writing reports.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::NetworkError;

pub type Complex = num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BusKind {
    Slack,
    /// Voltage-controlled (PV) bus.
    Generator,
    /// PQ bus.
    Load,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
    /// Voltage magnitude set point for slack and PV buses. For load buses this
    /// is the case file's initial magnitude and is never used as a constraint.
    pub voltage_setpoint: f64,
    /// Admittance to ground `g^s + i b^s`.
    pub shunt: Complex,
    /// Demand `p + i q`.
    pub load: Complex,
    pub base_kv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transformer {
    /// Off-nominal turns ratio at the `from` side.
    pub tap: f64,
    /// Phase shift in radians.
    pub shift: f64,
}

impl Transformer {
    fn ratio(&self) -> Complex {
        Complex::from_polar(self.tap, self.shift)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub from: usize,
    pub to: usize,
    /// Series impedance `r + i x`.
    pub impedance: Complex,
    /// Total line charging `g^c + i b^c`, split evenly between both ends.
    pub charge: Complex,
    pub transformer: Option<Transformer>,
    /// Apparent power rating, per-unit.
    pub thermal_limit: Option<f64>,
}

impl LineRecord {
    pub fn plain(from: usize, to: usize, impedance: Complex) -> Self {
        Self {
            from,
            to,
            impedance,
            charge: Complex::new(0.0, 0.0),
            transformer: None,
            thermal_limit: None,
        }
    }

    pub fn admittance(&self) -> Complex {
        self.impedance.inv()
    }

    pub fn tap(&self) -> f64 {
        self.transformer.map_or(1.0, |t| t.tap)
    }

    pub fn shift(&self) -> f64 {
        self.transformer.map_or(0.0, |t| t.shift)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    pub p_output: f64,
    /// Reactive output recorded in the case file (informational).
    pub q_output: f64,
    pub p_max: f64,
    /// `None` means unbounded.
    pub q_min: Option<f64>,
    /// `None` means unbounded.
    pub q_max: Option<f64>,
    pub voltage_setpoint: f64,
}

/// The network tuple: buses, lines, generators and the slack bus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerNetwork {
    base_mva: f64,
    buses: Vec<Bus>,
    lines: Vec<LineRecord>,
    generators: Vec<Generator>,
    slack: usize,
    #[serde(skip)]
    index: HashMap<usize, usize>,
}

impl PowerNetwork {
    pub fn new(
        base_mva: f64,
        buses: Vec<Bus>,
        lines: Vec<LineRecord>,
        generators: Vec<Generator>,
    ) -> Result<Self, NetworkError> {
        if !(base_mva > 0.0) {
            return Err(NetworkError::InvalidBase(base_mva));
        }
        let mut index = HashMap::with_capacity(buses.len());
        for (i, bus) in buses.iter().enumerate() {
            if index.insert(bus.id, i).is_some() {
                return Err(NetworkError::DuplicateBus(bus.id));
            }
        }
        let slacks: Vec<usize> = buses
            .iter()
            .filter(|b| b.kind == BusKind::Slack)
            .map(|b| b.id)
            .collect();
        let slack = match slacks.as_slice() {
            [s] => *s,
            [] => return Err(NetworkError::NoSlack),
            _ => return Err(NetworkError::MultipleSlack(slacks)),
        };
        for bus in &buses {
            if bus.kind != BusKind::Load && !(bus.voltage_setpoint > 0.0) {
                return Err(NetworkError::InvalidSetpoint(bus.id));
            }
        }
        for (k, line) in lines.iter().enumerate() {
            for end in [line.from, line.to] {
                if !index.contains_key(&end) {
                    return Err(NetworkError::UnknownBus { line: k, bus: end });
                }
            }
            if line.impedance.norm() == 0.0 {
                return Err(NetworkError::ZeroImpedance {
                    line: k,
                    from: line.from,
                    to: line.to,
                });
            }
            if let Some(t) = line.transformer {
                if !(t.tap > 0.0) {
                    return Err(NetworkError::InvalidTap {
                        line: k,
                        tap: t.tap,
                    });
                }
            }
        }
        for gen in &generators {
            if !index.contains_key(&gen.bus) {
                return Err(NetworkError::UnknownGeneratorBus(gen.bus));
            }
        }
        Ok(Self {
            base_mva,
            buses,
            lines,
            generators,
            slack,
            index,
        })
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[LineRecord] {
        &self.lines
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    /// Id of the slack bus.
    pub fn slack(&self) -> usize {
        self.slack
    }

    pub fn slack_index(&self) -> usize {
        self.index[&self.slack]
    }

    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    /// Position of bus `id` in [`Self::buses`].
    pub fn bus_index(&self, id: usize) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Endpoint positions of line `k`.
    pub fn line_ends(&self, k: usize) -> (usize, usize) {
        let line = &self.lines[k];
        (self.index[&line.from], self.index[&line.to])
    }

    /// Buses whose voltage is held at a set point (PV buses and the slack).
    pub fn is_voltage_controlled(&self, i: usize) -> bool {
        self.buses[i].kind != BusKind::Load
    }

    /// Scheduled generation per bus position.
    pub fn generation(&self) -> Vec<Complex> {
        let mut out = vec![Complex::new(0.0, 0.0); self.buses.len()];
        for gen in &self.generators {
            out[self.index[&gen.bus]] += Complex::new(gen.p_output, gen.q_output);
        }
        out
    }

    /// Scheduled net injection (generation minus load) per bus position,
    /// excluding bus shunts.
    pub fn scheduled_injection(&self) -> Vec<Complex> {
        let mut out = self.generation();
        for (s, bus) in out.iter_mut().zip(&self.buses) {
            *s -= bus.load;
        }
        out
    }

    pub fn total_load(&self) -> Complex {
        self.buses.iter().map(|b| b.load).sum()
    }

    /// Rebuild with a different line set, keeping everything else.
    pub fn with_lines(&self, lines: Vec<LineRecord>) -> Result<Self, NetworkError> {
        Self::new(
            self.base_mva,
            self.buses.clone(),
            lines,
            self.generators.clone(),
        )
    }

    pub fn into_parts(self) -> (f64, Vec<Bus>, Vec<LineRecord>, Vec<Generator>) {
        (self.base_mva, self.buses, self.lines, self.generators)
    }

    /// Connected components as lists of bus positions, in order of their
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for k in 0..self.lines.len() {
            let (a, b) = self.line_ends(k);
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Nodal admittance matrix indexed by bus position.
#[derive(Debug, Clone)]
pub struct YBus {
    pub matrix: DMatrix<Complex>,
}

impl YBus {
    pub fn get(&self, n: usize, m: usize) -> Complex {
        self.matrix[(n, m)]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.matrix.nrows();
        (0..n).all(|i| (0..i).all(|j| (self.matrix[(i, j)] - self.matrix[(j, i)]).norm() <= tol))
    }

    /// Complex bus injections `V_n conj(sum_m Y_nm V_m)`.
    pub fn injections(&self, voltages: &[Complex]) -> Vec<Complex> {
        let n = voltages.len();
        (0..n)
            .map(|i| {
                let current: Complex = (0..n).map(|j| self.matrix[(i, j)] * voltages[j]).sum();
                voltages[i] * current.conj()
            })
            .collect()
    }
}

/// Build the Y-bus. Line charge halves are added before transformer scaling,
/// and bus shunts go on the diagonal unscaled.
pub fn build_ybus(net: &PowerNetwork) -> YBus {
    let n = net.bus_count();
    let mut y = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
    for (k, line) in net.lines().iter().enumerate() {
        let (f, t) = net.line_ends(k);
        let ys = line.admittance();
        let half = line.charge * 0.5;
        let ratio = line
            .transformer
            .map_or(Complex::new(1.0, 0.0), |tr| tr.ratio());
        y[(f, f)] += (ys + half) / (ratio.norm_sqr());
        y[(t, t)] += ys + half;
        y[(f, t)] -= ys / ratio.conj();
        y[(t, f)] -= ys / ratio;
    }
    for (i, bus) in net.buses().iter().enumerate() {
        y[(i, i)] += bus.shunt;
    }
    YBus { matrix: y }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

/// Coefficients of one directed line `<n, m>` in the explicit line equations
///
/// ```text
/// p_nm = |V_n|^2 (g + g_sh) - |V_n||V_m| (g cos d + b sin d)
/// q_nm = -|V_n|^2 (b + b_sh) - |V_n||V_m| (g sin d - b cos d)
/// ```
///
/// with `d = theta_n - theta_m - shift`. `g + i b` is the tap-scaled series
/// admittance shared by both directions; the shunt term collects the charge
/// half and the transformer's diagonal correction seen at `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCoefficients {
    pub line: usize,
    pub direction: Direction,
    pub from: usize,
    pub to: usize,
    pub g: f64,
    pub b: f64,
    pub shunt: Complex,
    pub shift: f64,
}

impl LineCoefficients {
    /// Self admittance multiplying `|V_n|^2`.
    pub fn self_g(&self) -> f64 {
        self.g + self.shunt.re
    }

    pub fn self_b(&self) -> f64 {
        self.b + self.shunt.im
    }

    pub fn angle(&self, theta: &[f64]) -> f64 {
        theta[self.from] - theta[self.to] - self.shift
    }

    /// Exact flow `(p_nm, q_nm)` for a polar voltage assignment.
    pub fn flow(&self, vm: &[f64], va: &[f64]) -> (f64, f64) {
        let (vn, vmm) = (vm[self.from], vm[self.to]);
        let d = self.angle(va);
        let (s, c) = d.sin_cos();
        let vv = vn * vmm;
        let p = vn * vn * self.self_g() - vv * (self.g * c + self.b * s);
        let q = -vn * vn * self.self_b() - vv * (self.g * s - self.b * c);
        (p, q)
    }
}

/// Both directed coefficient sets for every line, as `[forward, reverse]`.
pub fn line_coefficients(net: &PowerNetwork) -> Vec<[LineCoefficients; 2]> {
    net.lines()
        .iter()
        .enumerate()
        .map(|(k, line)| {
            let (f, t) = net.line_ends(k);
            let ys = line.admittance();
            let tap = line.tap();
            let shift = line.shift();
            let series = ys / tap;
            let half = line.charge * 0.5;
            let fwd = LineCoefficients {
                line: k,
                direction: Direction::Forward,
                from: f,
                to: t,
                g: series.re,
                b: series.im,
                shunt: (ys + half) / (tap * tap) - series,
                shift,
            };
            let rev = LineCoefficients {
                line: k,
                direction: Direction::Reverse,
                from: t,
                to: f,
                g: series.re,
                b: series.im,
                shunt: ys + half - series,
                shift: -shift,
            };
            [fwd, rev]
        })
        .collect()
}

/// Power drawn by each bus shunt, `|V_n|^2 conj(Y^s_n)`.
pub fn shunt_power(net: &PowerNetwork, vm: &[f64]) -> Vec<Complex> {
    net.buses()
        .iter()
        .zip(vm)
        .map(|(bus, v)| bus.shunt.conj() * (v * v))
        .collect()
}
