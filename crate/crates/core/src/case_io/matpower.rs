//! MATPOWER case text: literal `mpc.baseMVA`, `mpc.bus`, `mpc.gen` and
//! `mpc.branch` assignments. No MATLAB expressions are evaluated.

use std::collections::HashMap;
use std::fmt::Write as _;

use log::warn;

use crate::error::CaseError;
use crate::network::{Bus, BusKind, Complex, Generator, LineRecord, PowerNetwork, Transformer};

// Column positions, zero based.
const BUS_I: usize = 0;
const BUS_TYPE: usize = 1;
const PD: usize = 2;
const QD: usize = 3;
const GS: usize = 4;
const BS: usize = 5;
const VM: usize = 7;
const BASE_KV: usize = 9;

const GEN_BUS: usize = 0;
const PG: usize = 1;
const QG: usize = 2;
const QMAX: usize = 3;
const QMIN: usize = 4;
const VG: usize = 5;
const GEN_STATUS: usize = 7;
const PMAX: usize = 8;

const F_BUS: usize = 0;
const T_BUS: usize = 1;
const BR_R: usize = 2;
const BR_X: usize = 3;
const BR_B: usize = 4;
const RATE_A: usize = 5;
const TAP: usize = 8;
const SHIFT: usize = 9;
const BR_STATUS: usize = 10;

const MIN_BUS_COLS: usize = 13;
const MIN_GEN_COLS: usize = 10;
const MIN_BRANCH_COLS: usize = 11;

/// Raw tables of a case file.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseDocument {
    pub version: u32,
    pub base_mva: f64,
    pub bus: Vec<Row>,
    pub gen: Vec<Row>,
    pub branch: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// 1-based source line the row starts on.
    pub line: usize,
    pub values: Vec<f64>,
}

impl CaseDocument {
    pub fn parse(text: &str) -> Result<Self, CaseError> {
        let mut scalars: HashMap<String, (usize, String)> = HashMap::new();
        let mut matrices: HashMap<String, Vec<Row>> = HashMap::new();

        let lines: Vec<&str> = text.lines().map(strip_comment).collect();
        let mut i = 0;
        while i < lines.len() {
            let line = lines[i].trim();
            let Some(rest) = line.strip_prefix("mpc.") else {
                i += 1;
                continue;
            };
            let Some((name, rhs)) = rest.split_once('=') else {
                i += 1;
                continue;
            };
            let name = name.trim().to_string();
            let rhs = rhs.trim();
            if let Some(body) = rhs.strip_prefix('[') {
                let (rows, next) = read_matrix(&lines, i, body)?;
                matrices.insert(name, rows);
                i = next;
            } else {
                let value = rhs.trim_end_matches(';').trim().to_string();
                scalars.insert(name, (i + 1, value));
                i += 1;
            }
        }

        let version = match scalars.get("version") {
            Some((line, v)) => v
                .trim_matches('\'')
                .trim_matches('"')
                .parse()
                .map_err(|_| CaseError::Malformed {
                    line: *line,
                    message: format!("unrecognised version {v}"),
                })?,
            None => 2,
        };
        let base_mva = match scalars.get("baseMVA") {
            Some((line, v)) => parse_number(v).ok_or_else(|| CaseError::Malformed {
                line: *line,
                message: format!("invalid baseMVA {v}"),
            })?,
            None => return Err(CaseError::Missing("baseMVA")),
        };
        let take = |matrices: &mut HashMap<String, Vec<Row>>, name: &'static str| {
            matrices.remove(name).ok_or(CaseError::Missing(name))
        };
        let bus = take(&mut matrices, "bus")?;
        let gen = take(&mut matrices, "gen")?;
        let branch = take(&mut matrices, "branch")?;
        check_columns("bus", &bus, MIN_BUS_COLS, version)?;
        check_columns("gen", &gen, MIN_GEN_COLS, version)?;
        check_columns("branch", &branch, MIN_BRANCH_COLS, version)?;
        Ok(Self {
            version,
            base_mva,
            bus,
            gen,
            branch,
        })
    }

    pub fn to_network(&self) -> Result<PowerNetwork, CaseError> {
        let base = self.base_mva;

        let mut generators = Vec::new();
        let mut first_vg: HashMap<usize, f64> = HashMap::new();
        for row in &self.gen {
            let v = &row.values;
            if v[GEN_STATUS] <= 0.0 {
                continue;
            }
            let bus = as_id(v[GEN_BUS], row.line)?;
            first_vg.entry(bus).or_insert(v[VG]);
            generators.push(Generator {
                bus,
                p_output: v[PG] / base,
                q_output: v[QG] / base,
                p_max: v[PMAX] / base,
                q_min: finite(v[QMIN]).map(|q| q / base),
                q_max: finite(v[QMAX]).map(|q| q / base),
                voltage_setpoint: v[VG],
            });
        }

        let mut buses = Vec::with_capacity(self.bus.len());
        for row in &self.bus {
            let v = &row.values;
            let id = as_id(v[BUS_I], row.line)?;
            let kind = match v[BUS_TYPE] as i64 {
                3 => BusKind::Slack,
                2 if first_vg.contains_key(&id) => BusKind::Generator,
                2 => {
                    warn!("bus {id} is PV but has no online generator; treating it as PQ");
                    BusKind::Load
                }
                1 => BusKind::Load,
                4 => {
                    warn!("bus {id} is marked isolated; retained as a PQ bus");
                    BusKind::Load
                }
                other => {
                    return Err(CaseError::Malformed {
                        line: row.line,
                        message: format!("unknown bus type {other}"),
                    })
                }
            };
            let voltage_setpoint = match kind {
                BusKind::Load => v[VM],
                _ => first_vg.get(&id).copied().unwrap_or(v[VM]),
            };
            buses.push(Bus {
                id,
                kind,
                voltage_setpoint,
                shunt: Complex::new(v[GS], v[BS]) / base,
                load: Complex::new(v[PD], v[QD]) / base,
                base_kv: v[BASE_KV],
            });
        }

        let mut lines = Vec::with_capacity(self.branch.len());
        for row in &self.branch {
            let v = &row.values;
            if v[BR_STATUS] <= 0.0 {
                continue;
            }
            let tap = v[TAP];
            let shift = v[SHIFT].to_radians();
            let transformer = if tap != 0.0 || shift != 0.0 {
                Some(Transformer {
                    tap: if tap == 0.0 { 1.0 } else { tap },
                    shift,
                })
            } else {
                None
            };
            lines.push(LineRecord {
                from: as_id(v[F_BUS], row.line)?,
                to: as_id(v[T_BUS], row.line)?,
                impedance: Complex::new(v[BR_R], v[BR_X]),
                charge: Complex::new(0.0, v[BR_B]),
                transformer,
                thermal_limit: (v[RATE_A] > 0.0).then(|| v[RATE_A] / base),
            });
        }

        let net = PowerNetwork::new(base, buses, lines, generators)?;
        let mut degree = vec![0usize; net.bus_count()];
        for k in 0..net.lines().len() {
            let (a, b) = net.line_ends(k);
            degree[a] += 1;
            degree[b] += 1;
        }
        for (bus, d) in net.buses().iter().zip(degree) {
            if d == 0 {
                warn!("bus {} has no in-service branches", bus.id);
            }
        }
        Ok(net)
    }
}

/// Parse MATPOWER case text into a per-unit network.
pub fn parse_case(text: &str) -> Result<PowerNetwork, CaseError> {
    CaseDocument::parse(text)?.to_network()
}

/// Serialize a network as MATPOWER version 2 case text. Parsing the output
/// yields a network equal to `net`.
pub fn write_case(net: &PowerNetwork, name: &str) -> String {
    let base = net.base_mva();
    let pu = |x: f64| exact_scaled(x, |v| v * base, |v| v / base);
    let mut out = String::new();
    let _ = writeln!(out, "function mpc = {name}");
    let _ = writeln!(out, "mpc.version = '2';");
    let _ = writeln!(out, "mpc.baseMVA = {};", base);
    let _ = writeln!(out, "\n%% bus data");
    let _ = writeln!(
        out,
        "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin"
    );
    let _ = writeln!(out, "mpc.bus = [");
    for bus in net.buses() {
        let kind = match bus.kind {
            BusKind::Slack => 3,
            BusKind::Generator => 2,
            BusKind::Load => 1,
        };
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t1\t{}\t0\t{}\t1\t1.1\t0.9;",
            bus.id,
            kind,
            pu(bus.load.re),
            pu(bus.load.im),
            pu(bus.shunt.re),
            pu(bus.shunt.im),
            bus.voltage_setpoint,
            bus.base_kv
        );
    }
    let _ = writeln!(out, "];\n\n%% generator data");
    let _ = writeln!(
        out,
        "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin"
    );
    let _ = writeln!(out, "mpc.gen = [");
    for gen in net.generators() {
        let limit = |q: Option<f64>, inf: &str| q.map_or(inf.to_string(), pu);
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t1\t{}\t0;",
            gen.bus,
            pu(gen.p_output),
            pu(gen.q_output),
            limit(gen.q_max, "Inf"),
            limit(gen.q_min, "-Inf"),
            gen.voltage_setpoint,
            base,
            pu(gen.p_max)
        );
    }
    let _ = writeln!(out, "];\n\n%% branch data");
    let _ = writeln!(
        out,
        "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus"
    );
    let _ = writeln!(out, "mpc.branch = [");
    for line in net.lines() {
        let (tap, shift) = match line.transformer {
            Some(t) => (
                t.tap.to_string(),
                exact_scaled(t.shift, f64::to_degrees, f64::to_radians),
            ),
            None => ("0".to_string(), "0".to_string()),
        };
        let rate = line.thermal_limit.map_or("0".to_string(), pu);
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t0\t0\t{}\t{}\t1;",
            line.from,
            line.to,
            line.impedance.re,
            line.impedance.im,
            line.charge.im,
            rate,
            tap,
            shift
        );
    }
    let _ = writeln!(out, "];");
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn read_matrix(lines: &[&str], start: usize, first: &str) -> Result<(Vec<Row>, usize), CaseError> {
    let mut rows = Vec::new();
    let mut current: Vec<f64> = Vec::new();
    let mut current_line = start + 1;
    let mut i = start;
    let mut text = first.to_string();
    loop {
        let (body, done) = match text.find(']') {
            Some(pos) => (&text[..pos], true),
            None => (text.as_str(), false),
        };
        for (j, chunk) in body.split(';').enumerate() {
            if j > 0 {
                flush(&mut rows, &mut current, current_line);
            }
            for tok in chunk.split(|c: char| c.is_whitespace() || c == ',') {
                if tok.is_empty() {
                    continue;
                }
                if current.is_empty() {
                    current_line = i + 1;
                }
                let value = parse_number(tok).ok_or_else(|| CaseError::Malformed {
                    line: i + 1,
                    message: format!("invalid number `{tok}`"),
                })?;
                current.push(value);
            }
        }
        if done {
            flush(&mut rows, &mut current, current_line);
            return Ok((rows, i + 1));
        }
        // A newline also ends a row.
        flush(&mut rows, &mut current, current_line);
        i += 1;
        if i >= lines.len() {
            return Err(CaseError::Malformed {
                line: start + 1,
                message: "unterminated matrix".into(),
            });
        }
        text = lines[i].to_string();
    }
}

fn flush(rows: &mut Vec<Row>, current: &mut Vec<f64>, line: usize) {
    if !current.is_empty() {
        rows.push(Row {
            line,
            values: std::mem::take(current),
        });
    }
}

fn parse_number(tok: &str) -> Option<f64> {
    match tok {
        "Inf" | "inf" | "+Inf" => Some(f64::INFINITY),
        "-Inf" | "-inf" => Some(f64::NEG_INFINITY),
        _ => tok.parse().ok(),
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn as_id(x: f64, line: usize) -> Result<usize, CaseError> {
    if x >= 0.0 && x.fract() == 0.0 && x.is_finite() {
        Ok(x as usize)
    } else {
        Err(CaseError::Malformed {
            line,
            message: format!("invalid bus number {x}"),
        })
    }
}

fn check_columns(
    table: &'static str,
    rows: &[Row],
    required: usize,
    version: u32,
) -> Result<(), CaseError> {
    for row in rows {
        if row.values.len() < required {
            return Err(CaseError::Columns {
                table,
                line: row.line,
                found: row.values.len(),
                required,
                version,
            });
        }
    }
    Ok(())
}

/// Shortest decimal for `to_file(x)` that maps back to exactly `x`.
fn exact_scaled(x: f64, to_file: impl Fn(f64) -> f64, to_internal: impl Fn(f64) -> f64) -> String {
    let guess = to_file(x);
    for digits in 1..=17 {
        let text = format!("{:.*e}", digits - 1, guess);
        let value: f64 = text.parse().unwrap_or(guess);
        if to_internal(value) == x {
            return value.to_string();
        }
    }
    // Walk a few ulps either side of the guess.
    let mut lo = guess;
    let mut hi = guess;
    for _ in 0..64 {
        lo = lo.next_down();
        hi = hi.next_up();
        if to_internal(lo) == x {
            return lo.to_string();
        }
        if to_internal(hi) == x {
            return hi.to_string();
        }
    }
    guess.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str = "function mpc = two
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	230	1	1.1	0.9;
	2	1	10	5	0	0	1	1	0	230	1	1.1	0.9;
];
mpc.gen = [
	1	10	0	Inf	-Inf	1.02	100	1	50	0;
];
mpc.branch = [
	1	2	0.01	0.1	0.02	0	0	0	0	0	1;
];
";

    #[test]
    fn minimal_case() {
        let net = parse_case(TWO_BUS).unwrap();
        assert_eq!(net.bus_count(), 2);
        assert_eq!(net.lines().len(), 1);
        assert_eq!(net.slack(), 1);
        assert!((net.buses()[1].load - Complex::new(0.1, 0.05)).norm() < 1e-15);
        assert_eq!(net.buses()[0].voltage_setpoint, 1.02);
        assert_eq!(net.generators()[0].q_max, None);
        assert_eq!(net.lines()[0].transformer, None);
        assert_eq!(net.lines()[0].charge, Complex::new(0.0, 0.02));
    }

    #[test]
    fn tap_becomes_transformer() {
        let text = TWO_BUS.replace(
            "1	2	0.01	0.1	0.02	0	0	0	0	0	1;",
            "1	2	0.01	0.1	0.02	0	0	0	1.05	0	1;",
        );
        let net = parse_case(&text).unwrap();
        assert_eq!(
            net.lines()[0].transformer,
            Some(Transformer {
                tap: 1.05,
                shift: 0.0
            })
        );
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = TWO_BUS.replace("2	1	10	5", "2	1	ten	5");
        match parse_case(&text) {
            Err(CaseError::Malformed { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_row_rejected() {
        let text = TWO_BUS.replace("1	2	0.01	0.1	0.02	0	0	0	0	0	1;", "1	2	0.01	0.1;");
        assert!(matches!(
            parse_case(&text),
            Err(CaseError::Columns {
                table: "branch",
                ..
            })
        ));
    }

    #[test]
    fn two_slacks_rejected() {
        let text = TWO_BUS.replace("2	1	10	5", "2	3	10	5");
        assert!(matches!(
            parse_case(&text),
            Err(CaseError::Network(
                crate::error::NetworkError::MultipleSlack(_)
            ))
        ));
    }

    #[test]
    fn round_trip() {
        let net = parse_case(TWO_BUS).unwrap();
        let again = parse_case(&write_case(&net, "two")).unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn exact_scaling_recovers_value() {
        // Anything a parse produces is some decimal divided by the base.
        for x in [21.7, 0.01, 33.333, 0.575, 291.42, -9.0].map(|v: f64| v / 100.0) {
            let s = exact_scaled(x, |v| v * 100.0, |v| v / 100.0);
            assert_eq!(s.parse::<f64>().unwrap() / 100.0, x);
        }
    }
}
