//! CPLEX LP text export.

use std::fmt::Write;

use super::{LinearProgram, Relation, Sense};

/// Render the model in LP format. Names are sanitized to the LP charset.
pub fn write_lp_file(lp: &LinearProgram) -> String {
    let names: Vec<String> = lp.variables.iter().map(|v| sanitize(&v.name)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", lp.name);
    out.push_str(match lp.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let obj: Vec<_> = lp.objective.iter().map(|&(v, c)| (v.0, c)).collect();
    write_terms(&mut out, &obj, &names);
    if lp.objective_offset != 0.0 {
        let _ = write!(out, " {}", signed(lp.objective_offset));
    }
    out.push_str("\nSubject To\n");
    for (i, row) in lp.constraints.iter().enumerate() {
        let _ = write!(out, " r{}_{}:", i, sanitize(&row.name));
        let terms: Vec<_> = row.terms.iter().map(|&(v, c)| (v.0, c)).collect();
        write_terms(&mut out, &terms, &names);
        let op = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (v, name) in lp.variables.iter().zip(&names) {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) if v.lower == v.upper => {
                let _ = writeln!(out, " {name} = {}", fmt_num(v.lower));
            }
            (true, true) => {
                let _ = writeln!(
                    out,
                    " {} <= {name} <= {}",
                    fmt_num(v.lower),
                    fmt_num(v.upper)
                );
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {}", fmt_num(v.lower));
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", fmt_num(v.upper));
            }
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }
    let bins: Vec<&String> = lp
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.binary)
        .map(|(_, n)| n)
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for name in bins {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0");
    }
    for &(v, c) in terms {
        let _ = write!(out, " {} {}", signed(c), names[v]);
    }
}

fn signed(c: f64) -> String {
    if c < 0.0 {
        format!("- {}", fmt_num(-c))
    } else {
        format!("+ {}", fmt_num(c))
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

fn sanitize(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        s.insert(0, '_');
    }
    s
}
