//! Best-effort importer for the MATPOWER `mpc` case syntax.
//!
//! Supported: `mpc.baseMVA`, `mpc.bus`, `mpc.gen`, `mpc.branch`, `mpc.gencost`
//! (polynomial model 2 with at most three coefficients). Out-of-service
//! generators and branches are dropped. Off-nominal transformers, phase
//! shifters and several generators at one bus are rejected.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{NetError, Result};
use crate::network::{Bus, Generator, Line, PowerNetwork};

fn perr(msg: impl Into<String>) -> NetError {
    NetError::Parse(msg.into())
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(k) => &line[..k],
        None => line,
    }
}

/// Returns each `mpc.<field>` assignment with its raw right-hand side and starting line.
fn assignments(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((ln, raw)) = lines.next() {
        let line = strip_comment(raw).trim();
        let Some(rest) = line.strip_prefix("mpc.") else { continue };
        let Some(eq) = rest.find('=') else { continue };
        let field = rest[..eq].trim().to_string();
        let mut rhs = rest[eq + 1..].trim().to_string();
        if rhs.starts_with('[') {
            while !rhs.contains(']') {
                let (_, more) = lines.next().ok_or_else(|| perr(format!("line {}: unterminated matrix mpc.{field}", ln + 1)))?;
                rhs.push('\n');
                rhs.push_str(strip_comment(more));
            }
        }
        out.insert(field, (ln + 1, rhs));
    }
    Ok(out)
}

fn matrix(field: &str, line: usize, rhs: &str) -> Result<Vec<Vec<f64>>> {
    let open = rhs.find('[').ok_or_else(|| perr(format!("line {line}: mpc.{field} is not a matrix")))?;
    let close = rhs.rfind(']').unwrap_or(rhs.len());
    let body = &rhs[open + 1..close];
    let mut rows = Vec::new();
    for chunk in body.split(|c| c == ';' || c == '\n') {
        let toks: Vec<&str> = chunk.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
        if toks.is_empty() {
            continue;
        }
        let row = toks
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| perr(format!("mpc.{field} (near line {line}): bad number '{t}'"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn need<'a>(a: &'a BTreeMap<String, (usize, String)>, field: &str) -> Result<&'a (usize, String)> {
    a.get(field).ok_or_else(|| perr(format!("missing mpc.{field}")))
}

fn cols(field: &str, row: &[f64], k: usize, min: usize) -> Result<()> {
    if row.len() < min {
        return Err(perr(format!("mpc.{field} row {k}: expected at least {min} columns, found {}", row.len())));
    }
    Ok(())
}

pub fn parse_matpower(text: &str) -> Result<PowerNetwork> {
    let a = assignments(text)?;
    let (ln, base_rhs) = need(&a, "baseMVA")?;
    let base_mva: f64 = base_rhs
        .trim_end_matches(';')
        .trim()
        .parse()
        .map_err(|_| perr(format!("line {ln}: bad baseMVA")))?;

    let (ln, rhs) = need(&a, "bus")?;
    let mut buses = Vec::new();
    for (k, r) in matrix("bus", *ln, rhs)?.iter().enumerate() {
        cols("bus", r, k, 13)?;
        buses.push(Bus {
            id: r[0] as i64,
            p_demand: r[2],
            q_demand: r[3],
            v_min: r[12],
            v_max: r[11],
            shunt: Complex64::new(r[4], r[5]) / base_mva,
        });
    }

    let (ln, rhs) = need(&a, "gen")?;
    let gen_rows = matrix("gen", *ln, rhs)?;
    let cost_rows = match a.get("gencost") {
        Some((ln, rhs)) => matrix("gencost", *ln, rhs)?,
        None => Vec::new(),
    };
    let mut generators = Vec::new();
    for (k, r) in gen_rows.iter().enumerate() {
        cols("gen", r, k, 10)?;
        if r[7] <= 0.0 {
            continue;
        }
        let (ca, cb, cc) = match cost_rows.get(k) {
            Some(c) => {
                cols("gencost", c, k, 4)?;
                if c[0] != 2.0 {
                    return Err(perr(format!("mpc.gencost row {k}: only polynomial model 2 is supported")));
                }
                let nc = c[3] as usize;
                if nc > 3 || c.len() < 4 + nc {
                    return Err(perr(format!("mpc.gencost row {k}: need at most 3 coefficients")));
                }
                let coef = &c[4..4 + nc];
                let mut abc = [0.0; 3];
                for (slot, v) in abc[3 - nc..].iter_mut().zip(coef) {
                    *slot = *v;
                }
                (abc[0], abc[1], abc[2])
            }
            None => (0.0, 0.0, 0.0),
        };
        generators.push(Generator {
            bus_id: r[0] as i64,
            p_min: r[9],
            p_max: r[8],
            q_min: r[4],
            q_max: r[3],
            cost_a: ca,
            cost_b: cb,
            cost_c: cc,
        });
    }

    let (ln, rhs) = need(&a, "branch")?;
    let mut lines = Vec::new();
    for (k, r) in matrix("branch", *ln, rhs)?.iter().enumerate() {
        cols("branch", r, k, 11)?;
        if r[10] <= 0.0 {
            continue;
        }
        if (r[8] != 0.0 && r[8] != 1.0) || r[9] != 0.0 {
            return Err(perr(format!("mpc.branch row {k}: transformers with tap or shift are not supported")));
        }
        lines.push(Line::from_impedance(r[0] as i64, r[1] as i64, r[2], r[3], r[4]));
    }
    PowerNetwork::new("matpower", base_mva, buses, generators, lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE3: &str = "function mpc = case3
mpc.version = '2';
mpc.baseMVA = 100;
%% bus data
mpc.bus = [
\t1\t3\t0\t0\t0\t0\t1\t1\t0\t12.66\t1\t1.05\t0.95;
\t2\t1\t30\t10\t0\t5\t1\t1\t0\t12.66\t1\t1.05\t0.95;
\t3\t1\t20\t5\t0\t0\t1\t1\t0\t12.66\t1\t1.05\t0.95;
];
mpc.gen = [
\t1\t0\t0\t50\t-50\t1\t100\t1\t100\t0;
\t3\t0\t0\t20\t-20\t1\t100\t0\t40\t0;
];
mpc.branch = [
\t1\t2\t0.2\t0.4\t0.02\t0\t0\t0\t0\t0\t1\t-360\t360;
\t2\t3\t0.1\t0.2\t0\t0\t0\t0\t0\t0\t1\t-360\t360;
];
mpc.gencost = [
\t2\t0\t0\t3\t0.2\t2\t2;
\t2\t0\t0\t2\t5\t0;
];
";

    #[test]
    fn imports_subset() {
        let net = parse_matpower(CASE3).unwrap();
        assert_eq!(net.n_buses(), 3);
        // second generator is out of service
        assert_eq!(net.generators.len(), 1);
        let g = &net.generators[0];
        assert_eq!((g.p_min, g.p_max, g.q_min, g.q_max), (0.0, 100.0, -50.0, 50.0));
        assert_eq!((g.cost_a, g.cost_b, g.cost_c), (0.2, 2.0, 2.0));
        assert_eq!(net.buses[1].p_demand, 30.0);
        // y11 = 1/(0.2+0.4j) + 0.01j
        let y11 = Complex64::new(1.0, -2.0) + Complex64::new(0.0, 0.01);
        assert!((net.y[(0, 0)] - y11).norm() < 1e-12);
        // bus 2 shunt 5 MVAr -> 0.05 pu
        let y22 = Complex64::new(1.0, -2.0) + Complex64::new(2.0, -4.0) + Complex64::new(0.0, 0.01 + 0.05);
        assert!((net.y[(1, 1)] - y22).norm() < 1e-12);
    }

    #[test]
    fn linear_cost_is_right_aligned() {
        let text = CASE3.replace("\t3\t0\t0\t20\t-20\t1\t100\t0\t40\t0;", "\t3\t0\t0\t20\t-20\t1\t100\t1\t40\t0;");
        let net = parse_matpower(&text).unwrap();
        let g = &net.generators[1];
        assert_eq!((g.cost_a, g.cost_b, g.cost_c), (0.0, 5.0, 0.0));
    }

    #[test]
    fn rejects_transformer_and_garbage() {
        let tap = CASE3.replace("\t1\t2\t0.2\t0.4\t0.02\t0\t0\t0\t0\t0", "\t1\t2\t0.2\t0.4\t0.02\t0\t0\t0\t0.98\t0");
        assert!(parse_matpower(&tap).unwrap_err().to_string().contains("transformers"));
        let bad = CASE3.replace("12.66\t1\t1.05\t0.95;\n\t3", "12.66\t1\tabc\t0.95;\n\t3");
        assert!(parse_matpower(&bad).unwrap_err().to_string().contains("abc"));
        assert!(parse_matpower("mpc.baseMVA = 100;").unwrap_err().to_string().contains("mpc.bus"));
    }
}
