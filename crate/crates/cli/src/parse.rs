//! Descriptor and list parsers shared by the subcommands.

use walklab::{Error, GroupTable, Result};

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn arity(g: &GroupTable) -> usize {
    match g.factors() {
        Some(fs) => fs.iter().map(arity).sum(),
        None if g.heisenberg_coords(0).is_some() => 3,
        None => 1,
    }
}

/// Coordinates of an element: one per cycle, three per Heisenberg factor.
pub fn coords(g: &GroupTable, x: usize) -> Vec<usize> {
    match g.factors() {
        Some(fs) => g
            .split(x)
            .into_iter()
            .zip(fs)
            .flat_map(|(c, f)| coords(f, c))
            .collect(),
        None => match g.heisenberg_coords(x) {
            Some((i, j, k)) => vec![i, j, k],
            None => vec![x],
        },
    }
}

pub fn element_label(g: &GroupTable, x: usize) -> String {
    coords(g, x)
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

fn element_from(g: &GroupTable, c: &[i64]) -> Option<usize> {
    match g.factors() {
        Some(fs) => {
            let mut parts = Vec::with_capacity(fs.len());
            let mut rest = c;
            for f in fs {
                let (head, tail) = rest.split_at(arity(f));
                parts.push(element_from(f, head)?);
                rest = tail;
            }
            Some(g.join(&parts))
        }
        None if c.len() == 3 => g.heisenberg_index(c[0], c[1], c[2]),
        None => Some(c[0].rem_euclid(g.order() as i64) as usize),
    }
}

/// Parses one element written as signed coordinates joined by `.`.
pub fn parse_element(g: &GroupTable, s: &str) -> Result<usize> {
    let c = s
        .trim()
        .split('.')
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .map_err(|_| bad(format!("bad coordinate '{x}' in '{s}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    if c.len() != arity(g) {
        return Err(bad(format!(
            "element '{s}' has {} coordinates, {} needs {}",
            c.len(),
            g.label(),
            arity(g)
        )));
    }
    element_from(g, &c).ok_or_else(|| bad(format!("'{s}' is not an element of {}", g.label())))
}

/// `std` or a comma-separated element list.
pub fn parse_gens(g: &GroupTable, s: &str) -> Result<Vec<usize>> {
    if s.trim() == "std" {
        return Ok(g.standard_generators());
    }
    s.split(',').map(|e| parse_element(g, e)).collect()
}

pub fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("bad number '{x}'")))
        })
        .collect()
}

/// `a,b,c` or `start:step:end` (end inclusive).
pub fn parse_times(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let times = match parts.as_slice() {
        [start, step, end] => {
            let num = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad number '{x}' in '{s}'")))
            };
            let (a, h, b) = (num(start)?, num(step)?, num(end)?);
            if !(h > 0.0 && a <= b && a.is_finite() && b.is_finite()) {
                return Err(bad(format!("bad time grid '{s}'")));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize;
            if count > 10_000_000 {
                return Err(bad(format!("time grid '{s}' is too long")));
            }
            (0..=count).map(|k| a + k as f64 * h).collect()
        }
        [_] => parse_floats(s)?,
        _ => return Err(bad(format!("bad time grid '{s}'"))),
    };
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(bad(format!("times must be finite and >= 0, got {t}")));
    }
    Ok(times)
}

/// `a..b` and `a..=b` (both inclusive) or `a,b,c`; zero allowed.
pub fn parse_steps(s: &str) -> Result<Vec<u64>> {
    let num = |x: &str| {
        x.trim()
            .parse::<u64>()
            .map_err(|_| bad(format!("bad step '{x}' in '{s}'")))
    };
    let steps: Vec<u64> = match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
            (a..=b).collect()
        }
        None => s.split(',').map(num).collect::<Result<_>>()?,
    };
    if steps.is_empty() {
        return Err(bad(format!("empty step range '{s}'")));
    }
    if steps.iter().any(|&m| m > 1_000_000) {
        return Err(bad("steps above 1000000 are not supported"));
    }
    Ok(steps)
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(bad(format!("config line {}: empty key", lineno + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}
