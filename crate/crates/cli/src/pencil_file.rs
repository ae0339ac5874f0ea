//! Line-oriented pencil files.
//!
//! ```text
//! # KdV
//! N = 1
//! mode = concrete
//! f1 = 1
//! h1 = 1
//! A[2][3][2][1][1] = 1/8
//! ```

use std::collections::BTreeMap;

use bihamo::pencil::{DeformationCoeffs, Mode, PencilData};
use bihamo::CoeffFn;

use crate::error::CliError;
use crate::expr::parse_expr;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PencilFile {
    pub data: PencilData,
    pub deformation: DeformationCoeffs,
}

enum Key {
    N,
    Mode,
    F(usize),
    H(usize),
    A([usize; 5]),
}

fn key(s: &str, line: usize) -> Result<Key, CliError> {
    let bad = || CliError::File { line, msg: format!("unknown key '{s}'") };
    let index = |t: &str| t.parse::<usize>().ok().filter(|&i| i >= 1).ok_or_else(bad);
    Ok(match s {
        "N" => Key::N,
        "mode" => Key::Mode,
        _ if s.starts_with('f') => Key::F(index(&s[1..])? - 1),
        _ if s.starts_with('h') => Key::H(index(&s[1..])? - 1),
        _ if s.starts_with("A[") && s.ends_with(']') => {
            let parts: Vec<&str> = s[2..s.len() - 1].split("][").collect();
            let v: Vec<usize> = parts.iter().map(|p| p.trim().parse::<usize>().map_err(|_| bad())).collect::<Result<_, _>>()?;
            let arr: [usize; 5] = v.try_into().map_err(|_| bad())?;
            Key::A(arr)
        }
        _ => return Err(bad()),
    })
}

pub fn parse_pencil_file(src: &str) -> Result<PencilFile, CliError> {
    let mut entries = Vec::new();
    for (k, raw) in src.lines().enumerate() {
        let line = k + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (lhs, rhs) = text.split_once('=').ok_or(CliError::File { line, msg: "expected 'key = value'".into() })?;
        entries.push((line, key(lhs.trim(), line)?, rhs.trim().to_string()));
    }
    let mut n = None;
    let mut mode = Mode::Concrete;
    for (line, k, v) in &entries {
        match k {
            Key::N => {
                let x: usize = v.parse().ok().filter(|&x| x >= 1).ok_or(CliError::File { line: *line, msg: format!("bad N '{v}'") })?;
                if n.replace(x).is_some() {
                    return Err(CliError::File { line: *line, msg: "N given twice".into() });
                }
            }
            Key::Mode => {
                mode = match v.as_str() {
                    "concrete" => Mode::Concrete,
                    "formal" => Mode::Formal,
                    _ => return Err(CliError::File { line: *line, msg: format!("unknown mode '{v}'") }),
                }
            }
            _ => {}
        }
    }
    let n = n.ok_or(CliError::File { line: 0, msg: "missing 'N = ...'".into() })?;
    let value = |line: usize, v: &str| -> Result<CoeffFn, CliError> {
        let e = parse_expr(v, n).map_err(|e| CliError::File { line, msg: e.to_string() })?;
        if e.contains_lambda() {
            return Err(CliError::File { line, msg: "lambda is not allowed here".into() });
        }
        e.to_coeff().map_err(|e| CliError::File { line, msg: e.to_string() })
    };
    let mut f = BTreeMap::new();
    let mut h = BTreeMap::new();
    let mut deformation = DeformationCoeffs::new(n);
    for (line, k, v) in &entries {
        let line = *line;
        let check = |i: usize| if i < n { Ok(i) } else { Err(CliError::File { line, msg: format!("index {} exceeds N = {n}", i + 1) }) };
        match k {
            Key::F(i) => {
                if f.insert(check(*i)?, value(line, v)?).is_some() {
                    return Err(CliError::File { line, msg: format!("f{} given twice", i + 1) });
                }
            }
            Key::H(i) => {
                if h.insert(check(*i)?, value(line, v)?).is_some() {
                    return Err(CliError::File { line, msg: format!("h{} given twice", i + 1) });
                }
            }
            Key::A([kk, l, a, i, j]) => {
                let (i, j) = (check(i.wrapping_sub(1))?, check(j.wrapping_sub(1))?);
                deformation.set(*kk, *l, *a, i, j, value(line, v)?)?;
            }
            _ => {}
        }
    }
    let data = match mode {
        Mode::Formal => PencilData::formal(n),
        Mode::Concrete => {
            if f.len() != n {
                let missing = (0..n).find(|i| !f.contains_key(i)).map_or(0, |i| i + 1);
                return Err(CliError::File { line: 0, msg: format!("missing f{missing}") });
            }
            let witness = match h.len() {
                0 => None,
                k if k == n => Some(h.into_values().collect()),
                _ => return Err(CliError::File { line: 0, msg: "give either all witnesses h1..hN or none".into() }),
            };
            PencilData::concrete(f.into_values().collect(), witness)?
        }
    };
    Ok(PencilFile { data, deformation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bihamo::Coeff;

    #[test]
    fn kdv_file() {
        let p = parse_pencil_file("# kdv\nN = 1\nmode = concrete\nf1 = 1\nh1 = 1\nA[2][3][2][1][1] = 1/8\n").unwrap();
        assert_eq!(p.data, PencilData::flat(1));
        assert_eq!(p.deformation.get(2, 3, 2, 0, 0), CoeffFn::from_rat(bihamo::rat::rat(1, 8)));
    }

    #[test]
    fn witness_mismatch_is_fatal() {
        let e = parse_pencil_file("N = 1\nf1 = u1\nh1 = u1\n").unwrap_err();
        assert!(matches!(e, CliError::Core(bihamo::Error::InvalidPencil(_))));
    }

    #[test]
    fn errors_carry_lines() {
        assert!(matches!(parse_pencil_file("N = 2\nf1 = 1\nf2 = u3\n"), Err(CliError::File { line: 3, .. })));
        assert!(matches!(parse_pencil_file("N = 1\nf1 = 1\nA[1][2][1][2][1] = 1\n"), Err(CliError::File { line: 3, .. })));
        assert!(matches!(parse_pencil_file("f1 = 1\n"), Err(CliError::File { .. })));
        assert!(matches!(parse_pencil_file("N = 1\n"), Err(CliError::File { .. })));
        assert!(matches!(parse_pencil_file("N = 1\nf1 = lambda\n"), Err(CliError::File { line: 2, .. })));
    }

    #[test]
    fn formal_mode_needs_no_metric() {
        let p = parse_pencil_file("N = 3\nmode = formal\n").unwrap();
        assert_eq!(p.data.mode, Mode::Formal);
    }
}
