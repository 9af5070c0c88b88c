//! FCIDUMP reader and writer.
//!
//! Layout: a `&FCI ... &END` (or `/`-terminated) namelist declaring NORB,
//! NELEC and optionally MS2, ORBSYM, ISYM, followed by `value i j k l`
//! lines with 1-based indices. `i j k l` all zero carries the core energy,
//! `k = l = 0` a one-body element, otherwise a chemist-notation (ij|kl).
//! Later duplicates overwrite earlier entries.

use std::fmt::Write as _;

use super::{ChemError, MolecularIntegrals};
use crate::scalar::Real;

fn parse_err(line: usize, msg: impl Into<String>) -> ChemError {
    ChemError::Parse { line, msg: msg.into() }
}

struct Namelist {
    norb: Option<usize>,
    nelec: Option<usize>,
    ms2: i32,
    orbsym: Vec<u32>,
}

fn parse_namelist(tokens: &[(usize, String)]) -> Result<Namelist, ChemError> {
    let mut out = Namelist { norb: None, nelec: None, ms2: 0, orbsym: Vec::new() };
    let mut key: Option<String> = None;
    let mut push = |key: &str, value: &str, line: usize| -> Result<(), ChemError> {
        if value.is_empty() {
            return Ok(());
        }
        let int = |v: &str| {
            v.parse::<i64>()
                .map_err(|_| parse_err(line, format!("expected integer for {key}, got `{v}`")))
        };
        match key {
            "NORB" => out.norb = Some(int(value)? as usize),
            "NELEC" => out.nelec = Some(int(value)? as usize),
            "MS2" => out.ms2 = int(value)? as i32,
            "ORBSYM" => out.orbsym.push(int(value)? as u32),
            // ISYM and any other namelist keys are accepted and ignored.
            _ => {
                int(value).ok();
            }
        }
        Ok(())
    };
    for (line, tok) in tokens {
        if let Some(eq) = tok.find('=') {
            let k = tok[..eq].to_ascii_uppercase();
            let v = &tok[eq + 1..];
            push(&k, v, *line)?;
            key = Some(k);
        } else if let Some(k) = &key {
            push(k, tok, *line)?;
        } else {
            return Err(parse_err(*line, format!("unexpected namelist token `{tok}`")));
        }
    }
    Ok(out)
}

/// Parse FCIDUMP text into integrals.
pub fn parse_fcidump<R: Real>(text: &str) -> Result<MolecularIntegrals<R>, ChemError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    // Namelist: collect tokens until the &END or / terminator.
    let mut header_tokens: Vec<(usize, String)> = Vec::new();
    let mut seen_start = false;
    let mut body_start = None;
    'header: for (line_no, line) in lines.by_ref() {
        let mut rest = line.trim();
        if rest.is_empty() {
            continue;
        }
        if !seen_start {
            let upper = rest.to_ascii_uppercase();
            let Some(pos) = upper.find("&FCI") else {
                return Err(parse_err(line_no, "file must begin with an &FCI namelist"));
            };
            rest = &rest[pos + 4..];
            seen_start = true;
        }
        for raw in rest.split(|c: char| c.is_whitespace() || c == ',') {
            if raw.is_empty() {
                continue;
            }
            let upper = raw.to_ascii_uppercase();
            if upper == "&END" || upper == "/" || upper == "/END" {
                body_start = Some(line_no);
                break 'header;
            }
            header_tokens.push((line_no, raw.to_string()));
        }
    }
    let Some(_) = body_start else {
        return Err(parse_err(
            text.lines().count(),
            "namelist never terminated with &END or /",
        ));
    };
    let nl = parse_namelist(&header_tokens)?;
    let norb = nl.norb.ok_or_else(|| parse_err(1, "namelist missing NORB"))?;
    let nelec = nl.nelec.ok_or_else(|| parse_err(1, "namelist missing NELEC"))?;
    if norb == 0 || norb > 64 {
        return Err(parse_err(1, format!("NORB={norb} out of supported range 1..=64")));
    }
    if !nl.orbsym.is_empty() && nl.orbsym.len() != norb {
        return Err(parse_err(
            1,
            format!("ORBSYM has {} labels for NORB={norb}", nl.orbsym.len()),
        ));
    }
    let mut m = MolecularIntegrals::<R>::new(norb, nelec, nl.ms2, nl.orbsym);

    for (line_no, line) in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(parse_err(
                line_no,
                format!("expected `value i j k l`, got {} fields", fields.len()),
            ));
        }
        let value: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(line_no, format!("non-numeric value `{}`", fields[0])))?;
        let value = R::of(value);
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
            *slot = f
                .parse()
                .map_err(|_| parse_err(line_no, format!("non-integer index `{f}`")))?;
        }
        let [i, j, k, l] = idx;
        let check = |x: usize| -> Result<usize, ChemError> {
            if x == 0 || x > norb {
                Err(parse_err(line_no, format!("orbital index {x} out of range 1..={norb}")))
            } else {
                Ok(x - 1)
            }
        };
        match (i, j, k, l) {
            (0, 0, 0, 0) => m.set_e_core(value),
            (_, _, 0, 0) => {
                m.set_h1(check(i)?, check(j)?, value)
                    .map_err(|e| parse_err(line_no, e.to_string()))?;
            }
            _ => {
                m.set_eri(check(i)?, check(j)?, check(k)?, check(l)?, value)
                    .map_err(|e| parse_err(line_no, e.to_string()))?;
            }
        }
    }
    Ok(m)
}

/// C-style %.16E: one mantissa digit, sixteen decimals, signed 2-digit
/// exponent. Rust's `{:E}` drops the exponent sign and padding.
fn fmt_e16(x: f64) -> String {
    let s = format!("{x:.16E}");
    let (mant, exp) = s.split_once('E').expect("exponent marker");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mant}E{sign}{digits:0>2}")
}

/// Emit FCIDUMP text: eri block, one-body block, then the core energy.
/// Exact zeros are skipped except the core energy line.
pub fn write_fcidump<R: Real>(m: &MolecularIntegrals<R>) -> String {
    let mut out = String::new();
    let _ = write!(out, "&FCI NORB={},NELEC={},MS2={},", m.n_orb(), m.n_elec(), m.ms2());
    let _ = write!(out, "\n  ORBSYM=");
    for s in m.orbsym() {
        let _ = write!(out, "{s},");
    }
    let _ = write!(out, "\n  ISYM=1,\n &END\n");
    let mut emit = |v: R, i: usize, j: usize, k: usize, l: usize| {
        let _ = writeln!(out, " {} {:4} {:4} {:4} {:4}", fmt_e16(v.as_f64()), i, j, k, l);
    };
    let n = m.n_orb();
    for p in 0..n {
        for q in 0..=p {
            for r in 0..=p {
                let s_max = if r == p { q } else { r };
                for s in 0..=s_max {
                    let v = m.eri(p, q, r, s);
                    if v != R::zero() {
                        emit(v, p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = m.h1(p, q);
            if v != R::zero() {
                emit(v, p + 1, q + 1, 0, 0);
            }
        }
    }
    emit(m.e_core(), 0, 0, 0, 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "&FCI NORB=  2,NELEC=  2,MS2=0,\n  ORBSYM=1,5,\n  ISYM=1,\n &END\n 0.6744931033260081E+00    1    1    1    1\n 0.6634720448605567E+00    2    2    1    1\n 0.6973979494693358E+00    2    2    2    2\n 0.1812875358123322E+00    2    1    2    1\n-0.1252477303939621E+01    1    1    0    0\n-0.4759344611440753E+00    2    2    0    0\n 0.7137758743754461E+00    0    0    0    0\n";

    #[test]
    fn parses_minimal_h2_like_dump() {
        let m = parse_fcidump::<f64>(SAMPLE).unwrap();
        assert_eq!(m.n_orb(), 2);
        assert_eq!(m.n_elec(), 2);
        assert_eq!(m.orbsym(), &[1, 5]);
        assert!((m.e_core() - 0.7137758743754461).abs() < 1e-15);
        assert!((m.h1(0, 0) + 1.2524773039396210).abs() < 1e-15);
        assert!((m.h1(1, 0)).abs() < 1e-15);
        assert!((m.eri(1, 0, 1, 0) - 0.1812875358123322).abs() < 1e-15);
        assert!((m.eri(0, 1, 0, 1) - 0.1812875358123322).abs() < 1e-15);
    }

    #[test]
    fn round_trips_through_writer() {
        let m = parse_fcidump::<f64>(SAMPLE).unwrap();
        let text = write_fcidump(&m);
        let m2 = parse_fcidump::<f64>(&text).unwrap();
        assert_eq!(m.n_orb(), m2.n_orb());
        assert_eq!(m.n_elec(), m2.n_elec());
        assert_eq!(m.orbsym(), m2.orbsym());
        assert_eq!(m.e_core(), m2.e_core());
        for p in 0..2 {
            for q in 0..2 {
                assert_eq!(m.h1(p, q), m2.h1(p, q));
                for r in 0..2 {
                    for s in 0..2 {
                        assert_eq!(m.eri(p, q, r, s), m2.eri(p, q, r, s));
                    }
                }
            }
        }
    }

    #[test]
    fn core_only_dump() {
        let text = "&FCI NORB=1,NELEC=0,MS2=0,\n &END\n 2.5 0 0 0 0\n";
        let m = parse_fcidump::<f64>(text).unwrap();
        assert_eq!(m.e_core(), 2.5);
        assert_eq!(m.h1(0, 0), 0.0);
    }

    #[test]
    fn slash_terminator_and_duplicates() {
        let text = "&FCI NORB=2, NELEC=2,\n /\n 1.0 1 1 0 0\n 3.0 1 1 0 0\n";
        let m = parse_fcidump::<f64>(text).unwrap();
        assert_eq!(m.h1(0, 0), 3.0);
        assert_eq!(m.ms2(), 0);
        assert_eq!(m.orbsym(), &[1, 1]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_index = "&FCI NORB=2,NELEC=2,\n&END\n 1.0 3 1 0 0\n";
        match parse_fcidump::<f64>(bad_index) {
            Err(ChemError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_value = "&FCI NORB=2,NELEC=2,\n&END\n x 1 1 0 0\n";
        assert!(matches!(parse_fcidump::<f64>(bad_value), Err(ChemError::Parse { line: 3, .. })));
        let missing_norb = "&FCI NELEC=2,\n&END\n";
        assert!(matches!(parse_fcidump::<f64>(missing_norb), Err(ChemError::Parse { .. })));
        let no_header = " 1.0 1 1 0 0\n";
        assert!(parse_fcidump::<f64>(no_header).is_err());
    }

    #[test]
    fn e16_format_matches_c_printf() {
        assert_eq!(fmt_e16(0.5), "5.0000000000000000E-01");
        assert_eq!(fmt_e16(-2.0), "-2.0000000000000000E+00");
        assert_eq!(fmt_e16(0.0), "0.0000000000000000E+00");
        assert_eq!(fmt_e16(1.25e-120), "1.2500000000000000E-120");
        assert_eq!(fmt_e16(1e-120), "9.9999999999999998E-121");
    }
}
