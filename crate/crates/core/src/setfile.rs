//! Plain-text matrix-set files.
//!
//! ```text
//! # anything after '#' is ignored
//! name morris
//! field real          # or complex; default real
//! dim 2
//! S1                  # label line, then `dim` rows
//! 1 0
//! 0 1/2
//! S2
//! 0 0.5
//! 1/2 0
//! ```
//!
//! Entries are decimals or `p/q` rationals. In complex files an entry may be
//! written `re,im` (each part a decimal or rational, no spaces).

use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix, C64};
use crate::products::MatrixSet;

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn parse_real(tok: &str) -> Option<f64> {
    let value = match tok.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.parse().ok()?;
            let q: f64 = q.parse().ok()?;
            if q == 0.0 {
                return None;
            }
            p / q
        }
        None => tok.parse().ok()?,
    };
    value.is_finite().then_some(value)
}

fn parse_entry(tok: &str, field: Field) -> std::result::Result<C64, String> {
    let bad = || format!("cannot parse `{tok}` as a number");
    match tok.split_once(',') {
        Some((re, im)) => {
            if field == Field::Real {
                return Err(format!("complex entry `{tok}` in a real set"));
            }
            Ok(C64::new(
                parse_real(re).ok_or_else(bad)?,
                parse_real(im).ok_or_else(bad)?,
            ))
        }
        None => {
            if tok.split_once('/').is_some_and(|(_, q)| q.parse::<f64>() == Ok(0.0)) {
                return Err(format!("zero denominator in `{tok}`"));
            }
            Ok(C64::new(parse_real(tok).ok_or_else(bad)?, 0.0))
        }
    }
}

/// Non-comment content of each line with its 1-based line number, skipping
/// blank lines.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        (!body.trim().is_empty()).then_some((i + 1, body))
    })
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, t)| (line[..byte].chars().count() + 1, t))
        .collect()
}

pub fn parse_set_file(text: &str) -> Result<MatrixSet> {
    let mut lines = content_lines(text).peekable();
    let mut name: Option<String> = None;
    let mut field: Option<Field> = None;
    let mut dim: Option<usize> = None;
    let mut last_line = 0;

    while let Some(&(ln, body)) = lines.peek() {
        let toks = tokens(body);
        let (col, key) = toks[0];
        let rest = body.trim_start()[key.len()..].trim();
        match key {
            "name" => name = Some(rest.to_string()),
            "field" => {
                field = Some(rest.parse().map_err(|_| {
                    err(ln, col + key.len() + 1, format!("field must be `real` or `complex`, got `{rest}`"))
                })?)
            }
            "dim" => {
                let d: usize = rest
                    .parse()
                    .map_err(|_| err(ln, col + key.len() + 1, format!("bad dimension `{rest}`")))?;
                if !(crate::matrix::MIN_DIM..=crate::matrix::MAX_DIM).contains(&d) {
                    return Err(err(ln, col, Error::Dimension(d).to_string()));
                }
                dim = Some(d);
            }
            _ => break,
        }
        last_line = ln;
        lines.next();
    }
    let field = field.unwrap_or(Field::Real);
    let d = dim.ok_or_else(|| err(last_line.max(1), 1, "missing `dim` declaration"))?;

    let mut generators = Vec::new();
    while let Some((ln, label_line)) = lines.next() {
        let label = label_line.trim().to_string();
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            let (row_ln, row) = lines.next().ok_or_else(|| {
                err(ln, 1, format!("generator `{label}` has {r} of {d} rows"))
            })?;
            let toks = tokens(row);
            if toks.len() != d {
                let col = toks.get(d).map_or(row.trim_end().chars().count() + 1, |t| t.0);
                return Err(err(
                    row_ln,
                    col,
                    format!("expected {d} entries in row {} of `{label}`, got {}", r + 1, toks.len()),
                ));
            }
            for (col, tok) in toks {
                entries.push(parse_entry(tok, field).map_err(|m| err(row_ln, col, m))?);
            }
        }
        let m = match field {
            Field::Real => Matrix::new(d, Field::Real, entries),
            Field::Complex => Matrix::complex(d, entries),
        }
        .map_err(|e| err(ln, 1, format!("generator `{label}`: {e}")))?;
        generators.push((label, m));
    }
    let set = MatrixSet::new(generators)?;
    Ok(match name {
        Some(n) => set.with_name(n),
        None => set,
    })
}

fn format_part(x: f64) -> String {
    // shortest round-trip form
    format!("{x:?}")
}

pub fn emit_set_file(set: &MatrixSet) -> String {
    let mut out = String::new();
    if let Some(name) = set.name() {
        out.push_str(&format!("name {name}\n"));
    }
    out.push_str(&format!("field {}\ndim {}\n", set.field(), set.dim()));
    for (label, g) in set.labels().iter().zip(set.generators()) {
        out.push_str(label);
        out.push('\n');
        for i in 0..set.dim() {
            let row: Vec<String> = g
                .row(i)
                .iter()
                .map(|z| match set.field() {
                    Field::Real => format_part(z.re),
                    Field::Complex => format!("{},{}", format_part(z.re), format_part(z.im)),
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{hare_family, morris_family, random_family, ALPHA_STAR};

    const MORRIS: &str = "# Morris pair\nname morris\nfield real\ndim 2\nS1\n1 0   # row one\n0 1/2\n\nS2\n0 0.5\n2/4 0\n";

    #[test]
    fn parses_rationals_and_comments() {
        let set = parse_set_file(MORRIS).unwrap();
        assert_eq!(set.name(), Some("morris"));
        assert_eq!(set.labels(), ["S1", "S2"]);
        assert_eq!(set.generators(), morris_family(0.5).unwrap().generators());
        let quarter = parse_set_file("dim 2\nA\n3/4 0\n0 1\nB\n1 0\n0 1\n").unwrap();
        assert_eq!(quarter.generator(0).get(0, 0).re, 0.75);
    }

    #[test]
    fn round_trips() {
        for set in [
            hare_family(ALPHA_STAR).unwrap(),
            hare_family(0.3).unwrap(),
            random_family(7, 5, 3, 1.0).unwrap(),
        ] {
            let text = emit_set_file(&set);
            let back = parse_set_file(&text).unwrap();
            assert_eq!(back.generators(), set.generators());
            assert_eq!(emit_set_file(&back), text);
        }
    }

    #[test]
    fn complex_entries() {
        let text = "field complex\ndim 2\nA\n1,1 0\n0 -1/3,2\nB\n1 0\n0 1\n";
        let set = parse_set_file(text).unwrap();
        assert_eq!(set.field(), Field::Complex);
        assert_eq!(set.generator(0).get(1, 1), C64::new(-1.0 / 3.0, 2.0));
        let back = parse_set_file(&emit_set_file(&set)).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn errors_carry_positions() {
        let one = parse_set_file("dim 2\nA\n1 0\n0 1\n").unwrap_err();
        assert!(one.to_string().contains("card(K) ≥ 2 required"), "{one}");

        match parse_set_file("dim 2\nA\n1 0\n0 x\nB\n1 0\n0 1\n").unwrap_err() {
            Error::Parse { line, col, .. } => assert_eq!((line, col), (4, 3)),
            e => panic!("{e}"),
        }
        match parse_set_file("dim 2\nA\n1 0 4\n0 1\nB\n1 0\n0 1\n").unwrap_err() {
            Error::Parse { line, col, .. } => assert_eq!((line, col), (3, 5)),
            e => panic!("{e}"),
        }
        let zero = parse_set_file("dim 2\nA\n1/0 0\n0 1\nB\n1 0\n0 1\n").unwrap_err();
        assert!(zero.to_string().contains("zero denominator"));
        assert!(parse_set_file("A\n1 0\n0 1\n").is_err());
        assert!(parse_set_file("dim 2\nA\n1 0\n").is_err());
        assert!(parse_set_file("dim 2\nA\n1,1 0\n0 1\nB\n1 0\n0 1\n").is_err());
        assert!(parse_set_file("dim 1\nA\n1\nB\n2\n").is_err());
        assert!(parse_set_file("field quaternion\ndim 2\n").is_err());
        assert!(parse_set_file("dim 2\nA\nnan 0\n0 1\nB\n1 0\n0 1\n").is_err());
    }
}
