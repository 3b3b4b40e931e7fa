//! Line-oriented problem files.
//!
//! ```text
//! # comment
//! [problem]
//! name = beam
//! domain = interval(-1, 1)        # or disk(3)
//! friedrichs = 0.4                # optional override
//!
//! [load]
//! piece: domain=(-1, 1), expr="-1152"
//!
//! [obstacle]
//! piece: domain=(-1, 1), expr="-1"
//!
//! [exact.u]
//! piece: domain=(-1, -0.5), expr="-8*(x+1)^2*(6*x^2+4*x+1)"
//! ...
//! [exact.pstar]                   # on a disk: e11="…", e12="…", e22="…"
//! piece: domain=(-1, -0.5), expr="-48*(2*x+1)*(6*x+5)"
//! ...
//! [exact.coincidence]
//! interval(-0.5, 0.5)             # or disk(1), annulus(1, 2)
//!
//! [approx.v1]
//! kind = primal
//! piece: domain=(-1, -0.25), expr="…"
//! ```
//!
//! Piece endpoints and domain sizes may be constant expressions such as `1/3` or `pi`.

use std::path::Path;

use crate::expr::{Expr, VarSet};
use crate::fields::{Domain, PiecewiseScalarField, PiecewiseSymMatrixField, SubdomainSet, SymEntries};

use super::{ApproxField, ApproximationSpec, ExactSolution, ProblemError, ProblemInstance};

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl Line<'_> {
    fn error(&self, column: usize, message: impl Into<String>) -> ProblemError {
        ProblemError::Parse { line: self.number, column, message: message.into() }
    }

    /// 1-based column of `part` inside this line.
    fn column_of(&self, part: &str) -> usize {
        let offset = part.as_ptr() as usize - self.text.as_ptr() as usize;
        self.text[..offset].chars().count() + 1
    }
}

#[derive(Default)]
struct Section<'a> {
    header: Option<Line<'a>>,
    name: String,
    entries: Vec<(Line<'a>, &'a str, &'a str)>,
    pieces: Vec<Line<'a>>,
    bare: Vec<Line<'a>>,
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Splits at top-level commas (outside quotes and parentheses).
fn split_top(s: &str) -> Vec<&str> {
    let (mut depth, mut quoted, mut start) = (0i32, false, 0);
    let mut out = Vec::new();
    for (i, c) in s.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '(' if !quoted => depth += 1,
            ')' if !quoted => depth -= 1,
            ',' if !quoted && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn constant(line: &Line, text: &str) -> Result<f64, ProblemError> {
    let t = text.trim();
    let col = line.column_of(t);
    let e = Expr::parse(t, VarSet::Line).map_err(|e| line.error(col + e.position, e.kind.to_string()))?;
    e.as_const().ok_or_else(|| line.error(col, format!("`{t}` is not a constant")))
}

/// `name(args)` → `(name, [args])`.
fn call<'a>(line: &Line, text: &'a str) -> Result<(&'a str, Vec<&'a str>), ProblemError> {
    let t = text.trim();
    let open = t.find('(').ok_or_else(|| line.error(line.column_of(t), format!("expected `name(...)`, found `{t}`")))?;
    if !t.ends_with(')') {
        return Err(line.error(line.column_of(t) + t.chars().count(), "missing `)`"));
    }
    Ok((t[..open].trim(), split_top(&t[open + 1..t.len() - 1])))
}

fn parse_domain(line: &Line, text: &str) -> Result<Domain, ProblemError> {
    let (name, args) = call(line, text)?;
    let domain = match (name, args.as_slice()) {
        ("interval", [a, b]) => Domain::Interval { a: constant(line, a)?, b: constant(line, b)? },
        ("disk", [r]) => Domain::Disk { radius: constant(line, r)? },
        _ => return Err(line.error(line.column_of(text.trim()), "expected interval(a, b) or disk(R)")),
    };
    domain.validate().map_err(|e| line.error(line.column_of(text.trim()), e.to_string()))?;
    Ok(domain)
}

fn parse_range(line: &Line, text: &str, domain: &Domain) -> Result<(f64, f64), ProblemError> {
    let t = text.trim();
    let (name, args) = match t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        Some(inner) => ("", split_top(inner)),
        None => call(line, t)?,
    };
    let ok_name = match domain {
        Domain::Interval { .. } => name.is_empty(),
        Domain::Disk { .. } => name == "annulus" || name.is_empty(),
    };
    if !ok_name || args.len() != 2 || !t.ends_with(')') {
        let expected = match domain {
            Domain::Interval { .. } => "(a, b)",
            Domain::Disk { .. } => "annulus(r1, r2)",
        };
        return Err(line.error(line.column_of(t), format!("expected piece domain {expected}")));
    }
    Ok((constant(line, args[0])?, constant(line, args[1])?))
}

fn key_values<'a>(line: &Line, text: &'a str) -> Result<Vec<(&'a str, &'a str)>, ProblemError> {
    split_top(text)
        .into_iter()
        .map(|part| {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| line.error(line.column_of(part.trim_start()), "expected key=value"))?;
            Ok((k.trim(), v.trim()))
        })
        .collect()
}

fn quoted<'a>(line: &Line, text: &'a str) -> Result<&'a str, ProblemError> {
    text.strip_prefix('"')
        .and_then(|t| t.strip_suffix('"'))
        .ok_or_else(|| line.error(line.column_of(text), "expected a double-quoted expression"))
}

fn expression(line: &Line, text: &str, domain: &Domain) -> Result<Expr, ProblemError> {
    let body = quoted(line, text)?;
    let col = line.column_of(body);
    Expr::parse(body, domain.vars()).map_err(|e| line.error(col + e.position, e.kind.to_string()))
}

enum PieceBody {
    Scalar(Expr),
    Matrix(SymEntries),
}

fn parse_piece(line: &Line, domain: &Domain) -> Result<(f64, f64, PieceBody), ProblemError> {
    let rest = line.text.trim_start().strip_prefix("piece:").expect("caller checked the prefix");
    let kv = key_values(line, rest)?;
    let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
    for (k, _) in &kv {
        if !matches!(*k, "domain" | "expr" | "e11" | "e12" | "e22") {
            return Err(line.error(line.column_of(k), format!("unknown piece key `{k}`")));
        }
    }
    let range_text = get("domain").ok_or_else(|| line.error(1, "piece needs domain=…"))?;
    let (lo, hi) = parse_range(line, range_text, domain)?;
    let body = match (get("expr"), get("e11"), get("e12"), get("e22")) {
        (Some(e), None, None, None) => PieceBody::Scalar(expression(line, e, domain)?),
        (None, Some(a), b, Some(c)) => PieceBody::Matrix(SymEntries::plane(
            expression(line, a, domain)?,
            match b {
                Some(b) => expression(line, b, domain)?,
                None => Expr::zero(),
            },
            expression(line, c, domain)?,
        )),
        _ => return Err(line.error(1, "piece needs expr=\"…\" or e11/e12/e22")),
    };
    Ok((lo, hi, body))
}

fn field_error(section: &Section, e: impl std::fmt::Display) -> ProblemError {
    let line = section.header.as_ref().map_or(0, |l| l.number);
    ProblemError::Parse { line, column: 1, message: format!("[{}]: {e}", section.name) }
}

fn scalar_field(section: &Section, domain: &Domain) -> Result<PiecewiseScalarField, ProblemError> {
    let mut pieces = Vec::new();
    for line in &section.pieces {
        match parse_piece(line, domain)? {
            (lo, hi, PieceBody::Scalar(e)) => pieces.push((lo, hi, e)),
            _ => return Err(line.error(1, "a scalar field takes expr=\"…\"")),
        }
    }
    PiecewiseScalarField::new(*domain, pieces).map_err(|e| field_error(section, e))
}

fn matrix_field(section: &Section, domain: &Domain) -> Result<PiecewiseSymMatrixField, ProblemError> {
    let mut pieces = Vec::new();
    for line in &section.pieces {
        let (lo, hi, body) = parse_piece(line, domain)?;
        let entries = match (body, domain) {
            (PieceBody::Scalar(e), Domain::Interval { .. }) => SymEntries::line(e),
            (PieceBody::Matrix(m), Domain::Disk { .. }) => m,
            (PieceBody::Scalar(_), Domain::Disk { .. }) => return Err(line.error(1, "a matrix field on a disk takes e11/e12/e22")),
            (PieceBody::Matrix(_), Domain::Interval { .. }) => return Err(line.error(1, "a matrix field on an interval takes expr=\"…\"")),
        };
        pieces.push((lo, hi, entries));
    }
    PiecewiseSymMatrixField::new(*domain, pieces).map_err(|e| field_error(section, e))
}

fn sections(text: &str) -> Result<Vec<Section<'_>>, ProblemError> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = Line { number: i + 1, text: raw };
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| line.error(line.column_of(body) + body.chars().count(), "missing `]`"))?
                .trim();
            out.push(Section { header: Some(Line { number: i + 1, text: raw }), name: name.to_string(), ..Default::default() });
            continue;
        }
        let Some(section) = out.last_mut() else {
            return Err(line.error(line.column_of(body), "content before the first [section]"));
        };
        if body.starts_with("piece:") {
            section.pieces.push(Line { number: i + 1, text: strip_comment(raw) });
        } else if let Some((k, v)) = body.split_once('=') {
            section.entries.push((Line { number: i + 1, text: raw }, k.trim(), v.trim()));
        } else {
            section.bare.push(Line { number: i + 1, text: strip_comment(raw) });
        }
    }
    Ok(out)
}

/// Parses and validates a problem file.
pub fn load_problem(text: &str) -> Result<ProblemInstance, ProblemError> {
    let sections = sections(text)?;
    let find = |name: &str| sections.iter().find(|s| s.name == name);
    let header = find("problem").ok_or(ProblemError::Parse { line: 1, column: 1, message: "missing [problem] section".into() })?;

    let mut name = None;
    let mut domain = None;
    let mut friedrichs = None;
    for (line, k, v) in &header.entries {
        match *k {
            "name" => name = Some(v.to_string()),
            "domain" => domain = Some(parse_domain(line, v)?),
            "friedrichs" => friedrichs = Some(constant(line, v)?),
            other => return Err(line.error(line.column_of(other), format!("unknown key `{other}` in [problem]"))),
        }
    }
    let name = name.ok_or_else(|| field_error(header, "missing name"))?;
    let domain = domain.ok_or_else(|| field_error(header, "missing domain"))?;

    for s in &sections {
        let known = matches!(s.name.as_str(), "problem" | "load" | "obstacle" | "exact.u" | "exact.pstar" | "exact.coincidence")
            || s.name.starts_with("approx.");
        if !known {
            return Err(field_error(s, "unknown section"));
        }
    }

    let f = scalar_field(find("load").ok_or_else(|| field_error(header, "missing [load] section"))?, &domain)?;
    let phi = scalar_field(find("obstacle").ok_or_else(|| field_error(header, "missing [obstacle] section"))?, &domain)?;

    let exact = match (find("exact.u"), find("exact.pstar"), find("exact.coincidence")) {
        (None, None, None) => None,
        (Some(u), Some(p), Some(c)) => {
            let u = scalar_field(u, &domain)?;
            let p_star = matrix_field(p, &domain)?;
            let mut ranges = Vec::new();
            for line in &c.bare {
                for part in split_top(line.text.trim()) {
                    let (kind, args) = call(line, part)?;
                    let range = match (kind, args.as_slice(), &domain) {
                        ("interval", [a, b], Domain::Interval { .. }) => (constant(line, a)?, constant(line, b)?),
                        ("disk", [r], Domain::Disk { .. }) => (0.0, constant(line, r)?),
                        ("annulus", [a, b], Domain::Disk { .. }) => (constant(line, a)?, constant(line, b)?),
                        _ => return Err(line.error(line.column_of(part.trim()), "expected interval(a, b), disk(R) or annulus(r1, r2)")),
                    };
                    ranges.push(range);
                }
            }
            Some(ExactSolution::new(u, p_star, SubdomainSet::new(domain.geometry(), ranges)))
        }
        _ => return Err(field_error(header, "an exact solution needs [exact.u], [exact.pstar] and [exact.coincidence]")),
    };

    let mut approximations = Vec::new();
    for s in sections.iter().filter(|s| s.name.starts_with("approx.")) {
        let approx_name = &s.name["approx.".len()..];
        let kind = s.entries.iter().find(|(_, k, _)| *k == "kind").map(|(l, _, v)| (l, *v));
        let field = match kind {
            Some((_, "primal")) => ApproxField::Primal(scalar_field(s, &domain)?),
            Some((_, "dual")) => ApproxField::Dual(matrix_field(s, &domain)?),
            Some((line, other)) => return Err(line.error(line.column_of(other), format!("kind must be primal or dual, not `{other}`"))),
            None => return Err(field_error(s, "missing kind = primal|dual")),
        };
        approximations.push(ApproximationSpec::fixed(approx_name, "loaded from file", field));
    }

    ProblemInstance::new(&name, f, phi, friedrichs, exact, approximations)
}

pub fn load_problem_file(path: &Path) -> Result<ProblemInstance, ProblemError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ProblemError::Parse { line: 0, column: 0, message: format!("{}: {e}", path.display()) })?;
    load_problem(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[problem]
name = flat
domain = interval(-1, 1)
[load]
piece: domain=(-1, 1), expr="-1"
[obstacle]
piece: domain=(-1, 1), expr="-1"   # a comment
"#;

    #[test]
    fn minimal_file_loads() {
        let p = load_problem(MINIMAL).unwrap();
        assert_eq!(p.name, "flat");
        assert!(p.exact.is_none());
    }

    #[test]
    fn errors_carry_positions() {
        let bad = MINIMAL.replace("expr=\"-1\"   #", "expr=\"-1 +\"   #");
        match load_problem(&bad) {
            Err(ProblemError::Parse { line, column, .. }) => {
                assert_eq!(line, 8);
                assert!(column > 20);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn positive_boundary_obstacle_is_rejected() {
        let bad = MINIMAL.replace("expr=\"-1\"   #", "expr=\"x\"   #");
        assert!(matches!(load_problem(&bad), Err(ProblemError::Invalid(m)) if m[0].contains("φ")));
    }

    #[test]
    fn overlapping_pieces_are_rejected() {
        let bad = MINIMAL.replace(
            "piece: domain=(-1, 1), expr=\"-1\"\n[obstacle]",
            "piece: domain=(-1, 0.5), expr=\"-1\"\npiece: domain=(0, 1), expr=\"-1\"\n[obstacle]",
        );
        match load_problem(&bad) {
            Err(ProblemError::Parse { message, .. }) => assert!(message.contains("overlap"), "{message}"),
            other => panic!("{other:?}"),
        }
    }
}
