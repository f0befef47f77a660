//! Text format for operad tables.
//!
//! ```text
//! # lines starting with # are comments
//! operad c2
//! arity 0:
//! arity 1: e a
//! identity: e
//! comp e (e) = e
//! comp e (a) = a
//! comp a (e) = a
//! comp a (a) = e
//! end
//! ```
//!
//! Every arity from 0 to the truncation bound needs an `arity` line, labels
//! are unique across the whole file so `comp` lines stay unambiguous, and the
//! table must list every admissible composition exactly once. Nullary
//! elements appear as `comp z () = z`.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::operad::{ElemRef, FiniteOperad, StructureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn valid_label(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '\''))
}

/// Parses the text format into an operad, running the full structural checks.
pub fn parse_operad(text: &str) -> Result<FiniteOperad, FormatError> {
    let mut name: Option<String> = None;
    let mut arity_rows: Vec<Option<(usize, Vec<String>)>> = Vec::new();
    let mut identity_label: Option<(usize, String)> = None;
    let mut comp_lines: Vec<(usize, String, Vec<String>, String)> = Vec::new();
    let mut ended = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if ended {
            return Err(syntax(lineno, "content after end"));
        }
        if name.is_none() {
            let rest = line
                .strip_prefix("operad")
                .ok_or_else(|| syntax(lineno, "expected `operad <name>`"))?;
            let n = rest.trim();
            if n.is_empty() {
                return Err(syntax(lineno, "operad name is empty"));
            }
            name = Some(n.to_string());
            continue;
        }
        if let Some(rest) = line.strip_prefix("arity") {
            let (num, labels) = rest
                .split_once(':')
                .ok_or_else(|| syntax(lineno, "expected `arity <n>: <labels>`"))?;
            let n: usize = num
                .trim()
                .parse()
                .map_err(|_| syntax(lineno, format!("bad arity number {:?}", num.trim())))?;
            let row: Vec<String> = labels.split_whitespace().map(|s| s.to_string()).collect();
            for l in &row {
                if !valid_label(l) {
                    return Err(syntax(lineno, format!("bad label {l:?}")));
                }
            }
            if arity_rows.len() <= n {
                arity_rows.resize(n + 1, None);
            }
            if arity_rows[n].is_some() {
                return Err(syntax(lineno, format!("arity {n} listed twice")));
            }
            arity_rows[n] = Some((lineno, row));
            continue;
        }
        if let Some(rest) = line.strip_prefix("identity:") {
            if identity_label.is_some() {
                return Err(syntax(lineno, "identity listed twice"));
            }
            let l = rest.trim();
            if !valid_label(l) {
                return Err(syntax(lineno, format!("bad identity label {l:?}")));
            }
            identity_label = Some((lineno, l.to_string()));
            continue;
        }
        if let Some(rest) = line.strip_prefix("comp") {
            let (lhs, result) = rest
                .rsplit_once('=')
                .ok_or_else(|| syntax(lineno, "expected `comp <op> (<args>) = <result>`"))?;
            let lhs = lhs.trim();
            let open = lhs
                .find('(')
                .ok_or_else(|| syntax(lineno, "missing `(` in comp line"))?;
            if !lhs.ends_with(')') {
                return Err(syntax(lineno, "missing `)` in comp line"));
            }
            let theta = lhs[..open].trim();
            let inner = &lhs[open + 1..lhs.len() - 1];
            let args: Vec<String> = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(|s| s.trim().to_string()).collect()
            };
            let result = result.trim();
            for l in std::iter::once(theta)
                .chain(args.iter().map(|s| s.as_str()))
                .chain(std::iter::once(result))
            {
                if !valid_label(l) {
                    return Err(syntax(lineno, format!("bad label {l:?}")));
                }
            }
            comp_lines.push((lineno, theta.to_string(), args, result.to_string()));
            continue;
        }
        if line == "end" {
            ended = true;
            continue;
        }
        return Err(syntax(lineno, format!("unrecognized line {line:?}")));
    }

    let name = name.ok_or_else(|| syntax(text.lines().count().max(1), "missing operad header"))?;
    if !ended {
        return Err(syntax(text.lines().count().max(1), "missing end line"));
    }
    let mut labels = Vec::with_capacity(arity_rows.len());
    for (n, row) in arity_rows.iter().enumerate() {
        match row {
            Some((_, r)) => labels.push(r.clone()),
            None => {
                return Err(syntax(
                    text.lines().count().max(1),
                    format!("no arity {n} line; every arity up to the bound needs one"),
                ))
            }
        }
    }
    let mut by_label: HashMap<&str, ElemRef> = HashMap::new();
    for (arity, row) in labels.iter().enumerate() {
        for (index, l) in row.iter().enumerate() {
            by_label.insert(l.as_str(), ElemRef::new(arity, index));
        }
    }
    let (id_line, id_label) =
        identity_label.ok_or_else(|| syntax(text.lines().count().max(1), "missing identity line"))?;
    let identity = *by_label
        .get(id_label.as_str())
        .ok_or_else(|| syntax(id_line, format!("unknown identity label {id_label:?}")))?;
    let mut entries = Vec::with_capacity(comp_lines.len());
    for (lineno, theta, args, result) in &comp_lines {
        let look = |l: &String| {
            by_label
                .get(l.as_str())
                .copied()
                .ok_or_else(|| syntax(*lineno, format!("unknown label {l:?}")))
        };
        let t = look(theta)?;
        let a: Vec<ElemRef> = args.iter().map(look).collect::<Result<_, _>>()?;
        let r = look(result)?;
        entries.push((t, a, r));
    }
    Ok(FiniteOperad::from_parts(name, labels, identity, &entries)?)
}

/// Prints an operad in canonical form: arity lines ascending, composition
/// entries in canonical table order. `parse_operad` inverts it exactly.
pub fn print_operad(op: &FiniteOperad) -> String {
    let mut out = String::new();
    writeln!(out, "operad {}", op.name()).unwrap();
    for (arity, row) in op.labels().iter().enumerate() {
        if row.is_empty() {
            writeln!(out, "arity {arity}:").unwrap();
        } else {
            writeln!(out, "arity {arity}: {}", row.join(" ")).unwrap();
        }
    }
    writeln!(out, "identity: {}", op.label(op.identity())).unwrap();
    for (theta, args, result) in op.comp_entries() {
        let names: Vec<&str> = args.iter().map(|&a| op.label(a)).collect();
        writeln!(
            out,
            "comp {} ({}) = {}",
            op.label(theta),
            names.join(", "),
            op.label(result)
        )
        .unwrap();
    }
    writeln!(out, "end").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> FiniteOperad {
        FiniteOperad::from_monoid("c2", vec!["e".into(), "a".into()], 0, |a, b| (a + b) % 2)
            .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        for op in [c2(), FiniteOperad::terminal(3)] {
            let text = print_operad(&op);
            let back = parse_operad(&text).unwrap();
            assert_eq!(back, op);
            assert_eq!(back.name(), op.name());
            assert_eq!(print_operad(&back), text);
        }
    }

    #[test]
    fn parses_hand_written_table() {
        let text = "\
# two-element group
operad c2

arity 0:
arity 1: e a
identity: e
comp e (e) = e
comp e (a) = a
comp a (e) = a
comp a (a) = e
end
";
        let op = parse_operad(text).unwrap();
        assert_eq!(op, c2());
        assert!(op.validate().ok());
    }

    #[test]
    fn nullary_comp_lines() {
        let op = FiniteOperad::terminal(2);
        let text = print_operad(&op);
        assert!(text.contains("comp u0 () = u0"));
        assert_eq!(parse_operad(&text).unwrap(), op);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let missing_paren = "operad x\narity 0:\narity 1: e\nidentity: e\ncomp e e = e\nend\n";
        match parse_operad(missing_paren) {
            Err(FormatError::Syntax { line: 5, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let unknown = "operad x\narity 0:\narity 1: e\nidentity: e\ncomp e (q) = e\nend\n";
        match parse_operad(unknown) {
            Err(FormatError::Syntax { line: 5, msg }) => assert!(msg.contains("unknown label")),
            other => panic!("unexpected {other:?}"),
        }
        let after_end = "operad x\narity 0:\narity 1: e\nidentity: e\ncomp e (e) = e\nend\njunk\n";
        match parse_operad(after_end) {
            Err(FormatError::Syntax { line: 7, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_errors_surface() {
        let missing = "operad x\narity 0:\narity 1: e a\nidentity: e\ncomp e (e) = e\nend\n";
        match parse_operad(missing) {
            Err(FormatError::Structure(StructureError::MissingEntry(_))) => {}
            other => panic!("unexpected {other:?}"),
        }
        let gap = "operad x\narity 0:\narity 2: m\nidentity: e\nend\n";
        assert!(matches!(parse_operad(gap), Err(FormatError::Syntax { .. })));
        let dup = "operad x\narity 0:\narity 1: e\narity 1: f\nidentity: e\nend\n";
        match parse_operad(dup) {
            Err(FormatError::Syntax { line: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reverse_round_trips_under_same_name() {
        let op = c2();
        let rev = op.reverse();
        let text = print_operad(&rev);
        let back = parse_operad(&text).unwrap();
        assert_eq!(back, rev);
        assert_eq!(back.name(), "c2");
    }
}
