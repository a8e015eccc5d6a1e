//! DIMACS CNF reader.

use crate::algorithms::sat::CnfFormula;
use crate::error::{PctcError, Result};

fn syntax(line: usize, message: impl Into<String>) -> PctcError {
    PctcError::Syntax { line, message: message.into() }
}

/// Parses `c` comments, one `p cnf N M` header, and zero-terminated clauses.
/// A line starting with `%` ends the input.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(syntax(line_no, "duplicate header"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(syntax(line_no, "expected `p cnf <variables> <clauses>`"));
            }
            let n = fields[2].parse().map_err(|_| syntax(line_no, "bad variable count"))?;
            let m = fields[3].parse().map_err(|_| syntax(line_no, "bad clause count"))?;
            header = Some((n, m));
            continue;
        }
        let (n, _) = header.ok_or_else(|| syntax(line_no, "clause before header"))?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| syntax(line_no, format!("bad literal {tok:?}")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > n {
                return Err(syntax(line_no, format!("variable {} out of range 1..={n}", lit.abs())));
            } else {
                current.push(lit);
            }
        }
    }
    let (n, m) = header.ok_or_else(|| syntax(last_line, "missing `p cnf` header"))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != m {
        return Err(PctcError::HeaderMismatch(format!(
            "header declares {m} clauses, found {}",
            clauses.len()
        )));
    }
    CnfFormula::new(n, clauses)
}
