use super::operator::{Operator, C64, ZERO};
use super::state::{inner, norm};
use crate::error::{PctcError, Result};

/// Completes a set of orthonormal columns to a unitary.
///
/// `fixed` pins column `j` to the given vector. Free column slots are filled in
/// ascending order by Gram-Schmidt over the canonical basis vectors `e_0,
/// e_1, ...`, skipping those already in the span.
pub fn complete_unitary(dim: usize, fixed: &[(usize, Vec<C64>)]) -> Result<Operator> {
    let mut columns: Vec<Option<Vec<C64>>> = vec![None; dim];
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for (j, v) in fixed {
        if *j >= dim || v.len() != dim {
            return Err(PctcError::Dimension(format!("fixed column {j} does not fit {dim}x{dim}")));
        }
        if columns[*j].is_some() {
            return Err(PctcError::InvalidValue(format!("column {j} fixed twice")));
        }
        if (norm(v) - 1.0).abs() > 1e-10 {
            return Err(PctcError::InvalidValue(format!("fixed column {j} is not unit norm")));
        }
        if let Some(q) = basis.iter().find(|q| inner(q, v).norm() > 1e-10) {
            let overlap = inner(q, v).norm();
            return Err(PctcError::InvalidValue(format!(
                "fixed columns are not orthogonal (overlap {overlap:.3e})"
            )));
        }
        columns[*j] = Some(v.clone());
        basis.push(v.clone());
    }

    let mut candidate = 0usize;
    for slot in columns.iter_mut().filter(|c| c.is_none()) {
        loop {
            if candidate >= dim {
                return Err(PctcError::InvalidValue("ran out of completion vectors".into()));
            }
            let mut v = vec![ZERO; dim];
            v[candidate] = C64::new(1.0, 0.0);
            candidate += 1;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for q in &basis {
                    let p = inner(q, &v);
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= p * y;
                    }
                }
            }
            let n = norm(&v);
            if n > 1e-8 {
                let v: Vec<C64> = v.iter().map(|z| z / n).collect();
                basis.push(v.clone());
                *slot = Some(v);
                break;
            }
        }
    }
    let columns: Vec<Vec<C64>> = columns.into_iter().map(|c| c.expect("filled")).collect();
    Operator::from_columns(&columns)
}
