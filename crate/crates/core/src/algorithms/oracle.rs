//! Verifier circuits as permutation unitaries.

use crate::error::Result;
use crate::linalg::{Capacity, Operator};

/// `|w>|b> -> |w>|b XOR not pred(w)>` on `W ⊗ V`: the valid bit is set for
/// rejected witnesses.
pub fn build_oracle_unitary(
    pred: &dyn Fn(usize) -> bool,
    n_bits: usize,
    capacity: Capacity,
) -> Result<Operator> {
    capacity.check_qubits(n_bits + 1)?;
    Operator::permutation(1 << (n_bits + 1), |idx| if pred(idx >> 1) { idx } else { idx ^ 1 })
}

/// `|0><0| ⊗ u + |1><1| ⊗ I`: `u` applied when the control qubit is 0.
pub fn anti_controlled(u: &Operator) -> Operator {
    let n = u.rows();
    Operator::from_fn(2 * n, 2 * n, |i, j| match (i / n, j / n) {
        (0, 0) => u.get(i, j),
        (1, 1) if i == j => crate::linalg::ONE,
        _ => crate::linalg::ZERO,
    })
}
