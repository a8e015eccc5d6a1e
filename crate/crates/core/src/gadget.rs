//! Postselecting a generalized measurement with certainty using a single
//! CTC qubit.
//!
//! The measurement is dilated to a unitary `U1` on system ⊗ ancilla; a
//! second unitary `U2` flips the CTC qubit whenever the ancilla records a
//! rejected outcome. Tracing out the CTC then removes every rejected branch.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::engine::{induced_map, PctcCircuit, CTC};
use crate::error::{PctcError, Result};
use crate::linalg::{complete_unitary, gates, qubits_for, Operator, OutcomeDistribution};
use crate::linalg::{RegisterLayout, StateVector, C64, ZERO};

/// Name of the register recording the measurement outcome.
pub const ANCILLA: &str = "ANC";

/// Bound on `max |(sum_k M_k† M_k - I)_ij|`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Measurement operators `M_0 .. M_{n-1}` on a system register layout.
#[derive(Clone, Debug)]
pub struct GeneralizedMeasurement {
    layout: RegisterLayout,
    operators: Vec<Operator>,
}

impl GeneralizedMeasurement {
    pub fn new(layout: RegisterLayout, operators: Vec<Operator>) -> Result<Self> {
        if operators.is_empty() {
            return Err(PctcError::Measurement("no measurement operators".into()));
        }
        let d = layout.dim();
        if let Some(k) = operators.iter().position(|m| m.dims() != (d, d)) {
            return Err(PctcError::Measurement(format!(
                "operator {k} is {:?}, expected {d}x{d}",
                operators[k].dims()
            )));
        }
        let mut sum = Operator::zeros(d, d);
        for m in &operators {
            sum = &sum + &m.dagger().matmul(m)?;
        }
        let err = sum.max_abs_diff(&Operator::identity(d));
        if err > COMPLETENESS_TOL {
            return Err(PctcError::Measurement(format!(
                "operators are not complete (max |sum M†M - I| = {err:.3e})"
            )));
        }
        Ok(Self { layout, operators })
    }

    /// Projective measurement in the computational basis of `layout`.
    pub fn computational(layout: RegisterLayout) -> Result<Self> {
        let d = layout.dim();
        let ops = (0..d)
            .map(|k| Operator::outer(&gates::basis(d, k), &gates::basis(d, k)))
            .collect();
        Self::new(layout, ops)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn n_outcomes(&self) -> usize {
        self.operators.len()
    }

    /// Width of the ancilla register that records the outcome.
    pub fn ancilla_width(&self) -> usize {
        qubits_for(self.n_outcomes())
    }
}

/// Outcomes that survive postselection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptSet {
    indices: BTreeSet<usize>,
}

impl AcceptSet {
    pub fn new(indices: impl IntoIterator<Item = usize>, n_outcomes: usize) -> Result<Self> {
        let indices: BTreeSet<usize> = indices.into_iter().collect();
        if indices.is_empty() {
            return Err(PctcError::Measurement("accept set is empty".into()));
        }
        if let Some(&k) = indices.iter().find(|&&k| k >= n_outcomes) {
            return Err(PctcError::Measurement(format!(
                "accepted outcome {k} out of range for {n_outcomes} outcomes"
            )));
        }
        Ok(Self { indices })
    }

    pub fn all_except(rejected: usize, n_outcomes: usize) -> Result<Self> {
        Self::new((0..n_outcomes).filter(|&k| k != rejected), n_outcomes)
    }

    pub fn contains(&self, k: usize) -> bool {
        self.indices.contains(&k)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    fn check_range(&self, n_outcomes: usize) -> Result<()> {
        match self.indices.iter().next_back() {
            Some(&k) if k >= n_outcomes => Err(PctcError::Measurement(format!(
                "accepted outcome {k} out of range for {n_outcomes} outcomes"
            ))),
            _ => Ok(()),
        }
    }
}

/// Unitary `U1` on system ⊗ ancilla with `U1 (|psi> ⊗ |0>) = sum_k M_k|psi> ⊗ |k>`.
///
/// Outcomes beyond `n` (ancilla padding) carry zero operators. Columns outside
/// the `|.> ⊗ |0>` subspace come from Gram-Schmidt completion.
pub fn dilate(meas: &GeneralizedMeasurement) -> Result<(Operator, RegisterLayout)> {
    let layout = meas.layout.concat(&RegisterLayout::single(ANCILLA, meas.ancilla_width())?)?;
    let d = meas.layout.dim();
    let a = 1usize << meas.ancilla_width();
    let fixed: Vec<(usize, Vec<C64>)> = (0..d)
        .map(|s| {
            let mut col = vec![ZERO; d * a];
            for (k, m) in meas.operators.iter().enumerate() {
                for t in 0..d {
                    col[t * a + k] = m.get(t, s);
                }
            }
            (s * a, col)
        })
        .collect();
    Ok((complete_unitary(d * a, &fixed)?, layout))
}

/// Unitary `U2` on ancilla ⊗ CTC: identity on the CTC qubit for accepted
/// ancilla values and X for every other value (including padding). The
/// system factor of the full gadget is the identity and is added by
/// [`gadget_circuit`].
pub fn couple(accept: &AcceptSet, n_outcomes: usize) -> Result<Operator> {
    accept.check_range(n_outcomes)?;
    let a = 1usize << qubits_for(n_outcomes);
    Operator::permutation(2 * a, |idx| {
        let k = idx >> 1;
        if accept.contains(k) {
            idx
        } else {
            idx ^ 1
        }
    })
}

/// `U2 (U1 ⊗ I)` on system ⊗ ancilla ⊗ CTC, with a one-qubit CTC.
pub fn gadget_circuit(meas: &GeneralizedMeasurement, accept: &AcceptSet) -> Result<PctcCircuit> {
    accept.check_range(meas.n_outcomes())?;
    let (u1, sa_layout) = dilate(meas)?;
    let ctc = RegisterLayout::single(CTC, 1)?;
    let layout = sa_layout.concat(&ctc)?;
    let u1 = u1.embed(&sa_layout, &layout)?;
    let anc_ctc = RegisterLayout::new([(ANCILLA, meas.ancilla_width()), (CTC, 1)])?;
    let u2 = couple(accept, meas.n_outcomes())?.embed(&anc_ctc, &layout)?;
    PctcCircuit::new(layout, u2.matmul(&u1)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct AcceptedOutcome {
    pub index: usize,
    pub probability: f64,
    /// Post-measurement system state `M_k psi / ||M_k psi||`.
    pub state: StateVector,
}

#[derive(Clone, Debug, Serialize)]
pub struct Postselection {
    pub ancilla_width: usize,
    pub outcomes: Vec<AcceptedOutcome>,
}

impl Postselection {
    pub fn distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution::from_map(
            self.ancilla_width,
            self.outcomes.iter().map(|o| (o.index, o.probability)).collect(),
        )
    }

    pub fn outcome(&self, k: usize) -> Option<&AcceptedOutcome> {
        self.outcomes.iter().find(|o| o.index == k)
    }
}

/// Runs the gadget on `psi` through the P-CTC engine.
pub fn postselect(
    meas: &GeneralizedMeasurement,
    accept: &AcceptSet,
    psi: &StateVector,
) -> Result<Postselection> {
    if psi.layout() != meas.layout() {
        return Err(PctcError::Layout("state layout does not match the measurement".into()));
    }
    let circuit = gadget_circuit(meas, accept)?;
    let map = induced_map(&circuit)?;
    let anc = StateVector::basis(RegisterLayout::single(ANCILLA, meas.ancilla_width())?, 0)?;
    let out = map.apply_pure(&psi.tensor(&anc)?)?;

    let mut outcomes = Vec::new();
    for k in accept.indices() {
        let (p, state) = out.condition_on(ANCILLA, k)?;
        if let Some(state) = state {
            if p > crate::linalg::state::SUPPORT_TOL {
                outcomes.push(AcceptedOutcome { index: k, probability: p, state });
            }
        }
    }
    Ok(Postselection { ancilla_width: meas.ancilla_width(), outcomes })
}

/// Trine POVM on a qubit: `M_k = sqrt(2/3) |t_k><t_k|` with `t_k` at angle `2 pi k / 3`.
pub fn trine() -> GeneralizedMeasurement {
    let ops = (0..3)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let t = vec![C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)];
            Operator::outer(&t, &t).scale(C64::new((2.0f64 / 3.0).sqrt(), 0.0))
        })
        .collect();
    GeneralizedMeasurement::new(RegisterLayout::single("SYS", 1).expect("static"), ops)
        .expect("trine is complete")
}
