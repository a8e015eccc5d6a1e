//! Three readings of a labeled ensemble `{(p(x), |phi_x>)}` under a P-CTC map.
//!
//! * proper mixture: the map acts on each member separately;
//! * true density matrix: the map acts on `sum_x p(x) |x><x| ⊗ |phi_x><phi_x|`;
//! * purification: the map acts on `sum_x sqrt(p(x)) |x>|x>|phi_x>`.
//!
//! The last two agree after tracing out the purifying copy, while the first
//! can give a different label distribution.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::engine::InducedMap;
use crate::error::{PctcError, Result};
use crate::linalg::{qubits_for, DensityMatrix, Operator, OutcomeDistribution};
use crate::linalg::{RegisterLayout, StateVector, C64, ZERO};

/// Register carrying the classical label.
pub const LABEL: &str = "X";
/// Register carrying the purifying copy of the label.
pub const LABEL_COPY: &str = "X'";

pub const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleEntry {
    pub p: f64,
    pub state: StateVector,
    pub label: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
pub struct LabeledEnsemble {
    entries: Vec<EnsembleEntry>,
}

impl LabeledEnsemble {
    pub fn new(entries: Vec<EnsembleEntry>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| PctcError::InvalidValue("empty ensemble".into()))?;
        let layout = first.state.layout().clone();
        if entries.iter().any(|e| e.state.layout() != &layout) {
            return Err(PctcError::Layout("ensemble states must share one layout".into()));
        }
        if layout.contains(LABEL) || layout.contains(LABEL_COPY) {
            return Err(PctcError::Layout(format!(
                "state registers may not be named {LABEL:?} or {LABEL_COPY:?}"
            )));
        }
        if let Some(e) = entries.iter().find(|e| !(e.p > 0.0) || !e.p.is_finite()) {
            return Err(PctcError::InvalidValue(format!(
                "label {} has non-positive probability {}",
                e.label, e.p
            )));
        }
        let total: f64 = entries.iter().map(|e| e.p).sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(PctcError::InvalidValue(format!("probabilities sum to {total}")));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(e) = entries.iter().find(|e| !seen.insert(e.label)) {
            return Err(PctcError::InvalidValue(format!("duplicate label {}", e.label)));
        }
        Ok(Self { entries })
    }

    /// Labels `0..n` in order.
    pub fn from_pairs(pairs: Vec<(f64, StateVector)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .enumerate()
                .map(|(label, (p, state))| EnsembleEntry { p, state, label })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[EnsembleEntry] {
        &self.entries
    }

    pub fn state_layout(&self) -> &RegisterLayout {
        self.entries[0].state.layout()
    }

    /// Width of the label register.
    pub fn label_width(&self) -> usize {
        qubits_for(self.entries.iter().map(|e| e.label).max().unwrap_or(0) + 1)
    }

    pub fn label_distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution::from_map(
            self.label_width(),
            self.entries.iter().map(|e| (e.label, e.p)).collect(),
        )
    }

    fn label_layout(&self, name: &str) -> Result<RegisterLayout> {
        RegisterLayout::single(name, self.label_width())
    }

    /// `sum_x p(x) |x><x| ⊗ |phi_x><phi_x|` on `X ⊗ A`.
    pub fn mixture(&self) -> Result<DensityMatrix> {
        let layout = self.label_layout(LABEL)?.concat(self.state_layout())?;
        let l = 1usize << self.label_width();
        let mut op = Operator::zeros(layout.dim(), layout.dim());
        for e in &self.entries {
            let label = Operator::outer(&basis(l, e.label), &basis(l, e.label));
            let proj = e.state.projector();
            op = &op + &label.tensor(proj.operator())?.scale(C64::new(e.p, 0.0));
        }
        DensityMatrix::new(layout, op)
    }

    /// `sum_x sqrt(p(x)) |x>_X |x>_X' |phi_x>_A`.
    pub fn purification(&self) -> Result<StateVector> {
        let layout = self
            .label_layout(LABEL)?
            .concat(&self.label_layout(LABEL_COPY)?)?
            .concat(self.state_layout())?;
        let l = 1usize << self.label_width();
        let mut amps = vec![ZERO; layout.dim()];
        for e in &self.entries {
            let tag = crate::linalg::gates::kron(&basis(l, e.label), &basis(l, e.label));
            let term = crate::linalg::gates::kron(&tag, e.state.amplitudes());
            for (a, t) in amps.iter_mut().zip(term) {
                *a += t * e.p.sqrt();
            }
        }
        StateVector::new(layout, amps)
    }
}

fn basis(dim: usize, k: usize) -> Vec<C64> {
    crate::linalg::gates::basis(dim, k)
}

/// The map `I ⊗ C` on a layout containing the map's registers.
fn lift(map: &InducedMap, layout: &RegisterLayout) -> Result<InducedMap> {
    let c = map.operator().embed(map.layout(), layout)?;
    Ok(InducedMap::from_operator(layout.clone(), c)?.with_paradox_tolerance(map.paradox_tolerance()))
}

/// Each member is mapped and renormalized; probabilities are unchanged.
pub fn apply_proper(map: &InducedMap, e: &LabeledEnsemble) -> Result<LabeledEnsemble> {
    let entries = e
        .entries
        .iter()
        .map(|entry| {
            let state = map.apply_pure(&entry.state).map_err(|err| match err {
                PctcError::Paradox(msg) => {
                    PctcError::Paradox(format!("label {}: {msg}", entry.label))
                }
                other => other,
            })?;
            Ok(EnsembleEntry { p: entry.p, state, label: entry.label })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledEnsemble { entries })
}

/// `(I ⊗ C) m (I ⊗ C)†`, renormalized.
pub fn apply_true_density(map: &InducedMap, m: &DensityMatrix) -> Result<DensityMatrix> {
    lift(map, m.layout())?.apply_mixed(m)
}

/// `(I ⊗ I ⊗ C)` on the purified ensemble, renormalized.
pub fn apply_purified(map: &InducedMap, pe: &StateVector) -> Result<StateVector> {
    lift(map, pe.layout())?.apply_pure(pe)
}

/// Outcome of running one ensemble through all three readings.
#[derive(Clone, Debug, Serialize)]
pub struct SemanticsReport {
    /// Label distribution after the proper-mixture reading.
    pub p: OutcomeDistribution,
    /// Label distribution after the true-density reading.
    pub q: OutcomeDistribution,
    pub total_variation: f64,
    /// Trace distance between the traced purification and the true-density output.
    pub purification_gap: f64,
    pub proper: LabeledEnsemble,
    pub density: DensityMatrix,
    pub purified: StateVector,
}

pub const PURIFICATION_TOL: f64 = 1e-12;

impl SemanticsReport {
    pub fn purification_consistent(&self) -> bool {
        self.purification_gap <= PURIFICATION_TOL
    }
}

pub fn compare_semantics(map: &InducedMap, e: &LabeledEnsemble) -> Result<SemanticsReport> {
    let proper = apply_proper(map, e)?;
    let density = apply_true_density(map, &e.mixture()?)?;
    let purified = apply_purified(map, &e.purification()?)?;
    let traced = purified.projector().partial_trace(LABEL_COPY)?;
    let gap = max_abs_gap(&traced, &density);
    let p = proper.label_distribution();
    let q = density.measure(&[LABEL])?;
    Ok(SemanticsReport {
        total_variation: p.total_variation(&q),
        p,
        q,
        purification_gap: gap,
        proper,
        density,
        purified,
    })
}

/// Trace distance, falling back to the entrywise gap when the eigensolver
/// declines the difference.
fn max_abs_gap(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    a.trace_distance(b).unwrap_or_else(|_| a.operator().max_abs_diff(b.operator()))
}

/// `q(x) ∝ p(x) |<phi~_x|phi_x>|^2`
pub fn predicted_q(e: &LabeledEnsemble, overlaps: &[f64]) -> Result<OutcomeDistribution> {
    if overlaps.len() != e.entries.len() {
        return Err(PctcError::Dimension("one overlap per ensemble member expected".into()));
    }
    let weights: BTreeMap<usize, f64> =
        e.entries.iter().zip(overlaps).map(|(x, o)| (x.label, x.p * o * o)).collect();
    let total: f64 = weights.values().sum();
    if total <= 0.0 {
        return Err(PctcError::Paradox("every member is annihilated".into()));
    }
    Ok(OutcomeDistribution::from_map(
        e.label_width(),
        weights.into_iter().map(|(k, w)| (k, w / total)).collect(),
    ))
}
