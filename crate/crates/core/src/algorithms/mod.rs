//! Computations that use one CTC qubit to make wrong answers paradoxical.
//!
//! Every circuit here has the same shape: Hadamards on some registers, a
//! reversible classical computation, and a gate that flips the CTC qubit on
//! rejected branches. Two evaluators are provided. The dense path builds the
//! full unitary and runs it through the P-CTC engine. The structured path
//! enumerates the Hadamard branches, applies the classical map, and keeps the
//! branches that leave the CTC qubit alone; the survivors carry equal weight.

pub mod dimacs;
pub mod factor;
pub mod npconp;
pub mod oracle;
pub mod sat;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::engine::{induced_map, PctcCircuit, CTC, DEFAULT_PARADOX_TOL};
use crate::error::{PctcError, Result};
use crate::linalg::{Capacity, Operator, OutcomeDistribution, RegisterLayout, StateVector};

/// Largest circuit (CTC included) the dense path will build.
pub const DENSE_QUBIT_LIMIT: usize = 12;

/// Cap on the number of entries in a joint multi-round distribution.
pub const JOINT_ENTRY_LIMIT: usize = 1 << 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Path {
    Dense,
    #[default]
    Structured,
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Path::Dense => "dense",
            Path::Structured => "structured",
        })
    }
}

impl FromStr for Path {
    type Err = PctcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Path::Dense),
            "structured" => Ok(Path::Structured),
            other => Err(PctcError::InvalidValue(format!("unknown evaluation path {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    pub path: Path,
    pub capacity: Capacity,
    /// Largest circuit, in qubits, the dense path will build.
    pub dense_limit: usize,
    pub paradox_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            path: Path::default(),
            capacity: Capacity::default(),
            dense_limit: DENSE_QUBIT_LIMIT,
            paradox_tol: DEFAULT_PARADOX_TOL,
        }
    }
}

impl EvalOptions {
    pub fn with_path(mut self, path: Path) -> Self {
        self.path = path;
        self
    }

    /// Sets both the overall capacity and the dense limit to `qubits`.
    pub fn with_max_qubits(mut self, qubits: usize) -> Self {
        self.capacity = Capacity::new(qubits);
        self.dense_limit = qubits;
        self
    }

    pub fn with_paradox_tolerance(mut self, tol: f64) -> Self {
        self.paradox_tol = tol;
        self
    }

    fn check_dense(&self, layout: &RegisterLayout) -> Result<()> {
        let q = layout.total_qubits();
        self.capacity.check_qubits(q)?;
        if q > self.dense_limit {
            return Err(PctcError::Capacity { requested: q, limit: self.dense_limit });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Answer {
    Yes,
    No,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "YES",
            Answer::No => "NO",
        })
    }
}

fn check_one_ctc(layout: &RegisterLayout) -> Result<()> {
    match layout.width(CTC) {
        Ok(1) => Ok(()),
        Ok(w) => Err(PctcError::Layout(format!("expected one CTC qubit, found {w}"))),
        Err(e) => Err(e),
    }
}

/// A branch program over `layout` (no CTC register): the registers in
/// `superposed` start in `|+...+>`, the rest in `|0>`; `map` is the classical
/// reversible computation and `flips` says whether a final basis state
/// flips the CTC qubit.
pub(crate) struct BranchProgram<'a> {
    pub layout: &'a RegisterLayout,
    pub superposed: &'a [&'a str],
    pub map: &'a dyn Fn(usize) -> usize,
    pub flips: &'a dyn Fn(usize) -> bool,
}

impl BranchProgram<'_> {
    /// Output distribution over every register of the layout.
    pub fn run(&self, capacity: Capacity) -> Result<OutcomeDistribution> {
        let regs: Vec<(usize, usize)> = self
            .superposed
            .iter()
            .map(|n| Ok((self.layout.shift(n)?, self.layout.width(n)?)))
            .collect::<Result<_>>()?;
        let bits: usize = regs.iter().map(|r| r.1).sum();
        capacity.check_qubits(bits)?;

        let mut amplitude: BTreeMap<usize, u64> = BTreeMap::new();
        for t in 0..1usize << bits {
            let mut offset = 0;
            let mut start = 0usize;
            for &(shift, width) in regs.iter().rev() {
                start |= ((t >> offset) & ((1 << width) - 1)) << shift;
                offset += width;
            }
            let end = (self.map)(start);
            if !(self.flips)(end) {
                *amplitude.entry(end).or_insert(0) += 1;
            }
        }
        if amplitude.is_empty() {
            return Err(PctcError::Paradox("every branch flips the CTC qubit".into()));
        }
        // all branch amplitudes are equal and positive, so weights add coherently
        let total: f64 = amplitude.values().map(|&c| (c * c) as f64).sum();
        Ok(OutcomeDistribution::from_map(
            self.layout.total_qubits(),
            amplitude.into_iter().map(|(k, c)| (k, (c * c) as f64 / total)).collect(),
        ))
    }
}

/// Runs `u` (on `layout`, which contains one CTC qubit) on the all-zeros input
/// through the P-CTC engine and measures every other register.
pub(crate) fn run_dense(layout: &RegisterLayout, u: Operator, opts: &EvalOptions) -> Result<OutcomeDistribution> {
    check_one_ctc(layout)?;
    let circuit = PctcCircuit::new(layout.clone(), u)?;
    let map = induced_map(&circuit)?.with_paradox_tolerance(opts.paradox_tol);
    let sys = circuit.system_layout();
    let input = StateVector::basis(sys.clone(), 0)?;
    let out = map.apply_pure(&input)?;
    let names: Vec<&str> = sys.names().collect();
    out.measure(&names)
}

/// Permutation of the basis of `layout` given as a function on basis indices.
pub(crate) fn basis_permutation(layout: &RegisterLayout, f: impl Fn(usize) -> usize) -> Result<Operator> {
    Operator::permutation(layout.dim(), f)
}

/// `X` on the CTC qubit when `flips` holds for the other registers.
pub(crate) fn ctc_flip(layout: &RegisterLayout, flips: impl Fn(usize) -> bool) -> Result<Operator> {
    let shift = layout.shift(CTC)?;
    let mask = 1usize << shift;
    basis_permutation(layout, |idx| if flips(idx & !mask) { idx ^ mask } else { idx })
}

/// Product `ops[k-1] ... ops[0]`, multiplying the sparse gate on the left.
pub(crate) fn cascade(ops: Vec<Operator>) -> Result<Operator> {
    let mut iter = ops.into_iter();
    let mut acc = iter.next().ok_or_else(|| PctcError::InvalidValue("empty cascade".into()))?;
    for op in iter {
        acc = op.matmul(&acc)?;
    }
    Ok(acc)
}

/// Largest relative spread among the nonzero probabilities.
pub fn survivor_spread(d: &OutcomeDistribution) -> f64 {
    let probs: Vec<f64> = d.iter().map(|(_, p)| p).collect();
    let max = probs.iter().copied().fold(0.0, f64::max);
    let min = probs.iter().copied().fold(f64::INFINITY, f64::min);
    if probs.is_empty() {
        0.0
    } else {
        max - min
    }
}

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q < 4 {
        return true;
    }
    if q % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= q {
        if q % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}
