//! Deciding a problem that has short witnesses for both answers.
//!
//! Layout `FLAG ⊗ VALID ⊗ WITNESS(N) ⊗ CTC`. FLAG and WITNESS are put in
//! superposition; FLAG = 1 runs the YES verifier, FLAG = 0 the NO verifier,
//! each writing 1 into VALID on rejection; a CNOT from VALID to the CTC
//! qubit makes rejected branches paradoxical.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::oracle::{anti_controlled, build_oracle_unitary};
use super::{cascade, ctc_flip, run_dense, Answer, BranchProgram, EvalOptions, Path};
use crate::engine::CTC;
use crate::error::{PctcError, Result};
use crate::linalg::{gates, OutcomeDistribution, RegisterLayout};

pub const FLAG: &str = "FLAG";
pub const VALID: &str = "VALID";
pub const WITNESS: &str = "WITNESS";

/// Truth tables of the two verifiers over `N`-bit witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessProblem {
    n_bits: usize,
    yes: Vec<bool>,
    no: Vec<bool>,
}

impl WitnessProblem {
    pub fn from_predicates(
        n_bits: usize,
        yes: impl Fn(usize) -> bool,
        no: impl Fn(usize) -> bool,
    ) -> Result<Self> {
        if n_bits == 0 {
            return Err(PctcError::InvalidValue("witness width must be positive".into()));
        }
        crate::linalg::Capacity::default().check_qubits(n_bits)?;
        let n = 1usize << n_bits;
        Ok(Self { n_bits, yes: (0..n).map(&yes).collect(), no: (0..n).map(&no).collect() })
    }

    pub fn from_sets(n_bits: usize, yes: &BTreeSet<usize>, no: &BTreeSet<usize>) -> Result<Self> {
        if let Some(&w) = yes.iter().chain(no).find(|&&w| n_bits < usize::BITS as usize && w >> n_bits != 0) {
            return Err(PctcError::InvalidValue(format!("witness {w} does not fit in {n_bits} bits")));
        }
        Self::from_predicates(n_bits, |w| yes.contains(&w), |w| no.contains(&w))
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn yes_accepts(&self, w: usize) -> bool {
        self.yes[w]
    }

    pub fn no_accepts(&self, w: usize) -> bool {
        self.no[w]
    }

    pub fn layout(&self) -> Result<RegisterLayout> {
        RegisterLayout::new([(FLAG, 1), (VALID, 1), (WITNESS, self.n_bits), (CTC, 1)])
    }
}

/// A witness given either as an integer or as a bit string (MSB first).
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum WitnessJson {
    Index(usize),
    Bits(String),
}

impl WitnessJson {
    fn value(&self) -> Result<usize> {
        match self {
            WitnessJson::Index(k) => Ok(*k),
            WitnessJson::Bits(s) => usize::from_str_radix(s, 2)
                .map_err(|_| PctcError::InvalidValue(format!("witness {s:?} is not a bit string"))),
        }
    }
}

/// `{"n_bits": N, "yes_witnesses": [...], "no_witnesses": [...]}`
#[derive(Clone, Debug, Deserialize)]
pub struct WitnessProblemJson {
    pub n_bits: usize,
    #[serde(default)]
    pub yes_witnesses: Vec<WitnessJson>,
    #[serde(default)]
    pub no_witnesses: Vec<WitnessJson>,
}

impl WitnessProblemJson {
    pub fn into_problem(self) -> Result<WitnessProblem> {
        let set = |v: &[WitnessJson]| v.iter().map(WitnessJson::value).collect::<Result<BTreeSet<_>>>();
        WitnessProblem::from_sets(self.n_bits, &set(&self.yes_witnesses)?, &set(&self.no_witnesses)?)
    }
}

pub fn problem_from_json(text: &str) -> Result<WitnessProblem> {
    serde_json::from_str::<WitnessProblemJson>(text)
        .map_err(|e| PctcError::InvalidValue(format!("witness problem: {e}")))?
        .into_problem()
}

#[derive(Clone, Debug, Serialize)]
pub struct NpConpResult {
    pub n_bits: usize,
    pub path: Path,
    /// `None` when both verifiers accept some witness.
    pub answer: Option<Answer>,
    pub promise_violation: bool,
    /// Distribution over `FLAG VALID WITNESS`.
    pub distribution: OutcomeDistribution,
}

impl NpConpResult {
    /// Splits an outcome into (FLAG, VALID, WITNESS).
    pub fn decode(&self, outcome: usize) -> (usize, usize, usize) {
        let n = self.n_bits;
        (outcome >> (n + 1), (outcome >> n) & 1, outcome & ((1 << n) - 1))
    }

    /// Surviving witnesses with their FLAG value.
    pub fn witnesses(&self) -> Vec<(Answer, usize)> {
        self.distribution
            .support()
            .into_iter()
            .map(|k| {
                let (f, _, w) = self.decode(k);
                (if f == 1 { Answer::Yes } else { Answer::No }, w)
            })
            .collect()
    }
}

fn structured(prob: &WitnessProblem, opts: &EvalOptions) -> Result<OutcomeDistribution> {
    let n = prob.n_bits;
    let layout = RegisterLayout::new([(FLAG, 1), (VALID, 1), (WITNESS, n)])?;
    let mask = (1usize << n) - 1;
    let map = |b: usize| {
        let (f, w) = (b >> (n + 1), b & mask);
        let ok = if f == 1 { prob.yes[w] } else { prob.no[w] };
        if ok {
            b
        } else {
            b ^ (1 << n)
        }
    };
    let flips = |b: usize| (b >> n) & 1 == 1;
    BranchProgram { layout: &layout, superposed: &[FLAG, WITNESS], map: &map, flips: &flips }.run(opts.capacity)
}

fn dense(prob: &WitnessProblem, opts: &EvalOptions) -> Result<OutcomeDistribution> {
    let n = prob.n_bits;
    let layout = prob.layout()?;
    opts.check_dense(&layout)?;
    let h_flag = gates::h().embed(&RegisterLayout::single(FLAG, 1)?, &layout)?;
    let h_wit = gates::h_n(n).embed(&RegisterLayout::single(WITNESS, n)?, &layout)?;
    let fwv = RegisterLayout::new([(FLAG, 1), (WITNESS, n), (VALID, 1)])?;
    let yes = build_oracle_unitary(&|w| prob.yes[w], n, opts.capacity)?;
    let no = build_oracle_unitary(&|w| prob.no[w], n, opts.capacity)?;
    let step2 = gates::controlled(&yes).embed(&fwv, &layout)?;
    let step3 = anti_controlled(&no).embed(&fwv, &layout)?;
    let v_shift = layout.shift(VALID)?;
    let step4 = ctc_flip(&layout, |idx| (idx >> v_shift) & 1 == 1)?;
    run_dense(&layout, cascade(vec![h_flag, h_wit, step2, step3, step4])?, opts)
}

pub fn np_conp_solve(prob: &WitnessProblem, opts: &EvalOptions) -> Result<NpConpResult> {
    let distribution = match opts.path {
        Path::Structured => structured(prob, opts),
        Path::Dense => dense(prob, opts),
    }
    .map_err(|e| match e {
        PctcError::Paradox(_) => PctcError::Paradox("neither verifier accepts any witness".into()),
        other => other,
    })?;
    let n = prob.n_bits;
    let flags: BTreeSet<usize> = distribution.support().into_iter().map(|k| k >> (n + 1)).collect();
    let promise_violation = flags.len() > 1;
    let answer = match (promise_violation, flags.iter().next()) {
        (false, Some(1)) => Some(Answer::Yes),
        (false, Some(_)) => Some(Answer::No),
        _ => None,
    };
    Ok(NpConpResult { n_bits: n, path: opts.path, answer, promise_violation, distribution })
}
