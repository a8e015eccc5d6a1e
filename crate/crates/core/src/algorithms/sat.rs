//! SAT with one CTC qubit, repeated over `k` rounds.
//!
//! Each round has `FLAG ⊗ VALID ⊗ WITNESS(N)`. FLAG = 1 claims the witness
//! satisfies the formula; FLAG = 0 claims unsatisfiability and requires an
//! all-zeros witness. VALID records a failed claim, and the CTC qubit flips if
//! any round's VALID is set. With `m` models, each round ends in one of the
//! `m + 1` surviving outcomes with equal probability.

use serde::Serialize;

use super::oracle::build_oracle_unitary;
use super::{cascade, ctc_flip, run_dense, Answer, BranchProgram, EvalOptions, Path, JOINT_ENTRY_LIMIT};
use crate::engine::CTC;
use crate::error::{PctcError, Result};
use crate::linalg::{gates, Operator, OutcomeDistribution, RegisterLayout};

pub const FLAG: &str = "FLAG";
pub const VALID: &str = "VALID";
pub const WITNESS: &str = "WITNESS";

/// CNF formula over variables `1..=N`; literal `-i` is the negation of `x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    n_vars: usize,
    clauses: Vec<Vec<i64>>,
}

impl CnfFormula {
    pub fn new(n_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self> {
        if n_vars == 0 {
            return Err(PctcError::InvalidValue("formula needs at least one variable".into()));
        }
        for clause in &clauses {
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > n_vars {
                    return Err(PctcError::InvalidValue(format!("literal {lit} out of range")));
                }
            }
        }
        Ok(Self { n_vars, clauses })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    /// Value of `x_i` in assignment `w`; `x_1` is the most significant bit.
    pub fn var(&self, w: usize, i: usize) -> bool {
        (w >> (self.n_vars - i)) & 1 == 1
    }

    pub fn eval(&self, w: usize) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&lit| self.var(w, lit.unsigned_abs() as usize) == (lit > 0))
        })
    }

    pub fn models(&self) -> Vec<usize> {
        (0..1usize << self.n_vars).filter(|&w| self.eval(w)).collect()
    }

    pub fn count_models(&self) -> usize {
        self.models().len()
    }
}

fn names(round: usize, rounds: usize) -> [String; 3] {
    if rounds == 1 {
        [FLAG.into(), VALID.into(), WITNESS.into()]
    } else {
        [format!("{FLAG}_{round}"), format!("{VALID}_{round}"), format!("{WITNESS}_{round}")]
    }
}

/// All rounds in order, followed by the CTC qubit.
pub fn layout(f: &CnfFormula, rounds: usize) -> Result<RegisterLayout> {
    let mut regs = Vec::new();
    for r in 1..=rounds {
        let [fl, v, w] = names(r, rounds);
        regs.extend([(fl, 1), (v, 1), (w, f.n_vars)]);
    }
    regs.push((CTC.to_owned(), 1));
    RegisterLayout::new(regs)
}

#[derive(Clone, Debug, Serialize)]
pub struct SatResult {
    pub n_vars: usize,
    pub rounds: usize,
    pub path: Path,
    /// One round's distribution over `FLAG VALID WITNESS`.
    pub round: OutcomeDistribution,
    /// Probability that every round reports NO.
    pub p_no: f64,
    /// Distribution of the reported result over `FLAG WITNESS`: the first
    /// round with FLAG = 1, or all zeros when there is none.
    pub decoded: OutcomeDistribution,
}

impl SatResult {
    pub fn answer_of(&self, outcome: usize) -> (Answer, Option<usize>) {
        if outcome >> self.n_vars == 1 {
            (Answer::Yes, Some(outcome & ((1 << self.n_vars) - 1)))
        } else {
            (Answer::No, None)
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> (Answer, Option<usize>) {
        self.answer_of(self.decoded.sample(rng).unwrap_or(0))
    }
}

fn check_rounds(rounds: usize) -> Result<()> {
    if rounds == 0 {
        return Err(PctcError::InvalidValue("at least one round is required".into()));
    }
    Ok(())
}

fn structured_round(f: &CnfFormula, opts: &EvalOptions) -> Result<OutcomeDistribution> {
    let n = f.n_vars;
    let layout = RegisterLayout::new([(FLAG, 1), (VALID, 1), (WITNESS, n)])?;
    let mask = (1usize << n) - 1;
    let map = |b: usize| {
        let (flag, w) = (b >> (n + 1), b & mask);
        let mut v = (b >> n) & 1;
        if flag == 1 && !f.eval(w) {
            v ^= 1;
        }
        if flag == 0 && w != 0 {
            v ^= 1;
        }
        (flag << (n + 1)) | (v << n) | w
    };
    let flips = |b: usize| (b >> n) & 1 == 1;
    BranchProgram { layout: &layout, superposed: &[FLAG, WITNESS], map: &map, flips: &flips }.run(opts.capacity)
}

fn product(round: &OutcomeDistribution, rounds: usize) -> Result<OutcomeDistribution> {
    let entries = (round.support().len() as f64).powi(rounds as i32);
    if entries > JOINT_ENTRY_LIMIT as f64 {
        return Err(PctcError::Capacity { requested: entries.log2().ceil() as usize, limit: JOINT_ENTRY_LIMIT.trailing_zeros() as usize });
    }
    let w = round.width();
    let mut joint: Vec<(usize, f64)> = vec![(0, 1.0)];
    for _ in 0..rounds {
        joint = joint
            .iter()
            .flat_map(|&(k, p)| round.iter().map(move |(o, q)| ((k << w) | o, p * q)))
            .collect();
    }
    Ok(OutcomeDistribution::from_map(w * rounds, joint.into_iter().collect()))
}

/// The step-3 operator on `FLAG ⊗ WITNESS ⊗ VALID`:
/// `I ⊗ P0 ⊗ I + |1><1| ⊗ (I - P0) ⊗ I + |0><0| ⊗ (I - P0) ⊗ X`.
fn no_branch_unitary(n: usize) -> Result<Operator> {
    let dw = 1usize << n;
    let p0 = Operator::outer(&gates::basis(dw, 0), &gates::basis(dw, 0));
    let rest = &Operator::identity(dw) - &p0;
    let f0 = Operator::outer(&gates::ket0(), &gates::ket0());
    let f1 = Operator::outer(&gates::ket1(), &gates::ket1());
    let i2 = Operator::identity(2);
    let a = i2.tensor(&p0)?.tensor(&i2)?;
    let b = f1.tensor(&rest)?.tensor(&i2)?;
    let c = f0.tensor(&rest)?.tensor(&gates::x())?;
    Ok(&(&a + &b) + &c)
}

/// Full unitary on [`layout`]: every round's steps 1-3, then the coupling of
/// all VALID qubits to the CTC qubit.
pub fn dense_unitary(f: &CnfFormula, rounds: usize, opts: &EvalOptions) -> Result<Operator> {
    check_rounds(rounds)?;
    let n = f.n_vars;
    let full = layout(f, rounds)?;
    let oracle = build_oracle_unitary(&|w| f.eval(w), n, opts.capacity)?;
    let step2 = gates::controlled(&oracle);
    let step3 = no_branch_unitary(n)?;
    let mut ops = Vec::new();
    let mut valid_shifts = Vec::new();
    for r in 1..=rounds {
        let [fl, v, w] = names(r, rounds);
        ops.push(gates::h().embed(&RegisterLayout::single(&fl, 1)?, &full)?);
        ops.push(gates::h_n(n).embed(&RegisterLayout::single(&w, n)?, &full)?);
        let fwv = RegisterLayout::new([(fl.as_str(), 1), (w.as_str(), n), (v.as_str(), 1)])?;
        ops.push(step2.embed(&fwv, &full)?);
        ops.push(step3.embed(&fwv, &full)?);
        valid_shifts.push(full.shift(&v)?);
    }
    ops.push(ctc_flip(&full, |idx| valid_shifts.iter().any(|&s| (idx >> s) & 1 == 1))?);
    cascade(ops)
}

/// Joint distribution over every round's `FLAG VALID WITNESS`, rounds in order.
pub fn joint_distribution(f: &CnfFormula, rounds: usize, opts: &EvalOptions) -> Result<OutcomeDistribution> {
    check_rounds(rounds)?;
    match opts.path {
        Path::Structured => product(&structured_round(f, opts)?, rounds),
        Path::Dense => {
            let full = layout(f, rounds)?;
            opts.check_dense(&full)?;
            run_dense(&full, dense_unitary(f, rounds, opts)?, opts)
        }
    }
}

pub fn sat_solve(f: &CnfFormula, rounds: usize, opts: &EvalOptions) -> Result<SatResult> {
    check_rounds(rounds)?;
    let n = f.n_vars;
    let w = n + 2;
    let round = match opts.path {
        Path::Structured => structured_round(f, opts)?,
        Path::Dense => joint_distribution(f, rounds, opts)?.marginal(w, |k| k >> ((rounds - 1) * w)),
    };
    let no_round: f64 = round.iter().filter(|&(k, _)| k >> (n + 1) == 0).map(|(_, p)| p).sum();
    let p_no = no_round.powi(rounds as i32);
    let geometric: f64 = (0..rounds).map(|r| no_round.powi(r as i32)).sum();
    let mut decoded = std::collections::BTreeMap::new();
    for (k, p) in round.iter() {
        if k >> (n + 1) == 1 {
            decoded.insert((1 << n) | (k & ((1 << n) - 1)), p * geometric);
        }
    }
    if p_no > 0.0 {
        decoded.insert(0, p_no);
    }
    Ok(SatResult {
        n_vars: n,
        rounds,
        path: opts.path,
        round,
        p_no,
        decoded: OutcomeDistribution::from_map(n + 1, decoded),
    })
}
