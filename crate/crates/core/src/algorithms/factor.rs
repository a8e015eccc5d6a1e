//! Factoring by postselecting on a zero remainder.
//!
//! Layout `REMAINDER(N) ⊗ FACTOR(N) ⊗ CTC(1)`. FACTOR is put in uniform
//! superposition, `U_j` writes `Q mod j` into REMAINDER (or 1 when
//! `j ∈ {0, Q}`), and a nonzero remainder flips the CTC qubit.

use serde::Serialize;

use super::{basis_permutation, cascade, is_prime, run_dense, BranchProgram, EvalOptions, Path};
use crate::engine::CTC;
use crate::error::{PctcError, Result};
use crate::linalg::{gates, Operator, OutcomeDistribution, RegisterLayout};

pub const REMAINDER: &str = "REMAINDER";
pub const FACTOR: &str = "FACTOR";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorInstance {
    q: u64,
    n_bits: usize,
    exclude_trivial: bool,
}

impl FactorInstance {
    /// Fails on `Q < 2` and on prime `Q`.
    pub fn new(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(PctcError::InvalidValue(format!("cannot factor {q}")));
        }
        if is_prime(q) {
            return Err(PctcError::PrimeInput(q));
        }
        let n_bits = (u64::BITS - q.leading_zeros()) as usize;
        Ok(Self { q, n_bits, exclude_trivial: false })
    }

    /// Also treat `j = 1` as a rejected factor.
    pub fn with_exclude_trivial(mut self, on: bool) -> Self {
        self.exclude_trivial = on;
        self
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn layout(&self) -> Result<RegisterLayout> {
        RegisterLayout::new([(REMAINDER, self.n_bits), (FACTOR, self.n_bits), (CTC, 1)])
    }

    /// The value `U_j |0>` writes into REMAINDER.
    pub fn remainder(&self, j: u64) -> u64 {
        if j == 0 || j == self.q || (self.exclude_trivial && j == 1) {
            1
        } else {
            self.q % j
        }
    }

    /// `U_j`: swaps `|0>` and `|remainder(j)>`.
    pub fn u_j(&self, j: u64) -> Result<Operator> {
        let v = self.remainder(j) as usize;
        basis_permutation(&RegisterLayout::single(REMAINDER, self.n_bits)?, |r| {
            if r == 0 {
                v
            } else if r == v {
                0
            } else {
                r
            }
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorResult {
    pub q: u64,
    pub n_bits: usize,
    pub path: Path,
    pub exclude_trivial: bool,
    /// Distribution of the FACTOR register.
    pub distribution: OutcomeDistribution,
}

impl FactorResult {
    pub fn factors(&self) -> Vec<u64> {
        self.distribution.support().into_iter().map(|k| k as u64).collect()
    }
}

fn structured(inst: &FactorInstance, opts: &EvalOptions) -> Result<OutcomeDistribution> {
    let layout = RegisterLayout::new([(REMAINDER, inst.n_bits), (FACTOR, inst.n_bits)])?;
    let n = inst.n_bits;
    let mask = (1usize << n) - 1;
    let map = |b: usize| {
        let (r, j) = (b >> n, b & mask);
        let v = inst.remainder(j as u64) as usize;
        let r = if r == 0 {
            v
        } else if r == v {
            0
        } else {
            r
        };
        (r << n) | j
    };
    let flips = |b: usize| b >> n != 0;
    BranchProgram { layout: &layout, superposed: &[FACTOR], map: &map, flips: &flips }.run(opts.capacity)
}

/// `U3 U2 U1` on the full layout.
pub fn dense_unitary(inst: &FactorInstance) -> Result<Operator> {
    let n = inst.n_bits;
    let layout = inst.layout()?;
    let u1 = gates::h_n(n).embed(&RegisterLayout::single(FACTOR, n)?, &layout)?;

    let r_shift = layout.shift(REMAINDER)?;
    let f_shift = layout.shift(FACTOR)?;
    let ctc = 1usize << layout.shift(CTC)?;
    let mask = (1usize << n) - 1;
    // controlled on FACTOR = j, U_j swaps |0> and |remainder(j)> in REMAINDER
    let u2 = |idx: usize| {
        let (r, j) = ((idx >> r_shift) & mask, (idx >> f_shift) & mask);
        let v = inst.remainder(j as u64) as usize;
        let r2 = if r == 0 {
            v
        } else if r == v {
            0
        } else {
            r
        };
        (idx & !(mask << r_shift)) | (r2 << r_shift)
    };
    let u3 = |idx: usize| if (idx >> r_shift) & mask != 0 { idx ^ ctc } else { idx };
    // U3 U2 as a single basis permutation
    let u32 = basis_permutation(&layout, |idx| u3(u2(idx)))?;
    cascade(vec![u1, u32])
}

pub fn factor(inst: &FactorInstance, opts: &EvalOptions) -> Result<FactorResult> {
    let n = inst.n_bits;
    let mask = (1usize << n) - 1;
    let joint = match opts.path {
        Path::Structured => structured(inst, opts)?,
        Path::Dense => {
            let layout = inst.layout()?;
            opts.check_dense(&layout)?;
            run_dense(&layout, dense_unitary(inst)?, opts)?
        }
    };
    Ok(FactorResult {
        q: inst.q,
        n_bits: n,
        path: opts.path,
        exclude_trivial: inst.exclude_trivial,
        distribution: joint.marginal(n, |k| k & mask),
    })
}
