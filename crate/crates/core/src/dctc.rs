//! Deutsch-model (D-CTC) fixed points, for contrast with the postselected model.

use serde::Serialize;

use crate::engine::{b92_circuit, induced_map, PctcCircuit, CTC};
use crate::error::{PctcError, Result};
use crate::linalg::{gates, DensityMatrix, Operator, RegisterLayout, StateVector};

pub const STEP_TOL: f64 = 1e-10;
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct DctcSolution {
    pub rho_ctc: DensityMatrix,
    /// `|| Tr_SYS{U (rho ⊗ tau) U†} - tau ||_tr`
    pub residual: f64,
    pub iterations: usize,
    /// Whether the Cesàro average of the iterates was used.
    pub averaged: bool,
}

struct Channel {
    u: Operator,
    udag: Operator,
    joint: RegisterLayout,
    sys: Vec<String>,
}

impl Channel {
    fn new(circuit: &PctcCircuit, rho_sys: &DensityMatrix) -> Result<Self> {
        if rho_sys.layout() != &circuit.system_layout() {
            return Err(PctcError::Layout("input does not match the circuit's system registers".into()));
        }
        let (u, joint) = circuit.with_ctc_last()?;
        let sys = joint.names().filter(|n| *n != CTC).map(str::to_owned).collect();
        Ok(Self { udag: u.dagger(), u, joint, sys })
    }

    fn evolve(&self, rho_sys: &DensityMatrix, tau: &DensityMatrix) -> Result<DensityMatrix> {
        let joint = rho_sys.operator().tensor(tau.operator())?;
        let out = self.u.matmul(&joint)?.matmul(&self.udag)?;
        DensityMatrix::from_unnormalized(self.joint.clone(), out)
    }

    fn step(&self, rho_sys: &DensityMatrix, tau: &DensityMatrix) -> Result<DensityMatrix> {
        self.evolve(rho_sys, tau)?.reduce_to(&[CTC])
    }

    fn output(&self, rho_sys: &DensityMatrix, tau: &DensityMatrix) -> Result<DensityMatrix> {
        let names: Vec<&str> = self.sys.iter().map(String::as_str).collect();
        self.evolve(rho_sys, tau)?.reduce_to(&names)
    }
}

/// Iterates `tau -> Tr_SYS{U (rho ⊗ tau) U†}` from the maximally mixed state.
///
/// When several fixed points exist, the one reached from the maximally mixed
/// start is returned.
pub fn solve_fixed_point(circuit: &PctcCircuit, rho_sys: &DensityMatrix) -> Result<DctcSolution> {
    let ch = Channel::new(circuit, rho_sys)?;
    let ctc_layout = RegisterLayout::single(CTC, circuit.ctc_width())?;
    let mut tau = DensityMatrix::maximally_mixed(ctc_layout.clone());
    let mut sum = Operator::zeros(tau.dim(), tau.dim());
    for it in 1..=MAX_ITERATIONS {
        let next = ch.step(rho_sys, &tau)?;
        let change = next.trace_distance(&tau)?;
        sum = &sum + next.operator();
        tau = next;
        if change < STEP_TOL {
            let residual = ch.step(rho_sys, &tau)?.trace_distance(&tau)?;
            return Ok(DctcSolution { rho_ctc: tau, residual, iterations: it, averaged: false });
        }
    }
    let avg = DensityMatrix::from_unnormalized(ctc_layout, sum)?;
    let residual = ch.step(rho_sys, &avg)?.trace_distance(&avg)?;
    if residual <= RESIDUAL_TOL {
        Ok(DctcSolution { rho_ctc: avg, residual, iterations: MAX_ITERATIONS, averaged: true })
    } else {
        Err(PctcError::NonConvergence { residual, iterations: MAX_ITERATIONS })
    }
}

/// `Tr_CTC{U (rho ⊗ tau) U†}` for a solved `tau`.
pub fn dctc_output(
    circuit: &PctcCircuit,
    rho_sys: &DensityMatrix,
    sol: &DctcSolution,
) -> Result<DensityMatrix> {
    if sol.residual > RESIDUAL_TOL {
        return Err(PctcError::NonConvergence { residual: sol.residual, iterations: sol.iterations });
    }
    Channel::new(circuit, rho_sys)?.output(rho_sys, &sol.rho_ctc)
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoCase {
    pub input: String,
    pub rho_ctc: DensityMatrix,
    pub residual: f64,
    pub iterations: usize,
    pub output: DensityMatrix,
    /// Z-basis statistics `[P(0), P(1)]` of the output.
    pub z: [f64; 2],
}

/// The B92 circuit under both models: the D-CTC separates `|0>` from `|->`,
/// the P-CTC separates `|+>` from `|1>`.
#[derive(Clone, Debug, Serialize)]
pub struct DctcDemo {
    pub dctc: Vec<DemoCase>,
    pub pctc: Vec<DemoCase>,
    pub dctc_separates: bool,
    pub pctc_separates: bool,
}

fn z_stats(rho: &DensityMatrix) -> [f64; 2] {
    let d = rho.diagonal();
    [d[0], d[1]]
}

fn separates(cases: &[DemoCase]) -> bool {
    cases.len() == 2
        && ((cases[0].z[0] - 1.0).abs() <= RESIDUAL_TOL && (cases[1].z[1] - 1.0).abs() <= RESIDUAL_TOL)
}

pub fn dctc_demo() -> Result<DctcDemo> {
    let circuit = b92_circuit();
    let sys = circuit.system_layout();
    let state = |amps| StateVector::new(sys.clone(), amps).map(|s| s.projector());

    let mut dctc = Vec::new();
    for (label, amps) in [("0", gates::ket0()), ("-", gates::ket_minus())] {
        let rho = state(amps)?;
        let sol = solve_fixed_point(&circuit, &rho)?;
        let output = dctc_output(&circuit, &rho, &sol)?;
        dctc.push(DemoCase {
            input: label.into(),
            z: z_stats(&output),
            rho_ctc: sol.rho_ctc,
            residual: sol.residual,
            iterations: sol.iterations,
            output,
        });
    }

    let map = induced_map(&circuit)?;
    let mut pctc = Vec::new();
    for (label, amps) in [("+", gates::ket_plus()), ("1", gates::ket1())] {
        let output = map.apply_mixed(&state(amps)?)?;
        pctc.push(DemoCase {
            input: label.into(),
            z: z_stats(&output),
            rho_ctc: DensityMatrix::maximally_mixed(RegisterLayout::single(CTC, 1)?),
            residual: 0.0,
            iterations: 0,
            output,
        });
    }
    Ok(DctcDemo { dctc_separates: separates(&dctc), pctc_separates: separates(&pctc), dctc, pctc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gates::*;
    use crate::random;

    fn sys() -> RegisterLayout {
        RegisterLayout::single("SYS", 1).unwrap()
    }

    fn circuit(u: Operator) -> PctcCircuit {
        PctcCircuit::new(RegisterLayout::new([("SYS", 1), (CTC, 1)]).unwrap(), u).unwrap()
    }

    fn random_rho(seed: u64) -> DensityMatrix {
        let mut rng = random::rng(seed);
        let a = StateVector::new(sys(), random::random_state(&mut rng, 2)).unwrap().projector();
        let b = StateVector::new(sys(), random::random_state(&mut rng, 2)).unwrap().projector();
        let op = &a.operator().scale(r(0.3)) + &b.operator().scale(r(0.7));
        DensityMatrix::new(sys(), op).unwrap()
    }

    #[test]
    fn identity_keeps_maximally_mixed_ctc() {
        let c = circuit(Operator::identity(4));
        let rho = random_rho(1);
        let sol = solve_fixed_point(&c, &rho).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.rho_ctc.operator().max_abs_diff(&Operator::identity(2).scale(r(0.5))) < 1e-15);
        let out = dctc_output(&c, &rho, &sol).unwrap();
        assert!(out.operator().max_abs_diff(rho.operator()) < 1e-14);
    }

    #[test]
    fn swap_fixed_point_copies_the_input() {
        let c = circuit(swap());
        let rho = random_rho(2);
        let sol = solve_fixed_point(&c, &rho).unwrap();
        assert!(sol.rho_ctc.operator().max_abs_diff(rho.operator()) < 1e-14);
        let out = dctc_output(&c, &rho, &sol).unwrap();
        assert!(out.operator().max_abs_diff(rho.operator()) < 1e-14);
    }

    #[test]
    fn b92_fixed_points() {
        let c = b92_circuit();
        for (amps, fixed) in [(ket0(), ket0()), (ket_minus(), ket1())] {
            let rho = StateVector::new(sys(), amps).unwrap().projector();
            let sol = solve_fixed_point(&c, &rho).unwrap();
            assert!(sol.residual <= RESIDUAL_TOL);
            let expected = Operator::outer(&fixed, &fixed);
            assert!(sol.rho_ctc.operator().max_abs_diff(&expected) < 1e-9);
            let out = dctc_output(&c, &rho, &sol).unwrap();
            assert!(out.operator().max_abs_diff(&expected) < 1e-9);
        }
    }

    #[test]
    fn demo_separates_under_both_models() {
        let demo = dctc_demo().unwrap();
        assert!(demo.dctc_separates && demo.pctc_separates);
        assert!((demo.dctc[0].z[0] - 1.0).abs() < 1e-8);
        assert!((demo.dctc[1].z[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn random_unitaries_satisfy_consistency() {
        let mut rng = random::rng(9);
        for seed in 0..10 {
            let c = circuit(random::random_unitary(&mut rng, 4));
            let rho = random_rho(100 + seed);
            let sol = solve_fixed_point(&c, &rho).unwrap();
            assert!(sol.residual <= RESIDUAL_TOL);
            dctc_output(&c, &rho, &sol).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn output_rejects_unsolved() {
        let c = circuit(swap());
        let rho = random_rho(3);
        let mut sol = solve_fixed_point(&c, &rho).unwrap();
        sol.residual = 1.0;
        assert!(matches!(dctc_output(&c, &rho, &sol), Err(PctcError::NonConvergence { .. })));
    }
}
