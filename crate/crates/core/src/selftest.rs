//! Seeded invariant suite behind `pctc selftest`.
//!
//! The report holds no timings, so equal seeds give byte-identical output.

use rand::Rng;
use serde::Serialize;

use crate::algorithms::factor::{factor, FactorInstance};
use crate::algorithms::npconp::{np_conp_solve, WitnessProblem};
use crate::algorithms::sat::{sat_solve, CnfFormula};
use crate::algorithms::{is_prime, Answer, EvalOptions, Path};
use crate::distinguish::{
    bb84_demo, check_independence, distinguish, dual_basis, impossibility_witness, Route, StateSet,
};
use crate::engine::{
    b92_circuit, induced_map, retro_demo_with, teleportation_oracle, InducedMap, PctcCircuit, RetroCoupling, CTC,
};
use crate::ensembles::{apply_proper, compare_semantics, predicted_q, LabeledEnsemble};
use crate::error::Result;
use crate::linalg::{round_sig, Operator, RegisterLayout, StateVector};
use crate::random::{self, SeededRng};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation observed; compared against `tolerance`.
    pub metric: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

type Probe = fn(&mut SeededRng) -> Result<f64>;

const PROBES: &[(&str, f64, Probe)] = &[
    ("b92_operator", 1e-12, b92_operator),
    ("teleportation_equivalence", 1e-9, teleportation),
    ("retro_demo", 1e-10, retro),
    ("independent_sets_distinguished", 1e-9, routes),
    ("dependent_sets_ambiguous", 0.0, dependent),
    ("bb84_overlaps_preserved", 1e-10, bb84),
    ("purification_matches_density", 1e-12, purification),
    ("label_law", 1e-10, label_law),
    ("dctc_contrast", 1e-8, dctc),
    ("factoring_paths_agree", 1e-12, factoring),
    ("sat_probability_law", 1e-10, sat_law),
    ("np_conp_promise", 1e-10, np_conp),
];

/// Runs every probe with its own generator derived from `seed`.
pub fn run(seed: u64) -> SelftestReport {
    let checks: Vec<Check> = PROBES
        .iter()
        .enumerate()
        .map(|(i, &(name, tolerance, probe))| {
            let mut rng = random::rng(seed.wrapping_add(i as u64));
            match probe(&mut rng) {
                Ok(metric) => Check { name, passed: metric <= tolerance, metric: round_sig(metric), tolerance, error: None },
                Err(e) => Check { name, passed: false, metric: f64::NAN, tolerance, error: Some(e.to_string()) },
            }
        })
        .collect();
    let passed = checks.iter().filter(|c| c.passed).count();
    SelftestReport { seed, passed, failed: checks.len() - passed, checks }
}

fn b92_operator(_: &mut SeededRng) -> Result<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let expected = Operator::from_real(2, 2, &[1.0, 0.0, s, -s])?;
    Ok(induced_map(&b92_circuit())?.operator().max_abs_diff(&expected))
}

fn teleportation(rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let total = rng.random_range(2..=4);
        let ctc = rng.random_range(1..total);
        let layout = RegisterLayout::new([("SYS", total - ctc), (CTC, ctc)])?;
        let circuit = PctcCircuit::new(layout, random::random_unitary(rng, 1 << total))?;
        let psi = StateVector::new(circuit.system_layout(), random::random_state(rng, 1 << (total - ctc)))?;
        let a = induced_map(&circuit)?.apply_pure(&psi)?;
        let b = teleportation_oracle(&circuit, &psi)?;
        worst = worst.max(a.trace_distance(&b));
    }
    Ok(worst)
}

fn retro(_: &mut SeededRng) -> Result<f64> {
    let coupled = retro_demo_with(RetroCoupling::Cnot)?.prob(0);
    let free = retro_demo_with(RetroCoupling::Identity)?.prob(0);
    Ok((coupled - 1.0).abs().max((free - 0.5).abs()))
}

fn random_set(rng: &mut SeededRng, d: usize, n: usize) -> Result<StateSet> {
    StateSet::from_amplitudes(random::random_states(rng, d, n))
}

fn routes(rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in 0..50 {
        let d = 2 + t % 5;
        let set = random_set(rng, d, d)?;
        for (i, input) in set.states().iter().enumerate() {
            let runs = Route::ALL.iter().map(|&r| distinguish(&set, r, input)).collect::<Result<Vec<_>>>()?;
            for r in &runs {
                worst = worst.max(1.0 - r.distribution.prob(i));
            }
            for a in &runs {
                for b in &runs {
                    worst = worst.max(a.distribution.max_abs_diff(&b.distribution));
                }
            }
        }
    }
    Ok(worst)
}

/// Number of dependent sets whose witness lands on fewer than two labels.
fn dependent(rng: &mut SeededRng) -> Result<f64> {
    let mut failures = 0usize;
    for t in 0..20 {
        let d = 2 + t % 5;
        let states = random::random_states(rng, d, d + 1);
        let set = StateSet::from_amplitudes(states)?;
        if check_independence(&set) || impossibility_witness(&set)?.overlaps.iter().filter(|&&p| p >= 1e-3).count() < 2 {
            failures += 1;
        }
    }
    Ok(failures as f64)
}

fn bb84(_: &mut SeededRng) -> Result<f64> {
    Ok(bb84_demo()?.max_overlap_change)
}

fn random_ensemble(rng: &mut SeededRng) -> Result<(StateSet, LabeledEnsemble)> {
    let n = rng.random_range(2..=4);
    let set = random_set(rng, 4, n)?;
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let pairs = weights.iter().zip(set.states()).map(|(w, s)| (w / total, s.clone())).collect();
    Ok((set, LabeledEnsemble::from_pairs(pairs)?))
}

fn purification(rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (set, e) = random_ensemble(rng)?;
        let map = crate::distinguish::build_c(&set)?;
        worst = worst.max(compare_semantics(&map, &e)?.purification_gap);
    }
    Ok(worst)
}

fn label_law(rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (set, e) = random_ensemble(rng)?;
        let map = crate::distinguish::build_c(&set)?;
        let report = compare_semantics(&map, &e)?;
        let predicted = predicted_q(&e, &dual_basis(&set)?.overlaps(&set))?;
        worst = worst.max(report.q.max_abs_diff(&predicted));

        let unitary = InducedMap::from_operator(set.layout().clone(), random::random_unitary(rng, set.dim()))?;
        let proper = apply_proper(&unitary, &e)?;
        if proper.label_distribution() != e.label_distribution() {
            worst = f64::INFINITY;
        }
    }
    Ok(worst)
}

fn dctc(_: &mut SeededRng) -> Result<f64> {
    let demo = crate::dctc::dctc_demo()?;
    let worst = demo
        .dctc
        .iter()
        .chain(&demo.pctc)
        .enumerate()
        .map(|(i, case)| (1.0 - case.z[i % 2]).abs())
        .fold(0.0, f64::max);
    Ok(worst)
}

fn factoring(_: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for q in (4..=31u64).filter(|&q| !is_prime(q)) {
        let inst = FactorInstance::new(q)?;
        let s = factor(&inst, &EvalOptions::default())?;
        let d = factor(&inst, &EvalOptions::default().with_path(Path::Dense))?;
        worst = worst.max(s.distribution.max_abs_diff(&d.distribution));
        let divisors: Vec<usize> = (1..q as usize).filter(|j| q as usize % j == 0).collect();
        worst = worst.max(s.distribution.max_abs_diff(&crate::OutcomeDistribution::uniform(inst.n_bits(), divisors)));
    }
    Ok(worst)
}

pub(crate) fn random_formula<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CnfFormula {
    let clauses = (0..rng.random_range(1..=4))
        .map(|_| {
            (0..rng.random_range(1..=3))
                .map(|_| {
                    let v = rng.random_range(1..=n as i64);
                    if rng.random() { v } else { -v }
                })
                .collect()
        })
        .collect();
    CnfFormula::new(n, clauses).expect("literals in range")
}

fn sat_law(rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in 0..20 {
        let f = random_formula(rng, 1 + t % 4);
        let m = f.count_models() as f64;
        for k in 1..=3 {
            let r = sat_solve(&f, k, &EvalOptions::default())?;
            worst = worst.max((r.p_no - (m + 1.0).powi(-(k as i32))).abs());
        }
    }
    Ok(worst)
}

fn np_conp(rng: &mut SeededRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in 0..10 {
        let n = 1 + t % 6;
        let yes_instance = rng.random::<bool>();
        let table: Vec<bool> = (0..1usize << n).map(|_| rng.random_bool(0.3)).collect();
        let forced = rng.random_range(0..1usize << n);
        let accepts = |w: usize| table[w] || w == forced;
        let prob = if yes_instance {
            WitnessProblem::from_predicates(n, accepts, |_| false)?
        } else {
            WitnessProblem::from_predicates(n, |_| false, accepts)?
        };
        let r = np_conp_solve(&prob, &EvalOptions::default())?;
        let expected = if yes_instance { Answer::Yes } else { Answer::No };
        let p_right: f64 = r
            .distribution
            .iter()
            .filter(|&(k, _)| (k >> (n + 1) == 1) == (expected == Answer::Yes))
            .map(|(_, p)| p)
            .sum();
        worst = worst.max((1.0 - p_right).abs());
        let verified = r.witnesses().iter().all(|&(a, w)| match a {
            Answer::Yes => prob.yes_accepts(w),
            Answer::No => prob.no_accepts(w),
        });
        if r.answer != Some(expected) || r.promise_violation || !verified {
            worst = f64::INFINITY;
        }
    }
    let violating = WitnessProblem::from_predicates(2, |w| w == 1, |w| w == 2)?;
    if !np_conp_solve(&violating, &EvalOptions::default())?.promise_violation {
        worst = f64::INFINITY;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_seed_passes() {
        let r = run(DEFAULT_SEED);
        for c in &r.checks {
            assert!(c.passed, "{} failed: metric {} error {:?}", c.name, c.metric, c.error);
        }
        assert_eq!(r.passed, PROBES.len());
    }

    #[test]
    fn reports_are_reproducible() {
        let a = serde_json::to_string(&run(7)).unwrap();
        let b = serde_json::to_string(&run(7)).unwrap();
        assert_eq!(a, b);
    }
}
