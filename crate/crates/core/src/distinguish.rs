//! Perfect discrimination of linearly independent states with a P-CTC.
//!
//! For a set `{phi_j}` the dual vectors `phi~_j` satisfy `<phi~_j|phi_i> = 0`
//! for `i != j`, so `C = sum_j |j><phi~_j|` sends each member to its own
//! label. Three constructions of that map are provided: the operator itself,
//! a SWAP-plus-controlled-unitary circuit with a qudit CTC, and a POVM
//! postselected through the one-qubit gadget.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::engine::{induced_map, InducedMap, PctcCircuit, CTC};
use crate::error::{PctcError, Result};
use crate::gadget::{postselect, AcceptSet, GeneralizedMeasurement};
use crate::linalg::decomp::{hermitian_eigenvalues, inverse, psd_sqrt, singular_values};
use crate::linalg::{complete_unitary, gates, inner, norm, Operator, OutcomeDistribution};
use crate::linalg::{RegisterLayout, StateVector, C64, ONE, ZERO};

/// Register holding the states to be distinguished.
pub const SYSTEM: &str = "SYS";

/// `sigma_min / sigma_max` threshold for linear independence.
pub const INDEPENDENCE_TOL: f64 = 1e-9;

/// Biorthogonality tolerance for dual vectors.
pub const DUAL_TOL: f64 = 1e-10;

/// Ordered set of at least two unit vectors on a common layout.
#[derive(Clone, Debug)]
pub struct StateSet {
    layout: RegisterLayout,
    states: Vec<StateVector>,
}

impl StateSet {
    pub fn new(states: Vec<StateVector>) -> Result<Self> {
        if states.len() < 2 {
            return Err(PctcError::InvalidValue("a state set needs at least two states".into()));
        }
        let layout = states[0].layout().clone();
        if states.iter().any(|s| s.layout() != &layout) {
            return Err(PctcError::Layout("states in a set must share one layout".into()));
        }
        Ok(Self { layout, states })
    }

    /// Builds a set on register `SYS`, zero-padding `d` up to a power of two
    /// and normalizing each vector.
    pub fn from_amplitudes(vectors: Vec<Vec<C64>>) -> Result<Self> {
        let d = vectors.first().map_or(0, Vec::len);
        if d == 0 || vectors.iter().any(|v| v.len() != d) {
            return Err(PctcError::Dimension("state vectors must share a nonzero length".into()));
        }
        let dim = d.next_power_of_two().max(2);
        let layout = RegisterLayout::single(SYSTEM, dim.trailing_zeros() as usize)?;
        let states = vectors
            .into_iter()
            .map(|mut v| {
                v.resize(dim, ZERO);
                StateVector::new(layout.clone(), v)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(states)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn columns(&self) -> Vec<Vec<C64>> {
        self.states.iter().map(|s| s.amplitudes().to_vec()).collect()
    }

    /// `sigma_min / sigma_max` of the column matrix, or 0 when `N > d`.
    pub fn independence_ratio(&self) -> f64 {
        ratio(&self.columns())
    }
}

fn ratio(columns: &[Vec<C64>]) -> f64 {
    let d = columns.first().map_or(0, Vec::len);
    if columns.is_empty() || columns.len() > d {
        return 0.0;
    }
    let m = Operator::from_columns(columns).expect("equal-length columns");
    let sv = singular_values(&m);
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) if max > 0.0 => min / max,
        _ => 0.0,
    }
}

pub fn check_independence(set: &StateSet) -> bool {
    set.independence_ratio() > INDEPENDENCE_TOL
}

fn require_independent(set: &StateSet) -> Result<()> {
    let r = set.independence_ratio();
    if r > INDEPENDENCE_TOL {
        Ok(())
    } else {
        Err(PctcError::DependentSet { ratio: r })
    }
}

/// Unit-norm dual vectors, one per member of a [`StateSet`].
///
/// Each dual has its first non-negligible component real and positive.
#[derive(Clone, Debug, PartialEq)]
pub struct DualBasis {
    duals: Vec<Vec<C64>>,
}

impl DualBasis {
    pub fn duals(&self) -> &[Vec<C64>] {
        &self.duals
    }

    pub fn len(&self) -> usize {
        self.duals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.duals.is_empty()
    }

    /// `|<phi~_x|phi_x>|` for each member.
    pub fn overlaps(&self, set: &StateSet) -> Vec<f64> {
        self.duals.iter().zip(set.states()).map(|(d, s)| inner(d, s.amplitudes()).norm()).collect()
    }

    /// Largest `|<phi~_j|phi_i>|` over `i != j`.
    pub fn biorthogonality_error(&self, set: &StateSet) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, d) in self.duals.iter().enumerate() {
            for (i, s) in set.states().iter().enumerate() {
                if i != j {
                    worst = worst.max(inner(d, s.amplitudes()).norm());
                }
            }
        }
        worst
    }
}

/// Columns of `Phi (Phi† Phi)^{-1}`, normalized. These lie in the span of the
/// inputs, so `N < d` needs no special handling.
fn duals_of(columns: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
    let phi = Operator::from_columns(columns)?;
    let gram = phi.dagger().matmul(&phi)?;
    let raw = phi.matmul(&inverse(&gram)?)?;
    (0..columns.len())
        .map(|j| {
            let v = raw.column(j);
            let n = norm(&v);
            let lead = v.iter().find(|z| z.norm() > 1e-12).copied().unwrap_or(ONE);
            let phase = lead.conj() / lead.norm();
            Ok(v.iter().map(|z| z * phase / n).collect())
        })
        .collect()
}

pub fn dual_basis(set: &StateSet) -> Result<DualBasis> {
    require_independent(set)?;
    Ok(DualBasis { duals: duals_of(&set.columns())? })
}

/// `sum_j |j><phi~_j|` with `|j>` the computational basis of `layout`.
fn label_operator(dim: usize, duals: &[Vec<C64>]) -> Operator {
    Operator::from_fn(dim, dim, |j, k| duals.get(j).map_or(ZERO, |d| d[k].conj()))
}

/// The induced map `C = sum_j |j><phi~_j|`.
pub fn build_c(set: &StateSet) -> Result<InducedMap> {
    let duals = dual_basis(set)?;
    InducedMap::from_operator(set.layout().clone(), label_operator(set.dim(), duals.duals()))
}

/// Orthonormal basis of the span of `columns` followed by its complement, by
/// Gram-Schmidt. The complement comes out in canonical order.
fn span_and_complement(columns: &[Vec<C64>]) -> Result<Operator> {
    let d = columns.first().map_or(0, Vec::len);
    let mut span: Vec<Vec<C64>> = Vec::new();
    for v in columns {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &span {
                let p = inner(q, &w);
                for (x, y) in w.iter_mut().zip(q) {
                    *x -= p * y;
                }
            }
        }
        let n = norm(&w);
        if n > 1e-8 {
            span.push(w.iter().map(|z| z / n).collect());
        }
    }
    let fixed: Vec<(usize, Vec<C64>)> = span.into_iter().enumerate().collect();
    complete_unitary(d, &fixed)
}

/// `(sum_l |l><l| ⊗ U_l) SWAP` on `SYS ⊗ CTC`, where `<l|U_l = <phi~_l|`.
///
/// Labels past the set size pick up an orthonormal basis of the complement
/// of the span, so members never leak into unused labels.
pub fn build_cascade_unitary(set: &StateSet) -> Result<PctcCircuit> {
    let duals = dual_basis(set)?;
    let d = set.dim();
    let n = set.len();
    let basis = span_and_complement(&set.columns())?;
    let mut blocks = Vec::with_capacity(d);
    for l in 0..d {
        let row = if l < n { duals.duals()[l].clone() } else { basis.column(l) };
        let w = complete_unitary(d, &[(l, row)])?;
        blocks.push(w.dagger());
    }
    let controlled = Operator::from_fn(d * d, d * d, |i, j| {
        if i / d == j / d {
            blocks[i / d].get(i % d, j % d)
        } else {
            ZERO
        }
    });
    let width = set.layout().total_qubits();
    let mut regs: Vec<(String, usize)> =
        set.layout().registers().iter().map(|r| (r.name.clone(), r.width)).collect();
    regs.push((CTC.to_owned(), width));
    let layout = RegisterLayout::new(regs)?;
    PctcCircuit::new(layout, controlled.matmul(&gates::swap_qudit(d))?)
}

/// Unambiguous-discrimination POVM `E_x = c |phi~_x><phi~_x|`, `E_0 = I - sum E_x`,
/// with `c` the largest scale keeping `sum E_x <= I`.
///
/// Outcome `x + 1` uses `M = sqrt(c) |x><phi~_x|`; outcome 0 ("don't know") is
/// rejected.
pub fn build_one_qubit_variant(set: &StateSet) -> Result<(GeneralizedMeasurement, AcceptSet)> {
    let duals = dual_basis(set)?;
    let d = set.dim();
    let mut frame = Operator::zeros(d, d);
    for v in duals.duals() {
        frame = &frame + &Operator::outer(v, v);
    }
    let lambda = hermitian_eigenvalues(&frame)?.last().copied().unwrap_or(1.0);
    let c = 1.0 / lambda;
    let rest = &Operator::identity(d) - &frame.scale(C64::new(c, 0.0));
    let mut ops = vec![psd_sqrt(&rest, 1e-10)?];
    for (x, v) in duals.duals().iter().enumerate() {
        ops.push(Operator::outer(&gates::basis(d, x), v).scale(C64::new(c.sqrt(), 0.0)));
    }
    let n = ops.len();
    let meas = GeneralizedMeasurement::new(set.layout().clone(), ops)?;
    Ok((meas, AcceptSet::all_except(0, n)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Direct,
    Cascade,
    Gadget,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Direct, Route::Cascade, Route::Gadget];
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Direct => "direct",
            Route::Cascade => "cascade",
            Route::Gadget => "gadget",
        })
    }
}

impl FromStr for Route {
    type Err = PctcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Route::Direct),
            "cascade" => Ok(Route::Cascade),
            "gadget" => Ok(Route::Gadget),
            other => Err(PctcError::InvalidValue(format!("unknown route {other:?}"))),
        }
    }
}

/// Result of running one input through a discrimination route.
#[derive(Clone, Debug, Serialize)]
pub struct Discrimination {
    pub route: Route,
    /// Output branches with their probabilities. Direct and cascade routes
    /// have a single branch.
    pub branches: Vec<(f64, StateVector)>,
    /// Computational-basis statistics of the system register after the map.
    pub distribution: OutcomeDistribution,
}

pub fn distinguish(set: &StateSet, route: Route, input: &StateVector) -> Result<Discrimination> {
    let branches = match route {
        Route::Direct => vec![(1.0, build_c(set)?.apply_pure(input)?)],
        Route::Cascade => {
            let map = induced_map(&build_cascade_unitary(set)?)?;
            vec![(1.0, map.apply_pure(input)?)]
        }
        Route::Gadget => {
            let (meas, accept) = build_one_qubit_variant(set)?;
            postselect(&meas, &accept, input)?
                .outcomes
                .into_iter()
                .map(|o| (o.probability, o.state))
                .collect()
        }
    };
    let names: Vec<&str> = set.layout().names().collect();
    let mut probs = std::collections::BTreeMap::new();
    for (p, state) in &branches {
        for (k, q) in state.measure(&names)?.iter() {
            *probs.entry(k).or_insert(0.0) += p * q;
        }
    }
    let distribution = OutcomeDistribution::from_map(set.layout().total_qubits(), probs);
    Ok(Discrimination { route, branches, distribution })
}

/// Outputs of the BB84-style transformation and the overlap structure
/// before and after it.
#[derive(Clone, Debug, Serialize)]
pub struct Bb84Report {
    pub labels: Vec<String>,
    pub inputs: Vec<StateVector>,
    pub outputs: Vec<StateVector>,
    pub overlaps_before: Vec<Vec<f64>>,
    pub overlaps_after: Vec<Vec<f64>>,
    pub max_overlap_change: f64,
    pub preserved: bool,
}

/// `|00><00| + |01><10| + |10><+0| + |11><-0|`
pub fn bb84_operator() -> Operator {
    let k = |a: Vec<C64>, b: Vec<C64>| gates::kron(&a, &b);
    let terms = [
        (k(gates::ket0(), gates::ket0()), k(gates::ket0(), gates::ket0())),
        (k(gates::ket0(), gates::ket1()), k(gates::ket1(), gates::ket0())),
        (k(gates::ket1(), gates::ket0()), k(gates::ket_plus(), gates::ket0())),
        (k(gates::ket1(), gates::ket1()), k(gates::ket_minus(), gates::ket0())),
    ];
    terms.iter().fold(Operator::zeros(4, 4), |acc, (ket, bra)| &acc + &Operator::outer(ket, bra))
}

fn overlap_matrix(states: &[StateVector]) -> Vec<Vec<f64>> {
    states.iter().map(|a| states.iter().map(|b| a.inner(b).norm()).collect()).collect()
}

pub fn bb84_demo() -> Result<Bb84Report> {
    let layout = RegisterLayout::single(SYSTEM, 2)?;
    let map = InducedMap::from_operator(layout.clone(), bb84_operator())?;
    let labels = ["00", "10", "+0", "-0"];
    let first = [gates::ket0(), gates::ket1(), gates::ket_plus(), gates::ket_minus()];
    let inputs = first
        .iter()
        .map(|a| StateVector::new(layout.clone(), gates::kron(a, &gates::ket0())))
        .collect::<Result<Vec<_>>>()?;
    let outputs = inputs.iter().map(|s| map.apply_pure(s)).collect::<Result<Vec<_>>>()?;
    let before = overlap_matrix(&inputs);
    let after = overlap_matrix(&outputs);
    let max_change = before
        .iter()
        .flatten()
        .zip(after.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Bb84Report {
        labels: labels.iter().map(|s| s.to_string()).collect(),
        inputs,
        outputs,
        overlaps_before: before,
        overlaps_after: after,
        max_overlap_change: max_change,
        preserved: max_change <= 1e-10,
    })
}

/// The image of a superposition of set members under the set's
/// distinguishing map, with its overlap onto each label.
#[derive(Clone, Debug)]
pub struct Superposition {
    pub input: StateVector,
    pub output: StateVector,
    /// `|<j|output>|^2` for each label `j`.
    pub overlaps: Vec<f64>,
}

impl Superposition {
    /// Number of labels whose overlap is at least `threshold`.
    pub fn labels_above(&self, threshold: f64) -> usize {
        self.overlaps.iter().filter(|&&p| p >= threshold).count()
    }
}

/// Runs `sum_j coeffs[j] |phi_j>` (normalized) through `build_c(set)`.
pub fn dependent_counterexample(set: &StateSet, coeffs: &[C64]) -> Result<Superposition> {
    if coeffs.len() != set.len() {
        return Err(PctcError::Dimension(format!(
            "{} coefficients for {} states",
            coeffs.len(),
            set.len()
        )));
    }
    let mut amps = vec![ZERO; set.dim()];
    for (a, s) in coeffs.iter().zip(set.states()) {
        for (x, y) in amps.iter_mut().zip(s.amplitudes()) {
            *x += a * y;
        }
    }
    let input = StateVector::new(set.layout().clone(), amps)?;
    let output = build_c(set)?.apply_pure(&input)?;
    let overlaps = output.probabilities().into_iter().take(set.len()).collect();
    Ok(Superposition { input, output, overlaps })
}

/// Evidence that a linearly dependent set cannot be perfectly distinguished.
///
/// The map is built from a maximal independent subset (greedy, in order). A
/// remaining member is a superposition of the subset, so its image spreads
/// over several labels, or coincides with a subset member's label when the
/// two states are parallel.
#[derive(Clone, Debug)]
pub struct ImpossibilityWitness {
    pub subset: Vec<usize>,
    pub dependent: usize,
    pub output: StateVector,
    /// `|<j|output>|^2` for each position `j` of the subset.
    pub overlaps: Vec<f64>,
    /// Subset member whose image equals the dependent member's image.
    pub collides_with: Option<usize>,
}

impl ImpossibilityWitness {
    /// Whether the witness shows ambiguity at the given overlap threshold.
    pub fn is_ambiguous(&self, threshold: f64) -> bool {
        self.collides_with.is_some() || self.overlaps.iter().filter(|&&p| p >= threshold).count() >= 2
    }
}

fn second_largest(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s.get(1).copied().unwrap_or(0.0)
}

pub fn impossibility_witness(set: &StateSet) -> Result<ImpossibilityWitness> {
    if check_independence(set) {
        return Err(PctcError::InvalidValue("set is linearly independent".into()));
    }
    let columns = set.columns();
    let mut subset: Vec<usize> = Vec::new();
    for j in 0..columns.len() {
        let mut trial: Vec<Vec<C64>> = subset.iter().map(|&i| columns[i].clone()).collect();
        trial.push(columns[j].clone());
        if ratio(&trial) > INDEPENDENCE_TOL {
            subset.push(j);
        }
    }
    let chosen: Vec<Vec<C64>> = subset.iter().map(|&i| columns[i].clone()).collect();
    let map = InducedMap::from_operator(set.layout().clone(), label_operator(set.dim(), &duals_of(&chosen)?))?;

    let mut best: Option<ImpossibilityWitness> = None;
    for dependent in (0..columns.len()).filter(|j| !subset.contains(j)) {
        let output = map.apply_pure(&set.states()[dependent])?;
        let overlaps: Vec<f64> = output.probabilities().into_iter().take(subset.len()).collect();
        let collides_with = overlaps.iter().position(|&p| p > 1.0 - 1e-9).map(|k| subset[k]);
        let candidate = ImpossibilityWitness { subset: subset.clone(), dependent, output, overlaps, collides_with };
        let better = match &best {
            None => true,
            Some(b) => second_largest(&candidate.overlaps) > second_largest(&b.overlaps),
        };
        if better {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| PctcError::InvalidValue("no dependent member found".into()))
}
