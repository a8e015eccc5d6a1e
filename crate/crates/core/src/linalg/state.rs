use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use super::decomp;
use super::layout::RegisterLayout;
use super::operator::{Operator, C64, ZERO};
use crate::error::{PctcError, Result};

/// Tolerance on `| ||psi|| - 1 |` for a stored state.
pub const NORM_TOL: f64 = 1e-12;

/// Normalized pure state over a register layout.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amplitudes: Vec<C64>,
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a|b>`
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn normalize(v: &[C64]) -> Option<Vec<C64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some(v.iter().map(|z| z / n).collect())
}

impl StateVector {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(layout: RegisterLayout, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(PctcError::Dimension(format!(
                "{} amplitudes for a layout of dimension {}",
                amplitudes.len(),
                layout.dim()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(PctcError::InvalidValue("non-finite amplitude".into()));
        }
        let amplitudes = normalize(&amplitudes)
            .ok_or_else(|| PctcError::InvalidValue("zero state vector".into()))?;
        Ok(Self { layout, amplitudes })
    }

    /// State on a single register named `name`, width inferred from the length.
    pub fn on_register(name: &str, amplitudes: Vec<C64>) -> Result<Self> {
        let n = amplitudes.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(PctcError::Dimension(format!("{n} amplitudes is not a qubit register")));
        }
        Self::new(RegisterLayout::single(name, n.trailing_zeros() as usize)?, amplitudes)
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let dim = layout.dim();
        if index >= dim {
            return Err(PctcError::Dimension(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { layout, amplitudes: amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|<self|other>|^2`
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Trace distance between the two pure states, `sqrt(1 - |<a|b>|^2)`.
    /// `sqrt(1 - |<a|b>|^2)`, computed as the norm of the component of `other`
    /// orthogonal to `self`.
    pub fn trace_distance(&self, other: &StateVector) -> f64 {
        let (a, b) = (&self.amplitudes, &other.amplitudes);
        let p = inner(a, b);
        let residual: Vec<C64> = b.iter().zip(a).map(|(y, x)| y - p * x).collect();
        norm(&residual).min(1.0)
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let layout = self.layout.concat(&other.layout)?;
        let amps = super::operator::gates::kron(&self.amplitudes, &other.amplitudes);
        Ok(Self { layout, amplitudes: amps })
    }

    pub fn permute_registers(&self, order: &[&str]) -> Result<StateVector> {
        let (layout, map) = self.layout.permutation(order)?;
        let mut amps = vec![ZERO; self.dim()];
        for (old, &new) in map.iter().enumerate() {
            amps[new] = self.amplitudes[old];
        }
        Ok(Self { layout, amplitudes: amps })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Distribution of a computational-basis measurement of the listed registers.
    pub fn measure(&self, registers: &[&str]) -> Result<OutcomeDistribution> {
        let mut shifts = Vec::with_capacity(registers.len());
        let mut width = 0;
        for name in registers {
            let w = self.layout.width(name)?;
            shifts.push((self.layout.shift(name)?, w));
            width += w;
        }
        let mut probs = BTreeMap::new();
        for (idx, p) in self.probabilities().into_iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut key = 0usize;
            for &(s, w) in &shifts {
                key = (key << w) | ((idx >> s) & ((1 << w) - 1));
            }
            *probs.entry(key).or_insert(0.0) += p;
        }
        Ok(OutcomeDistribution::from_map(width, probs))
    }

    /// Projects register `name` onto `value` and returns the outcome
    /// probability together with the normalized state of the other registers.
    pub fn condition_on(&self, name: &str, value: usize) -> Result<(f64, Option<StateVector>)> {
        let rest = self.layout.without(name)?;
        let mut amps = vec![ZERO; rest.dim()];
        for (idx, a) in self.amplitudes.iter().enumerate() {
            let (reduced, v) = self.layout.split_out(idx, name)?;
            if v == value {
                amps[reduced] = *a;
            }
        }
        let p = norm(&amps).powi(2);
        let state = if p > 0.0 { Some(StateVector::new(rest, amps)?) } else { None };
        Ok((p, state))
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            layout: self.layout.clone(),
            op: Operator::outer(&self.amplitudes, &self.amplitudes),
        }
    }

    /// Reinterprets the amplitudes under another layout of the same dimension.
    pub fn with_layout(&self, layout: RegisterLayout) -> Result<StateVector> {
        StateVector::new(layout, self.amplitudes.clone())
    }
}

/// Density operator over a register layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: RegisterLayout,
    op: Operator,
}

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(layout: RegisterLayout, op: Operator) -> Result<Self> {
        let rho = Self::unchecked(layout, op)?;
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn unchecked(layout: RegisterLayout, op: Operator) -> Result<Self> {
        if !op.is_square() || op.rows() != layout.dim() {
            return Err(PctcError::Dimension(format!(
                "density matrix {}x{} for a layout of dimension {}",
                op.rows(),
                op.cols(),
                layout.dim()
            )));
        }
        Ok(Self { layout, op })
    }

    /// Normalizes an unnormalized positive operator to unit trace.
    pub fn from_unnormalized(layout: RegisterLayout, op: Operator) -> Result<Self> {
        let tr = op.trace().re;
        if tr <= 0.0 {
            return Err(PctcError::InvalidValue("operator has non-positive trace".into()));
        }
        let scaled = op.scale(C64::new(1.0 / tr, 0.0));
        let herm = (&scaled + &scaled.dagger()).scale(C64::new(0.5, 0.0));
        Self::new(layout, herm)
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.dim();
        Self { op: Operator::identity(d).scale(C64::new(1.0 / d as f64, 0.0)), layout }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.op.is_hermitian(HERMITIAN_TOL) {
            return Err(PctcError::InvalidValue("density matrix is not Hermitian".into()));
        }
        let tr = self.op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(PctcError::InvalidValue(format!("density matrix trace is {tr}")));
        }
        let min = decomp::hermitian_eigenvalues(&self.op)?.first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(PctcError::InvalidValue(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.rows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.op.get(i, i).re).collect()
    }

    /// `(1/2) ||rho - sigma||_1`
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(PctcError::Dimension("trace distance on mismatched dims".into()));
        }
        let diff = &self.op - &other.op;
        Ok(0.5 * decomp::hermitian_eigenvalues(&diff)?.iter().map(|l| l.abs()).sum::<f64>())
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(Self { layout: self.layout.concat(&other.layout)?, op: self.op.tensor(&other.op)? })
    }

    pub fn partial_trace(&self, traced: &str) -> Result<DensityMatrix> {
        let (op, layout) = self.op.partial_trace(&self.layout, traced)?;
        Ok(Self { layout, op })
    }

    pub fn reduce_to(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let (op, layout) = self.op.reduce_to(&self.layout, keep)?;
        Ok(Self { layout, op })
    }

    pub fn permute_registers(&self, order: &[&str]) -> Result<DensityMatrix> {
        let (op, layout) = self.op.permute_registers(&self.layout, order)?;
        Ok(Self { layout, op })
    }

    pub fn measure(&self, registers: &[&str]) -> Result<OutcomeDistribution> {
        let reduced = self.reduce_to(registers)?.permute_registers(registers)?;
        let width = reduced.layout.total_qubits();
        let probs = reduced
            .diagonal()
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > 0.0)
            .collect();
        Ok(OutcomeDistribution::from_map(width, probs))
    }
}

/// Probabilities of computational-basis outcomes, keyed by outcome value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutcomeDistribution {
    width: usize,
    probs: BTreeMap<usize, f64>,
}

/// Outcomes below this probability are treated as numerical noise.
pub const SUPPORT_TOL: f64 = 1e-14;

impl OutcomeDistribution {
    pub fn from_map(width: usize, probs: BTreeMap<usize, f64>) -> Self {
        let probs = probs.into_iter().filter(|&(_, p)| p > SUPPORT_TOL).collect();
        Self { width, probs }
    }

    /// Uniform distribution over the given outcomes.
    pub fn uniform(width: usize, outcomes: impl IntoIterator<Item = usize>) -> Self {
        let outcomes: Vec<usize> = outcomes.into_iter().collect();
        let p = 1.0 / outcomes.len() as f64;
        Self { width, probs: outcomes.into_iter().map(|k| (k, p)).collect() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn prob(&self, outcome: usize) -> f64 {
        self.probs.get(&outcome).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> Vec<usize> {
        self.probs.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().map(|(&k, &p)| (k, p))
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn bitstring(&self, outcome: usize) -> String {
        format!("{outcome:0width$b}", width = self.width)
    }

    /// Largest absolute probability difference over the union of supports.
    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.probs
            .keys()
            .chain(other.probs.keys())
            .map(|&k| (self.prob(k) - other.prob(k)).abs())
            .fold(0.0, f64::max)
    }

    pub fn total_variation(&self, other: &OutcomeDistribution) -> f64 {
        let mut keys: Vec<usize> = self.probs.keys().chain(other.probs.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        0.5 * keys.iter().map(|&k| (self.prob(k) - other.prob(k)).abs()).sum::<f64>()
    }

    /// Image of the distribution under a map on outcomes (probabilities add up).
    pub fn marginal(&self, width: usize, f: impl Fn(usize) -> usize) -> OutcomeDistribution {
        let mut probs = BTreeMap::new();
        for (&k, &p) in &self.probs {
            *probs.entry(f(k)).or_insert(0.0) += p;
        }
        Self::from_map(width, probs)
    }

    /// Inverse-CDF sample from a uniform draw `u` in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> Option<usize> {
        let mut acc = 0.0;
        let total = self.total();
        let mut last = None;
        for (&k, &p) in &self.probs {
            acc += p / total;
            last = Some(k);
            if u < acc {
                return Some(k);
            }
        }
        last
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        self.sample_with(rng.random::<f64>())
    }
}

/// Rounds to 12 significant digits; stable textual output across platforms.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl Serialize for OutcomeDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.probs.len()))?;
        for (&k, &p) in &self.probs {
            map.serialize_entry(&self.bitstring(k), &round_sig(p))?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator::gates::*;
    use crate::linalg::operator::ONE;

    fn ab() -> RegisterLayout {
        RegisterLayout::new([("A", 1), ("B", 1)]).unwrap()
    }

    #[test]
    fn constructor_normalizes() {
        let s = StateVector::new(ab(), vec![r(3.0), ZERO, ZERO, r(4.0)]).unwrap();
        assert!((s.norm() - 1.0).abs() < NORM_TOL);
        assert!(StateVector::new(ab(), vec![ZERO; 4]).is_err());
        assert!(StateVector::new(ab(), vec![ZERO; 3]).is_err());
    }

    #[test]
    fn permute_two_qubit_labels() {
        let s = StateVector::basis(ab(), 0b01).unwrap();
        let p = s.permute_registers(&["B", "A"]).unwrap();
        assert_eq!(p.amplitudes(), basis(4, 0b10).as_slice());
    }

    #[test]
    fn measure_register_marginals() {
        let bell = StateVector::new(ab(), vec![ONE, ZERO, ZERO, ONE]).unwrap();
        let d = bell.measure(&["A"]).unwrap();
        assert!((d.prob(0) - 0.5).abs() < 1e-15 && (d.prob(1) - 0.5).abs() < 1e-15);
        assert_eq!(d.bitstring(1), "1");
    }

    #[test]
    fn condition_collapses_partner() {
        let bell = StateVector::new(ab(), vec![ONE, ZERO, ZERO, ONE]).unwrap();
        let (p, post) = bell.condition_on("A", 1).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert_eq!(post.unwrap().amplitudes(), ket1().as_slice());
    }

    #[test]
    fn density_validation() {
        let l = RegisterLayout::single("A", 1).unwrap();
        assert!(DensityMatrix::new(l.clone(), Operator::identity(2)).is_err());
        assert!(DensityMatrix::new(l.clone(), z()).is_err());
        let mm = DensityMatrix::maximally_mixed(l);
        mm.validate().unwrap();
    }

    #[test]
    fn density_partial_trace_of_bell_is_mixed() {
        let bell = StateVector::new(ab(), vec![ONE, ZERO, ZERO, ONE]).unwrap();
        let rho_a = bell.projector().partial_trace("B").unwrap();
        let mm = DensityMatrix::maximally_mixed(RegisterLayout::single("A", 1).unwrap());
        assert!(rho_a.trace_distance(&mm).unwrap() < 1e-14);
    }

    #[test]
    fn distribution_serializes_bitstrings() {
        let d = OutcomeDistribution::uniform(3, [1, 3, 5]);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"001":0.333333333333,"011":0.333333333333,"101":0.333333333333}"#);
    }

    #[test]
    fn sampling_is_inverse_cdf() {
        let d = OutcomeDistribution::uniform(2, [0, 2]);
        assert_eq!(d.sample_with(0.1), Some(0));
        assert_eq!(d.sample_with(0.9), Some(2));
    }
}
