//! P-CTC semantics: the induced operator, the renormalized nonlinear map on
//! pure and mixed states, and the postselected-teleportation picture of the
//! same evolution used as an independent check.

use std::sync::OnceLock;

use crate::error::{PctcError, Result};
use crate::linalg::decomp::{spectral_norm, spectral_norm_exceeds};
use crate::linalg::{gates, DensityMatrix, Operator, OutcomeDistribution, RegisterLayout};
use crate::linalg::{StateVector, C64, ZERO};

/// Name of the chronology-violating register.
pub const CTC: &str = "CTC";

/// Bound on `max |(U†U - I)_ij|` for a circuit unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Induced operators with spectral norm at or below this are null evolutions.
pub const NULL_EVOLUTION_TOL: f64 = 1e-9;

/// Relative paradox threshold: `||C psi|| <= tol * sigma_max(C) * ||psi||`.
pub const DEFAULT_PARADOX_TOL: f64 = 1e-9;

/// A unitary over chronology-respecting registers plus one `CTC` register.
#[derive(Clone, Debug)]
pub struct PctcCircuit {
    layout: RegisterLayout,
    unitary: Operator,
}

impl PctcCircuit {
    pub fn new(layout: RegisterLayout, unitary: Operator) -> Result<Self> {
        if !layout.contains(CTC) {
            return Err(PctcError::Layout(format!("circuit layout has no {CTC:?} register")));
        }
        if unitary.dims() != (layout.dim(), layout.dim()) {
            return Err(PctcError::Dimension(format!(
                "unitary is {}x{} but the layout has dimension {}",
                unitary.rows(),
                unitary.cols(),
                layout.dim()
            )));
        }
        let err = unitary.unitarity_error();
        if err > UNITARITY_TOL {
            return Err(PctcError::InvalidValue(format!(
                "circuit operator is not unitary (max |U†U - I| = {err:.3e})"
            )));
        }
        Ok(Self { layout, unitary })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn unitary(&self) -> &Operator {
        &self.unitary
    }

    pub fn ctc_width(&self) -> usize {
        self.layout.width(CTC).expect("validated at construction")
    }

    /// Layout of the chronology-respecting registers.
    pub fn system_layout(&self) -> RegisterLayout {
        self.layout.without(CTC).expect("validated at construction")
    }

    /// The unitary with `CTC` moved to the last tensor slot.
    pub fn with_ctc_last(&self) -> Result<(Operator, RegisterLayout)> {
        let mut order: Vec<&str> = self.layout.names().filter(|n| *n != CTC).collect();
        order.push(CTC);
        self.unitary.permute_registers(&self.layout, &order)
    }
}

/// The induced operator `C = Tr_CTC(U)` acting on the chronology-respecting
/// registers.
#[derive(Clone, Debug)]
pub struct InducedMap {
    layout: RegisterLayout,
    c: Operator,
    paradox_tol: f64,
    sigma_max: OnceLock<f64>,
}

impl InducedMap {
    /// Wraps an operator directly, without a source circuit.
    pub fn from_operator(layout: RegisterLayout, c: Operator) -> Result<Self> {
        if c.dims() != (layout.dim(), layout.dim()) {
            return Err(PctcError::Dimension(format!(
                "induced operator is {}x{} but the layout has dimension {}",
                c.rows(),
                c.cols(),
                layout.dim()
            )));
        }
        Ok(Self { layout, c, paradox_tol: DEFAULT_PARADOX_TOL, sigma_max: OnceLock::new() })
    }

    pub fn with_paradox_tolerance(mut self, tol: f64) -> Self {
        self.paradox_tol = tol;
        self
    }

    pub fn paradox_tolerance(&self) -> f64 {
        self.paradox_tol
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn operator(&self) -> &Operator {
        &self.c
    }

    pub fn sigma_max(&self) -> f64 {
        *self.sigma_max.get_or_init(|| spectral_norm(&self.c))
    }

    /// `psi -> C psi / ||C psi||`
    pub fn apply_pure(&self, psi: &StateVector) -> Result<StateVector> {
        self.check_layout(psi.layout())?;
        let out = self.c.apply(psi.amplitudes())?;
        let norm = crate::linalg::norm(&out);
        let scale = self.paradox_tol * psi.norm();
        // sigma_max <= ||C||_F, so the SVD is only needed near the threshold
        if norm <= scale * self.c.frobenius_norm() && norm <= scale * self.sigma_max() {
            return Err(PctcError::Paradox(format!(
                "input is annihilated by the induced operator (||C psi|| = {norm:.3e})"
            )));
        }
        StateVector::new(self.layout.clone(), out)
    }

    /// `rho -> C rho C† / Tr(C rho C†)`
    pub fn apply_mixed(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_layout(rho.layout())?;
        let out = self.c.matmul(rho.operator())?.matmul(&self.c.dagger())?;
        let tr = out.trace().re;
        let tol2 = self.paradox_tol * self.paradox_tol;
        let fro = self.c.frobenius_norm();
        if tr <= tol2 * fro * fro && tr <= tol2 * self.sigma_max().powi(2) {
            return Err(PctcError::Paradox(format!(
                "mixed input is annihilated by the induced operator (Tr = {tr:.3e})"
            )));
        }
        DensityMatrix::from_unnormalized(self.layout.clone(), out)
    }

    fn check_layout(&self, layout: &RegisterLayout) -> Result<()> {
        if layout != &self.layout {
            return Err(PctcError::Layout(format!(
                "input layout {:?} does not match map layout {:?}",
                layout.names().collect::<Vec<_>>(),
                self.layout.names().collect::<Vec<_>>()
            )));
        }
        Ok(())
    }
}

/// Traces the circuit unitary over `CTC`.
///
/// Fails with [`PctcError::NullEvolution`] when the result vanishes, in which
/// case every input is paradoxical.
pub fn induced_map(circuit: &PctcCircuit) -> Result<InducedMap> {
    let (c, layout) = circuit.unitary.partial_trace(&circuit.layout, CTC)?;
    if !spectral_norm_exceeds(&c, NULL_EVOLUTION_TOL) {
        return Err(PctcError::NullEvolution { norm: spectral_norm(&c) });
    }
    InducedMap::from_operator(layout, c)
}

pub fn apply_pure(map: &InducedMap, psi: &StateVector) -> Result<StateVector> {
    map.apply_pure(psi)
}

pub fn apply_mixed(map: &InducedMap, rho: &DensityMatrix) -> Result<DensityMatrix> {
    map.apply_mixed(rho)
}

/// `(1/sqrt d) sum_i |i>|i>`
#[derive(Clone, Debug, PartialEq)]
pub struct MaxEntangledState {
    d: usize,
}

impl MaxEntangledState {
    pub fn new(d: usize) -> Self {
        Self { d }
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn amplitudes(&self) -> Vec<C64> {
        let amp = C64::new((self.d as f64).sqrt().recip(), 0.0);
        let mut v = vec![ZERO; self.d * self.d];
        for i in 0..self.d {
            v[i * self.d + i] = amp;
        }
        v
    }
}

/// Evaluates the circuit as postselected teleportation: `psi` joins a
/// maximally entangled pair `AB`, the circuit unitary acts on the system and
/// `A` (standing in for `CTC`), and `AB` is projected back onto the
/// maximally entangled state.
///
/// Does not form the induced operator. A branch is reported paradoxical when
/// the projected norm is at most `tol * ||psi||`; the projected vector equals
/// `C psi / d`, whose norm never exceeds `||psi||`.
pub fn teleportation_oracle(circuit: &PctcCircuit, psi: &StateVector) -> Result<StateVector> {
    let sys_layout = circuit.system_layout();
    if psi.layout() != &sys_layout {
        return Err(PctcError::Layout("input layout does not match circuit system".into()));
    }
    let (u, _) = circuit.with_ctc_last()?;
    let d = 1usize << circuit.ctc_width();
    let ds = sys_layout.dim();

    // |psi>_S |Phi>_AB, index ((s * d) + a) * d + b
    let phi = MaxEntangledState::new(d).amplitudes();
    let joint = gates::kron(psi.amplitudes(), &phi);

    // (U_{SA} ⊗ I_B), then <Phi|_AB
    let mut projected = vec![ZERO; ds];
    let inv_sqrt_d = (d as f64).sqrt().recip();
    for (s_out, slot) in projected.iter_mut().enumerate() {
        let mut acc = ZERO;
        for i in 0..d {
            // amplitude of |s_out, a=i, b=i> after U
            let row = u.row(s_out * d + i);
            let mut amp = ZERO;
            for (col, &uv) in row.iter().enumerate() {
                if uv != ZERO {
                    amp += uv * joint[col * d + i];
                }
            }
            acc += amp;
        }
        *slot = acc * inv_sqrt_d;
    }

    let norm = crate::linalg::norm(&projected);
    if norm <= DEFAULT_PARADOX_TOL * psi.norm() {
        return Err(PctcError::Paradox(format!(
            "projection onto the entangled pair vanishes (norm {norm:.3e})"
        )));
    }
    StateVector::new(sys_layout, projected)
}

/// How qubit `B` of the entangled pair couples to the CTC qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RetroCoupling {
    /// CNOT from `B` to `CTC`.
    Cnot,
    /// No interaction.
    Identity,
    /// X on `CTC` when `B` is `|0>`.
    InvertedCnot,
}

/// `A` and `B` share `(|00> + |11>)/sqrt 2`; `B` then interacts with a CTC
/// qubit. Returns the distribution of a Z measurement on `A`.
pub fn retro_demo() -> Result<OutcomeDistribution> {
    retro_demo_with(RetroCoupling::Cnot)
}

pub fn retro_demo_with(coupling: RetroCoupling) -> Result<OutcomeDistribution> {
    let layout = RegisterLayout::new([("A", 1), ("B", 1), (CTC, 1)])?;
    let pair = RegisterLayout::new([("B", 1), (CTC, 1)])?;
    let gate = match coupling {
        RetroCoupling::Cnot => gates::cnot(),
        RetroCoupling::Identity => Operator::identity(4),
        RetroCoupling::InvertedCnot => {
            let p0 = Operator::outer(&gates::ket0(), &gates::ket0());
            let p1 = Operator::outer(&gates::ket1(), &gates::ket1());
            &p0.tensor(&gates::x())? + &p1.tensor(&Operator::identity(2))?
        }
    };
    let circuit = PctcCircuit::new(layout.clone(), gate.embed(&pair, &layout)?)?;
    let map = induced_map(&circuit)?;
    let bell = StateVector::new(
        circuit.system_layout(),
        vec![C64::new(1.0, 0.0), ZERO, ZERO, C64::new(1.0, 0.0)],
    )?;
    map.apply_pure(&bell)?.measure(&["A"])
}

/// B92 distinguisher: SWAP followed by controlled-Hadamard.
pub fn b92_circuit() -> PctcCircuit {
    let layout = RegisterLayout::new([("SYS", 1), (CTC, 1)]).expect("static layout");
    let u = gates::controlled(&gates::h()).matmul(&gates::swap()).expect("2-qubit gates");
    PctcCircuit::new(layout, u).expect("unitary")
}
