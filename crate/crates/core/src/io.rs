//! JSON encodings for operators, states, circuits and problem inputs.
//!
//! Complex numbers are written as `[re, im]`; on input a bare number is
//! accepted as a real value. Every float is rounded to 12 significant digits
//! on output.

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::distinguish::StateSet;
use crate::engine::PctcCircuit;
use crate::ensembles::{EnsembleEntry, LabeledEnsemble};
use crate::error::{PctcError, Result};
use crate::gadget::{AcceptSet, GeneralizedMeasurement};
use crate::linalg::state::round_sig;
use crate::linalg::{DensityMatrix, Operator, RegisterLayout, StateVector, C64};

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum ComplexJson {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexJson> for C64 {
    fn from(z: ComplexJson) -> Self {
        match z {
            ComplexJson::Real(re) => C64::new(re, 0.0),
            ComplexJson::Pair([re, im]) => C64::new(re, im),
        }
    }
}

struct Num(C64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [round_sig(self.0.re), round_sig(self.0.im)].serialize(s)
    }
}

struct Matrix<'a>(&'a Operator);

impl Serialize for Matrix<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Num>> =
            (0..self.0.rows()).map(|i| self.0.row(i).iter().map(|&z| Num(z)).collect()).collect();
        rows.serialize(s)
    }
}

fn matrix_from(rows: Vec<Vec<ComplexJson>>) -> Result<Operator> {
    let rows: Vec<Vec<C64>> = rows.into_iter().map(|r| r.into_iter().map(C64::from).collect()).collect();
    Operator::from_rows(&rows)
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Operator", 3)?;
        st.serialize_field("rows", &self.rows())?;
        st.serialize_field("cols", &self.cols())?;
        st.serialize_field("matrix", &Matrix(self))?;
        st.end()
    }
}

#[derive(Deserialize)]
struct OperatorJson {
    matrix: Vec<Vec<ComplexJson>>,
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        matrix_from(OperatorJson::deserialize(d)?.matrix).map_err(D::Error::custom)
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("StateVector", 2)?;
        st.serialize_field("layout", self.layout())?;
        let amps: Vec<Num> = self.amplitudes().iter().map(|&z| Num(z)).collect();
        st.serialize_field("amplitudes", &amps)?;
        st.end()
    }
}

/// A state as read from JSON. Without a layout, the amplitudes sit on a single
/// register named `SYS`.
#[derive(Clone, Debug, Deserialize)]
pub struct StateJson {
    #[serde(default)]
    pub layout: Option<RegisterLayout>,
    pub amplitudes: Vec<ComplexJson>,
}

impl StateJson {
    pub fn amplitudes(&self) -> Vec<C64> {
        self.amplitudes.iter().map(|&z| z.into()).collect()
    }

    pub fn into_state(self) -> Result<StateVector> {
        let amps = self.amplitudes();
        match self.layout {
            Some(layout) => StateVector::new(layout, amps),
            None => StateVector::on_register(crate::distinguish::SYSTEM, amps),
        }
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        StateJson::deserialize(d)?.into_state().map_err(D::Error::custom)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DensityMatrix", 2)?;
        st.serialize_field("layout", self.layout())?;
        st.serialize_field("matrix", &Matrix(self.operator()))?;
        st.end()
    }
}

#[derive(Deserialize)]
struct DensityJson {
    layout: RegisterLayout,
    matrix: Vec<Vec<ComplexJson>>,
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DensityJson::deserialize(d)?;
        matrix_from(raw.matrix)
            .and_then(|m| DensityMatrix::new(raw.layout, m))
            .map_err(D::Error::custom)
    }
}

impl Serialize for PctcCircuit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PctcCircuit", 2)?;
        st.serialize_field("layout", self.layout())?;
        st.serialize_field("unitary", &Matrix(self.unitary()))?;
        st.end()
    }
}

#[derive(Deserialize)]
struct CircuitJson {
    layout: RegisterLayout,
    unitary: Vec<Vec<ComplexJson>>,
}

impl<'de> Deserialize<'de> for PctcCircuit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CircuitJson::deserialize(d)?;
        matrix_from(raw.unitary)
            .and_then(|u| PctcCircuit::new(raw.layout, u))
            .map_err(D::Error::custom)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| PctcError::InvalidValue(format!("{what}: {e}")))
}

pub fn circuit_from_json(text: &str) -> Result<PctcCircuit> {
    parse(text, "circuit")
}

pub fn state_from_json(text: &str) -> Result<StateVector> {
    parse(text, "state")
}

pub fn density_from_json(text: &str) -> Result<DensityMatrix> {
    parse(text, "density matrix")
}

/// A list of state objects. Layouts are ignored; vectors are zero-padded to a
/// power of two on register `SYS`.
pub fn state_set_from_json(text: &str) -> Result<StateSet> {
    let raw: Vec<StateJson> = parse(text, "state set")?;
    StateSet::from_amplitudes(raw.iter().map(StateJson::amplitudes).collect())
}

#[derive(Deserialize)]
struct MeasurementJson {
    #[serde(default)]
    layout: Option<RegisterLayout>,
    operators: Vec<OperatorJson>,
    accept: Vec<usize>,
}

/// `{"layout": ..., "operators": [{"matrix": ...}, ...], "accept": [...]}`
pub fn measurement_from_json(text: &str) -> Result<(GeneralizedMeasurement, AcceptSet)> {
    let raw: MeasurementJson = parse(text, "measurement")?;
    let ops = raw.operators.into_iter().map(|o| matrix_from(o.matrix)).collect::<Result<Vec<_>>>()?;
    let dim = ops.first().map_or(0, Operator::rows);
    let layout = match raw.layout {
        Some(l) => l,
        None if dim >= 2 && dim.is_power_of_two() => {
            RegisterLayout::single(crate::distinguish::SYSTEM, dim.trailing_zeros() as usize)?
        }
        None => return Err(PctcError::Dimension(format!("operators of dimension {dim}"))),
    };
    let n = ops.len();
    let meas = GeneralizedMeasurement::new(layout, ops)?;
    Ok((meas, AcceptSet::new(raw.accept, n)?))
}

#[derive(Deserialize)]
struct EntryJson {
    p: f64,
    state: StateJson,
    label: usize,
}

/// `[{"p": .., "state": {...}, "label": ..}, ...]`
pub fn ensemble_from_json(text: &str) -> Result<LabeledEnsemble> {
    let raw: Vec<EntryJson> = parse(text, "ensemble")?;
    let entries = raw
        .into_iter()
        .map(|e| Ok(EnsembleEntry { p: e.p, state: e.state.into_state()?, label: e.label }))
        .collect::<Result<Vec<_>>>()?;
    LabeledEnsemble::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::b92_circuit;
    use crate::linalg::gates::*;

    #[test]
    fn complex_accepts_both_forms() {
        let s = state_from_json(r#"{"amplitudes": [1, [0, 1]]}"#).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[1] - c(0.0, h)).norm() < 1e-15);
        assert_eq!(s.layout(), &RegisterLayout::single("SYS", 1).unwrap());
    }

    #[test]
    fn circuit_round_trip() {
        let c = b92_circuit();
        let text = serde_json::to_string(&c).unwrap();
        let back = circuit_from_json(&text).unwrap();
        assert!(back.unitary().max_abs_diff(c.unitary()) < 1e-11);
        assert_eq!(back.layout(), c.layout());
    }

    #[test]
    fn circuit_rejects_non_unitary() {
        let text = r#"{"layout": [["SYS",1],["CTC",1]], "unitary": [[1,1,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#;
        assert!(circuit_from_json(text).is_err());
    }

    #[test]
    fn density_round_trip() {
        let rho = DensityMatrix::maximally_mixed(RegisterLayout::single("A", 1).unwrap());
        let text = serde_json::to_string(&rho).unwrap();
        assert_eq!(density_from_json(&text).unwrap(), rho);
    }

    #[test]
    fn state_set_pads() {
        let set = state_set_from_json(r#"[{"amplitudes":[1,0,0]},{"amplitudes":[0,1,1]}]"#).unwrap();
        assert_eq!(set.dim(), 4);
    }

    #[test]
    fn measurement_parses() {
        let text = r#"{"operators":[{"matrix":[[1,0],[0,0]]},{"matrix":[[0,0],[0,1]]}],"accept":[1]}"#;
        let (meas, accept) = measurement_from_json(text).unwrap();
        assert_eq!(meas.n_outcomes(), 2);
        assert!(accept.contains(1) && !accept.contains(0));
    }

    #[test]
    fn ensemble_parses() {
        let text = r#"[{"p":0.5,"state":{"amplitudes":[1,0]},"label":0},
                       {"p":0.5,"state":{"amplitudes":[1,1]},"label":1}]"#;
        let e = ensemble_from_json(text).unwrap();
        assert_eq!(e.entries().len(), 2);
        assert!((e.entries()[1].state.fidelity(&StateVector::new(e.state_layout().clone(), ket_plus()).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn serialization_rounds_to_twelve_digits() {
        let s = StateVector::new(RegisterLayout::single("SYS", 1).unwrap(), ket_plus()).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("0.707106781187"), "{text}");
    }
}
