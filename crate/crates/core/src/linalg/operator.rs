use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::layout::{insert_bits, qubits_for, RegisterLayout};
use crate::error::{PctcError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Default limit on total qubits for dense operators.
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Limit on the number of qubits a dense operator may span.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Capacity {
    pub max_qubits: usize,
}

impl Default for Capacity {
    fn default() -> Self {
        Self { max_qubits: DEFAULT_MAX_QUBITS }
    }
}

impl Capacity {
    pub fn new(max_qubits: usize) -> Self {
        Self { max_qubits }
    }

    pub fn check_qubits(&self, qubits: usize) -> Result<()> {
        if qubits > self.max_qubits {
            return Err(PctcError::Capacity { requested: qubits, limit: self.max_qubits });
        }
        Ok(())
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        let qubits = if dim <= 1 { 0 } else { qubits_for(dim) };
        self.check_qubits(qubits)
    }
}

/// Dense complex matrix stored row-major.
///
/// Unitarity is not assumed: induced operators are generally non-unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Operator {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(PctcError::Dimension("operator dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(PctcError::Dimension(format!(
                "{} entries for a {rows}x{cols} operator",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(PctcError::InvalidValue("non-finite operator entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(PctcError::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// `|ket><bra|`
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        Self::from_fn(ket.len(), bra.len(), |i, j| ket[i] * bra[j].conj())
    }

    /// Operator whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(PctcError::Dimension("columns of unequal length".into()));
        }
        Self::new(rows, columns.len(), Self::from_fn(rows, columns.len(), |i, j| columns[j][i]).data)
    }

    /// Permutation matrix sending basis state `j` to `map(j)`.
    pub fn permutation(dim: usize, map: impl Fn(usize) -> usize) -> Result<Self> {
        let mut out = Self::zeros(dim, dim);
        let mut hit = vec![false; dim];
        for j in 0..dim {
            let i = map(j);
            if i >= dim || hit[i] {
                return Err(PctcError::InvalidValue(format!("map is not a permutation at {j}")));
            }
            hit[i] = true;
            out.data[i * dim + j] = ONE;
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[cfg(test)]
    pub(crate) fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn dagger(&self) -> Self {
        const BLOCK: usize = 32;
        let mut out = Operator::zeros(self.cols, self.rows);
        for i0 in (0..self.rows).step_by(BLOCK) {
            for j0 in (0..self.cols).step_by(BLOCK) {
                for i in i0..(i0 + BLOCK).min(self.rows) {
                    for j in j0..(j0 + BLOCK).min(self.cols) {
                        out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
                    }
                }
            }
        }
        out
    }

    /// Nonzero entries of each row, as `(column, value)` pairs.
    pub fn sparse_rows(&self) -> Vec<Vec<(usize, C64)>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().enumerate().filter(|(_, v)| **v != ZERO).map(|(j, &v)| (j, v)).collect())
            .collect()
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * alpha).collect() }
    }

    pub fn matmul(&self, rhs: &Operator) -> Result<Operator> {
        if self.cols != rhs.rows {
            return Err(PctcError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Operator::zeros(self.rows, rhs.cols);
        // Circuit operators are mostly permutations; skip structural zeros.
        let rhs_rows = rhs.sparse_rows();
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, sparse) in rhs_rows.iter().enumerate() {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for &(j, b) in sparse {
                    out_row[j] += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(PctcError::Dimension(format!(
                "vector of length {} for operator with {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn tensor(&self, rhs: &Operator) -> Result<Operator> {
        self.tensor_with(rhs, Capacity::default())
    }

    /// Kronecker product; entry `(i1 i2, j1 j2)` is `a(i1,j1) b(i2,j2)`.
    pub fn tensor_with(&self, rhs: &Operator, capacity: Capacity) -> Result<Operator> {
        let rows = self.rows.checked_mul(rhs.rows);
        let cols = self.cols.checked_mul(rhs.cols);
        let (Some(rows), Some(cols)) = (rows, cols) else {
            return Err(PctcError::Capacity { requested: usize::MAX, limit: capacity.max_qubits });
        };
        capacity.check_dim(rows)?;
        capacity.check_dim(cols)?;
        Ok(Operator::from_fn(rows, cols, |i, j| {
            self.get(i / rhs.rows, j / rhs.cols) * rhs.get(i % rhs.rows, j % rhs.cols)
        }))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dims(), other.dims(), "max_abs_diff on mismatched dims");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max |(U†U - I)_ij|`
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        // row i of U†U is sum_k conj(U_ki) U_k,: over the nonzeros of column i
        let rows = self.sparse_rows();
        let mut columns: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.cols];
        for (k, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                columns[j].push((k, v));
            }
        }
        let mut acc = vec![ZERO; self.cols];
        let mut touched = vec![false; self.cols];
        let mut worst: f64 = 0.0;
        for (i, column) in columns.iter().enumerate() {
            let mut hit = vec![i];
            touched[i] = true;
            for &(k, u_ki) in column {
                for &(j, u_kj) in &rows[k] {
                    acc[j] += u_ki.conj() * u_kj;
                    if !touched[j] {
                        touched[j] = true;
                        hit.push(j);
                    }
                }
            }
            for j in hit {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((acc[j] - target).norm());
                acc[j] = ZERO;
                touched[j] = false;
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.dagger()) <= tol
    }

    /// Partial trace over one register of a square operator.
    ///
    /// Computes `sum_j (I ⊗ <j|) U (I ⊗ |j>)` with the traced register moved
    /// to the last tensor slot; the remaining registers keep their order.
    pub fn partial_trace(
        &self,
        layout: &RegisterLayout,
        traced: &str,
    ) -> Result<(Operator, RegisterLayout)> {
        self.check_layout(layout)?;
        let reduced_layout = layout.without(traced)?;
        let shift = layout.shift(traced)?;
        let width = layout.width(traced)?;
        let dim = reduced_layout.dim();
        let out = Operator::from_fn(dim, dim, |r, c| {
            (0..1usize << width)
                .map(|j| self.get(insert_bits(r, j, shift, width), insert_bits(c, j, shift, width)))
                .sum()
        });
        Ok((out, reduced_layout))
    }

    /// Traces out every register except those named in `keep` (kept in layout order).
    pub fn reduce_to(
        &self,
        layout: &RegisterLayout,
        keep: &[&str],
    ) -> Result<(Operator, RegisterLayout)> {
        for name in keep {
            layout.position(name)?;
        }
        let mut op = self.clone();
        let mut current = layout.clone();
        let traced: Vec<String> =
            layout.names().filter(|n| !keep.contains(n)).map(str::to_owned).collect();
        for name in traced {
            let (next, next_layout) = op.partial_trace(&current, &name)?;
            op = next;
            current = next_layout;
        }
        Ok((op, current))
    }

    /// Reindexes a square operator so that its registers appear in `order`.
    pub fn permute_registers(
        &self,
        layout: &RegisterLayout,
        order: &[&str],
    ) -> Result<(Operator, RegisterLayout)> {
        self.check_layout(layout)?;
        let (permuted, map) = layout.permutation(order)?;
        let n = self.rows;
        let mut out = Operator::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.data[map[i] * n + map[j]] = self.data[i * n + j];
            }
        }
        Ok((out, permuted))
    }

    /// Extends an operator acting on the registers of `sub` (a subset of
    /// `full`, in any order) to the whole of `full`, acting as identity on the
    /// remaining registers.
    pub fn embed(&self, sub: &RegisterLayout, full: &RegisterLayout) -> Result<Operator> {
        self.check_layout(sub)?;
        for r in sub.registers() {
            if full.width(&r.name)? != r.width {
                return Err(PctcError::Layout(format!(
                    "register {:?} has width {} in the sub-layout but {} in the full layout",
                    r.name,
                    r.width,
                    full.width(&r.name)?
                )));
            }
        }
        let shifts: Vec<(usize, usize, usize)> = sub
            .registers()
            .iter()
            .map(|r| Ok((full.shift(&r.name)?, sub.shift(&r.name)?, r.width)))
            .collect::<Result<_>>()?;
        let sub_mask: usize = shifts.iter().map(|&(fs, _, w)| ((1usize << w) - 1) << fs).sum();
        let to_sub = |idx: usize| -> usize {
            shifts.iter().map(|&(fs, ss, w)| ((idx >> fs) & ((1 << w) - 1)) << ss).sum()
        };
        let from_sub = |s: usize| -> usize {
            shifts.iter().map(|&(fs, ss, w)| ((s >> ss) & ((1 << w) - 1)) << fs).sum()
        };

        let rows: Vec<Vec<(usize, C64)>> = self
            .sparse_rows()
            .into_iter()
            .map(|row| row.into_iter().map(|(sj, v)| (from_sub(sj), v)).collect())
            .collect();
        let n = full.dim();
        let mut out = Operator::zeros(n, n);
        for i in 0..n {
            let rest = i & !sub_mask;
            for &(j, v) in &rows[to_sub(i)] {
                out.data[i * n + (rest | j)] = v;
            }
        }
        Ok(out)
    }

    fn check_layout(&self, layout: &RegisterLayout) -> Result<()> {
        if !self.is_square() || self.rows != layout.dim() {
            return Err(PctcError::Dimension(format!(
                "operator {}x{} does not match layout of dimension {}",
                self.rows,
                self.cols,
                layout.dim()
            )));
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims(), rhs.dims(), "operator addition on mismatched dims");
        Operator {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims(), rhs.dims(), "operator subtraction on mismatched dims");
        Operator {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs).expect("operator product on mismatched dims")
    }
}

/// Standard gates and kets used throughout.
pub mod gates {
    use super::{Operator, C64, ONE, ZERO};
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub fn r(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    pub fn ket0() -> Vec<C64> {
        vec![ONE, ZERO]
    }

    pub fn ket1() -> Vec<C64> {
        vec![ZERO, ONE]
    }

    pub fn ket_plus() -> Vec<C64> {
        vec![r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)]
    }

    pub fn ket_minus() -> Vec<C64> {
        vec![r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)]
    }

    /// Kronecker product of kets.
    pub fn kron(a: &[C64], b: &[C64]) -> Vec<C64> {
        a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
    }

    pub fn basis(dim: usize, k: usize) -> Vec<C64> {
        let mut v = vec![ZERO; dim];
        v[k] = ONE;
        v
    }

    pub fn x() -> Operator {
        Operator::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> Operator {
        Operator::new(2, 2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap()
    }

    pub fn z() -> Operator {
        Operator::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    pub fn h() -> Operator {
        let s = FRAC_1_SQRT_2;
        Operator::from_real(2, 2, &[s, s, s, -s]).unwrap()
    }

    /// `H^{⊗n}`
    pub fn h_n(n: usize) -> Operator {
        let dim = 1usize << n;
        let scale = (dim as f64).sqrt().recip();
        Operator::from_fn(dim, dim, |i, j| {
            let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            r(sign * scale)
        })
    }

    /// CNOT with the first qubit as control.
    pub fn cnot() -> Operator {
        Operator::permutation(4, |j| if j >= 2 { j ^ 1 } else { j }).unwrap()
    }

    pub fn swap() -> Operator {
        Operator::permutation(4, |j| ((j & 1) << 1) | (j >> 1)).unwrap()
    }

    /// Qudit swap `sum_{j,k} |j><k| ⊗ |k><j|` on two `dim`-level systems.
    pub fn swap_qudit(dim: usize) -> Operator {
        Operator::permutation(dim * dim, |idx| (idx % dim) * dim + idx / dim).unwrap()
    }

    /// `|0><0| ⊗ I + |1><1| ⊗ u`
    pub fn controlled(u: &Operator) -> Operator {
        let n = u.rows();
        Operator::from_fn(2 * n, 2 * n, |i, j| match (i / n, j / n) {
            (0, 0) if i == j => ONE,
            (1, 1) => u.get(i - n, j - n),
            _ => ZERO,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = Operator::identity(2);
        assert_eq!(i2.tensor(&i2).unwrap(), Operator::identity(4));
    }

    #[test]
    fn x_tensor_x_flips_both() {
        let xx = x().tensor(&x()).unwrap();
        let out = xx.apply(&basis(4, 0b00)).unwrap();
        assert_eq!(out, basis(4, 0b11));
    }

    #[test]
    fn cnot_from_projector_sum_matches_hand_written() {
        let p0 = Operator::outer(&ket0(), &ket0());
        let p1 = Operator::outer(&ket1(), &ket1());
        let built = &p0.tensor(&Operator::identity(2)).unwrap() + &p1.tensor(&x()).unwrap();
        let by_hand = Operator::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        )
        .unwrap();
        assert_eq!(built, by_hand);
        assert_eq!(cnot(), by_hand);
    }

    #[test]
    fn tensor_respects_capacity() {
        let h10 = h_n(10);
        let err = h10.tensor_with(&h10, Capacity::new(16)).unwrap_err();
        assert!(matches!(err, PctcError::Capacity { requested: 20, limit: 16 }));
    }

    #[test]
    fn partial_trace_of_product_operator() {
        let layout = RegisterLayout::new([("A", 1), ("B", 1)]).unwrap();
        let a = Operator::new(2, 2, vec![r(1.0), c(0.0, 2.0), r(-3.0), r(0.5)]).unwrap();
        let b = Operator::new(2, 2, vec![r(0.25), r(7.0), c(1.0, 1.0), c(0.75, -1.0)]).unwrap();
        let (pt, rest) = a.tensor(&b).unwrap().partial_trace(&layout, "B").unwrap();
        assert_eq!(rest, RegisterLayout::single("A", 1).unwrap());
        assert!(pt.max_abs_diff(&a.scale(b.trace())) < 1e-15);
    }

    #[test]
    fn partial_trace_of_swap_is_identity() {
        // sum_j <j|_2 SWAP |j>_2 evaluated directly on basis kets
        let layout = RegisterLayout::new([("A", 1), ("B", 1)]).unwrap();
        let mut oracle = Operator::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                let mut s = ZERO;
                for j in 0..2 {
                    s += swap().get(a * 2 + j, b * 2 + j);
                }
                oracle.set(a, b, s);
            }
        }
        let (pt, _) = swap().partial_trace(&layout, "B").unwrap();
        assert_eq!(pt, oracle);
        assert_eq!(pt, Operator::identity(2));
    }

    #[test]
    fn partial_trace_of_cnot_over_target() {
        let layout = RegisterLayout::new([("SYS", 1), ("CTC", 1)]).unwrap();
        let (pt, _) = cnot().partial_trace(&layout, "CTC").unwrap();
        let expected = Operator::outer(&ket0(), &ket0()).scale(r(2.0));
        assert_eq!(pt, expected);
    }

    #[test]
    fn partial_trace_unknown_register() {
        let layout = RegisterLayout::new([("SYS", 1), ("CTC", 1)]).unwrap();
        assert!(matches!(cnot().partial_trace(&layout, "NOPE"), Err(PctcError::Layout(_))));
    }

    #[test]
    fn permuting_cnot_reverses_it() {
        let layout = RegisterLayout::new([("c", 1), ("t", 1)]).unwrap();
        let (rev, new_layout) = cnot().permute_registers(&layout, &["t", "c"]).unwrap();
        // control on the second qubit: |ab> -> |a^b, b>
        let by_hand = Operator::permutation(4, |j| if j & 1 == 1 { j ^ 2 } else { j }).unwrap();
        assert_eq!(rev, by_hand);
        assert_eq!(new_layout.names().collect::<Vec<_>>(), vec!["t", "c"]);
    }

    #[test]
    fn embed_matches_tensor_with_identity() {
        let full = RegisterLayout::new([("A", 1), ("B", 1), ("C", 1)]).unwrap();
        let sub = RegisterLayout::new([("A", 1), ("B", 1)]).unwrap();
        let direct = cnot().tensor(&Operator::identity(2)).unwrap();
        assert_eq!(cnot().embed(&sub, &full).unwrap(), direct);

        // control C, target A, via embedding a reordered sub-layout
        let sub = RegisterLayout::new([("C", 1), ("A", 1)]).unwrap();
        let emb = cnot().embed(&sub, &full).unwrap();
        let by_hand = Operator::permutation(8, |j| if j & 1 == 1 { j ^ 4 } else { j }).unwrap();
        assert_eq!(emb, by_hand);
    }

    #[test]
    fn qudit_swap_matches_qubit_swap() {
        assert_eq!(swap_qudit(2), swap());
        assert!(swap_qudit(3).is_unitary(1e-15));
    }

    #[test]
    fn hadamard_power_is_tensor_power() {
        let h3 = h().tensor(&h()).unwrap().tensor(&h()).unwrap();
        assert!(h_n(3).max_abs_diff(&h3) < 1e-15);
    }
}
