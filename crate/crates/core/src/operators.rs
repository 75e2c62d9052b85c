// SPDX-License-Identifier: Apache-2.0

//! Operators on the composite space qubit 1 ⊗ qubit 2 ⊗ truncated cavity.
//!
//! Composite indices are row-major over the factors (qubit 1 slowest, cavity
//! fastest). Each qubit factor uses index 0 for |↓⟩ and 1 for |↑⟩, with
//! σᶻ|↑⟩ = +|↑⟩.
//!
//! The reduced two-qubit basis used everywhere else is
//! |1⟩ = |↓↓⟩, |2⟩ = |↑↓⟩, |3⟩ = |↓↑⟩, |4⟩ = |↑↑⟩, i.e. qubit 1 is the
//! *fastest* label there. [`pair_index`] converts between the two.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Factor dimensions of the composite space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceLayout {
    factor_dims: [usize; 3],
}

impl SpaceLayout {
    pub const QUBIT_1: usize = 0;
    pub const QUBIT_2: usize = 1;
    pub const CAVITY: usize = 2;

    /// Two qubits and a cavity truncated at `n_max` photons.
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidArgument(format!(
                "cavity truncation n_max must be at least 1, got {n_max}"
            )));
        }
        Ok(Self {
            factor_dims: [2, 2, n_max + 1],
        })
    }

    pub fn factor_dims(&self) -> &[usize; 3] {
        &self.factor_dims
    }

    pub fn n_max(&self) -> usize {
        self.factor_dims[2] - 1
    }

    pub fn cavity_dim(&self) -> usize {
        self.factor_dims[2]
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Composite index of (qubit 1, qubit 2, photon number).
    pub fn join(&self, q1: usize, q2: usize, n: usize) -> usize {
        debug_assert!(q1 < 2 && q2 < 2 && n < self.cavity_dim());
        (q1 * 2 + q2) * self.cavity_dim() + n
    }

    /// Inverse of [`SpaceLayout::join`].
    pub fn split(&self, index: usize) -> (usize, usize, usize) {
        let nc = self.cavity_dim();
        let q = index / nc;
        (q / 2, q % 2, index % nc)
    }

    /// Full-space basis vector |q1 q2⟩|n⟩ (0 = down, 1 = up).
    pub fn basis_vector(&self, q1: usize, q2: usize, n: usize) -> DVector<C64> {
        let mut v = DVector::zeros(self.total_dim());
        v[self.join(q1, q2, n)] = ONE;
        v
    }
}

/// Position (0-based) of the product state |q1 q2⟩ in the reduced two-qubit
/// basis |↓↓⟩, |↑↓⟩, |↓↑⟩, |↑↑⟩.
pub fn pair_index(q1: usize, q2: usize) -> usize {
    q1 + 2 * q2
}

/// Dense operator tagged with the layout it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: SpaceLayout,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(layout: SpaceLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "operator is {}x{}, layout requires {d}x{d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { layout, matrix })
    }

    pub fn zeros(layout: &SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self {
            layout: layout.clone(),
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(layout: &SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self {
            layout: layout.clone(),
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    fn check_layout(&self, other: &Operator) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch {
                left: self.layout.factor_dims.to_vec(),
                right: other.layout.factor_dims.to_vec(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        self.check_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Self {
            layout: self.layout.clone(),
            matrix: &self.matrix * factor,
        }
    }

    pub fn adjoint(&self) -> Operator {
        Self {
            layout: self.layout.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// max |H − H†|.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    /// ⟨ψ|O|ψ⟩ for a full-space vector.
    pub fn expectation(&self, psi: &DVector<C64>) -> C64 {
        psi.dotc(&(&self.matrix * psi))
    }

    /// Tr(O ρ) for a full-space density matrix.
    pub fn expectation_in(&self, rho: &DMatrix<C64>) -> C64 {
        let d = self.matrix.nrows();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.matrix[(i, k)] * rho[(k, i)];
            }
        }
        acc
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn sigma_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE])
}

/// σ⁺ = |↑⟩⟨↓|.
pub fn sigma_plus() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}

/// σ⁻ = |↓⟩⟨↑|.
pub fn sigma_minus() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

/// Bosonic lowering operator on Fock states |0⟩..|n_max⟩.
pub fn annihilation(n_max: usize) -> Result<DMatrix<C64>> {
    if n_max < 1 {
        return Err(Error::InvalidArgument(format!(
            "cavity truncation n_max must be at least 1, got {n_max}"
        )));
    }
    let mut a = DMatrix::zeros(n_max + 1, n_max + 1);
    for n in 1..=n_max {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn creation(n_max: usize) -> Result<DMatrix<C64>> {
    Ok(annihilation(n_max)?.adjoint())
}

/// I ⊗ … ⊗ op ⊗ … ⊗ I with `op` in factor `slot`.
pub fn embed(op: &DMatrix<C64>, slot: usize, layout: &SpaceLayout) -> Result<Operator> {
    let dims = layout.factor_dims();
    let Some(&dim) = dims.get(slot) else {
        return Err(Error::InvalidArgument(format!(
            "no factor slot {slot} in a 3-factor layout"
        )));
    };
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::InvalidArgument(format!(
            "slot {slot} has dimension {dim}, operator is {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    let mut full = DMatrix::<C64>::identity(1, 1);
    for (s, &d) in dims.iter().enumerate() {
        full = if s == slot {
            full.kronecker(op)
        } else {
            full.kronecker(&DMatrix::identity(d, d))
        };
    }
    Operator::new(layout.clone(), full)
}

/// Cavity lowering operator on the full space.
pub fn cavity_annihilation(layout: &SpaceLayout) -> Result<Operator> {
    embed(&annihilation(layout.n_max())?, SpaceLayout::CAVITY, layout)
}

/// N = σ⁺₁σ⁻₁ + σ⁺₂σ⁻₂ + a†a.
pub fn total_excitation(layout: &SpaceLayout) -> Operator {
    let d = layout.total_dim();
    let diag = DVector::from_fn(d, |i, _| {
        let (q1, q2, n) = layout.split(i);
        C64::new((q1 + q2 + n) as f64, 0.0)
    });
    Operator {
        layout: layout.clone(),
        matrix: DMatrix::from_diagonal(&diag),
    }
}

/// Product basis state |index⟩ for index 1..=4 (|↓↓⟩, |↑↓⟩, |↓↑⟩, |↑↑⟩).
pub fn qubit_basis_state(index: usize) -> Result<DVector<C64>> {
    if !(1..=4).contains(&index) {
        return Err(Error::InvalidArgument(format!(
            "two-qubit basis index must be in 1..=4, got {index}"
        )));
    }
    let mut v = DVector::zeros(4);
    v[index - 1] = ONE;
    Ok(v)
}

/// `op1` on qubit 1 and `op2` on qubit 2, written in the reduced product
/// basis (qubit 1 fastest).
pub fn two_qubit_product(op1: &DMatrix<C64>, op2: &DMatrix<C64>) -> DMatrix<C64> {
    op2.kronecker(op1)
}
