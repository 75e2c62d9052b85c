// SPDX-License-Identifier: Apache-2.0

//! Reduced two-qubit states and concurrence.
//!
//! Three routes to the concurrence are provided:
//! - [`concurrence_wootters`]: the general spin-flip construction, valid for
//!   any two-qubit state;
//! - [`concurrence_block`]: the closed form 2|ρ₂₃| − 2√(ρ₁₁ρ₄₄), exact only
//!   for states whose sole coherence is ρ₂₃;
//! - [`concurrence_bell`]: the same closed form written in the Bell basis.
//!
//! Under the full (non-RWA) dynamics ρ₁₄ becomes nonzero and the block form
//! is a lower bound on the Wootters value, so both are carried together.

use nalgebra::{Matrix4, SymmetricEigen};

use crate::evolution::FullState;
use crate::model::BellKind;
use crate::operators::{pair_index, ZERO};
use crate::{Error, Result, C64};

/// Tolerances a reduced state must meet.
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Two-qubit density matrix in the product basis |↓↓⟩, |↑↓⟩, |↓↑⟩, |↑↑⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitState {
    rho4: Matrix4<C64>,
}

/// Two-qubit density matrix in the Bell basis |s⟩, |a⟩, |α⟩, |β⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct BellState {
    rho_bell: Matrix4<C64>,
}

fn check_density(m: &Matrix4<C64>) -> Result<()> {
    let herm = (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if herm > HERMITICITY_TOL {
        return Err(Error::InvalidArgument(format!(
            "matrix is not Hermitian (defect {herm:e})"
        )));
    }
    let tr = m.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
        return Err(Error::InvalidArgument(format!("trace is {tr}, expected 1")));
    }
    let min = hermitian_min_eigenvalue(m);
    if min < -POSITIVITY_TOL {
        return Err(Error::InvalidArgument(format!(
            "negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

fn hermitian_min_eigenvalue(m: &Matrix4<C64>) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

impl QubitState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho4: Matrix4<C64>) -> Result<Self> {
        check_density(&rho4)?;
        Ok(Self { rho4 })
    }

    /// Skips validation; used for states produced by a trace-preserving
    /// map of an already checked state.
    pub(crate) fn from_matrix_unchecked(rho4: Matrix4<C64>) -> Self {
        Self { rho4 }
    }

    pub fn bell(kind: BellKind) -> Self {
        let v = kind.amplitudes();
        Self {
            rho4: Matrix4::from_fn(|i, j| C64::new(v[i] * v[j], 0.0)),
        }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.rho4
    }

    /// Element ρ_jk with the 1-based labels used for the product basis.
    pub fn element(&self, j: usize, k: usize) -> C64 {
        self.rho4[(j - 1, k - 1)]
    }

    pub fn population(&self, j: usize) -> f64 {
        self.element(j, j).re
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let h = (self.rho4 + self.rho4.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }
}

impl BellState {
    pub fn new(rho_bell: Matrix4<C64>) -> Result<Self> {
        check_density(&rho_bell)?;
        Ok(Self { rho_bell })
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.rho_bell
    }

    /// Back to the product basis.
    pub fn to_product(&self) -> QubitState {
        let u = bell_unitary();
        QubitState::from_matrix_unchecked(u.adjoint() * self.rho_bell * u)
    }
}

/// Rows ⟨s|, ⟨a|, ⟨α|, ⟨β| in the product basis.
pub fn bell_unitary() -> Matrix4<C64> {
    let rows = BellKind::ALL.map(BellKind::amplitudes);
    Matrix4::from_fn(|i, j| C64::new(rows[i][j], 0.0))
}

/// Tr over the cavity: ρ̃_{jk} = Σₙ ⟨j,n|ρ|k,n⟩.
pub fn partial_trace_cavity(state: &FullState) -> QubitState {
    let layout = state.layout();
    let rho = state.rho();
    let nc = layout.cavity_dim();
    let mut rho4 = Matrix4::from_element(ZERO);
    for (i1, i2, j1, j2) in qubit_index_pairs() {
        let mut acc = ZERO;
        for n in 0..nc {
            acc += rho[(layout.join(i1, i2, n), layout.join(j1, j2, n))];
        }
        rho4[(pair_index(i1, i2), pair_index(j1, j2))] = acc;
    }
    QubitState::from_matrix_unchecked(rho4)
}

fn qubit_index_pairs() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|k| ((k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1))
}

/// σʸ⊗σʸ: real, symmetric, anti-diagonal (−1, 1, 1, −1).
fn sigma_yy() -> Matrix4<C64> {
    let mut yy = Matrix4::from_element(ZERO);
    for (i, s) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        yy[(i, 3 - i)] = C64::new(s, 0.0);
    }
    yy
}

#[cfg(test)]
fn spin_flip(rho: &Matrix4<C64>) -> Matrix4<C64> {
    let yy = sigma_yy();
    yy * rho.conjugate() * yy
}

const SVD_MAX_ITER: usize = 500;

/// Wootters concurrence max{0, s₁ − s₂ − s₃ − s₄}, where sᵢ² are the
/// descending eigenvalues of ρ·ρ̃.
///
/// The sᵢ are computed as the singular values of τ = Wᵀ(σʸ⊗σʸ)W with
/// ρ = WW†, since τ†τ is similar to ρρ̃. Rounding in ρ reaches τ
/// quadratically, so eigenvalues of ρρ̃ that vanish exactly do not turn into
/// √ε ≈ 1e−8 errors in C.
pub fn concurrence_wootters(q: &QubitState) -> f64 {
    let rho = q.matrix();
    let eig = SymmetricEigen::new((rho + rho.adjoint()) * C64::new(0.5, 0.0));
    let roots = eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0));
    let w = eig.eigenvectors * Matrix4::from_diagonal(&roots);
    let tau = w.transpose() * sigma_yy() * w;
    let mut s: Vec<f64> = match tau.try_svd(false, false, f64::EPSILON, SVD_MAX_ITER) {
        Some(svd) => svd.singular_values.iter().cloned().collect(),
        None => SymmetricEigen::new(tau.adjoint() * tau)
            .eigenvalues
            .iter()
            .map(|x| x.max(0.0).sqrt())
            .collect(),
    };
    s.sort_by(|a, b| b.total_cmp(a));
    (s[0] - s[1] - s[2] - s[3]).max(0.0)
}

/// 2|ρ₂₃| − 2√(ρ₁₁ρ₄₄) before clamping at zero.
pub fn concurrence_block_raw(q: &QubitState) -> f64 {
    let coherence = q.element(2, 3).norm();
    let corr = (q.population(1) * q.population(4)).max(0.0);
    2.0 * coherence - 2.0 * corr.sqrt()
}

/// max{0, 2|ρ₂₃| − 2√(ρ₁₁ρ₄₄)}, using only those four entries.
pub fn concurrence_block(q: &QubitState) -> f64 {
    concurrence_block_raw(q).max(0.0)
}

/// ρ ↦ UρU† with U's rows the Bell states.
pub fn bell_transform(q: &QubitState) -> BellState {
    let u = bell_unitary();
    BellState {
        rho_bell: u * q.matrix() * u.adjoint(),
    }
}

const RADICAND_TOL: f64 = 1e-12;

fn radical(value: C64, what: &str) -> Result<f64> {
    let x = value.re;
    if x < -RADICAND_TOL {
        return Err(Error::NumericalDomain(format!("{what} radicand is {x:e}")));
    }
    Ok(x.max(0.0).sqrt())
}

/// √[(ρ_ss−ρ_aa)² − (ρ_sa−ρ_as)²] − √[(ρ_αα+ρ_ββ)² − (ρ_αβ+ρ_βα)²].
pub fn concurrence_bell_raw(b: &BellState) -> Result<f64> {
    let m = b.matrix();
    let (s, a, al, be) = (0, 1, 2, 3);
    let anti = (m[(s, s)] - m[(a, a)]).powi(2) - (m[(s, a)] - m[(a, s)]).powi(2);
    let corr = (m[(al, al)] + m[(be, be)]).powi(2) - (m[(al, be)] + m[(be, al)]).powi(2);
    Ok(radical(anti, "anti-correlated")? - radical(corr, "correlated")?)
}

pub fn concurrence_bell(b: &BellState) -> Result<f64> {
    Ok(concurrence_bell_raw(b)?.max(0.0))
}
