// SPDX-License-Identifier: Apache-2.0

//! Master-equation integration for the qubits-plus-cavity density operator.

use nalgebra::DMatrix;

use crate::entanglement::{
    concurrence_block, concurrence_wootters, partial_trace_cavity, QubitState,
};
use crate::model::{build_hamiltonian, SystemConfig};
use crate::operators::{cavity_annihilation, hermiticity_defect, Operator, SpaceLayout, ZERO};
use crate::propagator::{Rk4, SectorPropagator};
use crate::{Error, Result, C64};

pub const TRACE_TOL: f64 = 1e-8;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// A run is aborted once the trace drifts this far from 1 or an eigenvalue
/// drops below minus this value.
pub const ABORT_TOL: f64 = 1e-6;

/// Density operator of the qubits plus the cavity at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    layout: SpaceLayout,
    rho: DMatrix<C64>,
    t: f64,
}

impl FullState {
    /// Checks only the shape; see [`FullState::check`] for the density
    /// matrix invariants.
    pub fn new(layout: SpaceLayout, rho: DMatrix<C64>, t: f64) -> Result<Self> {
        let d = layout.total_dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "density matrix is {}x{}, layout requires {d}x{d}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(Self { layout, rho, t })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn rho(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn trace_error(&self) -> f64 {
        (self.trace() - C64::new(1.0, 0.0)).norm()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.rho)
    }

    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_min_eigenvalue(&self.rho)
    }

    /// ⟨a†a⟩.
    pub fn photon_number(&self) -> f64 {
        (0..self.layout.total_dim())
            .map(|i| self.layout.split(i).2 as f64 * self.rho[(i, i)].re)
            .sum()
    }

    /// Unit trace, Hermiticity and positivity at the stated tolerances.
    pub fn check(&self) -> Result<()> {
        let tr = self.trace_error();
        if tr > TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "trace deviates from 1 by {tr:e}"
            )));
        }
        let herm = self.hermiticity_defect();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix is not Hermitian (defect {herm:e})"
            )));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix has eigenvalue {min:e}"
            )));
        }
        Ok(())
    }
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn hermitian_min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// True if every eigenvalue of the Hermitian part of `block` exceeds −ε,
/// decided by attempting a Cholesky factorisation of ρ + εI. nalgebra's
/// complex Cholesky takes square roots of negative pivots without
/// complaint, so the pivots are checked here.
fn bounded_below(block: &DMatrix<C64>, eps: f64) -> bool {
    let n = block.nrows();
    let mut m = hermitian_part(block);
    for j in 0..n {
        let mut pivot = m[(j, j)].re + eps;
        for k in 0..j {
            pivot -= m[(j, k)].norm_sqr();
        }
        if !(pivot > 0.0) {
            return false;
        }
        let root = pivot.sqrt();
        m[(j, j)] = C64::new(root, 0.0);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= m[(i, k)] * m[(j, k)].conj();
            }
            m[(i, j)] = v / root;
        }
    }
    true
}

/// Outcome of the positivity test on a recorded sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Positivity {
    /// Every eigenvalue is at least −1e−8 (certified by a shifted Cholesky
    /// factorisation, so the exact minimum is not computed).
    Certified,
    /// Smallest eigenvalue lies in [−1e−6, −1e−8): tolerated, reported.
    Negative(f64),
}

/// Per-sample record. Populations and coherences refer to the reduced
/// two-qubit state in the product basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Observables {
    pub c_wootters: f64,
    pub c_block: f64,
    pub rho11: f64,
    pub rho22: f64,
    pub rho33: f64,
    pub rho44: f64,
    pub abs_rho23: f64,
    pub abs_rho14: f64,
    pub n_photon: f64,
    pub trace_err: f64,
    pub hermiticity_defect: f64,
    pub positivity: Positivity,
}

impl Observables {
    /// Physical observables compared by convergence checks.
    pub const NAMES: [&'static str; 9] = [
        "C_wootters",
        "C_block",
        "rho11",
        "rho22",
        "rho33",
        "rho44",
        "abs_rho23",
        "abs_rho14",
        "n_photon",
    ];

    /// Entries of [`Observables::values`] that are smooth functions of ρ
    /// (the concurrences are clamped and |·| has a kink at zero).
    pub const SMOOTH: [usize; 5] = [2, 3, 4, 5, 8];

    pub fn values(&self) -> [f64; 9] {
        [
            self.c_wootters,
            self.c_block,
            self.rho11,
            self.rho22,
            self.rho33,
            self.rho44,
            self.abs_rho23,
            self.abs_rho14,
            self.n_photon,
        ]
    }

    fn measure(state: &FullState, reduced: &QubitState, positivity: Positivity) -> Self {
        Self {
            c_wootters: concurrence_wootters(reduced),
            c_block: concurrence_block(reduced),
            rho11: reduced.population(1),
            rho22: reduced.population(2),
            rho33: reduced.population(3),
            rho44: reduced.population(4),
            abs_rho23: reduced.element(2, 3).norm(),
            abs_rho14: reduced.element(1, 4).norm(),
            n_photon: state.photon_number(),
            trace_err: state.trace_error(),
            hermiticity_defect: state.hermiticity_defect(),
            positivity,
        }
    }
}

/// Sampled solution: one reduced state and one observable record per time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QubitState>,
    pub observables: Vec<Observables>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn series(&self, f: impl Fn(&Observables) -> f64) -> Vec<f64> {
        self.observables.iter().map(f).collect()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.series(|o| o.trace_err).into_iter().fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.series(|o| o.hermiticity_defect)
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// Samples whose smallest eigenvalue fell below −1e−8.
    pub fn positivity_violations(&self) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.observables)
            .filter_map(|(&t, o)| match o.positivity {
                Positivity::Negative(v) => Some((t, v)),
                Positivity::Certified => None,
            })
            .collect()
    }

    /// Sample indices where the block formula and the Wootters value differ
    /// by more than `tol`.
    pub fn concurrence_discrepancies(&self, tol: f64) -> Vec<usize> {
        self.observables
            .iter()
            .enumerate()
            .filter(|(_, o)| (o.c_wootters - o.c_block).abs() > tol)
            .map(|(i, _)| i)
            .collect()
    }
}

/// dρ/dt = −i[H, ρ] − ½κ(a†aρ + ρa†a − 2aρa†), evaluated densely.
pub fn lindblad_rhs(
    state: &FullState,
    h: &Operator,
    kappa: f64,
    a: &Operator,
) -> Result<DMatrix<C64>> {
    for op in [h, a] {
        if op.layout() != state.layout() {
            return Err(Error::LayoutMismatch {
                left: op.layout().factor_dims().to_vec(),
                right: state.layout().factor_dims().to_vec(),
            });
        }
    }
    let rho = state.rho();
    let h = h.matrix();
    let a = a.matrix();
    let ad = a.adjoint();
    let n = &ad * a;
    let minus_i = C64::new(0.0, -1.0);
    let coherent = (h * rho - rho * h) * minus_i;
    let dissipative =
        (&n * rho + rho * &n - (a * rho * &ad) * C64::new(2.0, 0.0)) * C64::new(-0.5 * kappa, 0.0);
    Ok(coherent + dissipative)
}

/// Integration controls for [`evolve_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub dt: f64,
    pub n_steps: usize,
    pub sample_every: usize,
}

impl StepControl {
    pub fn from_config(config: &SystemConfig) -> Self {
        Self {
            dt: config.dt,
            n_steps: config.n_steps(),
            sample_every: config.sample_every,
        }
    }
}

/// Integrates from `rho0` with the Hamiltonian and cavity loss described by
/// `config`.
pub fn evolve(rho0: &FullState, config: &SystemConfig) -> Result<Trajectory> {
    config.validate()?;
    let layout = config.layout()?;
    if rho0.layout() != &layout {
        return Err(Error::InvalidArgument(format!(
            "initial state has layout {:?}, config requires {:?}",
            rho0.layout().factor_dims(),
            layout.factor_dims()
        )));
    }
    let h = build_hamiltonian(config)?;
    let a = cavity_annihilation(&layout)?;
    evolve_with(rho0, &h, config.kappa, &a, StepControl::from_config(config))
}

/// Classical RK4 with fixed step, sampling at step 0, every
/// `sample_every` steps, and at the final step.
pub fn evolve_with(
    rho0: &FullState,
    h: &Operator,
    kappa: f64,
    a: &Operator,
    control: StepControl,
) -> Result<Trajectory> {
    rho0.check()?;
    if h.layout() != rho0.layout() || a.layout() != rho0.layout() {
        return Err(Error::LayoutMismatch {
            left: h.layout().factor_dims().to_vec(),
            right: rho0.layout().factor_dims().to_vec(),
        });
    }
    if !(control.dt > 0.0) || control.n_steps == 0 || control.sample_every == 0 {
        return Err(Error::InvalidArgument(format!(
            "bad step control {control:?}"
        )));
    }

    let prop = SectorPropagator::new(h.matrix(), kappa, a.matrix(), rho0.rho());
    let mut x = prop.pack(rho0.rho());
    let mut rk4 = Rk4::new(prop.len());
    let mut traj = Trajectory::default();
    let t0 = rho0.t();

    record(&prop, &x, rho0.layout(), t0, &mut traj)?;
    for step in 1..=control.n_steps {
        rk4.step(&prop, &mut x, control.dt);
        let t = t0 + step as f64 * control.dt;
        let drift = (prop.trace(&x) - C64::new(1.0, 0.0)).norm();
        if !(drift <= ABORT_TOL) {
            return Err(Error::Integration {
                time: t,
                reason: format!("trace drifted by {drift:e}"),
            });
        }
        if step % control.sample_every == 0 || step == control.n_steps {
            record(&prop, &x, rho0.layout(), t, &mut traj)?;
        }
    }
    Ok(traj)
}

fn record(
    prop: &SectorPropagator,
    x: &[C64],
    layout: &SpaceLayout,
    t: f64,
    traj: &mut Trajectory,
) -> Result<()> {
    let blocks = prop.blocks(x);
    let positivity = if blocks.iter().all(|b| bounded_below(b, POSITIVITY_TOL)) {
        Positivity::Certified
    } else {
        let min = blocks
            .iter()
            .map(hermitian_min_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        if !(min >= -ABORT_TOL) {
            return Err(Error::Integration {
                time: t,
                reason: format!("density matrix eigenvalue {min:e}"),
            });
        }
        Positivity::Negative(min)
    };
    let state = FullState::new(layout.clone(), prop.unpack(x), t)?;
    let reduced = partial_trace_cavity(&state);
    traj.observables
        .push(Observables::measure(&state, &reduced, positivity));
    traj.states.push(reduced);
    traj.times.push(t);
    Ok(())
}

/// Sum of |ρᵢⱼ| over entries that couple the given full-space indices to
/// anything outside them; zero means the subspace is dynamically closed.
pub fn leakage(rho: &DMatrix<C64>, subspace: &[usize]) -> f64 {
    let d = rho.nrows();
    let inside: Vec<bool> = (0..d).map(|i| subspace.contains(&i)).collect();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            if !(inside[i] && inside[j]) && rho[(i, j)] != ZERO {
                total += rho[(i, j)].norm();
            }
        }
    }
    total
}
