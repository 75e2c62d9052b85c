// SPDX-License-Identifier: Apache-2.0

//! Physical configuration, position-dependent couplings and the two
//! Hamiltonians (full dipole coupling and its rotating-wave truncation).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::evolution::FullState;
use crate::operators::{
    cavity_annihilation, embed, pair_index, sigma_minus, sigma_plus, sigma_z, Operator,
    SpaceLayout, ONE, ZERO,
};
use crate::{Error, Result, C64};

/// Which qubit-field interaction is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// Rotating-wave approximation: σ⁻a† + aσ⁺ only.
    Rwa,
    /// Full coupling σˣ(a + a†), counter-rotating terms included.
    NonRwa,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Rwa, Mode::NonRwa];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rwa => "rwa",
            Mode::NonRwa => "nonrwa",
        }
    }

    /// Smallest truncation accepted for this mode.
    pub fn min_n_max(self) -> usize {
        match self {
            Mode::Rwa => 1,
            Mode::NonRwa => 3,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rwa" => Ok(Mode::Rwa),
            "nonrwa" | "non-rwa" | "non_rwa" => Ok(Mode::NonRwa),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode '{other}', expected rwa or nonrwa"
            ))),
        }
    }
}

/// The four Bell states |s⟩, |a⟩, |α⟩, |β⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellKind {
    S,
    A,
    Alpha,
    Beta,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [BellKind::S, BellKind::A, BellKind::Alpha, BellKind::Beta];

    pub fn as_str(self) -> &'static str {
        match self {
            BellKind::S => "s",
            BellKind::A => "a",
            BellKind::Alpha => "alpha",
            BellKind::Beta => "beta",
        }
    }

    /// Amplitudes in the product basis |↓↓⟩, |↑↓⟩, |↓↑⟩, |↑↑⟩.
    pub fn amplitudes(self) -> [f64; 4] {
        let h = FRAC_1_SQRT_2;
        match self {
            BellKind::S => [0.0, h, h, 0.0],
            BellKind::A => [0.0, h, -h, 0.0],
            BellKind::Alpha => [h, 0.0, 0.0, h],
            BellKind::Beta => [-h, 0.0, 0.0, h],
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s" => Ok(BellKind::S),
            "a" => Ok(BellKind::A),
            "alpha" => Ok(BellKind::Alpha),
            "beta" => Ok(BellKind::Beta),
            other => Err(Error::InvalidArgument(format!(
                "unknown initial state '{other}', expected one of s, a, alpha, beta"
            ))),
        }
    }
}

/// Physical and numerical parameters of one run.
///
/// Frequencies and rates are in units of ω, lengths in units of λ and times
/// in units of 1/ω; `omega` and `wavelength` are kept as fields so that
/// the scaling is explicit, and default to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub omega: f64,
    pub omega0: f64,
    pub g0: f64,
    pub kappa: f64,
    /// Cavity size L.
    pub cavity_length: f64,
    /// Cavity wavelength λ.
    pub wavelength: f64,
    /// Inter-qubit distance d.
    pub distance: f64,
    pub n_max: usize,
    pub mode: Mode,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
}

impl SystemConfig {
    pub const DEFAULT_N_MAX: usize = 44;
    pub const DEFAULT_DT: f64 = 1e-3;
    pub const DEFAULT_T_END: f64 = 20.0;
    pub const DEFAULT_SAMPLE_EVERY: usize = 10;

    /// Number of integrator steps from 0 to `t_end`.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn layout(&self) -> Result<SpaceLayout> {
        SpaceLayout::new(self.n_max)
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    pub fn with_distance(&self, distance: f64) -> Self {
        Self {
            distance,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        let finite = [
            ("omega", self.omega),
            ("omega0", self.omega0),
            ("g0", self.g0),
            ("kappa", self.kappa),
            ("L", self.cavity_length),
            ("lambda", self.wavelength),
            ("d", self.distance),
            ("dt", self.dt),
            ("t_end", self.t_end),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return fail(format!("{name} must be finite, got {v}"));
            }
        }
        if self.omega <= 0.0 {
            return fail(format!("omega > 0 violated (omega = {})", self.omega));
        }
        if self.omega0 <= 0.0 {
            return fail(format!("omega0 > 0 violated (omega0 = {})", self.omega0));
        }
        if self.g0 < 0.0 {
            return fail(format!("g0 >= 0 violated (g0 = {})", self.g0));
        }
        if self.kappa < 0.0 {
            return fail(format!("kappa >= 0 violated (kappa = {})", self.kappa));
        }
        if self.cavity_length <= 0.0 {
            return fail(format!("L > 0 violated (L = {})", self.cavity_length));
        }
        if self.wavelength <= 0.0 {
            return fail(format!(
                "lambda > 0 violated (lambda = {})",
                self.wavelength
            ));
        }
        if self.distance < 0.0 || self.distance > self.cavity_length {
            return fail(format!(
                "0 <= d <= L violated (d = {}, L = {})",
                self.distance, self.cavity_length
            ));
        }
        if self.n_max < self.mode.min_n_max() {
            return fail(format!(
                "n_max >= {} required for mode {} (n_max = {})",
                self.mode.min_n_max(),
                self.mode,
                self.n_max
            ));
        }
        if self.dt <= 0.0 {
            return fail(format!("dt > 0 violated (dt = {})", self.dt));
        }
        if self.t_end <= 0.0 {
            return fail(format!("t_end > 0 violated (t_end = {})", self.t_end));
        }
        if self.sample_every < 1 {
            return fail("sample_every >= 1 violated (sample_every = 0)".into());
        }
        let steps = self.t_end / self.dt;
        if steps < 0.5 || (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return fail(format!(
                "t_end must be a whole number of dt steps (t_end = {}, dt = {})",
                self.t_end, self.dt
            ));
        }
        Ok(())
    }
}

impl Default for SystemConfig {
    /// Strong-coupling parameters: g₀ = ω, (ω − ω₀)/ω = 0.01, κ = 0.1ω,
    /// L = λ/2, qubits at the antinode.
    fn default() -> Self {
        Self {
            omega: 1.0,
            omega0: 0.99,
            g0: 1.0,
            kappa: 0.1,
            cavity_length: 0.5,
            wavelength: 1.0,
            distance: 0.0,
            n_max: Self::DEFAULT_N_MAX,
            mode: Mode::NonRwa,
            dt: Self::DEFAULT_DT,
            t_end: Self::DEFAULT_T_END,
            sample_every: Self::DEFAULT_SAMPLE_EVERY,
        }
    }
}

/// Per-qubit coupling strengths g(r₁), g(r₂).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingPair {
    pub g1: f64,
    pub g2: f64,
}

/// g(r₁,₂) = g₀ sin[π(L ∓ d)/λ], for any real `d`.
pub fn standing_wave_couplings(
    g0: f64,
    cavity_length: f64,
    wavelength: f64,
    distance: f64,
) -> CouplingPair {
    CouplingPair {
        g1: g0 * (PI * (cavity_length - distance) / wavelength).sin(),
        g2: g0 * (PI * (cavity_length + distance) / wavelength).sin(),
    }
}

pub fn coupling_constants(config: &SystemConfig) -> CouplingPair {
    standing_wave_couplings(
        config.g0,
        config.cavity_length,
        config.wavelength,
        config.distance,
    )
}

/// Hamiltonian (ħ = 1) on the standard layout for `config.n_max`.
pub fn build_hamiltonian(config: &SystemConfig) -> Result<Operator> {
    config.validate()?;
    let layout = config.layout()?;
    let a = cavity_annihilation(&layout)?;
    let ad = a.adjoint();

    let z1 = embed(&sigma_z(), SpaceLayout::QUBIT_1, &layout)?;
    let z2 = embed(&sigma_z(), SpaceLayout::QUBIT_2, &layout)?;
    let mut h = z1.add(&z2)?.scale(C64::new(0.5 * config.omega0, 0.0));
    h = h.add(&ad.mul(&a)?.scale(C64::new(config.omega, 0.0)))?;

    let CouplingPair { g1, g2 } = coupling_constants(config);
    for (slot, g) in [(SpaceLayout::QUBIT_1, g1), (SpaceLayout::QUBIT_2, g2)] {
        let g = C64::new(g, 0.0);
        let up = embed(&sigma_plus(), slot, &layout)?;
        let down = embed(&sigma_minus(), slot, &layout)?;
        let interaction = match config.mode {
            Mode::NonRwa => {
                let sx = up.add(&down)?;
                sx.mul(&ad)?.scale(g).add(&a.mul(&sx)?.scale(g.conj()))?
            }
            Mode::Rwa => down.mul(&ad)?.scale(g).add(&a.mul(&up)?.scale(g.conj()))?,
        };
        h = h.add(&interaction)?;
    }
    Ok(h)
}

/// |ψ⟩⟨ψ| ⊗ |0⟩⟨0| for a Bell state ψ and the cavity vacuum.
pub fn initial_state(kind: BellKind, layout: &SpaceLayout) -> FullState {
    let amps = kind.amplitudes();
    let mut psi = DVector::from_element(layout.total_dim(), ZERO);
    for q1 in 0..2 {
        for q2 in 0..2 {
            psi[layout.join(q1, q2, 0)] = ONE * amps[pair_index(q1, q2)];
        }
    }
    let rho: DMatrix<C64> = &psi * psi.adjoint();
    FullState::new(layout.clone(), rho, 0.0).expect("pure state has the layout's dimension")
}
