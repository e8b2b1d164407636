//! Hamiltonian builders: lab frame, drive rotating frame, dressed-qubit
//! decomposition, and the effective conditional generator.
//!
//! Everything is in angular-frequency units with ħ = 1. The lab-frame
//! Hamiltonian is
//!
//! ```text
//! H(t) = Σ_k ω_k a†_k a_k + (ω_q/2) σ_z
//!      + Σ_l g_l σ_+ Â_l + g_l* σ_- Â_l†
//!      + (Ω/2)(e^{-iω_d t} σ_+ + e^{+iω_d t} σ_-)
//! ```
//!
//! and the drive rotating frame replaces the free part by detunings
//! `δ_k`, `Δ` and attaches the residual phase `e^{iχ_A t}` to each
//! interaction term.

use ndarray::prelude::*;
use ndarray::linalg::kron;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{
    embed, ladder, monomial_on_modes, qubit_operator, LadderKind, HilbertSpec, Operator,
    QubitKind, Slot,
};
use crate::interaction::{
    frame_fraction, FrameIntegers, InteractionTerm,
};

/// Full physical description of the driven qubit-multimode system.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    qubit_freq: f64,
    mode_freqs: Vec<f64>,
    terms: Vec<InteractionTerm>,
    drive_strength: f64,
    drive_freq: f64,
}

impl SystemSpec {
    pub fn new(
        qubit_freq: f64,
        mode_freqs: Vec<f64>,
        terms: Vec<InteractionTerm>,
        drive_strength: f64,
        drive_freq: f64,
    ) -> Result<Self> {
        if mode_freqs.iter().any(|&w| w <= 0.0) {
            return Err(Error::SpecMismatch("mode frequencies must be positive".into()));
        }
        if drive_strength < 0.0 {
            return Err(Error::SpecMismatch("drive strength must be non-negative".into()));
        }
        for t in &terms {
            if t.n_modes() != mode_freqs.len() {
                return Err(Error::TermShape {
                    expected: mode_freqs.len(),
                    got: t.n_modes(),
                });
            }
        }
        Ok(Self {
            qubit_freq,
            mode_freqs,
            terms,
            drive_strength,
            drive_freq,
        })
    }

    pub fn qubit_freq(&self) -> f64 {
        self.qubit_freq
    }

    pub fn mode_freqs(&self) -> &[f64] {
        &self.mode_freqs
    }

    pub fn n_modes(&self) -> usize {
        self.mode_freqs.len()
    }

    pub fn terms(&self) -> &[InteractionTerm] {
        &self.terms
    }

    pub fn drive_strength(&self) -> f64 {
        self.drive_strength
    }

    pub fn drive_freq(&self) -> f64 {
        self.drive_freq
    }

    /// Qubit detuning `Δ = ω_q - ω_d`.
    pub fn qubit_detuning(&self) -> f64 {
        self.qubit_freq - self.drive_freq
    }

    /// Largest coupling magnitude over the interaction terms.
    pub fn max_coupling(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.strength().norm())
            .fold(0.0, f64::max)
    }

    pub fn with_drive_freq(&self, drive_freq: f64) -> Self {
        Self {
            drive_freq,
            ..self.clone()
        }
    }

    pub fn with_drive_strength(&self, drive_strength: f64) -> Self {
        Self {
            drive_strength,
            ..self.clone()
        }
    }

    /// Same system with every coupling magnitude scaled by `factor`.
    pub fn with_coupling_scale(&self, factor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| t.with_strength(t.strength() * factor))
                .collect(),
            ..self.clone()
        }
    }

    fn check_layout(&self, h: &HilbertSpec) -> Result<()> {
        if h.n_modes() != self.mode_freqs.len() {
            return Err(Error::SpecMismatch(format!(
                "system has {} modes but layout has {}",
                self.mode_freqs.len(),
                h.n_modes()
            )));
        }
        Ok(())
    }
}

/// Eigenbasis of the driven-qubit block `(Δσ_z + Ωσ_x)/2`.
#[derive(Debug, Clone)]
pub struct DressedQubit {
    /// Splitting `ε = √(Ω² + Δ²)`.
    pub splitting: f64,
    /// Mixing angle θ with `sin θ = Ω/ε`, `cos θ = Δ/ε`.
    pub mixing_angle: f64,
    pub plus_state: [C64; 2],
    pub minus_state: [C64; 2],
}

impl DressedQubit {
    pub fn projector_plus(&self) -> Array2<C64> {
        qubit_operator(QubitKind::ProjDressedPlus(self.mixing_angle))
    }

    pub fn projector_minus(&self) -> Array2<C64> {
        qubit_operator(QubitKind::ProjDressedMinus(self.mixing_angle))
    }

    /// Dressed population difference `|+̄⟩⟨+̄| - |−̄⟩⟨−̄|`.
    pub fn population_difference(&self) -> Array2<C64> {
        self.projector_plus() - self.projector_minus()
    }

    /// Full-space state `|±̄⟩ ⊗ |fock⟩`.
    pub fn product_state(&self, plus: bool, h: &HilbertSpec, fock: &[usize]) -> Array1<C64> {
        let qubit = if plus { self.plus_state } else { self.minus_state };
        let mut psi = Array1::zeros(h.total_dim());
        psi[h.basis_index(0, fock)] = qubit[0];
        psi[h.basis_index(1, fock)] = qubit[1];
        psi
    }
}

/// Dressed basis of the driven qubit. θ comes from the two-argument
/// arctangent of (Ω, Δ) so that Δ = 0 gives θ = π/2 and the Δ > 0, Ω → 0
/// limit gives θ → 0.
pub fn dressed_qubit(drive_strength: f64, detuning: f64) -> Result<DressedQubit> {
    let splitting = drive_strength.hypot(detuning);
    if splitting == 0.0 {
        return Err(Error::DegenerateDressing);
    }
    let theta = drive_strength.atan2(detuning);
    let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    Ok(DressedQubit {
        splitting,
        mixing_angle: theta,
        plus_state: [C64::new(s, 0.0), C64::new(c, 0.0)],
        minus_state: [C64::new(c, 0.0), C64::new(-s, 0.0)],
    })
}

/// Static part `H_0 = Σ_k ω_k a†_k a_k + (ω_q/2) σ_z`.
pub fn build_static(spec: &SystemSpec, h: &HilbertSpec) -> Result<Operator> {
    spec.check_layout(h)?;
    let mut m = embed(&qubit_operator(QubitKind::SigmaZ), Slot::Qubit, h)?
        .into_matrix()
        * C64::new(spec.qubit_freq() / 2.0, 0.0);
    for (k, &w) in spec.mode_freqs().iter().enumerate() {
        let num = ladder(LadderKind::Number, h.mode_dim(k))?;
        m = m + embed(&num, Slot::Mode(k), h)?.into_matrix() * C64::new(w, 0.0);
    }
    Operator::new(m, h.clone())
}

/// Interaction part `H_I = Σ_l g_l σ_+ Â_l + g_l* σ_- Â_l†`.
pub fn build_interaction(spec: &SystemSpec, h: &HilbertSpec) -> Result<Operator> {
    spec.check_layout(h)?;
    let n = h.total_dim();
    let mut m: Array2<C64> = Array2::zeros((n, n));
    let sp = qubit_operator(QubitKind::SigmaPlus);
    for term in spec.terms() {
        let a = monomial_on_modes(term, h)?;
        let block = kron(&sp, &a) * term.strength();
        let block_dag = crate::fock::dagger(&block);
        m = m + block + block_dag;
    }
    Operator::new(m, h.clone())
}

/// Lab-frame Hamiltonian at time `t`, including the rotating drive
/// `(Ω/2)(e^{-iω_d t} σ_+ + h.c.)`.
pub fn build_lab(spec: &SystemSpec, h: &HilbertSpec, t: f64) -> Result<Operator> {
    let mut m = build_static(spec, h)?.into_matrix() + build_interaction(spec, h)?.matrix();
    let phase = C64::from_polar(spec.drive_strength() / 2.0, -spec.drive_freq() * t);
    let sp = embed(&qubit_operator(QubitKind::SigmaPlus), Slot::Qubit, h)?.into_matrix();
    let drive = &sp * phase;
    let drive_dag = crate::fock::dagger(&drive);
    m = m + drive + drive_dag;
    Operator::new(m, h.clone())
}

/// Residual rotation rates `χ_A^{(l)} = ω_d (1 - f_A^{(l)})` for every term.
pub fn chi_rates(spec: &SystemSpec, frame: &FrameIntegers) -> Result<Vec<f64>> {
    spec.terms()
        .iter()
        .map(|t| {
            let f = frame_fraction(t, frame)?;
            let one = num_rational::Ratio::new(1, 1);
            let rest = one - f;
            Ok(spec.drive_freq() * (*rest.numer() as f64 / *rest.denom() as f64))
        })
        .collect()
}

/// True when the drive-frame Hamiltonian is time independent: every term
/// has `f_A = 1` exactly (or the drive frequency is zero).
pub fn drive_frame_is_static(spec: &SystemSpec, frame: &FrameIntegers) -> Result<bool> {
    if spec.drive_freq() == 0.0 {
        return Ok(true);
    }
    let one = num_rational::Ratio::new(1, 1);
    for t in spec.terms() {
        if frame_fraction(t, frame)? != one {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Drive-rotating-frame Hamiltonian at time `t`:
/// `Σ_k δ_k a†a + (Δ/2)σ_z + (Ω/2)σ_x + Σ_l g_l (e^{iχ_A t} σ_+ Â_l + h.c.)`.
/// When every `χ_A^{(l)}` vanishes the result is independent of `t`.
pub fn build_drive_frame(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
    t: f64,
) -> Result<Operator> {
    spec.check_layout(h)?;
    if frame.n_modes() != h.n_modes() {
        return Err(Error::SpecMismatch("frame integers do not match mode count".into()));
    }
    let wd = spec.drive_freq();
    let n = h.total_dim();
    let mut m: Array2<C64> = Array2::zeros((n, n));
    for (k, (&w, &nk)) in spec.mode_freqs().iter().zip(frame.per_mode()).enumerate() {
        let delta_k = w - wd / nk as f64;
        let num = ladder(LadderKind::Number, h.mode_dim(k))?;
        m = m + embed(&num, Slot::Mode(k), h)?.into_matrix() * C64::new(delta_k, 0.0);
    }
    let delta = spec.qubit_detuning();
    m = m + embed(&qubit_operator(QubitKind::SigmaZ), Slot::Qubit, h)?.into_matrix()
        * C64::new(delta / 2.0, 0.0);
    m = m + embed(&qubit_operator(QubitKind::SigmaX), Slot::Qubit, h)?.into_matrix()
        * C64::new(spec.drive_strength() / 2.0, 0.0);

    let chis = chi_rates(spec, frame)?;
    let sp = qubit_operator(QubitKind::SigmaPlus);
    for (term, chi) in spec.terms().iter().zip(chis) {
        let a = monomial_on_modes(term, h)?;
        let coeff = term.strength() * C64::from_polar(1.0, chi * t);
        let block = kron(&sp, &a) * coeff;
        let block_dag = crate::fock::dagger(&block);
        m = m + block + block_dag;
    }
    Operator::new(m, h.clone())
}

/// Mode-space part of the effective conditional Hamiltonian,
/// `Σ_l ḡ_l(t) Â_l + ḡ_l*(t) Â_l†` with `ḡ_l(t) = e^{iΔ_A t} g_l sin(θ)/2`.
pub fn effective_mode_generator(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
    t: f64,
) -> Result<Array2<C64>> {
    spec.check_layout(h)?;
    let dressed = dressed_qubit(spec.drive_strength(), spec.qubit_detuning())?;
    let half_sin = dressed.mixing_angle.sin() / 2.0;
    let d = h.mode_space_dim();
    let mut m: Array2<C64> = Array2::zeros((d, d));
    for term in spec.terms() {
        let r = crate::interaction::resonance_report(term, spec, frame)?;
        let gbar = term.strength() * C64::from_polar(half_sin, r.delta_a * t);
        let a = monomial_on_modes(term, h)?;
        let block = a * gbar;
        let block_dag = crate::fock::dagger(&block);
        m = m + block + block_dag;
    }
    Ok(m)
}

/// Effective conditional Hamiltonian
/// `(|+̄⟩⟨+̄| - |−̄⟩⟨−̄|) ⊗ Σ_l (ḡ_l(t) Â_l + h.c.)`; time independent when
/// every `Δ_A^{(l)}` vanishes.
pub fn build_effective(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
    t: f64,
) -> Result<Operator> {
    let dressed = dressed_qubit(spec.drive_strength(), spec.qubit_detuning())?;
    let modes = effective_mode_generator(spec, frame, h, t)?;
    Operator::new(kron(&dressed.population_difference(), &modes), h.clone())
}
