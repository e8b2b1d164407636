//! Interaction monomials and resonance bookkeeping.
//!
//! A term is a product of per-mode ladder powers with a complex strength.
//! The bookkeeping quantities (frame integers, frame fraction, rotation
//! rates) describe how the term transforms under the drive rotating frame
//! and the free-evolution frame. The frame fraction is kept as an exact
//! rational so that the static-frame condition is decidable without float
//! comparisons.

use num_complex::Complex64 as C64;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::hamiltonian::SystemSpec;

/// One interaction monomial: strength times `∏_k a_k^{m_k1} a_k†^{m_k2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTerm {
    strength: C64,
    exponents: Vec<(u32, u32)>,
}

impl InteractionTerm {
    pub fn new(strength: C64, exponents: Vec<(u32, u32)>) -> Result<Self> {
        if exponents.iter().map(|&(m1, m2)| m1 + m2).sum::<u32>() == 0 {
            return Err(Error::EmptySpec);
        }
        Ok(Self { strength, exponents })
    }

    pub fn strength(&self) -> C64 {
        self.strength
    }

    pub fn exponents(&self) -> &[(u32, u32)] {
        &self.exponents
    }

    pub fn n_modes(&self) -> usize {
        self.exponents.len()
    }

    /// Net excitation change per mode, `m_k1 - m_k2` (annihilation minus
    /// creation count).
    pub fn net_exponents(&self) -> Vec<i64> {
        self.exponents
            .iter()
            .map(|&(m1, m2)| m1 as i64 - m2 as i64)
            .collect()
    }

    pub fn with_strength(&self, strength: C64) -> Self {
        Self {
            strength,
            exponents: self.exponents.clone(),
        }
    }
}

/// Total polynomial degree `Σ_k (m_k1 + m_k2)`.
pub fn term_degree(term: &InteractionTerm) -> u32 {
    term.exponents().iter().map(|&(m1, m2)| m1 + m2).sum()
}

/// Per-mode rotation divisors for the drive rotating frame.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct FrameIntegers {
    per_mode: Vec<u32>,
}

impl FrameIntegers {
    pub fn new(per_mode: Vec<u32>) -> Result<Self> {
        if per_mode.iter().any(|&n| n == 0) {
            return Err(Error::SpecMismatch("frame integers must be positive".into()));
        }
        Ok(Self { per_mode })
    }

    pub fn per_mode(&self) -> &[u32] {
        &self.per_mode
    }

    pub fn n_modes(&self) -> usize {
        self.per_mode.len()
    }
}

/// Default frame assignment: `n_k = |m_k1 - m_k2|`, with 1 substituted on
/// modes whose net exponent vanishes everywhere (their rotation rate is
/// unconstrained). All terms must share one polynomial degree; a mode
/// touched by terms with conflicting nonzero |net| admits no single
/// assignment under this rule.
pub fn solve_frame_integers(terms: &[InteractionTerm]) -> Result<FrameIntegers> {
    if terms.is_empty() {
        return Err(Error::EmptySpec);
    }
    let degrees: Vec<u32> = terms.iter().map(term_degree).collect();
    if degrees.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::HeterogeneousTerms { degrees });
    }
    let n_modes = terms[0].n_modes();
    if terms.iter().any(|t| t.n_modes() != n_modes) {
        return Err(Error::TermShape {
            expected: n_modes,
            got: terms.iter().map(|t| t.n_modes()).find(|&n| n != n_modes).unwrap(),
        });
    }
    let mut per_mode = vec![0u32; n_modes];
    for term in terms {
        for (k, net) in term.net_exponents().iter().enumerate() {
            let mag = net.unsigned_abs() as u32;
            if mag == 0 {
                continue;
            }
            if per_mode[k] == 0 {
                per_mode[k] = mag;
            } else if per_mode[k] != mag {
                return Err(Error::HeterogeneousTerms { degrees });
            }
        }
    }
    for n in per_mode.iter_mut() {
        if *n == 0 {
            *n = 1;
        }
    }
    FrameIntegers::new(per_mode)
}

/// Frame fraction `f_A = Σ_k (m_k1 - m_k2)/n_k` as an exact rational.
pub fn frame_fraction(term: &InteractionTerm, frame: &FrameIntegers) -> Result<Ratio<i64>> {
    if term.n_modes() != frame.n_modes() {
        return Err(Error::TermShape {
            expected: frame.n_modes(),
            got: term.n_modes(),
        });
    }
    let mut f = Ratio::new(0, 1);
    for (net, &n) in term.net_exponents().iter().zip(frame.per_mode()) {
        f += Ratio::new(*net, n as i64);
    }
    Ok(f)
}

/// Signed resonance of a term: `Σ_k ω_k (m_k1 - m_k2)`. Driving at this
/// value (negative values meaning the conjugate-phase drive) freezes the
/// term's interaction-picture rotation.
pub fn signed_resonance(term: &InteractionTerm, mode_freqs: &[f64]) -> Result<f64> {
    if term.n_modes() != mode_freqs.len() {
        return Err(Error::TermShape {
            expected: mode_freqs.len(),
            got: term.n_modes(),
        });
    }
    let nets = term.net_exponents();
    if nets.iter().all(|&n| n == 0) {
        return Err(Error::NoResonance);
    }
    Ok(nets
        .iter()
        .zip(mode_freqs)
        .map(|(&net, &w)| w * net as f64)
        .sum())
}

/// Interaction resonance frequency `ω_A = |Σ_k ω_k (m_k1 - m_k2)|`.
pub fn resonance_frequency(term: &InteractionTerm, mode_freqs: &[f64]) -> Result<f64> {
    Ok(signed_resonance(term, mode_freqs)?.abs())
}

/// Resonance bookkeeping for one term in a given system and frame.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TermResonance {
    /// Exact frame fraction `f_A` as (numerator, denominator).
    pub frame_fraction: (i64, i64),
    /// Residual drive-frame rotation rate `χ_A = ω_d (1 - f_A)`.
    pub chi: f64,
    /// Mode-detuning rate `η_A = Σ_k (m_k1 - m_k2) δ_k`.
    pub eta: f64,
    /// Composed bookkeeping detuning `Δ_A = χ_A + η_A`.
    pub delta_a: f64,
    /// Interaction resonance frequency `ω_A` (non-negative).
    pub omega_a: f64,
    /// Signed drive frequency at which the term's interaction-picture
    /// phase is static; its absolute value equals `omega_a`.
    pub resonant_drive_signed: f64,
    /// Frame-independent detuning of the configured drive from the signed
    /// resonance. Zero exactly when the term is cross-resonant.
    pub effective_detuning: f64,
}

/// Resonance bookkeeping shared by the whole system.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResonanceReport {
    pub frame: FrameIntegers,
    /// Per-mode detunings `δ_k = ω_k - ω_d/n_k`.
    pub mode_detunings: Vec<f64>,
    /// Qubit detuning `Δ = ω_q - ω_d`.
    pub qubit_detuning: f64,
    pub terms: Vec<TermResonance>,
}

impl ResonanceReport {
    /// Largest `|effective_detuning|` across terms.
    pub fn max_effective_detuning(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.effective_detuning.abs())
            .fold(0.0, f64::max)
    }

    /// Recommended (physical, non-negative) drive frequency: the shared
    /// `ω_A` when all terms agree, otherwise the midpoint of the signed
    /// per-term resonances, which balances the residual detunings.
    pub fn recommended_drive(&self) -> f64 {
        let lo = self
            .terms
            .iter()
            .map(|t| t.resonant_drive_signed)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .terms
            .iter()
            .map(|t| t.resonant_drive_signed)
            .fold(f64::NEG_INFINITY, f64::max);
        ((lo + hi) / 2.0).abs()
    }
}

/// Bookkeeping for a single term: detunings `δ_k = ω_k - ω_d/n_k` and
/// `Δ = ω_q - ω_d`, frame fraction, rotation rates, and the composed
/// `Δ_A = χ_A + η_A`.
pub fn resonance_report(
    term: &InteractionTerm,
    system: &SystemSpec,
    frame: &FrameIntegers,
) -> Result<TermResonance> {
    if term.n_modes() != system.mode_freqs().len() || frame.n_modes() != term.n_modes() {
        return Err(Error::TermShape {
            expected: system.mode_freqs().len(),
            got: term.n_modes(),
        });
    }
    let wd = system.drive_freq();
    let f = frame_fraction(term, frame)?;
    let one = Ratio::new(1, 1);
    let chi = wd * ratio_to_f64(one - f);
    let deltas: Vec<f64> = system
        .mode_freqs()
        .iter()
        .zip(frame.per_mode())
        .map(|(&w, &n)| w - wd / n as f64)
        .collect();
    let eta: f64 = term
        .net_exponents()
        .iter()
        .zip(&deltas)
        .map(|(&net, &d)| net as f64 * d)
        .sum();
    // excitation-neutral terms simply have zero resonance here; the
    // dedicated resonance_frequency lookup reports them as an error
    let signed: f64 = term
        .net_exponents()
        .iter()
        .zip(system.mode_freqs())
        .map(|(&net, &w)| w * net as f64)
        .sum();
    Ok(TermResonance {
        frame_fraction: (*f.numer(), *f.denom()),
        chi,
        eta,
        delta_a: chi + eta,
        omega_a: signed.abs(),
        resonant_drive_signed: signed,
        effective_detuning: signed - wd,
    })
}

/// Full report over every term of the system.
pub fn system_resonance(system: &SystemSpec, frame: &FrameIntegers) -> Result<ResonanceReport> {
    let wd = system.drive_freq();
    let mode_detunings: Vec<f64> = system
        .mode_freqs()
        .iter()
        .zip(frame.per_mode())
        .map(|(&w, &n)| w - wd / n as f64)
        .collect();
    let terms = system
        .terms()
        .iter()
        .map(|t| resonance_report(t, system, frame))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResonanceReport {
        frame: frame.clone(),
        mode_detunings,
        qubit_detuning: system.qubit_freq() - wd,
        terms,
    })
}

fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
