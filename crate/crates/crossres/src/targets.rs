//! Analytic target unitaries for the qubit-conditional operations, and the
//! closed-form maps from coupling strength and time to their amplitudes.
//!
//! All targets act on the mode space (no qubit factor) and are produced by
//! exponentiating the truncated generator, which keeps them exactly unitary
//! on the truncated space. Conventions: the single-mode squeeze carries the
//! conjugated amplitude on the creation pair, `S(ζ) = exp((ζ* a†² - ζ a²)/2)`,
//! while the two-mode squeeze carries the plain amplitude there,
//! `S₁₂(ζ) = exp(ζ a₁†a₂† - ζ* a₁a₂)`; the asymmetry is deliberate and the
//! cross-checks against the effective generator pin both down.

use ndarray::prelude::*;
use ndarray::linalg::kron;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{dagger, expm_i_matrix, identity, kron_all, ladder, HilbertSpec, LadderKind, Operator};
use crate::hamiltonian::DressedQubit;

/// Which conditional operation a run is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ConditionalKind {
    Displacement,
    Squeeze,
    JointDisplacement,
    Beamsplitter,
    TwoModeSqueeze,
    Generic { m1: u32, m2: u32 },
}

/// Exponential of an anti-Hermitian exponent `X`, via the Hermitian
/// generator `iX`.
fn exp_anti_hermitian(x: &Array2<C64>) -> Result<Array2<C64>> {
    let h = x.mapv(|z| z * C64::new(0.0, 1.0));
    expm_i_matrix(&h, 1.0)
}

/// Displacement `D(α) = exp(α a† - α* a)` on a `dim`-level mode.
pub fn displacement(alpha: C64, dim: usize) -> Result<Array2<C64>> {
    let a = ladder(LadderKind::Annihilate, dim)?;
    let x = dagger(&a) * alpha - &a * alpha.conj();
    exp_anti_hermitian(&x)
}

/// Single-mode squeeze `S(ζ) = exp((ζ* a†² - ζ a²)/2)`.
pub fn squeeze(zeta: C64, dim: usize) -> Result<Array2<C64>> {
    let a = ladder(LadderKind::Annihilate, dim)?;
    let a2 = a.dot(&a);
    let x = (dagger(&a2) * zeta.conj() - &a2 * zeta) * C64::new(0.5, 0.0);
    exp_anti_hermitian(&x)
}

/// Beamsplitter `B(θ, φ) = exp(θ (e^{iφ} a₁a₂† - e^{-iφ} a₁†a₂))` on two
/// modes; photon-number conserving.
pub fn beamsplitter(theta: f64, phi: f64, dims: (usize, usize)) -> Result<Array2<C64>> {
    let a1 = ladder(LadderKind::Annihilate, dims.0)?;
    let a2 = ladder(LadderKind::Annihilate, dims.1)?;
    let hop = kron(&a1, &dagger(&a2));
    let x = (&hop * C64::from_polar(theta, phi)) - (&dagger(&hop) * C64::from_polar(theta, -phi));
    exp_anti_hermitian(&x)
}

/// Two-mode squeeze `S₁₂(ζ) = exp(ζ a₁†a₂† - ζ* a₁a₂)`.
pub fn two_mode_squeeze(zeta: C64, dims: (usize, usize)) -> Result<Array2<C64>> {
    let a1 = ladder(LadderKind::Annihilate, dims.0)?;
    let a2 = ladder(LadderKind::Annihilate, dims.1)?;
    let pair = kron(&a1, &a2);
    let x = dagger(&pair) * zeta - &pair * zeta.conj();
    exp_anti_hermitian(&x)
}

/// Generic two-mode multiphoton unitary
/// `V(ζ) = exp(ζ a₁^{m1} a₂†^{m2} - ζ* a₁†^{m1} a₂^{m2})`.
pub fn generic_v(m1: u32, m2: u32, zeta: C64, dims: (usize, usize)) -> Result<Array2<C64>> {
    if m1 < 1 || m2 < 1 {
        return Err(Error::SpecMismatch("generic exponents must be at least 1".into()));
    }
    let a1 = ladder(LadderKind::Annihilate, dims.0)?;
    let a2 = ladder(LadderKind::Annihilate, dims.1)?;
    let mut p1 = identity(dims.0);
    for _ in 0..m1 {
        p1 = p1.dot(&a1);
    }
    let mut p2 = identity(dims.1);
    for _ in 0..m2 {
        p2 = p2.dot(&dagger(&a2));
    }
    let mono = kron(&p1, &p2);
    let x = &mono * zeta - dagger(&mono) * zeta.conj();
    exp_anti_hermitian(&x)
}

/// Conditional unitary `|+̄⟩⟨+̄| ⊗ e^{-iGt} + |−̄⟩⟨−̄| ⊗ e^{+iGt}` from a
/// Hermitian mode-space generator: the two branches evolve in opposite
/// time directions.
pub fn conditional_unitary(
    dressed: &DressedQubit,
    generator: &Array2<C64>,
    t: f64,
) -> Result<Array2<C64>> {
    let forward = expm_i_matrix(generator, t)?;
    let backward = dagger(&forward);
    Ok(kron(&dressed.projector_plus(), &forward) + kron(&dressed.projector_minus(), &backward))
}

/// Closed-form amplitude of a conditional operation at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetParams {
    /// Displacement amplitude `α(t)`.
    Alpha(C64),
    /// Squeeze amplitude `ζ(t)` (single- or two-mode, or generic).
    Zeta(C64),
    /// Beamsplitter angle and phase `(θ(t), φ(t))`.
    Angles { theta: f64, phi: f64 },
}

/// Amplitude maps: displacement `α(t) = -i g t/2`, squeeze `ζ(t) = i g t`,
/// joint displacement `α_l(t) = -i g_l t/2` per term, beamsplitter
/// `θ(t) = |-i g t/2|`, `φ(t) = arg(-i g t/2)`, two-mode squeeze and
/// generic `ζ(t) = -i g t/2`.
pub fn parameter_map(kind: ConditionalKind, g: C64, t: f64) -> TargetParams {
    let half = C64::new(0.0, -0.5) * g * t;
    match kind {
        ConditionalKind::Displacement | ConditionalKind::JointDisplacement => {
            TargetParams::Alpha(half)
        }
        ConditionalKind::Squeeze => TargetParams::Zeta(C64::new(0.0, 1.0) * g * t),
        ConditionalKind::Beamsplitter => TargetParams::Angles {
            theta: half.norm(),
            phi: half.arg(),
        },
        ConditionalKind::TwoModeSqueeze | ConditionalKind::Generic { .. } => {
            TargetParams::Zeta(half)
        }
    }
}

/// Mode-space target unitary for the forward (`|+̄⟩`) branch at time `t`,
/// given the per-term couplings. `sign` of -1 builds the backward branch.
pub fn target_mode_unitary(
    kind: ConditionalKind,
    couplings: &[C64],
    t: f64,
    h: &HilbertSpec,
    sign: f64,
) -> Result<Array2<C64>> {
    let s = C64::new(sign, 0.0);
    match kind {
        ConditionalKind::Displacement => {
            require_modes(h, 1, "displacement")?;
            require_couplings(couplings, 1, "displacement")?;
            let TargetParams::Alpha(alpha) = parameter_map(kind, couplings[0], t) else {
                unreachable!()
            };
            displacement(alpha * s, h.mode_dim(0))
        }
        ConditionalKind::Squeeze => {
            require_modes(h, 1, "squeeze")?;
            require_couplings(couplings, 1, "squeeze")?;
            let TargetParams::Zeta(zeta) = parameter_map(kind, couplings[0], t) else {
                unreachable!()
            };
            squeeze(zeta * s, h.mode_dim(0))
        }
        ConditionalKind::JointDisplacement => {
            require_couplings(couplings, h.n_modes(), "joint displacement")?;
            let factors: Vec<Array2<C64>> = couplings
                .iter()
                .enumerate()
                .map(|(k, &g)| {
                    let TargetParams::Alpha(alpha) = parameter_map(kind, g, t) else {
                        unreachable!()
                    };
                    displacement(alpha * s, h.mode_dim(k))
                })
                .collect::<Result<_>>()?;
            Ok(kron_all(factors.iter()))
        }
        ConditionalKind::Beamsplitter => {
            require_modes(h, 2, "beamsplitter")?;
            require_couplings(couplings, 1, "beamsplitter")?;
            let TargetParams::Angles { theta, phi } = parameter_map(kind, couplings[0], t) else {
                unreachable!()
            };
            beamsplitter(sign * theta, phi, (h.mode_dim(0), h.mode_dim(1)))
        }
        ConditionalKind::TwoModeSqueeze => {
            require_modes(h, 2, "two-mode squeeze")?;
            require_couplings(couplings, 1, "two-mode squeeze")?;
            let TargetParams::Zeta(zeta) = parameter_map(kind, couplings[0], t) else {
                unreachable!()
            };
            two_mode_squeeze(zeta * s, (h.mode_dim(0), h.mode_dim(1)))
        }
        ConditionalKind::Generic { m1, m2 } => {
            require_modes(h, 2, "generic")?;
            require_couplings(couplings, 1, "generic")?;
            let TargetParams::Zeta(zeta) = parameter_map(kind, couplings[0], t) else {
                unreachable!()
            };
            generic_v(m1, m2, zeta * s, (h.mode_dim(0), h.mode_dim(1)))
        }
    }
}

/// Full-space conditional target
/// `|+̄⟩⟨+̄| ⊗ T(+params) + |−̄⟩⟨−̄| ⊗ T(-params)` at time `t`.
pub fn conditional_target(
    kind: ConditionalKind,
    dressed: &DressedQubit,
    couplings: &[C64],
    t: f64,
    h: &HilbertSpec,
) -> Result<Operator> {
    let forward = target_mode_unitary(kind, couplings, t, h, 1.0)?;
    let backward = target_mode_unitary(kind, couplings, t, h, -1.0)?;
    let m = kron(&dressed.projector_plus(), &forward)
        + kron(&dressed.projector_minus(), &backward);
    Operator::new(m, h.clone())
}

fn require_modes(h: &HilbertSpec, n: usize, what: &str) -> Result<()> {
    if h.n_modes() != n {
        return Err(Error::SpecMismatch(format!(
            "{what} target needs {n} mode(s), layout has {}",
            h.n_modes()
        )));
    }
    Ok(())
}

fn require_couplings(couplings: &[C64], n: usize, what: &str) -> Result<()> {
    if couplings.len() != n {
        return Err(Error::SpecMismatch(format!(
            "{what} target needs {n} coupling(s), got {}",
            couplings.len()
        )));
    }
    Ok(())
}
