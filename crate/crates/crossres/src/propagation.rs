//! Exact time evolution and frame transformations.
//!
//! The always-valid pathway steps the lab-frame Hamiltonian with the
//! exponential-midpoint rule. Because the lab Hamiltonian is exactly
//! periodic in the drive period, the ordered product is assembled from
//! one period's step factors and whole-period products; this is the same
//! midpoint product, associated differently. When the drive-frame
//! Hamiltonian is time independent (every residual rotation rate χ
//! vanishes) a single eigendecomposition replaces the stepping entirely.

use ndarray::prelude::*;
use ndarray::linalg::kron;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{
    dagger, expm_i_matrix, identity, max_abs_diff, HilbertSpec, Operator, SpectralDecomp,
};
use crate::hamiltonian::{build_drive_frame, build_lab, drive_frame_is_static, SystemSpec};
use crate::interaction::FrameIntegers;

/// Controls for time-ordered propagation and truncation monitoring.
#[derive(Debug, Clone)]
pub struct PropagationConfig {
    /// Final evolution time.
    pub t_final: f64,
    /// Step size for time-ordered propagation.
    pub dt: f64,
    /// Number of sample intervals for record generation.
    pub samples: usize,
    /// Number of top Fock levels monitored per mode.
    pub truncation_tail: usize,
    /// Leakage above this flags a truncation breach.
    pub tail_tolerance: f64,
    /// When set, redo the propagation at dt/2 and fail if the result moved
    /// by more than this.
    pub refine_check: Option<f64>,
}

impl PropagationConfig {
    pub fn validate(&self, h: &HilbertSpec) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::SpecMismatch("dt must be positive".into()));
        }
        if self.t_final < 0.0 {
            return Err(Error::SpecMismatch("t_final must be non-negative".into()));
        }
        let min_dim = h.mode_dims().iter().copied().min().unwrap_or(2);
        if self.truncation_tail < 1 || self.truncation_tail >= min_dim {
            return Err(Error::SpecMismatch(format!(
                "truncation tail {} must satisfy 1 <= K < {}",
                self.truncation_tail, min_dim
            )));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::SpecMismatch("tail tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Default step: one two-hundredth of the shortest cycle in the spec.
pub fn default_dt(spec: &SystemSpec) -> f64 {
    let mut w_max = spec
        .mode_freqs()
        .iter()
        .fold(0.0_f64, |acc, &w| acc.max(w.abs()));
    w_max = w_max
        .max(spec.qubit_freq().abs())
        .max(spec.drive_freq().abs())
        .max(spec.drive_strength());
    if w_max == 0.0 {
        w_max = 1.0;
    }
    (2.0 * std::f64::consts::PI / w_max) / 200.0
}

/// Default number of monitored top Fock levels: a fifth of the smallest
/// mode truncation.
pub fn default_tail(h: &HilbertSpec) -> usize {
    let min_dim = h.mode_dims().iter().copied().min().unwrap_or(2);
    (min_dim / 5).max(1)
}

/// `U(t, 0) = exp(-iHt)` for a static Hermitian generator.
pub fn propagate_static(h: &Operator, t: f64) -> Result<Operator> {
    crate::fock::expm_i(h, t)
}

/// Time-ordered propagator by the exponential-midpoint rule: the ordered
/// product of `exp(-iH(t_mid) dt)` over uniform steps. The step is
/// shortened so an integer number of steps lands exactly on `t_final`.
pub fn propagate_time_ordered<F>(hamiltonian: F, cfg: &PropagationConfig) -> Result<Operator>
where
    F: Fn(f64) -> Result<Operator>,
{
    let (u, _) = time_ordered_product(&hamiltonian, cfg.t_final, cfg.dt)?;
    if let Some(tol) = cfg.refine_check {
        let (u2, _) = time_ordered_product(&hamiltonian, cfg.t_final, cfg.dt / 2.0)?;
        let err = max_abs_diff(u.matrix(), u2.matrix());
        if err > tol {
            return Err(Error::StepTooCoarse { error: err, tolerance: tol });
        }
    }
    Ok(u)
}

fn time_ordered_product<F>(
    hamiltonian: &F,
    t_final: f64,
    dt: f64,
) -> Result<(Operator, usize)>
where
    F: Fn(f64) -> Result<Operator>,
{
    if !(dt > 0.0) {
        return Err(Error::SpecMismatch("dt must be positive".into()));
    }
    let probe = hamiltonian(0.0)?;
    let space = probe.space().clone();
    let n = probe.dim();
    if t_final == 0.0 {
        return Ok((Operator::new(identity(n), space)?, 0));
    }
    let steps = (t_final / dt).ceil() as usize;
    let step = t_final / steps as f64;
    let mut u = identity(n);
    for j in 0..steps {
        let t_mid = (j as f64 + 0.5) * step;
        let h = hamiltonian(t_mid)?;
        let factor = expm_i_matrix(h.matrix(), step)?;
        u = factor.dot(&u);
    }
    Ok((Operator::new(u, space)?, steps))
}

/// Diagonal of the drive-frame generator `ω_d (Σ_k n̂_k/n_k + σ_z/2)` over
/// flattened full-space indices.
fn drive_generator_diagonal(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
) -> Array1<f64> {
    let n = h.total_dim();
    let wd = spec.drive_freq();
    Array1::from_shape_fn(n, |i| {
        let qubit = h.qubit_component(i);
        let sz_half = if qubit == 1 { 0.5 } else { -0.5 };
        let mode_sum: f64 = (0..h.n_modes())
            .map(|k| h.occupation(i, k) as f64 / frame.per_mode()[k] as f64)
            .sum();
        wd * (mode_sum + sz_half)
    })
}

fn diagonal_unitary(diag: &Array1<f64>, t: f64) -> Array2<C64> {
    let n = diag.len();
    let mut u = Array2::zeros((n, n));
    for i in 0..n {
        u[[i, i]] = C64::from_polar(1.0, -diag[i] * t);
    }
    u
}

/// Free-evolution (trivial-part) generator split into a qubit block and a
/// diagonal mode part; their exponentials tensor together.
struct FreeFrame {
    qubit_block: Array2<C64>,
    mode_diagonal: Array1<f64>,
}

impl FreeFrame {
    fn new(spec: &SystemSpec, frame: &FrameIntegers, h: &HilbertSpec) -> FreeFrame {
        let wd = spec.drive_freq();
        let delta = spec.qubit_detuning();
        let omega = spec.drive_strength();
        let qubit_block = crate::fock::qubit_operator(crate::fock::QubitKind::SigmaZ)
            * C64::new(delta / 2.0, 0.0)
            + crate::fock::qubit_operator(crate::fock::QubitKind::SigmaX)
                * C64::new(omega / 2.0, 0.0);
        let d = h.mode_space_dim();
        let mode_diagonal = Array1::from_shape_fn(d, |i| {
            // mode-space index decomposed against mode dims
            let mut rem = i;
            let mut acc = 0.0;
            for k in (0..h.n_modes()).rev() {
                let dim = h.mode_dim(k);
                let occ = rem % dim;
                rem /= dim;
                let delta_k = spec.mode_freqs()[k] - wd / frame.per_mode()[k] as f64;
                acc += occ as f64 * delta_k;
            }
            acc
        });
        FreeFrame { qubit_block, mode_diagonal }
    }

    fn unitary(&self, t: f64) -> Result<Array2<C64>> {
        let uq = expm_i_matrix(&self.qubit_block, t)?;
        let um = diagonal_unitary(&self.mode_diagonal, t);
        Ok(kron(&uq, &um))
    }
}

/// Frame unitaries at time `t`: the drive rotating frame
/// `U_d = exp(-iω_d t (Σ_k a†a/n_k + σ_z/2))` and the free-evolution frame
/// `U_0 = exp(-it (Σ_k δ_k a†a + (Δσ_z + Ωσ_x)/2))`. Both are the identity
/// at `t = 0`.
pub fn frame_unitaries(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
    t: f64,
) -> Result<(Operator, Operator)> {
    check_shapes(spec, frame, h)?;
    let ud = diagonal_unitary(&drive_generator_diagonal(spec, frame, h), t);
    let u0 = FreeFrame::new(spec, frame, h).unitary(t)?;
    Ok((Operator::new(ud, h.clone())?, Operator::new(u0, h.clone())?))
}

/// Interaction-picture propagator `U^(I)(t) = U_0†(t) U_d†(t) U_lab(t)`.
pub fn to_interaction_picture(
    u_lab: &Operator,
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
    t: f64,
) -> Result<Operator> {
    let (ud, u0) = frame_unitaries(spec, frame, h, t)?;
    let m = dagger(u0.matrix()).dot(&dagger(ud.matrix())).dot(u_lab.matrix());
    Operator::new(m, h.clone())
}

fn check_shapes(spec: &SystemSpec, frame: &FrameIntegers, h: &HilbertSpec) -> Result<()> {
    if spec.n_modes() != h.n_modes() || frame.n_modes() != h.n_modes() {
        return Err(Error::SpecMismatch(
            "system, frame, and layout mode counts disagree".into(),
        ));
    }
    Ok(())
}

/// Which exact pathway produced an evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum EvolutionPath {
    /// Lab Hamiltonian is time independent (no drive or zero drive
    /// frequency); one eigendecomposition.
    StaticLab,
    /// Drive-frame Hamiltonian is time independent; one eigendecomposition
    /// plus frame factors.
    StaticDriveFrame,
    /// Midpoint-stepped lab propagation reusing the drive-period structure.
    PeriodicLab,
}

/// Lab and interaction-picture propagators at a set of sample times.
#[derive(Debug, Clone)]
pub struct SampledEvolution {
    /// Actual sample times (snapped to the step grid on the stepped path).
    pub times: Vec<f64>,
    pub lab: Vec<Array2<C64>>,
    pub interaction: Vec<Array2<C64>>,
    pub path: EvolutionPath,
    pub dt_used: f64,
    pub steps_total: usize,
    /// Max-element change of the final propagator under step halving, when
    /// requested.
    pub refine_error: Option<f64>,
}

/// Exact evolution sampled at the requested times (ascending). Chooses the
/// static drive-frame path when the drive frame is time independent, the
/// static lab path when there is no time dependence at all, and the
/// periodic midpoint-stepped lab path otherwise.
pub fn sampled_evolution(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
    cfg: &PropagationConfig,
    sample_times: &[f64],
) -> Result<SampledEvolution> {
    check_shapes(spec, frame, h)?;
    cfg.validate(h)?;
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::SpecMismatch("sample times must be ascending".into()));
    }

    let static_lab = spec.drive_strength() == 0.0 || spec.drive_freq() == 0.0;
    if static_lab {
        let h_lab = build_lab(spec, h, 0.0)?;
        let decomp = SpectralDecomp::new(h_lab.matrix())?;
        return assemble_static(
            spec, frame, h, sample_times, EvolutionPath::StaticLab,
            |t| Ok(decomp.unitary(t)),
        );
    }

    if drive_frame_is_static(spec, frame)? {
        let hd = build_drive_frame(spec, frame, h, 0.0)?;
        let decomp = SpectralDecomp::new(hd.matrix())?;
        let diag = drive_generator_diagonal(spec, frame, h);
        return assemble_static(
            spec, frame, h, sample_times, EvolutionPath::StaticDriveFrame,
            |t| Ok(diagonal_unitary(&diag, t).dot(&decomp.unitary(t))),
        );
    }

    periodic_lab_evolution(spec, frame, h, cfg, sample_times)
}

fn assemble_static<F>(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
    sample_times: &[f64],
    path: EvolutionPath,
    lab_at: F,
) -> Result<SampledEvolution>
where
    F: Fn(f64) -> Result<Array2<C64>>,
{
    let free = FreeFrame::new(spec, frame, h);
    let drive_diag = drive_generator_diagonal(spec, frame, h);
    let mut lab = Vec::with_capacity(sample_times.len());
    let mut interaction = Vec::with_capacity(sample_times.len());
    for &t in sample_times {
        let u_lab = lab_at(t)?;
        let u0 = free.unitary(t)?;
        let ud = diagonal_unitary(&drive_diag, t);
        let u_int = dagger(&u0).dot(&dagger(&ud)).dot(&u_lab);
        lab.push(u_lab);
        interaction.push(u_int);
    }
    Ok(SampledEvolution {
        times: sample_times.to_vec(),
        lab,
        interaction,
        path,
        dt_used: 0.0,
        steps_total: 0,
        refine_error: None,
    })
}

fn periodic_lab_evolution(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
    cfg: &PropagationConfig,
    sample_times: &[f64],
) -> Result<SampledEvolution> {
    let (times, lab, dt_used, steps_total) =
        periodic_lab_propagators(spec, h, cfg.dt, sample_times)?;
    let refine_error = match cfg.refine_check {
        Some(tol) => {
            let (_, lab2, _, _) = periodic_lab_propagators(spec, h, cfg.dt / 2.0, sample_times)?;
            let err = lab
                .last()
                .zip(lab2.last())
                .map(|(a, b)| max_abs_diff(a, b))
                .unwrap_or(0.0);
            if err > tol {
                return Err(Error::StepTooCoarse { error: err, tolerance: tol });
            }
            Some(err)
        }
        None => None,
    };

    let free = FreeFrame::new(spec, frame, h);
    let drive_diag = drive_generator_diagonal(spec, frame, h);
    let interaction = times
        .iter()
        .zip(&lab)
        .map(|(&t, u_lab)| -> Result<Array2<C64>> {
            let u0 = free.unitary(t)?;
            let ud = diagonal_unitary(&drive_diag, t);
            Ok(dagger(&u0).dot(&dagger(&ud)).dot(u_lab))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SampledEvolution {
        times,
        lab,
        interaction,
        path: EvolutionPath::PeriodicLab,
        dt_used,
        steps_total,
        refine_error,
    })
}

/// Midpoint-stepped lab propagators at sample times snapped to the step
/// grid. Steps are laid out so an integer number spans one drive period;
/// the drive's exact periodicity lets whole periods share one product.
fn periodic_lab_propagators(
    spec: &SystemSpec,
    h: &HilbertSpec,
    dt: f64,
    sample_times: &[f64],
) -> Result<(Vec<f64>, Vec<Array2<C64>>, f64, usize)> {
    let period = 2.0 * std::f64::consts::PI / spec.drive_freq().abs();
    let per_period = (period / dt).ceil().max(1.0) as usize;
    let step = period / per_period as f64;

    // global step index for each sample, snapped to the grid
    let step_indices: Vec<usize> = sample_times
        .iter()
        .map(|&t| (t / step).round() as usize)
        .collect();
    let max_step = step_indices.iter().copied().max().unwrap_or(0);
    let needs_full_period = max_step >= per_period;

    // within-period offsets at which prefix products are needed
    let offsets: std::collections::BTreeSet<usize> =
        step_indices.iter().map(|&s| s % per_period).collect();

    let n = h.total_dim();
    let mut prefix: std::collections::HashMap<usize, Array2<C64>> =
        std::collections::HashMap::new();
    if offsets.contains(&0) {
        prefix.insert(0, identity(n));
    }
    let build_to = if needs_full_period {
        per_period
    } else {
        offsets.iter().next_back().copied().unwrap_or(0)
    };
    let mut acc = identity(n);
    let mut period_product = identity(n);
    for j in 0..build_to {
        let t_mid = (j as f64 + 0.5) * step;
        let h_mid = build_lab(spec, h, t_mid)?;
        acc = expm_i_matrix(h_mid.matrix(), step)?.dot(&acc);
        let boundary = j + 1;
        if boundary < per_period && offsets.contains(&boundary) {
            prefix.insert(boundary, acc.clone());
        }
        if boundary == per_period {
            period_product = acc.clone();
        }
    }

    // walk samples in order, advancing the whole-period power incrementally
    let mut lab = Vec::with_capacity(sample_times.len());
    let mut power = identity(n);
    let mut power_count = 0usize;
    for &s in &step_indices {
        let periods = s / per_period;
        let offset = s % per_period;
        while power_count < periods {
            power = period_product.dot(&power);
            power_count += 1;
        }
        let f = prefix
            .get(&offset)
            .expect("prefix product missing for requested offset");
        lab.push(f.dot(&power));
    }
    let times: Vec<f64> = step_indices.iter().map(|&s| s as f64 * step).collect();
    Ok((times, lab, step, build_to))
}

/// Leakage report from the truncation guard.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LeakageReport {
    pub leakage: f64,
    pub tolerance: f64,
    pub breached: bool,
}

impl LeakageReport {
    fn new(leakage: f64, tolerance: f64) -> Self {
        Self { leakage, tolerance, breached: leakage > tolerance }
    }
}

/// Population of a state in the top `tail` Fock levels, maximized over
/// modes.
pub fn state_leakage(psi: &ArrayView1<C64>, h: &HilbertSpec, tail: usize) -> f64 {
    let mut worst = 0.0_f64;
    for k in 0..h.n_modes() {
        let cut = h.mode_dim(k).saturating_sub(tail);
        let mass: f64 = psi
            .iter()
            .enumerate()
            .filter(|(i, _)| h.occupation(*i, k) >= cut)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        worst = worst.max(mass);
    }
    worst
}

/// Largest top-`tail` column mass of a unitary over columns inside the
/// comparison subspace.
pub fn unitary_leakage(u: &Array2<C64>, h: &HilbertSpec, tail: usize) -> f64 {
    let cols = comparison_indices(h, tail);
    let mut worst = 0.0_f64;
    for &j in &cols {
        let col = u.column(j);
        worst = worst.max(state_leakage(&col, h, tail));
    }
    worst
}

pub fn truncation_guard_state(
    psi: &ArrayView1<C64>,
    h: &HilbertSpec,
    tail: usize,
    tol: f64,
) -> LeakageReport {
    LeakageReport::new(state_leakage(psi, h, tail), tol)
}

pub fn truncation_guard_unitary(
    u: &Array2<C64>,
    h: &HilbertSpec,
    tail: usize,
    tol: f64,
) -> LeakageReport {
    LeakageReport::new(unitary_leakage(u, h, tail), tol)
}

/// Full-space indices whose every mode occupation stays below the top
/// `tail` levels (qubit unrestricted).
pub fn comparison_indices(h: &HilbertSpec, tail: usize) -> Vec<usize> {
    (0..h.total_dim())
        .filter(|&i| {
            (0..h.n_modes()).all(|k| h.occupation(i, k) < h.mode_dim(k).saturating_sub(tail))
        })
        .collect()
}

/// Diagonal projector onto the comparison subspace.
pub fn comparison_projector(h: &HilbertSpec, tail: usize) -> Array2<C64> {
    let n = h.total_dim();
    let mut p = Array2::zeros((n, n));
    for i in comparison_indices(h, tail) {
        p[[i, i]] = C64::new(1.0, 0.0);
    }
    p
}
