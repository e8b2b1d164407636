//! Agreement between exact dynamics and the analytic conditional targets:
//! fidelities, leakage, rotating-wave margins, and convergence studies.
//!
//! Comparisons are made in the interaction picture, where the conditional
//! generator is static at cross-resonance; comparing in the lab frame
//! would conflate free rotation with method error.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exec::run_indexed;
use crate::fock::{dagger, HilbertSpec};
use crate::hamiltonian::{dressed_qubit, DressedQubit, SystemSpec};
use crate::interaction::{system_resonance, FrameIntegers};
use crate::propagation::{
    comparison_indices, sampled_evolution, state_leakage, EvolutionPath, PropagationConfig,
};
use crate::targets::{conditional_target, ConditionalKind};

/// `|⟨ψ|φ⟩|²` for normalized states.
pub fn state_fidelity(psi: &ArrayView1<C64>, phi: &ArrayView1<C64>) -> Result<f64> {
    if psi.len() != phi.len() {
        return Err(Error::SpecMismatch("state dimensions differ".into()));
    }
    fn check_norm(v: &ArrayView1<C64>) -> Result<()> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization { norm });
        }
        Ok(())
    }
    check_norm(psi)?;
    check_norm(phi)?;
    let overlap: C64 = psi.iter().zip(phi.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(overlap.norm_sqr())
}

/// Phase-insensitive subspace overlap
/// `F = |Tr(P U† V P)|² / (Tr P)²` for unitaries `U`, `V` and a projector `P`.
pub fn operator_fidelity(
    u: &Array2<C64>,
    v: &Array2<C64>,
    projector: &Array2<C64>,
) -> Result<f64> {
    let tol = 1e-8;
    let du = crate::fock::unitarity_error(u);
    if du > tol {
        return Err(Error::NotUnitary { deviation: du });
    }
    let dv = crate::fock::unitarity_error(v);
    if dv > tol {
        return Err(Error::NotUnitary { deviation: dv });
    }
    let idem = crate::fock::max_abs_diff(&projector.dot(projector), projector);
    let herm = crate::fock::hermiticity_error(projector);
    if idem > 1e-10 || herm > 1e-10 {
        return Err(Error::NotProjector { deviation: idem.max(herm) });
    }
    let pup = projector.dot(&dagger(u).dot(v)).dot(projector);
    let trace: C64 = pup.diag().iter().sum();
    let rank: f64 = projector.diag().iter().map(|z| z.re).sum();
    Ok((trace / C64::new(rank, 0.0)).norm_sqr())
}

/// Same overlap restricted to an index set of a diagonal projector; avoids
/// forming the projected product.
pub fn operator_fidelity_on_indices(
    u: &Array2<C64>,
    v: &Array2<C64>,
    indices: &[usize],
) -> f64 {
    let trace: C64 = indices
        .iter()
        .map(|&j| {
            let cu = u.column(j);
            let cv = v.column(j);
            cu.iter().zip(cv.iter()).map(|(a, b)| a.conj() * b).sum::<C64>()
        })
        .sum();
    (trace / C64::new(indices.len() as f64, 0.0)).norm_sqr()
}

/// Rotating-wave margins of a configured system.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RwaMargin {
    /// Dressed splitting ε, the scale the dropped terms rotate at.
    pub epsilon: f64,
    /// max_l |g_l| / ε.
    pub ratio_g: f64,
    /// max_l |detuning from resonance| / ε.
    pub ratio_detuning: f64,
    pub threshold: f64,
    pub violated: bool,
}

/// Default flagging threshold for the margin ratios.
pub const DEFAULT_RWA_THRESHOLD: f64 = 0.1;

/// Ratios of the coupling and of the drive's detuning-from-resonance to
/// the dressed splitting; both must be small for the conditional picture
/// to hold.
pub fn rwa_margin(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    threshold: f64,
) -> Result<RwaMargin> {
    let dressed = dressed_qubit(spec.drive_strength(), spec.qubit_detuning())?;
    let eps = dressed.splitting;
    let report = system_resonance(spec, frame)?;
    let ratio_g = spec.max_coupling() / eps;
    let ratio_detuning = report.max_effective_detuning() / eps;
    Ok(RwaMargin {
        epsilon: eps,
        ratio_g,
        ratio_detuning,
        threshold,
        violated: ratio_g > threshold || ratio_detuning > threshold,
    })
}

/// One sampled comparison between exact and target evolution.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FidelityRecord {
    pub time: f64,
    pub state_fidelity: f64,
    pub operator_fidelity: f64,
    pub leakage: f64,
    pub rwa_ratio_g: f64,
    pub rwa_ratio_delta: f64,
}

/// Qubit part of an initial product state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum QubitInit {
    Ground,
    Excited,
    DressedPlus,
    DressedMinus,
}

/// Initial product state `|qubit⟩ ⊗ |n_1, …, n_N⟩`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InitialState {
    pub qubit: QubitInit,
    pub fock: Vec<usize>,
}

impl InitialState {
    pub fn vacuum(qubit: QubitInit, n_modes: usize) -> Self {
        Self { qubit, fock: vec![0; n_modes] }
    }

    pub fn build(&self, h: &HilbertSpec, dressed: &DressedQubit) -> Result<Array1<C64>> {
        if self.fock.len() != h.n_modes() {
            return Err(Error::SpecMismatch(format!(
                "initial state has {} occupations for {} modes",
                self.fock.len(),
                h.n_modes()
            )));
        }
        for (k, &n) in self.fock.iter().enumerate() {
            if n >= h.mode_dim(k) {
                return Err(Error::SpecMismatch(format!(
                    "initial occupation {n} exceeds truncation {} on mode {k}",
                    h.mode_dim(k)
                )));
            }
        }
        let psi = match self.qubit {
            QubitInit::Ground => {
                let mut v: Array1<C64> = Array1::zeros(h.total_dim());
                v[h.basis_index(0, &self.fock)] = C64::new(1.0, 0.0);
                v
            }
            QubitInit::Excited => {
                let mut v: Array1<C64> = Array1::zeros(h.total_dim());
                v[h.basis_index(1, &self.fock)] = C64::new(1.0, 0.0);
                v
            }
            QubitInit::DressedPlus => dressed.product_state(true, h, &self.fock),
            QubitInit::DressedMinus => dressed.product_state(false, h, &self.fock),
        };
        Ok(psi)
    }
}

/// The conditional operation a run is measured against.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ConditionalCase {
    pub kind: ConditionalKind,
}

/// Per-run diagnostics alongside the fidelity records.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunDiagnostics {
    pub path: EvolutionPath,
    pub dt_used: f64,
    pub steps_total: usize,
    pub refine_error: Option<f64>,
    pub max_leakage: f64,
    pub leakage_breached: bool,
}

/// Records plus diagnostics from one comparison run.
#[derive(Debug, Clone)]
pub struct CompareRun {
    pub records: Vec<FidelityRecord>,
    pub diagnostics: RunDiagnostics,
}

impl CompareRun {
    pub fn final_record(&self) -> &FidelityRecord {
        self.records.last().expect("a run always has at least one record")
    }
}

fn case_couplings(
    spec: &SystemSpec,
    h: &HilbertSpec,
    kind: ConditionalKind,
) -> Result<Vec<C64>> {
    match kind {
        ConditionalKind::JointDisplacement => {
            // one single-mode exchange term per mode, in mode order
            let mut per_mode: Vec<Option<C64>> = vec![None; h.n_modes()];
            for term in spec.terms() {
                let nets = term.net_exponents();
                let active: Vec<usize> = nets
                    .iter()
                    .enumerate()
                    .filter(|(_, &n)| n != 0)
                    .map(|(k, _)| k)
                    .collect();
                let ok = active.len() == 1
                    && term.exponents()[active[0]] == (1, 0)
                    && term.exponents().iter().enumerate().all(|(k, &(m1, m2))| {
                        k == active[0] || (m1, m2) == (0, 0)
                    });
                if !ok {
                    return Err(Error::SpecMismatch(
                        "joint displacement expects one single-mode exchange term per mode"
                            .into(),
                    ));
                }
                if per_mode[active[0]].replace(term.strength()).is_some() {
                    return Err(Error::SpecMismatch(
                        "joint displacement has two terms on one mode".into(),
                    ));
                }
            }
            per_mode
                .into_iter()
                .enumerate()
                .map(|(k, g)| {
                    g.ok_or_else(|| {
                        Error::SpecMismatch(format!("joint displacement missing a term on mode {k}"))
                    })
                })
                .collect()
        }
        _ => {
            if spec.terms().len() != 1 {
                return Err(Error::SpecMismatch(format!(
                    "{kind:?} comparison expects exactly one interaction term, got {}",
                    spec.terms().len()
                )));
            }
            let term = &spec.terms()[0];
            let expected: Vec<(u32, u32)> = match kind {
                ConditionalKind::Displacement => vec![(1, 0)],
                ConditionalKind::Squeeze => vec![(2, 0)],
                ConditionalKind::Beamsplitter => vec![(1, 0), (0, 1)],
                ConditionalKind::TwoModeSqueeze => vec![(1, 0), (1, 0)],
                ConditionalKind::Generic { m1, m2 } => vec![(m1, 0), (0, m2)],
                ConditionalKind::JointDisplacement => unreachable!(),
            };
            if term.exponents() != expected.as_slice() {
                return Err(Error::SpecMismatch(format!(
                    "{kind:?} comparison expects term exponents {expected:?}, got {:?}",
                    term.exponents()
                )));
            }
            Ok(vec![term.strength()])
        }
    }
}

/// Propagate exactly, rotate into the interaction picture at sampled
/// times, and score each sample against the analytic conditional target.
pub fn compare_run(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
    cfg: &PropagationConfig,
    initial: &InitialState,
    case: &ConditionalCase,
) -> Result<CompareRun> {
    let dressed = dressed_qubit(spec.drive_strength(), spec.qubit_detuning())?;
    let couplings = case_couplings(spec, h, case.kind)?;
    let psi0 = initial.build(h, &dressed)?;

    let margin = rwa_margin(spec, frame, DEFAULT_RWA_THRESHOLD)?;
    let sample_times = sample_grid(cfg.t_final, cfg.samples);
    let ev = sampled_evolution(spec, frame, h, cfg, &sample_times)?;
    let cmp_indices = comparison_indices(h, cfg.truncation_tail);

    let mut records = Vec::with_capacity(ev.times.len());
    let mut max_leakage = 0.0_f64;
    for (i, &t) in ev.times.iter().enumerate() {
        let u_int = &ev.interaction[i];
        // long step products keep unitarity only to ~1e-9; strip the
        // rounding drift so the fidelity gate sees unit-norm states
        let psi = renormalize(u_int.dot(&psi0));
        let target = conditional_target(case.kind, &dressed, &couplings, t, h)?;
        let psi_target = renormalize(target.matrix().dot(&psi0));
        let sf = state_fidelity(&psi.view(), &psi_target.view())?;
        let of = operator_fidelity_on_indices(u_int, target.matrix(), &cmp_indices);
        let leak = state_leakage(&psi.view(), h, cfg.truncation_tail);
        max_leakage = max_leakage.max(leak);
        records.push(FidelityRecord {
            time: t,
            state_fidelity: sf,
            operator_fidelity: of,
            leakage: leak,
            rwa_ratio_g: margin.ratio_g,
            rwa_ratio_delta: margin.ratio_detuning,
        });
    }

    Ok(CompareRun {
        records,
        diagnostics: RunDiagnostics {
            path: ev.path,
            dt_used: ev.dt_used,
            steps_total: ev.steps_total,
            refine_error: ev.refine_error,
            max_leakage,
            leakage_breached: max_leakage > cfg.tail_tolerance,
        },
    })
}

/// Tail mass of the forward-branch target applied to an initial Fock
/// product state: the static truncation-adequacy heuristic. The target's
/// population must stay out of the monitored top levels for the truncation
/// to be trusted.
pub fn target_tail_mass(
    kind: ConditionalKind,
    couplings: &[C64],
    t: f64,
    h: &HilbertSpec,
    fock: &[usize],
    tail: usize,
) -> Result<f64> {
    let target = crate::targets::target_mode_unitary(kind, couplings, t, h, 1.0)?;
    let mut mode_state: Array1<C64> = Array1::zeros(h.mode_space_dim());
    let flat = fock
        .iter()
        .zip(h.mode_dims())
        .fold(0usize, |acc, (&n, &d)| acc * d + n);
    mode_state[flat] = C64::new(1.0, 0.0);
    let moved = target.dot(&mode_state);
    // place on the full space with the qubit in |g⟩; leakage ignores the
    // qubit factor
    let mut full: Array1<C64> = Array1::zeros(h.total_dim());
    full.slice_mut(s![..h.mode_space_dim()]).assign(&moved);
    Ok(state_leakage(&full.view(), h, tail))
}

fn renormalize(mut v: Array1<C64>) -> Array1<C64> {
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.mapv_inplace(|z| z / norm);
    }
    v
}

fn sample_grid(t_final: f64, samples: usize) -> Vec<f64> {
    if t_final == 0.0 || samples == 0 {
        return vec![0.0];
    }
    (0..=samples)
        .map(|i| t_final * i as f64 / samples as f64)
        .collect()
}

/// A sweep axis over a scalar system parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SweepAxis {
    DriveFreq,
    DriveStrength,
    /// Multiplier applied to every coupling magnitude.
    CouplingScale,
}

impl SweepAxis {
    pub fn apply(&self, spec: &SystemSpec, value: f64) -> SystemSpec {
        match self {
            SweepAxis::DriveFreq => spec.with_drive_freq(value),
            SweepAxis::DriveStrength => spec.with_drive_strength(value),
            SweepAxis::CouplingScale => spec.with_coupling_scale(value),
        }
    }
}

/// One sweep row: the axis value and the records of its run.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub run: CompareRun,
}

/// One comparison run per axis value, concurrently, with rows in the
/// declared order.
pub fn run_sweep(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
    cfg: &PropagationConfig,
    initial: &InitialState,
    case: &ConditionalCase,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::EmptySweep);
    }
    let results: Vec<Result<SweepRow>> = run_indexed(values, |&value| {
        let varied = axis.apply(spec, value);
        compare_run(&varied, frame, h, cfg, initial, case).map(|run| SweepRow { value, run })
    });
    results.into_iter().collect()
}

/// Infidelity trend against the coupling-to-splitting ratio.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScalingStudy {
    /// (ratio g/ε, final-state infidelity) per requested ratio.
    pub rows: Vec<(f64, f64)>,
    /// Fitted slope of log(infidelity) against log(ratio).
    pub slope: f64,
    /// Whether infidelity decreased strictly along the requested ratios.
    pub monotone_decreasing: bool,
}

/// Rerun the comparison at fixed target amplitude for each coupling ratio.
/// The coupling is set to `ratio · ε` and the final time is stretched to
/// keep `g · t_final` fixed, so every run aims at the same amplitude.
pub fn scaling_study(
    spec: &SystemSpec,
    frame: &FrameIntegers,
    h: &HilbertSpec,
    cfg: &PropagationConfig,
    initial: &InitialState,
    case: &ConditionalCase,
    ratios: &[f64],
) -> Result<ScalingStudy> {
    if ratios.is_empty() {
        return Err(Error::EmptySweep);
    }
    if ratios.windows(2).any(|w| w[1] >= w[0]) || ratios.iter().any(|&r| r >= 1.0 || r <= 0.0) {
        return Err(Error::SpecMismatch(
            "scaling ratios must be strictly descending and inside (0, 1)".into(),
        ));
    }
    let dressed = dressed_qubit(spec.drive_strength(), spec.qubit_detuning())?;
    let g0 = spec.max_coupling();
    if g0 == 0.0 {
        return Err(Error::SpecMismatch("scaling study needs a nonzero coupling".into()));
    }
    let rows: Vec<Result<(f64, f64)>> = run_indexed(ratios, |&ratio| {
        let g_new = ratio * dressed.splitting;
        let factor = g_new / g0;
        let varied = spec.with_coupling_scale(factor);
        let mut cfg_r = cfg.clone();
        cfg_r.t_final = cfg.t_final / factor;
        let run = compare_run(&varied, frame, h, &cfg_r, initial, case)?;
        Ok((ratio, 1.0 - run.final_record().state_fidelity))
    });
    let rows: Vec<(f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let monotone = rows.windows(2).all(|w| w[1].1 < w[0].1);
    let slope = loglog_slope(&rows);
    Ok(ScalingStudy { rows, slope, monotone_decreasing: monotone })
}

fn loglog_slope(rows: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::{solve_frame_integers, InteractionTerm};
    use crate::propagation::default_dt;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn jc_spec(g: f64, omega: f64) -> SystemSpec {
        let t = InteractionTerm::new(c(g, 0.0), vec![(1, 0)]).unwrap();
        SystemSpec::new(1.0, vec![1.0], vec![t], omega, 1.0).unwrap()
    }

    fn quick_cfg(t_final: f64, spec: &SystemSpec) -> PropagationConfig {
        PropagationConfig {
            t_final,
            dt: default_dt(spec),
            samples: 4,
            truncation_tail: 2,
            tail_tolerance: 1e-6,
            refine_check: None,
        }
    }

    #[test]
    fn state_fidelity_basics() {
        let e0: Array1<C64> = ndarray::array![c(1.0, 0.0), c(0.0, 0.0)];
        let e1: Array1<C64> = ndarray::array![c(0.0, 0.0), c(1.0, 0.0)];
        assert_abs_diff_eq!(state_fidelity(&e0.view(), &e0.view()).unwrap(), 1.0);
        assert_abs_diff_eq!(state_fidelity(&e0.view(), &e1.view()).unwrap(), 0.0);
        let plus: Array1<C64> =
            ndarray::array![c(1.0 / 2.0_f64.sqrt(), 0.0), c(1.0 / 2.0_f64.sqrt(), 0.0)];
        assert_abs_diff_eq!(
            state_fidelity(&plus.view(), &e0.view()).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        let bad: Array1<C64> = ndarray::array![c(0.5, 0.0), c(0.0, 0.0)];
        assert!(matches!(
            state_fidelity(&bad.view(), &e0.view()),
            Err(Error::Normalization { .. })
        ));
    }

    #[test]
    fn operator_fidelity_basics() {
        use crate::fock::identity;
        let h = HilbertSpec::new(vec![2]).unwrap();
        let n = h.total_dim();
        let u = identity(n);
        let p = identity(n);
        assert_abs_diff_eq!(operator_fidelity(&u, &u, &p).unwrap(), 1.0);

        // global phase invariance
        let v = u.mapv(|z| z * C64::from_polar(1.0, 0.83));
        assert_abs_diff_eq!(operator_fidelity(&u, &v, &p).unwrap(), 1.0, epsilon = 1e-14);

        // V = U·(σz ⊗ I) on a qubit ⊗ d space: the 4x4 trace is zero by hand
        let sz = crate::fock::embed(
            &crate::fock::qubit_operator(crate::fock::QubitKind::SigmaZ),
            crate::fock::Slot::Qubit,
            &h,
        )
        .unwrap();
        let v2 = u.dot(sz.matrix());
        assert_abs_diff_eq!(operator_fidelity(&u, &v2, &p).unwrap(), 0.0, epsilon = 1e-14);

        // non-projector rejected
        let half = identity(n).mapv(|z| z * 0.5);
        assert!(matches!(
            operator_fidelity(&u, &u, &half),
            Err(Error::NotProjector { .. })
        ));
        // non-unitary rejected
        let bad = identity(n).mapv(|z| z * 2.0);
        assert!(matches!(
            operator_fidelity(&bad, &u, &p),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn indexed_fidelity_matches_projector_form() {
        use crate::fock::identity;
        let h = HilbertSpec::new(vec![5]).unwrap();
        let tail = 1;
        let p = crate::propagation::comparison_projector(&h, tail);
        let idx = comparison_indices(&h, tail);
        let spec = jc_spec(0.05, 0.4);
        let frame = solve_frame_integers(spec.terms()).unwrap();
        let hd = crate::hamiltonian::build_drive_frame(&spec, &frame, &h, 0.0).unwrap();
        let u = crate::propagation::propagate_static(&hd, 1.3).unwrap();
        let v = identity(h.total_dim());
        let full = operator_fidelity(u.matrix(), &v, &p).unwrap();
        let fast = operator_fidelity_on_indices(u.matrix(), &v, &idx);
        assert_abs_diff_eq!(full, fast, epsilon = 1e-12);
    }

    #[test]
    fn rwa_margin_ratios() {
        let spec = jc_spec(0.01, 1.0);
        let frame = solve_frame_integers(spec.terms()).unwrap();
        let m = rwa_margin(&spec, &frame, 0.1).unwrap();
        assert_abs_diff_eq!(m.ratio_g, 0.01, epsilon = 1e-12);
        assert_abs_diff_eq!(m.ratio_detuning, 0.0, epsilon = 1e-15);
        assert!(!m.violated);

        let weak = jc_spec(0.02, 0.05);
        let m2 = rwa_margin(&weak, &frame, 0.1).unwrap();
        assert_abs_diff_eq!(m2.ratio_g, 0.4, epsilon = 1e-12);
        assert!(m2.violated);

        // drive detuned from resonance by exactly ε = |Δ|
        let t = InteractionTerm::new(c(0.01, 0.0), vec![(1, 0)]).unwrap();
        let det = SystemSpec::new(2.0, vec![1.0], vec![t], 0.0, 1.5).unwrap();
        let m3 = rwa_margin(&det, &frame, 0.1).unwrap();
        assert_abs_diff_eq!(m3.ratio_detuning, 1.0, epsilon = 1e-12);
        assert!(m3.violated);
    }

    #[test]
    fn compare_run_zero_coupling_is_exact() {
        // zero-strength exchange term: both evolutions are the identity in
        // the interaction picture, so fidelity stays pinned at 1
        let frame = crate::interaction::FrameIntegers::new(vec![1]).unwrap();
        let h = HilbertSpec::new(vec![8]).unwrap();
        let spec = jc_spec(0.0, 0.3);
        let cfg = quick_cfg(5.0, &spec);
        let run = compare_run(
            &spec,
            &frame,
            &h,
            &cfg,
            &InitialState::vacuum(QubitInit::Ground, 1),
            &ConditionalCase { kind: ConditionalKind::Displacement },
        )
        .unwrap();
        for r in &run.records {
            assert!(r.state_fidelity > 1.0 - 1e-9);
            assert!(r.leakage < 1e-12);
        }
    }

    #[test]
    fn compare_run_reports_fidelity_one_at_t_zero() {
        let spec = jc_spec(0.002, 0.2);
        let frame = solve_frame_integers(spec.terms()).unwrap();
        let h = HilbertSpec::new(vec![10]).unwrap();
        let cfg = quick_cfg(0.0, &spec);
        let run = compare_run(
            &spec,
            &frame,
            &h,
            &cfg,
            &InitialState::vacuum(QubitInit::Ground, 1),
            &ConditionalCase { kind: ConditionalKind::Displacement },
        )
        .unwrap();
        assert_eq!(run.records.len(), 1);
        assert_abs_diff_eq!(run.records[0].time, 0.0);
        assert_abs_diff_eq!(run.records[0].state_fidelity, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(run.records[0].leakage, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn records_invariant_under_initial_global_phase() {
        // a global phase on the initial state cannot change any record
        let spec = jc_spec(0.002, 0.2);
        let frame = solve_frame_integers(spec.terms()).unwrap();
        let h = HilbertSpec::new(vec![10]).unwrap();
        let cfg = quick_cfg(50.0, &spec);
        let case = ConditionalCase { kind: ConditionalKind::Displacement };
        let init = InitialState::vacuum(QubitInit::Ground, 1);
        let run = compare_run(&spec, &frame, &h, &cfg, &init, &case).unwrap();

        // same comparison with the state built by hand and phased
        let dressed = dressed_qubit(0.2, 0.0).unwrap();
        let psi0 = init.build(&h, &dressed).unwrap();
        let phased = psi0.mapv(|z| z * C64::from_polar(1.0, 1.23));
        let times = sample_grid(cfg.t_final, cfg.samples);
        let ev = sampled_evolution(&spec, &frame, &h, &cfg, &times).unwrap();
        let u = ev.interaction.last().unwrap();
        let target = conditional_target(
            ConditionalKind::Displacement,
            &dressed,
            &[c(0.002, 0.0)],
            *ev.times.last().unwrap(),
            &h,
        )
        .unwrap();
        let f_phased = state_fidelity(
            &u.dot(&phased).view(),
            &target.matrix().dot(&phased).view(),
        )
        .unwrap();
        assert_abs_diff_eq!(
            f_phased,
            run.final_record().state_fidelity,
            epsilon = 1e-12
        );
    }

    #[test]
    fn sweep_preserves_order_and_rejects_empty() {
        let spec = jc_spec(0.002, 0.2);
        let frame = solve_frame_integers(spec.terms()).unwrap();
        let h = HilbertSpec::new(vec![8]).unwrap();
        let cfg = quick_cfg(10.0, &spec);
        let case = ConditionalCase { kind: ConditionalKind::Displacement };
        let init = InitialState::vacuum(QubitInit::Ground, 1);

        let values = [1.01, 0.99, 1.0, 1.0];
        let rows = run_sweep(&spec, &frame, &h, &cfg, &init, &case, SweepAxis::DriveFreq, &values)
            .unwrap();
        let got: Vec<f64> = rows.iter().map(|r| r.value).collect();
        assert_eq!(got, values);
        // duplicate axis values stay duplicated
        assert_eq!(rows[2].run.records.len(), rows[3].run.records.len());

        assert!(matches!(
            run_sweep(&spec, &frame, &h, &cfg, &init, &case, SweepAxis::DriveFreq, &[]),
            Err(Error::EmptySweep)
        ));
    }

    #[test]
    fn scaling_study_validates_ratios() {
        let spec = jc_spec(0.002, 0.2);
        let frame = solve_frame_integers(spec.terms()).unwrap();
        let h = HilbertSpec::new(vec![8]).unwrap();
        let cfg = quick_cfg(10.0, &spec);
        let case = ConditionalCase { kind: ConditionalKind::Displacement };
        let init = InitialState::vacuum(QubitInit::Ground, 1);
        assert!(matches!(
            scaling_study(&spec, &frame, &h, &cfg, &init, &case, &[]),
            Err(Error::EmptySweep)
        ));
        assert!(scaling_study(&spec, &frame, &h, &cfg, &init, &case, &[0.01, 0.1]).is_err());
    }

    #[test]
    fn case_shape_validation() {
        let spec = jc_spec(0.002, 0.2);
        let h = HilbertSpec::new(vec![8]).unwrap();
        // wrong kind for a single-mode exchange term
        assert!(case_couplings(&spec, &h, ConditionalKind::Squeeze).is_err());
        assert!(case_couplings(&spec, &h, ConditionalKind::Displacement).is_ok());

        // joint displacement wants one exchange term per mode
        let t1 = InteractionTerm::new(c(1e-3, 0.0), vec![(1, 0), (0, 0)]).unwrap();
        let t2 = InteractionTerm::new(c(2e-3, 0.0), vec![(0, 0), (1, 0)]).unwrap();
        let spec2 = SystemSpec::new(1.0, vec![1.0, 1.0], vec![t1, t2], 0.2, 1.0).unwrap();
        let h2 = HilbertSpec::new(vec![6, 6]).unwrap();
        let gs = case_couplings(&spec2, &h2, ConditionalKind::JointDisplacement).unwrap();
        assert_eq!(gs, vec![c(1e-3, 0.0), c(2e-3, 0.0)]);
    }
}
