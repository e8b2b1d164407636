//! Dense operator algebra on a truncated qubit-plus-multimode Hilbert space.
//!
//! The composite space is ordered qubit-first: a basis vector is
//! `|q⟩ ⊗ |n_1⟩ ⊗ … ⊗ |n_N⟩` with qubit basis order `(|g⟩, |e⟩)` and each
//! mode truncated to `mode_dims[k]` Fock levels. All embeddings and tensor
//! products in the crate use this ordering; flattened indices are row-major
//! over the factors.

use ndarray::prelude::*;
use ndarray::linalg::kron;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::interaction::InteractionTerm;

/// Relative tolerance for Hermiticity checks on generator inputs.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Layout of the composite Hilbert space: qubit first, then one truncated
/// Fock factor per mode.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct HilbertSpec {
    mode_dims: Vec<usize>,
}

impl HilbertSpec {
    /// A qubit plus one truncated Fock factor per entry of `mode_dims`.
    pub fn new(mode_dims: Vec<usize>) -> Result<Self> {
        if mode_dims.is_empty() {
            return Err(Error::EmptySpec);
        }
        for &d in &mode_dims {
            if d < 2 {
                return Err(Error::InvalidDimension { dim: d });
            }
        }
        Ok(Self { mode_dims })
    }

    pub fn n_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn mode_dim(&self, mode: usize) -> usize {
        self.mode_dims[mode]
    }

    /// Product of all mode truncations, without the qubit factor.
    pub fn mode_space_dim(&self) -> usize {
        self.mode_dims.iter().product()
    }

    pub fn total_dim(&self) -> usize {
        2 * self.mode_space_dim()
    }

    /// Dimensions in tensor order: `[2, d_1, …, d_N]`.
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(1 + self.mode_dims.len());
        dims.push(2);
        dims.extend_from_slice(&self.mode_dims);
        dims
    }

    /// Flattened index of `|q⟩ ⊗ |n_1⟩ ⊗ …`.
    pub fn basis_index(&self, qubit: usize, occupations: &[usize]) -> usize {
        debug_assert_eq!(occupations.len(), self.n_modes());
        let mut idx = qubit;
        for (n, &d) in occupations.iter().zip(&self.mode_dims) {
            debug_assert!(*n < d);
            idx = idx * d + n;
        }
        idx
    }

    /// Occupation of `mode` encoded in a flattened full-space index.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        let mut rem = index;
        for &d in self.mode_dims[mode + 1..].iter().rev() {
            rem /= d;
        }
        rem % self.mode_dims[mode]
    }

    /// Qubit component (0 = ground, 1 = excited) of a flattened index.
    pub fn qubit_component(&self, index: usize) -> usize {
        index / self.mode_space_dim()
    }
}

/// Dense complex matrix tagged with the layout it acts on.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: Array2<C64>,
    space: HilbertSpec,
}

impl Operator {
    pub fn new(matrix: Array2<C64>, space: HilbertSpec) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::EmbedMismatch {
                expected: n,
                got: matrix.nrows(),
            });
        }
        Ok(Self { matrix, space })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: dagger(&self.matrix),
            space: self.space.clone(),
        }
    }

    /// Matrix product, checked for matching layouts.
    pub fn dot(&self, rhs: &Operator) -> Result<Operator> {
        if self.space != rhs.space {
            return Err(Error::SpecMismatch(
                "operator product across different Hilbert layouts".into(),
            ));
        }
        Ok(Self {
            matrix: self.matrix.dot(&rhs.matrix),
            space: self.space.clone(),
        })
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol * scale_of(&self.matrix)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }
}

/// Conjugate transpose.
pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn scale_of(a: &Array2<C64>) -> f64 {
    max_abs(a).max(1.0)
}

/// Max-entry deviation from `A = A†`.
pub fn hermiticity_error(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Max-entry deviation of `U†U` from the identity.
pub fn unitarity_error(u: &Array2<C64>) -> f64 {
    let gram = dagger(u).dot(u);
    let n = gram.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((gram[[i, j]] - target).norm());
        }
    }
    worst
}

/// Kronecker product over an ordered factor list.
pub fn kron_all<'a, I>(factors: I) -> Array2<C64>
where
    I: IntoIterator<Item = &'a Array2<C64>>,
{
    let mut iter = factors.into_iter();
    let first = iter.next().expect("kron_all needs at least one factor");
    let mut acc = first.clone();
    for f in iter {
        acc = kron(&acc, f);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Annihilate,
    Create,
    Number,
}

/// Truncated single-mode ladder matrix. `Create` is the exact adjoint of
/// `Annihilate`; `Number` is `a† a`, diagonal `(0, 1, …, dim-1)`.
pub fn ladder(kind: LadderKind, dim: usize) -> Result<Array2<C64>> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    let mut m = Array2::zeros((dim, dim));
    match kind {
        LadderKind::Annihilate => {
            for n in 1..dim {
                m[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
            }
        }
        LadderKind::Create => {
            for n in 1..dim {
                m[[n, n - 1]] = C64::new((n as f64).sqrt(), 0.0);
            }
        }
        LadderKind::Number => {
            for n in 0..dim {
                m[[n, n]] = C64::new(n as f64, 0.0);
            }
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QubitKind {
    SigmaZ,
    SigmaX,
    SigmaPlus,
    SigmaMinus,
    /// `|+̄⟩⟨+̄|` for dressing angle θ.
    ProjDressedPlus(f64),
    /// `|−̄⟩⟨−̄|` for dressing angle θ.
    ProjDressedMinus(f64),
}

/// 2x2 qubit matrices in the `(|g⟩, |e⟩)` basis, with
/// `σ_z = |e⟩⟨e| − |g⟩⟨g|` and dressed states
/// `|+̄⟩ = sin(θ/2)|g⟩ + cos(θ/2)|e⟩`, `|−̄⟩ = cos(θ/2)|g⟩ − sin(θ/2)|e⟩`.
pub fn qubit_operator(kind: QubitKind) -> Array2<C64> {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match kind {
        QubitKind::SigmaZ => array![[-one, z], [z, one]],
        QubitKind::SigmaX => array![[z, one], [one, z]],
        // ⟨e|σ₊|g⟩ = 1
        QubitKind::SigmaPlus => array![[z, z], [one, z]],
        QubitKind::SigmaMinus => array![[z, one], [z, z]],
        QubitKind::ProjDressedPlus(theta) => {
            let s = C64::new((theta / 2.0).sin(), 0.0);
            let c = C64::new((theta / 2.0).cos(), 0.0);
            array![[s * s, s * c], [c * s, c * c]]
        }
        QubitKind::ProjDressedMinus(theta) => {
            let c = C64::new((theta / 2.0).cos(), 0.0);
            let ms = C64::new(-(theta / 2.0).sin(), 0.0);
            array![[c * c, c * ms], [ms * c, ms * ms]]
        }
    }
}

/// Tensor slot of the composite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Qubit,
    Mode(usize),
}

/// Kronecker extension of a single-factor matrix with identities on all
/// other factors.
pub fn embed(op: &Array2<C64>, slot: Slot, spec: &HilbertSpec) -> Result<Operator> {
    let slot_index = match slot {
        Slot::Qubit => 0,
        Slot::Mode(k) => {
            if k >= spec.n_modes() {
                return Err(Error::SpecMismatch(format!(
                    "mode index {k} out of range for {} modes",
                    spec.n_modes()
                )));
            }
            k + 1
        }
    };
    let dims = spec.factor_dims();
    if op.nrows() != dims[slot_index] || op.ncols() != dims[slot_index] {
        return Err(Error::EmbedMismatch {
            expected: dims[slot_index],
            got: op.nrows(),
        });
    }
    let factors: Vec<Array2<C64>> = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| if i == slot_index { op.clone() } else { identity(d) })
        .collect();
    Operator::new(kron_all(factors.iter()), spec.clone())
}

/// Monomial `∏_k a_k^{m_k1} a_k†^{m_k2}` on the mode space only (no qubit
/// factor). Within each mode the annihilation block multiplies the creation
/// block from the left, which matters for mixed exponents.
pub fn monomial_on_modes(term: &InteractionTerm, spec: &HilbertSpec) -> Result<Array2<C64>> {
    if term.exponents().len() != spec.n_modes() {
        return Err(Error::TermShape {
            expected: spec.n_modes(),
            got: term.exponents().len(),
        });
    }
    let factors: Vec<Array2<C64>> = term
        .exponents()
        .iter()
        .zip(spec.mode_dims())
        .map(|(&(m1, m2), &d)| -> Result<Array2<C64>> {
            let a = ladder(LadderKind::Annihilate, d)?;
            let adag = ladder(LadderKind::Create, d)?;
            let mut f = identity(d);
            for _ in 0..m1 {
                f = f.dot(&a);
            }
            for _ in 0..m2 {
                f = f.dot(&adag);
            }
            Ok(f)
        })
        .collect::<Result<_>>()?;
    Ok(kron_all(factors.iter()))
}

/// Monomial embedded on the full space (identity on the qubit factor),
/// scaled by 1 (the coupling strength is applied by the Hamiltonian
/// builders, not here).
pub fn monomial_operator(term: &InteractionTerm, spec: &HilbertSpec) -> Result<Operator> {
    let modes = monomial_on_modes(term, spec)?;
    Operator::new(kron(&identity(2), &modes), spec.clone())
}

/// Cached Hermitian eigendecomposition, for repeated `exp(-iHt)` at many t.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    evals: Array1<f64>,
    evecs: Array2<C64>,
}

impl SpectralDecomp {
    pub fn new(h: &Array2<C64>) -> Result<Self> {
        let dev = hermiticity_error(h);
        if dev > HERMITICITY_TOL * scale_of(h) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        // LAPACK reads the row-major buffer column-major and therefore
        // diagonalizes Hᵀ = H*; pin the layout and conjugate the returned
        // vectors to recover H's own eigenbasis (a no-op for real input)
        let h_rows = h.as_standard_layout().into_owned();
        let (evals, evecs) = h_rows
            .eigh(UPLO::Lower)
            .map_err(|_| Error::NotHermitian { deviation: dev })?;
        let evecs = evecs.mapv(|z| z.conj());
        debug_assert!({
            let j = 0;
            let col = evecs.column(j).to_owned();
            let hv = h.dot(&col);
            hv.iter()
                .zip(col.iter())
                .map(|(a, b)| (a - b * C64::new(evals[j], 0.0)).norm())
                .sum::<f64>()
                < 1e-8 * scale_of(h) * h.nrows() as f64
        });
        Ok(Self { evals, evecs })
    }

    /// `exp(-iHt)` reconstructed from the cached spectrum.
    pub fn unitary(&self, t: f64) -> Array2<C64> {
        let phases: Array1<C64> = self
            .evals
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * t))
            .collect();
        // V · diag(e^{-iλt}) · V†
        let mut scaled = self.evecs.clone();
        for (mut col, ph) in scaled.columns_mut().into_iter().zip(phases.iter()) {
            col.mapv_inplace(|z| z * ph);
        }
        scaled.dot(&dagger(&self.evecs))
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.evals
    }
}

/// `exp(-iHt)` of a Hermitian generator via eigendecomposition.
pub fn expm_i_matrix(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    Ok(SpectralDecomp::new(h)?.unitary(t))
}

/// `exp(-iHt)` on the full space.
pub fn expm_i(h: &Operator, t: f64) -> Result<Operator> {
    Ok(Operator {
        matrix: expm_i_matrix(h.matrix(), t)?,
        space: h.space().clone(),
    })
}
