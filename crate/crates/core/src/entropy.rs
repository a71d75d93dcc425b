//! Entropic functionals. All logarithms are base 2, so every value is in bits.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, kron, ComplexMatrix, Subsystem};
use crate::states::{DensityMatrix, ZERO_EIGENVALUE};

/// Non-negative weights summing to one (within 1e-10).
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbabilities("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidProbabilities(format!("entry {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidProbabilities(format!("sum {total}")));
        }
        Ok(Self(probs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `x log₂ x` with `0 log 0 = 0`; anything at or below the zero threshold
/// contributes nothing.
fn xlog2x(x: f64) -> f64 {
    if x <= ZERO_EIGENVALUE {
        0.0
    } else {
        x * x.log2()
    }
}

/// Shannon entropy of raw weights, skipping entries `≤ 1e-10`.
pub fn entropy_of_weights(weights: &[f64]) -> f64 {
    let h = -weights.iter().map(|&p| xlog2x(p)).sum::<f64>();
    h.max(0.0)
}

pub fn shannon(p: &ProbabilityVector) -> f64 {
    entropy_of_weights(&p.0)
}

/// Binary entropy `h(x) = −x log₂ x − (1−x) log₂(1−x)`.
pub fn binary_entropy(x: f64) -> f64 {
    entropy_of_weights(&[x, 1.0 - x])
}

/// `S(ρ) = −tr ρ log₂ ρ`
pub fn von_neumann(rho: &DensityMatrix) -> f64 {
    entropy_of_weights(&rho.eigenvalues())
}

/// Quantum relative entropy, with a typed value for the unbounded case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelativeEntropy {
    Finite(f64),
    /// `supp σ ⊄ supp ρ`
    Infinite,
}

impl RelativeEntropy {
    pub fn is_finite(self) -> bool {
        matches!(self, RelativeEntropy::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            RelativeEntropy::Finite(v) => Some(v),
            RelativeEntropy::Infinite => None,
        }
    }

    /// Lossy conversion for display and CSV output.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn plus(self, slack: f64) -> RelativeEntropy {
        match self {
            RelativeEntropy::Finite(v) => RelativeEntropy::Finite(v + slack),
            RelativeEntropy::Infinite => RelativeEntropy::Infinite,
        }
    }
}

impl PartialOrd for RelativeEntropy {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use RelativeEntropy::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Finite(_), Infinite) => Some(Ordering::Less),
            (Infinite, Finite(_)) => Some(Ordering::Greater),
            (Infinite, Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for RelativeEntropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelativeEntropy::Finite(v) => write!(f, "{v:.6}"),
            RelativeEntropy::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for RelativeEntropy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RelativeEntropy::Finite(v) => s.serialize_f64(*v),
            RelativeEntropy::Infinite => s.serialize_str("inf"),
        }
    }
}

/// `S(σ‖ρ)` on raw Hermitian PSD unit-trace matrices.
///
/// Evaluated in the two eigenbases: with `σ = Σ λᵢ|sᵢ⟩⟨sᵢ|` and
/// `ρ = Σ μⱼ|rⱼ⟩⟨rⱼ|`, the cross term is `Σᵢⱼ λᵢ |⟨sᵢ|rⱼ⟩|² log₂ μⱼ`. The
/// weight σ puts on ker ρ decides the infinite case.
pub(crate) fn relative_entropy_matrices(
    sigma: &ComplexMatrix,
    rho: &ComplexMatrix,
) -> Result<RelativeEntropy> {
    if sigma.rows() != rho.rows() || sigma.cols() != rho.cols() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy of {}x{} and {}x{}",
            sigma.rows(),
            sigma.cols(),
            rho.rows(),
            rho.cols()
        )));
    }
    let s = hermitian_eig(sigma)?;
    let r = hermitian_eig(rho)?;
    let n = s.dim();
    let mut neg_entropy = 0.0;
    let mut cross = 0.0;
    let mut kernel_weight = 0.0;
    for i in 0..n {
        let lam = s.eigenvalues[i];
        if lam <= ZERO_EIGENVALUE {
            continue;
        }
        neg_entropy += lam * lam.log2();
        for j in 0..n {
            let overlap: f64 = (0..n)
                .map(|k| s.eigenvectors[(k, i)].conj() * r.eigenvectors[(k, j)])
                .sum::<num_complex::Complex64>()
                .norm_sqr();
            let mu = r.eigenvalues[j];
            if mu <= ZERO_EIGENVALUE {
                kernel_weight += lam * overlap;
            } else {
                cross += lam * overlap * mu.log2();
            }
        }
    }
    if kernel_weight > ZERO_EIGENVALUE {
        return Ok(RelativeEntropy::Infinite);
    }
    Ok(RelativeEntropy::Finite((neg_entropy - cross).max(0.0)))
}

/// `S(σ‖ρ) = tr(σ log₂ σ − σ log₂ ρ)`.
pub fn relative_entropy(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<RelativeEntropy> {
    if sigma.dim_a() != rho.dim_a() || sigma.dim_b() != rho.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy between ({}, {}) and ({}, {}) states",
            sigma.dim_a(),
            sigma.dim_b(),
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    relative_entropy_matrices(sigma.matrix(), rho.matrix())
}

/// `I_Q = S(A) + S(B) − S(A,B)`
pub fn mutual_information(rho: &DensityMatrix) -> f64 {
    let sa = von_neumann(&rho.reduced(Subsystem::A));
    let sb = von_neumann(&rho.reduced(Subsystem::B));
    (sa + sb - von_neumann(rho)).max(0.0)
}

/// `S(A,B) − S(conditioned_on)`; negative for entangled pure states.
pub fn naive_conditional(rho: &DensityMatrix, conditioned_on: Subsystem) -> f64 {
    von_neumann(rho) - von_neumann(&rho.reduced(conditioned_on))
}

/// `S(ρ ‖ ρ_A ⊗ ρ_B)`, the second route to the quantum mutual information.
pub fn mutual_information_as_relent(rho: &DensityMatrix) -> Result<f64> {
    let product = kron(
        rho.reduced(Subsystem::A).matrix(),
        rho.reduced(Subsystem::B).matrix(),
    );
    // The support of ρ always lies inside that of ρ_A ⊗ ρ_B.
    match relative_entropy_matrices(rho.matrix(), &product)? {
        RelativeEntropy::Finite(v) => Ok(v),
        RelativeEntropy::Infinite => Err(Error::InvalidConfig(
            "state escapes the support of its marginals".into(),
        )),
    }
}
