//! Rank-one projective measurements on one subsystem, the conditional
//! ensembles they induce, and the minimization of the average conditional
//! entropy over all such measurements.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_of_weights, von_neumann};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, Subsystem, C64};
use crate::optim::{best_lexicographic, multi_start, SimplexOptions};
use crate::states::{rng_from_seed, DensityMatrix};

/// Outcomes with probability below this are dropped from averages.
pub const NULL_OUTCOME: f64 = 1e-12;

/// Knobs shared by every optimizer in the crate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Seeding grid: `grid` polar points × `2·grid` azimuthal points.
    pub grid: usize,
    /// Best grid points refined by the simplex for measurement problems.
    pub seeds: usize,
    /// Randomized starts for the relative-entropy geometry problems.
    pub restarts: usize,
    /// Objective tolerance for simplex convergence.
    pub tol: f64,
    /// Simplex iterations per start for measurement problems.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid: 12,
            seeds: 4,
            restarts: 30,
            tol: 1e-8,
            max_iter: 200,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid == 0 || self.seeds == 0 || self.restarts == 0 || self.max_iter == 0 {
            return Err(Error::InvalidConfig(
                "grid, seeds, restarts and max_iter must be positive".into(),
            ));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn simplex(&self) -> SimplexOptions {
        SimplexOptions {
            max_iter: self.max_iter,
            f_tol: self.tol,
            x_tol: 1e-4,
            rebuilds: 1,
        }
    }
}

/// Complete set of orthogonal rank-one projectors `|vₙ⟩⟨vₙ|` on a
/// `dim`-level system, together with the coordinates that generated it.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveMeasurement {
    vectors: Vec<Vec<C64>>,
    params: Vec<f64>,
}

fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Fold arbitrary Bloch angles into `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
pub fn canonical_angles(theta: f64, phi: f64) -> (f64, f64) {
    let mut t = wrap(theta, 2.0 * PI);
    let mut p = phi;
    if t > PI {
        t = 2.0 * PI - t;
        p += PI;
    }
    (t, wrap(p, 2.0 * PI))
}

impl ProjectiveMeasurement {
    /// Qubit measurement onto `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` and its
    /// orthogonal complement.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (theta, phi) = canonical_angles(theta, phi);
        let (s, c) = (theta / 2.0).sin_cos();
        let e = C64::from_polar(1.0, phi);
        Self {
            vectors: vec![
                vec![C64::new(c, 0.0), e * s],
                vec![C64::new(s, 0.0), -e * c],
            ],
            params: vec![theta, phi],
        }
    }

    /// Measurement in the columns of `U = diag(e^{iχ}) · Π_{i<j} G_ij(θ, φ)`.
    ///
    /// `params` holds `d(d−1)/2` pairs `(θ_ij, φ_ij)` followed by `d` phases
    /// `χ`. See [`unitary_param_count`].
    pub fn from_unitary_params(dim: usize, params: &[f64]) -> Result<Self> {
        let u = parametrized_unitary(dim, params)?;
        let vectors = (0..dim)
            .map(|k| (0..dim).map(|i| u[(i, k)]).collect())
            .collect();
        Ok(Self {
            vectors,
            params: params.to_vec(),
        })
    }

    /// Bloch angles for qubits, unitary coordinates otherwise.
    pub fn from_params(dim: usize, params: &[f64]) -> Result<Self> {
        if dim == 2 {
            if params.len() != 2 {
                return Err(Error::DimensionMismatch(format!(
                    "{} angles for a qubit measurement",
                    params.len()
                )));
            }
            Ok(Self::from_angles(params[0], params[1]))
        } else {
            Self::from_unitary_params(dim, params)
        }
    }

    pub fn computational(dim: usize) -> Self {
        if dim == 2 {
            return Self::from_angles(0.0, 0.0);
        }
        let vectors = (0..dim)
            .map(|k| {
                (0..dim)
                    .map(|i| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        Self {
            vectors,
            params: vec![0.0; measurement_param_count(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    /// Generating coordinates; `(θ, φ)` for qubits.
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        self.vectors
            .iter()
            .map(|v| ComplexMatrix::projector(v))
            .collect()
    }

    /// Max-entry deviation of `Σ Πₙ` from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .projectors()
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, p| &acc + p);
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }
}

/// Number of real coordinates used to parametrize a measurement on `dim`.
pub fn measurement_param_count(dim: usize) -> usize {
    if dim == 2 {
        2
    } else {
        unitary_param_count(dim)
    }
}

pub fn unitary_param_count(dim: usize) -> usize {
    dim * (dim - 1) + dim
}

/// Dense unitary from Givens-style complex rotations and trailing phases.
pub fn parametrized_unitary(dim: usize, params: &[f64]) -> Result<ComplexMatrix> {
    if dim == 0 || params.len() != unitary_param_count(dim) {
        return Err(Error::DimensionMismatch(format!(
            "{} parameters for a {dim}-dimensional unitary, expected {}",
            params.len(),
            unitary_param_count(dim.max(1))
        )));
    }
    let mut u = ComplexMatrix::identity(dim);
    let mut idx = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let (theta, phi) = (params[idx], params[idx + 1]);
            idx += 2;
            let (s, c) = theta.sin_cos();
            let e = C64::from_polar(1.0, phi);
            // u ← u · G_ij, touching columns i and j only.
            for r in 0..dim {
                let ui = u[(r, i)];
                let uj = u[(r, j)];
                u[(r, i)] = ui * c + uj * e.conj() * s;
                u[(r, j)] = -ui * e * s + uj * c;
            }
        }
    }
    for r in 0..dim {
        let ph = C64::from_polar(1.0, params[idx + r]);
        for col in 0..dim {
            u[(r, col)] *= ph;
        }
    }
    Ok(u)
}

/// Outcome `n` of a measurement: its probability and, when non-negligible,
/// the post-measurement state of the unmeasured side.
#[derive(Clone, Debug)]
pub struct ConditionalOutcome {
    pub probability: f64,
    pub state: Option<DensityMatrix>,
}

#[derive(Clone, Debug)]
pub struct ConditionalEnsemble {
    pub outcomes: Vec<ConditionalOutcome>,
}

impl ConditionalEnsemble {
    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.probability).collect()
    }

    /// `Σ pₙ ρ_{A,n}`
    pub fn average(&self) -> ComplexMatrix {
        let d = self
            .outcomes
            .iter()
            .find_map(|o| o.state.as_ref().map(|s| s.dim()))
            .unwrap_or(1);
        self.outcomes
            .iter()
            .filter_map(|o| {
                o.state
                    .as_ref()
                    .map(|s| s.matrix().scale_real(o.probability))
            })
            .fold(ComplexMatrix::zeros(d, d), |acc, m| &acc + &m)
    }

    /// `Σ pₙ S(ρ_{A,n})`, skipping null outcomes.
    pub fn average_entropy(&self) -> f64 {
        self.outcomes
            .iter()
            .filter_map(|o| o.state.as_ref().map(|s| o.probability * von_neumann(s)))
            .sum()
    }
}

/// Unnormalized `⟨b|ρ|b⟩_B`, an operator on A.
fn sandwich_b(rho: &ComplexMatrix, dim_a: usize, dim_b: usize, b: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..dim_b {
            let bk = b[k].conj();
            if bk == C64::new(0.0, 0.0) {
                continue;
            }
            for l in 0..dim_b {
                acc += bk * rho[(i * dim_b + k, j * dim_b + l)] * b[l];
            }
        }
        acc
    })
}

fn check_measured_dim(rho: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<()> {
    if m.dim() != rho.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "measurement on a {}-level system applied to subsystem B of dimension {}",
            m.dim(),
            rho.dim_b()
        )));
    }
    Ok(())
}

/// Measure B: `pₙ = tr[(I⊗Πₙ)ρ]`, `ρ_{A,n} = Tr_B[(I⊗Πₙ)ρ(I⊗Πₙ)] / pₙ`.
pub fn condition_on_b(
    rho: &DensityMatrix,
    m: &ProjectiveMeasurement,
) -> Result<ConditionalEnsemble> {
    check_measured_dim(rho, m)?;
    let outcomes = m
        .vectors()
        .iter()
        .map(|b| {
            let block = sandwich_b(rho.matrix(), rho.dim_a(), rho.dim_b(), b);
            let p = block.trace().re.max(0.0);
            let state = if p > NULL_OUTCOME {
                Some(DensityMatrix::from_unnormalized(block, rho.dim_a(), 1)?)
            } else {
                None
            };
            Ok(ConditionalOutcome {
                probability: p,
                state,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalEnsemble { outcomes })
}

/// Fast objective: `Σ pₙ S(ρ_{A,n})` without building validated states.
pub(crate) fn avg_entropy_raw(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    vectors: &[Vec<C64>],
) -> f64 {
    vectors
        .iter()
        .map(|b| {
            let block = sandwich_b(rho, dim_a, dim_b, b);
            let p = block.trace().re;
            if p <= NULL_OUTCOME {
                return 0.0;
            }
            let eig = hermitian_eig(&block.hermitian_part()).expect("sandwich is Hermitian");
            let w: Vec<f64> = eig.eigenvalues.iter().map(|l| l / p).collect();
            p * entropy_of_weights(&w)
        })
        .sum()
}

pub fn avg_conditional_entropy(rho: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<f64> {
    check_measured_dim(rho, m)?;
    Ok(avg_entropy_raw(
        rho.matrix(),
        rho.dim_a(),
        rho.dim_b(),
        m.vectors(),
    ))
}

/// Dephasing of B in the measurement basis: `Σₙ (I⊗Πₙ) ρ (I⊗Πₙ)`.
pub fn pinch_b(rho: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<DensityMatrix> {
    check_measured_dim(rho, m)?;
    DensityMatrix::from_unnormalized(
        pinch_raw(rho.matrix(), rho.dim_a(), rho.dim_b(), m.vectors()),
        rho.dim_a(),
        rho.dim_b(),
    )
}

pub(crate) fn pinch_raw(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    vectors: &[Vec<C64>],
) -> ComplexMatrix {
    let n = dim_a * dim_b;
    let mut out = ComplexMatrix::zeros(n, n);
    for b in vectors {
        let block = sandwich_b(rho, dim_a, dim_b, b);
        for i in 0..dim_a {
            for j in 0..dim_a {
                let x = block[(i, j)];
                for k in 0..dim_b {
                    for l in 0..dim_b {
                        out[(i * dim_b + k, j * dim_b + l)] += x * b[k] * b[l].conj();
                    }
                }
            }
        }
    }
    out
}

/// Result of minimizing some functional over measurements.
#[derive(Clone, Debug)]
pub struct MeasurementOptimum {
    pub value: f64,
    pub measurement: ProjectiveMeasurement,
    /// False when no simplex run met its tolerance within budget; the value
    /// is still the best found.
    pub converged: bool,
}

/// Starting points for a measurement search on a `dim`-level system: the
/// best `cfg.seeds` points of a `grid × 2·grid` Bloch grid for qubits,
/// `cfg.restarts` seeded random coordinates otherwise.
fn measurement_starts(
    dim: usize,
    cfg: &OptimizerConfig,
    objective: &(impl Fn(&[f64]) -> f64 + Sync),
) -> Vec<Vec<f64>> {
    if dim == 2 {
        let nt = cfg.grid;
        let np = 2 * cfg.grid;
        let mut scored: Vec<(f64, Vec<f64>)> = Vec::with_capacity(nt * np);
        for i in 0..nt {
            let theta = (i as f64 + 0.5) * PI / nt as f64;
            for j in 0..np {
                let phi = j as f64 * 2.0 * PI / np as f64;
                let x = vec![theta, phi];
                scored.push((objective(&x), x));
            }
        }
        // Include the poles, which the staggered polar grid skips.
        for x in [vec![0.0, 0.0], vec![PI, 0.0]] {
            scored.push((objective(&x), x));
        }
        scored.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| a.1[0].total_cmp(&b.1[0]))
                .then_with(|| a.1[1].total_cmp(&b.1[1]))
        });
        scored.into_iter().take(cfg.seeds).map(|(_, x)| x).collect()
    } else {
        let mut rng = rng_from_seed(cfg.seed);
        let k = unitary_param_count(dim);
        let mut starts = vec![vec![0.0; k]];
        starts.extend(
            (1..cfg.restarts.max(cfg.seeds))
                .map(|_| (0..k).map(|_| rng.random_range(0.0..2.0 * PI)).collect()),
        );
        starts
    }
}

/// Minimize `objective(measurement on B)` over rank-one projective
/// measurements of the B side of `rho`.
pub(crate) fn minimize_over_measurements(
    dim_b: usize,
    cfg: &OptimizerConfig,
    objective: impl Fn(&ProjectiveMeasurement) -> f64 + Sync,
) -> Result<MeasurementOptimum> {
    cfg.validate()?;
    let f = |x: &[f64]| -> f64 {
        match ProjectiveMeasurement::from_params(dim_b, x) {
            Ok(m) => objective(&m),
            Err(_) => f64::INFINITY,
        }
    };
    let starts = measurement_starts(dim_b, cfg, &f);
    let step_len = if dim_b == 2 {
        PI / cfg.grid as f64 / 2.0
    } else {
        0.3
    };
    let step = vec![step_len; measurement_param_count(dim_b)];
    let results = multi_start(f, &starts, &step, &cfg.simplex());
    let best = best_lexicographic(&results).expect("at least one start");
    let measurement = ProjectiveMeasurement::from_params(dim_b, &best.x)?;
    Ok(MeasurementOptimum {
        value: best.value,
        measurement,
        converged: results.iter().any(|m| m.converged),
    })
}

/// `S(A/B) = min over measurements on B of Σ pₙ S(ρ_{A,n})`.
pub fn measured_conditional_entropy(
    rho: &DensityMatrix,
    cfg: &OptimizerConfig,
) -> Result<MeasurementOptimum> {
    measured_conditional_entropy_on(rho, Subsystem::B, cfg)
}

/// As [`measured_conditional_entropy`], measuring `side` instead of B.
pub fn measured_conditional_entropy_on(
    rho: &DensityMatrix,
    side: Subsystem,
    cfg: &OptimizerConfig,
) -> Result<MeasurementOptimum> {
    let oriented = match side {
        Subsystem::B => rho.clone(),
        Subsystem::A => rho.swapped(),
    };
    let (da, db) = (oriented.dim_a(), oriented.dim_b());
    let mat = oriented.matrix();
    let mut best =
        minimize_over_measurements(db, cfg, |m| avg_entropy_raw(mat, da, db, m.vectors()))?;
    let upper = von_neumann(&oriented.reduced(Subsystem::A));
    best.value = best.value.clamp(0.0, upper);
    Ok(best)
}
