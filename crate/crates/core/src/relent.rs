//! Relative-entropy distances from a state to the product, separable and
//! classically-correlated sets.
//!
//! The product case is closed-form (`ρ_A ⊗ ρ_B`). The separable and classical
//! cases are non-convex searches over explicit ansätze, solved by seeded
//! multi-start simplex minimization; the reported value is therefore an upper
//! bound on the true minimum, tight to the optimizer tolerance.

use std::f64::consts::PI;

use rand::Rng;

use crate::entropy::{entropy_of_weights, relative_entropy_matrices, von_neumann, RelativeEntropy};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, kron, ComplexMatrix, Subsystem, C64};
use crate::measurement::{parametrized_unitary, unitary_param_count, OptimizerConfig};
use crate::optim::{best_by_index, multi_start, SimplexOptions};
use crate::states::{normalize, rng_from_seed, DensityMatrix, StateRng};

/// Mixing weight of `I/d` added to candidate states inside objectives, which
/// keeps `S(ρ‖σ)` finite when σ is rank deficient.
pub const SUPPORT_REGULARIZATION: f64 = 1e-9;

/// Largest supported total dimension for the geometry optimizers.
pub const MAX_GEOMETRY_DIM: usize = 16;

/// Squared-normalized simplex map `wᵢ = xᵢ² / Σ xⱼ²`.
pub fn simplex_weights(x: &[f64]) -> Vec<f64> {
    let total: f64 = x.iter().map(|v| v * v).sum();
    if total <= 0.0 {
        return vec![1.0 / x.len() as f64; x.len()];
    }
    x.iter().map(|v| v * v / total).collect()
}

/// Number of real coordinates for a pure state of dimension `d`.
fn pure_param_count(d: usize) -> usize {
    if d == 2 {
        2
    } else {
        2 * d
    }
}

/// Pure state from coordinates: Bloch angles for qubits, normalized
/// real/imaginary parts otherwise.
fn pure_from_params(d: usize, x: &[f64]) -> Vec<C64> {
    if d == 2 {
        let (s, c) = (x[0] / 2.0).sin_cos();
        vec![C64::new(c, 0.0), C64::from_polar(s, x[1])]
    } else {
        let mut v: Vec<C64> = (0..d).map(|i| C64::new(x[2 * i], x[2 * i + 1])).collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            v[0] = C64::new(1.0, 0.0);
        } else {
            normalize(&mut v);
        }
        v
    }
}

/// Coordinates reproducing the given unit vector (up to global phase).
fn params_from_pure(v: &[C64]) -> Vec<f64> {
    if v.len() == 2 {
        // Remove the phase of the first component.
        let r0 = v[0].norm();
        let theta = 2.0 * r0.clamp(0.0, 1.0).acos();
        let phi = if r0 > 1e-12 {
            (v[1] / (v[0] / r0)).arg()
        } else {
            v[1].arg()
        };
        vec![theta, phi]
    } else {
        v.iter().flat_map(|z| [z.re, z.im]).collect()
    }
}

fn random_pure_params(rng: &mut StateRng, d: usize) -> Vec<f64> {
    if d == 2 {
        // Uniform on the Bloch sphere.
        let cos_t: f64 = rng.random_range(-1.0..1.0);
        vec![cos_t.acos(), rng.random_range(0.0..2.0 * PI)]
    } else {
        let mut v = crate::states::gaussian_vec(rng, d);
        normalize(&mut v);
        params_from_pure(&v)
    }
}

/// A mixture of `K` pure product states, `Σₙ pₙ |aₙ⟩⟨aₙ| ⊗ |bₙ⟩⟨bₙ|`.
#[derive(Clone, Debug)]
pub struct SeparableAnsatz {
    pub dim_a: usize,
    pub dim_b: usize,
    pub weights: Vec<f64>,
    pub states_a: Vec<Vec<C64>>,
    pub states_b: Vec<Vec<C64>>,
}

fn term_len(dim_a: usize, dim_b: usize) -> usize {
    1 + pure_param_count(dim_a) + pure_param_count(dim_b)
}

impl SeparableAnsatz {
    pub fn terms(&self) -> usize {
        self.weights.len()
    }

    /// Decode the flat optimizer vector: per term a weight coordinate, then
    /// the coordinates of the A and B states.
    pub fn from_params(dim_a: usize, dim_b: usize, x: &[f64]) -> Result<Self> {
        let tl = term_len(dim_a, dim_b);
        if x.is_empty() || !x.len().is_multiple_of(tl) {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for terms of length {tl}",
                x.len()
            )));
        }
        let k = x.len() / tl;
        let na = pure_param_count(dim_a);
        let weights = simplex_weights(&(0..k).map(|t| x[t * tl]).collect::<Vec<_>>());
        let states_a = (0..k)
            .map(|t| pure_from_params(dim_a, &x[t * tl + 1..t * tl + 1 + na]))
            .collect();
        let states_b = (0..k)
            .map(|t| pure_from_params(dim_b, &x[t * tl + 1 + na..(t + 1) * tl]))
            .collect();
        Ok(Self {
            dim_a,
            dim_b,
            weights,
            states_a,
            states_b,
        })
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.dim_a * self.dim_b;
        let mut acc = ComplexMatrix::zeros(n, n);
        for ((w, a), b) in self.weights.iter().zip(&self.states_a).zip(&self.states_b) {
            if *w == 0.0 {
                continue;
            }
            let v: Vec<C64> = a
                .iter()
                .flat_map(|x| b.iter().map(move |y| x * y))
                .collect();
            for i in 0..n {
                let vi = v[i] * *w;
                for j in 0..n {
                    acc[(i, j)] += vi * v[j].conj();
                }
            }
        }
        acc
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_unnormalized(self.matrix(), self.dim_a, self.dim_b)
    }
}

/// Local orthonormal bases `{|aᵢ⟩}`, `{|bⱼ⟩}` with a joint weight table,
/// realizing `Σᵢⱼ pᵢⱼ |aᵢ⟩⟨aᵢ| ⊗ |bⱼ⟩⟨bⱼ|`.
#[derive(Clone, Debug)]
pub struct ClassicalAnsatz {
    pub basis_a: ComplexMatrix,
    pub basis_b: ComplexMatrix,
    /// Row-major `dim_a × dim_b` table.
    pub weights: Vec<f64>,
}

impl ClassicalAnsatz {
    pub fn dim_a(&self) -> usize {
        self.basis_a.rows()
    }

    pub fn dim_b(&self) -> usize {
        self.basis_b.rows()
    }

    fn product_vector(&self, i: usize, j: usize) -> Vec<C64> {
        let (da, db) = (self.dim_a(), self.dim_b());
        (0..da)
            .flat_map(|r| (0..db).map(move |s| (r, s)))
            .map(|(r, s)| self.basis_a[(r, i)] * self.basis_b[(s, j)])
            .collect()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let (da, db) = (self.dim_a(), self.dim_b());
        let n = da * db;
        let mut acc = ComplexMatrix::zeros(n, n);
        for i in 0..da {
            for j in 0..db {
                let w = self.weights[i * db + j];
                if w == 0.0 {
                    continue;
                }
                let v = self.product_vector(i, j);
                for r in 0..n {
                    let vr = v[r] * w;
                    for c in 0..n {
                        acc[(r, c)] += vr * v[c].conj();
                    }
                }
            }
        }
        acc
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_unnormalized(self.matrix(), self.dim_a(), self.dim_b())
    }
}

/// Local basis unitary from coordinates: qubits use Bloch angles of the first
/// basis vector, larger systems the Givens parametrization.
fn basis_from_params(d: usize, x: &[f64]) -> ComplexMatrix {
    if d == 2 {
        let (s, c) = (x[0] / 2.0).sin_cos();
        let e = C64::from_polar(1.0, x[1]);
        ComplexMatrix::new(
            2,
            2,
            vec![C64::new(c, 0.0), C64::new(s, 0.0), e * s, -e * c],
        )
        .expect("fixed 2x2")
    } else {
        parametrized_unitary(d, x).expect("parameter count checked by caller")
    }
}

fn basis_param_count(d: usize) -> usize {
    if d == 2 {
        2
    } else {
        unitary_param_count(d)
    }
}

/// Outcome of a geometry search.
#[derive(Clone, Debug)]
pub struct GeometryOptimum<A> {
    pub value: f64,
    pub ansatz: A,
    pub closest: DensityMatrix,
    pub converged: bool,
}

fn regularized(sigma: &ComplexMatrix) -> ComplexMatrix {
    let n = sigma.rows();
    let eps = SUPPORT_REGULARIZATION;
    let mut out = sigma.scale_real(1.0 - eps);
    for i in 0..n {
        out[(i, i)] += C64::new(eps / n as f64, 0.0);
    }
    out
}

/// `−tr(ρ log₂ σ)` for positive definite σ.
fn cross_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let spec = match hermitian_eig(sigma) {
        Ok(s) => s,
        Err(_) => return f64::INFINITY,
    };
    let n = spec.dim();
    let mut acc = 0.0;
    for j in 0..n {
        let mu = spec.eigenvalues[j];
        if mu <= 0.0 {
            return f64::INFINITY;
        }
        let v = spec.eigenvector(j);
        let rv = rho.apply(&v).expect("shapes agree");
        let w: f64 = v.iter().zip(&rv).map(|(a, b)| (a.conj() * b).re).sum();
        acc -= w * mu.log2();
    }
    acc
}

fn check_geometry_dims(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() > MAX_GEOMETRY_DIM {
        return Err(Error::DimensionMismatch(format!(
            "geometry optimizers support total dimension up to {MAX_GEOMETRY_DIM}, got {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// Settings specific to the separable search.
#[derive(Clone, Debug, Default)]
pub struct SeparableSearch {
    /// Number of product terms; `None` selects [`default_terms`].
    pub terms: Option<usize>,
}

/// Default size of the separable ansatz: 4 for two qubits, where every
/// separable state is a mixture of at most four pure product states, and the
/// Carathéodory bound `(dim_a·dim_b)²` otherwise.
pub fn default_terms(dim_a: usize, dim_b: usize) -> usize {
    if dim_a == 2 && dim_b == 2 {
        4
    } else {
        (dim_a * dim_b) * (dim_a * dim_b)
    }
}

fn geometry_simplex(cfg: &OptimizerConfig, params: usize, rebuilds: usize) -> SimplexOptions {
    SimplexOptions {
        max_iter: cfg.max_iter.max(200) * params,
        f_tol: cfg.tol,
        x_tol: 1e-5,
        rebuilds,
    }
}

/// Relative entropy of entanglement, `min_σ∈SEP S(ρ‖σ)`.
pub fn rel_ent_of_entanglement(
    rho: &DensityMatrix,
    cfg: &OptimizerConfig,
) -> Result<GeometryOptimum<SeparableAnsatz>> {
    rel_ent_of_entanglement_with(rho, cfg, &SeparableSearch::default())
}

/// As [`rel_ent_of_entanglement`] with an explicit ansatz size.
///
/// Start 0 is the closest classically-correlated state (classical states are
/// separable), start 1 is `ρ_A ⊗ ρ_B` in product eigenbases, the rest are
/// seeded random ansätze. Results within `cfg.tol` of the best go to the
/// lowest start index.
pub fn rel_ent_of_entanglement_with(
    rho: &DensityMatrix,
    cfg: &OptimizerConfig,
    search: &SeparableSearch,
) -> Result<GeometryOptimum<SeparableAnsatz>> {
    cfg.validate()?;
    check_geometry_dims(rho)?;
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let k = search.terms.unwrap_or_else(|| default_terms(da, db));
    if k < 1 {
        return Err(Error::InvalidConfig("separable ansatz needs K >= 1".into()));
    }
    let tl = term_len(da, db);
    let neg_s = -von_neumann(rho);
    let mat = rho.matrix().clone();
    let objective = |x: &[f64]| -> f64 {
        match SeparableAnsatz::from_params(da, db, x) {
            Ok(a) => neg_s + cross_entropy(&mat, &regularized(&a.matrix())),
            Err(_) => f64::INFINITY,
        }
    };

    let classical = rel_ent_of_discord(rho, cfg)?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut starts = Vec::with_capacity(cfg.restarts.max(2));
    starts.push(classical_start(&classical.ansatz, k, &mut rng));
    starts.push(marginal_eigen_start(rho, k, &mut rng));
    while starts.len() < cfg.restarts {
        let mut x = Vec::with_capacity(k * tl);
        for _ in 0..k {
            x.push(rng.random_range(0.1..1.0));
            x.extend(random_pure_params(&mut rng, da));
            x.extend(random_pure_params(&mut rng, db));
        }
        starts.push(x);
    }
    let step = vec![0.3; k * tl];
    let results = multi_start(objective, &starts, &step, &geometry_simplex(cfg, k * tl, 4));
    let best = best_by_index(&results, cfg.tol).expect("at least one start");
    let ansatz = SeparableAnsatz::from_params(da, db, &best.x)?;
    let closest = ansatz.density()?;
    Ok(GeometryOptimum {
        value: best.value.max(0.0),
        ansatz,
        closest,
        converged: results.iter().any(|m| m.converged),
    })
}

/// Encode a classical ansatz as separable-ansatz coordinates, keeping the
/// `k` heaviest product terms and padding with zero-weight terms.
fn classical_start(cc: &ClassicalAnsatz, k: usize, rng: &mut StateRng) -> Vec<f64> {
    let (da, db) = (cc.dim_a(), cc.dim_b());
    let mut order: Vec<usize> = (0..da * db).collect();
    order.sort_by(|&i, &j| cc.weights[j].total_cmp(&cc.weights[i]).then(i.cmp(&j)));
    let column =
        |u: &ComplexMatrix, c: usize| -> Vec<C64> { (0..u.rows()).map(|r| u[(r, c)]).collect() };
    let mut x = Vec::with_capacity(k * term_len(da, db));
    for &t in order.iter().take(k) {
        let (i, j) = (t / db, t % db);
        x.push(cc.weights[t].sqrt());
        x.extend(params_from_pure(&column(&cc.basis_a, i)));
        x.extend(params_from_pure(&column(&cc.basis_b, j)));
    }
    for _ in order.len()..k {
        x.push(0.0);
        x.extend(random_pure_params(rng, da));
        x.extend(random_pure_params(rng, db));
    }
    x
}

/// Start from `ρ_A ⊗ ρ_B` written in product eigenbases; extra terms get
/// random states with small weight.
fn marginal_eigen_start(rho: &DensityMatrix, k: usize, rng: &mut StateRng) -> Vec<f64> {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let ea = hermitian_eig(rho.reduced(Subsystem::A).matrix()).expect("Hermitian marginal");
    let eb = hermitian_eig(rho.reduced(Subsystem::B).matrix()).expect("Hermitian marginal");
    let mut x = Vec::new();
    let mut placed = 0;
    'outer: for i in 0..da {
        for j in 0..db {
            if placed == k {
                break 'outer;
            }
            let w = (ea.eigenvalues[i].max(0.0) * eb.eigenvalues[j].max(0.0)).sqrt();
            x.push(w.max(1e-3));
            x.extend(params_from_pure(&ea.eigenvector(i)));
            x.extend(params_from_pure(&eb.eigenvector(j)));
            placed += 1;
        }
    }
    while placed < k {
        x.push(1e-3);
        x.extend(random_pure_params(rng, da));
        x.extend(random_pure_params(rng, db));
        placed += 1;
    }
    x
}

/// Classical-classical state closest to `ρ` among those diagonal in the
/// product basis `U_A ⊗ U_B`: the dephased state, with weights
/// `pᵢⱼ = ⟨aᵢbⱼ|ρ|aᵢbⱼ⟩`. Its distance is `S(Π(ρ)) − S(ρ)`.
fn dephase_in_bases(rho: &ComplexMatrix, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Vec<f64> {
    let u = kron(ua, ub);
    let n = u.rows();
    (0..n)
        .map(|c| {
            let v: Vec<C64> = (0..n).map(|r| u[(r, c)]).collect();
            let rv = rho.apply(&v).expect("shapes agree");
            v.iter()
                .zip(&rv)
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
                .max(0.0)
        })
        .collect()
}

/// Relative entropy of discord, `min_σ∈CC S(ρ‖σ)`.
///
/// For fixed local bases the optimal weights are the dephased diagonal of ρ,
/// so the search runs over the basis coordinates only.
pub fn rel_ent_of_discord(
    rho: &DensityMatrix,
    cfg: &OptimizerConfig,
) -> Result<GeometryOptimum<ClassicalAnsatz>> {
    cfg.validate()?;
    check_geometry_dims(rho)?;
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let (na, nb) = (basis_param_count(da), basis_param_count(db));
    let s_rho = von_neumann(rho);
    let mat = rho.matrix().clone();
    let objective = |x: &[f64]| -> f64 {
        let ua = basis_from_params(da, &x[..na]);
        let ub = basis_from_params(db, &x[na..]);
        entropy_of_weights(&dephase_in_bases(&mat, &ua, &ub)) - s_rho
    };

    let mut rng = rng_from_seed(cfg.seed);
    let mut starts = vec![vec![0.0; na + nb]];
    while starts.len() < cfg.restarts {
        let mut x = Vec::with_capacity(na + nb);
        for (d, count) in [(da, na), (db, nb)] {
            if d == 2 {
                x.extend(random_pure_params(&mut rng, 2));
            } else {
                x.extend((0..count).map(|_| rng.random_range(0.0..2.0 * PI)));
            }
        }
        starts.push(x);
    }
    let step = vec![0.3; na + nb];
    let opts = geometry_simplex(cfg, na + nb, 2);
    let results = multi_start(objective, &starts, &step, &opts);
    let best = best_by_index(&results, cfg.tol).expect("at least one start");
    let converged = results.iter().any(|m| m.converged);
    let basis_a = basis_from_params(da, &best.x[..na]);
    let basis_b = basis_from_params(db, &best.x[na..]);
    let weights = dephase_in_bases(&mat, &basis_a, &basis_b);
    let total: f64 = weights.iter().sum();
    let ansatz = ClassicalAnsatz {
        basis_a,
        basis_b,
        weights: weights.iter().map(|w| w / total).collect(),
    };
    let closest = ansatz.density()?;
    // Evaluate the reported value on the returned state itself.
    let value = match relative_entropy_matrices(&mat, closest.matrix())? {
        RelativeEntropy::Finite(v) => v,
        RelativeEntropy::Infinite => best.value,
    };
    Ok(GeometryOptimum {
        value: value.max(0.0),
        ansatz,
        closest,
        converged,
    })
}

/// `ρ_A ⊗ ρ_B`, the closest product state in relative entropy.
pub fn closest_product_state(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::product(&rho.reduced(Subsystem::A), &rho.reduced(Subsystem::B))
}

/// Measured failure of LO-monotonicity for the relative entropy of discord:
/// the counterexample channel on B maps a classical state to one at positive
/// distance from the classical set.
#[derive(Clone, Debug, serde::Serialize)]
pub struct NonMonotonicityCertificate {
    pub before: f64,
    pub after: f64,
    /// Mutual information of the same pair, which must not increase.
    pub mutual_info_before: f64,
    pub mutual_info_after: f64,
}

impl NonMonotonicityCertificate {
    /// Classical input, non-classical output.
    pub fn violation_shown(&self) -> bool {
        self.before < 1e-4 && self.after > 0.005
    }

    pub fn gap(&self) -> f64 {
        self.after - self.before
    }
}

pub fn non_monotonicity_certificate(cfg: &OptimizerConfig) -> Result<NonMonotonicityCertificate> {
    let input = crate::states::NamedState::CcMixture.density()?;
    let ch = crate::channels::KrausChannel::counterexample().on(Subsystem::B, 2);
    let output = ch.apply(&input)?;
    Ok(NonMonotonicityCertificate {
        before: rel_ent_of_discord(&input, cfg)?.value,
        after: rel_ent_of_discord(&output, cfg)?.value,
        mutual_info_before: crate::entropy::mutual_information(&input),
        mutual_info_after: crate::entropy::mutual_information(&output),
    })
}
