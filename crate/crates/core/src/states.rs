//! Bipartite density matrices: validation, a catalog of named states, random
//! sampling, and the JSON state-file format.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, kron, partial_trace, ComplexMatrix, Subsystem, C64};

/// Tolerance for Hermiticity, trace and PSD checks on density matrices.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues at or below this magnitude count as exact zeros.
pub const ZERO_EIGENVALUE: f64 = 1e-10;

/// Seedable generator used by every sampler in the crate.
pub type StateRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Validated density operator on `C^dim_a ⊗ C^dim_b`. A single-system
/// operator is represented with `dim_b = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
}

impl DensityMatrix {
    /// Validate `m` as a density matrix on a `dim_a × dim_b` split.
    pub fn new(m: ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        let n = dim_a * dim_b;
        if n == 0 || m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dims ({dim_a}, {dim_b})",
                m.rows(),
                m.cols()
            )));
        }
        let defect = m.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let mat = m.hermitian_part();
        let spec = hermitian_eig(&mat)?;
        if spec.eigenvalues[0] < -STATE_TOL {
            return Err(Error::NegativeEigenvalue(spec.eigenvalues[0]));
        }
        Ok(Self { mat, dim_a, dim_b })
    }

    /// Single-system density matrix.
    pub fn single(m: ComplexMatrix) -> Result<Self> {
        let d = m.rows();
        Self::new(m, d, 1)
    }

    /// Renormalize to unit trace before validating. Used for the outputs of
    /// maps that are trace preserving only up to rounding.
    pub(crate) fn from_unnormalized(m: ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        let tr = m.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::BadTrace(tr));
        }
        Self::new(m.scale_real(1.0 / tr), dim_a, dim_b)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn dim_of(&self, side: Subsystem) -> usize {
        match side {
            Subsystem::A => self.dim_a,
            Subsystem::B => self.dim_b,
        }
    }

    /// Reduced state of `keep`, as a single-system density matrix.
    pub fn reduced(&self, keep: Subsystem) -> DensityMatrix {
        let m = partial_trace(&self.mat, self.dim_a, self.dim_b, keep)
            .expect("dims validated at construction");
        let d = m.rows();
        DensityMatrix {
            mat: m.hermitian_part(),
            dim_a: d,
            dim_b: 1,
        }
    }

    /// Eigenvalues, ascending, with entries in `[-1e-10, 0)` clamped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eig(&self.mat)
            .expect("density matrices are Hermitian")
            .eigenvalues
            .into_iter()
            .map(|l| if l < 0.0 { 0.0 } else { l })
            .collect()
    }

    pub fn purity(&self) -> f64 {
        self.mat.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// The same operator viewed on `B ⊗ A`.
    pub fn swapped(&self) -> DensityMatrix {
        let (da, db) = (self.dim_a, self.dim_b);
        let idx = |a: usize, b: usize| a * db + b;
        let mat = ComplexMatrix::from_fn(da * db, da * db, |i, j| {
            let (b1, a1) = (i / da, i % da);
            let (b2, a2) = (j / da, j % da);
            self.mat[(idx(a1, b1), idx(a2, b2))]
        });
        DensityMatrix {
            mat,
            dim_a: db,
            dim_b: da,
        }
    }

    /// `ρ_A ⊗ ρ_B` with the given factors.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            mat: kron(&a.mat, &b.mat),
            dim_a: a.dim(),
            dim_b: b.dim(),
        }
    }

    /// Convex mixture `Σ wᵢ ρᵢ`; weights must form a probability vector.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidProbabilities("empty mixture".into()))?
            .1;
        let mut acc = ComplexMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            if rho.dim_a != first.dim_a || rho.dim_b != first.dim_b {
                return Err(Error::DimensionMismatch("mixture of different dims".into()));
            }
            if *w < 0.0 {
                return Err(Error::InvalidProbabilities(format!("negative weight {w}")));
            }
            acc = acc.try_add(&rho.mat.scale_real(*w))?;
        }
        DensityMatrix::new(acc, first.dim_a, first.dim_b)
    }

    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> DensityMatrix {
        let n = dim_a * dim_b;
        DensityMatrix {
            mat: ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
            dim_a,
            dim_b,
        }
    }
}

/// Unit vector on `C^dim_a ⊗ C^dim_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dim_a: usize,
    dim_b: usize,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a * dim_b == 0 || amplitudes.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims ({dim_a}, {dim_b})",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::BadNorm(norm));
        }
        Ok(Self {
            amplitudes,
            dim_a,
            dim_b,
        })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn density(&self) -> DensityMatrix {
        density_from_pure(self)
    }
}

pub fn density_from_pure(psi: &PureState) -> DensityMatrix {
    DensityMatrix {
        mat: ComplexMatrix::projector(&psi.amplitudes),
        dim_a: psi.dim_a,
        dim_b: psi.dim_b,
    }
}

pub fn validate_density(m: ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<DensityMatrix> {
    DensityMatrix::new(m, dim_a, dim_b)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn qubit_projector(v: [f64; 2]) -> DensityMatrix {
    DensityMatrix {
        mat: ComplexMatrix::projector(&[re(v[0]), re(v[1])]),
        dim_a: 2,
        dim_b: 1,
    }
}

/// Entries of the state catalog.
#[derive(Clone, Debug, PartialEq)]
pub enum NamedState {
    /// `(|00⟩ + |11⟩)/√2`
    BellPhiPlus,
    /// `a|00⟩ + √(1−a²)|11⟩`, `0 ≤ a ≤ 1`
    Pure { a: f64 },
    /// `½(|00⟩⟨00| + |11⟩⟨11|)`
    CcMixture,
    /// `½(|00⟩⟨00| + |1+⟩⟨1+|)`
    LoOutput,
    /// `p·Φ⁺ + (1−p)·I/4`, `0 ≤ p ≤ 1`
    Werner { p: f64 },
    /// `ρ_A ⊗ ρ_B`
    Product(Box<DensityMatrix>, Box<DensityMatrix>),
}

/// Names accepted by [`named_state`] / [`NamedState::parse`].
pub const CATALOG: &[&str] = &[
    "bell-phi-plus",
    "pure",
    "cc-mixture",
    "lo-output",
    "werner",
    "product",
];

fn param(params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::MissingParameter(key.to_string()))
}

fn unit_interval(name: &str, value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::ParameterOutOfRange {
            name: name.into(),
            value,
            reason: "must lie in [0, 1]".into(),
        });
    }
    Ok(value)
}

/// Bloch-vector qubit state `(I + x X + y Y + z Z)/2`, `|r| ≤ 1`.
pub fn qubit_from_bloch(x: f64, y: f64, z: f64) -> Result<DensityMatrix> {
    let r = (x * x + y * y + z * z).sqrt();
    if r > 1.0 + 1e-12 {
        return Err(Error::ParameterOutOfRange {
            name: "bloch radius".into(),
            value: r,
            reason: "must not exceed 1".into(),
        });
    }
    let m = ComplexMatrix::new(
        2,
        2,
        vec![
            re((1.0 + z) / 2.0),
            C64::new(x / 2.0, -y / 2.0),
            C64::new(x / 2.0, y / 2.0),
            re((1.0 - z) / 2.0),
        ],
    )?;
    DensityMatrix::single(m)
}

impl NamedState {
    /// Resolve a catalog name plus parameters.
    ///
    /// `pure` takes `a`; `werner` takes `p`; `product` takes the Bloch
    /// components `ax, ay, az, bx, by, bz` (each defaulting to 0).
    pub fn parse(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        Ok(match name {
            "bell-phi-plus" | "bell" => NamedState::BellPhiPlus,
            "pure" => NamedState::Pure {
                a: unit_interval("a", param(params, "a")?)?,
            },
            "cc-mixture" => NamedState::CcMixture,
            "lo-output" => NamedState::LoOutput,
            "werner" => NamedState::Werner {
                p: unit_interval("p", param(params, "p")?)?,
            },
            "product" => {
                let get = |k: &str| params.get(k).copied().unwrap_or(0.0);
                NamedState::Product(
                    Box::new(qubit_from_bloch(get("ax"), get("ay"), get("az"))?),
                    Box::new(qubit_from_bloch(get("bx"), get("by"), get("bz"))?),
                )
            }
            other => return Err(Error::UnknownState(other.to_string())),
        })
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        Ok(match self {
            NamedState::BellPhiPlus => bell_phi_plus().density(),
            NamedState::Pure { a } => {
                let a = unit_interval("a", *a)?;
                let b = (1.0 - a * a).max(0.0).sqrt();
                PureState::new(vec![re(a), re(0.0), re(0.0), re(b)], 2, 2)?.density()
            }
            NamedState::CcMixture => DensityMatrix {
                mat: ComplexMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.5]),
                dim_a: 2,
                dim_b: 2,
            },
            NamedState::LoOutput => {
                let s = FRAC_1_SQRT_2;
                let zero_zero = DensityMatrix::product(
                    &qubit_projector([1.0, 0.0]),
                    &qubit_projector([1.0, 0.0]),
                );
                let one_plus =
                    DensityMatrix::product(&qubit_projector([0.0, 1.0]), &qubit_projector([s, s]));
                DensityMatrix::mixture(&[(0.5, &zero_zero), (0.5, &one_plus)])?
            }
            NamedState::Werner { p } => {
                let p = unit_interval("p", *p)?;
                let bell = bell_phi_plus().density();
                let mixed = DensityMatrix::maximally_mixed(2, 2);
                DensityMatrix::mixture(&[(p, &bell), (1.0 - p, &mixed)])?
            }
            NamedState::Product(a, b) => DensityMatrix::product(a, b),
        })
    }
}

/// Look up a catalog state by name.
pub fn named_state(name: &str, params: &BTreeMap<String, f64>) -> Result<DensityMatrix> {
    NamedState::parse(name, params)?.density()
}

pub fn bell_phi_plus() -> PureState {
    let s = FRAC_1_SQRT_2;
    PureState {
        amplitudes: vec![re(s), re(0.0), re(0.0), re(s)],
        dim_a: 2,
        dim_b: 2,
    }
}

pub(crate) fn gaussian_vec(rng: &mut StateRng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

pub(crate) fn normalize(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
}

/// Haar-random pure state: normalized vector of i.i.d. complex Gaussians.
pub fn random_pure(dim_a: usize, dim_b: usize, seed: u64) -> Result<PureState> {
    let mut rng = rng_from_seed(seed);
    random_pure_with(&mut rng, dim_a, dim_b)
}

pub fn random_pure_with(rng: &mut StateRng, dim_a: usize, dim_b: usize) -> Result<PureState> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::DimensionMismatch("dims must be positive".into()));
    }
    let mut v = gaussian_vec(rng, dim_a * dim_b);
    normalize(&mut v);
    PureState::new(v, dim_a, dim_b)
}

/// Hilbert–Schmidt-induced random state `G G† / tr(G G†)` with `G` a
/// `(dim_a·dim_b) × rank` complex Gaussian matrix.
pub fn random_density(dim_a: usize, dim_b: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = rng_from_seed(seed);
    random_density_with(&mut rng, dim_a, dim_b, rank)
}

pub fn random_density_with(
    rng: &mut StateRng,
    dim_a: usize,
    dim_b: usize,
    rank: usize,
) -> Result<DensityMatrix> {
    let n = dim_a * dim_b;
    if n == 0 {
        return Err(Error::DimensionMismatch("dims must be positive".into()));
    }
    if rank == 0 || rank > n {
        return Err(Error::ParameterOutOfRange {
            name: "rank".into(),
            value: rank as f64,
            reason: format!("must lie in [1, {n}]"),
        });
    }
    let g = ComplexMatrix::new(n, rank, gaussian_vec(rng, n * rank))?;
    let ggd = g.matmul(&g.adjoint())?;
    DensityMatrix::from_unnormalized(ggd, dim_a, dim_b)
}

/// On-disk state format: `{"dimA": 2, "dimB": 2, "matrix": [[[re, im], ...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        StateFile {
            dim_a: rho.dim_a(),
            dim_b: rho.dim_b(),
            matrix: (0..m.rows())
                .map(|i| {
                    (0..m.cols())
                        .map(|j| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let n = self.dim_a * self.dim_b;
        if n == 0 {
            return Err(Error::StateFile("dimA and dimB must be positive".into()));
        }
        if self.matrix.len() != n {
            return Err(Error::StateFile(format!(
                "matrix has {} rows, expected {n}",
                self.matrix.len()
            )));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::StateFile(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row.iter().map(|&[r, im]| C64::new(r, im)));
        }
        DensityMatrix::new(ComplexMatrix::new(n, n, data)?, self.dim_a, self.dim_b)
    }
}

pub fn parse_state_json(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text)?;
    file.to_density()
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&StateFile::from_density(rho)).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_params() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn pure_products() {
        let zz = PureState::new(vec![re(1.0), re(0.0), re(0.0), re(0.0)], 2, 2).unwrap();
        assert_eq!(
            zz.density().matrix(),
            &ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0, 0.0])
        );
        let bell = bell_phi_plus().density();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((bell.matrix()[(i, j)].re - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn schmidt_spectrum_of_pure_family() {
        let mut p = BTreeMap::new();
        p.insert("a".to_string(), 0.9f64.sqrt());
        let rho = named_state("pure", &p).unwrap();
        let ev = rho.reduced(Subsystem::A).eigenvalues();
        assert!((ev[0] - 0.1).abs() < 1e-10);
        assert!((ev[1] - 0.9).abs() < 1e-10);
    }

    #[test]
    fn validation_errors() {
        assert!(validate_density(ComplexMatrix::identity(4).scale_real(0.25), 2, 2).is_ok());
        assert!(matches!(
            validate_density(ComplexMatrix::from_real_diag(&[0.6, 0.6, -0.1, -0.1]), 2, 2),
            Err(Error::NegativeEigenvalue(_))
        ));
        assert!(matches!(
            validate_density(ComplexMatrix::from_real_diag(&[0.5, 0.6, 0.0, 0.0]), 2, 2),
            Err(Error::BadTrace(_))
        ));
        assert!(matches!(
            validate_density(ComplexMatrix::identity(4).scale_real(0.25), 2, 3),
            Err(Error::DimensionMismatch(_))
        ));
        let mut m = ComplexMatrix::identity(2).scale_real(0.5);
        m[(0, 1)] = re(0.1);
        assert!(matches!(
            validate_density(m, 2, 1),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn catalog_entries() {
        let cc = named_state("cc-mixture", &no_params()).unwrap();
        assert_eq!(
            cc.matrix(),
            &ComplexMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.5])
        );

        let mut p = BTreeMap::new();
        p.insert("p".to_string(), 0.0);
        let w0 = named_state("werner", &p).unwrap();
        assert!(
            w0.matrix()
                .max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25))
                < 1e-15
        );

        let lo = named_state("lo-output", &no_params()).unwrap();
        // ⟨10|ρ|11⟩
        assert!((lo.matrix()[(2, 3)].re - 0.25).abs() < 1e-15);
        assert!((lo.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);

        assert!(matches!(
            named_state("ghz", &no_params()),
            Err(Error::UnknownState(_))
        ));
        p.insert("p".to_string(), 1.5);
        assert!(matches!(
            named_state("werner", &p),
            Err(Error::ParameterOutOfRange { .. })
        ));
        assert!(matches!(
            named_state("pure", &no_params()),
            Err(Error::MissingParameter(_))
        ));
    }

    #[test]
    fn samplers_are_seeded_and_valid() {
        let a = random_pure(2, 2, 11).unwrap();
        let b = random_pure(2, 2, 11).unwrap();
        assert_eq!(a, b);
        let norm: f64 = a.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);

        for rank in 1..=4 {
            let rho = random_density(2, 2, rank, 5 + rank as u64).unwrap();
            assert!(validate_density(rho.matrix().clone(), 2, 2).is_ok());
        }
        assert!(random_density(2, 2, 0, 1).is_err());
        assert!(random_density(2, 2, 5, 1).is_err());
    }

    #[test]
    fn swap_exchanges_marginals() {
        let rho = random_density(2, 3, 6, 3).unwrap();
        let sw = rho.swapped();
        assert_eq!((sw.dim_a(), sw.dim_b()), (3, 2));
        assert!(
            sw.reduced(Subsystem::A)
                .matrix()
                .max_abs_diff(rho.reduced(Subsystem::B).matrix())
                < 1e-14
        );
        assert!(sw.swapped().matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn state_file_round_trip_and_rejections() {
        let rho = named_state("lo-output", &no_params()).unwrap();
        let text = state_to_json(&rho);
        let back = parse_state_json(&text).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let bad_rows = r#"{"dimA":2,"dimB":2,"matrix":[[[1,0],[0,0],[0,0],[0,0]]]}"#;
        assert!(matches!(
            parse_state_json(bad_rows),
            Err(Error::StateFile(_))
        ));
        let ragged = r#"{"dimA":1,"dimB":2,"matrix":[[[1,0]],[[0,0],[0,0]]]}"#;
        assert!(matches!(parse_state_json(ragged), Err(Error::StateFile(_))));
        let frac_dim = r#"{"dimA":1.5,"dimB":2,"matrix":[]}"#;
        assert!(matches!(parse_state_json(frac_dim), Err(Error::Json(_))));
    }
}
