//! Kraus channels, their local lifts, and the local-operation monotonicity
//! harness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discord::discord;
use crate::entropy::mutual_information;
use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, Subsystem, C64};
use crate::measurement::OptimizerConfig;
use crate::relent::{rel_ent_of_discord, rel_ent_of_entanglement};
use crate::states::{gaussian_vec, normalize, rng_from_seed, DensityMatrix};

/// Completeness tolerance for `Σ Kᵢ†Kᵢ = I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Slack for measures computed in closed form.
pub const ANALYTIC_SLACK: f64 = 1e-9;

/// Slack for measures that come out of a global optimizer.
pub const OPTIMIZED_SLACK: f64 = 5e-3;

/// A CPTP map given by Kraus operators, all `d_out × d_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn dim_in(&self) -> usize {
        self.ops[0].cols()
    }

    pub fn dim_out(&self) -> usize {
        self.ops[0].rows()
    }

    /// `‖Σ Kᵢ†Kᵢ − I‖_max`
    pub fn completeness_defect(&self) -> f64 {
        completeness_defect(&self.ops)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            ops: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Measure in the computational basis, prepare |0⟩ on outcome 0 and |+⟩ on
    /// outcome 1. Turns the |00⟩/|11⟩ mixture into the |00⟩/|1+⟩ mixture when
    /// applied to B.
    pub fn counterexample() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let k0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let k1 = ComplexMatrix::from_real_rows(&[&[0.0, h], &[0.0, h]]);
        Self { ops: vec![k0, k1] }
    }

    /// Qubit channel with Kraus set `{I/2, X/2, Y/2, Z/2}`, mapping every
    /// input to `I/2`.
    pub fn fully_depolarizing() -> Self {
        use crate::linalg::pauli;
        let ops = [
            ComplexMatrix::identity(2),
            pauli::x(),
            pauli::y(),
            pauli::z(),
        ]
        .iter()
        .map(|m| m.scale_real(0.5))
        .collect();
        Self { ops }
    }

    /// `Σ Kᵢ m Kᵢ†` on a raw matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.dim_in() || m.cols() != self.dim_in() {
            return Err(Error::DimensionMismatch(format!(
                "channel expects {0}x{0} input, got {1}x{2}",
                self.dim_in(),
                m.rows(),
                m.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out(), self.dim_out());
        for k in &self.ops {
            out = out.try_add(&k.conjugate(m)?)?;
        }
        Ok(out)
    }

    /// Apply to a whole state. The output is given dims `(d_out, 1)`
    /// unless the channel preserves dimension, in which case the input dims
    /// are kept.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_matrix(rho.matrix())?;
        let (da, db) = if self.dim_out() == self.dim_in() {
            (rho.dim_a(), rho.dim_b())
        } else {
            (self.dim_out(), 1)
        };
        DensityMatrix::new(out.hermitian_part(), da, db)
    }

    /// Lift to act on `side` of a bipartite system whose other factor has
    /// dimension `other_dim`.
    pub fn on(self, side: Subsystem, other_dim: usize) -> LocalChannel {
        LocalChannel {
            channel: self,
            side,
            other_dim,
        }
    }
}

fn completeness_defect(ops: &[ComplexMatrix]) -> f64 {
    let d = ops[0].cols();
    let mut sum = ComplexMatrix::zeros(d, d);
    for k in ops {
        sum = &sum + &(&k.adjoint() * k);
    }
    sum.max_abs_diff(&ComplexMatrix::identity(d))
}

/// Check shapes and completeness.
pub fn validate_channel(ops: Vec<ComplexMatrix>) -> Result<KrausChannel> {
    let first = ops.first().ok_or_else(|| {
        Error::DimensionMismatch("a channel needs at least one Kraus operator".into())
    })?;
    let (r, c) = (first.rows(), first.cols());
    if let Some(bad) = ops.iter().find(|k| k.rows() != r || k.cols() != c) {
        return Err(Error::DimensionMismatch(format!(
            "Kraus operators must all be {r}x{c}, found {}x{}",
            bad.rows(),
            bad.cols()
        )));
    }
    let defect = completeness_defect(&ops);
    if defect > COMPLETENESS_TOL {
        return Err(Error::IncompleteChannel(defect));
    }
    Ok(KrausChannel { ops })
}

/// A channel acting on one side of a bipartite state, identity on the other.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalChannel {
    pub channel: KrausChannel,
    pub side: Subsystem,
    /// Dimension of the untouched factor.
    pub other_dim: usize,
}

impl LocalChannel {
    /// `K ⊗ I` or `I ⊗ K`.
    pub fn lifted(&self) -> KrausChannel {
        let id = ComplexMatrix::identity(self.other_dim);
        let ops = self
            .channel
            .ops
            .iter()
            .map(|k| match self.side {
                Subsystem::A => kron(k, &id),
                Subsystem::B => kron(&id, k),
            })
            .collect();
        KrausChannel { ops }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let (touched, untouched) = (rho.dim_of(self.side), rho.dim_of(self.side.other()));
        if touched != self.channel.dim_in() || untouched != self.other_dim {
            return Err(Error::DimensionMismatch(format!(
                "local channel on {} expects {}x{} split, state is {}x{}",
                self.side,
                if self.side == Subsystem::A {
                    self.channel.dim_in()
                } else {
                    self.other_dim
                },
                if self.side == Subsystem::A {
                    self.other_dim
                } else {
                    self.channel.dim_in()
                },
                rho.dim_a(),
                rho.dim_b()
            )));
        }
        let out = self.lifted().apply_matrix(rho.matrix())?;
        let new = self.channel.dim_out();
        let (da, db) = match self.side {
            Subsystem::A => (new, self.other_dim),
            Subsystem::B => (self.other_dim, new),
        };
        DensityMatrix::new(out.hermitian_part(), da, db)
    }
}

/// Independent channels on A and on B.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductChannel {
    pub on_a: KrausChannel,
    pub on_b: KrausChannel,
}

impl ProductChannel {
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let mid = self.on_a.clone().on(Subsystem::A, rho.dim_b()).apply(rho)?;
        self.on_b.clone().on(Subsystem::B, mid.dim_a()).apply(&mid)
    }
}

/// Random square channel from a Haar `(d·k) × d` isometry cut into `k`
/// blocks of `d` rows. `kraus_count = 1` gives a Haar unitary.
pub fn random_local_channel(dim: usize, kraus_count: usize, seed: u64) -> Result<KrausChannel> {
    if kraus_count < 1 {
        return Err(Error::ParameterOutOfRange {
            name: "kraus_count".into(),
            value: kraus_count as f64,
            reason: "must be at least 1".into(),
        });
    }
    if dim < 1 {
        return Err(Error::DimensionMismatch(
            "channel dimension must be positive".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let rows = dim * kraus_count;
    // Gram–Schmidt on Gaussian columns yields Haar-distributed orthonormal columns.
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while columns.len() < dim {
        let mut v = gaussian_vec(&mut rng, rows);
        for _ in 0..2 {
            for q in &columns {
                let overlap: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, qi) in v.iter_mut().zip(q) {
                    *x -= overlap * qi;
                }
            }
        }
        if v.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1e-20 {
            continue;
        }
        normalize(&mut v);
        columns.push(v);
    }
    let ops = (0..kraus_count)
        .map(|b| ComplexMatrix::from_fn(dim, dim, |r, c| columns[c][b * dim + r]))
        .collect();
    validate_channel(ops)
}

/// Correlation measures that can be put through a monotonicity trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    MutualInformation,
    RelEntOfEntanglement,
    Discord,
    RelEntOfDiscord,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::MutualInformation,
        Measure::RelEntOfEntanglement,
        Measure::Discord,
        Measure::RelEntOfDiscord,
    ];

    pub fn is_optimized(self) -> bool {
        !matches!(self, Measure::MutualInformation)
    }

    pub fn slack(self) -> f64 {
        if self.is_optimized() {
            OPTIMIZED_SLACK
        } else {
            ANALYTIC_SLACK
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::MutualInformation => "mutual-information",
            Measure::RelEntOfEntanglement => "rel-ent-of-entanglement",
            Measure::Discord => "discord",
            Measure::RelEntOfDiscord => "rel-ent-of-discord",
        }
    }

    pub fn evaluate(self, rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64> {
        Ok(match self {
            Measure::MutualInformation => mutual_information(rho),
            Measure::RelEntOfEntanglement => rel_ent_of_entanglement(rho, cfg)?.value,
            Measure::Discord => discord(rho, cfg)?.discord,
            Measure::RelEntOfDiscord => rel_ent_of_discord(rho, cfg)?.value,
        })
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        match key.as_str() {
            "mutual-information" | "mi" | "iq" => Ok(Measure::MutualInformation),
            "rel-ent-of-entanglement" | "ree" | "entanglement" => Ok(Measure::RelEntOfEntanglement),
            "discord" => Ok(Measure::Discord),
            "rel-ent-of-discord" | "red" => Ok(Measure::RelEntOfDiscord),
            _ => Err(Error::InvalidConfig(format!("unknown measure '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonotonicityTrial {
    pub before: f64,
    pub after: f64,
    pub violated: bool,
}

/// Evaluate `measure` before and after `ch`; a violation is an increase beyond
/// the measure's slack.
pub fn monotonicity_trial(
    rho: &DensityMatrix,
    ch: &LocalChannel,
    measure: Measure,
    cfg: &OptimizerConfig,
) -> Result<MonotonicityTrial> {
    let out = ch.apply(rho)?;
    let before = measure.evaluate(rho, cfg)?;
    let after = measure.evaluate(&out, cfg)?;
    Ok(MonotonicityTrial {
        before,
        after,
        violated: after > before + measure.slack(),
    })
}
