//! One-stop evaluation of every measure for a single state.

use serde::Serialize;

use crate::discord::{discord_on, is_zero_discord_on};
use crate::entropy::{naive_conditional, von_neumann};
use crate::error::Result;
use crate::linalg::Subsystem;
use crate::measurement::OptimizerConfig;
use crate::relent::{rel_ent_of_discord, rel_ent_of_entanglement, MAX_GEOMETRY_DIM};
use crate::states::DensityMatrix;

/// Tolerance for the arithmetic identities between report fields.
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ReportOptions {
    /// Measured side for conditional entropy, C and discord.
    pub orientation: Subsystem,
    /// Frobenius threshold of the zero-discord detector.
    pub zero_discord_tol: f64,
    /// Run the separable and classical distance searches.
    pub geometry: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            orientation: Subsystem::B,
            zero_discord_tol: 1e-4,
            geometry: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureReport {
    pub state: String,
    pub dim_a: usize,
    pub dim_b: usize,
    pub s_a: f64,
    pub s_b: f64,
    pub s_ab: f64,
    pub iq: f64,
    /// `S(AB) − S(A)`
    pub naive_conditional_on_a: f64,
    /// `S(AB) − S(B)`
    pub naive_conditional_on_b: f64,
    pub orientation: Subsystem,
    pub measured_conditional: f64,
    pub classical: f64,
    pub discord: f64,
    pub rel_ent_of_entanglement: Option<f64>,
    pub rel_ent_of_discord: Option<f64>,
    pub zero_discord: bool,
    pub zero_discord_distance: f64,
    /// Coordinates of the optimal measurement; `(θ, φ)` for a qubit.
    pub measurement_angles: Vec<f64>,
    pub measurement_converged: bool,
    pub geometry_converged: Option<bool>,
}

impl MeasureReport {
    /// Every optimizer that ran met its tolerance.
    pub fn converged(&self) -> bool {
        self.measurement_converged && self.geometry_converged.unwrap_or(true)
    }

    /// Identities between fields that fail beyond [`CONSISTENCY_TOL`].
    pub fn consistency_defects(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |name: &str, lhs: f64, rhs: f64| {
            if (lhs - rhs).abs() > CONSISTENCY_TOL {
                out.push(format!("{name}: {lhs} vs {rhs}"));
            }
        };
        check(
            "iq = s_a + s_b - s_ab",
            self.iq,
            (self.s_a + self.s_b - self.s_ab).max(0.0),
        );
        check(
            "discord = iq - classical",
            self.discord,
            self.iq - self.classical,
        );
        check(
            "naive_conditional_on_a",
            self.naive_conditional_on_a,
            self.s_ab - self.s_a,
        );
        check(
            "naive_conditional_on_b",
            self.naive_conditional_on_b,
            self.s_ab - self.s_b,
        );
        out
    }
}

pub fn measure_report(
    state: &str,
    rho: &DensityMatrix,
    opts: &ReportOptions,
    cfg: &OptimizerConfig,
) -> Result<MeasureReport> {
    let s_a = von_neumann(&rho.reduced(Subsystem::A));
    let s_b = von_neumann(&rho.reduced(Subsystem::B));
    let s_ab = von_neumann(rho);
    let breakdown = discord_on(rho, opts.orientation, cfg)?;
    let verdict = is_zero_discord_on(rho, opts.orientation, opts.zero_discord_tol, cfg)?;
    let (ree, red, geometry_converged) = if opts.geometry && rho.dim() <= MAX_GEOMETRY_DIM {
        let e = rel_ent_of_entanglement(rho, cfg)?;
        let d = rel_ent_of_discord(rho, cfg)?;
        (
            Some(e.value),
            Some(d.value),
            Some(e.converged && d.converged),
        )
    } else {
        (None, None, None)
    };
    Ok(MeasureReport {
        state: state.to_string(),
        dim_a: rho.dim_a(),
        dim_b: rho.dim_b(),
        s_a,
        s_b,
        s_ab,
        iq: breakdown.iq,
        naive_conditional_on_a: naive_conditional(rho, Subsystem::A),
        naive_conditional_on_b: naive_conditional(rho, Subsystem::B),
        orientation: opts.orientation,
        measured_conditional: breakdown.measured_conditional,
        classical: breakdown.classical,
        discord: breakdown.discord,
        rel_ent_of_entanglement: ree,
        rel_ent_of_discord: red,
        zero_discord: verdict.zero_discord,
        zero_discord_distance: verdict.distance,
        measurement_angles: breakdown.argmin_measurement.params().to_vec(),
        measurement_converged: breakdown.converged && verdict.converged,
        geometry_converged,
    })
}
