//! Classical correlations, quantum discord, and a pinching-based zero-discord
//! detector.

use serde::Serialize;

use crate::entropy::{mutual_information, von_neumann};
use crate::error::{Error, Result};
use crate::linalg::Subsystem;
use crate::measurement::{
    measured_conditional_entropy_on, minimize_over_measurements, pinch_raw, OptimizerConfig,
    ProjectiveMeasurement,
};
use crate::states::{DensityMatrix, PureState};

/// Discord in `(−DISCORD_CLAMP, 0)` is reported as zero; anything lower is an
/// optimizer failure.
pub const DISCORD_CLAMP: f64 = 1e-6;

/// Tolerance for the pure-state identity checks.
pub const PURE_IDENTITY_TOL: f64 = 1e-4;

/// All correlation quantities for one state and one measured side.
#[derive(Clone, Debug)]
pub struct CorrelationBreakdown {
    pub iq: f64,
    pub measured_conditional: f64,
    pub classical: f64,
    pub discord: f64,
    pub argmin_measurement: ProjectiveMeasurement,
    /// The measured subsystem.
    pub orientation: Subsystem,
    pub converged: bool,
}

/// `C = S(A) − min S(A/B)` with B measured.
pub fn classical_correlations(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(discord_on(rho, Subsystem::B, cfg)?.classical)
}

/// Discord `D = I_Q − C` with B measured.
pub fn discord(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<CorrelationBreakdown> {
    discord_on(rho, Subsystem::B, cfg)
}

/// Discord with `measured` as the measured side. Not symmetric in general.
pub fn discord_on(
    rho: &DensityMatrix,
    measured: Subsystem,
    cfg: &OptimizerConfig,
) -> Result<CorrelationBreakdown> {
    let iq = mutual_information(rho);
    let unmeasured_entropy = von_neumann(&rho.reduced(measured.other()));
    let opt = measured_conditional_entropy_on(rho, measured, cfg)?;
    let mut classical = (unmeasured_entropy - opt.value).max(0.0);
    let mut discord = iq - classical;
    if discord < -DISCORD_CLAMP {
        return Err(Error::InconsistentDiscord(discord));
    }
    if discord < 0.0 {
        classical = iq;
        discord = 0.0;
    }
    Ok(CorrelationBreakdown {
        iq,
        measured_conditional: opt.value,
        classical,
        discord,
        argmin_measurement: opt.measurement,
        orientation: measured,
        converged: opt.converged,
    })
}

/// Verdict of the zero-discord detector.
#[derive(Clone, Debug)]
pub struct ZeroDiscordVerdict {
    pub zero_discord: bool,
    /// `min_m ‖pinch_B(ρ, m) − ρ‖_F`
    pub distance: f64,
    /// Basis achieving `distance`; this is the witness when `zero_discord`.
    pub basis: ProjectiveMeasurement,
    pub converged: bool,
}

impl ZeroDiscordVerdict {
    pub fn witness(&self) -> Option<&ProjectiveMeasurement> {
        self.zero_discord.then_some(&self.basis)
    }
}

/// Zero discord (B measured) holds exactly when some basis on B leaves the
/// state invariant under dephasing; correlations then live in one basis only.
pub fn is_zero_discord(
    rho: &DensityMatrix,
    tol: f64,
    cfg: &OptimizerConfig,
) -> Result<ZeroDiscordVerdict> {
    is_zero_discord_on(rho, Subsystem::B, tol, cfg)
}

pub fn is_zero_discord_on(
    rho: &DensityMatrix,
    measured: Subsystem,
    tol: f64,
    cfg: &OptimizerConfig,
) -> Result<ZeroDiscordVerdict> {
    let oriented = match measured {
        Subsystem::B => rho.clone(),
        Subsystem::A => rho.swapped(),
    };
    let (da, db) = (oriented.dim_a(), oriented.dim_b());
    let mat = oriented.matrix();
    // The objective is a squared distance, so its tolerance is squared too.
    let tight = OptimizerConfig {
        tol: (cfg.tol * cfg.tol).max(f64::MIN_POSITIVE),
        ..cfg.clone()
    };
    let opt = minimize_over_measurements(db, &tight, |m| {
        let d = pinch_raw(mat, da, db, m.vectors());
        d.try_sub(mat)
            .expect("same shape")
            .as_slice()
            .iter()
            .map(|z| z.norm_sqr())
            .sum()
    })?;
    let distance = opt.value.max(0.0).sqrt();
    Ok(ZeroDiscordVerdict {
        zero_discord: distance < tol,
        distance,
        basis: opt.measurement,
        converged: opt.converged,
    })
}

/// Measured quantities and identity checks for a pure bipartite state.
#[derive(Clone, Debug, Serialize)]
pub struct PureStateIdentities {
    pub classical: f64,
    pub discord: f64,
    /// `S(ρ_A)`, which equals the entanglement of a pure state.
    pub entanglement: f64,
    pub iq: f64,
    pub classical_equals_entanglement: bool,
    pub sum_equals_iq: bool,
    pub discord_equals_entanglement: bool,
}

impl PureStateIdentities {
    pub fn all_hold(&self) -> bool {
        self.classical_equals_entanglement && self.sum_equals_iq && self.discord_equals_entanglement
    }
}

/// For pure states `C = E = D = S(ρ_A)` and `C + E = I_Q`.
pub fn pure_state_identities(
    psi: &PureState,
    cfg: &OptimizerConfig,
) -> Result<PureStateIdentities> {
    let rho = psi.density();
    let b = discord(&rho, cfg)?;
    let e = von_neumann(&rho.reduced(Subsystem::A));
    Ok(PureStateIdentities {
        classical: b.classical,
        discord: b.discord,
        entanglement: e,
        iq: b.iq,
        classical_equals_entanglement: (b.classical - e).abs() < PURE_IDENTITY_TOL,
        sum_equals_iq: (b.classical + e - b.iq).abs() < PURE_IDENTITY_TOL,
        discord_equals_entanglement: (b.discord - e).abs() < PURE_IDENTITY_TOL,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::entropy::binary_entropy;
    use crate::states::{bell_phi_plus, named_state, random_density};

    fn named(name: &str) -> DensityMatrix {
        named_state(name, &BTreeMap::new()).unwrap()
    }

    fn cfg() -> OptimizerConfig {
        OptimizerConfig::default()
    }

    #[test]
    fn bell_breakdown() {
        let b = discord(&bell_phi_plus().density(), &cfg()).unwrap();
        assert!((b.iq - 2.0).abs() < 1e-9);
        assert!((b.classical - 1.0).abs() < 1e-6);
        assert!((b.discord - 1.0).abs() < 1e-5);
        assert!(b.measured_conditional < 1e-6);
        assert_eq!(b.orientation, Subsystem::B);
    }

    #[test]
    fn cc_mixture_has_zero_discord() {
        let b = discord(&named("cc-mixture"), &cfg()).unwrap();
        assert!((b.classical - 1.0).abs() < 1e-6);
        assert!(b.discord < 1e-6);
        assert!((b.discord - (b.iq - b.classical)).abs() < 1e-12);
    }

    #[test]
    fn lo_output_has_positive_discord() {
        assert!(discord(&named("lo-output"), &cfg()).unwrap().discord > 0.01);
    }

    #[test]
    fn product_states_are_uncorrelated() {
        let a = random_density(2, 1, 2, 31).unwrap();
        let b = random_density(2, 1, 2, 32).unwrap();
        let prod = DensityMatrix::product(&a, &b);
        let r = discord(&prod, &cfg()).unwrap();
        assert!(r.iq < 1e-6 && r.classical < 1e-6 && r.discord < 1e-6);
        assert!(classical_correlations(&prod, &cfg()).unwrap() < 1e-6);
    }

    #[test]
    fn detector_on_named_states() {
        let v = is_zero_discord(&named("cc-mixture"), 1e-4, &cfg()).unwrap();
        assert!(v.zero_discord);
        let w = v.witness().unwrap();
        // Computational basis: θ at a pole.
        assert!(w.params()[0].sin().abs() < 1e-3);

        assert!(
            !is_zero_discord(&bell_phi_plus().density(), 1e-4, &cfg())
                .unwrap()
                .zero_discord
        );
        assert!(
            !is_zero_discord(&named("lo-output"), 1e-4, &cfg())
                .unwrap()
                .zero_discord
        );
    }

    #[test]
    fn pure_identities() {
        let r = pure_state_identities(&bell_phi_plus(), &cfg()).unwrap();
        assert!(r.all_hold());
        assert!((r.classical - 1.0).abs() < 1e-5 && (r.discord - 1.0).abs() < 1e-5);

        let zz = PureState::new(
            vec![
                crate::C64::new(1.0, 0.0),
                crate::C64::new(0.0, 0.0),
                crate::C64::new(0.0, 0.0),
                crate::C64::new(0.0, 0.0),
            ],
            2,
            2,
        )
        .unwrap();
        let r = pure_state_identities(&zz, &cfg()).unwrap();
        assert!(r.all_hold());
        assert!(r.classical.abs() < 1e-9 && r.discord.abs() < 1e-9 && r.iq.abs() < 1e-9);

        let a = 0.9f64.sqrt();
        let psi = PureState::new(
            vec![
                crate::C64::new(a, 0.0),
                crate::C64::new(0.0, 0.0),
                crate::C64::new(0.0, 0.0),
                crate::C64::new((1.0 - a * a).sqrt(), 0.0),
            ],
            2,
            2,
        )
        .unwrap();
        let h = binary_entropy(0.9);
        let r = pure_state_identities(&psi, &cfg()).unwrap();
        assert!((r.classical - h).abs() < 1e-3);
        assert!((r.discord - h).abs() < 1e-3);
        assert!((r.iq - 2.0 * h).abs() < 2e-3);
    }

    #[test]
    fn orientation_swaps_roles() {
        let rho = named("lo-output");
        let on_a = discord_on(&rho, Subsystem::A, &cfg()).unwrap();
        let on_swapped_b = discord_on(&rho.swapped(), Subsystem::B, &cfg()).unwrap();
        assert!((on_a.discord - on_swapped_b.discord).abs() < 1e-12);
        assert_eq!(on_a.orientation, Subsystem::A);
    }
}
