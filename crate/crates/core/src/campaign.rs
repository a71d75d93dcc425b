//! Seeded invariant suites over random states and channels.
//!
//! Each sample gets its own seed drawn up front from the suite seed, so
//! samples can run in any order on any number of threads and still produce
//! the same outcome.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{
    monotonicity_trial, random_local_channel, LocalChannel, Measure, ANALYTIC_SLACK,
};
use crate::discord::{discord, is_zero_discord, pure_state_identities};
use crate::entropy::{
    mutual_information, mutual_information_as_relent, relative_entropy, von_neumann,
};
use crate::error::{Error, Result};
use crate::linalg::Subsystem;
use crate::measurement::{measured_conditional_entropy, OptimizerConfig};
use crate::states::{
    random_density_with, random_pure_with, rng_from_seed, DensityMatrix, StateRng,
};

/// Names accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "lo-monotonicity-mutual-info",
    "lo-monotonicity-entanglement",
    "relent-data-processing",
    "discord-nonnegative",
    "channel-output-valid",
    "mutual-info-identity",
    "pure-state-identities",
    "zero-discord-agreement",
    "measured-conditional-bounds",
];

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub samples: usize,
    pub violations: usize,
    /// Description of the first violating sample, in sample order.
    pub first_violation: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Random two-qubit state of random rank.
pub fn random_two_qubit(rng: &mut StateRng) -> DensityMatrix {
    let rank = rng.random_range(1..=4);
    random_density_with(rng, 2, 2, rank).expect("valid dims")
}

/// Random channel on a random side of a two-qubit system.
pub fn random_local(rng: &mut StateRng) -> LocalChannel {
    let side = if rng.random_bool(0.5) {
        Subsystem::A
    } else {
        Subsystem::B
    };
    let k = rng.random_range(1..=4);
    random_local_channel(2, k, rng.random())
        .expect("k >= 1")
        .on(side, 2)
}

/// `None` when the sample satisfies the invariant, otherwise a description.
type Check = fn(&mut StateRng, &OptimizerConfig) -> Result<Option<String>>;

fn check_for(suite: &str) -> Option<Check> {
    Some(match suite {
        "lo-monotonicity-mutual-info" => |rng, cfg| trial(rng, cfg, Measure::MutualInformation),
        "lo-monotonicity-entanglement" => |rng, cfg| trial(rng, cfg, Measure::RelEntOfEntanglement),
        "relent-data-processing" => data_processing,
        "discord-nonnegative" => discord_nonnegative,
        "channel-output-valid" => channel_output_valid,
        "mutual-info-identity" => mutual_info_identity,
        "pure-state-identities" => pure_identities,
        "zero-discord-agreement" => zero_discord_agreement,
        "measured-conditional-bounds" => measured_bounds,
        _ => return None,
    })
}

fn trial(rng: &mut StateRng, cfg: &OptimizerConfig, measure: Measure) -> Result<Option<String>> {
    let rho = random_two_qubit(rng);
    let ch = random_local(rng);
    let t = monotonicity_trial(&rho, &ch, measure, cfg)?;
    Ok(t.violated
        .then(|| format!("{measure} rose from {:.9} to {:.9}", t.before, t.after)))
}

fn data_processing(rng: &mut StateRng, _: &OptimizerConfig) -> Result<Option<String>> {
    let sigma = random_two_qubit(rng);
    let rho = random_two_qubit(rng);
    let ch = random_local(rng);
    let before = relative_entropy(&sigma, &rho)?;
    let after = relative_entropy(&ch.apply(&sigma)?, &ch.apply(&rho)?)?;
    Ok((after > before.plus(ANALYTIC_SLACK))
        .then(|| format!("relative entropy rose from {before} to {after}")))
}

fn discord_nonnegative(rng: &mut StateRng, cfg: &OptimizerConfig) -> Result<Option<String>> {
    let rho = random_two_qubit(rng);
    let b = match discord(&rho, cfg) {
        Ok(b) => b,
        Err(Error::InconsistentDiscord(d)) => return Ok(Some(format!("discord {d} below clamp"))),
        Err(e) => return Err(e),
    };
    let s_a = von_neumann(&rho.reduced(Subsystem::A));
    let ok = b.discord >= 0.0 && b.classical >= 0.0 && b.classical <= s_a.min(b.iq) + 1e-6;
    Ok((!ok).then(|| {
        format!(
            "discord {} classical {} S(A) {s_a} I_Q {}",
            b.discord, b.classical, b.iq
        )
    }))
}

fn channel_output_valid(rng: &mut StateRng, _: &OptimizerConfig) -> Result<Option<String>> {
    let rho = random_two_qubit(rng);
    let ch = random_local(rng);
    Ok(match ch.apply(&rho) {
        Ok(out) if (out.matrix().trace().re - 1.0).abs() <= 1e-10 => None,
        Ok(out) => Some(format!("trace {}", out.matrix().trace().re)),
        Err(e) => Some(e.to_string()),
    })
}

fn mutual_info_identity(rng: &mut StateRng, _: &OptimizerConfig) -> Result<Option<String>> {
    let rho = random_two_qubit(rng);
    let iq = mutual_information(&rho);
    let rel = mutual_information_as_relent(&rho)?;
    Ok(((iq - rel).abs() >= 1e-9).then(|| format!("I_Q {iq} vs relative entropy {rel}")))
}

fn pure_identities(rng: &mut StateRng, cfg: &OptimizerConfig) -> Result<Option<String>> {
    let psi = random_pure_with(rng, 2, 2)?;
    let r = pure_state_identities(&psi, cfg)?;
    Ok((!r.all_hold()).then(|| format!("{r:?}")))
}

fn zero_discord_agreement(rng: &mut StateRng, cfg: &OptimizerConfig) -> Result<Option<String>> {
    let rho = random_two_qubit(rng);
    let d = discord(&rho, cfg)?.discord;
    let v = is_zero_discord(&rho, 1e-4, cfg)?;
    Ok((v.zero_discord != (d < 1e-4))
        .then(|| format!("detector distance {} vs discord {d}", v.distance)))
}

fn measured_bounds(rng: &mut StateRng, cfg: &OptimizerConfig) -> Result<Option<String>> {
    let rho = random_two_qubit(rng);
    let v = measured_conditional_entropy(&rho, cfg)?.value;
    let s_a = von_neumann(&rho.reduced(Subsystem::A));
    Ok((v < -1e-9 || v > s_a + 1e-9).then(|| format!("S(A/B) {v} outside [0, {s_a}]")))
}

/// Run `count` samples of `suite`. Errors raised by a sample count as
/// violations; an unknown suite name is an error.
pub fn run_suite(
    suite: &str,
    count: usize,
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<SuiteOutcome> {
    let check = check_for(suite).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "unknown suite '{suite}'; known: {}",
            SUITES.join(", ")
        ))
    })?;
    cfg.validate()?;
    let mut master = rng_from_seed(seed);
    let seeds: Vec<u64> = (0..count).map(|_| master.random()).collect();
    let results: Vec<Option<String>> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = rng_from_seed(s);
            check(&mut rng, cfg).unwrap_or_else(|e| Some(format!("error: {e}")))
        })
        .collect();
    let violations = results.iter().filter(|r| r.is_some()).count();
    let first_violation = results
        .iter()
        .enumerate()
        .find_map(|(i, r)| r.as_ref().map(|msg| format!("sample {i}: {msg}")));
    Ok(SuiteOutcome {
        suite: suite.to_string(),
        samples: count,
        violations,
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", 1, 0, &OptimizerConfig::default()).is_err());
    }

    #[test]
    fn every_listed_suite_resolves() {
        for s in SUITES {
            assert!(check_for(s).is_some(), "{s}");
        }
    }

    #[test]
    fn cheap_suites_pass() {
        let cfg = OptimizerConfig::default();
        for s in [
            "lo-monotonicity-mutual-info",
            "relent-data-processing",
            "channel-output-valid",
            "mutual-info-identity",
        ] {
            let out = run_suite(s, 40, 3, &cfg).unwrap();
            assert!(out.passed(), "{s}: {:?}", out.first_violation);
            assert_eq!(out.samples, 40);
        }
    }

    #[test]
    fn outcome_is_deterministic() {
        let cfg = OptimizerConfig::default();
        let a = run_suite("discord-nonnegative", 10, 5, &cfg).unwrap();
        let b = run_suite("discord-nonnegative", 10, 5, &cfg).unwrap();
        assert_eq!(a.violations, b.violations);
        assert_eq!(a.first_violation, b.first_violation);
    }
}
