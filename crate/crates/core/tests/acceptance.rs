//! Acceptance criteria, one verdict line each. Runs without the libtest
//! harness so the verdicts are always printed.
//!
//! `QDK_RESTARTS` lowers the restart count of the entanglement monotonicity
//! suite, the slowest criterion.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64 as C64;
use qdk_core::campaign::{random_two_qubit, run_suite};
use qdk_core::channels::KrausChannel;
use qdk_core::discord::{discord, is_zero_discord};
use qdk_core::entropy::{
    mutual_information, mutual_information_as_relent, naive_conditional, von_neumann,
};
use qdk_core::linalg::frobenius_distance;
use qdk_core::measurement::{measured_conditional_entropy, OptimizerConfig};
use qdk_core::relent::rel_ent_of_entanglement;
use qdk_core::states::{
    bell_phi_plus, named_state, random_density, random_pure, rng_from_seed, DensityMatrix,
};
use qdk_core::Subsystem;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn named(name: &str, params: &[(&str, f64)]) -> DensityMatrix {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    named_state(name, &p).unwrap()
}

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

fn h2(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// Entropy of a 2×2 Hermitian PSD matrix from its closed-form eigenvalues,
/// after dividing by its trace.
fn qubit_entropy(a: f64, d: f64, b: C64) -> f64 {
    let t = a + d;
    let disc = ((a - d).powi(2) + 4.0 * b.norm_sqr()).sqrt();
    h2(&[
        ((t + disc) / 2.0 / t).max(0.0),
        ((t - disc) / 2.0 / t).max(0.0),
    ])
}

/// `min over projective B measurements of Σ pₙ S(ρ_A|n)` by exhaustive search
/// on a 0.005 rad (θ, φ) grid. Works on raw two-qubit matrix entries only.
fn grid_oracle(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let e = |i: usize, j: usize| m[(i, j)];
    let step = 0.005;
    let nt = (PI / step).ceil() as usize;
    let np = (2.0 * PI / step).ceil() as usize;
    let mut best = f64::INFINITY;
    for it in 0..=nt {
        let theta = (it as f64 * step).min(PI);
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        for ip in 0..np {
            let phi = ip as f64 * step;
            let ph = C64::from_polar(1.0, phi);
            let outcomes = [[C64::new(c, 0.0), ph * s], [C64::new(-s, 0.0), ph * c]];
            let mut avg = 0.0;
            for v in outcomes {
                // ⟨i|_A ⟨v|_B ρ |j⟩_A |v⟩_B
                let block = |i: usize, j: usize| -> C64 {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..2 {
                        for l in 0..2 {
                            acc += v[k].conj() * e(2 * i + k, 2 * j + l) * v[l];
                        }
                    }
                    acc
                };
                let (a, d, b) = (block(0, 0).re, block(1, 1).re, block(0, 1));
                let p = a + d;
                if p > 1e-12 {
                    avg += p * qubit_entropy(a, d, b);
                }
            }
            best = best.min(avg);
        }
    }
    best
}

fn criterion_1() -> Verdict {
    let bell = bell_phi_plus().density();
    let s_a = von_neumann(&bell.reduced(Subsystem::A));
    let s_b = von_neumann(&bell.reduced(Subsystem::B));
    let s_ab = von_neumann(&bell);
    let iq = mutual_information(&bell);
    let naive = naive_conditional(&bell, Subsystem::B);
    let b = discord(&bell, &cfg()).map_err(|e| e.to_string())?;
    ensure((s_a - 1.0).abs() < 1e-9 && (s_b - 1.0).abs() < 1e-9, || {
        format!("S(A)={s_a} S(B)={s_b}")
    })?;
    ensure(s_ab.abs() < 1e-9, || format!("S(AB)={s_ab}"))?;
    ensure((iq - 2.0).abs() < 1e-9, || format!("I_Q={iq}"))?;
    ensure((naive + 1.0).abs() < 1e-9, || {
        format!("naive conditional={naive}")
    })?;
    ensure(b.measured_conditional.abs() < 1e-6, || {
        format!("S(A/B)={}", b.measured_conditional)
    })?;
    ensure(
        (b.classical - 1.0).abs() < 1e-5 && (b.discord - 1.0).abs() < 1e-5,
        || format!("C={} D={}", b.classical, b.discord),
    )?;
    Ok(format!(
        "I_Q={iq:.9} S(A|B)={naive:.9} C={:.9} D={:.9}",
        b.classical, b.discord
    ))
}

fn criterion_2() -> Verdict {
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let psi = random_pure(2, 2, seed).unwrap();
        let rho = psi.density();
        let b = discord(&rho, &cfg()).map_err(|e| e.to_string())?;
        let s_a = von_neumann(&rho.reduced(Subsystem::A));
        let dc = (b.classical - s_a).abs();
        let dd = (b.discord - s_a).abs();
        let ds = (b.classical + b.discord - b.iq).abs();
        ensure(dc < 1e-4 && dd < 1e-4 && ds < 2e-4, || {
            format!("seed {seed}: |C-S(A)|={dc:.2e} |D-S(A)|={dd:.2e} |C+D-I|={ds:.2e}")
        })?;
        worst = worst.max(dc).max(dd);
    }
    Ok(format!("100 states, worst deviation {worst:.2e}"))
}

fn criterion_3() -> Verdict {
    let cc = named("cc-mixture", &[]);
    let out = KrausChannel::counterexample()
        .on(Subsystem::B, 2)
        .apply(&cc)
        .map_err(|e| e.to_string())?;
    let h = 0.25;
    let expected = qdk_core::ComplexMatrix::from_real_rows(&[
        &[0.5, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, h, h],
        &[0.0, 0.0, h, h],
    ]);
    let entry_err = out.matrix().max_abs_diff(&expected);
    ensure(entry_err < 1e-12, || {
        format!("output differs entrywise by {entry_err:.2e}")
    })?;
    let before = discord(&cc, &cfg()).map_err(|e| e.to_string())?.discord;
    let after = discord(&out, &cfg()).map_err(|e| e.to_string())?;
    ensure(before < 1e-6, || format!("discord(cc-mixture)={before}"))?;
    ensure(after.discord > 0.01, || {
        format!("discord(output)={}", after.discord)
    })?;
    let s_a = von_neumann(&out.reduced(Subsystem::A));
    let oracle = mutual_information(&out) - (s_a - grid_oracle(&out));
    let gap = (after.discord - oracle).abs();
    ensure(gap < 1e-4, || {
        format!("discord {} vs grid oracle {oracle}", after.discord)
    })?;
    Ok(format!(
        "before {before:.2e}, after {:.6}, grid oracle {oracle:.6}",
        after.discord
    ))
}

fn criterion_4() -> Verdict {
    let restarts = std::env::var("QDK_RESTARTS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(30);
    let heavy = OptimizerConfig { restarts, ..cfg() };
    let mut parts = Vec::new();
    for (suite, n, c) in [
        ("lo-monotonicity-mutual-info", 200, cfg()),
        ("relent-data-processing", 200, cfg()),
        ("lo-monotonicity-entanglement", 50, heavy),
    ] {
        let out = run_suite(suite, n, 2024, &c).map_err(|e| e.to_string())?;
        ensure(out.passed(), || {
            format!(
                "{suite}: {} violations; {:?}",
                out.violations, out.first_violation
            )
        })?;
        parts.push(format!("{suite} 0/{n}"));
    }
    Ok(format!("{} (restarts {restarts})", parts.join(", ")))
}

fn criterion_5() -> Verdict {
    let mut rng = rng_from_seed(5);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let rho = random_two_qubit(&mut rng);
        let iq = mutual_information(&rho);
        let rel = mutual_information_as_relent(&rho).map_err(|e| e.to_string())?;
        let d = (iq - rel).abs();
        ensure(d < 1e-9, || {
            format!("sample {i}: I_Q {iq} vs relative entropy {rel}")
        })?;
        worst = worst.max(d);
    }
    Ok(format!("500 states, worst {worst:.2e}"))
}

fn criterion_6() -> Verdict {
    let bell = bell_phi_plus().density();
    let r = rel_ent_of_entanglement(&bell, &cfg()).map_err(|e| e.to_string())?;
    let dist = frobenius_distance(r.closest.matrix(), named("cc-mixture", &[]).matrix()).unwrap();
    ensure((r.value - 1.0).abs() < 5e-3, || format!("E={}", r.value))?;
    ensure(dist < 1e-2, || {
        format!("closest state {dist} from cc-mixture")
    })?;
    Ok(format!(
        "E={:.6}, closest state {dist:.2e} from cc-mixture",
        r.value
    ))
}

fn criterion_7() -> Verdict {
    let mut min_gap = f64::INFINITY;
    let mut rows = Vec::new();
    for i in 0..=20 {
        let p = i as f64 * 0.05;
        let rho = named("werner", &[("p", p)]);
        let b = discord(&rho, &cfg()).map_err(|e| e.to_string())?;
        let e = rel_ent_of_entanglement(&rho, &cfg())
            .map_err(|e| e.to_string())?
            .value;
        let gap = b.iq - (b.classical + e);
        rows.push(format!("{p:.2}:{gap:.4}"));
        ensure(gap >= -5e-3, || format!("p={p}: gap {gap}"))?;
        if i == 0 || i == 20 {
            ensure(gap.abs() <= 5e-3, || {
                format!("p={p}: gap {gap} should vanish")
            })?;
        }
        min_gap = min_gap.min(gap);
    }
    Ok(format!("min gap {min_gap:.2e}; {}", rows.join(" ")))
}

fn criterion_8() -> Verdict {
    let mut states: Vec<(String, DensityMatrix)> = vec![
        ("bell-phi-plus".into(), named("bell-phi-plus", &[])),
        ("cc-mixture".into(), named("cc-mixture", &[])),
        ("lo-output".into(), named("lo-output", &[])),
        ("pure(a=1)".into(), named("pure", &[("a", 1.0)])),
        ("pure(a=0.6)".into(), named("pure", &[("a", 0.6)])),
        ("werner(p=0)".into(), named("werner", &[("p", 0.0)])),
        ("werner(p=0.5)".into(), named("werner", &[("p", 0.5)])),
        ("werner(p=1)".into(), named("werner", &[("p", 1.0)])),
        ("product".into(), named("product", &[])),
        (
            "product(mixed)".into(),
            named(
                "product",
                &[("ax", 0.3), ("az", 0.4), ("by", -0.5), ("bz", 0.2)],
            ),
        ),
    ];
    let mut rng = rng_from_seed(8);
    states.extend((0..200).map(|i| (format!("random #{i}"), random_two_qubit(&mut rng))));
    let mut zero = 0;
    for (label, rho) in &states {
        let d = discord(rho, &cfg()).map_err(|e| e.to_string())?.discord;
        let v = is_zero_discord(rho, 1e-4, &cfg()).map_err(|e| e.to_string())?;
        ensure(v.zero_discord == (d < 1e-4), || {
            format!(
                "{label}: detector {} (distance {:.2e}) vs discord {d:.2e}",
                v.zero_discord, v.distance
            )
        })?;
        zero += v.zero_discord as usize;
    }
    Ok(format!(
        "{} states agree, {zero} zero-discord",
        states.len()
    ))
}

fn criterion_9() -> Verdict {
    let mut worst: f64 = 0.0;
    for seed in 0..25 {
        let rank = 1 + (seed as usize % 4);
        let rho = random_density(2, 2, rank, 900 + seed).unwrap();
        let v = measured_conditional_entropy(&rho, &cfg())
            .map_err(|e| e.to_string())?
            .value;
        let s_a = von_neumann(&rho.reduced(Subsystem::A));
        ensure((-1e-9..=s_a + 1e-9).contains(&v), || {
            format!("seed {seed}: {v} outside [0, {s_a}]")
        })?;
        let oracle = grid_oracle(&rho);
        let d = (v - oracle).abs();
        ensure(d < 1e-4, || {
            format!("seed {seed}: optimizer {v} vs grid {oracle}")
        })?;
        worst = worst.max(d);
    }
    Ok(format!("25 states, worst |optimizer - grid| {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Bell-state exact values", criterion_1),
        ("pure-state identities", criterion_2),
        ("discord created by a local channel", criterion_3),
        ("monotonicity suites", criterion_4),
        ("mutual information as relative entropy", criterion_5),
        ("Bell relative entropy of entanglement", criterion_6),
        ("Werner correlation gap", criterion_7),
        ("zero-discord detector agreement", criterion_8),
        ("measurement optimizer against grid oracle", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {} PASS  {name} [{secs:.1}s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name} [{secs:.1}s]: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 9 criteria fail");
        ExitCode::FAILURE
    }
}
