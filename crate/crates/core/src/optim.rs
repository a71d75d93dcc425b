//! Derivative-free minimization: Nelder–Mead simplex plus a deterministic
//! multi-start driver.

use std::cmp::Ordering;

use rayon::prelude::*;

/// Per-run settings for [`nelder_mead`].
#[derive(Clone, Debug)]
pub struct SimplexOptions {
    /// Iteration budget for a single simplex run.
    pub max_iter: usize,
    /// Converged when the spread of objective values over the simplex is at
    /// most this...
    pub f_tol: f64,
    /// ...and every vertex lies within this distance (max-norm) of the best.
    pub x_tol: f64,
    /// Number of times the simplex is rebuilt around the best point after
    /// converging. A rebuilt run that fails to improve ends the sequence.
    pub rebuilds: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            f_tol: 1e-8,
            x_tol: 1e-4,
            rebuilds: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or_else(|| {
        // NaN sorts last.
        match (a.is_nan(), b.is_nan()) {
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            _ => Ordering::Equal,
        }
    })
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Order two minima: lower value first, then lexicographically smaller `x`.
pub fn better(a: &Minimum, b: &Minimum) -> Ordering {
    cmp_f64(a.value, b.value).then_with(|| lexicographic(&a.x, &b.x))
}

fn single_run(
    f: &mut impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: &[f64],
    opts: &SimplexOptions,
) -> Minimum {
    let n = x0.len();
    let nf = n as f64;
    // Dimension-adaptive coefficients (Gao & Han); standard values at n = 2.
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = (0.75 - 0.5 / nf).max(0.25);
    let delta = (1.0 - 1.0 / nf).max(0.5);

    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| -> f64 {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step[i];
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evaluations)).collect();

    let mut converged = false;
    let mut iterations = 0;
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    while iterations < opts.max_iter {
        order.sort_by(|&a, &b| cmp_f64(values[a], values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let f_spread = values[worst] - values[best];
        let x_spread = simplex
            .iter()
            .flat_map(|p| p.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= opts.f_tol && x_spread <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &idx in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += v;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= nf);

        let along = |t: f64, simplex: &Vec<Vec<f64>>| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha, &simplex);
        let fr = eval(&xr, &mut evaluations);
        if fr < values[best] {
            let xe = along(alpha * beta, &simplex);
            let fe = eval(&xe, &mut evaluations);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        // Contraction, outside if the reflection beat the worst vertex.
        let (xc, fc) = if fr < values[worst] {
            let xc = along(alpha * gamma, &simplex);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc)
        } else {
            let xc = along(-gamma, &simplex);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc)
        };
        if fc < values[worst].min(fr) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &idx in &order[1..] {
            for (v, a) in simplex[idx].iter_mut().zip(&anchor) {
                *v = a + delta * (*v - a);
            }
            values[idx] = eval(&simplex[idx], &mut evaluations);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| {
            cmp_f64(values[a], values[b]).then_with(|| lexicographic(&simplex[a], &simplex[b]))
        })
        .expect("non-empty simplex");
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        evaluations,
        converged,
    }
}

/// Nelder–Mead from `x0` with initial edge lengths `step`, followed by up to
/// `opts.rebuilds` restarts around the incumbent.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: &[f64],
    opts: &SimplexOptions,
) -> Minimum {
    assert_eq!(x0.len(), step.len(), "step must match dimension");
    assert!(!x0.is_empty(), "cannot minimize over zero parameters");
    let mut result = single_run(&mut f, x0, step, opts);
    let mut scale = 0.25;
    for _ in 0..opts.rebuilds {
        let small: Vec<f64> = step.iter().map(|s| s * scale).collect();
        let next = single_run(&mut f, &result.x, &small, opts);
        let improved = result.value - next.value;
        let iterations = result.iterations + next.iterations;
        let evaluations = result.evaluations + next.evaluations;
        let converged = next.converged;
        if next.value <= result.value {
            result = next;
        }
        result.iterations = iterations;
        result.evaluations = evaluations;
        result.converged = converged;
        if improved <= opts.f_tol {
            break;
        }
        scale *= 0.25;
    }
    result
}

/// Run [`nelder_mead`] from every start, in parallel. Results come back in
/// start order, so any reduction over them is deterministic.
pub fn multi_start<F>(
    f: F,
    starts: &[Vec<f64>],
    step: &[f64],
    opts: &SimplexOptions,
) -> Vec<Minimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    starts
        .par_iter()
        .map(|x0| nelder_mead(|x| f(x), x0, step, opts))
        .collect()
}

/// Lowest value; exact ties go to the lexicographically smallest argument.
pub fn best_lexicographic(results: &[Minimum]) -> Option<&Minimum> {
    results.iter().min_by(|a, b| better(a, b))
}

/// First result (in start order) whose value is within `tie_tol` of the
/// lowest value.
pub fn best_by_index(results: &[Minimum], tie_tol: f64) -> Option<&Minimum> {
    let lowest = results
        .iter()
        .map(|m| m.value)
        .fold(f64::INFINITY, f64::min);
    results.iter().find(|m| m.value <= lowest + tie_tol)
}
