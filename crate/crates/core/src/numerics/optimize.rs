//! Derivative-free minimization (Nelder–Mead) with deterministic restarts.

use rand::Rng;

use super::rng::{rng_stream, std_normal};

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Stop once every vertex is within this sup-norm distance of the best.
    pub diameter_tol: f64,
    pub max_evals: usize,
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { diameter_tol: 1e-8, max_evals: 20_000, initial_step: 0.25 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective value after each iteration.
    pub history: Vec<f64>,
}

pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
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
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1.0 { opts.initial_step * v[i].abs() } else { opts.initial_step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();
    while evals < opts.max_evals {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];
        history.push(values[best]);
        let diameter = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter <= opts.diameter_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[worst]).map(|(c, w)| c + t * (w - c)).collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < values[best] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[worst] {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < values[worst].min(fr) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        // shrink towards the best vertex
        let xb = simplex[best].clone();
        for &i in &order[1..] {
            let v: Vec<f64> = simplex[i].iter().zip(&xb).map(|(x, b)| b + 0.5 * (x - b)).collect();
            values[i] = eval(&v, &mut evals);
            simplex[i] = v;
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Minimum { x: simplex[best].clone(), value: values[best], evals, iterations, converged, history }
}

/// Runs Nelder–Mead from `x0`, then `restarts` more times from randomly
/// perturbed copies of the incumbent (fixed internal seed, so the result
/// is a deterministic function of the inputs). Returns the best run.
pub fn minimize_with_restarts(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &NelderMeadOptions,
    restarts: usize,
    perturbation: f64,
) -> Minimum {
    let mut best = nelder_mead(&mut f, x0, opts);
    let mut rng = rng_stream(0x5eed_0f_0e17, x0.len() as u64);
    let mut total_evals = best.evals;
    for _ in 0..restarts {
        let start: Vec<f64> = best.x.iter().map(|x| x + perturbation * std_normal(&mut rng)).collect();
        let start = if f(&start).is_finite() { start } else { best.x.clone() };
        let _: f64 = rng.random();
        let run = nelder_mead(&mut f, &start, opts);
        total_evals += run.evals;
        if run.value < best.value {
            let mut history = best.history.clone();
            history.extend(run.history.iter().map(|&h| h.min(best.value)));
            best = Minimum { history, ..run };
        }
    }
    best.evals = total_evals;
    best
}
