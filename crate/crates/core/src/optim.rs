//! Projected Nelder-Mead maximizer used by the capacity search.
//!
//! Every trial point is pushed through a caller-supplied projection before
//! evaluation, so the simplex lives on the feasible set (probability simplex
//! × clamped box) and the diameter criterion is measured there. The best
//! point ever evaluated is returned, which makes multi-start refinement
//! monotone with respect to its grid seeds.

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone)]
pub(crate) struct NmOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

pub(crate) struct NelderMead {
    pub max_evals: usize,
    pub diameter_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            diameter_tol: 1e-7,
        }
    }
}

impl NelderMead {
    /// Maximizes `f` starting from `x0`, displacing each coordinate by
    /// `steps[i]` to build the initial simplex. `project` maps an arbitrary
    /// point into the feasible set in place.
    pub fn maximize<F, P>(&self, mut f: F, project: P, x0: &[f64], steps: &[f64]) -> NmOutcome
    where
        F: FnMut(&[f64]) -> f64,
        P: Fn(&mut [f64]),
    {
        let n = x0.len();
        let mut evals = 0usize;
        let mut best_x = x0.to_vec();
        project(&mut best_x);
        let mut eval = |x: &mut Vec<f64>, evals: &mut usize| {
            project(x);
            *evals += 1;
            f(x)
        };

        // vertices stored projected, ranked worst-to-best by -f
        let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
        {
            let mut x = x0.to_vec();
            let v = eval(&mut x, &mut evals);
            simplex.push((v, x));
        }
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += steps[i];
            let v = eval(&mut x, &mut evals);
            simplex.push((v, x));
        }
        sort_desc(&mut simplex);
        let mut best_value = simplex[0].0;
        best_x = simplex[0].1.clone();

        let mut converged = false;
        while evals < self.max_evals {
            if diameter(&simplex) < self.diameter_tol {
                converged = true;
                break;
            }
            let centroid = centroid_excluding_worst(&simplex);
            let worst = simplex[n].1.clone();
            let f_worst = simplex[n].0;
            let f_best = simplex[0].0;
            let f_second_worst = simplex[n - 1].0;

            let mut reflected = combine(&centroid, &worst, 1.0 + REFLECT, -REFLECT);
            let f_reflected = eval(&mut reflected, &mut evals);

            let (new_x, new_f) = if f_reflected > f_best {
                let mut expanded = combine(&centroid, &worst, 1.0 + EXPAND, -EXPAND);
                let f_expanded = eval(&mut expanded, &mut evals);
                if f_expanded > f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                }
            } else if f_reflected > f_second_worst {
                (reflected, f_reflected)
            } else {
                let (mut contracted, use_reflected) = if f_reflected > f_worst {
                    (combine(&centroid, &reflected, 1.0 - CONTRACT, CONTRACT), true)
                } else {
                    (combine(&centroid, &worst, 1.0 - CONTRACT, CONTRACT), false)
                };
                let f_contracted = eval(&mut contracted, &mut evals);
                let threshold = if use_reflected { f_reflected } else { f_worst };
                if f_contracted > threshold {
                    (contracted, f_contracted)
                } else {
                    // shrink toward the best vertex
                    let anchor = simplex[0].1.clone();
                    for entry in simplex.iter_mut().skip(1) {
                        let mut x = combine(&anchor, &entry.1, 1.0 - SHRINK, SHRINK);
                        let v = eval(&mut x, &mut evals);
                        *entry = (v, x);
                    }
                    sort_desc(&mut simplex);
                    if simplex[0].0 > best_value {
                        best_value = simplex[0].0;
                        best_x = simplex[0].1.clone();
                    }
                    continue;
                }
            };

            simplex[n] = (new_f, new_x);
            sort_desc(&mut simplex);
            if simplex[0].0 > best_value {
                best_value = simplex[0].0;
                best_x = simplex[0].1.clone();
            }
        }

        NmOutcome {
            x: best_x,
            value: best_value,
            evaluations: evals,
            converged,
        }
    }
}

fn sort_desc(simplex: &mut [(f64, Vec<f64>)]) {
    simplex.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
}

fn diameter(simplex: &[(f64, Vec<f64>)]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..simplex.len() {
        for j in (i + 1)..simplex.len() {
            let dist = simplex[i]
                .1
                .iter()
                .zip(simplex[j].1.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            d = d.max(dist);
        }
    }
    d
}

fn centroid_excluding_worst(simplex: &[(f64, Vec<f64>)]) -> Vec<f64> {
    let n = simplex.len() - 1;
    let dim = simplex[0].1.len();
    let mut c = vec![0.0; dim];
    for (_, x) in simplex.iter().take(n) {
        for (ci, xi) in c.iter_mut().zip(x.iter()) {
            *ci += xi;
        }
    }
    for ci in c.iter_mut() {
        *ci /= n as f64;
    }
    c
}

fn combine(a: &[f64], b: &[f64], wa: f64, wb: f64) -> Vec<f64> {
    a.iter().zip(b.iter()).map(|(x, y)| wa * x + wb * y).collect()
}

/// Clamp to the non-negative orthant and renormalize to the unit simplex.
/// An all-zero vector projects to the uniform distribution.
pub(crate) fn project_simplex(p: &mut [f64]) {
    let mut total = 0.0;
    for x in p.iter_mut() {
        if !x.is_finite() || *x < 0.0 {
            *x = 0.0;
        }
        total += *x;
    }
    if total <= 0.0 {
        let u = 1.0 / p.len() as f64;
        p.fill(u);
    } else {
        for x in p.iter_mut() {
            *x /= total;
        }
    }
}
