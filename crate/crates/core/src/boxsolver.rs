//! Limited-memory projected quasi-Newton minimisation under lower bounds.
//!
//! Each iteration fixes the variables sitting on their bound with a positive
//! gradient, builds a two-loop L-BFGS direction on the remaining (free)
//! variables, and runs an Armijo backtracking search along the projected path
//! `P(x + alpha d)`. Curvature pairs are kept only when `s'y > 0`, so the
//! implicit Hessian approximation stays positive definite.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Smooth objective: returns the value at `x` and writes the gradient into `grad`.
pub trait Objective {
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<F> Objective for F
where
    F: Fn(&[f64], &mut [f64]) -> f64,
{
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Stop once the infinity norm of the projected gradient is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Number of curvature pairs kept.
    pub memory_size: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tolerance: 1e-8,
            max_iterations: 500,
            memory_size: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveRequest<'a, O: ?Sized> {
    pub objective: &'a O,
    pub lower_bounds: Vec<f64>,
    pub start_point: Vec<f64>,
    pub settings: SolverSettings,
}

impl<'a, O: Objective + ?Sized> SolveRequest<'a, O> {
    /// Problem over the non-negative orthant.
    pub fn nonnegative(objective: &'a O, start_point: Vec<f64>) -> Self {
        SolveRequest {
            objective,
            lower_bounds: vec![0.0; start_point.len()],
            start_point,
            settings: SolverSettings::default(),
        }
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: Vec<f64>,
    pub value: f64,
    pub projected_gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
}

fn projected_gradient_norm(x: &[f64], g: &[f64], lb: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lb)
        .map(|((&xi, &gi), &li)| {
            if xi <= li {
                gi.min(0.0).abs()
            } else {
                gi.abs()
            }
        })
        .fold(0.0, f64::max)
}

fn masked_dot(a: &[f64], b: &[f64], free: &[bool]) -> f64 {
    a.iter()
        .zip(b)
        .zip(free)
        .filter(|(_, &f)| f)
        .map(|((x, y), _)| x * y)
        .sum()
}

/// Two-loop recursion restricted to the free variables; returns `-H g`.
fn direction(g: &[f64], free: &[bool], memory: &VecDeque<Pair>) -> Vec<f64> {
    let mut q: Vec<f64> = g
        .iter()
        .zip(free)
        .map(|(&gi, &f)| if f { gi } else { 0.0 })
        .collect();
    let mut alphas = Vec::with_capacity(memory.len());
    let mut gamma = None;
    for pair in memory.iter().rev() {
        let sy = masked_dot(&pair.s, &pair.y, free);
        if sy <= 0.0 {
            alphas.push(None);
            continue;
        }
        if gamma.is_none() {
            let yy = masked_dot(&pair.y, &pair.y, free);
            if yy > 0.0 {
                gamma = Some(sy / yy);
            }
        }
        let rho = 1.0 / sy;
        let a = rho * masked_dot(&pair.s, &q, free);
        for ((qi, &yi), &f) in q.iter_mut().zip(&pair.y).zip(free) {
            if f {
                *qi -= a * yi;
            }
        }
        alphas.push(Some((a, rho)));
    }
    let gamma = gamma.unwrap_or(1.0);
    for qi in q.iter_mut() {
        *qi *= gamma;
    }
    for (pair, slot) in memory.iter().zip(alphas.iter().rev()) {
        if let Some((a, rho)) = *slot {
            let beta = rho * masked_dot(&pair.y, &q, free);
            for ((qi, &si), &f) in q.iter_mut().zip(&pair.s).zip(free) {
                if f {
                    *qi += si * (a - beta);
                }
            }
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Minimises a smooth convex objective subject to `x >= lower_bounds`.
pub fn minimize<O: Objective + ?Sized>(req: &SolveRequest<'_, O>) -> Result<SolveResult> {
    let n = req.start_point.len();
    if req.lower_bounds.len() != n {
        return Err(Error::DimensionMismatch {
            what: "lower bounds",
            expected: n,
            got: req.lower_bounds.len(),
        });
    }
    let lb = &req.lower_bounds;
    if let Some(i) = (0..n).find(|&i| !req.start_point[i].is_finite() || req.start_point[i] < lb[i])
    {
        return Err(Error::InvalidArgument(format!(
            "start point coordinate {i} = {} is infeasible",
            req.start_point[i]
        )));
    }
    let settings = req.settings;

    let mut x = req.start_point.clone();
    let mut g = vec![0.0; n];
    let mut f = req.objective.evaluate(&x, &mut g);
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver {
            message: "objective or gradient not finite at the start point".into(),
            last_iterate: x,
        });
    }
    let f_start = f;
    let mut memory: VecDeque<Pair> = VecDeque::with_capacity(settings.memory_size);
    let mut iterations = 0;
    let mut x_trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];

    loop {
        let pg = projected_gradient_norm(&x, &g, lb);
        if pg <= settings.tolerance {
            return Ok(SolveResult {
                solution: x,
                value: f,
                projected_gradient_norm: pg,
                iterations,
                converged: true,
            });
        }
        if iterations >= settings.max_iterations {
            return Ok(SolveResult {
                solution: x,
                value: f,
                projected_gradient_norm: pg,
                iterations,
                converged: false,
            });
        }

        let free: Vec<bool> = (0..n).map(|i| x[i] > lb[i] || g[i] < 0.0).collect();
        let mut d = direction(&g, &free, &memory);
        let mut steepest = memory.is_empty();
        let slope = masked_dot(&g, &d, &free);
        if slope.is_nan() || slope >= 0.0 {
            memory.clear();
            d = direction(&g, &free, &memory);
            steepest = true;
        }

        let mut f_accepted = f;
        let accepted = loop {
            let mut alpha = if steepest {
                let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                (1.0 / dmax).min(1.0)
            } else {
                1.0
            };
            let noise = 16.0 * f64::EPSILON * (1.0 + f.abs());
            let mut found = false;
            for _ in 0..MAX_BACKTRACKS {
                let mut moved = false;
                for i in 0..n {
                    x_trial[i] = (x[i] + alpha * d[i]).max(lb[i]);
                    moved |= x_trial[i] != x[i];
                }
                if !moved {
                    break;
                }
                let f_trial = req.objective.evaluate(&x_trial, &mut g_trial);
                if !f_trial.is_finite() || g_trial.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Solver {
                        message: format!(
                            "non-finite objective or gradient at iteration {iterations}"
                        ),
                        last_iterate: x,
                    });
                }
                let decrease: f64 = (0..n).map(|i| g[i] * (x_trial[i] - x[i])).sum();
                if decrease < 0.0 && f_trial <= f_start && f_trial <= f + ARMIJO * decrease + noise
                {
                    f_accepted = f_trial;
                    found = true;
                    break;
                }
                alpha *= BACKTRACK;
            }
            if found || steepest {
                break found;
            }
            // curvature memory produced an unusable direction; retry steepest descent
            memory.clear();
            d = direction(&g, &free, &memory);
            steepest = true;
        };

        if !accepted {
            let pg = projected_gradient_norm(&x, &g, lb);
            return Ok(SolveResult {
                solution: x,
                value: f,
                projected_gradient_norm: pg,
                iterations,
                converged: pg <= settings.tolerance,
            });
        }

        let s: Vec<f64> = (0..n).map(|i| x_trial[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_trial[i] - g[i]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        if sy > f64::EPSILON * yy && settings.memory_size > 0 {
            if memory.len() == settings.memory_size {
                memory.pop_front();
            }
            memory.push_back(Pair { s, y });
        }
        std::mem::swap(&mut x, &mut x_trial);
        std::mem::swap(&mut g, &mut g_trial);
        f = f_accepted;
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_of_quadratic_minimum() {
        let c = [1.0, -1.0];
        let obj = |x: &[f64], g: &mut [f64]| {
            let mut v = 0.0;
            for i in 0..2 {
                g[i] = x[i] - c[i];
                v += 0.5 * (x[i] - c[i]).powi(2);
            }
            v
        };
        let res = minimize(&SolveRequest::nonnegative(&obj, vec![0.0, 0.0])).unwrap();
        assert!(res.converged);
        assert!((res.solution[0] - 1.0).abs() < 1e-10);
        assert_eq!(res.solution[1], 0.0);
    }

    #[test]
    fn ill_conditioned_box_quadratic() {
        // diag(1, 100, 0.01) quadratic, minimum at [2, -3, 5] -> projection [2, 0, 5]
        let d = [1.0, 100.0, 0.01];
        let c = [2.0, -3.0, 5.0];
        let obj = |x: &[f64], g: &mut [f64]| {
            let mut v = 0.0;
            for i in 0..3 {
                g[i] = d[i] * (x[i] - c[i]);
                v += 0.5 * d[i] * (x[i] - c[i]).powi(2);
            }
            v
        };
        let req =
            SolveRequest::nonnegative(&obj, vec![1.0, 1.0, 1.0]).with_settings(SolverSettings {
                tolerance: 1e-12,
                ..Default::default()
            });
        let res = minimize(&req).unwrap();
        assert!(res.converged, "{res:?}");
        for (a, b) in res.solution.iter().zip([2.0, 0.0, 5.0]) {
            assert!((a - b).abs() < 1e-10, "{:?}", res.solution);
        }
    }

    #[test]
    fn rejects_infeasible_start() {
        let obj = |_: &[f64], _: &mut [f64]| 0.0;
        assert!(minimize(&SolveRequest::nonnegative(&obj, vec![-1.0])).is_err());
    }

    #[test]
    fn non_finite_objective_is_error() {
        let obj = |x: &[f64], g: &mut [f64]| {
            g[0] = -1.0;
            if x[0] > 0.5 {
                f64::NAN
            } else {
                -x[0]
            }
        };
        match minimize(&SolveRequest::nonnegative(&obj, vec![0.0])) {
            Err(Error::Solver { last_iterate, .. }) => assert!(last_iterate[0] >= 0.0),
            other => panic!("expected solver failure, got {other:?}"),
        }
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let obj = |x: &[f64], g: &mut [f64]| {
            g[0] = 4.0 * (x[0] - 3.0).powi(3);
            (x[0] - 3.0).powi(4)
        };
        let req = SolveRequest::nonnegative(&obj, vec![0.0]).with_settings(SolverSettings {
            max_iterations: 2,
            tolerance: 1e-14,
            ..Default::default()
        });
        let res = minimize(&req).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 2);
    }
}
