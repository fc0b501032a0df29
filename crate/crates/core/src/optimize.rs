//! Box-constrained Hooke-Jeeves pattern search (maximization).

use serde::{Deserialize, Serialize};

use crate::error::{NpmcError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub initial_step: f64,
    /// Step multiplier after a failed exploration, in (0, 1).
    pub shrink_factor: f64,
    pub step_tolerance: f64,
    pub max_evaluations: usize,
    /// Start point; `None` means the all-zero vector.
    pub initial_point: Option<Vec<f64>>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            shrink_factor: 0.5,
            step_tolerance: 1e-4,
            max_evaluations: 20_000,
            initial_point: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(NpmcError::InvalidArgument(format!(
                "initial_step {} must be positive",
                self.initial_step
            )));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(NpmcError::InvalidArgument(format!(
                "shrink_factor {} must lie in (0, 1)",
                self.shrink_factor
            )));
        }
        if !(self.step_tolerance > 0.0) {
            return Err(NpmcError::InvalidArgument(format!(
                "step_tolerance {} must be positive",
                self.step_tolerance
            )));
        }
        if self.max_evaluations == 0 {
            return Err(NpmcError::InvalidArgument("max_evaluations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// True when the step fell below tolerance before the evaluation budget ran out.
    pub converged: bool,
}

struct Counted<'a, F> {
    f: &'a mut F,
    evaluations: usize,
    budget: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<'_, F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(NpmcError::NonFiniteObjective {
                point: x.to_vec(),
                value: v,
            });
        }
        Ok(v)
    }

    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }
}

/// Coordinate-wise probe of `+step` then `-step` around `base`, keeping any
/// strict improvement.
fn explore<F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<'_, F>,
    base: &[f64],
    base_value: f64,
    step: f64,
    lower: &[f64],
    upper: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let mut x = base.to_vec();
    let mut fx = base_value;
    for i in 0..x.len() {
        let orig = x[i];
        for dir in [1.0, -1.0] {
            if f.exhausted() {
                return Ok((x, fx));
            }
            let cand = (orig + dir * step).clamp(lower[i], upper[i]);
            if cand == orig {
                continue;
            }
            x[i] = cand;
            let v = f.eval(&x)?;
            if v > fx {
                fx = v;
                break;
            }
            x[i] = orig;
        }
    }
    Ok((x, fx))
}

/// Maximize `f` over the box `[lower, upper]`. Every evaluated point is
/// clamped into the box; the returned point is the best one seen.
pub fn hooke_jeeves_maximize<F>(mut f: F, lower: &[f64], upper: &[f64], cfg: &SearchConfig) -> Result<SearchResult>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let d = lower.len();
    if upper.len() != d {
        return Err(NpmcError::InvalidArgument("bound lengths differ".into()));
    }
    if let Some(i) = (0..d).find(|&i| !(lower[i] <= upper[i])) {
        return Err(NpmcError::InvalidArgument(format!(
            "lower bound {} exceeds upper bound {} in coordinate {i}",
            lower[i], upper[i]
        )));
    }
    let start = cfg.initial_point.clone().unwrap_or_else(|| vec![0.0; d]);
    if start.len() != d {
        return Err(NpmcError::InvalidArgument(format!(
            "initial point has {} coordinates, expected {d}",
            start.len()
        )));
    }
    if (0..d).any(|i| !(start[i] >= lower[i] && start[i] <= upper[i])) {
        return Err(NpmcError::InvalidArgument(format!(
            "initial point {start:?} lies outside the box"
        )));
    }

    let mut counted = Counted {
        f: &mut f,
        evaluations: 0,
        budget: cfg.max_evaluations,
    };
    let mut x = start;
    let mut fx = counted.eval(&x)?;
    if d == 0 {
        return Ok(SearchResult {
            argmax: x,
            value: fx,
            evaluations: counted.evaluations,
            converged: true,
        });
    }
    let mut step = cfg.initial_step;
    while step >= cfg.step_tolerance && !counted.exhausted() {
        let (mut y, mut fy) = explore(&mut counted, &x, fx, step, lower, upper)?;
        if fy > fx {
            // Pattern moves: keep extrapolating along the last successful direction.
            loop {
                let prev = std::mem::replace(&mut x, y.clone());
                fx = fy;
                if counted.exhausted() {
                    break;
                }
                let pattern: Vec<f64> = (0..d)
                    .map(|i| (2.0 * y[i] - prev[i]).clamp(lower[i], upper[i]))
                    .collect();
                let fp = counted.eval(&pattern)?;
                let (z, fz) = explore(&mut counted, &pattern, fp, step, lower, upper)?;
                if fz > fx {
                    y = z;
                    fy = fz;
                } else {
                    break;
                }
            }
        } else {
            step *= cfg.shrink_factor;
        }
    }
    Ok(SearchResult {
        argmax: x,
        value: fx,
        evaluations: counted.evaluations,
        converged: step < cfg.step_tolerance,
    })
}

/// Run [`hooke_jeeves_maximize`] from each start (clamped into the box) and
/// keep the best value; earlier starts win ties. Evaluations are summed.
pub fn hooke_jeeves_multistart<F>(
    mut f: F,
    lower: &[f64],
    upper: &[f64],
    cfg: &SearchConfig,
    starts: &[Vec<f64>],
) -> Result<SearchResult>
where
    F: FnMut(&[f64]) -> f64,
{
    if starts.is_empty() {
        return hooke_jeeves_maximize(f, lower, upper, cfg);
    }
    let mut best: Option<SearchResult> = None;
    let mut total = 0;
    for s in starts {
        if s.len() != lower.len() {
            return Err(NpmcError::InvalidArgument("start point has the wrong length".into()));
        }
        let start: Vec<f64> = s
            .iter()
            .zip(lower.iter().zip(upper))
            .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
            .collect();
        let run_cfg = SearchConfig {
            initial_point: Some(start),
            ..cfg.clone()
        };
        let r = hooke_jeeves_maximize(&mut f, lower, upper, &run_cfg)?;
        total += r.evaluations;
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    let mut best = best.expect("at least one start");
    best.evaluations = total;
    Ok(best)
}

/// Default multi-start points: the zero vector, all ones and all tens.
pub fn default_starts(dim: usize) -> Vec<Vec<f64>> {
    [0.0, 1.0, 10.0].iter().map(|&v| vec![v; dim]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tight() -> SearchConfig {
        SearchConfig {
            step_tolerance: 1e-6,
            ..Default::default()
        }
    }

    #[test]
    fn one_dimensional_parabola() {
        let r = hooke_jeeves_maximize(|x| -(x[0] - 3.0).powi(2), &[0.0], &[10.0], &tight()).unwrap();
        assert_abs_diff_eq!(r.argmax[0], 3.0, epsilon = 1e-5);
        assert!(r.converged);
    }

    #[test]
    fn constant_function_stays_put() {
        let cfg = SearchConfig {
            initial_point: Some(vec![2.0, 5.0]),
            ..Default::default()
        };
        let r = hooke_jeeves_maximize(|_| 1.5, &[0.0, 0.0], &[10.0, 10.0], &cfg).unwrap();
        assert_eq!(r.argmax, vec![2.0, 5.0]);
        assert!(r.converged);
        assert_eq!(r.value, 1.5);
    }

    #[test]
    fn boundary_optimum_is_respected() {
        // Unconstrained optimum at (-2, 4); the box forces x0 = 0.
        let f = |x: &[f64]| -(x[0] + 2.0).powi(2) - (x[1] - 4.0).powi(2) - 0.5 * x[0] * x[1];
        let r = hooke_jeeves_maximize(f, &[0.0, 0.0], &[10.0, 10.0], &tight()).unwrap();
        assert!(r.argmax[0] <= 1e-6);
        assert_abs_diff_eq!(r.argmax[1], 4.0, epsilon = 1e-5);
    }

    #[test]
    fn evaluated_points_stay_in_box() {
        let mut seen = Vec::new();
        let f = |x: &[f64]| {
            seen.push(x.to_vec());
            x[0] + x[1]
        };
        let r = hooke_jeeves_maximize(f, &[0.0, -1.0], &[3.0, 2.0], &SearchConfig::default()).unwrap();
        assert_eq!(r.argmax, vec![3.0, 2.0]);
        assert!(seen.iter().all(|p| (0.0..=3.0).contains(&p[0]) && (-1.0..=2.0).contains(&p[1])));
        assert_eq!(seen.len(), r.evaluations);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = SearchConfig::default();
        assert!(hooke_jeeves_maximize(|_| 0.0, &[1.0], &[0.0], &cfg).is_err());
        let e = hooke_jeeves_maximize(|x| if x[0] > 0.5 { f64::NAN } else { x[0] }, &[0.0], &[1.0], &cfg);
        assert!(matches!(e, Err(NpmcError::NonFiniteObjective { .. })));
        let bad = SearchConfig {
            shrink_factor: 1.0,
            ..Default::default()
        };
        assert!(hooke_jeeves_maximize(|_| 0.0, &[0.0], &[1.0], &bad).is_err());
        let outside = SearchConfig {
            initial_point: Some(vec![2.0]),
            ..Default::default()
        };
        assert!(hooke_jeeves_maximize(|_| 0.0, &[0.0], &[1.0], &outside).is_err());
    }

    #[test]
    fn budget_is_honoured() {
        let cfg = SearchConfig {
            max_evaluations: 7,
            ..Default::default()
        };
        let r = hooke_jeeves_maximize(|x| -(x[0] - 500.0).powi(2), &[0.0], &[1e4], &cfg).unwrap();
        assert!(r.evaluations <= 7);
        assert!(!r.converged);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| -(x[0] - 1.3).abs() - 2.0 * (x[1] - 0.7).abs();
        let a = hooke_jeeves_maximize(f, &[0.0; 2], &[5.0; 2], &tight()).unwrap();
        let b = hooke_jeeves_maximize(f, &[0.0; 2], &[5.0; 2], &tight()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multistart_keeps_best() {
        // Two bumps; the zero start finds the lower one.
        let f = |x: &[f64]| (-(x[0] - 0.5).powi(2)).exp() + 2.0 * (-(x[0] - 9.0).powi(2)).exp();
        let single = hooke_jeeves_maximize(f, &[0.0], &[20.0], &tight()).unwrap();
        let multi = hooke_jeeves_multistart(f, &[0.0], &[20.0], &tight(), &default_starts(1)).unwrap();
        assert!(multi.value >= single.value);
        assert_abs_diff_eq!(multi.argmax[0], 9.0, epsilon = 1e-4);
    }

    #[test]
    fn empty_dimension() {
        let r = hooke_jeeves_maximize(|_| 4.0, &[], &[], &SearchConfig::default()).unwrap();
        assert_eq!(r.value, 4.0);
        assert!(r.argmax.is_empty());
    }
}
