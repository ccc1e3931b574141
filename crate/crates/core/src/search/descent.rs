use crate::hamiltonian::{BlockSpectra, ControlPoint, CouplingPair, OnSiteEnergies};

use super::SearchConfig;

const FD_STEP: f64 = 1e-6;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const FIRST_STEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub point: ControlPoint<f64>,
    /// Final value of the maximized function (objective minus any τ penalty).
    pub objective: f64,
    /// Decoupling objective at the final point, without penalty.
    pub raw_objective: f64,
    pub iterations: usize,
    /// Maximized function after every round, starting with the initial value.
    pub trace: Vec<f64>,
    pub converged: bool,
}

struct Problem<'a> {
    couplings: &'a CouplingPair<f64>,
    penalty: f64,
}

impl Problem<'_> {
    fn spectra(&self, e: [f64; 3]) -> BlockSpectra<f64> {
        BlockSpectra::new(&OnSiteEnergies::from_array(e), self.couplings)
    }

    fn value(&self, s: &BlockSpectra<f64>, tau: f64) -> f64 {
        s.objective(tau) - self.penalty * tau
    }

    fn at(&self, e: [f64; 3], tau: f64) -> f64 {
        self.value(&self.spectra(e), tau)
    }
}

/// Backtracking ascent along `g` from `f0`; returns the accepted step
/// length and the new value.
fn line_search(f0: f64, g_norm2: f64, initial: f64, mut eval: impl FnMut(f64) -> Option<f64>) -> Option<(f64, f64)> {
    let mut t = initial;
    for _ in 0..MAX_HALVINGS {
        if let Some(f) = eval(t) {
            if f >= f0 + ARMIJO * t * g_norm2 && f > f0 {
                return Some((t, f));
            }
        }
        t *= 0.5;
    }
    None
}

/// Barzilai-Borwein trial step for ascent, if the curvature along `s` is negative.
fn secant_step(s: &[f64], g_old: &[f64], g: &[f64]) -> Option<f64> {
    let ss: f64 = s.iter().map(|x| x * x).sum();
    let sy: f64 = s.iter().zip(g_old.iter().zip(g)).map(|(s, (a, b))| s * (a - b)).sum();
    (sy > 0.0 && ss > 0.0).then(|| ss / sy).filter(|t| t.is_finite())
}

/// Alternating ascent on the decoupling objective: one line-searched
/// gradient step in `(E1, E2, E3)` at fixed `τ`, then one in `τ` at fixed
/// energies, per round.
///
/// Gradients are central differences. Each backtracking search starts from a
/// secant step built from the previous move in that block, no longer than
/// the grid half-range, and `τ` is never allowed to reach zero. Stops when a round gains less than `conv_tol`, or after
/// `max_iterations` rounds with `converged = false`.
pub fn coordinate_descent(start: ControlPoint<f64>, config: &SearchConfig) -> DescentOutcome {
    let prob = Problem {
        couplings: &config.couplings,
        penalty: config.tau_penalty,
    };
    let mut e = start.energies.as_array();
    let mut tau = start.tau;
    let mut spectra = prob.spectra(e);
    let mut f = prob.value(&spectra, tau);
    let mut trace = vec![f];
    // step lengths measured as multiples of the gradient
    let mut step_e = 0.0;
    let mut step_t = 0.0;
    // last accepted displacement and the gradient it started from
    let mut prev_e: Option<([f64; 3], [f64; 3])> = None;
    let mut prev_t: Option<(f64, f64)> = None;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iterations {
        iterations += 1;
        let round_start = f;

        let mut g = [0.0; 3];
        for k in 0..3 {
            let mut hi = e;
            let mut lo = e;
            hi[k] += FD_STEP;
            lo[k] -= FD_STEP;
            g[k] = (prob.at(hi, tau) - prob.at(lo, tau)) / (2.0 * FD_STEP);
        }
        let g2: f64 = g.iter().map(|x| x * x).sum();
        if g2 > 0.0 && g2.is_finite() {
            let initial = match &prev_e {
                Some((s, g_old)) => secant_step(s, g_old, &g).unwrap_or(2.0 * step_e),
                None => FIRST_STEP / g2.sqrt(),
            }
            .min(config.range / g2.sqrt());
            let found = line_search(f, g2, initial, |t| {
                let trial = [e[0] + t * g[0], e[1] + t * g[1], e[2] + t * g[2]];
                Some(prob.at(trial, tau))
            });
            if let Some((t, f_new)) = found {
                for k in 0..3 {
                    e[k] += t * g[k];
                }
                f = f_new;
                spectra = prob.spectra(e);
                step_e = t;
                prev_e = Some(([t * g[0], t * g[1], t * g[2]], g));
            }
        }

        let gt = (prob.value(&spectra, tau + FD_STEP) - prob.value(&spectra, tau - FD_STEP)) / (2.0 * FD_STEP);
        let gt2 = gt * gt;
        if gt2 > 0.0 && gt2.is_finite() {
            let initial = match prev_t {
                Some((s, g_old)) => secant_step(&[s], &[g_old], &[gt]).unwrap_or(2.0 * step_t),
                None => FIRST_STEP / gt.abs(),
            }
            .min(config.range / gt.abs());
            let found = line_search(f, gt2, initial, |t| {
                let trial = tau + t * gt;
                (trial > 0.0).then(|| prob.value(&spectra, trial))
            });
            if let Some((t, f_new)) = found {
                tau += t * gt;
                f = f_new;
                step_t = t;
                prev_t = Some((t * gt, gt));
            }
        }

        trace.push(f);
        if f - round_start < config.conv_tol {
            converged = true;
            break;
        }
    }

    let point = ControlPoint::new(e[0], e[1], e[2], tau);
    DescentOutcome {
        point,
        objective: f,
        raw_objective: spectra.objective(tau),
        iterations,
        trace,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::objective;

    fn config() -> SearchConfig {
        SearchConfig {
            couplings: CouplingPair::new(1.0, 0.9).unwrap(),
            ..SearchConfig::default()
        }
    }

    #[test]
    fn trace_is_monotone_and_round_change_small() {
        let cfg = config();
        for start in [
            ControlPoint::new(-5.0, -5.0, -5.0, 5.0),
            ControlPoint::new(1.0, -3.0, 5.0, 11.0),
            ControlPoint::new(3.0, 3.0, -1.0, 17.0),
        ] {
            let out = coordinate_descent(start, &cfg);
            assert!(out.trace.windows(2).all(|w| w[1] >= w[0]));
            assert!(out.point.tau > 0.0);
            if out.converged {
                let n = out.trace.len();
                assert!(out.trace[n - 1] - out.trace[n - 2] < cfg.conv_tol);
            }
            assert!((out.raw_objective - objective(&out.point, &cfg.couplings)).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_start_stays_put() {
        // zero energies, J = 1: block spectra {0, 2, -4}, so τ = π gives identity
        let cfg = SearchConfig {
            couplings: CouplingPair::new(1.0, 1.0).unwrap(),
            ..SearchConfig::default()
        };
        let start = ControlPoint::new(0.0, 0.0, 0.0, std::f64::consts::PI);
        let f0 = objective(&start, &cfg.couplings);
        let out = coordinate_descent(start, &cfg);
        assert!(out.iterations <= 1);
        assert!(out.objective >= f0);
        if (f0 - 2.0).abs() < 1e-12 {
            assert_eq!(out.point, start);
        }
    }

    #[test]
    fn iteration_cap_flags_non_convergence() {
        let cfg = SearchConfig {
            max_iterations: 1,
            conv_tol: 1e-300,
            ..config()
        };
        let out = coordinate_descent(ControlPoint::new(1.0, -3.0, 5.0, 11.0), &cfg);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.trace.len(), 2);
        assert!(!out.converged || out.trace[1] - out.trace[0] < 1e-300);
    }
}

