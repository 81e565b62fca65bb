//! Leaky integrate-and-fire membrane dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// LIF membrane constants shared by every neuron in a population.
///
/// Voltages are in mV, time constants in ms; `resistance` and currents are
/// unitless scales chosen so that the steady state under constant current
/// `I` sits at `u_rest + resistance * I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    /// Membrane time constant (ms).
    pub tau: f64,
    /// Membrane resistance.
    pub resistance: f64,
    /// Post-spike reset voltage; also the floor of the legal voltage range.
    pub u_reset: f64,
    /// Resting potential: the zero-input fixed point of the leak.
    pub u_rest: f64,
    /// Firing threshold.
    pub u_threshold: f64,
    /// Constant background drive added to every neuron's input current.
    pub i_background: f64,
}

impl NeuronParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.resistance > 0.0) {
            return Err(Error::Config(format!(
                "resistance must be positive, got {}",
                self.resistance
            )));
        }
        if !(self.u_reset <= self.u_rest && self.u_rest < self.u_threshold) {
            return Err(Error::Config(format!(
                "need u_reset <= u_rest < u_threshold, got {} / {} / {}",
                self.u_reset, self.u_rest, self.u_threshold
            )));
        }
        Ok(())
    }
}

impl Default for NeuronParams {
    fn default() -> Self {
        NeuronParams {
            tau: 10.0,
            resistance: 5.0,
            u_reset: -75.0,
            u_rest: -67.0,
            u_threshold: -37.0,
            i_background: 0.7,
        }
    }
}

/// One forward-Euler step of `tau * dU/dt = -(U - u_rest) + R * I`.
///
/// The leak pulls toward `u_rest` so the resting potential is the
/// documented zero-input fixed point. If the updated voltage reaches
/// `u_threshold` the neuron fires and the voltage is set to `u_reset`;
/// strong inhibition is floored at `u_reset`, so the returned voltage is
/// always inside `[u_reset, u_threshold)`.
///
/// `input_current` is the full current for this step; the caller is
/// responsible for adding `i_background`.
pub fn lif_step(
    potential: f64,
    input_current: f64,
    params: &NeuronParams,
    dt_ms: f64,
) -> Result<(f64, bool)> {
    if !potential.is_finite() {
        return Err(Error::Simulation {
            step: 0,
            detail: format!("non-finite membrane potential {potential}"),
        });
    }
    if !input_current.is_finite() {
        return Err(Error::Simulation {
            step: 0,
            detail: format!("non-finite input current {input_current}"),
        });
    }
    let du = (dt_ms / params.tau) * (-(potential - params.u_rest) + params.resistance * input_current);
    let updated = potential + du;
    if updated >= params.u_threshold {
        Ok((params.u_reset, true))
    } else {
        Ok((updated.max(params.u_reset), false))
    }
}

/// Closed-form trajectory under constant current, starting from `u_rest`:
/// `U(t) = u_rest + R * I * (1 - exp(-t / tau))`.
///
/// Used by tests as the analytic reference for the Euler integrator.
pub fn lif_constant_current_exact(t_ms: f64, current: f64, params: &NeuronParams) -> f64 {
    params.u_rest + params.resistance * current * (1.0 - (-t_ms / params.tau).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_are_valid() {
        NeuronParams::default().validate().unwrap();
    }

    #[test]
    fn validate_rejects_bad_ordering() {
        let mut p = NeuronParams::default();
        p.u_rest = -80.0; // below u_reset
        assert!(p.validate().is_err());
        let mut p = NeuronParams::default();
        p.tau = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn resting_potential_is_fixed_point() {
        let p = NeuronParams::default();
        let (u, fired) = lif_step(p.u_rest, 0.0, &p, 1.0).unwrap();
        assert_eq!(u, p.u_rest);
        assert!(!fired);
    }

    #[test]
    fn background_current_converges_to_shifted_fixed_point() {
        // Constant I = 0.7 with R = 5 settles at u_rest + 3.5 = -63.5.
        let p = NeuronParams::default();
        let mut u = p.u_rest;
        for _ in 0..100 {
            let (next, fired) = lif_step(u, 0.7, &p, 1.0).unwrap();
            assert!(!fired);
            u = next;
        }
        assert!((u - (-63.5)).abs() < 0.05, "settled at {u}");
    }

    #[test]
    fn threshold_crossing_resets() {
        let p = NeuronParams::default();
        // From -38, a current large enough to cross -37 in one step.
        let (u, fired) = lif_step(-38.0, 100.0, &p, 1.0).unwrap();
        assert!(fired);
        assert_eq!(u, p.u_reset);
    }

    #[test]
    fn strong_inhibition_floors_at_reset() {
        let p = NeuronParams::default();
        let (u, fired) = lif_step(p.u_rest, -1000.0, &p, 1.0).unwrap();
        assert!(!fired);
        assert_eq!(u, p.u_reset);
    }

    #[test]
    fn non_finite_inputs_are_faults() {
        let p = NeuronParams::default();
        assert!(lif_step(f64::NAN, 0.0, &p, 1.0).is_err());
        assert!(lif_step(-67.0, f64::INFINITY, &p, 1.0).is_err());
    }

    #[test]
    fn euler_tracks_exact_solution() {
        let p = NeuronParams::default();
        let current = 0.7;
        let mut max_rel = vec![0.0f64; 3];
        for (k, dt) in [1.0, 0.1, 0.01].into_iter().enumerate() {
            let steps = (100.0 / dt) as usize;
            let mut u = p.u_rest;
            for s in 0..steps {
                u = lif_step(u, current, &p, dt).unwrap().0;
                let exact = lif_constant_current_exact((s + 1) as f64 * dt, current, &p);
                let rel = (u - exact).abs() / exact.abs();
                max_rel[k] = max_rel[k].max(rel);
            }
        }
        assert!(max_rel[0] > max_rel[1] && max_rel[1] > max_rel[2], "{max_rel:?}");
        assert!(max_rel[2] < 1e-3, "dt=0.01 max relative error {}", max_rel[2]);
    }

    #[test]
    fn zero_input_decay_is_monotone_and_spike_free() {
        let p = NeuronParams::default();
        for start in [-74.9, -70.0, -67.0, -50.0, -37.1] {
            let mut u = start;
            let mut prev_gap = (u - p.u_rest).abs();
            for _ in 0..200 {
                let (next, fired) = lif_step(u, 0.0, &p, 1.0).unwrap();
                assert!(!fired);
                let gap = (next - p.u_rest).abs();
                assert!(gap <= prev_gap + 1e-12);
                prev_gap = gap;
                u = next;
            }
            assert!((u - p.u_rest).abs() < 1e-6);
        }
    }
}
