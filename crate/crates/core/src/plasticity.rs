//! Pair-based STDP, eligibility traces, and reward-modulated updates.
//!
//! The unsupervised rule ([`apply_stdp`]) changes weights immediately from
//! the relative timing of pre/post spikes. The supervised path stores the
//! same timing terms in a decaying per-synapse [`EligibilityTrace`] and
//! converts them to weight changes only when a reward arrives after the
//! trial's decision ([`apply_rstdp`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Connection, PlasticityMode};
use crate::spike::SpikeTrain;

/// Amplitudes, time constants, and weight bounds for the pair rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdpParams {
    /// Potentiation amplitude for causal pairs.
    pub a_plus: f64,
    /// Depression amplitude for anti-causal pairs.
    pub a_minus: f64,
    /// Potentiation time constant (ms).
    pub tau_plus: f64,
    /// Depression time constant (ms).
    pub tau_minus: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl StdpParams {
    pub fn validate(&self) -> Result<()> {
        if self.a_plus < 0.0 || self.a_minus < 0.0 {
            return Err(Error::Config("STDP amplitudes must be non-negative".into()));
        }
        if !(self.tau_plus > 0.0 && self.tau_minus > 0.0) {
            return Err(Error::Config("STDP time constants must be positive".into()));
        }
        if !(self.w_min < self.w_max) {
            return Err(Error::Config(format!(
                "STDP weight bounds [{}, {}] are empty",
                self.w_min, self.w_max
            )));
        }
        Ok(())
    }
}

impl Default for StdpParams {
    fn default() -> Self {
        // Slight depression bias keeps runaway potentiation in check.
        StdpParams {
            a_plus: 0.05,
            a_minus: 0.055,
            tau_plus: 20.0,
            tau_minus: 20.0,
            w_min: 0.0,
            w_max: 1.0,
        }
    }
}

/// Weight change for one spike pair with timing difference
/// `delta_t = t_post - t_pre` in milliseconds.
///
/// Causal pairs (`delta_t > 0`) potentiate, anti-causal pairs depress,
/// both with exponentially vanishing magnitude; simultaneous spikes carry
/// no causal information and change nothing.
pub fn stdp_delta(delta_t_ms: f64, params: &StdpParams) -> f64 {
    if delta_t_ms > 0.0 {
        params.a_plus * (-delta_t_ms / params.tau_plus).exp()
    } else if delta_t_ms < 0.0 {
        -params.a_minus * (delta_t_ms / params.tau_minus).exp()
    } else {
        0.0
    }
}

/// Nearest-neighbor spike pairs between one pre and one post spike list
/// (both sorted ascending): every post spike pairs with the most recent
/// strictly earlier pre spike, every pre spike with the most recent
/// strictly earlier post spike. Yields `(pair_step, delta_steps)` where
/// `pair_step` is the later spike of the pair and `delta_steps` is
/// post minus pre.
fn nearest_neighbor_pairs(pre: &[usize], post: &[usize], out: &mut Vec<(usize, i64)>) {
    out.clear();
    for &b in post {
        let n_earlier = pre.partition_point(|&a| a < b);
        if n_earlier > 0 {
            let a = pre[n_earlier - 1];
            out.push((b, b as i64 - a as i64));
        }
    }
    for &a in pre {
        let n_earlier = post.partition_point(|&b| b < a);
        if n_earlier > 0 {
            let b = post[n_earlier - 1];
            out.push((a, b as i64 - a as i64));
        }
    }
    out.sort_unstable();
}

fn check_train_dims(conn: &Connection, pre: &SpikeTrain, post: &SpikeTrain) -> Result<()> {
    if pre.neurons() != conn.pre_size() || post.neurons() != conn.post_size() {
        return Err(Error::Config(format!(
            "connection `{}` is {}x{} but trains are {}x{}",
            conn.name(),
            conn.pre_size(),
            conn.post_size(),
            pre.neurons(),
            post.neurons()
        )));
    }
    if pre.horizon() != post.horizon() {
        return Err(Error::Config(format!(
            "pre horizon {} != post horizon {}",
            pre.horizon(),
            post.horizon()
        )));
    }
    Ok(())
}

/// Apply nearest-neighbor pair STDP for one presentation directly to a
/// connection's weights, clamped into its bounds.
pub fn apply_stdp(
    conn: &mut Connection,
    pre: &SpikeTrain,
    post: &SpikeTrain,
    params: &StdpParams,
    dt_ms: f64,
) -> Result<()> {
    if conn.mode() != PlasticityMode::Stdp {
        return Err(Error::Config(format!(
            "connection `{}` is not configured for STDP",
            conn.name()
        )));
    }
    check_train_dims(conn, pre, post)?;
    let pre_by = pre.steps_by_neuron();
    let post_by = post.steps_by_neuron();
    let active_post: Vec<usize> = (0..post.neurons()).filter(|&j| !post_by[j].is_empty()).collect();
    let mut pairs = Vec::new();
    for (i, pre_steps) in pre_by.iter().enumerate() {
        if pre_steps.is_empty() {
            continue;
        }
        for &j in &active_post {
            nearest_neighbor_pairs(pre_steps, &post_by[j], &mut pairs);
            let dw: f64 = pairs
                .iter()
                .map(|&(_, delta_steps)| stdp_delta(delta_steps as f64 * dt_ms, params))
                .sum();
            if dw != 0.0 {
                conn.nudge(i, j, dw);
            }
        }
    }
    Ok(())
}

/// Per-synapse accumulator of pending STDP terms, decaying with time
/// constant `tau_e` between contributions.
///
/// Each stored value is expressed at the moment of its synapse's most
/// recent contribution; [`apply_rstdp`] reads the values as they stand
/// when the reward arrives.
#[derive(Debug, Clone, PartialEq)]
pub struct EligibilityTrace {
    rows: usize,
    cols: usize,
    tau_e: f64,
    values: Vec<f64>,
    last_ms: Vec<f64>,
}

impl EligibilityTrace {
    pub fn new(rows: usize, cols: usize, tau_e: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config("eligibility trace must have nonzero dimensions".into()));
        }
        if !(tau_e > 0.0) {
            return Err(Error::Config(format!("tau_e must be positive, got {tau_e}")));
        }
        Ok(EligibilityTrace {
            rows,
            cols,
            tau_e,
            values: vec![0.0; rows * cols],
            last_ms: vec![0.0; rows * cols],
        })
    }

    /// Trace matching a connection's weight shape.
    pub fn for_connection(conn: &Connection, tau_e: f64) -> Result<Self> {
        EligibilityTrace::new(conn.pre_size(), conn.post_size(), tau_e)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, pre: usize, post: usize) -> f64 {
        self.values[pre * self.cols + post]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Zero every accumulator; called at trial start and after a reward
    /// has been applied.
    pub fn reset(&mut self) {
        self.values.fill(0.0);
        self.last_ms.fill(0.0);
    }

    fn contribute(&mut self, pre: usize, post: usize, t_ms: f64, delta: f64) {
        let idx = pre * self.cols + post;
        debug_assert!(t_ms >= self.last_ms[idx] || self.values[idx] == 0.0);
        if self.values[idx] != 0.0 {
            self.values[idx] *= (-(t_ms - self.last_ms[idx]) / self.tau_e).exp();
        }
        self.values[idx] += delta;
        self.last_ms[idx] = t_ms;
    }
}

/// Accumulate one presentation's nearest-neighbor pair terms into `trace`
/// instead of applying them. `offset_ms` is the wall time at which this
/// presentation starts, so traces carried across repeated presentations
/// decay by the real gap between contributions.
pub fn accumulate_eligibility(
    trace: &mut EligibilityTrace,
    conn: &Connection,
    pre: &SpikeTrain,
    post: &SpikeTrain,
    params: &StdpParams,
    dt_ms: f64,
    offset_ms: f64,
) -> Result<()> {
    check_train_dims(conn, pre, post)?;
    if trace.rows != conn.pre_size() || trace.cols != conn.post_size() {
        return Err(Error::Config(format!(
            "trace is {}x{} but connection `{}` is {}x{}",
            trace.rows,
            trace.cols,
            conn.name(),
            conn.pre_size(),
            conn.post_size()
        )));
    }
    let pre_by = pre.steps_by_neuron();
    let post_by = post.steps_by_neuron();
    let active_post: Vec<usize> = (0..post.neurons()).filter(|&j| !post_by[j].is_empty()).collect();
    let mut pairs = Vec::new();
    for (i, pre_steps) in pre_by.iter().enumerate() {
        if pre_steps.is_empty() {
            continue;
        }
        for &j in &active_post {
            nearest_neighbor_pairs(pre_steps, &post_by[j], &mut pairs);
            for &(pair_step, delta_steps) in pairs.iter() {
                let delta = stdp_delta(delta_steps as f64 * dt_ms, params);
                if delta != 0.0 {
                    trace.contribute(i, j, offset_ms + pair_step as f64 * dt_ms, delta);
                }
            }
        }
    }
    Ok(())
}

/// Correct/incorrect tallies over the last ten presentations of a trial.
/// Undecided presentations count toward neither, so the sum may fall
/// short of ten; the reward formulas divide by ten regardless.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialHistory {
    h_correct: u32,
    h_incorrect: u32,
}

impl TrialHistory {
    pub fn new(h_correct: u32, h_incorrect: u32) -> Result<Self> {
        if h_correct + h_incorrect > 10 {
            return Err(Error::Domain(format!(
                "trial history counts {h_correct} + {h_incorrect} exceed the 10 presentations"
            )));
        }
        Ok(TrialHistory {
            h_correct,
            h_incorrect,
        })
    }

    pub fn h_correct(&self) -> u32 {
        self.h_correct
    }

    pub fn h_incorrect(&self) -> u32 {
        self.h_incorrect
    }
}

/// Scalar reward/punishment pair plus the confidence coefficient that
/// scaled it; all three lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSignal {
    pub reward: f64,
    pub punishment: f64,
    pub k: f64,
}

impl RewardSignal {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("reward", self.reward), ("punishment", self.punishment), ("k", self.k)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.reward == 0.0 && self.punishment == 0.0
    }
}

/// Reward from raw tallies: reward = h_incorrect / 10, punishment =
/// h_correct / 10. A confident run that still leans on unhelpful
/// connections gets them strongly depressed; an uncertain run produces
/// only small updates on both sides.
pub fn compute_reward_simple(history: &TrialHistory) -> RewardSignal {
    RewardSignal {
        reward: history.h_incorrect as f64 / 10.0,
        punishment: history.h_correct as f64 / 10.0,
        k: 1.0,
    }
}

/// Confidence-weighted variant: both terms are scaled by
/// `k = |h_correct - h_incorrect| / 10`, so a perfectly split trial
/// produces no update at all.
pub fn compute_reward_weighted(history: &TrialHistory) -> RewardSignal {
    let k = (history.h_correct as f64 - history.h_incorrect as f64).abs() / 10.0;
    RewardSignal {
        reward: k * history.h_incorrect as f64 / 10.0,
        punishment: k * history.h_correct as f64 / 10.0,
        k,
    }
}

/// Convert accumulated traces into weight changes once the trial's
/// decision is known: afferents of the correct-label column move by
/// `+reward * trace`, afferents of the wrong-label column by
/// `-punishment * trace`, clamped into bounds. Both traces are reset.
pub fn apply_rstdp(
    conn_correct: &mut Connection,
    conn_wrong: &mut Connection,
    trace_correct: &mut EligibilityTrace,
    trace_wrong: &mut EligibilityTrace,
    signal: &RewardSignal,
) -> Result<()> {
    signal.validate()?;
    for (conn, trace) in [(&*conn_correct, &*trace_correct), (&*conn_wrong, &*trace_wrong)] {
        if conn.mode() != PlasticityMode::Rstdp {
            return Err(Error::Config(format!(
                "connection `{}` is not configured for R-STDP",
                conn.name()
            )));
        }
        if trace.rows() != conn.pre_size() || trace.cols() != conn.post_size() {
            return Err(Error::Config(format!(
                "trace shape {}x{} does not match connection `{}`",
                trace.rows(),
                trace.cols(),
                conn.name()
            )));
        }
    }
    if signal.reward != 0.0 {
        for i in 0..conn_correct.pre_size() {
            for j in 0..conn_correct.post_size() {
                let e = trace_correct.get(i, j);
                if e != 0.0 {
                    conn_correct.nudge(i, j, signal.reward * e);
                }
            }
        }
    }
    if signal.punishment != 0.0 {
        for i in 0..conn_wrong.pre_size() {
            for j in 0..conn_wrong.post_size() {
                let e = trace_wrong.get(i, j);
                if e != 0.0 {
                    conn_wrong.nudge(i, j, -signal.punishment * e);
                }
            }
        }
    }
    trace_correct.reset();
    trace_wrong.reset();
    Ok(())
}
