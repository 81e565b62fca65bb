//! Populations, signed connections, and the clocked network stepper.
//!
//! Spikes emitted at step `s` become synaptic current at step `s + 1`
//! (one-step delay); events from an external train are injected as current
//! at their own step, into the designated input population.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuron::{lif_step, NeuronParams};
use crate::spike::SpikeTrain;

/// Whether a connection's current contribution is positive or negative.
/// Fixed at construction; weight magnitudes are always non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Excitatory,
    Inhibitory,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Excitatory => 1.0,
            Sign::Inhibitory => -1.0,
        }
    }
}

/// Which learning rule, if any, is allowed to touch a connection's weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlasticityMode {
    Static,
    Stdp,
    Rstdp,
}

/// A named group of identical LIF neurons with per-neuron membrane state.
#[derive(Debug, Clone)]
pub struct Population {
    name: String,
    params: NeuronParams,
    potentials: Vec<f64>,
}

impl Population {
    pub fn new(name: impl Into<String>, size: usize, params: NeuronParams) -> Result<Self> {
        let name = name.into();
        if size == 0 {
            return Err(Error::Config(format!("population `{name}` must have size >= 1")));
        }
        params.validate()?;
        Ok(Population {
            name,
            params,
            potentials: vec![params.u_rest; size],
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.potentials.len()
    }

    pub fn params(&self) -> &NeuronParams {
        &self.params
    }

    pub fn potentials(&self) -> &[f64] {
        &self.potentials
    }

    pub fn reset(&mut self) {
        self.potentials.fill(self.params.u_rest);
    }
}

/// Dense weight matrix between two populations, `pre_size x post_size`
/// row-major, with a fixed sign, a plasticity mode, weight bounds, and a
/// current gain.
///
/// The synaptic current contributed to post-neuron `j` when pre-neuron `i`
/// fired on the previous step is `sign * gain * weights[i, j]`. The gain
/// sets the physical scale of one unit of weight, so learning rules can
/// keep magnitudes inside a normalized `[w_min, w_max]` band.
#[derive(Debug, Clone)]
pub struct Connection {
    name: String,
    pre: String,
    post: String,
    pre_size: usize,
    post_size: usize,
    weights: Vec<f64>,
    sign: Sign,
    mode: PlasticityMode,
    w_min: f64,
    w_max: f64,
    gain: f64,
}

impl Connection {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        pre: impl Into<String>,
        post: impl Into<String>,
        pre_size: usize,
        post_size: usize,
        weights: Vec<f64>,
        sign: Sign,
        mode: PlasticityMode,
        bounds: (f64, f64),
        gain: f64,
    ) -> Result<Self> {
        let name = name.into();
        let (w_min, w_max) = bounds;
        if pre_size == 0 || post_size == 0 {
            return Err(Error::Config(format!("connection `{name}` has an empty side")));
        }
        if weights.len() != pre_size * post_size {
            return Err(Error::Config(format!(
                "connection `{name}`: {} weights for a {pre_size}x{post_size} matrix",
                weights.len()
            )));
        }
        if !(w_min.is_finite() && w_max.is_finite() && w_min < w_max && w_min >= 0.0) {
            return Err(Error::Config(format!(
                "connection `{name}`: bad weight bounds [{w_min}, {w_max}]"
            )));
        }
        if !(gain.is_finite() && gain >= 0.0) {
            return Err(Error::Config(format!("connection `{name}`: bad gain {gain}")));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < w_min || *w > w_max) {
            return Err(Error::Config(format!(
                "connection `{name}`: weight magnitude outside [{w_min}, {w_max}]"
            )));
        }
        Ok(Connection {
            name,
            pre: pre.into(),
            post: post.into(),
            pre_size,
            post_size,
            weights,
            sign,
            mode,
            w_min,
            w_max,
            gain,
        })
    }

    /// Same-value matrix; handy for fixed inhibitory wiring.
    #[allow(clippy::too_many_arguments)]
    pub fn constant(
        name: impl Into<String>,
        pre: impl Into<String>,
        post: impl Into<String>,
        pre_size: usize,
        post_size: usize,
        weight: f64,
        sign: Sign,
        bounds: (f64, f64),
        gain: f64,
    ) -> Result<Self> {
        Connection::new(
            name,
            pre,
            post,
            pre_size,
            post_size,
            vec![weight; pre_size * post_size],
            sign,
            PlasticityMode::Static,
            bounds,
            gain,
        )
    }

    /// Uniformly sampled magnitudes in `[lo, hi]`.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform<R: Rng>(
        name: impl Into<String>,
        pre: impl Into<String>,
        post: impl Into<String>,
        pre_size: usize,
        post_size: usize,
        lo: f64,
        hi: f64,
        sign: Sign,
        mode: PlasticityMode,
        bounds: (f64, f64),
        gain: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::Config(format!("bad init range [{lo}, {hi}]")));
        }
        let weights = (0..pre_size * post_size)
            .map(|_| rng.random_range(lo..=hi))
            .collect();
        Connection::new(name, pre, post, pre_size, post_size, weights, sign, mode, bounds, gain)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pre(&self) -> &str {
        &self.pre
    }

    pub fn post(&self) -> &str {
        &self.post
    }

    pub fn pre_size(&self) -> usize {
        self.pre_size
    }

    pub fn post_size(&self) -> usize {
        self.post_size
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn mode(&self) -> PlasticityMode {
        self.mode
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.w_min, self.w_max)
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn weight(&self, pre: usize, post: usize) -> f64 {
        self.weights[pre * self.post_size + post]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Add `dw` to one magnitude, clamped into bounds.
    pub fn nudge(&mut self, pre: usize, post: usize, dw: f64) {
        let w = &mut self.weights[pre * self.post_size + post];
        *w = (*w + dw).clamp(self.w_min, self.w_max);
    }

    /// Multiply every magnitude by `factor`, clamped into bounds.
    pub fn scale_all(&mut self, factor: f64) {
        for w in &mut self.weights {
            *w = (*w * factor).clamp(self.w_min, self.w_max);
        }
    }

    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        if weights.len() != self.weights.len() {
            return Err(Error::Config(format!(
                "connection `{}`: expected {} weights, got {}",
                self.name,
                self.weights.len(),
                weights.len()
            )));
        }
        if weights
            .iter()
            .any(|w| !w.is_finite() || *w < self.w_min || *w > self.w_max)
        {
            return Err(Error::Config(format!(
                "connection `{}`: weight outside [{}, {}]",
                self.name, self.w_min, self.w_max
            )));
        }
        self.weights = weights;
        Ok(())
    }

    /// Zero the diagonal of a square matrix (no self-coupling).
    pub fn zero_diagonal(&mut self) -> Result<()> {
        if self.pre_size != self.post_size {
            return Err(Error::Config(format!(
                "connection `{}` is not square, cannot zero diagonal",
                self.name
            )));
        }
        if self.w_min > 0.0 {
            return Err(Error::Config(format!(
                "connection `{}`: w_min {} does not admit a zero diagonal",
                self.name, self.w_min
            )));
        }
        for i in 0..self.pre_size {
            self.weights[i * self.post_size + i] = 0.0;
        }
        Ok(())
    }
}

/// A set of populations wired by connections, advanced one step at a time.
#[derive(Debug, Clone)]
pub struct Network {
    dt_ms: f64,
    populations: Vec<Population>,
    connections: Vec<Connection>,
    /// Resolved (pre, post) population indices per connection.
    endpoints: Vec<(usize, usize)>,
    input_pop: usize,
    /// Current injected per external spike event.
    input_gain: f64,
    /// Neurons that fired on the previous step, per population.
    prev_spikes: Vec<Vec<usize>>,
    currents: Vec<Vec<f64>>,
}

impl Network {
    pub fn new(
        dt_ms: f64,
        populations: Vec<Population>,
        connections: Vec<Connection>,
        input_population: &str,
        input_gain: f64,
    ) -> Result<Self> {
        if !(dt_ms > 0.0) || !dt_ms.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {dt_ms}")));
        }
        if !(input_gain.is_finite() && input_gain >= 0.0) {
            return Err(Error::Config(format!("bad input gain {input_gain}")));
        }
        let index_of = |name: &str| -> Result<usize> {
            populations
                .iter()
                .position(|p| p.name() == name)
                .ok_or_else(|| Error::Config(format!("connection references unknown population `{name}`")))
        };
        let mut endpoints = Vec::with_capacity(connections.len());
        for conn in &connections {
            let pre = index_of(conn.pre())?;
            let post = index_of(conn.post())?;
            if populations[pre].size() != conn.pre_size() {
                return Err(Error::Config(format!(
                    "connection `{}`: pre size {} != population `{}` size {}",
                    conn.name(),
                    conn.pre_size(),
                    conn.pre(),
                    populations[pre].size()
                )));
            }
            if populations[post].size() != conn.post_size() {
                return Err(Error::Config(format!(
                    "connection `{}`: post size {} != population `{}` size {}",
                    conn.name(),
                    conn.post_size(),
                    conn.post(),
                    populations[post].size()
                )));
            }
            endpoints.push((pre, post));
        }
        let input_pop = index_of(input_population)?;
        let prev_spikes = vec![Vec::new(); populations.len()];
        let currents = populations.iter().map(|p| vec![0.0; p.size()]).collect();
        Ok(Network {
            dt_ms,
            populations,
            connections,
            endpoints,
            input_pop,
            input_gain,
            prev_spikes,
            currents,
        })
    }

    pub fn dt_ms(&self) -> f64 {
        self.dt_ms
    }

    pub fn populations(&self) -> &[Population] {
        &self.populations
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn population_index(&self, name: &str) -> Option<usize> {
        self.populations.iter().position(|p| p.name() == name)
    }

    pub fn population(&self, name: &str) -> Option<&Population> {
        self.populations.iter().find(|p| p.name() == name)
    }

    pub fn connection(&self, name: &str) -> Option<&Connection> {
        self.connections.iter().find(|c| c.name() == name)
    }

    pub fn connection_mut(&mut self, name: &str) -> Option<&mut Connection> {
        self.connections.iter_mut().find(|c| c.name() == name)
    }

    /// Mutable access to two distinct connections at once.
    pub fn connection_pair_mut(
        &mut self,
        a: &str,
        b: &str,
    ) -> Option<(&mut Connection, &mut Connection)> {
        let ia = self.connections.iter().position(|c| c.name() == a)?;
        let ib = self.connections.iter().position(|c| c.name() == b)?;
        if ia == ib {
            return None;
        }
        if ia < ib {
            let (left, right) = self.connections.split_at_mut(ib);
            Some((&mut left[ia], &mut right[0]))
        } else {
            let (left, right) = self.connections.split_at_mut(ia);
            Some((&mut right[0], &mut left[ib]))
        }
    }

    /// Reset all membrane state: potentials to rest, pending spikes cleared.
    pub fn reset(&mut self) {
        for pop in &mut self.populations {
            pop.reset();
        }
        for s in &mut self.prev_spikes {
            s.clear();
        }
    }

    /// Advance every population by one step.
    ///
    /// Input current per neuron is `i_background` plus the weighted sum of
    /// presynaptic spikes from the previous step, plus `input_gain` per
    /// external event landing on the input population at this step, plus
    /// Gaussian noise when `noise_sigma > 0`. Returns the neurons that
    /// fired this step, per population.
    pub fn step<R: Rng>(
        &mut self,
        external: Option<&SpikeTrain>,
        step: usize,
        noise_sigma: f64,
        rng: &mut R,
    ) -> Result<Vec<Vec<usize>>> {
        for (pop_idx, pop) in self.populations.iter().enumerate() {
            let bg = pop.params().i_background;
            self.currents[pop_idx].fill(bg);
        }
        for (conn_idx, conn) in self.connections.iter().enumerate() {
            let (pre_idx, post_idx) = self.endpoints[conn_idx];
            let scale = conn.sign().factor() * conn.gain();
            if scale == 0.0 {
                continue;
            }
            let currents = &mut self.currents[post_idx];
            for &i in &self.prev_spikes[pre_idx] {
                let row = &conn.weights()[i * conn.post_size()..(i + 1) * conn.post_size()];
                for (c, w) in currents.iter_mut().zip(row) {
                    *c += scale * w;
                }
            }
        }
        if let Some(train) = external {
            if train.neurons() != self.populations[self.input_pop].size() {
                return Err(Error::Config(format!(
                    "external train has {} neurons, input population has {}",
                    train.neurons(),
                    self.populations[self.input_pop].size()
                )));
            }
            let currents = &mut self.currents[self.input_pop];
            for n in train.neurons_at(step) {
                currents[n] += self.input_gain;
            }
        }
        if noise_sigma > 0.0 {
            let normal = Normal::new(0.0, noise_sigma)
                .map_err(|e| Error::Config(format!("bad noise sigma {noise_sigma}: {e}")))?;
            for currents in &mut self.currents {
                for c in currents.iter_mut() {
                    *c += normal.sample(rng);
                }
            }
        }
        let mut fired = Vec::with_capacity(self.populations.len());
        for (pop_idx, pop) in self.populations.iter_mut().enumerate() {
            let params = *pop.params();
            let mut fired_here = Vec::new();
            for (n, u) in pop.potentials.iter_mut().enumerate() {
                let (next, spiked) =
                    lif_step(*u, self.currents[pop_idx][n], &params, self.dt_ms).map_err(|e| match e {
                        Error::Simulation { detail, .. } => Error::Simulation { step, detail },
                        other => other,
                    })?;
                *u = next;
                if spiked {
                    fired_here.push(n);
                }
            }
            fired.push(fired_here);
        }
        self.prev_spikes = fired.clone();
        Ok(fired)
    }
}
