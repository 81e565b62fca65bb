//! The two-column spiking classifier: input relay, hidden layer with
//! lateral inhibition, and one output column per class, mutually
//! inhibiting. Presentations reset membrane state, step the network over
//! an input train, and read the decision from the activity gap between
//! the columns over the final window.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::network::{Connection, Network, PlasticityMode, Population, Sign};
use crate::neuron::NeuronParams;
use crate::plasticity::{accumulate_eligibility, apply_stdp, EligibilityTrace, StdpParams};
use crate::spike::{measure_activity, SpikeEvent, SpikeTrain};

pub const POP_INPUT: &str = "input";
pub const POP_HIDDEN: &str = "hidden";
pub const POP_POS: &str = "pos";
pub const POP_NEG: &str = "neg";

pub const CONN_INPUT_HIDDEN: &str = "input_hidden";
pub const CONN_HIDDEN_LATERAL: &str = "hidden_lateral";
pub const CONN_HIDDEN_POS: &str = "hidden_pos";
pub const CONN_HIDDEN_NEG: &str = "hidden_neg";
pub const CONN_POS_NEG: &str = "pos_neg";
pub const CONN_NEG_POS: &str = "neg_pos";

/// Everything needed to build and run the column classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnNetConfig {
    pub n_input: usize,
    pub n_hidden: usize,
    /// Neurons per class column.
    pub n_column: usize,

    /// Magnitude of the fixed hidden lateral inhibition.
    pub lateral_inhibition_weight: f64,
    /// Magnitude of the fixed inter-column inhibition.
    pub mutual_inhibition_weight: f64,

    /// Plastic feedforward weights initialize uniformly in `[lo, hi]`.
    pub init_lo: f64,
    pub init_hi: f64,
    /// Seed for the weight initialization.
    pub seed: u64,

    /// Current injected per external input spike event.
    pub input_gain: f64,
    /// Current per unit weight on input -> hidden.
    pub input_hidden_gain: f64,
    /// Current per unit weight on hidden -> columns.
    pub hidden_column_gain: f64,
    /// Current per unit weight on hidden lateral inhibition.
    pub lateral_gain: f64,
    /// Current per unit weight on the two inter-column connections.
    pub mutual_gain: f64,

    /// Extra silent steps appended after the input train so the last
    /// input events' two-synapse chains reach the columns before readout.
    pub settle_steps: usize,
    /// Activity readout window in steps; `None` means the final 20% of
    /// the run (input horizon plus settle).
    pub decision_window: Option<usize>,
    /// Minimum activity gap for a decision.
    pub decision_threshold: f64,
    /// Presentations per trial.
    pub repetitions: usize,
    /// Current noise injected once a trial has gone undecided.
    pub noise_sigma: f64,

    pub dt_ms: f64,
    pub neuron: NeuronParams,
    pub stdp: StdpParams,
    /// Eligibility trace decay (ms).
    pub tau_eligibility: f64,
}

impl Default for ColumnNetConfig {
    fn default() -> Self {
        ColumnNetConfig {
            n_input: 150,
            n_hidden: 100,
            n_column: 25,
            lateral_inhibition_weight: 0.3,
            mutual_inhibition_weight: 0.5,
            init_lo: 0.1,
            init_hi: 0.3,
            seed: 0,
            input_gain: 100.0,
            input_hidden_gain: 6.0,
            hidden_column_gain: 10.0,
            lateral_gain: 5.0,
            mutual_gain: 4.0,
            settle_steps: 5,
            decision_window: None,
            decision_threshold: 0.02,
            repetitions: 10,
            noise_sigma: 5.0,
            dt_ms: 1.0,
            neuron: NeuronParams::default(),
            stdp: StdpParams::default(),
            tau_eligibility: 250.0,
        }
    }
}

impl ColumnNetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_input == 0 || self.n_hidden == 0 || self.n_column == 0 {
            return Err(Error::Config("population sizes must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !(self.decision_threshold >= 0.0) {
            return Err(Error::Config(format!(
                "decision threshold must be non-negative, got {}",
                self.decision_threshold
            )));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::Config(format!(
                "noise sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        if !(self.dt_ms > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt_ms)));
        }
        let (w_min, w_max) = (self.stdp.w_min, self.stdp.w_max);
        if !(self.init_lo >= w_min && self.init_lo <= self.init_hi && self.init_hi <= w_max) {
            return Err(Error::Config(format!(
                "init range [{}, {}] must sit inside weight bounds [{w_min}, {w_max}]",
                self.init_lo, self.init_hi
            )));
        }
        for (name, g) in [
            ("input_gain", self.input_gain),
            ("input_hidden_gain", self.input_hidden_gain),
            ("hidden_column_gain", self.hidden_column_gain),
            ("lateral_gain", self.lateral_gain),
            ("mutual_gain", self.mutual_gain),
        ] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::Config(format!("{name} must be non-negative, got {g}")));
            }
        }
        if !(self.tau_eligibility > 0.0) {
            return Err(Error::Config(format!(
                "tau_eligibility must be positive, got {}",
                self.tau_eligibility
            )));
        }
        self.neuron.validate()?;
        self.stdp.validate()?;
        Ok(())
    }
}

/// Outcome of one activity readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Positive,
    Negative,
    Undecided,
}

impl Decision {
    pub fn matches(&self, label: Label) -> bool {
        matches!(
            (self, label),
            (Decision::Positive, Label::Positive) | (Decision::Negative, Label::Negative)
        )
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::Positive => "positive",
            Decision::Negative => "negative",
            Decision::Undecided => "undecided",
        }
    }
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pick the more active column, or `Undecided` when the gap is below the
/// threshold (an exact tie is always undecided).
pub fn decide(act_pos: f64, act_neg: f64, threshold: f64) -> Decision {
    let gap = (act_pos - act_neg).abs();
    if gap < threshold || act_pos == act_neg {
        Decision::Undecided
    } else if act_pos > act_neg {
        Decision::Positive
    } else {
        Decision::Negative
    }
}

/// Tallies over one trial's repeated presentations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceReport {
    pub h_correct: u32,
    pub h_incorrect: u32,
    pub undecided: u32,
    pub majority: Decision,
    /// Fraction of presentations answered correctly.
    pub confidence_fraction: f64,
}

/// Spike history of one presentation plus the final activity readout.
#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    pub input: SpikeTrain,
    pub hidden: SpikeTrain,
    pub pos: SpikeTrain,
    pub neg: SpikeTrain,
    pub act_pos: f64,
    pub act_neg: f64,
}

/// Eligibility traces for the two output connections, accumulated over a
/// trial and consumed by the reward application.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTraces {
    pub pos: EligibilityTrace,
    pub neg: EligibilityTrace,
}

/// Result of a full repeated-presentation trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub report: ConfidenceReport,
    pub traces: TrialTraces,
    pub mean_act_pos: f64,
    pub mean_act_neg: f64,
}

/// The assembled classifier.
#[derive(Debug, Clone)]
pub struct ColumnNet {
    net: Network,
    cfg: ColumnNetConfig,
}

impl ColumnNet {
    /// Build the three-layer topology: input -> hidden (excitatory, STDP),
    /// hidden lateral inhibition with a zero diagonal, hidden -> each
    /// column (excitatory, R-STDP), and exactly two inter-column
    /// inhibitory connections. The input population receives nothing.
    pub fn build(cfg: ColumnNetConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let bounds = (cfg.stdp.w_min, cfg.stdp.w_max);
        let populations = vec![
            Population::new(POP_INPUT, cfg.n_input, cfg.neuron)?,
            Population::new(POP_HIDDEN, cfg.n_hidden, cfg.neuron)?,
            Population::new(POP_POS, cfg.n_column, cfg.neuron)?,
            Population::new(POP_NEG, cfg.n_column, cfg.neuron)?,
        ];
        let input_hidden = Connection::uniform(
            CONN_INPUT_HIDDEN,
            POP_INPUT,
            POP_HIDDEN,
            cfg.n_input,
            cfg.n_hidden,
            cfg.init_lo,
            cfg.init_hi,
            Sign::Excitatory,
            PlasticityMode::Stdp,
            bounds,
            cfg.input_hidden_gain,
            &mut rng,
        )?;
        let mut lateral = Connection::constant(
            CONN_HIDDEN_LATERAL,
            POP_HIDDEN,
            POP_HIDDEN,
            cfg.n_hidden,
            cfg.n_hidden,
            cfg.lateral_inhibition_weight,
            Sign::Inhibitory,
            bounds,
            cfg.lateral_gain,
        )?;
        lateral.zero_diagonal()?;
        let hidden_pos = Connection::uniform(
            CONN_HIDDEN_POS,
            POP_HIDDEN,
            POP_POS,
            cfg.n_hidden,
            cfg.n_column,
            cfg.init_lo,
            cfg.init_hi,
            Sign::Excitatory,
            PlasticityMode::Rstdp,
            bounds,
            cfg.hidden_column_gain,
            &mut rng,
        )?;
        let hidden_neg = Connection::uniform(
            CONN_HIDDEN_NEG,
            POP_HIDDEN,
            POP_NEG,
            cfg.n_hidden,
            cfg.n_column,
            cfg.init_lo,
            cfg.init_hi,
            Sign::Excitatory,
            PlasticityMode::Rstdp,
            bounds,
            cfg.hidden_column_gain,
            &mut rng,
        )?;
        let pos_neg = Connection::constant(
            CONN_POS_NEG,
            POP_POS,
            POP_NEG,
            cfg.n_column,
            cfg.n_column,
            cfg.mutual_inhibition_weight,
            Sign::Inhibitory,
            bounds,
            cfg.mutual_gain,
        )?;
        let neg_pos = Connection::constant(
            CONN_NEG_POS,
            POP_NEG,
            POP_POS,
            cfg.n_column,
            cfg.n_column,
            cfg.mutual_inhibition_weight,
            Sign::Inhibitory,
            bounds,
            cfg.mutual_gain,
        )?;
        let net = Network::new(
            cfg.dt_ms,
            populations,
            vec![input_hidden, lateral, hidden_pos, hidden_neg, pos_neg, neg_pos],
            POP_INPUT,
            cfg.input_gain,
        )?;
        Ok(ColumnNet { net, cfg })
    }

    pub fn config(&self) -> &ColumnNetConfig {
        &self.cfg
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn network_mut(&mut self) -> &mut Network {
        &mut self.net
    }

    pub fn connection(&self, name: &str) -> &Connection {
        self.net.connection(name).expect("known connection name")
    }

    pub fn connection_mut(&mut self, name: &str) -> &mut Connection {
        self.net.connection_mut(name).expect("known connection name")
    }

    /// Weights of the output connection feeding `label`'s column.
    pub fn column_connection(&self, label: Label) -> &Connection {
        match label {
            Label::Positive => self.connection(CONN_HIDDEN_POS),
            Label::Negative => self.connection(CONN_HIDDEN_NEG),
        }
    }

    /// Steps one presentation actually runs: the input horizon plus the
    /// settle tail.
    pub fn run_len(&self, horizon: usize) -> usize {
        horizon + self.cfg.settle_steps
    }

    fn decision_window(&self, run_len: usize) -> usize {
        self.cfg
            .decision_window
            .unwrap_or_else(|| (run_len / 5).max(1))
            .min(run_len)
            .max(1)
    }

    /// Run one presentation: reset membrane state, step the network over
    /// the train (plus the settle tail) with optional Gaussian current
    /// noise, record the spike history of every population, and measure
    /// column activity over the final decision window.
    pub fn present<R: Rng>(
        &mut self,
        train: &SpikeTrain,
        noise_sigma: f64,
        rng: &mut R,
    ) -> Result<Presentation> {
        if train.horizon() == 0 {
            return Err(Error::InvalidInput("presentation horizon must be nonzero".into()));
        }
        if train.neurons() != self.cfg.n_input {
            return Err(Error::Config(format!(
                "input train has {} neurons, network expects {}",
                train.neurons(),
                self.cfg.n_input
            )));
        }
        let run_len = self.run_len(train.horizon());
        self.net.reset();
        let mut events: [Vec<SpikeEvent>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for step in 0..run_len {
            let fired = self.net.step(Some(train), step, noise_sigma, rng)?;
            for (pop_idx, fired_here) in fired.iter().enumerate() {
                for &n in fired_here {
                    events[pop_idx].push(SpikeEvent::new(n, step));
                }
            }
        }
        let [ev_in, ev_hid, ev_pos, ev_neg] = events;
        let input = SpikeTrain::new(POP_INPUT, self.cfg.n_input, run_len, ev_in)?;
        let hidden = SpikeTrain::new(POP_HIDDEN, self.cfg.n_hidden, run_len, ev_hid)?;
        let pos = SpikeTrain::new(POP_POS, self.cfg.n_column, run_len, ev_pos)?;
        let neg = SpikeTrain::new(POP_NEG, self.cfg.n_column, run_len, ev_neg)?;
        let win = self.decision_window(run_len);
        let start = run_len - win;
        let act_pos = measure_activity(&pos, self.cfg.n_column, start, win)?;
        let act_neg = measure_activity(&neg, self.cfg.n_column, start, win)?;
        Ok(Presentation {
            input,
            hidden,
            pos,
            neg,
            act_pos,
            act_neg,
        })
    }

    /// Run a full trial: `repetitions` presentations of the same input.
    ///
    /// Once any presentation comes back undecided, the remaining ones run
    /// with `noise_sigma` current noise to shake the network out of
    /// silence. With `plasticity` on, the hidden layer learns by STDP
    /// after every presentation and the output connections accumulate
    /// eligibility traces; the traces are returned for the caller to
    /// convert into reward updates.
    pub fn repeated_presentation<R: Rng>(
        &mut self,
        train: &SpikeTrain,
        label: Label,
        plasticity: bool,
        rng: &mut R,
    ) -> Result<TrialResult> {
        let reps = self.cfg.repetitions;
        let tau_e = self.cfg.tau_eligibility;
        let mut traces = TrialTraces {
            pos: EligibilityTrace::for_connection(self.connection(CONN_HIDDEN_POS), tau_e)?,
            neg: EligibilityTrace::for_connection(self.connection(CONN_HIDDEN_NEG), tau_e)?,
        };
        let stdp = self.cfg.stdp;
        let dt = self.cfg.dt_ms;
        let mut escalate = false;
        let (mut h_correct, mut h_incorrect, mut undecided) = (0u32, 0u32, 0u32);
        let (mut n_pos, mut n_neg) = (0u32, 0u32);
        let (mut sum_pos, mut sum_neg) = (0.0f64, 0.0f64);
        for rep in 0..reps {
            let sigma = if escalate { self.cfg.noise_sigma } else { 0.0 };
            let pres = self.present(train, sigma, rng)?;
            if plasticity {
                let conn = self.net.connection_mut(CONN_INPUT_HIDDEN).expect("built connection");
                apply_stdp(conn, &pres.input, &pres.hidden, &stdp, dt)?;
                let offset = (rep * self.run_len(train.horizon())) as f64 * dt;
                accumulate_eligibility(
                    &mut traces.pos,
                    self.connection(CONN_HIDDEN_POS),
                    &pres.hidden,
                    &pres.pos,
                    &stdp,
                    dt,
                    offset,
                )?;
                accumulate_eligibility(
                    &mut traces.neg,
                    self.connection(CONN_HIDDEN_NEG),
                    &pres.hidden,
                    &pres.neg,
                    &stdp,
                    dt,
                    offset,
                )?;
            }
            sum_pos += pres.act_pos;
            sum_neg += pres.act_neg;
            let decision = decide(pres.act_pos, pres.act_neg, self.cfg.decision_threshold);
            match decision {
                Decision::Undecided => {
                    undecided += 1;
                    escalate = true;
                }
                Decision::Positive => {
                    n_pos += 1;
                    if label == Label::Positive {
                        h_correct += 1;
                    } else {
                        h_incorrect += 1;
                    }
                }
                Decision::Negative => {
                    n_neg += 1;
                    if label == Label::Negative {
                        h_correct += 1;
                    } else {
                        h_incorrect += 1;
                    }
                }
            }
        }
        let majority = match n_pos.cmp(&n_neg) {
            std::cmp::Ordering::Greater => Decision::Positive,
            std::cmp::Ordering::Less => Decision::Negative,
            std::cmp::Ordering::Equal => Decision::Undecided,
        };
        let report = ConfidenceReport {
            h_correct,
            h_incorrect,
            undecided,
            majority,
            confidence_fraction: h_correct as f64 / reps as f64,
        };
        Ok(TrialResult {
            report,
            traces,
            mean_act_pos: sum_pos / reps as f64,
            mean_act_neg: sum_neg / reps as f64,
        })
    }

    /// Multiply all feedforward weights into one column by `factor`,
    /// clamped into bounds.
    pub fn bias_weights(&mut self, group: Label, factor: f64) -> Result<()> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!("bias factor must be positive, got {factor}")));
        }
        let name = match group {
            Label::Positive => CONN_HIDDEN_POS,
            Label::Negative => CONN_HIDDEN_NEG,
        };
        self.connection_mut(name).scale_all(factor);
        Ok(())
    }

    /// Write the network to a directory: a JSON manifest (config and
    /// population sizes) plus one weight CSV and one metadata JSON per
    /// connection. Floats round-trip exactly.
    pub fn save_snapshot(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let manifest = SnapshotManifest {
            config: self.cfg.clone(),
            populations: self
                .net
                .populations()
                .iter()
                .map(|p| (p.name().to_string(), p.size()))
                .collect(),
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::InvalidInput(format!("manifest serialization failed: {e}")))?;
        std::fs::write(dir.join("manifest.json"), json)?;
        for conn in self.net.connections() {
            let mut csv = String::new();
            for i in 0..conn.pre_size() {
                for j in 0..conn.post_size() {
                    if j > 0 {
                        csv.push(',');
                    }
                    let _ = write!(csv, "{}", conn.weight(i, j));
                }
                csv.push('\n');
            }
            std::fs::write(dir.join(format!("{}.csv", conn.name())), csv)?;
            let meta = ConnectionMeta {
                pre: conn.pre().to_string(),
                post: conn.post().to_string(),
                sign: conn.sign(),
                mode: conn.mode(),
                w_min: conn.bounds().0,
                w_max: conn.bounds().1,
                gain: conn.gain(),
            };
            let json = serde_json::to_string_pretty(&meta)
                .map_err(|e| Error::InvalidInput(format!("meta serialization failed: {e}")))?;
            std::fs::write(dir.join(format!("{}.meta.json", conn.name())), json)?;
        }
        Ok(())
    }

    /// Rebuild a network from a snapshot directory; weights are restored
    /// bit-exactly and connection metadata is cross-checked.
    pub fn load_snapshot(dir: impl AsRef<Path>) -> Result<ColumnNet> {
        let dir = dir.as_ref();
        let manifest_text = std::fs::read_to_string(dir.join("manifest.json"))?;
        let manifest: SnapshotManifest = serde_json::from_str(&manifest_text)
            .map_err(|e| Error::parse_nl(format!("bad snapshot manifest: {e}")))?;
        let mut colnet = ColumnNet::build(manifest.config)?;
        for (name, size) in &manifest.populations {
            let pop = colnet
                .net
                .population(name)
                .ok_or_else(|| Error::parse_nl(format!("manifest names unknown population `{name}`")))?;
            if pop.size() != *size {
                return Err(Error::parse_nl(format!(
                    "population `{name}` size {} does not match manifest {size}",
                    pop.size()
                )));
            }
        }
        let names: Vec<String> = colnet
            .net
            .connections()
            .iter()
            .map(|c| c.name().to_string())
            .collect();
        for name in names {
            let meta_text = std::fs::read_to_string(dir.join(format!("{name}.meta.json")))?;
            let meta: ConnectionMeta = serde_json::from_str(&meta_text)
                .map_err(|e| Error::parse_nl(format!("bad metadata for `{name}`: {e}")))?;
            let csv = std::fs::read_to_string(dir.join(format!("{name}.csv")))?;
            let conn = colnet.connection_mut(&name);
            if meta.pre != conn.pre()
                || meta.post != conn.post()
                || meta.sign != conn.sign()
                || meta.mode != conn.mode()
                || meta.w_min != conn.bounds().0
                || meta.w_max != conn.bounds().1
                || meta.gain != conn.gain()
            {
                return Err(Error::parse_nl(format!(
                    "metadata for `{name}` does not match the configured topology"
                )));
            }
            let mut weights = Vec::with_capacity(conn.pre_size() * conn.post_size());
            for (row_idx, line) in csv.lines().enumerate() {
                for cell in line.split(',') {
                    let w: f64 = cell.trim().parse().map_err(|_| {
                        Error::parse(row_idx + 1, format!("bad weight `{cell}` in {name}.csv"))
                    })?;
                    weights.push(w);
                }
            }
            conn.set_weights(weights)?;
        }
        Ok(colnet)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotManifest {
    config: ColumnNetConfig,
    populations: Vec<(String, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConnectionMeta {
    pre: String,
    post: String,
    sign: Sign,
    mode: PlasticityMode,
    w_min: f64,
    w_max: f64,
    gain: f64,
}
