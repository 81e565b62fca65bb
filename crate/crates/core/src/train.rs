//! The repeat-presentation training protocol and the bundled experiments.
//!
//! One *trial* is ten presentations of the same encoded sample: the hidden
//! layer learns by STDP during every presentation, eligibility traces
//! accumulate on the output connections, and when the trial's tallies are
//! in, a reward signal converts the traces into output-weight changes.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::column::{
    ColumnNet, ColumnNetConfig, ConfidenceReport, Decision, CONN_HIDDEN_NEG, CONN_HIDDEN_POS,
};
use crate::corpus::{Corpus, Label, Sample};
use crate::encoders::{encode_tokens, Codebook, Dictionary, EncoderConfig, EncoderKind};
use crate::error::{Error, Result};
use crate::plasticity::{apply_rstdp, compute_reward_simple, compute_reward_weighted, TrialHistory};

/// Which reward formula converts trial tallies into a signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardScheme {
    Simple,
    Weighted,
}

impl std::str::FromStr for RewardScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(RewardScheme::Simple),
            "weighted" => Ok(RewardScheme::Weighted),
            other => Err(Error::InvalidInput(format!(
                "unknown reward scheme `{other}` (expected `simple` or `weighted`)"
            ))),
        }
    }
}

/// Full training-run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub scheme: RewardScheme,
    pub encoder: EncoderKind,
    /// Dictionary size cap.
    pub v_max: usize,
    /// Master switch; with plasticity off, training never touches weights.
    pub plasticity: bool,
    pub encoder_cfg: EncoderConfig,
    pub net: ColumnNetConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            scheme: RewardScheme::Weighted,
            encoder: EncoderKind::Codebook,
            v_max: 200,
            plasticity: true,
            encoder_cfg: EncoderConfig::default(),
            net: ColumnNetConfig::default(),
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.v_max == 0 {
            return Err(Error::Config("v_max must be at least 1".into()));
        }
        if self.net.repetitions > 10 {
            return Err(Error::Config(format!(
                "the reward formulas tally at most 10 presentations, got {}",
                self.net.repetitions
            )));
        }
        if self.encoder.needs_image() {
            return Err(Error::Config(
                "training runs on token sequences; pick a text encoder".into(),
            ));
        }
        self.encoder_cfg.validate()?;
        self.net.validate()?;
        Ok(())
    }

    pub fn signal_for(&self, history: &TrialHistory) -> crate::plasticity::RewardSignal {
        match self.scheme {
            RewardScheme::Simple => compute_reward_simple(history),
            RewardScheme::Weighted => compute_reward_weighted(history),
        }
    }
}

/// Dictionary and codebook derived from a corpus for one run.
#[derive(Debug, Clone)]
pub struct EncoderSetup {
    pub dict: Dictionary,
    pub codebook: Codebook,
}

impl EncoderSetup {
    pub fn from_corpus(corpus: &Corpus, cfg: &TrainConfig) -> Result<Self> {
        let dict = crate::corpus::build_dictionary(corpus, cfg.v_max)?;
        let codebook = Codebook::build(&dict, &cfg.encoder_cfg)?;
        Ok(EncoderSetup { dict, codebook })
    }

    pub fn input_size(&self, cfg: &TrainConfig) -> usize {
        cfg.encoder.input_size(&self.dict, &cfg.encoder_cfg)
    }
}

/// Build the classifier sized for this corpus and encoder.
pub fn build_network(corpus: &Corpus, cfg: &TrainConfig) -> Result<(ColumnNet, EncoderSetup)> {
    cfg.validate()?;
    let setup = EncoderSetup::from_corpus(corpus, cfg)?;
    let mut net_cfg = cfg.net.clone();
    net_cfg.n_input = setup.input_size(cfg);
    let net = ColumnNet::build(net_cfg)?;
    Ok((net, setup))
}

/// What one trial produced, from the caller's side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOutcome {
    pub report: ConfidenceReport,
    /// Mean activity of the column matching the sample's label.
    pub act_label: f64,
    /// Mean activity of the competing column.
    pub act_other: f64,
}

/// Encode one sample, run a trial, and convert the tallies into a reward
/// applied to the two output connections. Traces reset afterwards.
pub fn train_sample<R: Rng>(
    net: &mut ColumnNet,
    sample: &Sample,
    setup: &EncoderSetup,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<SampleOutcome> {
    let tokens = sample.tokens();
    let train = encode_tokens(
        cfg.encoder,
        &tokens,
        &setup.dict,
        &setup.codebook,
        &cfg.encoder_cfg,
        rng,
    )?;
    let mut trial = net.repeated_presentation(&train, sample.label, cfg.plasticity, rng)?;
    if cfg.plasticity {
        let history = TrialHistory::new(trial.report.h_correct, trial.report.h_incorrect)?;
        let signal = cfg.signal_for(&history);
        let (correct_name, wrong_name) = match sample.label {
            Label::Positive => (CONN_HIDDEN_POS, CONN_HIDDEN_NEG),
            Label::Negative => (CONN_HIDDEN_NEG, CONN_HIDDEN_POS),
        };
        let (correct_conn, wrong_conn) = net
            .network_mut()
            .connection_pair_mut(correct_name, wrong_name)
            .expect("output connections exist");
        let (correct_trace, wrong_trace) = match sample.label {
            Label::Positive => (&mut trial.traces.pos, &mut trial.traces.neg),
            Label::Negative => (&mut trial.traces.neg, &mut trial.traces.pos),
        };
        apply_rstdp(correct_conn, wrong_conn, correct_trace, wrong_trace, &signal)?;
    }
    let (act_label, act_other) = match sample.label {
        Label::Positive => (trial.mean_act_pos, trial.mean_act_neg),
        Label::Negative => (trial.mean_act_neg, trial.mean_act_pos),
    };
    Ok(SampleOutcome {
        report: trial.report,
        act_label,
        act_other,
    })
}

/// Per-epoch tallies over a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Majority decision per sample, in corpus order.
    pub decisions: Vec<Decision>,
    pub correct: usize,
    pub incorrect: usize,
    pub undecided: usize,
    pub accuracy: f64,
}

impl EpochMetrics {
    fn from_decisions(epoch: usize, decisions: Vec<Decision>, labels: &[Label]) -> Self {
        let mut correct = 0;
        let mut incorrect = 0;
        let mut undecided = 0;
        for (d, &l) in decisions.iter().zip(labels) {
            match d {
                Decision::Undecided => undecided += 1,
                _ if d.matches(l) => correct += 1,
                _ => incorrect += 1,
            }
        }
        let total = decisions.len().max(1);
        EpochMetrics {
            epoch,
            decisions,
            correct,
            incorrect,
            undecided,
            accuracy: correct as f64 / total as f64,
        }
    }
}

/// Train over the corpus for `cfg.epochs` epochs, shuffling the sample
/// order each epoch under the run seed.
pub fn train_epochs<R: Rng>(
    net: &mut ColumnNet,
    corpus: &Corpus,
    setup: &EncoderSetup,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Vec<EpochMetrics>> {
    cfg.validate()?;
    corpus.check_trainable()?;
    let labels: Vec<Label> = corpus.samples.iter().map(|s| s.label).collect();
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut metrics = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(rng);
        let mut decisions = vec![Decision::Undecided; corpus.len()];
        for &idx in &order {
            let outcome = train_sample(net, &corpus.samples[idx], setup, cfg, rng)?;
            decisions[idx] = outcome.report.majority;
        }
        metrics.push(EpochMetrics::from_decisions(epoch, decisions, &labels));
    }
    Ok(metrics)
}

/// Frozen-weights evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub correct: usize,
    pub incorrect: usize,
    pub undecided: usize,
    /// (correct, total) per label.
    pub positive: (usize, usize),
    pub negative: (usize, usize),
    pub decisions: Vec<Decision>,
}

/// Judge every sample by repeated-presentation majority with plasticity
/// off; weights are untouched.
pub fn evaluate<R: Rng>(
    net: &mut ColumnNet,
    corpus: &Corpus,
    setup: &EncoderSetup,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Evaluation> {
    let mut decisions = Vec::with_capacity(corpus.len());
    let (mut correct, mut incorrect, mut undecided) = (0, 0, 0);
    let mut per_label = [(0usize, 0usize); 2];
    for sample in &corpus.samples {
        let tokens = sample.tokens();
        let train = encode_tokens(
            cfg.encoder,
            &tokens,
            &setup.dict,
            &setup.codebook,
            &cfg.encoder_cfg,
            rng,
        )?;
        let trial = net.repeated_presentation(&train, sample.label, false, rng)?;
        let majority = trial.report.majority;
        let slot = match sample.label {
            Label::Positive => &mut per_label[0],
            Label::Negative => &mut per_label[1],
        };
        slot.1 += 1;
        match majority {
            Decision::Undecided => undecided += 1,
            d if d.matches(sample.label) => {
                correct += 1;
                slot.0 += 1;
            }
            _ => incorrect += 1,
        }
        decisions.push(majority);
    }
    let total = corpus.len().max(1);
    Ok(Evaluation {
        accuracy: correct as f64 / total as f64,
        correct,
        incorrect,
        undecided,
        positive: per_label[0],
        negative: per_label[1],
        decisions,
    })
}

/// The three bundled experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// One biased network, one new negative input, train until the
    /// decision flips.
    Single,
    /// Two positive and two negative inputs, train to 4/4 correct.
    Four,
    /// Five of each, fixed epoch budget, watch the correct-count trend.
    Ten,
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(ExperimentKind::Single),
            "four" => Ok(ExperimentKind::Four),
            "ten" => Ok(ExperimentKind::Ten),
            other => Err(Error::InvalidInput(format!(
                "unknown experiment `{other}` (expected single, four, or ten)"
            ))),
        }
    }
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Single => "single",
            ExperimentKind::Four => "four",
            ExperimentKind::Ten => "ten",
        }
    }
}

/// One row of the per-round activity trace: the activity of the column
/// that *should* win (group 1) against its competitor (group 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: usize,
    pub act_group1: f64,
    pub act_group2: f64,
    pub decision: Decision,
}

/// Weight bias applied to the positive column before the single-input
/// experiment, reproducing a network pre-trained on positive samples.
pub const SINGLE_BIAS_FACTOR: f64 = 5.0;

/// Round cap for the single-input experiment.
pub const SINGLE_ROUND_CAP: usize = 200;

/// Epoch cap for the four-input experiment.
pub const FOUR_EPOCH_CAP: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub trace: Vec<RoundTrace>,
    pub metrics: Vec<EpochMetrics>,
    /// Single: round at which the decision first flipped to the true label.
    pub flipped_at: Option<usize>,
    /// Four: epoch at which all four inputs were classified correctly.
    pub criterion_epoch: Option<usize>,
    /// Ten: last-quintile mean correct count exceeds the first-quintile mean.
    pub trend_increasing: Option<bool>,
    /// Ten: mean accuracy over the final quintile of epochs.
    pub final_accuracy: Option<f64>,
}

fn experiment_corpus(kind: ExperimentKind) -> Corpus {
    let bundled = Corpus::bundled();
    let take = |label: Label, n: usize| -> Vec<Sample> {
        bundled
            .samples
            .iter()
            .filter(|s| s.label == label)
            .take(n)
            .cloned()
            .collect()
    };
    let samples = match kind {
        ExperimentKind::Single => take(Label::Negative, 1),
        ExperimentKind::Four => {
            let mut v = take(Label::Positive, 2);
            v.extend(take(Label::Negative, 2));
            v
        }
        ExperimentKind::Ten => bundled.samples.clone(),
    };
    Corpus::new(format!("experiment-{}", kind.name()), samples)
}

/// Run one bundled experiment end to end on the reference sentences.
///
/// The dictionary and codebook are always built from all ten reference
/// sentences so codes are stable across experiment kinds.
pub fn experiment<R: Rng>(kind: ExperimentKind, cfg: &TrainConfig, rng: &mut R) -> Result<ExperimentReport> {
    cfg.validate()?;
    let reference = Corpus::bundled();
    let setup = EncoderSetup::from_corpus(&reference, cfg)?;
    let mut net_cfg = cfg.net.clone();
    net_cfg.n_input = setup.input_size(cfg);
    let mut net = ColumnNet::build(net_cfg)?;
    let corpus = experiment_corpus(kind);

    let mut report = ExperimentReport {
        kind,
        seed: cfg.seed,
        trace: Vec::new(),
        metrics: Vec::new(),
        flipped_at: None,
        criterion_epoch: None,
        trend_increasing: None,
        final_accuracy: None,
    };

    match kind {
        ExperimentKind::Single => {
            net.bias_weights(Label::Positive, SINGLE_BIAS_FACTOR)?;
            let sample = &corpus.samples[0];
            for round in 1..=SINGLE_ROUND_CAP {
                let outcome = train_sample(&mut net, sample, &setup, cfg, rng)?;
                report.trace.push(RoundTrace {
                    round,
                    act_group1: outcome.act_label,
                    act_group2: outcome.act_other,
                    decision: outcome.report.majority,
                });
                if outcome.report.majority == Decision::Negative {
                    report.flipped_at = Some(round);
                    break;
                }
            }
        }
        ExperimentKind::Four => {
            let labels: Vec<Label> = corpus.samples.iter().map(|s| s.label).collect();
            let mut order: Vec<usize> = (0..corpus.len()).collect();
            let mut round = 0usize;
            for epoch in 0..FOUR_EPOCH_CAP {
                order.shuffle(rng);
                let mut decisions = vec![Decision::Undecided; corpus.len()];
                for &idx in &order {
                    round += 1;
                    let outcome = train_sample(&mut net, &corpus.samples[idx], &setup, cfg, rng)?;
                    decisions[idx] = outcome.report.majority;
                    report.trace.push(RoundTrace {
                        round,
                        act_group1: outcome.act_label,
                        act_group2: outcome.act_other,
                        decision: outcome.report.majority,
                    });
                }
                let m = EpochMetrics::from_decisions(epoch, decisions, &labels);
                let done = m.correct == corpus.len();
                report.metrics.push(m);
                if done {
                    report.criterion_epoch = Some(epoch + 1);
                    break;
                }
            }
        }
        ExperimentKind::Ten => {
            let labels: Vec<Label> = corpus.samples.iter().map(|s| s.label).collect();
            let mut order: Vec<usize> = (0..corpus.len()).collect();
            for epoch in 0..cfg.epochs {
                order.shuffle(rng);
                let mut decisions = vec![Decision::Undecided; corpus.len()];
                let (mut sum1, mut sum2) = (0.0, 0.0);
                for &idx in &order {
                    let outcome = train_sample(&mut net, &corpus.samples[idx], &setup, cfg, rng)?;
                    decisions[idx] = outcome.report.majority;
                    sum1 += outcome.act_label;
                    sum2 += outcome.act_other;
                }
                let m = EpochMetrics::from_decisions(epoch, decisions, &labels);
                let n = corpus.len() as f64;
                report.trace.push(RoundTrace {
                    round: epoch + 1,
                    act_group1: sum1 / n,
                    act_group2: sum2 / n,
                    decision: epoch_modal_decision(&m),
                });
                report.metrics.push(m);
            }
            let quintile = (cfg.epochs / 5).max(1);
            let correct: Vec<f64> = report.metrics.iter().map(|m| m.correct as f64).collect();
            let first: f64 = correct[..quintile].iter().sum::<f64>() / quintile as f64;
            let last: f64 =
                correct[correct.len() - quintile..].iter().sum::<f64>() / quintile as f64;
            report.trend_increasing = Some(last > first);
            let final_acc: f64 = report.metrics[report.metrics.len() - quintile..]
                .iter()
                .map(|m| m.accuracy)
                .sum::<f64>()
                / quintile as f64;
            report.final_accuracy = Some(final_acc);
        }
    }
    Ok(report)
}

/// Most common per-sample majority in an epoch; ties go to Undecided.
fn epoch_modal_decision(m: &EpochMetrics) -> Decision {
    let pos = m.decisions.iter().filter(|d| **d == Decision::Positive).count();
    let neg = m.decisions.iter().filter(|d| **d == Decision::Negative).count();
    match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => Decision::Positive,
        std::cmp::Ordering::Less => Decision::Negative,
        std::cmp::Ordering::Equal => Decision::Undecided,
    }
}

/// Metrics CSV: `epoch,correct,incorrect,undecided,accuracy`.
pub fn metrics_to_csv(metrics: &[EpochMetrics]) -> String {
    let mut out = String::from("epoch,correct,incorrect,undecided,accuracy\n");
    for m in metrics {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            m.epoch, m.correct, m.incorrect, m.undecided, m.accuracy
        );
    }
    out
}

/// Activity-trace CSV: `round,act_group1,act_group2,decision`.
pub fn trace_to_csv(trace: &[RoundTrace]) -> String {
    let mut out = String::from("round,act_group1,act_group2,decision\n");
    for t in trace {
        let _ = writeln!(out, "{},{},{},{}", t.round, t.act_group1, t.act_group2, t.decision);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::column::CONN_HIDDEN_LATERAL;
    use crate::neuron::NeuronParams;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Small config so unit tests stay fast; experiment-grade defaults are
    /// exercised in the integration suites.
    fn small_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 2,
            encoder_cfg: EncoderConfig {
                window: 20,
                n_word_neurons: 40,
                n_pos_neurons: 20,
                max_positions: 16,
                ..EncoderConfig::default()
            },
            net: ColumnNetConfig {
                n_hidden: 30,
                n_column: 8,
                ..ColumnNetConfig::default()
            },
            ..TrainConfig::default()
        }
    }

    fn two_sample_corpus() -> Corpus {
        Corpus::new(
            "t",
            vec![
                Sample::new("Great film, wonderful acting!", Label::Positive).unwrap(),
                Sample::new("Boring plot, terrible pacing.", Label::Negative).unwrap(),
            ],
        )
    }

    #[test]
    fn zero_epochs_rejected() {
        let cfg = TrainConfig {
            epochs: 0,
            ..small_cfg()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn corpus_without_both_labels_rejected() {
        let cfg = small_cfg();
        let corpus = Corpus::new(
            "t",
            vec![Sample::new("Nice one.", Label::Positive).unwrap()],
        );
        let (mut net, setup) = build_network(&corpus, &cfg).unwrap();
        assert!(train_epochs(&mut net, &corpus, &setup, &cfg, &mut rng(0)).is_err());
    }

    #[test]
    fn metrics_list_length_equals_epochs() {
        let cfg = TrainConfig {
            epochs: 3,
            ..small_cfg()
        };
        let corpus = two_sample_corpus();
        let (mut net, setup) = build_network(&corpus, &cfg).unwrap();
        let metrics = train_epochs(&mut net, &corpus, &setup, &cfg, &mut rng(1)).unwrap();
        assert_eq!(metrics.len(), 3);
        for m in &metrics {
            assert_eq!(m.correct + m.incorrect + m.undecided, corpus.len());
            assert_eq!(m.accuracy, m.correct as f64 / corpus.len() as f64);
        }
    }

    #[test]
    fn training_is_deterministic_under_seed() {
        let cfg = small_cfg();
        let corpus = two_sample_corpus();
        let run = || {
            let (mut net, setup) = build_network(&corpus, &cfg).unwrap();
            train_epochs(&mut net, &corpus, &setup, &cfg, &mut rng(cfg.seed)).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn plasticity_off_changes_no_weights() {
        let cfg = TrainConfig {
            plasticity: false,
            ..small_cfg()
        };
        let corpus = two_sample_corpus();
        let (mut net, setup) = build_network(&corpus, &cfg).unwrap();
        let before: Vec<Vec<f64>> = net
            .network()
            .connections()
            .iter()
            .map(|c| c.weights().to_vec())
            .collect();
        train_epochs(&mut net, &corpus, &setup, &cfg, &mut rng(2)).unwrap();
        for (conn, old) in net.network().connections().iter().zip(&before) {
            assert_eq!(conn.weights(), &old[..], "{} changed", conn.name());
        }
    }

    #[test]
    fn evaluation_is_frozen_and_repeatable() {
        let cfg = small_cfg();
        let corpus = two_sample_corpus();
        let (mut net, setup) = build_network(&corpus, &cfg).unwrap();
        let before: Vec<Vec<f64>> = net
            .network()
            .connections()
            .iter()
            .map(|c| c.weights().to_vec())
            .collect();
        let a = evaluate(&mut net, &corpus, &setup, &cfg, &mut rng(7)).unwrap();
        let b = evaluate(&mut net, &corpus, &setup, &cfg, &mut rng(7)).unwrap();
        assert_eq!(a, b);
        for (conn, old) in net.network().connections().iter().zip(&before) {
            assert_eq!(conn.weights(), &old[..], "{} changed", conn.name());
        }
        assert_eq!(a.positive.1 + a.negative.1, corpus.len());
    }

    #[test]
    fn fixed_connections_never_move_during_training() {
        let cfg = small_cfg();
        let corpus = two_sample_corpus();
        let (mut net, setup) = build_network(&corpus, &cfg).unwrap();
        let lateral = net.connection(CONN_HIDDEN_LATERAL).weights().to_vec();
        train_epochs(&mut net, &corpus, &setup, &cfg, &mut rng(3)).unwrap();
        assert_eq!(net.connection(CONN_HIDDEN_LATERAL).weights(), &lateral[..]);
    }

    #[test]
    fn trials_touch_output_weights_only_through_reward() {
        // repeated_presentation accumulates traces but must not move the
        // output weights; only the reward application may.
        let cfg = small_cfg();
        let corpus = two_sample_corpus();
        let (mut net, setup) = build_network(&corpus, &cfg).unwrap();
        let tokens = corpus.samples[0].tokens();
        let train = encode_tokens(
            cfg.encoder,
            &tokens,
            &setup.dict,
            &setup.codebook,
            &cfg.encoder_cfg,
            &mut rng(0),
        )
        .unwrap();
        let pos_before = net.connection(CONN_HIDDEN_POS).weights().to_vec();
        let neg_before = net.connection(CONN_HIDDEN_NEG).weights().to_vec();
        net.repeated_presentation(&train, Label::Positive, true, &mut rng(1))
            .unwrap();
        assert_eq!(net.connection(CONN_HIDDEN_POS).weights(), &pos_before[..]);
        assert_eq!(net.connection(CONN_HIDDEN_NEG).weights(), &neg_before[..]);
    }

    #[test]
    fn perfect_hand_set_weights_classify_two_disjoint_samples() {
        // Hand-build the separating solution: one hidden neuron per class
        // wired to that class's input code and its own column.
        let mut cfg = small_cfg();
        cfg.net.noise_sigma = 0.0;
        cfg.net.neuron = NeuronParams {
            i_background: 0.0,
            ..NeuronParams::default()
        };
        // Strong gains so a single dedicated hidden neuron can relay a
        // word code to its column: 4 code neurons x 25 = 100 > 60 needed
        // to fire from rest, and 150 per hidden spike fires the column.
        cfg.net.input_hidden_gain = 25.0;
        cfg.net.hidden_column_gain = 150.0;
        let corpus = two_sample_corpus();
        let (mut net, setup) = build_network(&corpus, &cfg).unwrap();
        for name in [CONN_HIDDEN_POS, CONN_HIDDEN_NEG] {
            net.connection_mut(name).scale_all(0.0);
        }
        net.connection_mut(crate::column::CONN_INPUT_HIDDEN).scale_all(0.0);
        // Wire each sample's word-code neurons (positions are shared
        // between sentences, so they stay unwired) onto one dedicated
        // hidden neuron, and that neuron onto the matching column.
        let n_word = cfg.encoder_cfg.n_word_neurons;
        for (hidden_idx, sample) in corpus.samples.iter().enumerate() {
            let tokens = sample.tokens();
            let train = encode_tokens(
                cfg.encoder,
                &tokens,
                &setup.dict,
                &setup.codebook,
                &cfg.encoder_cfg,
                &mut rng(0),
            )
            .unwrap();
            let conn = net.connection_mut(crate::column::CONN_INPUT_HIDDEN);
            for ev in train.events().iter().filter(|e| e.neuron < n_word) {
                conn.nudge(ev.neuron, hidden_idx, 1.0);
            }
            let col = match sample.label {
                Label::Positive => CONN_HIDDEN_POS,
                Label::Negative => CONN_HIDDEN_NEG,
            };
            let conn = net.connection_mut(col);
            for j in 0..conn.post_size() {
                conn.nudge(hidden_idx, j, 1.0);
            }
        }
        let eval_cfg = TrainConfig {
            plasticity: false,
            ..cfg.clone()
        };
        let eval = evaluate(&mut net, &corpus, &setup, &eval_cfg, &mut rng(5)).unwrap();
        assert_eq!(eval.accuracy, 1.0, "{eval:?}");
    }

    #[test]
    fn undecided_everywhere_when_codes_cannot_drive_columns() {
        let mut cfg = small_cfg();
        cfg.net.noise_sigma = 0.0;
        let corpus = two_sample_corpus();
        let (mut net, setup) = build_network(&corpus, &cfg).unwrap();
        net.connection_mut(CONN_HIDDEN_POS).scale_all(0.0);
        net.connection_mut(CONN_HIDDEN_NEG).scale_all(0.0);
        let eval = evaluate(&mut net, &corpus, &setup, &cfg, &mut rng(6)).unwrap();
        assert_eq!(eval.undecided, corpus.len());
        assert_eq!(eval.accuracy, 0.0);
    }

    #[test]
    fn csv_emitters_have_stable_headers() {
        let metrics = vec![EpochMetrics {
            epoch: 0,
            decisions: vec![Decision::Positive],
            correct: 1,
            incorrect: 0,
            undecided: 0,
            accuracy: 1.0,
        }];
        let csv = metrics_to_csv(&metrics);
        assert!(csv.starts_with("epoch,correct,incorrect,undecided,accuracy\n"));
        assert!(csv.contains("0,1,0,0,1"));
        let trace = vec![RoundTrace {
            round: 1,
            act_group1: 0.25,
            act_group2: 0.1,
            decision: Decision::Negative,
        }];
        let csv = trace_to_csv(&trace);
        assert!(csv.starts_with("round,act_group1,act_group2,decision\n"));
        assert!(csv.contains("1,0.25,0.1,negative"));
    }

    #[test]
    fn experiment_corpora_have_expected_shapes() {
        assert_eq!(experiment_corpus(ExperimentKind::Single).len(), 1);
        let four = experiment_corpus(ExperimentKind::Four);
        assert_eq!(four.len(), 4);
        assert_eq!(four.count(Label::Positive), 2);
        let ten = experiment_corpus(ExperimentKind::Ten);
        assert_eq!(ten.len(), 10);
        assert_eq!(ten.count(Label::Negative), 5);
    }
}
