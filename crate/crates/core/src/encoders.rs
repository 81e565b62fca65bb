//! Spike-train encoders: six ways to turn images and token sequences into
//! input spikes, plus the sequential concatenation used for ordered items.
//!
//! All encoders are deterministic functions of `(input, config, seed)`.
//! Wherever a fractional time step or neuron index is produced, it is
//! rounded half-away-from-zero (`f64::round`) so outputs match across
//! implementations.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spike::{SpikeEvent, SpikeTrain};

/// Word -> neuron-index map over the most frequent tokens of a corpus.
/// Indices are dense: exactly `0..len()`. Unknown words look up to `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Dictionary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Dictionary {
    /// Build from an ordered word list; position in the list is the index.
    pub fn new(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate dictionary word `{w}`")));
            }
        }
        Ok(Dictionary { words, index })
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, index: usize) -> Option<&str> {
        self.words.get(index).map(|s| s.as_str())
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl From<Vec<String>> for Dictionary {
    fn from(words: Vec<String>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Dictionary { words, index }
    }
}

impl From<Dictionary> for Vec<String> {
    fn from(d: Dictionary) -> Self {
        d.words
    }
}

/// Shared knobs for the token encoders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Steps per presented item.
    pub window: usize,
    /// Neuron space for word codes.
    pub n_word_neurons: usize,
    /// Neuron space for position codes / position neurons.
    pub n_pos_neurons: usize,
    /// Number of position codes a codebook carries (token capacity).
    pub max_positions: usize,
    /// Expected spikes per neuron per step for the Poisson encoder.
    pub poisson_rate: f64,
    /// Fraction of a neuron space participating in one code.
    pub sparsity: f64,
    /// Spread of the Gaussian position encoder, in position-neuron units.
    pub gaussian_sigma: f64,
    pub seed: u64,
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("encoder window must be at least 1 step".into()));
        }
        if self.n_word_neurons == 0 || self.n_pos_neurons == 0 {
            return Err(Error::Config("encoder neuron spaces must be nonzero".into()));
        }
        if self.max_positions == 0 {
            return Err(Error::Config("max_positions must be at least 1".into()));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::Config(format!(
                "sparsity must lie in (0, 1], got {}",
                self.sparsity
            )));
        }
        if !(self.poisson_rate >= 0.0) {
            return Err(Error::Config(format!(
                "poisson_rate must be non-negative, got {}",
                self.poisson_rate
            )));
        }
        if !(self.gaussian_sigma > 0.0) {
            return Err(Error::Config(format!(
                "gaussian_sigma must be positive, got {}",
                self.gaussian_sigma
            )));
        }
        Ok(())
    }
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            window: 50,
            n_word_neurons: 100,
            n_pos_neurons: 50,
            max_positions: 25,
            poisson_rate: 0.1,
            sparsity: 0.10,
            gaussian_sigma: 3.0,
            seed: 0,
        }
    }
}

/// Number of neurons in one code: `ceil(sparsity * n)`, with a guard so a
/// product that is an integer up to float rounding (0.1 * 100 =
/// 10.000000000000002) is not bumped to the next integer.
pub fn code_size(sparsity: f64, n: usize) -> usize {
    let raw = sparsity * n as f64;
    let nearest = raw.round();
    if (raw - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        raw.ceil() as usize
    }
}

/// Fixed random neuron subsets per word and per position, sampled without
/// replacement under the config seed. Codes are immutable once built:
/// the same word always fires the same subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    word_codes: Vec<Vec<usize>>,
    pos_codes: Vec<Vec<usize>>,
    n_word_neurons: usize,
    n_pos_neurons: usize,
}

impl Codebook {
    pub fn build(dict: &Dictionary, cfg: &EncoderConfig) -> Result<Self> {
        cfg.validate()?;
        let k_word = code_size(cfg.sparsity, cfg.n_word_neurons);
        let k_pos = code_size(cfg.sparsity, cfg.n_pos_neurons);
        if k_word > cfg.n_word_neurons || k_pos > cfg.n_pos_neurons {
            return Err(Error::Config("code size exceeds neuron space".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let sample_sorted = |n: usize, k: usize, rng: &mut ChaCha8Rng| {
            let mut picks = rand::seq::index::sample(rng, n, k).into_vec();
            picks.sort_unstable();
            picks
        };
        let word_codes = (0..dict.len())
            .map(|_| sample_sorted(cfg.n_word_neurons, k_word, &mut rng))
            .collect();
        let pos_codes = (0..cfg.max_positions)
            .map(|_| sample_sorted(cfg.n_pos_neurons, k_pos, &mut rng))
            .collect();
        Ok(Codebook {
            word_codes,
            pos_codes,
            n_word_neurons: cfg.n_word_neurons,
            n_pos_neurons: cfg.n_pos_neurons,
        })
    }

    pub fn word_code(&self, word_index: usize) -> Option<&[usize]> {
        self.word_codes.get(word_index).map(|v| v.as_slice())
    }

    pub fn pos_code(&self, position: usize) -> Option<&[usize]> {
        self.pos_codes.get(position).map(|v| v.as_slice())
    }

    pub fn n_word_neurons(&self) -> usize {
        self.n_word_neurons
    }

    pub fn n_pos_neurons(&self) -> usize {
        self.n_pos_neurons
    }

    pub fn max_positions(&self) -> usize {
        self.pos_codes.len()
    }
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayscaleImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayscaleImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(GrayscaleImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }
}

/// Relative position of token `i` in a sequence of length `len`, in
/// `[0, 1]`; a single-token sequence sits at position 0.
fn relative_position(i: usize, len: usize) -> f64 {
    i as f64 / len.saturating_sub(1).max(1) as f64
}

/// Time-to-first-spike: one neuron per pixel, firing once at
/// `round(window * pixel / 255)`; with `invert`, bright pixels fire early
/// instead of late. Horizon is `window + 1` so the endpoint step exists.
pub fn ttfs_encode(image: &GrayscaleImage, window: usize, invert: bool) -> Result<SpikeTrain> {
    if window == 0 {
        return Err(Error::Config("encoder window must be at least 1 step".into()));
    }
    let events = image
        .pixels()
        .iter()
        .enumerate()
        .map(|(n, &p)| {
            let frac = p as f64 / 255.0;
            let frac = if invert { 1.0 - frac } else { frac };
            SpikeEvent::new(n, (window as f64 * frac).round() as usize)
        })
        .collect();
    SpikeTrain::new("input", image.pixels().len(), window + 1, events)
}

fn known_word_indices(tokens: &[String], dict: &Dictionary) -> BTreeSet<usize> {
    tokens.iter().filter_map(|t| dict.get(t)).collect()
}

/// Poisson-style rate coding: every dictionary word present in the input
/// drives its neuron as an independent Bernoulli-per-step process with
/// probability `min(rate, 1)`; absent words stay silent.
pub fn poisson_encode<R: Rng>(
    tokens: &[String],
    dict: &Dictionary,
    cfg: &EncoderConfig,
    rng: &mut R,
) -> Result<SpikeTrain> {
    cfg.validate()?;
    let p = cfg.poisson_rate.min(1.0);
    let mut events = Vec::new();
    for &neuron in known_word_indices(tokens, dict).iter() {
        for step in 0..cfg.window {
            if p > 0.0 && rng.random::<f64>() < p {
                events.push(SpikeEvent::new(neuron, step));
            }
        }
    }
    SpikeTrain::new("input", dict.len(), cfg.window, events)
}

/// One neuron per dictionary word, firing once at the token's relative
/// position stretched over the window. Deterministic.
pub fn position_fixed_encode(
    tokens: &[String],
    dict: &Dictionary,
    cfg: &EncoderConfig,
) -> Result<SpikeTrain> {
    cfg.validate()?;
    let len = tokens.len();
    let mut events = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if let Some(w) = dict.get(token) {
            let step = (cfg.window as f64 * relative_position(i, len)).round() as usize;
            events.push(SpikeEvent::new(w, step));
        }
    }
    SpikeTrain::new("input", dict.len(), cfg.window + 1, events)
}

/// Separate word and position neurons: token `i` holding dictionary word
/// `w` fires word-neuron `w` and position-neuron `V + i` simultaneously at
/// the slot `round(i * window / n_pos_neurons)`.
pub fn pos_word_encode(
    tokens: &[String],
    dict: &Dictionary,
    cfg: &EncoderConfig,
) -> Result<SpikeTrain> {
    cfg.validate()?;
    if tokens.len() > cfg.n_pos_neurons {
        return Err(Error::Capacity(format!(
            "{} tokens exceed {} position neurons",
            tokens.len(),
            cfg.n_pos_neurons
        )));
    }
    let v = dict.len();
    let mut events = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if let Some(w) = dict.get(token) {
            let step = (i as f64 * cfg.window as f64 / cfg.n_pos_neurons as f64).round() as usize;
            events.push(SpikeEvent::new(w, step));
            events.push(SpikeEvent::new(v + i, step));
        }
    }
    SpikeTrain::new("input", v + cfg.n_pos_neurons, cfg.window, events)
}

/// Token slot for the codebook encoders: relative position stretched over
/// the window, so every sentence spans the full presentation.
fn codebook_slot(i: usize, len: usize, window: usize) -> usize {
    (window as f64 * relative_position(i, len)).round() as usize
}

/// Codebook encoding: token `i` holding word `w` fires the union of `w`'s
/// word code and position `i`'s position code at its slot. Identical words
/// fire identical word codes everywhere.
pub fn codebook_encode(
    tokens: &[String],
    dict: &Dictionary,
    codebook: &Codebook,
    cfg: &EncoderConfig,
) -> Result<SpikeTrain> {
    cfg.validate()?;
    let n_word = codebook.n_word_neurons();
    let mut events = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        let Some(w) = dict.get(token) else { continue };
        let word_code = codebook
            .word_code(w)
            .ok_or_else(|| Error::Capacity(format!("no word code for index {w}")))?;
        let pos_code = codebook
            .pos_code(i)
            .ok_or_else(|| Error::Capacity(format!("no position code for position {i}")))?;
        let slot = codebook_slot(i, tokens.len(), cfg.window);
        for &n in word_code {
            events.push(SpikeEvent::new(n, slot));
        }
        for &n in pos_code {
            events.push(SpikeEvent::new(n_word + n, slot));
        }
    }
    SpikeTrain::new(
        "input",
        n_word + codebook.n_pos_neurons(),
        cfg.window + 1,
        events,
    )
}

/// Codebook word codes plus Gaussian position sampling: the position part
/// draws `ceil(sparsity * n_pos_neurons)` samples from a normal centered
/// on the token's relative position (scaled into the position space),
/// rounds, clamps, and deduplicates them.
pub fn gaussian_pos_word_encode<R: Rng>(
    tokens: &[String],
    dict: &Dictionary,
    codebook: &Codebook,
    cfg: &EncoderConfig,
    rng: &mut R,
) -> Result<SpikeTrain> {
    cfg.validate()?;
    let n_word = codebook.n_word_neurons();
    let n_pos = codebook.n_pos_neurons();
    let k = code_size(cfg.sparsity, n_pos);
    let mut events = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        let Some(w) = dict.get(token) else { continue };
        let word_code = codebook
            .word_code(w)
            .ok_or_else(|| Error::Capacity(format!("no word code for index {w}")))?;
        let slot = codebook_slot(i, tokens.len(), cfg.window);
        for &n in word_code {
            events.push(SpikeEvent::new(n, slot));
        }
        let mu = relative_position(i, tokens.len()) * (n_pos - 1) as f64;
        let normal = Normal::new(mu, cfg.gaussian_sigma)
            .map_err(|e| Error::Config(format!("bad gaussian sigma: {e}")))?;
        let mut picked = BTreeSet::new();
        for _ in 0..k {
            let sample = normal.sample(rng).round();
            let neuron = sample.clamp(0.0, (n_pos - 1) as f64) as usize;
            picked.insert(neuron);
        }
        for &n in &picked {
            events.push(SpikeEvent::new(n_word + n, slot));
        }
    }
    SpikeTrain::new("input", n_word + n_pos, cfg.window + 1, events)
}

/// Concatenate item trains in order: item `j`'s events are offset by the
/// total horizon of the items before it. All items must share a neuron
/// space.
pub fn encode_sequence(items: &[SpikeTrain]) -> Result<SpikeTrain> {
    let first = items
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot concatenate zero items".into()))?;
    let neurons = first.neurons();
    let mut events = Vec::new();
    let mut offset = 0usize;
    for item in items {
        if item.neurons() != neurons {
            return Err(Error::Config(format!(
                "item neuron spaces differ: {} vs {}",
                item.neurons(),
                neurons
            )));
        }
        for ev in item.events() {
            events.push(SpikeEvent::new(ev.neuron, ev.step + offset));
        }
        offset += item.horizon();
    }
    SpikeTrain::new(first.population(), neurons, offset, events)
}

/// The encoder selected for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncoderKind {
    Ttfs,
    Poisson,
    PosFixed,
    PosWord,
    Codebook,
    GaussPosWord,
}

impl EncoderKind {
    pub const ALL: [EncoderKind; 6] = [
        EncoderKind::Ttfs,
        EncoderKind::Poisson,
        EncoderKind::PosFixed,
        EncoderKind::PosWord,
        EncoderKind::Codebook,
        EncoderKind::GaussPosWord,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EncoderKind::Ttfs => "ttfs",
            EncoderKind::Poisson => "poisson",
            EncoderKind::PosFixed => "pos-fixed",
            EncoderKind::PosWord => "pos-word",
            EncoderKind::Codebook => "codebook",
            EncoderKind::GaussPosWord => "gauss-pos-word",
        }
    }

    /// Neuron space this encoder emits into, given a dictionary and config.
    pub fn input_size(&self, dict: &Dictionary, cfg: &EncoderConfig) -> usize {
        match self {
            EncoderKind::Ttfs => 0,
            EncoderKind::Poisson | EncoderKind::PosFixed => dict.len(),
            EncoderKind::PosWord => dict.len() + cfg.n_pos_neurons,
            EncoderKind::Codebook | EncoderKind::GaussPosWord => {
                cfg.n_word_neurons + cfg.n_pos_neurons
            }
        }
    }

    pub fn needs_image(&self) -> bool {
        matches!(self, EncoderKind::Ttfs)
    }
}

impl std::fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EncoderKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = EncoderKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidInput(format!(
                    "unknown encoder `{s}`; valid encoders: {}",
                    names.join(", ")
                ))
            })
    }
}

/// Encode a token sequence with the selected text encoder.
pub fn encode_tokens<R: Rng>(
    kind: EncoderKind,
    tokens: &[String],
    dict: &Dictionary,
    codebook: &Codebook,
    cfg: &EncoderConfig,
    rng: &mut R,
) -> Result<SpikeTrain> {
    match kind {
        EncoderKind::Ttfs => Err(Error::InvalidInput(
            "ttfs encodes images, not token sequences".into(),
        )),
        EncoderKind::Poisson => poisson_encode(tokens, dict, cfg, rng),
        EncoderKind::PosFixed => position_fixed_encode(tokens, dict, cfg),
        EncoderKind::PosWord => pos_word_encode(tokens, dict, cfg),
        EncoderKind::Codebook => codebook_encode(tokens, dict, codebook, cfg),
        EncoderKind::GaussPosWord => gaussian_pos_word_encode(tokens, dict, codebook, cfg, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    fn dict(words: &[&str]) -> Dictionary {
        Dictionary::new(words.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn cfg() -> EncoderConfig {
        EncoderConfig {
            seed: 7,
            ..EncoderConfig::default()
        }
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn dictionary_lookup() {
        let d = dict(&["good", "bad"]);
        assert_eq!(d.get("good"), Some(0));
        assert_eq!(d.get("bad"), Some(1));
        assert_eq!(d.get("meh"), None);
        assert!(Dictionary::new(toks(&["a", "a"])).is_err());
    }

    #[test]
    fn ttfs_endpoints_and_midpoint() {
        let img = GrayscaleImage::new(3, 1, vec![0, 255, 128]).unwrap();
        let t = ttfs_encode(&img, 100, false).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.horizon(), 101);
        let step_of = |n: usize| t.events().iter().find(|e| e.neuron == n).unwrap().step;
        assert_eq!(step_of(0), 0);
        assert_eq!(step_of(1), 100);
        // 100 * 128 / 255 = 50.196 -> 50
        assert_eq!(step_of(2), 50);
    }

    #[test]
    fn ttfs_invert_swaps_endpoints() {
        let img = GrayscaleImage::new(2, 1, vec![0, 255]).unwrap();
        let t = ttfs_encode(&img, 100, true).unwrap();
        let step_of = |n: usize| t.events().iter().find(|e| e.neuron == n).unwrap().step;
        assert_eq!(step_of(0), 100);
        assert_eq!(step_of(1), 0);
    }

    #[test]
    fn ttfs_one_event_per_pixel() {
        let img = GrayscaleImage::new(4, 4, (0..16).map(|i| (i * 16) as u8).collect()).unwrap();
        let t = ttfs_encode(&img, 60, false).unwrap();
        assert_eq!(t.len(), 16);
    }

    #[test]
    fn image_rejects_wrong_pixel_count() {
        assert!(GrayscaleImage::new(2, 2, vec![0, 1, 2]).is_err());
    }

    #[test]
    fn poisson_rate_zero_is_silent() {
        let d = dict(&["a", "b"]);
        let c = EncoderConfig {
            poisson_rate: 0.0,
            ..cfg()
        };
        let t = poisson_encode(&toks(&["a"]), &d, &c, &mut rng(0)).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn poisson_absent_words_are_silent() {
        let d = dict(&["a", "b"]);
        let t = poisson_encode(&toks(&["a", "a"]), &d, &cfg(), &mut rng(3)).unwrap();
        assert!(t.events().iter().all(|e| e.neuron == 0));
        assert!(!t.is_empty());
    }

    #[test]
    fn poisson_empirical_rate_near_configured() {
        // rate 0.1 over a 100-step window: 10 expected spikes per replicate.
        let d = dict(&["a"]);
        let c = EncoderConfig {
            window: 100,
            poisson_rate: 0.1,
            ..cfg()
        };
        let mut total = 0usize;
        for seed in 0..1000u64 {
            total += poisson_encode(&toks(&["a"]), &d, &c, &mut rng(seed)).unwrap().len();
        }
        let mean = total as f64 / 1000.0;
        assert!((9.0..=11.0).contains(&mean), "mean {mean}");
    }

    #[test]
    fn position_fixed_endpoints() {
        let d = dict(&["a", "b", "c", "d", "e"]);
        let c = EncoderConfig {
            window: 100,
            ..cfg()
        };
        // Single token sits at step 0.
        let t = position_fixed_encode(&toks(&["a"]), &d, &c).unwrap();
        assert_eq!(t.events()[0].step, 0);
        // Last token of any sentence sits at the window endpoint.
        let t = position_fixed_encode(&toks(&["a", "b", "c"]), &d, &c).unwrap();
        assert_eq!(t.events().last().unwrap().step, 100);
        // L=5, i=2 -> 100 * 2/4 = 50.
        let t = position_fixed_encode(&toks(&["a", "b", "c", "d", "e"]), &d, &c).unwrap();
        assert_eq!(t.events().iter().find(|e| e.neuron == 2).unwrap().step, 50);
    }

    #[test]
    fn pos_word_empty_input() {
        let d = dict(&["a"]);
        let t = pos_word_encode(&[], &d, &cfg()).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.neurons(), 1 + cfg().n_pos_neurons);
    }

    #[test]
    fn pos_word_pairs_are_cotimed() {
        let d = dict(&["a", "b", "c"]);
        let t = pos_word_encode(&toks(&["a"]), &d, &cfg()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.events()[0].step, t.events()[1].step);

        let t = pos_word_encode(&toks(&["a", "b", "c"]), &d, &cfg()).unwrap();
        assert_eq!(t.len(), 6);
        for i in 0..3usize {
            let steps: Vec<usize> = t
                .events()
                .iter()
                .filter(|e| e.neuron == i || e.neuron == 3 + i)
                .map(|e| e.step)
                .collect();
            assert_eq!(steps.len(), 2);
            assert_eq!(steps[0], steps[1], "token {i} not co-timed");
        }
    }

    #[test]
    fn pos_word_capacity_error() {
        let d = dict(&["a"]);
        let c = EncoderConfig {
            n_pos_neurons: 2,
            ..cfg()
        };
        let many = toks(&["a", "a", "a"]);
        assert!(matches!(
            pos_word_encode(&many, &d, &c),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn code_size_handles_float_products() {
        assert_eq!(code_size(0.10, 10), 1);
        assert_eq!(code_size(0.10, 100), 10);
        assert_eq!(code_size(0.10, 1000), 100);
        assert_eq!(code_size(0.10, 15), 2); // ceil(1.5)
    }

    #[test]
    fn codebook_code_sizes_exact() {
        for n in [10usize, 50, 100, 1000] {
            let d = dict(&["a", "b", "c"]);
            let c = EncoderConfig {
                n_word_neurons: n,
                n_pos_neurons: n,
                ..cfg()
            };
            let cb = Codebook::build(&d, &c).unwrap();
            let expect = code_size(0.10, n);
            for w in 0..d.len() {
                let code = cb.word_code(w).unwrap();
                assert_eq!(code.len(), expect);
                let set: BTreeSet<usize> = code.iter().copied().collect();
                assert_eq!(set.len(), expect, "code has duplicates");
            }
            for p in 0..c.max_positions {
                assert_eq!(cb.pos_code(p).unwrap().len(), expect);
            }
        }
    }

    #[test]
    fn codebook_same_seed_identical() {
        let d = dict(&["a", "b", "c"]);
        let c = cfg();
        assert_eq!(Codebook::build(&d, &c).unwrap(), Codebook::build(&d, &c).unwrap());
    }

    #[test]
    fn codebook_word_code_invariant_across_sentences() {
        let d = dict(&["good", "film", "bad"]);
        let c = cfg();
        let cb = Codebook::build(&d, &c).unwrap();
        let t1 = codebook_encode(&toks(&["good", "film"]), &d, &cb, &c).unwrap();
        let t2 = codebook_encode(&toks(&["bad", "bad", "good"]), &d, &cb, &c).unwrap();
        let word_neurons = |t: &SpikeTrain, slot: usize| -> BTreeSet<usize> {
            t.events()
                .iter()
                .filter(|e| e.step == slot && e.neuron < c.n_word_neurons)
                .map(|e| e.neuron)
                .collect()
        };
        // "good" is token 0 of sentence 1 (slot 0) and the last token of
        // sentence 2 (slot = window).
        let s1 = word_neurons(&t1, 0);
        let s2 = word_neurons(&t2, c.window);
        assert_eq!(s1, s2);
        assert_eq!(s1, cb.word_code(0).unwrap().iter().copied().collect());
    }

    #[test]
    fn codebook_position_capacity_error() {
        let d = dict(&["a"]);
        let c = EncoderConfig {
            max_positions: 2,
            ..cfg()
        };
        let cb = Codebook::build(&d, &c).unwrap();
        let many = toks(&["a", "a", "a"]);
        assert!(matches!(
            codebook_encode(&many, &d, &cb, &c),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn gaussian_tiny_sigma_collapses_to_exact_position() {
        let d = dict(&["a", "b", "c"]);
        // 51 position neurons put every mu on an integer, away from
        // rounding boundaries that infinitesimal noise could flip.
        let c = EncoderConfig {
            gaussian_sigma: 1e-12,
            n_pos_neurons: 51,
            ..cfg()
        };
        let cb = Codebook::build(&d, &c).unwrap();
        let t = gaussian_pos_word_encode(&toks(&["a", "b", "c"]), &d, &cb, &c, &mut rng(5)).unwrap();
        // Token i of 3 has mu = (i/2) * (n_pos - 1); all samples collapse there.
        for i in 0..3usize {
            let mu = (i as f64 / 2.0) * (c.n_pos_neurons - 1) as f64;
            let expected = c.n_word_neurons + mu.round() as usize;
            let slot = codebook_slot(i, 3, c.window);
            let pos_events: Vec<usize> = t
                .events()
                .iter()
                .filter(|e| e.step == slot && e.neuron >= c.n_word_neurons)
                .map(|e| e.neuron)
                .collect();
            assert_eq!(pos_events, vec![expected]);
        }
    }

    #[test]
    fn gaussian_edge_means_stay_clamped() {
        let d = dict(&["a", "b"]);
        let c = EncoderConfig {
            gaussian_sigma: 50.0,
            ..cfg()
        };
        let cb = Codebook::build(&d, &c).unwrap();
        let t = gaussian_pos_word_encode(&toks(&["a", "b"]), &d, &cb, &c, &mut rng(9)).unwrap();
        let n_total = c.n_word_neurons + c.n_pos_neurons;
        for e in t.events() {
            assert!(e.neuron < n_total);
        }
    }

    #[test]
    fn gaussian_sample_mean_near_mu() {
        // Direct statistical check on the sampler the encoder uses.
        let normal = Normal::new(50.0, 5.0).unwrap();
        let mut r = rng(123);
        let mean: f64 = (0..10_000).map(|_| normal.sample(&mut r)).sum::<f64>() / 10_000.0;
        assert!((49.8..=50.2).contains(&mean), "mean {mean}");
    }

    #[test]
    fn sequence_single_item_is_identity() {
        let d = dict(&["a", "b"]);
        let c = cfg();
        let cb = Codebook::build(&d, &c).unwrap();
        let item = codebook_encode(&toks(&["a", "b"]), &d, &cb, &c).unwrap();
        assert_eq!(encode_sequence(std::slice::from_ref(&item)).unwrap(), item);
    }

    #[test]
    fn sequence_offsets_events() {
        let a = SpikeTrain::empty("input", 4, 100);
        let b = SpikeTrain::new("input", 4, 100, vec![SpikeEvent::new(2, 3)]).unwrap();
        let seq = encode_sequence(&[a, b]).unwrap();
        assert_eq!(seq.horizon(), 200);
        assert_eq!(seq.events(), &[SpikeEvent::new(2, 103)]);
    }

    #[test]
    fn sequence_of_empties_keeps_horizon() {
        let items = vec![SpikeTrain::empty("input", 4, 50); 3];
        let seq = encode_sequence(&items).unwrap();
        assert!(seq.is_empty());
        assert_eq!(seq.horizon(), 150);
    }

    #[test]
    fn sequence_rejects_mismatched_spaces() {
        let a = SpikeTrain::empty("input", 4, 10);
        let b = SpikeTrain::empty("input", 5, 10);
        assert!(matches!(encode_sequence(&[a, b]), Err(Error::Config(_))));
    }

    #[test]
    fn encoders_are_deterministic_under_seed() {
        let d = dict(&["good", "film", "bad", "plot"]);
        let c = cfg();
        let cb = Codebook::build(&d, &c).unwrap();
        let sentence = toks(&["good", "plot", "bad", "film"]);
        for kind in [
            EncoderKind::Poisson,
            EncoderKind::PosFixed,
            EncoderKind::PosWord,
            EncoderKind::Codebook,
            EncoderKind::GaussPosWord,
        ] {
            let a = encode_tokens(kind, &sentence, &d, &cb, &c, &mut rng(77)).unwrap();
            let b = encode_tokens(kind, &sentence, &d, &cb, &c, &mut rng(77)).unwrap();
            assert_eq!(a, b, "{kind} not deterministic");
        }
    }

    #[test]
    fn encoder_kind_parses_and_rejects() {
        use std::str::FromStr;
        assert_eq!(EncoderKind::from_str("codebook").unwrap(), EncoderKind::Codebook);
        let err = EncoderKind::from_str("fourier").unwrap_err().to_string();
        assert!(err.contains("gauss-pos-word"), "{err}");
    }

    #[test]
    fn events_stay_inside_declared_spaces() {
        let d = dict(&["x", "y", "z"]);
        let c = cfg();
        let cb = Codebook::build(&d, &c).unwrap();
        let sentence = toks(&["x", "q", "z", "y", "z"]);
        for kind in [
            EncoderKind::Poisson,
            EncoderKind::PosFixed,
            EncoderKind::PosWord,
            EncoderKind::Codebook,
            EncoderKind::GaussPosWord,
        ] {
            let t = encode_tokens(kind, &sentence, &d, &cb, &c, &mut rng(11)).unwrap();
            assert_eq!(t.neurons(), kind.input_size(&d, &c), "{kind}");
            for e in t.events() {
                assert!(e.neuron < t.neurons());
                assert!(e.step < t.horizon());
            }
        }
    }
}
