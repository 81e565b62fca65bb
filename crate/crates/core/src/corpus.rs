//! Data ingestion: the bundled sentiment corpus, tokenization, dictionary
//! building, and PGM image loading.
//!
//! Corpus files are UTF-8 TSV (`text<TAB>label`, labels `pos` / `neg`)
//! because the sentences themselves contain commas. Lines starting with
//! `#` are comments.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoders::{Dictionary, GrayscaleImage};
use crate::error::{Error, Result};

/// Ground-truth class of a sample; also names the output column that
/// should win for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn opposite(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "pos",
            Label::Negative => "neg",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pos" => Ok(Label::Positive),
            "neg" => Ok(Label::Negative),
            other => Err(Error::parse_nl(format!(
                "unknown label `{other}` (expected `pos` or `neg`)"
            ))),
        }
    }
}

/// One labeled sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub text: String,
    pub label: Label,
}

impl Sample {
    pub fn new(text: impl Into<String>, label: Label) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidInput("sample text must be nonempty".into()));
        }
        Ok(Sample { text, label })
    }

    pub fn tokens(&self) -> Vec<String> {
        tokenize(&self.text)
    }
}

/// Hard cap on tokens per sentence accepted by the loader.
pub const MAX_TOKENS: usize = 24;

/// An ordered list of labeled samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub source_path: Option<String>,
    pub samples: Vec<Sample>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, samples: Vec<Sample>) -> Self {
        Corpus {
            name: name.into(),
            source_path: None,
            samples,
        }
    }

    /// The ten reference sentences shipped with the crate; these are also
    /// the first rows of `data/corpus.tsv` and the inputs the bundled
    /// experiments run on.
    pub fn bundled() -> Corpus {
        let rows: [(&str, Label); 10] = [
            ("The humor was forced, not really funny. Disappointed.", Label::Negative),
            ("Stunning animation brought the characters to life!", Label::Positive),
            ("Spectacular visuals but the plot fell flat. Unimpressed.", Label::Negative),
            ("Engaging from start to finish, highly recommend it.", Label::Positive),
            ("Slow pacing made it hard to stay interested. Boring.", Label::Negative),
            ("A brilliant twist ending that I didn't see coming.", Label::Positive),
            ("The plot holes were too glaring to ignore. Poor.", Label::Negative),
            ("Excellent direction and superb acting. A must-watch!", Label::Positive),
            ("Terrible dialogue, felt very unnatural. Bad writing.", Label::Negative),
            ("Intriguing plot with unexpected twists. Great film!", Label::Positive),
        ];
        let samples = rows
            .into_iter()
            .map(|(text, label)| Sample {
                text: text.to_string(),
                label,
            })
            .collect();
        Corpus::new("bundled", samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.samples.iter().filter(|s| s.label == label).count()
    }

    /// Training needs at least one sample of each label.
    pub fn check_trainable(&self) -> Result<()> {
        if self.count(Label::Positive) == 0 || self.count(Label::Negative) == 0 {
            return Err(Error::InvalidInput(format!(
                "corpus `{}` needs at least one sample of each label ({} pos, {} neg)",
                self.name,
                self.count(Label::Positive),
                self.count(Label::Negative)
            )));
        }
        Ok(())
    }

    /// Parse TSV text. The header line `text<TAB>label` is optional;
    /// `#` comments and blank lines are skipped.
    pub fn parse(text: &str, name: impl Into<String>) -> Result<Corpus> {
        let mut samples = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if idx == 0 && trimmed == "text\tlabel" {
                continue;
            }
            let (text_part, label_part) = trimmed.split_once('\t').ok_or_else(|| {
                Error::parse(line_no, format!("expected `text<TAB>label`, got `{trimmed}`"))
            })?;
            let label: Label = label_part.trim().parse().map_err(|e| match e {
                Error::Parse { msg, .. } => Error::parse(line_no, msg),
                other => other,
            })?;
            let sample = Sample::new(text_part, label)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
            let n_tokens = sample.tokens().len();
            if n_tokens > MAX_TOKENS {
                return Err(Error::parse(
                    line_no,
                    format!("sentence has {n_tokens} tokens, limit is {MAX_TOKENS}"),
                ));
            }
            samples.push(sample);
        }
        Ok(Corpus::new(name, samples))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Corpus> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".to_string());
        let mut corpus = Corpus::parse(&text, name)?;
        corpus.source_path = Some(path.to_string_lossy().into_owned());
        Ok(corpus)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("text\tlabel\n");
        for s in &self.samples {
            out.push_str(&s.text);
            out.push('\t');
            out.push_str(s.label.as_str());
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_tsv())?;
        Ok(())
    }
}

/// Lowercase, split on whitespace, strip leading/trailing non-alphanumeric
/// characters per token; internal punctuation (hyphens, apostrophes) is
/// kept. Pure and deterministic.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

/// Index the `v_max` most frequent tokens of the corpus. Frequency ties
/// break lexicographically, so the mapping is identical across runs and
/// platforms.
pub fn build_dictionary(corpus: &Corpus, v_max: usize) -> Result<Dictionary> {
    if corpus.is_empty() {
        return Err(Error::InvalidInput("cannot build a dictionary from an empty corpus".into()));
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for sample in &corpus.samples {
        for token in sample.tokens() {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(String, usize)> = counts.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let words = entries.into_iter().take(v_max).map(|(w, _)| w).collect();
    Dictionary::new(words)
}

/// Load a PGM image (binary `P5` or ASCII `P2`), maxval 255 only.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayscaleImage> {
    parse_pgm(&std::fs::read(path)?)
}

/// Parse PGM bytes. Header comments (`#` to end of line) are allowed
/// anywhere whitespace is.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayscaleImage> {
    let mut pos = 0usize;

    let skip_ws = |pos: &mut usize| {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
    };
    let next_token = |pos: &mut usize| -> Result<&str> {
        skip_ws(pos);
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::parse_nl("truncated PGM header"));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .map_err(|_| Error::parse_nl("PGM header is not ASCII"))
    };
    let next_usize = |pos: &mut usize, what: &str| -> Result<usize> {
        let tok = next_token(pos)?;
        tok.parse()
            .map_err(|_| Error::parse_nl(format!("bad PGM {what} `{tok}`")))
    };

    let magic = next_token(&mut pos)?;
    if magic != "P2" && magic != "P5" {
        return Err(Error::parse_nl(format!(
            "not a supported PGM (magic `{magic}`, expected P2 or P5)"
        )));
    }
    let magic = magic.to_string();
    let width = next_usize(&mut pos, "width")?;
    let height = next_usize(&mut pos, "height")?;
    let maxval = next_usize(&mut pos, "maxval")?;
    if maxval != 255 {
        return Err(Error::parse_nl(format!("unsupported PGM maxval {maxval}, expected 255")));
    }
    let expected = width * height;

    let pixels = if magic == "P5" {
        // Exactly one whitespace byte separates the header from raw data.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::parse_nl("missing separator before P5 pixel data"));
        }
        pos += 1;
        let data = &bytes[pos..];
        if data.len() < expected {
            return Err(Error::parse_nl(format!(
                "truncated P5 payload: expected {expected} bytes, found {}",
                data.len()
            )));
        }
        data[..expected].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(expected);
        for _ in 0..expected {
            skip_ws(&mut pos);
            if pos >= bytes.len() {
                return Err(Error::parse_nl(format!(
                    "truncated P2 payload: expected {expected} values, found {}",
                    pixels.len()
                )));
            }
            let v = next_usize(&mut pos, "pixel")?;
            if v > 255 {
                return Err(Error::parse_nl(format!("pixel value {v} exceeds 255")));
            }
            pixels.push(v as u8);
        }
        pixels
    };
    GrayscaleImage::new(width, height, pixels)
}
