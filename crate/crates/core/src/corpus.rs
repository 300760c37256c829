//! Text preprocessing, vocabulary construction, and co-occurrence counting.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::kahan_sum;

/// Token every out-of-vocabulary word collapses to.
pub const UNK_TOKEN: &str = "<unk>";

/// Documents per counting shard. Fixed so that shard boundaries, and hence
/// floating-point accumulation order, do not depend on the thread count.
const SHARD_DOCS: usize = 256;

const DEFAULT_STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "aren't", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can't", "cannot", "could", "couldn't", "did", "didn't", "do", "does", "doesn't",
    "doing", "don't", "down", "during", "each", "few", "for", "from", "further", "had", "hadn't",
    "has", "hasn't", "have", "haven't", "having", "he", "he'd", "he'll", "he's", "her", "here",
    "here's", "hers", "herself", "him", "himself", "his", "how", "how's", "i", "i'd", "i'll",
    "i'm", "i've", "if", "in", "into", "is", "isn't", "it", "it's", "its", "itself", "let's",
    "me", "more", "most", "mustn't", "my", "myself", "no", "nor", "not", "of", "off", "on",
    "once", "only", "or", "other", "ought", "our", "ours", "ourselves", "out", "over", "own",
    "same", "shan't", "she", "she'd", "she'll", "she's", "should", "shouldn't", "so", "some",
    "such", "than", "that", "that's", "the", "their", "theirs", "them", "themselves", "then",
    "there", "there's", "these", "they", "they'd", "they'll", "they're", "they've", "this",
    "those", "through", "to", "too", "under", "until", "up", "very", "was", "wasn't", "we",
    "we'd", "we'll", "we're", "we've", "were", "weren't", "what", "what's", "when", "when's",
    "where", "where's", "which", "while", "who", "who's", "whom", "why", "why's", "with",
    "won't", "would", "wouldn't", "you", "you'd", "you'll", "you're", "you've", "your", "yours",
    "yourself", "yourselves",
];

/// Controls tokenization: which words to drop after lowercasing and
/// punctuation stripping.
#[derive(Clone, Debug)]
pub struct PreprocessConfig {
    pub stop_words: BTreeSet<String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            stop_words: DEFAULT_STOP_WORDS.iter().map(|w| w.to_string()).collect(),
        }
    }
}

impl PreprocessConfig {
    pub fn no_stop_words() -> Self {
        PreprocessConfig {
            stop_words: BTreeSet::new(),
        }
    }

    pub fn with_stop_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PreprocessConfig {
            stop_words: words.into_iter().map(Into::into).collect(),
        }
    }

    /// Hash of the stop-word list (sorted, newline-joined), recorded in run
    /// metadata so results can be tied to the exact list used.
    pub fn stop_list_sha256(&self) -> String {
        let joined: String = self
            .stop_words
            .iter()
            .map(|w| w.as_str())
            .collect::<Vec<_>>()
            .join("\n");
        crate::util::sha256_hex(joined.as_bytes())
    }
}

fn flush_token(buf: &mut String, config: &PreprocessConfig, out: &mut Vec<String>) {
    if buf.is_empty() {
        return;
    }
    let trimmed = buf.trim_matches('\'');
    if !trimmed.is_empty() && !config.stop_words.contains(trimmed) {
        out.push(trimmed.to_string());
    }
    buf.clear();
}

fn tokenize_line_into(line: &str, config: &PreprocessConfig, out: &mut Vec<String>) {
    let mut buf = String::new();
    for ch in line.chars() {
        let c = ch.to_ascii_lowercase();
        if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '\'' {
            buf.push(c);
        } else {
            flush_token(&mut buf, config, out);
        }
    }
    flush_token(&mut buf, config, out);
}

/// Lowercases, strips characters outside `[a-z0-9']`, trims apostrophes at
/// token edges, and drops stop words. Deterministic for fixed input and config.
pub fn preprocess_str(text: &str, config: &PreprocessConfig) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines() {
        tokenize_line_into(line, config, &mut out);
    }
    out
}

/// Byte-stream entry point; rejects invalid UTF-8 with the offending offset.
pub fn preprocess(bytes: &[u8], config: &PreprocessConfig) -> Result<Vec<String>> {
    let text = decode_utf8(bytes)?;
    Ok(preprocess_str(text, config))
}

/// Like [`preprocess`], but keeps line structure: one document per input line.
/// Windows never cross document boundaries downstream.
pub fn preprocess_documents(bytes: &[u8], config: &PreprocessConfig) -> Result<Vec<Vec<String>>> {
    let text = decode_utf8(bytes)?;
    let mut docs = Vec::new();
    for line in text.lines() {
        let mut doc = Vec::new();
        tokenize_line_into(line, config, &mut doc);
        if !doc.is_empty() {
            docs.push(doc);
        }
    }
    Ok(docs)
}

fn decode_utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| Error::Decode {
        offset: e.valid_up_to(),
    })
}

/// Token inventory: regular words ordered by descending frequency, with one
/// trailing unknown slot absorbing everything below the frequency cutoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    unk_index: usize,
}

impl Vocabulary {
    pub fn n(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn unk_index(&self) -> usize {
        self.unk_index
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    /// Exact lookup; `None` when the token holds no regular slot.
    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Lookup with fallback to the unknown slot.
    pub fn lookup(&self, token: &str) -> usize {
        self.index_of(token).unwrap_or(self.unk_index)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn total_tokens(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Builds the vocabulary from a token stream. Words seen at least `min_count`
/// times get slots ordered by descending frequency (ties by first occurrence);
/// the rest collapse into the trailing unknown slot, whose count keeps the
/// total equal to the stream length.
pub fn build_vocabulary<I, S>(tokens: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if min_count < 1 {
        return Err(Error::Domain {
            what: "min_count",
            requirement: "at least 1",
            got: min_count.to_string(),
        });
    }
    let mut stats: HashMap<String, (u64, usize)> = HashMap::new();
    let mut total: u64 = 0;
    for (pos, tok) in tokens.into_iter().enumerate() {
        let tok = tok.as_ref();
        total += 1;
        match stats.get_mut(tok) {
            Some((count, _)) => *count += 1,
            None => {
                stats.insert(tok.to_string(), (1, pos));
            }
        }
    }
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }

    let mut kept: Vec<(String, u64, usize)> = Vec::new();
    let mut unk_count: u64 = 0;
    for (word, (count, first)) in stats {
        // The unknown token never competes for a regular slot.
        if count >= min_count && word != UNK_TOKEN {
            kept.push((word, count, first));
        } else {
            unk_count += count;
        }
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));

    let mut words: Vec<String> = kept.iter().map(|(w, _, _)| w.clone()).collect();
    let mut counts: Vec<u64> = kept.iter().map(|(_, c, _)| *c).collect();
    words.push(UNK_TOKEN.to_string());
    counts.push(unk_count);
    let unk_index = words.len() - 1;
    let index = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    Ok(Vocabulary {
        words,
        index,
        counts,
        unk_index,
    })
}

/// Distance weighting for window counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// 1/distance, decaying away from the center word.
    Harmonic,
    /// 1 for every pair inside the window.
    Uniform,
}

impl std::fmt::Display for Weighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Weighting::Harmonic => write!(f, "harmonic"),
            Weighting::Uniform => write!(f, "uniform"),
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "harmonic" => Ok(Weighting::Harmonic),
            "uniform" => Ok(Weighting::Uniform),
            other => Err(Error::Domain {
                what: "weighting",
                requirement: "'harmonic' or 'uniform'",
                got: other.to_string(),
            }),
        }
    }
}

/// Sparse nonnegative co-occurrence weights, entries sorted by (row, col).
#[derive(Clone, Debug, PartialEq)]
pub struct CooccurrenceMatrix {
    n: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl CooccurrenceMatrix {
    /// Accumulates duplicate coordinates, drops exact zeros, rejects negative
    /// weights and out-of-range indices.
    pub fn from_entries<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, f64)>,
    {
        let mut map: HashMap<(u32, u32), f64> = HashMap::new();
        for (row, col, w) in entries {
            if row as usize >= n || col as usize >= n {
                return Err(Error::Domain {
                    what: "co-occurrence index",
                    requirement: "below the dictionary size",
                    got: format!("({row}, {col}) with n={n}"),
                });
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Domain {
                    what: "co-occurrence weight",
                    requirement: "finite and nonnegative",
                    got: w.to_string(),
                });
            }
            if w > 0.0 {
                *map.entry((row, col)).or_insert(0.0) += w;
            }
        }
        Ok(Self::from_map(n, map))
    }

    fn from_map(n: usize, map: HashMap<(u32, u32), f64>) -> Self {
        let mut entries: Vec<(u32, u32, f64)> = map
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .map(|((r, c), w)| (r, c, w))
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        CooccurrenceMatrix { n, entries }
    }

    /// Skips all validation; lets tests build matrices that violate the
    /// positivity invariant on purpose.
    #[cfg(test)]
    pub(crate) fn from_entries_unvalidated(n: usize, mut entries: Vec<(u32, u32, f64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        CooccurrenceMatrix { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries
            .iter()
            .map(|&(r, c, w)| (r as usize, c as usize, w))
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let key = (row as u32, col as u32);
        match self.entries.binary_search_by_key(&key, |&(r, c, _)| (r, c)) {
            Ok(i) => self.entries[i].2,
            Err(_) => 0.0,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for &(r, _, w) in &self.entries {
            sums[r as usize] += w;
        }
        sums
    }

    pub fn total_mass(&self) -> f64 {
        kahan_sum(self.entries.iter().map(|&(_, _, w)| w))
    }

    /// Swaps rows and columns. Entry order is re-sorted, values untouched.
    pub fn transpose(&self) -> Self {
        let mut entries: Vec<(u32, u32, f64)> =
            self.entries.iter().map(|&(r, c, w)| (c, r, w)).collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        CooccurrenceMatrix {
            n: self.n,
            entries,
        }
    }
}

fn count_shard(
    docs: &[Vec<u32>],
    window: usize,
    weighting: Weighting,
    symmetric: bool,
) -> HashMap<(u32, u32), f64> {
    let mut map: HashMap<(u32, u32), f64> = HashMap::new();
    for doc in docs {
        for i in 0..doc.len() {
            for dist in 1..=window.min(i) {
                let j = i - dist;
                let w = match weighting {
                    Weighting::Harmonic => 1.0 / dist as f64,
                    Weighting::Uniform => 1.0,
                };
                *map.entry((doc[i], doc[j])).or_insert(0.0) += w;
                if symmetric {
                    *map.entry((doc[j], doc[i])).or_insert(0.0) += w;
                }
            }
        }
    }
    map
}

/// Window counting over token-id documents. Each center word looks back at
/// context within `window` positions; symmetric mode also credits the reverse
/// pair. Sharding is by fixed-size document blocks merged in block order, so
/// the result is bit-identical for any thread count.
pub fn count_cooccurrences_ids(
    docs: &[Vec<u32>],
    n: usize,
    window: usize,
    weighting: Weighting,
    symmetric: bool,
) -> Result<CooccurrenceMatrix> {
    if window < 1 {
        return Err(Error::Domain {
            what: "window",
            requirement: "at least 1",
            got: window.to_string(),
        });
    }
    for doc in docs {
        if let Some(&id) = doc.iter().find(|&&id| id as usize >= n) {
            return Err(Error::WordIndexOutOfRange {
                index: id as usize,
                size: n,
            });
        }
    }
    let shards: Vec<HashMap<(u32, u32), f64>> = docs
        .par_chunks(SHARD_DOCS)
        .map(|chunk| count_shard(chunk, window, weighting, symmetric))
        .collect();
    let mut merged: HashMap<(u32, u32), f64> = HashMap::new();
    for shard in shards {
        let mut adds: Vec<((u32, u32), f64)> = shard.into_iter().collect();
        adds.sort_by_key(|&(k, _)| k);
        for (k, w) in adds {
            *merged.entry(k).or_insert(0.0) += w;
        }
    }
    Ok(CooccurrenceMatrix::from_map(n, merged))
}

/// Convenience wrapper mapping token documents through the vocabulary
/// (out-of-vocabulary tokens count as the unknown slot).
pub fn count_cooccurrences(
    docs: &[Vec<String>],
    vocab: &Vocabulary,
    window: usize,
    weighting: Weighting,
    symmetric: bool,
) -> Result<CooccurrenceMatrix> {
    let id_docs: Vec<Vec<u32>> = docs
        .iter()
        .map(|doc| doc.iter().map(|t| vocab.lookup(t) as u32).collect())
        .collect();
    count_cooccurrences_ids(&id_docs, vocab.n(), window, weighting, symmetric)
}

/// Sidecar recorded next to the binary co-occurrence file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceMeta {
    pub n: usize,
    pub window: usize,
    pub weighting: Weighting,
    pub symmetric: bool,
    pub corpus_hash: String,
}

pub fn write_vocabulary(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(format!("create {}", path.display()), e))?;
    let mut out = BufWriter::new(file);
    for (word, count) in vocab.words().iter().zip(vocab.counts()) {
        writeln!(out, "{word}\t{count}")
            .map_err(|e| Error::io(format!("write {}", path.display()), e))?;
    }
    out.flush()
        .map_err(|e| Error::io(format!("write {}", path.display()), e))
}

pub fn read_vocabulary(path: &Path) -> Result<Vocabulary> {
    let file = File::open(path).map_err(|e| Error::io(format!("open {}", path.display()), e))?;
    let reader = BufReader::new(file);
    let mut words = Vec::new();
    let mut counts = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("read {}", path.display()), e))?;
        if line.is_empty() {
            continue;
        }
        let (word, count) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            message: "expected 'word<TAB>count'".into(),
        })?;
        let count: u64 = count.trim().parse().map_err(|_| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            message: format!("invalid count '{count}'"),
        })?;
        words.push(word.to_string());
        counts.push(count);
    }
    if words.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let unk_index = match words.iter().position(|w| w == UNK_TOKEN) {
        Some(i) => i,
        None => {
            // External vector-file vocabularies may lack the slot; give them one.
            words.push(UNK_TOKEN.to_string());
            counts.push(0);
            words.len() - 1
        }
    };
    let mut index = HashMap::new();
    for (i, w) in words.iter().enumerate() {
        if index.insert(w.clone(), i).is_some() {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message: format!("duplicate word '{w}'"),
            });
        }
    }
    Ok(Vocabulary {
        words,
        index,
        counts,
        unk_index,
    })
}

pub fn cooccurrence_sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".meta.json");
    PathBuf::from(os)
}

/// Binary records of (u32 row, u32 col, f64 weight), little-endian, plus a
/// JSON sidecar at `<path>.meta.json`.
pub fn write_cooccurrences(
    path: &Path,
    matrix: &CooccurrenceMatrix,
    meta: &CooccurrenceMeta,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(format!("create {}", path.display()), e))?;
    let mut out = BufWriter::new(file);
    for &(row, col, w) in matrix.entries() {
        out.write_all(&row.to_le_bytes())
            .and_then(|_| out.write_all(&col.to_le_bytes()))
            .and_then(|_| out.write_all(&w.to_le_bytes()))
            .map_err(|e| Error::io(format!("write {}", path.display()), e))?;
    }
    out.flush()
        .map_err(|e| Error::io(format!("write {}", path.display()), e))?;

    let sidecar = cooccurrence_sidecar_path(path);
    let json = serde_json::to_string_pretty(meta).expect("meta serializes");
    std::fs::write(&sidecar, json)
        .map_err(|e| Error::io(format!("write {}", sidecar.display()), e))
}

pub fn read_cooccurrences(path: &Path) -> Result<(CooccurrenceMatrix, CooccurrenceMeta)> {
    let sidecar = cooccurrence_sidecar_path(path);
    let meta_text = std::fs::read_to_string(&sidecar)
        .map_err(|e| Error::io(format!("open {}", sidecar.display()), e))?;
    let meta: CooccurrenceMeta = serde_json::from_str(&meta_text).map_err(|e| Error::Parse {
        path: sidecar.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;

    let file = File::open(path).map_err(|e| Error::io(format!("open {}", path.display()), e))?;
    let mut reader = BufReader::new(file);
    let mut entries = Vec::new();
    let mut record = [0u8; 16];
    loop {
        match reader.read_exact(&mut record) {
            Ok(()) => {
                let row = u32::from_le_bytes(record[0..4].try_into().unwrap());
                let col = u32::from_le_bytes(record[4..8].try_into().unwrap());
                let w = f64::from_le_bytes(record[8..16].try_into().unwrap());
                entries.push((row, col, w));
            }
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(Error::io(format!("read {}", path.display()), e)),
        }
    }
    let matrix = CooccurrenceMatrix::from_entries(meta.n, entries)?;
    Ok((matrix, meta))
}
