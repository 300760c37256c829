//! Weighted least-squares embedding training over co-occurrence counts.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::util::kahan_sum;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub d: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub x_max: f64,
    /// Exponent of the count-weighting function.
    pub exponent: f64,
    pub seed: u64,
    /// Parameters start uniform in (-init_scale, init_scale)/d.
    pub init_scale: f64,
    /// 1 is the bit-reproducibility contract; more run lock-free updates.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            d: 50,
            epochs: 25,
            learning_rate: 0.05,
            x_max: 100.0,
            exponent: 0.75,
            seed: 1,
            init_scale: 0.5,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::Domain {
                what: "embedding dimension",
                requirement: "at least 1",
                got: self.d.to_string(),
            });
        }
        if !(self.x_max > 0.0) {
            return Err(Error::Domain {
                what: "x_max",
                requirement: "positive",
                got: self.x_max.to_string(),
            });
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Domain {
                what: "learning_rate",
                requirement: "positive",
                got: self.learning_rate.to_string(),
            });
        }
        if !(self.init_scale > 0.0) {
            return Err(Error::Domain {
                what: "init_scale",
                requirement: "positive",
                got: self.init_scale.to_string(),
            });
        }
        if self.threads < 1 {
            return Err(Error::Domain {
                what: "threads",
                requirement: "at least 1",
                got: self.threads.to_string(),
            });
        }
        Ok(())
    }
}

/// Count-weighting function: (x/x_max)^exponent below the cutoff, 1 above.
pub fn glove_weight(x: f64, x_max: f64, exponent: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain {
            what: "count",
            requirement: "nonnegative",
            got: x.to_string(),
        });
    }
    if !(x_max > 0.0) {
        return Err(Error::Domain {
            what: "x_max",
            requirement: "positive",
            got: x_max.to_string(),
        });
    }
    Ok(weight_unchecked(x, x_max, exponent))
}

#[inline]
fn weight_unchecked(x: f64, x_max: f64, exponent: f64) -> f64 {
    if x < x_max {
        (x / x_max).powf(exponent)
    } else {
        1.0
    }
}

/// Center vectors U, context vectors V, and the two bias columns, with the
/// word strings they index.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub b: DVector<f64>,
    pub b_tilde: DVector<f64>,
    pub words: Vec<String>,
}

impl EmbeddingModel {
    pub fn new(
        u: DMatrix<f64>,
        v: DMatrix<f64>,
        b: DVector<f64>,
        b_tilde: DVector<f64>,
        words: Vec<String>,
    ) -> Result<Self> {
        let n = u.nrows();
        let d = u.ncols();
        if v.nrows() != n || v.ncols() != d || b.len() != n || b_tilde.len() != n {
            return Err(Error::Domain {
                what: "model shapes",
                requirement: "U, V n×d with length-n biases",
                got: format!(
                    "U {}×{}, V {}×{}, b {}, b_tilde {}",
                    n,
                    d,
                    v.nrows(),
                    v.ncols(),
                    b.len(),
                    b_tilde.len()
                ),
            });
        }
        if words.len() != n {
            return Err(Error::Domain {
                what: "word list",
                requirement: "one word per row",
                got: format!("{} words for {} rows", words.len(), n),
            });
        }
        let finite = u.iter().all(|x| x.is_finite())
            && v.iter().all(|x| x.is_finite())
            && b.iter().all(|x| x.is_finite())
            && b_tilde.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Domain {
                what: "model entries",
                requirement: "finite",
                got: "non-finite entry".into(),
            });
        }
        Ok(EmbeddingModel {
            u,
            v,
            b,
            b_tilde,
            words,
        })
    }

    /// Wraps externally trained word vectors that ship without context
    /// vectors or biases; context vectors are taken equal to the word
    /// vectors and biases are zero.
    pub fn from_u_only(u: DMatrix<f64>, words: Vec<String>) -> Result<Self> {
        let n = u.nrows();
        let v = u.clone();
        Self::new(u, v, DVector::zeros(n), DVector::zeros(n), words)
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn d(&self) -> usize {
        self.u.ncols()
    }

    pub fn index_map(&self) -> HashMap<&str, usize> {
        self.words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i))
            .collect()
    }

    /// Swaps center and context roles. The mirror of a model trained on C
    /// is the model trained on Cᵀ from the mirrored initialization.
    pub fn mirrored(&self) -> Self {
        EmbeddingModel {
            u: self.v.clone(),
            v: self.u.clone(),
            b: self.b_tilde.clone(),
            b_tilde: self.b.clone(),
            words: self.words.clone(),
        }
    }
}

/// Placeholder word strings for models built directly from matrices.
pub fn synthetic_words(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

struct FlatParams {
    n: usize,
    d: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    b: Vec<f64>,
    bt: Vec<f64>,
    gu: Vec<f64>,
    gv: Vec<f64>,
    gb: Vec<f64>,
    gbt: Vec<f64>,
}

impl FlatParams {
    fn from_model(model: &EmbeddingModel) -> Self {
        let n = model.n();
        let d = model.d();
        let mut u = vec![0.0; n * d];
        let mut v = vec![0.0; n * d];
        for w in 0..n {
            for k in 0..d {
                u[w * d + k] = model.u[(w, k)];
                v[w * d + k] = model.v[(w, k)];
            }
        }
        FlatParams {
            n,
            d,
            u,
            v,
            b: model.b.iter().copied().collect(),
            bt: model.b_tilde.iter().copied().collect(),
            gu: vec![1.0; n * d],
            gv: vec![1.0; n * d],
            gb: vec![1.0; n],
            gbt: vec![1.0; n],
        }
    }

    fn into_model(self, words: Vec<String>) -> Result<EmbeddingModel> {
        let u = DMatrix::from_row_slice(self.n, self.d, &self.u);
        let v = DMatrix::from_row_slice(self.n, self.d, &self.v);
        let b = DVector::from_vec(self.b);
        let bt = DVector::from_vec(self.bt);
        EmbeddingModel::new(u, v, b, bt, words)
    }
}

/// One adaptive-gradient step on a single count. The step reads old values
/// of both sides before touching either, and accumulates the squared step
/// (learning rate folded in) rather than the raw squared gradient, matching
/// the reference descent exactly. Returns the pre-update objective term.
#[inline]
#[allow(clippy::too_many_arguments)]
fn update_entry(
    u: &mut [f64],
    v: &mut [f64],
    b: &mut [f64],
    bt: &mut [f64],
    gu: &mut [f64],
    gv: &mut [f64],
    gb: &mut [f64],
    gbt: &mut [f64],
    d: usize,
    row: usize,
    col: usize,
    x: f64,
    config: &TrainConfig,
) -> f64 {
    let lu = row * d;
    let lv = col * d;
    let mut dot = 0.0;
    for k in 0..d {
        dot += u[lu + k] * v[lv + k];
    }
    let diff = dot + b[row] + bt[col] - x.ln();
    let f = weight_unchecked(x, config.x_max, config.exponent);
    let cost = f * diff * diff;
    let mut fdiff = f * diff * config.learning_rate;
    for k in 0..d {
        let temp1 = fdiff * v[lv + k];
        let temp2 = fdiff * u[lu + k];
        u[lu + k] -= temp1 / gu[lu + k].sqrt();
        v[lv + k] -= temp2 / gv[lv + k].sqrt();
        gu[lu + k] += temp1 * temp1;
        gv[lv + k] += temp2 * temp2;
    }
    b[row] -= fdiff / gb[row].sqrt();
    bt[col] -= fdiff / gbt[col].sqrt();
    fdiff *= fdiff;
    gb[row] += fdiff;
    gbt[col] += fdiff;
    cost
}

fn epoch_pass_sequential(
    params: &mut FlatParams,
    entries: &[(u32, u32, f64)],
    order: &[usize],
    config: &TrainConfig,
) -> f64 {
    let mut cost = 0.0;
    let d = params.d;
    for &i in order {
        let (row, col, x) = entries[i];
        cost += update_entry(
            &mut params.u,
            &mut params.v,
            &mut params.b,
            &mut params.bt,
            &mut params.gu,
            &mut params.gv,
            &mut params.gb,
            &mut params.gbt,
            d,
            row as usize,
            col as usize,
            x,
            config,
        );
    }
    cost
}

/// Raw views for lock-free sharded updates. Shards touch overlapping rows
/// without synchronization, so parallel runs are only statistically
/// reproducible; the sequential path never constructs this.
#[derive(Clone, Copy)]
struct RawParams {
    u: *mut f64,
    v: *mut f64,
    b: *mut f64,
    bt: *mut f64,
    gu: *mut f64,
    gv: *mut f64,
    gb: *mut f64,
    gbt: *mut f64,
    n: usize,
    nd: usize,
}

unsafe impl Send for RawParams {}
unsafe impl Sync for RawParams {}

fn epoch_pass_parallel(
    params: &mut FlatParams,
    entries: &[(u32, u32, f64)],
    order: &[usize],
    config: &TrainConfig,
) -> f64 {
    let raw = RawParams {
        u: params.u.as_mut_ptr(),
        v: params.v.as_mut_ptr(),
        b: params.b.as_mut_ptr(),
        bt: params.bt.as_mut_ptr(),
        gu: params.gu.as_mut_ptr(),
        gv: params.gv.as_mut_ptr(),
        gb: params.gb.as_mut_ptr(),
        gbt: params.gbt.as_mut_ptr(),
        n: params.n,
        nd: params.n * params.d,
    };
    let d = params.d;
    let shard_len = order.len().div_ceil(config.threads);
    let costs: Vec<f64> = std::thread::scope(|scope| {
        let handles: Vec<_> = order
            .chunks(shard_len.max(1))
            .map(|shard| {
                scope.spawn(move || {
                    // Capture the whole RawParams, not its pointer fields.
                    let raw = raw;
                    let mut cost = 0.0;
                    for &i in shard {
                        let (row, col, x) = entries[i];
                        // Aliased mutable access across shards is the whole
                        // point of this mode; see the RawParams note.
                        let (u, v, b, bt, gu, gv, gb, gbt) = unsafe {
                            (
                                std::slice::from_raw_parts_mut(raw.u, raw.nd),
                                std::slice::from_raw_parts_mut(raw.v, raw.nd),
                                std::slice::from_raw_parts_mut(raw.b, raw.n),
                                std::slice::from_raw_parts_mut(raw.bt, raw.n),
                                std::slice::from_raw_parts_mut(raw.gu, raw.nd),
                                std::slice::from_raw_parts_mut(raw.gv, raw.nd),
                                std::slice::from_raw_parts_mut(raw.gb, raw.n),
                                std::slice::from_raw_parts_mut(raw.gbt, raw.n),
                            )
                        };
                        cost +=
                            update_entry(u, v, b, bt, gu, gv, gb, gbt, d, row as usize,
                                col as usize, x, config);
                    }
                    cost
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    costs.iter().sum()
}

/// Fresh model with entries uniform in (-init_scale, init_scale)/d, in a
/// fixed sampling order so a seed pins the exact initialization.
pub fn init_model(words: Vec<String>, config: &TrainConfig) -> Result<EmbeddingModel> {
    config.validate()?;
    let n = words.len();
    let d = config.d;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = config.init_scale;
    let mut sample = |len: usize| -> Vec<f64> {
        (0..len)
            .map(|_| rng.random_range(-scale..scale) / d as f64)
            .collect()
    };
    let u = sample(n * d);
    let v = sample(n * d);
    let b = sample(n);
    let bt = sample(n);
    EmbeddingModel::new(
        DMatrix::from_row_slice(n, d, &u),
        DMatrix::from_row_slice(n, d, &v),
        DVector::from_vec(b),
        DVector::from_vec(bt),
        words,
    )
}

/// Minimizes Σ f(C_wχ)(u_w·v_χ + b_w + b̃_χ − ln C_wχ)² by adaptive gradient
/// descent over per-epoch shuffles of the nonzero entries. Returns the model
/// and the accumulated objective value observed during each epoch.
pub fn train(
    c: &CooccurrenceMatrix,
    words: Vec<String>,
    config: &TrainConfig,
) -> Result<(EmbeddingModel, Vec<f64>)> {
    let model = init_model(words, config)?;
    train_from(model, c, config)
}

/// Continues training from an existing model (used for warm starts and for
/// role-swap checks against transposed counts).
pub fn train_from(
    model: EmbeddingModel,
    c: &CooccurrenceMatrix,
    config: &TrainConfig,
) -> Result<(EmbeddingModel, Vec<f64>)> {
    config.validate()?;
    if c.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if c.n() != model.n() {
        return Err(Error::Domain {
            what: "count matrix size",
            requirement: "matching the model vocabulary",
            got: format!("n={} vs model n={}", c.n(), model.n()),
        });
    }
    if model.d() != config.d {
        return Err(Error::Domain {
            what: "model dimension",
            requirement: "matching config.d",
            got: format!("{} vs {}", model.d(), config.d),
        });
    }
    let words = model.words.clone();
    let mut params = FlatParams::from_model(&model);
    let entries = c.entries();
    let mut order: Vec<usize> = (0..entries.len()).collect();
    // Stream 1 keeps the shuffle sequence independent of initialization
    // draws, so warm starts see the same entry order as fresh runs.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let cost = if config.threads <= 1 {
            epoch_pass_sequential(&mut params, entries, &order, config)
        } else {
            epoch_pass_parallel(&mut params, entries, &order, config)
        };
        if !cost.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        trace.push(cost);
    }
    let model = params.into_model(words)?;
    Ok((model, trace))
}

/// Exact objective Σ f(C_wχ)(u_w·v_χ + b_w + b̃_χ − ln C_wχ)². Terms are
/// computed independently and summed in entry order, so the value does not
/// depend on thread count.
pub fn model_loss(model: &EmbeddingModel, c: &CooccurrenceMatrix, config: &TrainConfig) -> Result<f64> {
    let terms = residual_terms(model, c, config)?;
    Ok(kahan_sum(terms.into_iter().map(|(f, diff)| f * diff * diff)))
}

fn residual_terms(
    model: &EmbeddingModel,
    c: &CooccurrenceMatrix,
    config: &TrainConfig,
) -> Result<Vec<(f64, f64)>> {
    use rayon::prelude::*;
    if c.n() != model.n() {
        return Err(Error::Domain {
            what: "count matrix size",
            requirement: "matching the model vocabulary",
            got: format!("n={} vs model n={}", c.n(), model.n()),
        });
    }
    for &(row, col, x) in c.entries() {
        if !(x > 0.0) {
            return Err(Error::NonPositiveCount {
                row: row as usize,
                col: col as usize,
            });
        }
    }
    Ok(c.entries()
        .par_iter()
        .map(|&(row, col, x)| {
            let (w, ctx) = (row as usize, col as usize);
            let dot = model.u.row(w).dot(&model.v.row(ctx));
            let diff = dot + model.b[w] + model.b_tilde[ctx] - x.ln();
            (weight_unchecked(x, config.x_max, config.exponent), diff)
        })
        .collect())
}

/// Root mean squared residual u_w·v_χ + b_w + b̃_χ − ln C_wχ over entries
/// (unweighted), the fit quality number for planted-factor checks.
pub fn model_rmse(model: &EmbeddingModel, c: &CooccurrenceMatrix, config: &TrainConfig) -> Result<f64> {
    let terms = residual_terms(model, c, config)?;
    if terms.is_empty() {
        return Ok(0.0);
    }
    let len = terms.len() as f64;
    Ok((kahan_sum(terms.into_iter().map(|(_, diff)| diff * diff)) / len).sqrt())
}

#[derive(Clone, Debug)]
pub struct ModelGradients {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub b: DVector<f64>,
    pub b_tilde: DVector<f64>,
}

/// Analytic gradient of the objective with respect to all parameters.
pub fn model_gradient(
    model: &EmbeddingModel,
    c: &CooccurrenceMatrix,
    config: &TrainConfig,
) -> Result<ModelGradients> {
    let n = model.n();
    let d = model.d();
    let mut gu = DMatrix::zeros(n, d);
    let mut gv = DMatrix::zeros(n, d);
    let mut gb = DVector::zeros(n);
    let mut gbt = DVector::zeros(n);
    for &(row, col, x) in c.entries() {
        if !(x > 0.0) {
            return Err(Error::NonPositiveCount {
                row: row as usize,
                col: col as usize,
            });
        }
        let (w, ctx) = (row as usize, col as usize);
        let dot = model.u.row(w).dot(&model.v.row(ctx));
        let diff = dot + model.b[w] + model.b_tilde[ctx] - x.ln();
        let g = 2.0 * weight_unchecked(x, config.x_max, config.exponent) * diff;
        for k in 0..d {
            gu[(w, k)] += g * model.v[(ctx, k)];
            gv[(ctx, k)] += g * model.u[(w, k)];
        }
        gb[w] += g;
        gbt[ctx] += g;
    }
    Ok(ModelGradients {
        u: gu,
        v: gv,
        b: gb,
        b_tilde: gbt,
    })
}

fn fmt_row(word: &str, row: impl Iterator<Item = f64>) -> String {
    let mut line = String::from(word);
    for x in row {
        line.push(' ');
        line.push_str(&format!("{x}"));
    }
    line
}

pub(crate) fn write_vector_file(
    path: &Path,
    header: Option<(usize, usize)>,
    words: &[String],
    rows: impl Fn(usize) -> Vec<f64>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(format!("create {}", path.display()), e))?;
    let mut out = BufWriter::new(file);
    if let Some((n, d)) = header {
        writeln!(out, "{n} {d}").map_err(|e| Error::io(format!("write {}", path.display()), e))?;
    }
    for (w, word) in words.iter().enumerate() {
        writeln!(out, "{}", fmt_row(word, rows(w).into_iter()))
            .map_err(|e| Error::io(format!("write {}", path.display()), e))?;
    }
    out.flush()
        .map_err(|e| Error::io(format!("write {}", path.display()), e))
}

pub fn model_text_paths(stem: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut os = stem.as_os_str().to_os_string();
        os.push(suffix);
        PathBuf::from(os)
    };
    (with(".u.txt"), with(".v.txt"), with(".bias.txt"))
}

/// Three text files sharing a stem: `<stem>.u.txt` and `<stem>.v.txt` with an
/// "n d" header and one "word v_1 … v_d" line per row, and `<stem>.bias.txt`
/// with "word b b̃" lines. Floats print in shortest round-trip form.
pub fn write_model_text(stem: &Path, model: &EmbeddingModel) -> Result<()> {
    let (u_path, v_path, bias_path) = model_text_paths(stem);
    let n = model.n();
    let d = model.d();
    write_vector_file(&u_path, Some((n, d)), &model.words, |w| {
        model.u.row(w).iter().copied().collect()
    })?;
    write_vector_file(&v_path, Some((n, d)), &model.words, |w| {
        model.v.row(w).iter().copied().collect()
    })?;
    write_vector_file(&bias_path, Some((n, 2)), &model.words, |w| {
        vec![model.b[w], model.b_tilde[w]]
    })
}

pub(crate) struct VectorFile {
    pub(crate) words: Vec<String>,
    pub(crate) rows: Vec<Vec<f64>>,
}

pub(crate) fn read_vector_file(path: &Path, expect_header: bool) -> Result<VectorFile> {
    let file = File::open(path).map_err(|e| Error::io(format!("open {}", path.display()), e))?;
    let reader = BufReader::new(file);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut words = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("read {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        if lineno == 0 && expect_header {
            let n = fields
                .next()
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| parse_err(1, "expected 'n d' header".into()))?;
            let d = fields
                .next()
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| parse_err(1, "expected 'n d' header".into()))?;
            header = Some((n, d));
            continue;
        }
        let word = fields
            .next()
            .ok_or_else(|| parse_err(lineno + 1, "empty row".into()))?;
        let values: std::result::Result<Vec<f64>, _> = fields.map(|s| s.parse::<f64>()).collect();
        let values =
            values.map_err(|e| parse_err(lineno + 1, format!("bad float: {e}")))?;
        if let Some(prev) = rows.first() {
            if values.len() != prev.len() {
                return Err(parse_err(
                    lineno + 1,
                    format!("row width {} differs from {}", values.len(), prev.len()),
                ));
            }
        }
        words.push(word.to_string());
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no vector rows".into()));
    }
    if let Some((n, d)) = header {
        if n != rows.len() || d != rows[0].len() {
            return Err(parse_err(
                1,
                format!(
                    "header {}x{} does not match {} rows of width {}",
                    n,
                    d,
                    rows.len(),
                    rows[0].len()
                ),
            ));
        }
    }
    Ok(VectorFile { words, rows })
}

pub fn read_model_text(stem: &Path) -> Result<EmbeddingModel> {
    let (u_path, v_path, bias_path) = model_text_paths(stem);
    let uf = read_vector_file(&u_path, true)?;
    let vf = read_vector_file(&v_path, true)?;
    let bf = read_vector_file(&bias_path, true)?;
    let n = uf.words.len();
    let d = uf.rows[0].len();
    let to_matrix = |rows: &[Vec<f64>]| {
        DMatrix::from_row_iterator(rows.len(), rows[0].len(), rows.iter().flatten().copied())
    };
    if vf.words != uf.words || bf.words != uf.words {
        return Err(Error::Parse {
            path: v_path.display().to_string(),
            line: 1,
            message: "word lists differ between model files".into(),
        });
    }
    if bf.rows[0].len() != 2 {
        return Err(Error::Parse {
            path: bias_path.display().to_string(),
            line: 2,
            message: "bias rows must hold exactly two values".into(),
        });
    }
    let u = to_matrix(&uf.rows);
    let v = to_matrix(&vf.rows);
    let b = DVector::from_iterator(n, bf.rows.iter().map(|r| r[0]));
    let bt = DVector::from_iterator(n, bf.rows.iter().map(|r| r[1]));
    let _ = d;
    EmbeddingModel::new(u, v, b, bt, uf.words)
}

/// Headerless "word v_1 … v_d" vector files as shipped by the common
/// pretrained downloads; yields a context-less model (see `from_u_only`).
pub fn read_glove_text(path: &Path) -> Result<EmbeddingModel> {
    let f = read_vector_file(path, false)?;
    let n = f.words.len();
    let d = f.rows[0].len();
    let u = DMatrix::from_row_iterator(n, d, f.rows.iter().flatten().copied());
    EmbeddingModel::from_u_only(u, f.words)
}

#[derive(Serialize, Deserialize)]
struct BinaryHeader {
    n: usize,
    d: usize,
    words: Vec<String>,
}

/// Single-file format: little-endian u64 JSON-header length, the JSON header
/// (n, d, words), then row-major f64 blocks for U, V, b, b̃.
pub fn write_model_binary(path: &Path, model: &EmbeddingModel) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(format!("create {}", path.display()), e))?;
    let mut out = BufWriter::new(file);
    let header = serde_json::to_vec(&BinaryHeader {
        n: model.n(),
        d: model.d(),
        words: model.words.clone(),
    })
    .expect("header serializes");
    let io_err = |e| Error::io(format!("write {}", path.display()), e);
    out.write_all(&(header.len() as u64).to_le_bytes())
        .map_err(io_err)?;
    out.write_all(&header).map_err(io_err)?;
    let mut write_block = |values: Box<dyn Iterator<Item = f64> + '_>| -> Result<()> {
        for x in values {
            out.write_all(&x.to_le_bytes())
                .map_err(|e| Error::io(format!("write {}", path.display()), e))?;
        }
        Ok(())
    };
    let n = model.n();
    write_block(Box::new(
        (0..n).flat_map(|w| model.u.row(w).iter().copied().collect::<Vec<_>>()),
    ))?;
    write_block(Box::new(
        (0..n).flat_map(|w| model.v.row(w).iter().copied().collect::<Vec<_>>()),
    ))?;
    write_block(Box::new(model.b.iter().copied()))?;
    write_block(Box::new(model.b_tilde.iter().copied()))?;
    Ok(())
}

pub fn read_model_binary(path: &Path) -> Result<EmbeddingModel> {
    let file = File::open(path).map_err(|e| Error::io(format!("open {}", path.display()), e))?;
    let mut reader = BufReader::new(file);
    let io_err = |e| Error::io(format!("read {}", path.display()), e);
    let mut len_bytes = [0u8; 8];
    reader.read_exact(&mut len_bytes).map_err(io_err)?;
    let header_len = u64::from_le_bytes(len_bytes) as usize;
    let mut header_bytes = vec![0u8; header_len];
    reader.read_exact(&mut header_bytes).map_err(io_err)?;
    let header: BinaryHeader = serde_json::from_slice(&header_bytes).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 1,
        message: format!("bad header: {e}"),
    })?;
    let mut read_block = |len: usize| -> Result<Vec<f64>> {
        let mut buf = vec![0u8; len * 8];
        reader
            .read_exact(&mut buf)
            .map_err(|e| Error::io(format!("read {}", path.display()), e))?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    };
    let (n, d) = (header.n, header.d);
    let u = DMatrix::from_row_slice(n, d, &read_block(n * d)?);
    let v = DMatrix::from_row_slice(n, d, &read_block(n * d)?);
    let b = DVector::from_vec(read_block(n)?);
    let bt = DVector::from_vec(read_block(n)?);
    EmbeddingModel::new(u, v, b, bt, header.words)
}
