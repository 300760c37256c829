//! Python bindings for the embedding toolchain.
//!
//! Wraps the pipeline types (vocabulary, counts, model, reference,
//! embedding set, scorer) as Python classes and exposes the entry points
//! for training, alpha-embedding, similarity, analogy, and sweeps.
//! Matrices cross the boundary as lists of row lists.

use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use alpha_embeddings::alpha;
use alpha_embeddings::corpus;
use alpha_embeddings::eval;
use alpha_embeddings::geometry::{self, Alpha, FisherSolver, ReferenceKind, ShiftMode};
use alpha_embeddings::measures::{self, SimilarityMethod};
use alpha_embeddings::trainer;
use alpha_embeddings::Error;

fn pyerr(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix_from_rows(rows: Vec<Vec<f64>>, what: &str) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err(format!("{what}: rows differ in length")));
    }
    Ok(DMatrix::from_fn(n, d, |i, j| rows[i][j]))
}

fn rows_from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn parse_alpha(value: f64) -> PyResult<Alpha> {
    Alpha::new(value).map_err(pyerr)
}

fn parse_reference(kind: &str) -> PyResult<ReferenceKind> {
    ReferenceKind::from_str(kind).map_err(pyerr)
}

fn parse_shift(shift: &str) -> PyResult<ShiftMode> {
    ShiftMode::from_str(shift).map_err(pyerr)
}

fn parse_method(method: &str) -> PyResult<SimilarityMethod> {
    SimilarityMethod::from_str(method).map_err(pyerr)
}

/// Training hyperparameters with the library defaults.
#[pyclass(module = "alphaemb", skip_from_py_object)]
#[derive(Clone)]
struct TrainConfig {
    inner: trainer::TrainConfig,
}

#[pymethods]
impl TrainConfig {
    #[new]
    #[pyo3(signature = (d=50, epochs=25, learning_rate=0.05, x_max=100.0, exponent=0.75, seed=1, init_scale=0.5, threads=1))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        d: usize,
        epochs: usize,
        learning_rate: f64,
        x_max: f64,
        exponent: f64,
        seed: u64,
        init_scale: f64,
        threads: usize,
    ) -> PyResult<Self> {
        let inner = trainer::TrainConfig {
            d,
            epochs,
            learning_rate,
            x_max,
            exponent,
            seed,
            init_scale,
            threads,
        };
        inner.validate().map_err(pyerr)?;
        Ok(TrainConfig { inner })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }

    #[getter]
    fn epochs(&self) -> usize {
        self.inner.epochs
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "TrainConfig(d={}, epochs={}, learning_rate={}, x_max={}, exponent={}, seed={}, init_scale={}, threads={})",
            c.d, c.epochs, c.learning_rate, c.x_max, c.exponent, c.seed, c.init_scale, c.threads
        )
    }
}

/// Ranked word list with counts; index 0 upward by descending count.
#[pyclass(module = "alphaemb")]
struct Vocabulary {
    inner: corpus::Vocabulary,
}

#[pymethods]
impl Vocabulary {
    #[staticmethod]
    #[pyo3(signature = (tokens, min_count=1))]
    fn build(tokens: Vec<String>, min_count: u64) -> PyResult<Self> {
        let inner = corpus::build_vocabulary(tokens, min_count).map_err(pyerr)?;
        Ok(Vocabulary { inner })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let inner = corpus::read_vocabulary(&path).map_err(pyerr)?;
        Ok(Vocabulary { inner })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        corpus::write_vocabulary(&path, &self.inner).map_err(pyerr)
    }

    #[getter]
    fn words(&self) -> Vec<String> {
        self.inner.words().to_vec()
    }

    #[getter]
    fn counts(&self) -> Vec<u64> {
        self.inner.counts().to_vec()
    }

    #[getter]
    fn unk_index(&self) -> usize {
        self.inner.unk_index()
    }

    #[getter]
    fn total_tokens(&self) -> u64 {
        self.inner.total_tokens()
    }

    fn index_of(&self, token: &str) -> Option<usize> {
        self.inner.index_of(token)
    }

    /// Index of the token, or the unknown slot when absent.
    fn lookup(&self, token: &str) -> usize {
        self.inner.lookup(token)
    }

    fn word(&self, i: usize) -> PyResult<String> {
        if i >= self.inner.n() {
            return Err(PyValueError::new_err(format!(
                "word index {i} out of range for vocabulary of {}",
                self.inner.n()
            )));
        }
        Ok(self.inner.word(i).to_string())
    }

    fn __contains__(&self, token: &str) -> bool {
        self.inner.contains(token)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!(
            "Vocabulary(n={}, total_tokens={})",
            self.inner.n(),
            self.inner.total_tokens()
        )
    }
}

/// Sparse nonnegative co-occurrence weights.
#[pyclass(module = "alphaemb")]
struct CooccurrenceMatrix {
    inner: corpus::CooccurrenceMatrix,
}

#[pymethods]
impl CooccurrenceMatrix {
    #[staticmethod]
    fn from_entries(n: usize, entries: Vec<(u32, u32, f64)>) -> PyResult<Self> {
        let inner = corpus::CooccurrenceMatrix::from_entries(n, entries).map_err(pyerr)?;
        Ok(CooccurrenceMatrix { inner })
    }

    /// Reads the binary entry file; the metadata sidecar is ignored here.
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let (inner, _) = corpus::read_cooccurrences(&path).map_err(pyerr)?;
        Ok(CooccurrenceMatrix { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn get(&self, row: usize, col: usize) -> f64 {
        self.inner.get(row, col)
    }

    fn entries(&self) -> Vec<(u32, u32, f64)> {
        self.inner.entries().to_vec()
    }

    fn row_sums(&self) -> Vec<f64> {
        self.inner.row_sums()
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn transpose(&self) -> Self {
        CooccurrenceMatrix {
            inner: self.inner.transpose(),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "CooccurrenceMatrix(n={}, entries={})",
            self.inner.n(),
            self.inner.len()
        )
    }
}

/// Center vectors, context vectors, and biases over a fixed word list.
#[pyclass(module = "alphaemb", skip_from_py_object)]
#[derive(Clone)]
struct EmbeddingModel {
    inner: trainer::EmbeddingModel,
}

#[pymethods]
impl EmbeddingModel {
    #[new]
    fn new(
        u: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        b: Vec<f64>,
        b_tilde: Vec<f64>,
        words: Vec<String>,
    ) -> PyResult<Self> {
        let u = matrix_from_rows(u, "u")?;
        let v = matrix_from_rows(v, "v")?;
        let inner = trainer::EmbeddingModel::new(
            u,
            v,
            DVector::from_vec(b),
            DVector::from_vec(b_tilde),
            words,
        )
        .map_err(pyerr)?;
        Ok(EmbeddingModel { inner })
    }

    /// Wraps word vectors that ship without context vectors; V is set
    /// equal to U and biases to zero.
    #[staticmethod]
    fn from_u_only(u: Vec<Vec<f64>>, words: Vec<String>) -> PyResult<Self> {
        let u = matrix_from_rows(u, "u")?;
        let inner = trainer::EmbeddingModel::from_u_only(u, words).map_err(pyerr)?;
        Ok(EmbeddingModel { inner })
    }

    /// Reads `<stem>.u.txt`, `<stem>.v.txt`, `<stem>.bias.txt`.
    #[staticmethod]
    fn read_text(stem: PathBuf) -> PyResult<Self> {
        let inner = trainer::read_model_text(&stem).map_err(pyerr)?;
        Ok(EmbeddingModel { inner })
    }

    #[staticmethod]
    fn read_binary(path: PathBuf) -> PyResult<Self> {
        let inner = trainer::read_model_binary(&path).map_err(pyerr)?;
        Ok(EmbeddingModel { inner })
    }

    /// Reads the one-file word-vector text format (word then d floats per
    /// line, optional header).
    #[staticmethod]
    fn read_glove(path: PathBuf) -> PyResult<Self> {
        let inner = trainer::read_glove_text(&path).map_err(pyerr)?;
        Ok(EmbeddingModel { inner })
    }

    fn write_text(&self, stem: PathBuf) -> PyResult<()> {
        trainer::write_model_text(&stem, &self.inner).map_err(pyerr)
    }

    fn write_binary(&self, path: PathBuf) -> PyResult<()> {
        trainer::write_model_binary(&path, &self.inner).map_err(pyerr)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn u(&self) -> Vec<Vec<f64>> {
        rows_from_matrix(&self.inner.u)
    }

    #[getter]
    fn v(&self) -> Vec<Vec<f64>> {
        rows_from_matrix(&self.inner.v)
    }

    #[getter]
    fn b(&self) -> Vec<f64> {
        self.inner.b.iter().copied().collect()
    }

    #[getter]
    fn b_tilde(&self) -> Vec<f64> {
        self.inner.b_tilde.iter().copied().collect()
    }

    #[getter]
    fn words(&self) -> Vec<String> {
        self.inner.words.clone()
    }

    fn index_of(&self, word: &str) -> Option<usize> {
        self.inner.index_map().get(word).copied()
    }

    /// Swaps center and context roles.
    fn mirrored(&self) -> Self {
        EmbeddingModel {
            inner: self.inner.mirrored(),
        }
    }

    /// Softmax conditional p(.|w) under the given shift mode.
    #[pyo3(signature = (w, shift="U"))]
    fn conditional(&self, w: usize, shift: &str) -> PyResult<Vec<f64>> {
        let mode = parse_shift(shift)?;
        let p = geometry::conditional_with_mode(&self.inner, w, mode).map_err(pyerr)?;
        Ok(p.as_vector().iter().copied().collect())
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("EmbeddingModel(n={}, d={})", self.inner.n(), self.inner.d())
    }
}

/// Reference distribution plus the shift mode used for conditionals.
#[pyclass(module = "alphaemb", skip_from_py_object)]
#[derive(Clone)]
struct ReferenceMeasure {
    inner: geometry::ReferenceMeasure,
}

#[pymethods]
impl ReferenceMeasure {
    #[getter]
    fn kind(&self) -> String {
        self.inner.kind.to_string()
    }

    #[getter]
    fn shift(&self) -> String {
        self.inner.shift_mode.to_string()
    }

    #[getter]
    fn p(&self) -> Vec<f64> {
        self.inner.p.as_vector().iter().copied().collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "ReferenceMeasure(kind='{}', shift='{}', n={})",
            self.inner.kind,
            self.inner.shift_mode,
            self.inner.p.len()
        )
    }
}

/// Embeddings for every vocabulary word at one (alpha, reference) pair.
#[pyclass(module = "alphaemb", skip_from_py_object)]
#[derive(Clone)]
struct AlphaEmbeddingSet {
    inner: alpha::AlphaEmbeddingSet,
}

#[pymethods]
impl AlphaEmbeddingSet {
    #[getter]
    fn vectors(&self) -> Vec<Vec<f64>> {
        rows_from_matrix(&self.inner.w)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha.value()
    }

    #[getter]
    fn stable(&self) -> bool {
        self.inner.stable
    }

    #[getter]
    fn words(&self) -> Vec<String> {
        self.inner.words.clone()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.w.nrows() {
            return Err(PyValueError::new_err(format!(
                "row {i} out of range for {} embeddings",
                self.inner.w.nrows()
            )));
        }
        Ok(self.inner.w.row(i).iter().copied().collect())
    }

    fn fisher_summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.fisher_summary().map_err(pyerr)?;
        let d = PyDict::new(py);
        d.set_item("dim", s.dim)?;
        d.set_item("effective_rank", s.effective_rank)?;
        d.set_item("eigenvalue_max", s.eigenvalue_max)?;
        d.set_item("eigenvalue_min", s.eigenvalue_min)?;
        Ok(d)
    }

    /// Rank candidates for d in a : b :: c : d by ascending offset norm,
    /// under the Fisher metric or the identity. Query words are excluded
    /// unless `include_queries` is set.
    #[pyo3(signature = (a, b, c, top=10, metric="fisher", include_queries=false))]
    fn analogy(
        &self,
        a: &str,
        b: &str,
        c: &str,
        top: usize,
        metric: &str,
        include_queries: bool,
    ) -> PyResult<Vec<(String, f64)>> {
        let find = |w: &str| {
            self.inner
                .words
                .iter()
                .position(|x| x == w)
                .ok_or_else(|| PyValueError::new_err(format!("word '{w}' not in the embedding set")))
        };
        let slots = [Some(find(a)?), Some(find(b)?), Some(find(c)?), None];
        let empty = std::collections::BTreeSet::new();
        let exclude = include_queries.then_some(&empty);
        let ranked = match metric {
            "fisher" | "F" => {
                let solver = FisherSolver::new(&self.inner.fisher).map_err(pyerr)?;
                measures::solve_analogy(&self.inner, &solver, slots, exclude).map_err(pyerr)?
            }
            "identity" | "I" => {
                measures::rank_by_kappa(&self.inner.w, None, slots, exclude).map_err(pyerr)?
            }
            other => {
                return Err(PyValueError::new_err(format!(
                    "metric must be 'fisher' or 'identity', got '{other}'"
                )))
            }
        };
        Ok(ranked
            .into_iter()
            .take(top)
            .map(|(i, k)| (self.inner.words[i].clone(), k))
            .collect())
    }

    /// Writes `<stem>.txt` plus the metadata sidecar.
    fn write(&self, stem: PathBuf) -> PyResult<()> {
        alpha::write_embeddings(&stem, &self.inner).map_err(pyerr)
    }

    fn __len__(&self) -> usize {
        self.inner.w.nrows()
    }

    fn __repr__(&self) -> String {
        format!(
            "AlphaEmbeddingSet(n={}, d={}, alpha={}, stable={})",
            self.inner.w.nrows(),
            self.inner.w.ncols(),
            self.inner.alpha,
            self.inner.stable
        )
    }
}

/// Similarity scorer for one parsed method name, e.g. `E-0-NI-PI`,
/// `LE-U-0-I`, `U`, `U+V-n`, or `p_data-cn`.
#[pyclass(module = "alphaemb")]
struct MethodScorer {
    inner: eval::MethodScorer,
}

#[pymethods]
impl MethodScorer {
    #[new]
    #[pyo3(signature = (method, model, counts=None, alpha=None))]
    fn new(
        method: &str,
        model: PyRef<'_, EmbeddingModel>,
        counts: Option<PyRef<'_, CooccurrenceMatrix>>,
        alpha: Option<f64>,
    ) -> PyResult<Self> {
        let method = parse_method(method)?;
        let alpha = alpha.map(parse_alpha).transpose()?;
        let inner = eval::MethodScorer::new(
            &method,
            &model.inner,
            counts.as_ref().map(|c| &c.inner),
            alpha,
        )
        .map_err(pyerr)?;
        Ok(MethodScorer { inner })
    }

    #[getter]
    fn method(&self) -> String {
        self.inner.method().to_string()
    }

    fn lookup(&self, word: &str) -> Option<usize> {
        self.inner.lookup(word)
    }

    fn score(&self, a: usize, b: usize) -> PyResult<f64> {
        self.inner.score(a, b).map_err(pyerr)
    }

    fn score_words(&self, a: &str, b: &str) -> PyResult<f64> {
        let find = |w: &str| {
            self.inner
                .lookup(w)
                .ok_or_else(|| PyValueError::new_err(format!("word '{w}' not in the model vocabulary")))
        };
        self.inner.score(find(a)?, find(b)?).map_err(pyerr)
    }

    fn __repr__(&self) -> String {
        format!("MethodScorer(method='{}')", self.inner.method())
    }
}

/// Word-pair dataset with human scores.
#[pyclass(module = "alphaemb")]
struct SimilarityDataset {
    inner: eval::SimilarityDataset,
}

#[pymethods]
impl SimilarityDataset {
    #[staticmethod]
    #[pyo3(signature = (path, name=None))]
    fn read(path: PathBuf, name: Option<String>) -> PyResult<Self> {
        let name = name.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".to_string())
        });
        let inner = eval::read_similarity_dataset(&path, &name).map_err(pyerr)?;
        Ok(SimilarityDataset { inner })
    }

    #[staticmethod]
    fn from_pairs(name: String, pairs: Vec<(String, String, f64)>) -> Self {
        SimilarityDataset {
            inner: eval::SimilarityDataset { name, pairs },
        }
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn pairs(&self) -> Vec<(String, String, f64)> {
        self.inner.pairs.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.pairs.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SimilarityDataset(name='{}', pairs={})",
            self.inner.name,
            self.inner.pairs.len()
        )
    }
}

/// Lowercase, strip punctuation, and drop stop words. `stop_words=None`
/// applies the built-in list; pass an explicit list (possibly empty) to
/// override it.
#[pyfunction]
#[pyo3(signature = (text, stop_words=None))]
fn preprocess(text: &str, stop_words: Option<Vec<String>>) -> Vec<String> {
    let config = match stop_words {
        None => corpus::PreprocessConfig::default(),
        Some(list) => corpus::PreprocessConfig::with_stop_words(list),
    };
    corpus::preprocess_str(text, &config)
}

#[pyfunction]
#[pyo3(signature = (tokens, min_count=1))]
fn build_vocabulary(tokens: Vec<String>, min_count: u64) -> PyResult<Vocabulary> {
    Vocabulary::build(tokens, min_count)
}

/// Windowed co-occurrence counts over token documents. Out-of-vocabulary
/// tokens count toward the unknown slot.
#[pyfunction]
#[pyo3(signature = (docs, vocab, window=10, weighting="harmonic", symmetric=true))]
fn count_cooccurrences(
    docs: Vec<Vec<String>>,
    vocab: PyRef<'_, Vocabulary>,
    window: usize,
    weighting: &str,
    symmetric: bool,
) -> PyResult<CooccurrenceMatrix> {
    let weighting = corpus::Weighting::from_str(weighting).map_err(pyerr)?;
    let inner = corpus::count_cooccurrences(&docs, &vocab.inner, window, weighting, symmetric)
        .map_err(pyerr)?;
    Ok(CooccurrenceMatrix { inner })
}

/// Fit a model to the counts. Returns the model and the per-epoch loss
/// trace. With the default single-threaded config the result is
/// bit-reproducible for a fixed seed.
#[pyfunction]
#[pyo3(signature = (counts, words, config=None))]
fn train(
    counts: PyRef<'_, CooccurrenceMatrix>,
    words: Vec<String>,
    config: Option<PyRef<'_, TrainConfig>>,
) -> PyResult<(EmbeddingModel, Vec<f64>)> {
    let config = config.map(|c| c.inner.clone()).unwrap_or_default();
    let (model, trace) = trainer::train(&counts.inner, words, &config).map_err(pyerr)?;
    Ok((EmbeddingModel { inner: model }, trace))
}

/// Build the reference distribution: kind '0' (uniform), 'u' (model
/// unigram), or 'ud' (data unigram, needs counts).
#[pyfunction]
#[pyo3(signature = (model, kind="0", shift="U", counts=None))]
fn reference_measure(
    model: PyRef<'_, EmbeddingModel>,
    kind: &str,
    shift: &str,
    counts: Option<PyRef<'_, CooccurrenceMatrix>>,
) -> PyResult<ReferenceMeasure> {
    let kind = parse_reference(kind)?;
    let shift = parse_shift(shift)?;
    let inner = alpha::reference_measure(
        &model.inner,
        kind,
        shift,
        counts.as_ref().map(|c| &c.inner),
    )
    .map_err(pyerr)?;
    Ok(ReferenceMeasure { inner })
}

/// Embed the whole vocabulary at one alpha. Infinite alpha selects the
/// limit direction; `stable=None` picks the form automatically.
#[pyfunction]
#[pyo3(signature = (model, reference, alpha=1.0, stable=None))]
fn embed_all(
    model: PyRef<'_, EmbeddingModel>,
    reference: PyRef<'_, ReferenceMeasure>,
    alpha: f64,
    stable: Option<bool>,
) -> PyResult<AlphaEmbeddingSet> {
    let alpha = parse_alpha(alpha)?;
    let inner =
        alpha::embed_all(&model.inner, &reference.inner, alpha, stable).map_err(pyerr)?;
    Ok(AlphaEmbeddingSet { inner })
}

/// Embedding of a single word; see `embed_all`.
#[pyfunction]
#[pyo3(signature = (model, w, reference, alpha=1.0, stable=None))]
fn alpha_embedding(
    model: PyRef<'_, EmbeddingModel>,
    w: usize,
    reference: PyRef<'_, ReferenceMeasure>,
    alpha: f64,
    stable: Option<bool>,
) -> PyResult<Vec<f64>> {
    let alpha = parse_alpha(alpha)?;
    if !alpha.is_finite() {
        let v = alpha::limit_embedding(&model.inner, w, &reference.inner).map_err(pyerr)?;
        return Ok(v.iter().copied().collect());
    }
    let stable = stable.unwrap_or_else(|| alpha::default_stable(alpha));
    let v = alpha::alpha_embedding(&model.inner, w, &reference.inner, alpha, stable)
        .map_err(pyerr)?;
    Ok(v.iter().copied().collect())
}

/// Direction the embeddings of w converge to as alpha goes to minus
/// infinity.
#[pyfunction]
fn limit_embedding(
    model: PyRef<'_, EmbeddingModel>,
    w: usize,
    reference: PyRef<'_, ReferenceMeasure>,
) -> PyResult<Vec<f64>> {
    let v = alpha::limit_embedding(&model.inner, w, &reference.inner).map_err(pyerr)?;
    Ok(v.iter().copied().collect())
}

#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    eval::spearman(&x, &y).map_err(pyerr)
}

/// Score one dataset with one scorer. Pairs with out-of-vocabulary words
/// are skipped and counted.
#[pyfunction]
fn eval_similarity<'py>(
    py: Python<'py>,
    scorer: PyRef<'_, MethodScorer>,
    dataset: PyRef<'_, SimilarityDataset>,
) -> PyResult<Bound<'py, PyDict>> {
    let report = eval::eval_similarity(&scorer.inner, &dataset.inner).map_err(pyerr)?;
    let d = PyDict::new(py);
    d.set_item("method", report.method)?;
    d.set_item("dataset", report.dataset)?;
    d.set_item("correlation", report.correlation)?;
    d.set_item("evaluated", report.evaluated)?;
    d.set_item("skipped", report.skipped)?;
    Ok(d)
}

/// Evaluate methods on datasets over an inclusive alpha grid. Returns the
/// grid and one curve dict per (method, dataset).
#[pyfunction]
#[pyo3(signature = (methods, datasets, model, counts=None, alpha_min=-5.0, alpha_max=5.0, alpha_step=0.2))]
#[allow(clippy::too_many_arguments)]
fn alpha_sweep<'py>(
    py: Python<'py>,
    methods: Vec<String>,
    datasets: Vec<PyRef<'_, SimilarityDataset>>,
    model: PyRef<'_, EmbeddingModel>,
    counts: Option<PyRef<'_, CooccurrenceMatrix>>,
    alpha_min: f64,
    alpha_max: f64,
    alpha_step: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let methods: Vec<SimilarityMethod> = methods
        .iter()
        .map(|m| parse_method(m))
        .collect::<PyResult<_>>()?;
    let datasets: Vec<eval::SimilarityDataset> =
        datasets.iter().map(|d| d.inner.clone()).collect();
    let grid = eval::SweepGrid {
        min: alpha_min,
        max: alpha_max,
        step: alpha_step,
    };
    let result = eval::alpha_sweep(
        &methods,
        &datasets,
        &grid,
        &model.inner,
        counts.as_ref().map(|c| &c.inner),
    )
    .map_err(pyerr)?;
    let out = PyDict::new(py);
    out.set_item("alphas", result.alphas)?;
    let curves: Vec<Bound<'py, PyDict>> = result
        .curves
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("method", &c.method)?;
            d.set_item("dataset", &c.dataset)?;
            d.set_item("values", &c.values)?;
            d.set_item("evaluated", c.evaluated)?;
            d.set_item("skipped", c.skipped)?;
            d.set_item("best_value", c.best_value)?;
            d.set_item("best_alpha", c.best_alpha)?;
            Ok(d)
        })
        .collect::<PyResult<_>>()?;
    out.set_item("curves", curves)?;
    Ok(out)
}

#[pymodule]
fn alphaemb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<TrainConfig>()?;
    m.add_class::<Vocabulary>()?;
    m.add_class::<CooccurrenceMatrix>()?;
    m.add_class::<EmbeddingModel>()?;
    m.add_class::<ReferenceMeasure>()?;
    m.add_class::<AlphaEmbeddingSet>()?;
    m.add_class::<MethodScorer>()?;
    m.add_class::<SimilarityDataset>()?;
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(build_vocabulary, m)?)?;
    m.add_function(wrap_pyfunction!(count_cooccurrences, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(reference_measure, m)?)?;
    m.add_function(wrap_pyfunction!(embed_all, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_embedding, m)?)?;
    m.add_function(wrap_pyfunction!(limit_embedding, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(eval_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_sweep, m)?)?;
    Ok(())
}
