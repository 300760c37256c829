//! Benchmark harness: similarity datasets scored by Spearman correlation,
//! analogy accuracy, α-sweeps with per-method argmax, and 2D PCA exports.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::alpha::{embed_all, reference_measure, AlphaEmbeddingSet};
use crate::corpus::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::geometry::{Alpha, FisherSolver};
use crate::measures::{
    alpha_cosine_with_solver, baseline_cosine, column_normalized, rank_by_kappa, u_plus_v_half,
    MethodSource, PDataCn, SimilarityMethod,
};
use crate::trainer::EmbeddingModel;
use crate::util::kahan_sum;

#[derive(Clone, Debug)]
pub struct SimilarityDataset {
    pub name: String,
    /// (word1, word2, human score), words case-folded.
    pub pairs: Vec<(String, String, f64)>,
}

#[derive(Clone, Debug)]
pub struct AnalogyDataset {
    /// Section name and its (a, b, c, gold) quadruples, case-folded.
    pub sections: Vec<(String, Vec<[String; 4]>)>,
}

/// Whitespace or tab separated lines `w1 w2 score`. Lines starting with `#`
/// are ignored. Words are lowercased to match corpus preprocessing.
pub fn read_similarity_dataset(path: &Path, name: &str) -> Result<SimilarityDataset> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(format!("open {display}"), e))?;
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("read {display}"), e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse = |message: String| Error::Parse {
            path: display.clone(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [w1, w2, score] = fields.as_slice() else {
            return Err(parse(format!(
                "expected `w1 w2 score`, got {} fields",
                fields.len()
            )));
        };
        let score: f64 = score
            .parse()
            .map_err(|_| parse(format!("score `{score}` is not a number")))?;
        if !score.is_finite() {
            return Err(parse(format!("score `{score}` is not finite")));
        }
        pairs.push((w1.to_lowercase(), w2.to_lowercase(), score));
    }
    if pairs.is_empty() {
        return Err(Error::Domain {
            what: "similarity dataset",
            requirement: "at least one pair",
            got: format!("empty file {display}"),
        });
    }
    Ok(SimilarityDataset {
        name: name.to_string(),
        pairs,
    })
}

/// Question-words format: `: section-name` headers followed by four-token
/// analogy lines `a b c d`. Tokens are lowercased; each line must hold four
/// distinct tokens. Quadruples before any header land in section `default`.
pub fn read_analogy_dataset(path: &Path) -> Result<AnalogyDataset> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(format!("open {display}"), e))?;
    let mut sections: Vec<(String, Vec<[String; 4]>)> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("read {display}"), e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse = |message: String| Error::Parse {
            path: display.clone(),
            line: i + 1,
            message,
        };
        if let Some(name) = line.strip_prefix(':') {
            sections.push((name.trim().to_string(), Vec::new()));
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [a, b, c, d] = fields.as_slice() else {
            return Err(parse(format!(
                "expected four tokens, got {}",
                fields.len()
            )));
        };
        let quad = [a, b, c, d].map(|w| w.to_lowercase());
        for i in 0..4 {
            for j in i + 1..4 {
                if quad[i] == quad[j] {
                    return Err(parse(format!("repeated token `{}`", quad[i])));
                }
            }
        }
        if sections.is_empty() {
            sections.push(("default".to_string(), Vec::new()));
        }
        sections.last_mut().unwrap().1.push(quad);
    }
    if sections.iter().all(|(_, quads)| quads.is_empty()) {
        return Err(Error::Domain {
            what: "analogy dataset",
            requirement: "at least one quadruple",
            got: format!("empty file {display}"),
        });
    }
    Ok(AnalogyDataset { sections })
}

fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        // 1-based positions i+1 ..= j+1 share the average rank.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Rank correlation: Pearson correlation of average ranks, so ties are
/// handled and any strictly monotone transform of either list is a no-op.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain {
            what: "correlation input",
            requirement: "two equal-length lists of at least 2 values",
            got: format!("lengths {} and {}", x.len(), y.len()),
        });
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = rx.len() as f64;
    let mx = kahan_sum(rx.iter().copied()) / n;
    let my = kahan_sum(ry.iter().copied()) / n;
    let sxx = kahan_sum(rx.iter().map(|v| (v - mx) * (v - mx)));
    let syy = kahan_sum(ry.iter().map(|v| (v - my) * (v - my)));
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::UndefinedCorrelation(
            "an input list is constant, so ranks have zero variance",
        ));
    }
    let sxy = kahan_sum(rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)));
    Ok(sxy / (sxx * syy).sqrt())
}

enum ScorerKind {
    Embedding {
        set: AlphaEmbeddingSet,
        solver: Option<FisherSolver>,
    },
    Vectors(DMatrix<f64>),
    Counts(PDataCn),
}

/// A similarity method prepared against concrete model artifacts: embeddings
/// computed, Fisher solver factored, baseline matrices materialized.
pub struct MethodScorer {
    method: SimilarityMethod,
    index: HashMap<String, usize>,
    kind: ScorerKind,
}

fn word_index(words: &[String]) -> HashMap<String, usize> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect()
}

impl MethodScorer {
    /// `alpha` feeds α-dependent methods when the method itself carries none;
    /// limit and baseline methods ignore it.
    pub fn new(
        method: &SimilarityMethod,
        model: &EmbeddingModel,
        counts: Option<&CooccurrenceMatrix>,
        alpha: Option<Alpha>,
    ) -> Result<Self> {
        let kind = match method.source {
            MethodSource::AlphaEmbedding | MethodSource::Limit => {
                let alpha = if method.source == MethodSource::Limit {
                    Alpha::new(f64::NEG_INFINITY)?
                } else {
                    method.alpha.or(alpha).ok_or(Error::Domain {
                        what: "similarity method",
                        requirement: "an alpha value for alpha-dependent methods",
                        got: "none".to_string(),
                    })?
                };
                let reference = reference_measure(
                    model,
                    method.reference.unwrap(),
                    method.shift_mode,
                    counts,
                )?;
                let set = embed_all(model, &reference, alpha, None)?;
                let solver = if method.needs_fisher() {
                    Some(FisherSolver::new(&set.fisher)?)
                } else {
                    None
                };
                ScorerKind::Embedding { set, solver }
            }
            MethodSource::BaselineU => ScorerKind::Vectors(model.u.clone()),
            MethodSource::BaselineUPlusVN => {
                ScorerKind::Vectors(column_normalized(&u_plus_v_half(model)))
            }
            MethodSource::PDataCn => {
                let counts = counts.ok_or(Error::MissingCooccurrence("p_data-cn"))?;
                if counts.n() != model.n() {
                    return Err(Error::Domain {
                        what: "co-occurrence matrix",
                        requirement: "same vocabulary as the model",
                        got: format!("{} vs {}", counts.n(), model.n()),
                    });
                }
                ScorerKind::Counts(PDataCn::new(counts))
            }
        };
        Ok(MethodScorer {
            method: method.clone(),
            index: word_index(&model.words),
            kind,
        })
    }

    /// Score precomputed embeddings, e.g. loaded from disk.
    pub fn from_embeddings(set: AlphaEmbeddingSet, method: &SimilarityMethod) -> Result<Self> {
        if !method.needs_embeddings() {
            return Err(Error::Domain {
                what: "similarity method",
                requirement: "an embedding-based method",
                got: method.to_string(),
            });
        }
        let solver = if method.needs_fisher() {
            Some(FisherSolver::new(&set.fisher)?)
        } else {
            None
        };
        Ok(MethodScorer {
            method: method.clone(),
            index: word_index(&set.words),
            kind: ScorerKind::Embedding { set, solver },
        })
    }

    pub fn method(&self) -> &SimilarityMethod {
        &self.method
    }

    pub fn lookup(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn score(&self, a: usize, b: usize) -> Result<f64> {
        match &self.kind {
            ScorerKind::Embedding { set, solver } => {
                alpha_cosine_with_solver(a, b, set, &self.method, solver.as_ref())
            }
            ScorerKind::Vectors(m) => baseline_cosine(a, b, m, false),
            ScorerKind::Counts(table) => table.similarity(a, b),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimilarityReport {
    pub method: String,
    pub dataset: String,
    pub correlation: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Spearman correlation between human scores and method scores. Pairs with
/// an out-of-vocabulary word are skipped and counted, never substituted.
pub fn eval_similarity(
    scorer: &MethodScorer,
    dataset: &SimilarityDataset,
) -> Result<SimilarityReport> {
    let resolved: Vec<Option<(usize, usize, f64)>> = dataset
        .pairs
        .iter()
        .map(|(w1, w2, score)| Some((scorer.lookup(w1)?, scorer.lookup(w2)?, *score)))
        .collect();
    let skipped = resolved.iter().filter(|r| r.is_none()).count();
    let kept: Vec<(usize, usize, f64)> = resolved.into_iter().flatten().collect();
    if kept.is_empty() {
        return Err(Error::EmptyEvaluation { skipped });
    }
    let scored: Vec<(f64, f64)> = kept
        .par_iter()
        .map(|&(a, b, human)| Ok((human, scorer.score(a, b)?)))
        .collect::<Result<_>>()?;
    let human: Vec<f64> = scored.iter().map(|&(h, _)| h).collect();
    let predicted: Vec<f64> = scored.iter().map(|&(_, p)| p).collect();
    Ok(SimilarityReport {
        method: scorer.method.to_string(),
        dataset: dataset.name.clone(),
        correlation: spearman(&human, &predicted)?,
        evaluated: kept.len(),
        skipped,
    })
}

/// Candidate ranking for analogy queries, either κ over α-embeddings or
/// Euclidean offset distance over bare vectors.
pub struct AnalogyRanker<'a> {
    w: &'a DMatrix<f64>,
    solver: Option<&'a FisherSolver>,
    index: HashMap<String, usize>,
}

impl<'a> AnalogyRanker<'a> {
    pub fn from_embeddings(set: &'a AlphaEmbeddingSet, solver: &'a FisherSolver) -> Self {
        AnalogyRanker {
            w: &set.w,
            solver: Some(solver),
            index: word_index(&set.words),
        }
    }

    pub fn from_vectors(w: &'a DMatrix<f64>, words: &[String]) -> Self {
        AnalogyRanker {
            w,
            solver: None,
            index: word_index(words),
        }
    }

    pub fn lookup(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Best candidate for d in a : b :: c : d, excluding the query words.
    pub fn top_candidate(&self, a: usize, b: usize, c: usize) -> Result<Option<(usize, f64)>> {
        let ranked = rank_by_kappa(
            self.w,
            self.solver,
            [Some(a), Some(b), Some(c), None],
            None,
        )?;
        Ok(ranked.into_iter().next())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionResult {
    pub name: String,
    pub correct: usize,
    pub evaluated: usize,
    pub skipped: usize,
    /// None when every quadruple was skipped.
    pub accuracy: Option<f64>,
}

impl SectionResult {
    fn new(name: String, correct: usize, evaluated: usize, skipped: usize) -> Self {
        let accuracy = (evaluated > 0).then(|| correct as f64 / evaluated as f64);
        SectionResult {
            name,
            correct,
            evaluated,
            skipped,
            accuracy,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalogyReport {
    pub sections: Vec<SectionResult>,
    pub total: SectionResult,
}

/// Accuracy of top-1 analogy completion per section and overall. Quadruples
/// with any out-of-vocabulary word are skipped and counted.
pub fn eval_analogy(ranker: &AnalogyRanker, dataset: &AnalogyDataset) -> Result<AnalogyReport> {
    let mut sections = Vec::new();
    let (mut correct_t, mut evaluated_t, mut skipped_t) = (0, 0, 0);
    for (name, quads) in &dataset.sections {
        let resolved: Vec<Option<[usize; 4]>> = quads
            .iter()
            .map(|q| {
                let mut ids = [0usize; 4];
                for (slot, word) in ids.iter_mut().zip(q) {
                    *slot = ranker.lookup(word)?;
                }
                Some(ids)
            })
            .collect();
        let skipped = resolved.iter().filter(|r| r.is_none()).count();
        let kept: Vec<[usize; 4]> = resolved.into_iter().flatten().collect();
        let correct = kept
            .par_iter()
            .map(|&[a, b, c, gold]| {
                Ok(match ranker.top_candidate(a, b, c)? {
                    Some((winner, _)) => (winner == gold) as usize,
                    None => 0,
                })
            })
            .try_reduce(|| 0, |x, y| Ok(x + y))?;
        correct_t += correct;
        evaluated_t += kept.len();
        skipped_t += skipped;
        sections.push(SectionResult::new(name.clone(), correct, kept.len(), skipped));
    }
    Ok(AnalogyReport {
        sections,
        total: SectionResult::new("total".to_string(), correct_t, evaluated_t, skipped_t),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl SweepGrid {
    /// Inclusive grid min, min+step, ..., max. Decimal grids snap to exact
    /// decimal values so −5..5 by 0.2 yields 4.8, not 4.800000000000001.
    pub fn alphas(&self) -> Result<Vec<f64>> {
        let SweepGrid { min, max, step } = *self;
        if !(min.is_finite() && max.is_finite() && step.is_finite()) || max < min {
            return Err(Error::Domain {
                what: "alpha grid",
                requirement: "finite bounds with min <= max",
                got: format!("[{min}, {max}] step {step}"),
            });
        }
        if min == max {
            return Ok(vec![min]);
        }
        if step <= 0.0 {
            return Err(Error::Domain {
                what: "alpha grid step",
                requirement: "positive",
                got: step.to_string(),
            });
        }
        let near_int = |x: f64| (x - x.round()).abs() < 1e-6;
        for scale in [1.0, 10.0, 100.0, 1_000.0, 10_000.0] {
            let (a, b, s) = (min * scale, max * scale, step * scale);
            if near_int(a) && near_int(b) && near_int(s) {
                let (a, b, s) = (a.round() as i64, b.round() as i64, s.round() as i64);
                return Ok((a..=b).step_by(s as usize).map(|k| k as f64 / scale).collect());
            }
        }
        let count = ((max - min) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| min + k as f64 * step).collect())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCurve {
    pub method: String,
    pub dataset: String,
    /// One correlation per grid α, in grid order.
    pub values: Vec<f64>,
    pub evaluated: usize,
    pub skipped: usize,
    pub best_value: f64,
    pub best_alpha: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub alphas: Vec<f64>,
    pub curves: Vec<SweepCurve>,
}

fn best_point(alphas: &[f64], values: &[f64]) -> (f64, f64) {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    (values[best], alphas[best])
}

/// Evaluate every method on every dataset at every grid α. α-dependent
/// methods get embeddings recomputed per α; the rest produce flat curves.
pub fn alpha_sweep(
    methods: &[SimilarityMethod],
    datasets: &[SimilarityDataset],
    grid: &SweepGrid,
    model: &EmbeddingModel,
    counts: Option<&CooccurrenceMatrix>,
) -> Result<SweepResult> {
    let alphas = grid.alphas()?;
    let mut curves = Vec::new();
    for method in methods {
        let mut per_dataset: Vec<(Vec<f64>, usize, usize)> =
            vec![(Vec::new(), 0, 0); datasets.len()];
        if method.alpha_dependent() {
            for &alpha in &alphas {
                let scorer = MethodScorer::new(method, model, counts, Some(Alpha::new(alpha)?))?;
                for (slot, dataset) in per_dataset.iter_mut().zip(datasets) {
                    let report = eval_similarity(&scorer, dataset)?;
                    slot.0.push(report.correlation);
                    slot.1 = report.evaluated;
                    slot.2 = report.skipped;
                }
            }
        } else {
            let scorer = MethodScorer::new(method, model, counts, None)?;
            for (slot, dataset) in per_dataset.iter_mut().zip(datasets) {
                let report = eval_similarity(&scorer, dataset)?;
                slot.0 = vec![report.correlation; alphas.len()];
                slot.1 = report.evaluated;
                slot.2 = report.skipped;
            }
        }
        for ((values, evaluated, skipped), dataset) in per_dataset.into_iter().zip(datasets) {
            let (best_value, best_alpha) = best_point(&alphas, &values);
            curves.push(SweepCurve {
                method: method.to_string(),
                dataset: dataset.name.clone(),
                values,
                evaluated,
                skipped,
                best_value,
                best_alpha,
            });
        }
    }
    Ok(SweepResult { alphas, curves })
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Long form, one row per method × dataset × α.
pub fn write_sweep_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let file = File::create(path)
        .map_err(|e| Error::io(format!("create {}", path.display()), e))?;
    let mut out = BufWriter::new(file);
    let io_err = |e| Error::io(format!("write {}", path.display()), e);
    writeln!(out, "method,dataset,alpha,value").map_err(io_err)?;
    for curve in &result.curves {
        for (alpha, value) in result.alphas.iter().zip(&curve.values) {
            writeln!(
                out,
                "{},{},{alpha},{value}",
                csv_field(&curve.method),
                csv_field(&curve.dataset),
            )
            .map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

#[derive(Serialize)]
struct SweepSummaryEntry<'a> {
    method: &'a str,
    dataset: &'a str,
    evaluated: usize,
    skipped: usize,
    best_value: f64,
    best_alpha: f64,
    /// Correlation ×100 with the argmax α in parentheses.
    display: String,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    alphas: &'a [f64],
    results: Vec<SweepSummaryEntry<'a>>,
}

pub fn write_sweep_summary_json(path: &Path, result: &SweepResult) -> Result<()> {
    let summary = SweepSummary {
        alphas: &result.alphas,
        results: result
            .curves
            .iter()
            .map(|c| SweepSummaryEntry {
                method: &c.method,
                dataset: &c.dataset,
                evaluated: c.evaluated,
                skipped: c.skipped,
                best_value: c.best_value,
                best_alpha: c.best_alpha,
                display: format!("{:.2} ({})", 100.0 * c.best_value, c.best_alpha),
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("sweep summary serializes");
    std::fs::write(path, json + "\n")
        .map_err(|e| Error::io(format!("write {}", path.display()), e))
}

#[derive(Clone, Debug)]
pub struct PcaProjection {
    /// Selected rows projected onto the top-2 principal axes, row order
    /// matching the selection.
    pub coords: DMatrix<f64>,
    /// The two axes as unit columns, largest-magnitude loading positive.
    pub components: DMatrix<f64>,
    pub eigenvalues: [f64; 2],
    pub mean: DVector<f64>,
}

/// Sample covariance PCA of the selected rows, top two components.
pub fn pca_project(rows: &DMatrix<f64>, select: &[usize]) -> Result<PcaProjection> {
    let k = select.len();
    if k < 3 {
        return Err(Error::InsufficientPoints(k));
    }
    for &i in select {
        if i >= rows.nrows() {
            return Err(Error::WordIndexOutOfRange {
                index: i,
                size: rows.nrows(),
            });
        }
    }
    let d = rows.ncols();
    if d < 2 {
        return Err(Error::Domain {
            what: "PCA input",
            requirement: "at least 2 dimensions",
            got: d.to_string(),
        });
    }
    let mut x = DMatrix::zeros(k, d);
    for (r, &i) in select.iter().enumerate() {
        x.row_mut(r).copy_from(&rows.row(i));
    }
    let mean = DVector::from_fn(d, |j, _| kahan_sum(x.column(j).iter().copied()) / k as f64);
    for mut row in x.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = x.transpose() * &x / (k - 1) as f64;
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut components = DMatrix::zeros(d, 2);
    let mut eigenvalues = [0.0; 2];
    for c in 0..2 {
        let mut axis = eig.eigenvectors.column(order[c]).clone_owned();
        let lead = axis
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.abs().total_cmp(&b.abs()).then(j.cmp(i)))
            .map(|(i, _)| i)
            .unwrap();
        if axis[lead] < 0.0 {
            axis = -axis;
        }
        components.set_column(c, &axis);
        eigenvalues[c] = eig.eigenvalues[order[c]];
    }
    Ok(PcaProjection {
        coords: x * &components,
        components,
        eigenvalues,
        mean,
    })
}

/// `word,x,y` rows for plotting, words in selection order.
pub fn write_pca_csv(path: &Path, words: &[String], projection: &PcaProjection) -> Result<()> {
    if words.len() != projection.coords.nrows() {
        return Err(Error::Domain {
            what: "PCA export",
            requirement: "one word per projected row",
            got: format!(
                "{} words, {} rows",
                words.len(),
                projection.coords.nrows()
            ),
        });
    }
    let file = File::create(path)
        .map_err(|e| Error::io(format!("create {}", path.display()), e))?;
    let mut out = BufWriter::new(file);
    let io_err = |e| Error::io(format!("write {}", path.display()), e);
    writeln!(out, "word,x,y").map_err(io_err)?;
    for (i, word) in words.iter().enumerate() {
        writeln!(
            out,
            "{},{},{}",
            csv_field(word),
            projection.coords[(i, 0)],
            projection.coords[(i, 1)]
        )
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
