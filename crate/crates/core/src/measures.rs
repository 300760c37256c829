//! Similarity and analogy measures over embedding sets: metric-variant
//! cosines, the analogy measure κ with its solver, and literature baselines.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::alpha::AlphaEmbeddingSet;
use crate::corpus::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::geometry::{conditional_with_mode, Alpha, FisherSolver, ReferenceKind, ShiftMode};
use crate::trainer::EmbeddingModel;
use crate::util::{kahan_sum, KahanAccumulator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Identity,
    Fisher,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodSource {
    /// α-embedding rows, metric variants per the method name.
    AlphaEmbedding,
    /// Limit embedding rows; one metric serves both norm and product.
    Limit,
    /// Plain cosine on U rows.
    BaselineU,
    /// Cosine on column-normalized (U+V)/2 rows.
    BaselineUPlusVN,
    /// Centered-normalized conditional rows estimated from counts.
    PDataCn,
}

/// A parsed similarity method name such as `E-0-NI-PI`, `E+-u-NF-PF`,
/// `LE-U+V-ud-F`, `U`, `U+V-n`, or `p_data-cn`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMethod {
    pub source: MethodSource,
    pub reference: Option<ReferenceKind>,
    pub shift_mode: ShiftMode,
    pub alpha: Option<Alpha>,
    pub norm_metric: Metric,
    pub product_metric: Metric,
}

impl SimilarityMethod {
    pub fn with_alpha(mut self, alpha: Alpha) -> Self {
        self.alpha = Some(alpha);
        self
    }

    /// Methods whose value changes with α.
    pub fn alpha_dependent(&self) -> bool {
        self.source == MethodSource::AlphaEmbedding
    }

    pub fn needs_embeddings(&self) -> bool {
        matches!(
            self.source,
            MethodSource::AlphaEmbedding | MethodSource::Limit
        )
    }

    pub fn needs_fisher(&self) -> bool {
        self.norm_metric == Metric::Fisher || self.product_metric == Metric::Fisher
    }

    pub fn needs_counts(&self) -> bool {
        self.source == MethodSource::PDataCn
            || self.reference == Some(ReferenceKind::DataUnigramUd)
    }
}

impl std::fmt::Display for SimilarityMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.source {
            MethodSource::BaselineU => write!(f, "U"),
            MethodSource::BaselineUPlusVN => write!(f, "U+V-n"),
            MethodSource::PDataCn => write!(f, "p_data-cn"),
            MethodSource::AlphaEmbedding => {
                let plus = if self.shift_mode == ShiftMode::UPlusV {
                    "+"
                } else {
                    ""
                };
                let n = if self.norm_metric == Metric::Fisher {
                    "NF"
                } else {
                    "NI"
                };
                let p = if self.product_metric == Metric::Fisher {
                    "PF"
                } else {
                    "PI"
                };
                write!(f, "E{plus}-{}-{n}-{p}", self.reference.unwrap())
            }
            MethodSource::Limit => {
                let m = if self.norm_metric == Metric::Fisher {
                    "F"
                } else {
                    "I"
                };
                write!(f, "LE-{}-{}-{m}", self.shift_mode, self.reference.unwrap())
            }
        }
    }
}

impl std::str::FromStr for SimilarityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = |msg: &str| Error::InvalidMethod(s.to_string(), msg.to_string());
        let baseline = |source| SimilarityMethod {
            source,
            reference: None,
            shift_mode: ShiftMode::U,
            alpha: None,
            norm_metric: Metric::Identity,
            product_metric: Metric::Identity,
        };
        match s {
            "U" => return Ok(baseline(MethodSource::BaselineU)),
            "U+V-n" => return Ok(baseline(MethodSource::BaselineUPlusVN)),
            "p_data-cn" => return Ok(baseline(MethodSource::PDataCn)),
            _ => {}
        }
        let parts: Vec<&str> = s.split('-').collect();
        match parts.as_slice() {
            [head @ ("E" | "E+"), reference, norm, product] => {
                let reference: ReferenceKind = reference
                    .parse()
                    .map_err(|_| invalid("reference must be one of 0|u|ud"))?;
                let norm_metric = match *norm {
                    "NI" => Metric::Identity,
                    "NF" => Metric::Fisher,
                    _ => return Err(invalid("normalization must be NI or NF")),
                };
                let product_metric = match *product {
                    "PI" => Metric::Identity,
                    "PF" => Metric::Fisher,
                    _ => return Err(invalid("product must be PI or PF")),
                };
                if norm_metric == Metric::Identity && product_metric == Metric::Fisher {
                    return Err(invalid("NI-PF is not a defined variant"));
                }
                Ok(SimilarityMethod {
                    source: MethodSource::AlphaEmbedding,
                    reference: Some(reference),
                    shift_mode: if *head == "E+" {
                        ShiftMode::UPlusV
                    } else {
                        ShiftMode::U
                    },
                    alpha: None,
                    norm_metric,
                    product_metric,
                })
            }
            ["LE", shift, reference, metric] => {
                let shift_mode: ShiftMode = shift
                    .parse()
                    .map_err(|_| invalid("limit shift must be U or U+V"))?;
                let reference: ReferenceKind = reference
                    .parse()
                    .map_err(|_| invalid("reference must be one of 0|u|ud"))?;
                let metric = match *metric {
                    "I" => Metric::Identity,
                    "F" => Metric::Fisher,
                    _ => return Err(invalid("limit metric must be I or F")),
                };
                Ok(SimilarityMethod {
                    source: MethodSource::Limit,
                    reference: Some(reference),
                    shift_mode,
                    alpha: None,
                    norm_metric: metric,
                    product_metric: metric,
                })
            }
            _ => Err(invalid(
                "expected E[+]-<ref>-<NI|NF>-<PI|PF>, LE-<U|U+V>-<ref>-<I|F>, U, U+V-n, or p_data-cn",
            )),
        }
    }
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(Error::WordIndexOutOfRange { index: i, size: n });
    }
    Ok(())
}

fn metric_inner(
    metric: Metric,
    solver: Option<&FisherSolver>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> f64 {
    match metric {
        Metric::Identity => x.dot(y),
        Metric::Fisher => solver.expect("Fisher metric requires a solver").inner(x, y),
    }
}

fn metric_norm(metric: Metric, solver: Option<&FisherSolver>, x: &DVector<f64>) -> f64 {
    match metric {
        Metric::Identity => x.norm(),
        Metric::Fisher => solver.expect("Fisher metric requires a solver").norm(x),
    }
}

/// ⟨W(a), W(b)⟩_P / (‖W(a)‖_N ‖W(b)‖_N) with N and P chosen by the method.
/// Builds a Fisher solver on demand; use [`alpha_cosine_with_solver`] when
/// scoring many pairs.
pub fn alpha_cosine(
    a: usize,
    b: usize,
    set: &AlphaEmbeddingSet,
    method: &SimilarityMethod,
) -> Result<f64> {
    let solver = if method.needs_fisher() {
        Some(FisherSolver::new(&set.fisher)?)
    } else {
        None
    };
    alpha_cosine_with_solver(a, b, set, method, solver.as_ref())
}

pub fn alpha_cosine_with_solver(
    a: usize,
    b: usize,
    set: &AlphaEmbeddingSet,
    method: &SimilarityMethod,
    solver: Option<&FisherSolver>,
) -> Result<f64> {
    let n = set.w.nrows();
    check_index(a, n)?;
    check_index(b, n)?;
    let wa = set.w.row(a).transpose();
    let wb = set.w.row(b).transpose();
    let na = metric_norm(method.norm_metric, solver, &wa);
    let nb = metric_norm(method.norm_metric, solver, &wb);
    if !(na > 0.0) || !(nb > 0.0) {
        let zero = if na > 0.0 { b } else { a };
        return Err(Error::UndefinedSimilarity(format!(
            "word index {zero} has a zero-norm embedding"
        )));
    }
    Ok(metric_inner(method.product_metric, solver, &wa, &wb) / (na * nb))
}

/// κ(a,b,c,d) = ‖W(b) − W(a) − W(d) + W(c)‖ in the regularized Fisher norm.
/// Zero exactly when the four projections close a parallelogram.
pub fn analogy_kappa(
    set: &AlphaEmbeddingSet,
    solver: &FisherSolver,
    a: usize,
    b: usize,
    c: usize,
    d: usize,
) -> f64 {
    let row = |i: usize| set.w.row(i).transpose();
    let x = row(b) - row(a) - row(d) + row(c);
    solver.norm(&x)
}

/// One analogy query with exactly one unknown slot in κ(a,b,c,d) order.
pub type AnalogySlots = [Option<usize>; 4];

/// Rank every candidate word for the unknown slot by ascending κ. Ties keep
/// index order. `exclude: None` removes the three query words, matching the
/// standard evaluation protocol; pass an explicit set to override.
pub fn solve_analogy(
    set: &AlphaEmbeddingSet,
    solver: &FisherSolver,
    slots: AnalogySlots,
    exclude: Option<&BTreeSet<usize>>,
) -> Result<Vec<(usize, f64)>> {
    rank_by_kappa(&set.w, Some(solver), slots, exclude)
}

/// [`solve_analogy`] on bare row vectors; without a solver the norm is
/// Euclidean, which covers the plain-vector baselines.
pub fn rank_by_kappa(
    w: &DMatrix<f64>,
    solver: Option<&FisherSolver>,
    slots: AnalogySlots,
    exclude: Option<&BTreeSet<usize>>,
) -> Result<Vec<(usize, f64)>> {
    let n = w.nrows();
    if n < 4 {
        return Err(Error::InsufficientVocabulary { size: n });
    }
    let unknown = {
        let open: Vec<usize> = (0..4).filter(|&i| slots[i].is_none()).collect();
        if open.len() != 1 {
            return Err(Error::Domain {
                what: "analogy query",
                requirement: "exactly one unknown slot",
                got: format!("{} unknown", open.len()),
            });
        }
        open[0]
    };
    let known: Vec<usize> = slots.iter().flatten().copied().collect();
    for &i in &known {
        check_index(i, n)?;
    }
    let default_exclude: BTreeSet<usize>;
    let excluded = match exclude {
        Some(set) => set,
        None => {
            default_exclude = known.iter().copied().collect();
            &default_exclude
        }
    };
    let mut ranked: Vec<(usize, f64)> = (0..n)
        .into_par_iter()
        .filter(|i| !excluded.contains(i))
        .map(|i| {
            let mut filled = slots;
            filled[unknown] = Some(i);
            let [a, b, c, d] = filled.map(|s| s.unwrap());
            let row = |i: usize| w.row(i).transpose();
            let x = row(b) - row(a) - row(d) + row(c);
            let kappa = match solver {
                Some(s) => s.norm(&x),
                None => x.norm(),
            };
            (i, kappa)
        })
        .collect();
    ranked.sort_by(|x, y| x.1.total_cmp(&y.1));
    Ok(ranked)
}

/// Σ_χ (ln(p(χ|a)/p(χ|b)) − ln(p(χ|c)/p(χ|d)))², the model-level quantity
/// analogy solving approximates.
pub fn probability_ratio_analogy_oracle(
    model: &EmbeddingModel,
    a: usize,
    b: usize,
    c: usize,
    d: usize,
) -> Result<f64> {
    let p = |w| conditional_with_mode(model, w, ShiftMode::U);
    let (pa, pb, pc, pd) = (p(a)?, p(b)?, p(c)?, p(d)?);
    Ok(kahan_sum((0..model.n()).map(|x| {
        let t = (pa.get(x).ln() - pb.get(x).ln()) - (pc.get(x).ln() - pd.get(x).ln());
        t * t
    })))
}

/// Columns rescaled to unit L2 norm; zero columns stay zero.
pub fn column_normalized(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    out
}

/// The (u+v)/2 vectors of the common pretrained releases.
pub fn u_plus_v_half(model: &EmbeddingModel) -> DMatrix<f64> {
    (&model.u + &model.v) * 0.5
}

/// Euclidean cosine of two rows, optionally after column normalization.
pub fn baseline_cosine(
    a: usize,
    b: usize,
    vectors: &DMatrix<f64>,
    column_normalize: bool,
) -> Result<f64> {
    check_index(a, vectors.nrows())?;
    check_index(b, vectors.nrows())?;
    let normalized;
    let m = if column_normalize {
        normalized = column_normalized(vectors);
        &normalized
    } else {
        vectors
    };
    let va = m.row(a).transpose();
    let vb = m.row(b).transpose();
    let (na, nb) = (va.norm(), vb.norm());
    if !(na > 0.0) || !(nb > 0.0) {
        let zero = if na > 0.0 { b } else { a };
        return Err(Error::UndefinedSimilarity(format!(
            "word index {zero} has a zero vector"
        )));
    }
    Ok(va.dot(&vb) / (na * nb))
}

/// Count-only similarity: rows of p(χ|w) estimated from C, columns centered
/// and L2-normalized, then row cosine. Rows without counts stay zero and are
/// an error to query; constant columns vanish under centering and drop out.
pub struct PDataCn {
    rows: Vec<Vec<(usize, f64)>>,
    mu: Vec<f64>,
    inv_s: Vec<f64>,
    /// Σ_k (μ_k/s_k)² over kept columns, the all-zero-row contribution.
    base: f64,
}

impl PDataCn {
    pub fn new(c: &CooccurrenceMatrix) -> Self {
        let n = c.n();
        let row_sums = c.row_sums();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut colsum = vec![KahanAccumulator::default(); n];
        let mut sumsq = vec![KahanAccumulator::default(); n];
        for (r, k, v) in c.iter() {
            let p = v / row_sums[r];
            rows[r].push((k, p));
            colsum[k].add(p);
            sumsq[k].add(p * p);
        }
        let mut mu = vec![0.0; n];
        let mut inv_s = vec![0.0; n];
        let mut base = KahanAccumulator::default();
        for k in 0..n {
            mu[k] = colsum[k].total() / n as f64;
            let var = sumsq[k].total() - colsum[k].total() * mu[k];
            if var > 0.0 {
                inv_s[k] = 1.0 / var.sqrt();
                base.add((mu[k] * inv_s[k]).powi(2));
            }
        }
        PDataCn {
            rows,
            mu,
            inv_s,
            base: base.total(),
        }
    }

    fn check_row(&self, i: usize) -> Result<&[(usize, f64)]> {
        check_index(i, self.rows.len())?;
        if self.rows[i].is_empty() {
            return Err(Error::UndefinedSimilarity(format!(
                "word index {i} has no co-occurrence counts"
            )));
        }
        Ok(&self.rows[i])
    }

    /// Squared norm of the centered, column-normalized row.
    fn row_norm_sq(&self, row: &[(usize, f64)]) -> f64 {
        let correction = kahan_sum(row.iter().map(|&(k, p)| {
            let w = self.inv_s[k] * self.inv_s[k];
            (p - 2.0 * self.mu[k]) * p * w
        }));
        self.base + correction
    }

    pub fn similarity(&self, a: usize, b: usize) -> Result<f64> {
        let ra = self.check_row(a)?;
        let rb = self.check_row(b)?;
        let cross = {
            let mut acc = KahanAccumulator::default();
            let mut j = 0usize;
            for &(k, pa) in ra {
                while j < rb.len() && rb[j].0 < k {
                    j += 1;
                }
                if j < rb.len() && rb[j].0 == k {
                    acc.add(pa * rb[j].1 * self.inv_s[k] * self.inv_s[k]);
                }
            }
            acc.total()
        };
        let lean = |row: &[(usize, f64)]| {
            kahan_sum(
                row.iter()
                    .map(|&(k, p)| self.mu[k] * p * self.inv_s[k] * self.inv_s[k]),
            )
        };
        let dot = cross - lean(ra) - lean(rb) + self.base;
        let na = self.row_norm_sq(ra);
        let nb = self.row_norm_sq(rb);
        if !(na > 0.0) || !(nb > 0.0) {
            return Err(Error::UndefinedSimilarity(
                "centered row is identically zero".to_string(),
            ));
        }
        Ok(dot / (na.sqrt() * nb.sqrt()))
    }
}

pub fn p_data_cn_similarity(a: usize, b: usize, c: &CooccurrenceMatrix) -> Result<f64> {
    PDataCn::new(c).similarity(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::{embed_all, reference_measure};
    use crate::geometry::{FisherMatrix, ReferenceMeasure, SimplexPoint};
    use crate::trainer::synthetic_words;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn method(s: &str) -> SimilarityMethod {
        s.parse().unwrap()
    }

    fn manual_set(rows: &[&[f64]], fisher: DMatrix<f64>) -> AlphaEmbeddingSet {
        let n = rows.len();
        let d = rows[0].len();
        let reference = ReferenceMeasure {
            p: SimplexPoint::uniform(n),
            kind: ReferenceKind::Uniform0,
            shift_mode: ShiftMode::U,
        };
        AlphaEmbeddingSet {
            w: DMatrix::from_row_iterator(n, d, rows.iter().flat_map(|r| r.iter().copied())),
            alpha: Alpha::ONE,
            reference,
            fisher: FisherMatrix {
                matrix: fisher,
                reference: ReferenceMeasure {
                    p: SimplexPoint::uniform(n),
                    kind: ReferenceKind::Uniform0,
                    shift_mode: ShiftMode::U,
                },
            },
            stable: false,
            words: synthetic_words(n),
        }
    }

    fn random_model(seed: u64, n: usize, d: usize) -> EmbeddingModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
        let v = DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
        EmbeddingModel::new(u, v, DVector::zeros(n), DVector::zeros(n), synthetic_words(n))
            .unwrap()
    }

    // V has orthogonal zero-mean columns with VᵀV = 4·Id, so the Fisher
    // matrix at the uniform reference is exactly the identity.
    fn isotropic_model() -> EmbeddingModel {
        let v = DMatrix::from_row_slice(
            4,
            2,
            &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0],
        );
        let u = DMatrix::from_row_slice(
            4,
            2,
            &[0.3, 0.1, -0.2, 0.4, 0.5, -0.3, -0.1, -0.2],
        );
        EmbeddingModel::new(u, v, DVector::zeros(4), DVector::zeros(4), synthetic_words(4))
            .unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for s in [
            "E-0-NI-PI",
            "E-u-NF-PI",
            "E-ud-NF-PF",
            "E+-0-NI-PI",
            "E+-u-NF-PF",
            "LE-U-0-I",
            "LE-U-ud-F",
            "LE-U+V-u-I",
            "LE-U+V-0-F",
            "U",
            "U+V-n",
            "p_data-cn",
        ] {
            let m = method(s);
            assert_eq!(m.to_string(), s, "round trip for {s}");
        }
    }

    #[test]
    fn method_parser_rejects_undefined_variants() {
        assert!(matches!(
            "E-0-NI-PF".parse::<SimilarityMethod>(),
            Err(Error::InvalidMethod(_, _))
        ));
        for bad in ["E-3-NI-PI", "LE-W-0-I", "LE-U-0-X", "bogus", "E-0-NI", ""] {
            assert!(
                bad.parse::<SimilarityMethod>().is_err(),
                "{bad} should not parse"
            );
        }
    }

    #[test]
    fn method_fields_are_decoded() {
        let m = method("E+-ud-NF-PI");
        assert_eq!(m.source, MethodSource::AlphaEmbedding);
        assert_eq!(m.reference, Some(ReferenceKind::DataUnigramUd));
        assert_eq!(m.shift_mode, ShiftMode::UPlusV);
        assert_eq!(m.norm_metric, Metric::Fisher);
        assert_eq!(m.product_metric, Metric::Identity);
        assert!(m.alpha_dependent() && m.needs_fisher() && m.needs_counts());
        let le = method("LE-U-u-F");
        assert_eq!(le.source, MethodSource::Limit);
        assert_eq!(le.norm_metric, Metric::Fisher);
        assert_eq!(le.product_metric, Metric::Fisher);
        assert!(!le.alpha_dependent());
    }

    #[test]
    fn self_similarity_is_one_when_metrics_match() {
        let fisher = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let set = manual_set(&[&[0.4, -1.2], &[0.9, 0.5]], fisher);
        for name in ["E-0-NI-PI", "E-0-NF-PF"] {
            let m = method(name);
            for i in 0..2 {
                let s = alpha_cosine(i, i, &set, &m).unwrap();
                assert_relative_eq!(s, 1.0, epsilon = 1e-12);
            }
        }
    }

    // NF-PI rescales by a different norm than the product, so even the
    // self-similarity is the norm ratio rather than 1.
    #[test]
    fn mixed_metric_self_similarity_is_a_norm_ratio() {
        let fisher = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let set = manual_set(&[&[0.4, -1.2], &[0.9, 0.5]], fisher);
        let solver = FisherSolver::new(&set.fisher).unwrap();
        let m = method("E-0-NF-PI");
        for i in 0..2 {
            let s = alpha_cosine_with_solver(i, i, &set, &m, Some(&solver)).unwrap();
            let w = set.w.row(i).transpose();
            let want = w.norm_squared() / solver.inner(&w, &w);
            assert_relative_eq!(s, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn orthogonal_rows_have_zero_identity_cosine() {
        let set = manual_set(&[&[1.0, 0.0], &[0.0, 1.0]], DMatrix::identity(2, 2));
        let s = alpha_cosine(0, 1, &set, &method("E-0-NI-PI")).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn similarity_is_symmetric_bitwise() {
        let m = random_model(5, 6, 3);
        let r = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let set = embed_all(&m, &r, Alpha::new(-1.4).unwrap(), None).unwrap();
        let solver = FisherSolver::new(&set.fisher).unwrap();
        for name in ["E-0-NI-PI", "E-0-NF-PI", "E-0-NF-PF"] {
            let mm = method(name);
            for a in 0..6 {
                for b in 0..6 {
                    let ab = alpha_cosine_with_solver(a, b, &set, &mm, Some(&solver)).unwrap();
                    let ba = alpha_cosine_with_solver(b, a, &set, &mm, Some(&solver)).unwrap();
                    assert_eq!(ab, ba);
                }
            }
        }
    }

    #[test]
    fn matched_metric_cosines_stay_in_range() {
        let m = random_model(8, 7, 3);
        let r = reference_measure(&m, ReferenceKind::ModelUnigramU, ShiftMode::U, None).unwrap();
        let set = embed_all(&m, &r, Alpha::new(0.6).unwrap(), None).unwrap();
        let solver = FisherSolver::new(&set.fisher).unwrap();
        for name in ["E-u-NI-PI", "E-u-NF-PF"] {
            let mm = method(name);
            for a in 0..7 {
                for b in 0..7 {
                    let s = alpha_cosine_with_solver(a, b, &set, &mm, Some(&solver)).unwrap();
                    assert!(s.abs() <= 1.0 + 1e-12, "{name} {a},{b}: {s}");
                }
            }
        }
    }

    #[test]
    fn scale_invariance_of_similarities_and_rankings() {
        let m = random_model(13, 8, 3);
        let r = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let set = embed_all(&m, &r, Alpha::new(-0.8).unwrap(), None).unwrap();
        let solver = FisherSolver::new(&set.fisher).unwrap();
        let mut scaled = set.clone();
        scaled.w *= 3.7;
        for name in ["E-0-NI-PI", "E-0-NF-PI", "E-0-NF-PF"] {
            let mm = method(name);
            for a in 0..8 {
                for b in 0..8 {
                    let s1 = alpha_cosine_with_solver(a, b, &set, &mm, Some(&solver)).unwrap();
                    let s2 = alpha_cosine_with_solver(a, b, &scaled, &mm, Some(&solver)).unwrap();
                    assert_relative_eq!(s1, s2, epsilon = 1e-12, max_relative = 1e-12);
                }
            }
        }
        let slots = [Some(0), Some(1), None, Some(2)];
        let r1 = solve_analogy(&set, &solver, slots, None).unwrap();
        let r2 = solve_analogy(&scaled, &solver, slots, None).unwrap();
        let order1: Vec<usize> = r1.iter().map(|&(i, _)| i).collect();
        let order2: Vec<usize> = r2.iter().map(|&(i, _)| i).collect();
        assert_eq!(order1, order2);
    }

    #[test]
    fn isotropic_fisher_collapses_metric_variants() {
        let m = isotropic_model();
        let r = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let set = embed_all(&m, &r, Alpha::ONE, None).unwrap();
        assert_relative_eq!(
            set.fisher.matrix,
            DMatrix::identity(2, 2),
            epsilon = 1e-15
        );
        let solver = FisherSolver::new(&set.fisher).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let nipi =
                    alpha_cosine_with_solver(a, b, &set, &method("E-0-NI-PI"), Some(&solver))
                        .unwrap();
                let nfpi =
                    alpha_cosine_with_solver(a, b, &set, &method("E-0-NF-PI"), Some(&solver))
                        .unwrap();
                let nfpf =
                    alpha_cosine_with_solver(a, b, &set, &method("E-0-NF-PF"), Some(&solver))
                        .unwrap();
                // NF-PI carries the eigenvalue floor (1e-10 relative) in its
                // norms; NF-PF cancels it, so it agrees much more tightly.
                assert_relative_eq!(nipi, nfpi, epsilon = 1e-10);
                assert_relative_eq!(nipi, nfpf, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn alpha_one_uniform_isotropic_matches_standard_cosine() {
        let m = isotropic_model();
        let r = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let set = embed_all(&m, &r, Alpha::ONE, None).unwrap();
        let solver = FisherSolver::new(&set.fisher).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let sim =
                    alpha_cosine_with_solver(a, b, &set, &method("E-0-NF-PF"), Some(&solver))
                        .unwrap();
                let standard = baseline_cosine(a, b, &m.u, false).unwrap();
                assert_relative_eq!(sim, standard, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn zero_norm_embedding_is_reported() {
        let set = manual_set(&[&[0.0, 0.0], &[1.0, 0.0]], DMatrix::identity(2, 2));
        let err = alpha_cosine(0, 1, &set, &method("E-0-NI-PI"));
        assert!(matches!(err, Err(Error::UndefinedSimilarity(_))));
    }

    #[test]
    fn kappa_vanishes_on_degenerate_quadruples() {
        let m = random_model(21, 5, 2);
        let r = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let set = embed_all(&m, &r, Alpha::ZERO, None).unwrap();
        let solver = FisherSolver::new(&set.fisher).unwrap();
        assert_eq!(analogy_kappa(&set, &solver, 1, 1, 3, 3), 0.0);
        assert_eq!(analogy_kappa(&set, &solver, 2, 4, 2, 4), 0.0);
    }

    #[test]
    fn kappa_matches_direct_quadratic_form() {
        let m = random_model(22, 5, 2);
        let r = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let set = embed_all(&m, &r, Alpha::new(0.3).unwrap(), None).unwrap();
        let solver = FisherSolver::new(&set.fisher).unwrap();
        let (a, b, c, d) = (0, 1, 2, 3);
        let row = |i: usize| set.w.row(i).transpose();
        let x = row(b) - row(a) - row(d) + row(c);
        let floor = solver.floor;
        let direct = ((&x.transpose() * &set.fisher.matrix * &x)[(0, 0)]
            + floor * x.norm_squared())
        .sqrt();
        let kappa = analogy_kappa(&set, &solver, a, b, c, d);
        assert_relative_eq!(kappa, direct, max_relative = 1e-12);
    }

    #[test]
    fn kappa_swap_symmetry() {
        let m = random_model(23, 6, 3);
        let r = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let set = embed_all(&m, &r, Alpha::new(-2.0).unwrap(), None).unwrap();
        let solver = FisherSolver::new(&set.fisher).unwrap();
        for (a, b, c, d) in [(0, 1, 2, 3), (4, 2, 5, 1), (3, 3, 0, 5)] {
            let k1 = analogy_kappa(&set, &solver, a, b, c, d);
            let k2 = analogy_kappa(&set, &solver, b, a, d, c);
            assert_relative_eq!(k1, k2, epsilon = 1e-15, max_relative = 1e-12);
        }
    }

    #[test]
    fn planted_parallelogram_is_solved() {
        // W(c*) = W(a) − W(b) + W(d) exactly, so κ = 0 at c*.
        let wa = [0.0, 0.0];
        let wb = [1.0, 0.0];
        let wd = [0.3, 0.7];
        let wc = [-0.7, 0.7];
        let set = manual_set(
            &[&wa, &wb, &wd, &wc, &[2.0, -1.0], &[-1.5, 0.4]],
            DMatrix::identity(2, 2),
        );
        let solver = FisherSolver::new(&set.fisher).unwrap();
        let ranked =
            solve_analogy(&set, &solver, [Some(0), Some(1), None, Some(2)], None).unwrap();
        assert_eq!(ranked[0].0, 3);
        assert!(ranked[0].1 < 1e-12);
        assert_eq!(ranked.len(), 3);
    }

    #[test]
    fn degenerate_query_with_empty_exclusion_returns_d() {
        let m = random_model(29, 6, 2);
        let r = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let set = embed_all(&m, &r, Alpha::ZERO, None).unwrap();
        let solver = FisherSolver::new(&set.fisher).unwrap();
        let empty = BTreeSet::new();
        let ranked = solve_analogy(
            &set,
            &solver,
            [Some(2), Some(2), None, Some(4)],
            Some(&empty),
        )
        .unwrap();
        assert_eq!(ranked[0].0, 4);
        assert_eq!(ranked[0].1, 0.0);
        assert_eq!(ranked.len(), 6);
    }

    #[test]
    fn isotropic_ranking_equals_euclidean_ordering() {
        let m = isotropic_model();
        let r = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let set = embed_all(&m, &r, Alpha::ONE, None).unwrap();
        let solver = FisherSolver::new(&set.fisher).unwrap();
        let empty = BTreeSet::new();
        let (a, b, d) = (0, 1, 2);
        let ranked = solve_analogy(
            &set,
            &solver,
            [Some(a), Some(b), None, Some(d)],
            Some(&empty),
        )
        .unwrap();
        let mut euclid: Vec<(usize, f64)> = (0..4)
            .map(|c| {
                let g = m.u.row(a) - m.u.row(b) - m.u.row(c) + m.u.row(d);
                (c, g.norm_squared())
            })
            .collect();
        euclid.sort_by(|x, y| x.1.total_cmp(&y.1));
        let got: Vec<usize> = ranked.iter().map(|&(i, _)| i).collect();
        let want: Vec<usize> = euclid.iter().map(|&(i, _)| i).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn analogy_requires_four_words() {
        let set = manual_set(&[&[1.0], &[2.0], &[3.0]], DMatrix::identity(1, 1));
        let solver = FisherSolver::new(&set.fisher).unwrap();
        let err = solve_analogy(&set, &solver, [Some(0), Some(1), None, Some(2)], None);
        assert!(matches!(err, Err(Error::InsufficientVocabulary { size: 3 })));
    }

    #[test]
    fn oracle_vanishes_when_ratios_match() {
        let m = random_model(31, 5, 2);
        assert_eq!(probability_ratio_analogy_oracle(&m, 1, 3, 1, 3).unwrap(), 0.0);
    }

    #[test]
    fn oracle_two_word_hand_instance() {
        let m = random_model(37, 2, 1);
        let p = |w: usize| conditional_with_mode(&m, w, ShiftMode::U).unwrap();
        let (pa, pb, pc, pd) = (p(0), p(1), p(1), p(0));
        let term = |x: usize| {
            let t = (pa.get(x) / pb.get(x)).ln() - (pc.get(x) / pd.get(x)).ln();
            t * t
        };
        let want = term(0) + term(1);
        let got = probability_ratio_analogy_oracle(&m, 0, 1, 1, 0).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-12);
    }

    #[test]
    fn oracle_ordering_matches_euclidean_for_isotropic_equal_z() {
        // u rows are coordinate swaps and negations of one vector, so every
        // partition function is equal; V columns are orthogonal with zero
        // mean, collapsing the oracle to a multiple of ‖u_a−u_b−u_c+u_d‖².
        let v = DMatrix::from_row_slice(
            4,
            2,
            &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0],
        );
        let (p, q) = (0.6, 0.2);
        let u = DMatrix::from_row_slice(4, 2, &[p, q, q, p, -p, -q, -q, -p]);
        let m = EmbeddingModel::new(
            u.clone(),
            v,
            DVector::zeros(4),
            DVector::zeros(4),
            synthetic_words(4),
        )
        .unwrap();
        let (a, b, d) = (0, 1, 3);
        let mut by_oracle: Vec<(usize, f64)> = (0..4)
            .map(|c| {
                (
                    c,
                    probability_ratio_analogy_oracle(&m, a, b, c, d).unwrap(),
                )
            })
            .collect();
        let mut by_euclid: Vec<(usize, f64)> = (0..4)
            .map(|c| {
                let g = u.row(a) - u.row(b) - u.row(c) + u.row(d);
                (c, g.norm_squared())
            })
            .collect();
        by_oracle.sort_by(|x, y| x.1.total_cmp(&y.1));
        by_euclid.sort_by(|x, y| x.1.total_cmp(&y.1));
        let got: Vec<usize> = by_oracle.iter().map(|&(i, _)| i).collect();
        let want: Vec<usize> = by_euclid.iter().map(|&(i, _)| i).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn baseline_cosine_cases() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 2.0, 0.0]);
        assert_relative_eq!(baseline_cosine(0, 2, &m, false).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            baseline_cosine(0, 1, &m, false).unwrap(),
            1.0 / 2.0f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn baseline_column_normalization_matches_manual() {
        let m = random_model(41, 5, 3);
        let half = u_plus_v_half(&m);
        let manual = column_normalized(&half);
        for a in 0..5 {
            for b in 0..5 {
                let got = baseline_cosine(a, b, &half, true).unwrap();
                let want = baseline_cosine(a, b, &manual, false).unwrap();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn u_plus_v_n_reduces_to_normalized_u_when_tied() {
        let mut m = random_model(43, 4, 2);
        m.v = m.u.clone();
        let half = u_plus_v_half(&m);
        for a in 0..4 {
            for b in 0..4 {
                let got = baseline_cosine(a, b, &half, true).unwrap();
                let want = baseline_cosine(a, b, &column_normalized(&m.u), false).unwrap();
                assert_relative_eq!(got, want, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn zero_baseline_vector_is_reported() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]);
        assert!(matches!(
            baseline_cosine(0, 1, &m, false),
            Err(Error::UndefinedSimilarity(_))
        ));
    }

    #[test]
    fn p_data_cn_identity_counts_are_antipodal() {
        let c = CooccurrenceMatrix::from_entries(2, vec![(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let s = p_data_cn_similarity(0, 1, &c).unwrap();
        assert_relative_eq!(s, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn p_data_cn_identical_rows_score_one() {
        let c = CooccurrenceMatrix::from_entries(
            3,
            vec![
                (0, 0, 2.0),
                (0, 1, 1.0),
                (1, 0, 4.0),
                (1, 1, 2.0),
                (2, 2, 5.0),
            ],
        )
        .unwrap();
        // Rows 0 and 1 are proportional, hence equal after row normalization.
        let s = p_data_cn_similarity(0, 1, &c).unwrap();
        assert_relative_eq!(s, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn p_data_cn_matches_dense_reference() {
        let entries = vec![
            (0, 0, 3.0),
            (0, 2, 1.0),
            (1, 1, 2.0),
            (1, 3, 2.0),
            (2, 0, 1.0),
            (2, 1, 1.0),
            (2, 2, 1.0),
            (3, 3, 4.0),
            (3, 0, 2.0),
        ];
        let c = CooccurrenceMatrix::from_entries(4, entries).unwrap();
        let n = 4;
        // Dense oracle with explicit loops.
        let mut p = DMatrix::zeros(n, n);
        for (r, k, v) in c.iter() {
            p[(r, k)] = v;
        }
        for r in 0..n {
            let s: f64 = p.row(r).iter().sum();
            for k in 0..n {
                p[(r, k)] /= s;
            }
        }
        let mut centered = p.clone();
        for k in 0..n {
            let mean: f64 = p.column(k).iter().sum::<f64>() / n as f64;
            for r in 0..n {
                centered[(r, k)] -= mean;
            }
        }
        for k in 0..n {
            let norm = centered.column(k).norm();
            if norm > 0.0 {
                let mut col = centered.column_mut(k);
                col /= norm;
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ra = centered.row(a).transpose();
                let rb = centered.row(b).transpose();
                let want = ra.dot(&rb) / (ra.norm() * rb.norm());
                let got = p_data_cn_similarity(a, b, &c).unwrap();
                assert_relative_eq!(got, want, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn p_data_cn_empty_row_is_reported() {
        let c = CooccurrenceMatrix::from_entries(
            3,
            vec![(0, 0, 1.0), (0, 1, 1.0), (2, 0, 1.0)],
        )
        .unwrap();
        assert!(matches!(
            p_data_cn_similarity(1, 0, &c),
            Err(Error::UndefinedSimilarity(_))
        ));
        assert!(p_data_cn_similarity(0, 2, &c).is_ok());
    }
}
