//! α-embeddings: Fisher coordinates of the α-log map from a reference
//! distribution to each word's conditional, plus the α→−∞ limit vectors and
//! the U+V reparametrization.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::geometry::{
    centered_statistics, conditional_with_mode, fisher_from_delta, Alpha, FisherMatrix,
    FisherSolver, ReferenceKind, ReferenceMeasure, ShiftMode, SimplexPoint,
};
use crate::trainer::{read_vector_file, write_vector_file, EmbeddingModel};
use crate::util::KahanAccumulator;

/// Words per batch when mixing conditionals into the model unigram. Batches
/// are accumulated in vocabulary order, so totals do not depend on threads.
const UNIGRAM_CHUNK: usize = 256;

/// Embeddings for every vocabulary word at one (α, reference) pair.
#[derive(Clone, Debug)]
pub struct AlphaEmbeddingSet {
    /// One length-d embedding per vocabulary row.
    pub w: DMatrix<f64>,
    pub alpha: Alpha,
    pub reference: ReferenceMeasure,
    pub fisher: FisherMatrix,
    pub stable: bool,
    pub words: Vec<String>,
}

/// Build the reference distribution of the given kind. The shift mode rides
/// along so every downstream conditional agrees with the reference.
pub fn reference_measure(
    model: &EmbeddingModel,
    kind: ReferenceKind,
    shift_mode: ShiftMode,
    counts: Option<&CooccurrenceMatrix>,
) -> Result<ReferenceMeasure> {
    let p = match kind {
        ReferenceKind::Uniform0 => SimplexPoint::uniform(model.n()),
        ReferenceKind::ModelUnigramU => model_unigram(model, shift_mode)?,
        ReferenceKind::DataUnigramUd => {
            let c = counts.ok_or(Error::MissingCooccurrence("ud"))?;
            if c.n() != model.n() {
                return Err(Error::Domain {
                    what: "co-occurrence matrix",
                    requirement: "same vocabulary size as the model",
                    got: format!("{} vs n={}", c.n(), model.n()),
                });
            }
            data_unigram(c)?
        }
    };
    Ok(ReferenceMeasure {
        p,
        kind,
        shift_mode,
    })
}

/// Uniform mixture of the model's conditionals: p(χ) = (1/n) Σ_w p(χ|w).
fn model_unigram(model: &EmbeddingModel, mode: ShiftMode) -> Result<SimplexPoint> {
    let n = model.n();
    let mut columns = vec![KahanAccumulator::default(); n];
    for start in (0..n).step_by(UNIGRAM_CHUNK) {
        let end = (start + UNIGRAM_CHUNK).min(n);
        let rows = (start..end)
            .into_par_iter()
            .map(|w| conditional_with_mode(model, w, mode))
            .collect::<Result<Vec<_>>>()?;
        for row in &rows {
            let rv = row.as_vector();
            for (acc, value) in columns.iter_mut().zip(rv.iter()) {
                acc.add(*value);
            }
        }
    }
    SimplexPoint::from_positive(DVector::from_iterator(
        n,
        columns.iter().map(|acc| acc.total() / n as f64),
    ))
}

/// Row-sum marginals of the counts, floored at 1/(10·mass) and renormalized
/// so the result stays interior to the simplex.
fn data_unigram(c: &CooccurrenceMatrix) -> Result<SimplexPoint> {
    let mass = c.total_mass();
    if !mass.is_finite() || mass <= 0.0 {
        return Err(Error::Domain {
            what: "co-occurrence total mass",
            requirement: "positive and finite",
            got: format!("{mass}"),
        });
    }
    let floor = 1.0 / (10.0 * mass);
    let sums = c.row_sums();
    SimplexPoint::from_positive(DVector::from_iterator(
        c.n(),
        sums.iter().map(|s| (s / mass).max(floor)),
    ))
}

fn check_same_len(p_w: &SimplexPoint, p_ref: &SimplexPoint) -> Result<()> {
    if p_w.len() != p_ref.len() {
        return Err(Error::Domain {
            what: "conditional distribution",
            requirement: "same length as the reference",
            got: format!("{} vs {}", p_w.len(), p_ref.len()),
        });
    }
    Ok(())
}

/// l^α(w): the weights expressing the projected α-log map from p_ref to p_w
/// over the rows of ΔV. Exact form; overflows for very negative α.
///
/// α=1 gives p_ref⊙(ln p_w − ln p_ref); otherwise
/// p_ref⊙(2/(1−α))((p_w/p_ref)^{(1−α)/2} − 1).
pub fn alpha_coefficients(
    p_w: &SimplexPoint,
    p_ref: &SimplexPoint,
    alpha: Alpha,
) -> Result<DVector<f64>> {
    let a = alpha.finite_value()?;
    check_same_len(p_w, p_ref)?;
    let n = p_ref.len();
    let out = if a == 1.0 {
        DVector::from_fn(n, |x, _| {
            p_ref.get(x) * (p_w.get(x).ln() - p_ref.get(x).ln())
        })
    } else {
        let e = (1.0 - a) / 2.0;
        let scale = 2.0 / (1.0 - a);
        DVector::from_fn(n, |x, _| {
            p_ref.get(x) * scale * ((p_w.get(x) / p_ref.get(x)).powf(e) - 1.0)
        })
    };
    Ok(out)
}

/// l̃^α(w): rescaled coefficients computed through the ratio maximum, finite
/// for arbitrarily negative α. Proportional to [`alpha_coefficients`] by the
/// positive factor ((1−α)/2)·m^{−(1−α)/2} whenever α < 1, so projected
/// directions agree. The rescaling degenerates to zero at α=1, where the
/// exact log form is returned instead.
pub fn alpha_coefficients_stable(
    p_w: &SimplexPoint,
    p_ref: &SimplexPoint,
    alpha: Alpha,
) -> Result<DVector<f64>> {
    let a = alpha.finite_value()?;
    check_same_len(p_w, p_ref)?;
    if a == 1.0 {
        return alpha_coefficients(p_w, p_ref, alpha);
    }
    let n = p_ref.len();
    let r = DVector::from_fn(n, |x, _| p_w.get(x) / p_ref.get(x));
    let m = r.max();
    let e = (1.0 - a) / 2.0;
    let shift = m.powf(-e);
    Ok(DVector::from_fn(n, |x, _| {
        p_ref.get(x) * ((r[x] / m).powf(e) - shift)
    }))
}

/// Default coefficient variant: stable below α = 0, exact at and above.
pub fn default_stable(alpha: Alpha) -> bool {
    alpha.value() < 0.0
}

/// ΔV and the Fisher solve shared by every word at one (model, reference).
struct EmbeddingContext {
    delta_v: DMatrix<f64>,
    fisher: FisherMatrix,
    solver: FisherSolver,
}

impl EmbeddingContext {
    fn new(model: &EmbeddingModel, reference: &ReferenceMeasure) -> Result<Self> {
        let delta_v = centered_statistics(model, reference);
        let fisher = FisherMatrix {
            matrix: fisher_from_delta(&delta_v, &reference.p),
            reference: reference.clone(),
        };
        let solver = FisherSolver::new(&fisher)?;
        Ok(EmbeddingContext {
            delta_v,
            fisher,
            solver,
        })
    }

    fn embed_word(
        &self,
        model: &EmbeddingModel,
        reference: &ReferenceMeasure,
        w: usize,
        alpha: Alpha,
        stable: bool,
    ) -> Result<DVector<f64>> {
        let p_w = conditional_with_mode(model, w, reference.shift_mode)?;
        let l = if stable {
            alpha_coefficients_stable(&p_w, &reference.p, alpha)?
        } else {
            alpha_coefficients(&p_w, &reference.p, alpha)?
        };
        Ok(self.solver.solve(&(self.delta_v.transpose() * l)))
    }

    fn limit_word(
        &self,
        model: &EmbeddingModel,
        reference: &ReferenceMeasure,
        w: usize,
    ) -> Result<DVector<f64>> {
        let p_w = conditional_with_mode(model, w, reference.shift_mode)?;
        let star = argmax_ratio(&p_w, &reference.p);
        Ok(self.solver.solve(&self.delta_v.row(star).transpose()))
    }
}

fn argmax_ratio(p_w: &SimplexPoint, p_ref: &SimplexPoint) -> usize {
    let mut best = 0usize;
    let mut best_ratio = p_w.get(0) / p_ref.get(0);
    for x in 1..p_w.len() {
        let ratio = p_w.get(x) / p_ref.get(x);
        if ratio > best_ratio {
            best = x;
            best_ratio = ratio;
        }
    }
    best
}

/// W^α(w) = I(u)⁻¹ ΔVᵀ l where l is the exact or stable coefficient vector.
/// Equals the tangent projection of the ambient α-log map on the exact path.
pub fn alpha_embedding(
    model: &EmbeddingModel,
    w: usize,
    reference: &ReferenceMeasure,
    alpha: Alpha,
    stable: bool,
) -> Result<DVector<f64>> {
    let ctx = EmbeddingContext::new(model, reference)?;
    ctx.embed_word(model, reference, w, alpha, stable)
}

/// Direction every α-embedding of w converges to as α → −∞:
/// I(u)⁻¹ (row χ* of ΔV)ᵀ where χ* maximizes p_w/p_ref (ties → lowest index).
pub fn limit_embedding(
    model: &EmbeddingModel,
    w: usize,
    reference: &ReferenceMeasure,
) -> Result<DVector<f64>> {
    let ctx = EmbeddingContext::new(model, reference)?;
    ctx.limit_word(model, reference, w)
}

/// Shift word w's natural parameter by its own context vector and return the
/// reweighted conditional. Satisfies p⁺(χ|w) ∝ p(χ|w)·exp(v_w·v_χ).
pub fn change_of_reference(
    model: &EmbeddingModel,
    w: usize,
) -> Result<(DVector<f64>, SimplexPoint)> {
    if w >= model.n() {
        return Err(Error::WordIndexOutOfRange {
            index: w,
            size: model.n(),
        });
    }
    let param = model.u.row(w).transpose() + model.v.row(w).transpose();
    let p_plus = conditional_with_mode(model, w, ShiftMode::UPlusV)?;
    Ok((param, p_plus))
}

/// Embed the whole vocabulary. Infinite α dispatches to limit embeddings;
/// `stable: None` applies the [`default_stable`] policy. Rows are bit-equal
/// to per-word calls regardless of thread count.
pub fn embed_all(
    model: &EmbeddingModel,
    reference: &ReferenceMeasure,
    alpha: Alpha,
    stable: Option<bool>,
) -> Result<AlphaEmbeddingSet> {
    let ctx = EmbeddingContext::new(model, reference)?;
    let n = model.n();
    let use_stable = stable.unwrap_or_else(|| default_stable(alpha));
    let rows: Vec<DVector<f64>> = if alpha.is_finite() {
        (0..n)
            .into_par_iter()
            .map(|w| ctx.embed_word(model, reference, w, alpha, use_stable))
            .collect::<Result<_>>()?
    } else {
        (0..n)
            .into_par_iter()
            .map(|w| ctx.limit_word(model, reference, w))
            .collect::<Result<_>>()?
    };
    let mut w = DMatrix::zeros(n, model.d());
    for (i, row) in rows.iter().enumerate() {
        w.row_mut(i).tr_copy_from(row);
    }
    Ok(AlphaEmbeddingSet {
        w,
        alpha,
        reference: reference.clone(),
        fisher: ctx.fisher,
        stable: use_stable,
        words: model.words.clone(),
    })
}

/// Spectrum facts recorded next to embedding files.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FisherSummary {
    pub dim: usize,
    pub effective_rank: usize,
    pub eigenvalue_max: f64,
    pub eigenvalue_min: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    pub alpha: String,
    pub reference: ReferenceKind,
    pub shift_mode: ShiftMode,
    pub stable: bool,
    pub fisher: FisherSummary,
}

impl AlphaEmbeddingSet {
    pub fn fisher_summary(&self) -> Result<FisherSummary> {
        let solver = FisherSolver::new(&self.fisher)?;
        let eigs = solver.eigenvalues_sorted();
        Ok(FisherSummary {
            dim: solver.dim(),
            effective_rank: solver.effective_rank,
            eigenvalue_max: eigs[0],
            eigenvalue_min: *eigs.last().unwrap(),
        })
    }

    pub fn meta(&self) -> Result<EmbeddingMeta> {
        Ok(EmbeddingMeta {
            alpha: self.alpha.to_string(),
            reference: self.reference.kind,
            shift_mode: self.reference.shift_mode,
            stable: self.stable,
            fisher: self.fisher_summary()?,
        })
    }
}

pub fn embedding_paths(stem: &Path) -> (PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut os = stem.as_os_str().to_os_string();
        os.push(suffix);
        PathBuf::from(os)
    };
    (with(".txt"), with(".meta.json"))
}

/// `<stem>.txt` holds headerless "word w_1 … w_d" lines in shortest
/// round-trip form; `<stem>.meta.json` records what produced them.
pub fn write_embeddings(stem: &Path, set: &AlphaEmbeddingSet) -> Result<()> {
    let (text_path, meta_path) = embedding_paths(stem);
    write_vector_file(&text_path, None, &set.words, |w| {
        set.w.row(w).iter().copied().collect()
    })?;
    let meta = serde_json::to_string_pretty(&set.meta()?)
        .expect("embedding metadata serializes");
    fs::write(&meta_path, meta)
        .map_err(|e| Error::io(format!("write {}", meta_path.display()), e))
}

/// Headerless embedding text written by [`write_embeddings`].
pub fn read_embedding_text(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let f = read_vector_file(path, false)?;
    let n = f.words.len();
    let d = f.rows[0].len();
    let w = DMatrix::from_row_iterator(n, d, f.rows.iter().flatten().copied());
    Ok((f.words, w))
}

pub fn read_embedding_meta(path: &Path) -> Result<EmbeddingMeta> {
    let file = File::open(path).map_err(|e| Error::io(format!("open {}", path.display()), e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{alpha_log_map, project_to_tangent, tangent_basis};
    use crate::trainer::synthetic_words;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model_from_rows(u_rows: &[&[f64]], v_rows: &[&[f64]]) -> EmbeddingModel {
        let n = v_rows.len();
        let d = v_rows[0].len();
        let u = DMatrix::from_row_iterator(n, d, u_rows.iter().flat_map(|r| r.iter().copied()));
        let v = DMatrix::from_row_iterator(n, d, v_rows.iter().flat_map(|r| r.iter().copied()));
        EmbeddingModel::new(u, v, DVector::zeros(n), DVector::zeros(n), synthetic_words(n))
            .unwrap()
    }

    fn random_model(seed: u64, n: usize, d: usize) -> EmbeddingModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |scale: f64| {
            DMatrix::from_fn(n, d, |_, _| rng.random_range(-scale..scale))
        };
        let u = draw(1.0);
        let v = draw(1.0);
        EmbeddingModel::new(u, v, DVector::zeros(n), DVector::zeros(n), synthetic_words(n))
            .unwrap()
    }

    fn uniform_ref(n: usize) -> ReferenceMeasure {
        ReferenceMeasure {
            p: SimplexPoint::uniform(n),
            kind: ReferenceKind::Uniform0,
            shift_mode: ShiftMode::U,
        }
    }

    fn simplex(values: &[f64]) -> SimplexPoint {
        SimplexPoint::new(DVector::from_row_slice(values)).unwrap()
    }

    fn cosine(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(b) / (a.norm() * b.norm())
    }

    #[test]
    fn uniform_reference_has_equal_mass() {
        let m = random_model(1, 4, 2);
        let r = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        for x in 0..4 {
            assert_eq!(r.p.get(x), 0.25);
        }
    }

    #[test]
    fn model_unigram_averages_conditionals() {
        // softmax([±ln3/2 · (1, -1)]) = [.75, .25] and its mirror.
        let t = (3.0f64).ln() / 2.0;
        let m = model_from_rows(&[&[t], &[-t]], &[&[1.0], &[-1.0]]);
        let pa = conditional_with_mode(&m, 0, ShiftMode::U).unwrap();
        assert_relative_eq!(pa.get(0), 0.75, epsilon = 1e-12);
        let r = reference_measure(&m, ReferenceKind::ModelUnigramU, ShiftMode::U, None).unwrap();
        assert_relative_eq!(r.p.get(0), 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.p.get(1), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn model_unigram_chunking_matches_direct_average() {
        // n > UNIGRAM_CHUNK forces several batches; totals must still equal
        // a single-pass column sum bit for bit.
        let n = 600;
        let m = random_model(7, n, 2);
        let r = reference_measure(&m, ReferenceKind::ModelUnigramU, ShiftMode::U, None).unwrap();
        let rows: Vec<SimplexPoint> = (0..n)
            .map(|w| conditional_with_mode(&m, w, ShiftMode::U).unwrap())
            .collect();
        let raw: Vec<f64> = (0..n)
            .map(|x| crate::util::kahan_sum(rows.iter().map(|p| p.get(x))) / n as f64)
            .collect();
        let total = crate::util::kahan_sum(raw.iter().copied());
        for x in (0..n).step_by(97) {
            assert_eq!(r.p.get(x), raw[x] / total);
        }
    }

    #[test]
    fn data_unigram_normalizes_row_sums() {
        let c = CooccurrenceMatrix::from_entries(2, vec![(0, 0, 3.0), (1, 1, 1.0)]).unwrap();
        let m = random_model(2, 2, 1);
        let r =
            reference_measure(&m, ReferenceKind::DataUnigramUd, ShiftMode::U, Some(&c)).unwrap();
        assert_relative_eq!(r.p.get(0), 0.75, epsilon = 1e-15);
        assert_relative_eq!(r.p.get(1), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn data_unigram_floors_missing_rows() {
        // Row 1 never occurs; mass 5 floors it at 1/50 before renormalizing.
        let c = CooccurrenceMatrix::from_entries(
            3,
            vec![(0, 0, 4.0), (2, 2, 1.0)],
        )
        .unwrap();
        let m = random_model(3, 3, 1);
        let r =
            reference_measure(&m, ReferenceKind::DataUnigramUd, ShiftMode::U, Some(&c)).unwrap();
        assert_relative_eq!(r.p.get(1), 0.02 / 1.02, epsilon = 1e-15);
        assert!(r.p.get(1) > 0.0);
    }

    #[test]
    fn data_unigram_requires_counts() {
        let m = random_model(4, 3, 1);
        let err = reference_measure(&m, ReferenceKind::DataUnigramUd, ShiftMode::U, None);
        assert!(matches!(err, Err(Error::MissingCooccurrence(_))));
    }

    #[test]
    fn coefficients_vanish_at_the_reference() {
        let p = simplex(&[0.3, 0.2, 0.5]);
        for a in [-3.0, -1.0, 0.0, 0.5, 1.0, 2.0] {
            let alpha = Alpha::new(a).unwrap();
            let l = alpha_coefficients(&p, &p, alpha).unwrap();
            assert_eq!(l, DVector::zeros(3));
            let ls = alpha_coefficients_stable(&p, &p, alpha).unwrap();
            assert_eq!(ls, DVector::zeros(3));
        }
    }

    #[test]
    fn coefficients_at_minus_one_are_probability_differences() {
        let p_w = simplex(&[0.7, 0.1, 0.2]);
        let p_ref = simplex(&[0.25, 0.25, 0.5]);
        let l = alpha_coefficients(&p_w, &p_ref, Alpha::MINUS_ONE).unwrap();
        for x in 0..3 {
            assert_relative_eq!(l[x], p_w.get(x) - p_ref.get(x), epsilon = 1e-15);
        }
    }

    #[test]
    fn coefficients_log_case_hand_value() {
        let p_ref = simplex(&[0.5, 0.5]);
        let p_w = simplex(&[0.8, 0.2]);
        let l = alpha_coefficients(&p_w, &p_ref, Alpha::ONE).unwrap();
        assert_relative_eq!(l[0], 0.5 * 1.6f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(l[1], 0.5 * 0.4f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn stable_coefficients_are_positive_multiples_below_one() {
        let p_w = simplex(&[0.6, 0.25, 0.15]);
        let p_ref = simplex(&[0.2, 0.35, 0.45]);
        for a in [-5.0, -2.0, -1.0, 0.0, 0.5] {
            let alpha = Alpha::new(a).unwrap();
            let l = alpha_coefficients(&p_w, &p_ref, alpha).unwrap();
            let ls = alpha_coefficients_stable(&p_w, &p_ref, alpha).unwrap();
            let e = (1.0 - a) / 2.0;
            let factor = (0.6f64 / 0.2).powf(-e) * e;
            for x in 0..3 {
                assert_relative_eq!(ls[x], factor * l[x], epsilon = 1e-14, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn stable_coefficients_finite_and_concentrated_for_extreme_alpha() {
        let p_w = simplex(&[0.8, 0.2]);
        let p_ref = simplex(&[0.5, 0.5]);
        for a in [-50.0, -1e3, -1e4] {
            let ls = alpha_coefficients_stable(&p_w, &p_ref, Alpha::new(a).unwrap()).unwrap();
            assert!(ls.iter().all(|v| v.is_finite()));
            let mass: f64 = ls.iter().map(|v| v.abs()).sum();
            assert!(ls[0].abs() / mass > 0.999, "alpha={a}: {ls:?}");
        }
    }

    #[test]
    fn embedding_is_zero_when_word_sits_at_reference() {
        // U row 0 is zero, so p_0 = uniform = the reference.
        let m = model_from_rows(&[&[0.0, 0.0], &[1.0, 0.2]], &[&[1.0, 0.1], &[-0.4, 0.9]]);
        let r = uniform_ref(2);
        for a in [Alpha::MINUS_ONE, Alpha::ZERO, Alpha::ONE] {
            let w = alpha_embedding(&m, 0, &r, a, false).unwrap();
            assert_eq!(w, DVector::zeros(2));
        }
    }

    #[test]
    fn exact_embedding_matches_projected_log_map() {
        let m = random_model(11, 6, 3);
        let r = uniform_ref(6);
        for a in [-1.0, 0.0, 0.5, 1.0, 2.0] {
            let alpha = Alpha::new(a).unwrap();
            let basis = tangent_basis(&m, &r, alpha).unwrap();
            let solver =
                FisherSolver::new(&crate::geometry::fisher_matrix(&m, &r)).unwrap();
            for w in 0..6 {
                let direct = alpha_embedding(&m, w, &r, alpha, false).unwrap();
                let p_w = conditional_with_mode(&m, w, ShiftMode::U).unwrap();
                let log = alpha_log_map(&r.p, &p_w, alpha).unwrap();
                let projected = project_to_tangent(&log, &basis, &solver).unwrap();
                assert_relative_eq!(direct, projected, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn alpha_one_recovers_u_rows_at_uniform_reference() {
        for seed in 0..5 {
            let m = random_model(100 + seed, 8, 3);
            let r = uniform_ref(8);
            for w in 0..8 {
                let emb = alpha_embedding(&m, w, &r, Alpha::ONE, false).unwrap();
                let u_w = m.u.row(w).transpose();
                assert_relative_eq!(emb, u_w, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn alpha_one_at_in_family_reference_gives_u_differences() {
        // Reference = the model's own conditional at word 0, so embeddings
        // recover u_w − u_0.
        let m = random_model(42, 7, 2);
        let p0 = conditional_with_mode(&m, 0, ShiftMode::U).unwrap();
        let r = ReferenceMeasure {
            p: p0,
            kind: ReferenceKind::ModelUnigramU,
            shift_mode: ShiftMode::U,
        };
        for w in 0..7 {
            let emb = alpha_embedding(&m, w, &r, Alpha::ONE, false).unwrap();
            let expect = m.u.row(w).transpose() - m.u.row(0).transpose();
            assert_relative_eq!(emb, expect, epsilon = 1e-8);
        }
    }

    #[test]
    fn alpha_minus_one_matches_brute_force_oracle() {
        let m = random_model(5, 5, 2);
        let r = uniform_ref(5);
        let n = 5;
        let d = 2;
        // Independent re-derivation with plain loops and an LU solve.
        let mut means = vec![0.0; d];
        for k in 0..d {
            for x in 0..n {
                means[k] += r.p.get(x) * m.v[(x, k)];
            }
        }
        let mut delta = DMatrix::zeros(n, d);
        for x in 0..n {
            for k in 0..d {
                delta[(x, k)] = m.v[(x, k)] - means[k];
            }
        }
        let mut fisher: DMatrix<f64> = DMatrix::zeros(d, d);
        for x in 0..n {
            for i in 0..d {
                for j in 0..d {
                    fisher[(i, j)] += r.p.get(x) * delta[(x, i)] * delta[(x, j)];
                }
            }
        }
        let floor = 1e-10 * fisher.trace() / d as f64;
        let regularized: DMatrix<f64> = &fisher + DMatrix::identity(d, d) * floor;
        for w in 0..n {
            let p_w = conditional_with_mode(&m, w, ShiftMode::U).unwrap();
            let mut rhs = DVector::zeros(d);
            for k in 0..d {
                for x in 0..n {
                    rhs[k] += delta[(x, k)] * (p_w.get(x) - r.p.get(x));
                }
            }
            let oracle = regularized.clone().lu().solve(&rhs).unwrap();
            let emb = alpha_embedding(&m, w, &r, Alpha::MINUS_ONE, false).unwrap();
            assert_relative_eq!(emb, oracle, epsilon = 1e-10);
        }
    }

    #[test]
    fn change_of_reference_is_identity_for_zero_context_row() {
        let m = model_from_rows(&[&[0.7], &[-0.2]], &[&[0.0], &[1.3]]);
        let (param, p_plus) = change_of_reference(&m, 0).unwrap();
        assert_eq!(param, m.u.row(0).transpose());
        let p = conditional_with_mode(&m, 0, ShiftMode::U).unwrap();
        assert_eq!(p_plus.as_vector(), p.as_vector());
    }

    #[test]
    fn change_of_reference_reweights_proportionally() {
        let m = random_model(9, 6, 3);
        for w in 0..6 {
            let (_, p_plus) = change_of_reference(&m, w).unwrap();
            let p = conditional_with_mode(&m, w, ShiftMode::U).unwrap();
            let v_w = m.v.row(w).transpose();
            let mut ratios = Vec::new();
            for x in 0..6 {
                let reweight = p.get(x) * (m.v.row(x).transpose().dot(&v_w)).exp();
                ratios.push(p_plus.get(x) / reweight);
            }
            let (lo, hi) = ratios
                .iter()
                .fold((f64::MAX, f64::MIN), |(lo, hi), &r| (lo.min(r), hi.max(r)));
            assert!(hi / lo - 1.0 < 1e-12, "ratios {ratios:?}");
        }
    }

    #[test]
    fn change_of_reference_hand_softmax() {
        let m = model_from_rows(&[&[0.0], &[0.5]], &[&[1.0], &[-1.0]]);
        let (param, p_plus) = change_of_reference(&m, 0).unwrap();
        assert_eq!(param, DVector::from_row_slice(&[1.0]));
        let e = 1.0f64.exp();
        let denom = e + 1.0 / e;
        assert_relative_eq!(p_plus.get(0), e / denom, epsilon = 1e-15);
        assert_relative_eq!(p_plus.get(1), (1.0 / e) / denom, epsilon = 1e-15);
    }

    #[test]
    fn limit_embedding_tie_breaks_to_lowest_index() {
        // p_0 = uniform = reference, so every ratio ties at 1.
        let m = model_from_rows(&[&[0.0, 0.0], &[0.3, -1.0]], &[&[1.0, 0.0], &[0.2, 0.8]]);
        let r = uniform_ref(2);
        let le = limit_embedding(&m, 0, &r).unwrap();
        let ctx = EmbeddingContext::new(&m, &r).unwrap();
        let expect = ctx.solver.solve(&ctx.delta_v.row(0).transpose());
        assert_eq!(le, expect);
    }

    #[test]
    fn limit_embedding_picks_the_largest_ratio() {
        let t = (2.0f64).ln();
        // p_0 = softmax([2t·(1,-1)]) = [.8, .2] against a uniform reference.
        let m = model_from_rows(&[&[2.0 * t], &[0.0]], &[&[0.5], &[-0.5]]);
        let r = uniform_ref(2);
        let p0 = conditional_with_mode(&m, 0, ShiftMode::U).unwrap();
        assert_relative_eq!(p0.get(0), 0.8, epsilon = 1e-12);
        assert_eq!(argmax_ratio(&p0, &r.p), 0);
        let le = limit_embedding(&m, 0, &r).unwrap();
        let ctx = EmbeddingContext::new(&m, &r).unwrap();
        assert_eq!(le, ctx.solver.solve(&ctx.delta_v.row(0).transpose()));
    }

    #[test]
    fn stable_and_exact_directions_agree_down_to_minus_five() {
        for seed in [3, 14, 15] {
            let m = random_model(seed, 6, 3);
            let r = uniform_ref(6);
            let mut a = -5.0;
            while a <= 1.0 {
                let alpha = Alpha::new(a).unwrap();
                for w in 0..6 {
                    let exact = alpha_embedding(&m, w, &r, alpha, false).unwrap();
                    let stable = alpha_embedding(&m, w, &r, alpha, true).unwrap();
                    if exact.norm() > 1e-12 {
                        assert!(
                            cosine(&exact, &stable) >= 1.0 - 1e-8,
                            "seed {seed} alpha {a} word {w}"
                        );
                    }
                }
                a += 0.5;
            }
        }
    }

    #[test]
    fn alpha_embeddings_converge_to_limit_directions() {
        let m = random_model(23, 5, 2);
        let r = uniform_ref(5);
        let alpha = Alpha::new(-100.0).unwrap();
        let mut checked = 0;
        for w in 0..5 {
            let p_w = conditional_with_mode(&m, w, ShiftMode::U).unwrap();
            let mut ratios: Vec<f64> = (0..5).map(|x| p_w.get(x) / r.p.get(x)).collect();
            ratios.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if ratios[0] / ratios[1] < 1.1 {
                continue;
            }
            let emb = alpha_embedding(&m, w, &r, alpha, true).unwrap();
            let le = limit_embedding(&m, w, &r).unwrap();
            assert!(cosine(&emb, &le) >= 0.999, "word {w}");
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn embed_all_matches_individual_calls_bitwise() {
        let m = random_model(31, 4, 2);
        let r = uniform_ref(4);
        let alpha = Alpha::new(0.4).unwrap();
        let set = embed_all(&m, &r, alpha, Some(false)).unwrap();
        for w in 0..4 {
            let row = set.w.row(w).transpose();
            let single = alpha_embedding(&m, w, &r, alpha, false).unwrap();
            assert_eq!(row, single);
        }
        assert!(!set.stable);
        assert_eq!(set.words, m.words);
    }

    #[test]
    fn embed_all_dispatches_infinite_alpha_to_limits() {
        let m = random_model(32, 4, 2);
        let r = uniform_ref(4);
        for alpha in [Alpha::MINUS_INF, Alpha::PLUS_INF] {
            let set = embed_all(&m, &r, alpha, None).unwrap();
            for w in 0..4 {
                let row = set.w.row(w).transpose();
                assert_eq!(row, limit_embedding(&m, w, &r).unwrap());
            }
        }
    }

    #[test]
    fn embed_all_alpha_one_anchor() {
        let m = random_model(33, 8, 3);
        let r = uniform_ref(8);
        let set = embed_all(&m, &r, Alpha::ONE, None).unwrap();
        assert_relative_eq!(set.w, m.u, epsilon = 1e-8);
    }

    #[test]
    fn default_stable_policy_is_negative_alpha_only() {
        assert!(default_stable(Alpha::new(-0.2).unwrap()));
        assert!(default_stable(Alpha::MINUS_INF));
        assert!(!default_stable(Alpha::ZERO));
        assert!(!default_stable(Alpha::ONE));
        assert!(!default_stable(Alpha::PLUS_INF));
    }

    #[test]
    fn embedding_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = random_model(51, 5, 3);
        let r = uniform_ref(5);
        let set = embed_all(&m, &r, Alpha::new(-0.6).unwrap(), None).unwrap();
        let stem = dir.path().join("emb");
        write_embeddings(&stem, &set).unwrap();
        let (text_path, meta_path) = embedding_paths(&stem);
        let (words, w) = read_embedding_text(&text_path).unwrap();
        assert_eq!(words, set.words);
        assert_eq!(w, set.w);
        let meta = read_embedding_meta(&meta_path).unwrap();
        assert_eq!(meta.alpha, "-0.6");
        assert_eq!(meta.reference, ReferenceKind::Uniform0);
        assert_eq!(meta.shift_mode, ShiftMode::U);
        assert!(meta.stable);
        assert_eq!(meta.fisher.dim, 3);
    }

    #[test]
    fn out_of_range_word_is_reported() {
        let m = random_model(60, 3, 2);
        let r = uniform_ref(3);
        let err = alpha_embedding(&m, 9, &r, Alpha::ZERO, false);
        assert!(matches!(err, Err(Error::WordIndexOutOfRange { .. })));
    }
}
