//! Geometry of the probability simplex and of the trained low-rank family:
//! the h_α coordinate maps, their pushforwards, α-geodesics and log maps,
//! centered sufficient statistics, the Fisher matrix, and projections onto
//! the model's tangent space.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trainer::EmbeddingModel;
use crate::util::kahan_sum;

/// Softmax outputs are clamped here so logs stay finite even when sharp
/// natural parameters push tail probabilities into denormal range.
pub const PROB_FLOOR: f64 = 1e-300;

const SIMPLEX_SUM_TOL: f64 = 1e-12;
const TANGENT_SUM_TOL: f64 = 1e-10;

/// Deformation parameter. ±∞ are legal values but only the limit-embedding
/// construction accepts them; every other operation requires a finite α.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alpha(f64);

impl Alpha {
    pub const ONE: Alpha = Alpha(1.0);
    pub const ZERO: Alpha = Alpha(0.0);
    pub const MINUS_ONE: Alpha = Alpha(-1.0);
    pub const PLUS_INF: Alpha = Alpha(f64::INFINITY);
    pub const MINUS_INF: Alpha = Alpha(f64::NEG_INFINITY);

    pub fn new(value: f64) -> Result<Alpha> {
        if value.is_nan() {
            return Err(Error::Domain {
                what: "alpha",
                requirement: "a number or ±inf",
                got: "NaN".into(),
            });
        }
        Ok(Alpha(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub(crate) fn finite_value(self) -> Result<f64> {
        if self.0.is_finite() {
            Ok(self.0)
        } else {
            Err(Error::NonFiniteAlpha(self.0))
        }
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 == f64::INFINITY {
            write!(f, "inf")
        } else if self.0 == f64::NEG_INFINITY {
            write!(f, "-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for Alpha {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "+inf" => Ok(Alpha::PLUS_INF),
            "-inf" => Ok(Alpha::MINUS_INF),
            other => {
                let v: f64 = other.parse().map_err(|_| Error::Domain {
                    what: "alpha",
                    requirement: "a number or inf/-inf",
                    got: other.to_string(),
                })?;
                Alpha::new(v)
            }
        }
    }
}

/// Strictly positive probability vector summing to 1 within 1e-12.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint(DVector<f64>);

impl SimplexPoint {
    pub fn new(p: DVector<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Domain {
                what: "probability vector",
                requirement: "nonempty",
                got: "length 0".into(),
            });
        }
        for (i, &x) in p.iter().enumerate() {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::Domain {
                    what: "probability entry",
                    requirement: "strictly positive and finite",
                    got: format!("p[{i}] = {x}"),
                });
            }
        }
        let sum = kahan_sum(p.iter().copied());
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(Error::Domain {
                what: "probability vector",
                requirement: "summing to 1 within 1e-12",
                got: format!("sum = {sum}"),
            });
        }
        Ok(SimplexPoint(p))
    }

    /// Normalizes a strictly positive vector onto the simplex.
    pub fn from_positive(v: DVector<f64>) -> Result<Self> {
        for (i, &x) in v.iter().enumerate() {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::Domain {
                    what: "probability entry",
                    requirement: "strictly positive and finite",
                    got: format!("v[{i}] = {x}"),
                });
            }
        }
        let sum = kahan_sum(v.iter().copied());
        Ok(SimplexPoint(v / sum))
    }

    pub fn uniform(n: usize) -> Self {
        SimplexPoint(DVector::from_element(n, 1.0 / n as f64))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Entrywise power as a plain vector.
    pub fn pow(&self, e: f64) -> DVector<f64> {
        self.0.map(|x| x.powf(e))
    }
}

/// Image of a simplex point under h_α.
#[derive(Clone, Debug, PartialEq)]
pub struct HPoint {
    pub q: DVector<f64>,
    pub alpha: Alpha,
}

/// Which distribution anchors tangent spaces, the Fisher metric, and log
/// maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    Uniform0,
    ModelUnigramU,
    DataUnigramUd,
}

impl std::fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReferenceKind::Uniform0 => write!(f, "0"),
            ReferenceKind::ModelUnigramU => write!(f, "u"),
            ReferenceKind::DataUnigramUd => write!(f, "ud"),
        }
    }
}

impl std::str::FromStr for ReferenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" | "uniform" => Ok(ReferenceKind::Uniform0),
            "u" | "model-unigram" => Ok(ReferenceKind::ModelUnigramU),
            "ud" | "data-unigram" => Ok(ReferenceKind::DataUnigramUd),
            other => Err(Error::Domain {
                what: "reference kind",
                requirement: "one of 0|u|ud",
                got: other.to_string(),
            }),
        }
    }
}

/// Whether conditionals are taken at u_w or at the shifted parameter
/// u_w + v_w.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftMode {
    U,
    #[serde(rename = "U+V")]
    UPlusV,
}

impl std::fmt::Display for ShiftMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShiftMode::U => write!(f, "U"),
            ShiftMode::UPlusV => write!(f, "U+V"),
        }
    }
}

impl std::str::FromStr for ShiftMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U" | "u" => Ok(ShiftMode::U),
            "U+V" | "u+v" => Ok(ShiftMode::UPlusV),
            other => Err(Error::Domain {
                what: "shift mode",
                requirement: "U or U+V",
                got: other.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceMeasure {
    pub p: SimplexPoint,
    pub kind: ReferenceKind,
    pub shift_mode: ShiftMode,
}

/// Fisher information of the sufficient statistics at the reference:
/// I = ΔVᵀ diag(p) ΔV.
#[derive(Clone, Debug)]
pub struct FisherMatrix {
    pub matrix: DMatrix<f64>,
    pub reference: ReferenceMeasure,
}

/// Basis A_α = diag(p^{(1−α)/2}) ΔV of the model tangent space in ambient
/// h_α coordinates.
#[derive(Clone, Debug)]
pub struct TangentBasis {
    pub a: DMatrix<f64>,
    pub alpha: Alpha,
    pub reference: ReferenceMeasure,
    pub delta_v: DMatrix<f64>,
}

/// Softmax over contexts of (u_w + shift)·v_χ, computed with
/// max-subtraction and floored at [`PROB_FLOOR`].
pub fn conditional_distribution(
    model: &EmbeddingModel,
    w: usize,
    reference_shift: Option<&DVector<f64>>,
) -> Result<SimplexPoint> {
    let n = model.n();
    if w >= n {
        return Err(Error::WordIndexOutOfRange { index: w, size: n });
    }
    let mut param = model.u.row(w).transpose();
    if let Some(shift) = reference_shift {
        if shift.len() != model.d() {
            return Err(Error::Domain {
                what: "reference shift",
                requirement: "length d",
                got: format!("{} vs d={}", shift.len(), model.d()),
            });
        }
        param += shift;
    }
    let scores = &model.v * &param;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Overflow { word: w });
    }
    let max = scores.max();
    let exps = scores.map(|s| (s - max).exp().max(PROB_FLOOR));
    let sum = kahan_sum(exps.iter().copied());
    Ok(SimplexPoint(exps / sum))
}

/// Conditional at the parameter the shift mode prescribes: u_w alone, or
/// u_w + v_w.
pub fn conditional_with_mode(
    model: &EmbeddingModel,
    w: usize,
    mode: ShiftMode,
) -> Result<SimplexPoint> {
    match mode {
        ShiftMode::U => conditional_distribution(model, w, None),
        ShiftMode::UPlusV => {
            if w >= model.n() {
                return Err(Error::WordIndexOutOfRange {
                    index: w,
                    size: model.n(),
                });
            }
            let shift = model.v.row(w).transpose();
            conditional_distribution(model, w, Some(&shift))
        }
    }
}

/// h_α(p): log p at α=1, else (2/(1−α))·p^{(1−α)/2} entrywise.
pub fn h_map(p: &SimplexPoint, alpha: Alpha) -> Result<HPoint> {
    let a = alpha.finite_value()?;
    let q = if a == 1.0 {
        p.as_vector().map(f64::ln)
    } else {
        let e = (1.0 - a) / 2.0;
        let scale = 2.0 / (1.0 - a);
        p.as_vector().map(|x| scale * x.powf(e))
    };
    if let Some((i, &bad)) = q.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::Domain {
            what: "h-representation entry",
            requirement: "finite",
            got: format!("q[{i}] = {bad} at alpha = {a}"),
        });
    }
    Ok(HPoint { q, alpha })
}

fn h_inverse_entrywise(q: &DVector<f64>, alpha: f64) -> Result<DVector<f64>> {
    if alpha == 1.0 {
        return Ok(q.map(f64::exp));
    }
    let e = (1.0 - alpha) / 2.0;
    let mut out = DVector::zeros(q.len());
    for (i, &qi) in q.iter().enumerate() {
        let base = e * qi;
        if !(base > 0.0) {
            return Err(Error::InverseDomain {
                alpha,
                index: i,
                value: qi,
            });
        }
        out[i] = base.powf(1.0 / e);
    }
    Ok(out)
}

/// Inverse of [`h_map`]; errors when a component leaves the domain of the
/// entrywise inverse.
pub fn h_inverse(hp: &HPoint) -> Result<SimplexPoint> {
    let a = hp.alpha.finite_value()?;
    let p = h_inverse_entrywise(&hp.q, a)?;
    SimplexPoint::new(p)
}

/// Differential of h_α at p applied to a tangent vector:
/// p^{−(1+α)/2} ⊙ ṗ. Requires Σᵢ ṗᵢ = 0.
pub fn pushforward(p: &SimplexPoint, pdot: &DVector<f64>, alpha: Alpha) -> Result<DVector<f64>> {
    let a = alpha.finite_value()?;
    let sum = kahan_sum(pdot.iter().copied());
    if sum.abs() > TANGENT_SUM_TOL {
        return Err(Error::NotTangent { sum });
    }
    let e = -(1.0 + a) / 2.0;
    Ok(p.as_vector().zip_map(pdot, |pi, v| pi.powf(e) * v))
}

/// Curve t ↦ h_α⁻¹(t·h_α(p) + (1−t)·h_α(q)), renormalized to unit mass.
/// The endpoints return p and q bit for bit.
pub fn alpha_geodesic(
    p: &SimplexPoint,
    q: &SimplexPoint,
    alpha: Alpha,
    t: f64,
) -> Result<SimplexPoint> {
    let a = alpha.finite_value()?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain {
            what: "geodesic parameter t",
            requirement: "in [0, 1]",
            got: t.to_string(),
        });
    }
    if t == 0.0 {
        return Ok(q.clone());
    }
    if t == 1.0 {
        return Ok(p.clone());
    }
    let hp = h_map(p, alpha)?;
    let hq = h_map(q, alpha)?;
    let mixed = &hp.q * t + &hq.q * (1.0 - t);
    let raw = h_inverse_entrywise(&mixed, a).map_err(|e| match e {
        Error::InverseDomain { .. } => Error::GeodesicDomain { alpha: a, t },
        other => other,
    })?;
    let c = kahan_sum(raw.iter().copied());
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::GeodesicDomain { alpha: a, t });
    }
    SimplexPoint::new(raw / c).map_err(|_| Error::GeodesicDomain { alpha: a, t })
}

/// Tangent vector at p pointing to q in h_α coordinates: h_α(q) − h_α(p).
pub fn alpha_log_map(p: &SimplexPoint, q: &SimplexPoint, alpha: Alpha) -> Result<DVector<f64>> {
    let hq = h_map(q, alpha)?;
    let hp = h_map(p, alpha)?;
    Ok(hq.q - hp.q)
}

/// ΔV = V − 1⊗E_p[V]: context vectors centered under the reference.
pub fn centered_statistics(model: &EmbeddingModel, reference: &ReferenceMeasure) -> DMatrix<f64> {
    let p = reference.p.as_vector();
    let n = model.n();
    let d = model.d();
    let mut delta = model.v.clone();
    for k in 0..d {
        let mean = kahan_sum((0..n).map(|x| p[x] * model.v[(x, k)]));
        for x in 0..n {
            delta[(x, k)] -= mean;
        }
    }
    delta
}

/// I(u) = ΔVᵀ diag(p) ΔV, symmetrized against roundoff.
pub fn fisher_matrix(model: &EmbeddingModel, reference: &ReferenceMeasure) -> FisherMatrix {
    let delta = centered_statistics(model, reference);
    FisherMatrix {
        matrix: fisher_from_delta(&delta, &reference.p),
        reference: reference.clone(),
    }
}

pub(crate) fn fisher_from_delta(delta: &DMatrix<f64>, p: &SimplexPoint) -> DMatrix<f64> {
    let pv = p.as_vector();
    let mut scaled = delta.clone();
    for (x, mut row) in scaled.row_iter_mut().enumerate() {
        row *= pv[x];
    }
    let i = delta.transpose() * scaled;
    (&i + i.transpose()) * 0.5
}

/// A_α = diag(p^{(1−α)/2}) ΔV.
pub fn tangent_basis(
    model: &EmbeddingModel,
    reference: &ReferenceMeasure,
    alpha: Alpha,
) -> Result<TangentBasis> {
    let a = alpha.finite_value()?;
    let delta_v = centered_statistics(model, reference);
    let weights = reference.p.pow((1.0 - a) / 2.0);
    let mut basis = delta_v.clone();
    for (x, mut row) in basis.row_iter_mut().enumerate() {
        row *= weights[x];
    }
    Ok(TangentBasis {
        a: basis,
        alpha,
        reference: reference.clone(),
        delta_v,
    })
}

/// Regularized Fisher solver: symmetric eigendecomposition with the Tikhonov
/// floor ε = 1e-10·trace/d added to every eigenvalue. The same regularized
/// operator backs inverses, inner products, and norms.
#[derive(Clone, Debug)]
pub struct FisherSolver {
    eigvecs: DMatrix<f64>,
    eigvals: DVector<f64>,
    regularized: DVector<f64>,
    pub effective_rank: usize,
    pub floor: f64,
}

impl FisherSolver {
    pub fn new(fisher: &FisherMatrix) -> Result<Self> {
        Self::from_matrix(&fisher.matrix)
    }

    pub fn from_matrix(matrix: &DMatrix<f64>) -> Result<Self> {
        let d = matrix.nrows();
        let trace = matrix.trace();
        if !trace.is_finite() || trace <= 0.0 {
            return Err(Error::RankDeficient {
                effective_rank: 0,
                dim: d,
            });
        }
        let floor = 1e-10 * trace / d as f64;
        let eigen = matrix.clone().symmetric_eigen();
        let effective_rank = eigen.eigenvalues.iter().filter(|&&l| l > floor).count();
        let regularized = eigen.eigenvalues.map(|l| l + floor);
        if regularized.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::RankDeficient {
                effective_rank,
                dim: d,
            });
        }
        Ok(FisherSolver {
            eigvecs: eigen.eigenvectors,
            eigvals: eigen.eigenvalues,
            regularized,
            effective_rank,
            floor,
        })
    }

    pub fn dim(&self) -> usize {
        self.regularized.len()
    }

    /// Raw spectrum, descending.
    pub fn eigenvalues_sorted(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigvals.iter().copied().collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }

    /// (I + εId)⁻¹ · rhs.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut coords = self.eigvecs.transpose() * rhs;
        for (c, l) in coords.iter_mut().zip(self.regularized.iter()) {
            *c /= *l;
        }
        &self.eigvecs * coords
    }

    /// ⟨x, y⟩ under the regularized Fisher metric.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let cx = self.eigvecs.transpose() * x;
        let cy = self.eigvecs.transpose() * y;
        cx.iter()
            .zip(cy.iter())
            .zip(self.regularized.iter())
            .map(|((a, b), l)| a * b * l)
            .sum()
    }

    /// ‖x‖ under the regularized Fisher metric.
    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }
}

/// Coordinates of the g_α-orthogonal projection of an ambient vector onto
/// the span of A_α: I(u)⁻¹ ΔVᵀ (p^{(1+α)/2} ⊙ a).
pub fn project_to_tangent(
    a: &DVector<f64>,
    basis: &TangentBasis,
    solver: &FisherSolver,
) -> Result<DVector<f64>> {
    let alpha = basis.alpha.finite_value()?;
    let p = basis.reference.p.as_vector();
    if a.len() != p.len() {
        return Err(Error::Domain {
            what: "ambient vector",
            requirement: "length n",
            got: format!("{} vs n={}", a.len(), p.len()),
        });
    }
    let e = (1.0 + alpha) / 2.0;
    let weighted = DVector::from_fn(a.len(), |x, _| p[x].powf(e) * a[x]);
    let rhs = basis.delta_v.transpose() * weighted;
    Ok(solver.solve(&rhs))
}
