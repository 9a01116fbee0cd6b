//! Operator means and entropies on symmetric positive-definite matrices.
//!
//! Every matrix function of a pair `(A, B)` goes through the congruence kernel
//! `C = A^{-1/2} B A^{-1/2}`: with `C = V diag(μ) Vᵀ` and `W = A^{1/2} V`,
//! `A^{1/2} f(C) A^{1/2} = W diag(f(μ)) Wᵀ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, RealField, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// Default Loewner tolerance.
pub const DEFAULT_LOEWNER_TOL: f64 = 1e-8;
/// `|1 − 2v|` below which the sandwich case uses its `v = 1/2` limit.
pub const SANDWICH_SWITCH: f64 = 1e-6;
/// `|r|` below which the Tsallis entropy is the classical one.
pub const DEFORMATION_SWITCH: f64 = 1e-12;

fn cst<T: RealField + Copy>(x: f64) -> T {
    nalgebra::convert(x)
}

fn to_f64<T: RealField + Copy>(x: T) -> f64 {
    nalgebra::try_convert(x).unwrap_or(f64::NAN)
}

fn max_abs<T: RealField + Copy>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

fn symmetrized<T: RealField + Copy>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * cst::<T>(0.5)
}

/// Eigenpairs sorted by descending eigenvalue.
fn sorted_eigen<T: RealField + Copy>(m: DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let eig = SymmetricEigen::new(m);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `W diag(d) Wᵀ`.
fn congruence<T: RealField + Copy>(w: &DMatrix<T>, d: &[T]) -> DMatrix<T> {
    let mut scaled = w.clone();
    for (j, &x) in d.iter().enumerate() {
        scaled.column_mut(j).scale_mut(x);
    }
    symmetrized(&(scaled * w.transpose()))
}

/// A symmetric positive-definite matrix with its spectrum cached.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix<T: RealField + Copy> {
    matrix: DMatrix<T>,
    eigenvalues: DVector<T>,
    eigenvectors: DMatrix<T>,
}

impl<T: RealField + Copy> SpdMatrix<T> {
    /// Validates symmetry, definiteness and the eigendecomposition, then symmetrizes.
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let asymmetry = max_abs(&(&matrix - matrix.transpose()));
        let eps = T::default_epsilon();
        if asymmetry > cst::<T>(1e-12).max(eps * cst(16.0)) * (T::one() + max_abs(&matrix)) {
            return Err(Error::NotSymmetric {
                asymmetry: to_f64(asymmetry),
            });
        }
        let matrix = symmetrized(&matrix);
        let (eigenvalues, eigenvectors) = sorted_eigen(matrix.clone());
        let min_eig = eigenvalues[rows - 1];
        if min_eig.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::NotPositiveDefinite {
                min_eig: to_f64(min_eig),
            });
        }
        let rebuilt = congruence(&eigenvectors, eigenvalues.as_slice());
        let residual = (&rebuilt - &matrix).norm();
        if residual > cst::<T>(1e-11).max(eps * cst(256.0)) * matrix.norm() {
            return Err(Error::Reconstruction {
                residual: to_f64(residual),
            });
        }
        Ok(Self {
            matrix,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn from_diagonal(diagonal: &[T]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diagonal)))
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<T> {
        &self.eigenvectors
    }

    pub fn condition_number(&self) -> T {
        self.eigenvalues[0] / self.eigenvalues[self.dim() - 1]
    }

    /// `U diag(f(λ)) Uᵀ`.
    pub fn apply(&self, f: impl Fn(T) -> T) -> DMatrix<T> {
        let d: Vec<T> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        congruence(&self.eigenvectors, &d)
    }

    pub fn sqrt(&self) -> DMatrix<T> {
        self.apply(|x| x.sqrt())
    }

    pub fn inv_sqrt(&self) -> DMatrix<T> {
        self.apply(|x| T::one() / x.sqrt())
    }

    pub fn inverse(&self) -> DMatrix<T> {
        self.apply(|x| T::one() / x)
    }

    /// `T X Tᵀ`.
    pub fn congruent(&self, t: &DMatrix<T>) -> Result<Self> {
        check_dims(self.dim(), t.nrows())?;
        Self::new(t * &self.matrix * t.transpose())
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// The congruence kernel of a pair `(A, B)`, decomposed once.
#[derive(Debug, Clone)]
pub struct OperatorPair<T: RealField + Copy> {
    a: SpdMatrix<T>,
    b: SpdMatrix<T>,
    /// Eigenvalues of `A^{-1/2} B A^{-1/2}`.
    kernel: Vec<T>,
    /// `A^{1/2} V`.
    frame: DMatrix<T>,
}

impl<T: RealField + Copy> OperatorPair<T> {
    pub fn new(a: &SpdMatrix<T>, b: &SpdMatrix<T>) -> Result<Self> {
        check_dims(a.dim(), b.dim())?;
        let ais = a.inv_sqrt();
        let c = symmetrized(&(&ais * b.matrix() * &ais));
        let (mu, v) = sorted_eigen(c);
        let frame = a.sqrt() * v;
        Ok(Self {
            a: a.clone(),
            b: b.clone(),
            kernel: mu.iter().copied().collect(),
            frame,
        })
    }

    pub fn a(&self) -> &SpdMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &SpdMatrix<T> {
        &self.b
    }

    /// Eigenvalues of the congruence kernel.
    pub fn kernel_spectrum(&self) -> &[T] {
        &self.kernel
    }

    /// `A^{1/2} f(C) A^{1/2}`.
    pub fn apply_kernel(&self, f: impl Fn(T) -> T) -> DMatrix<T> {
        let d: Vec<T> = self.kernel.iter().map(|&m| f(m)).collect();
        congruence(&self.frame, &d)
    }

    /// `A♯ₓB`, returning `A` and `B` exactly at `x = 0` and `x = 1`.
    pub fn geometric(&self, x: T) -> DMatrix<T> {
        if x == T::zero() {
            return self.a.matrix().clone();
        }
        if x == T::one() {
            return self.b.matrix().clone();
        }
        self.apply_kernel(|m| m.powf(x))
    }

    /// `(1 − v)A + vB`.
    pub fn arithmetic(&self, v: T) -> DMatrix<T> {
        self.a.matrix() * (T::one() - v) + self.b.matrix() * v
    }

    /// `∫_lo^hi A♯ₓB dx`.
    pub fn integrated_geometric(&self, lo: f64, hi: f64, rule: &QuadratureRule) -> DMatrix<T> {
        self.apply_kernel(|m| panel_integral(m, lo, hi, rule))
    }

    /// `Aℓ_vB`, the split integral of `A♯ₓB` with weights `v/(1−v)` and `(1−v)/v`.
    ///
    /// For commuting `A`, `B` this is the scalar `L_{1−v}` applied eigenwise,
    /// since `A♯ₓB` reduces to `a^{1−x}b^x`. The endpoints are the limits of
    /// the integral form: `v = 0` gives `B` and `v = 1` gives `A`.
    pub fn log_mean_w(&self, v: f64, rule: &QuadratureRule) -> DMatrix<T> {
        if v <= 0.0 {
            return self.b.matrix().clone();
        }
        if v >= 1.0 {
            return self.a.matrix().clone();
        }
        let u = 1.0 - v;
        let (left, right) = (cst::<T>(v / u), cst::<T>(u / v));
        self.apply_kernel(|m| {
            left * panel_integral(m, 0.0, u, rule) + right * panel_integral(m, u, 1.0, rule)
        })
    }

    /// `AℓB = ∫₀¹ A♯ₓB dx`.
    pub fn log_mean(&self, rule: &QuadratureRule) -> DMatrix<T> {
        self.integrated_geometric(0.0, 1.0, rule)
    }

    /// `S(A|B) = A^{1/2} log(C) A^{1/2}`.
    pub fn relative_entropy(&self) -> DMatrix<T> {
        self.apply_kernel(|m| m.ln())
    }

    /// `S_r(A|B) = A^{1/2} ln_r(C) A^{1/2}`; classical below the deformation switch.
    pub fn tsallis_relative_entropy(&self, r: T) -> DMatrix<T> {
        if r.abs() < cst(DEFORMATION_SWITCH) {
            return self.relative_entropy();
        }
        self.apply_kernel(|m| (r * m.ln()).exp_m1() / r)
    }
}

/// `∫_lo^hi m^x dx` by the rule.
fn panel_integral<T: RealField + Copy>(m: T, lo: f64, hi: f64, rule: &QuadratureRule) -> T {
    let ln_m = m.ln();
    rule.panel(lo, hi)
        .fold(T::zero(), |acc, (x, w)| acc + cst::<T>(w) * (cst::<T>(x) * ln_m).exp())
}

pub fn op_weighted_geometric<T: RealField + Copy>(
    a: &SpdMatrix<T>,
    b: &SpdMatrix<T>,
    x: T,
) -> Result<SpdMatrix<T>> {
    if x < T::zero() || x > T::one() {
        return Err(Error::OutOfRange {
            name: "x",
            value: to_f64(x),
            lo: 0.0,
            hi: 1.0,
        });
    }
    check_dims(a.dim(), b.dim())?;
    if x == T::zero() {
        return Ok(a.clone());
    }
    if x == T::one() {
        return Ok(b.clone());
    }
    SpdMatrix::new(OperatorPair::new(a, b)?.geometric(x))
}

pub fn op_weighted_arithmetic<T: RealField + Copy>(
    a: &SpdMatrix<T>,
    b: &SpdMatrix<T>,
    v: T,
) -> Result<SpdMatrix<T>> {
    check_dims(a.dim(), b.dim())?;
    SpdMatrix::new(a.matrix() * (T::one() - v) + b.matrix() * v)
}

pub fn op_log_mean_w<T: RealField + Copy>(
    a: &SpdMatrix<T>,
    b: &SpdMatrix<T>,
    v: f64,
    rule: &QuadratureRule,
) -> Result<SpdMatrix<T>> {
    SpdMatrix::new(OperatorPair::new(a, b)?.log_mean_w(v, rule))
}

pub fn relative_entropy<T: RealField + Copy>(
    a: &SpdMatrix<T>,
    b: &SpdMatrix<T>,
) -> Result<DMatrix<T>> {
    Ok(OperatorPair::new(a, b)?.relative_entropy())
}

pub fn tsallis_relative_entropy<T: RealField + Copy>(
    a: &SpdMatrix<T>,
    b: &SpdMatrix<T>,
    r: T,
) -> Result<DMatrix<T>> {
    Ok(OperatorPair::new(a, b)?.tsallis_relative_entropy(r))
}

/// Outcome of one Loewner comparison `X ≤ Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoewnerVerdict {
    /// Smallest eigenvalue of `sym(Y − X)`.
    pub min_eig: f64,
    /// `1 + ‖Y − X‖_F`.
    pub scale: f64,
    pub tol: f64,
    pub holds: bool,
}

pub fn loewner_leq<T: RealField + Copy>(
    x: &DMatrix<T>,
    y: &DMatrix<T>,
    tol: f64,
) -> Result<LoewnerVerdict> {
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch {
            left: x.nrows(),
            right: y.nrows(),
        });
    }
    let d = symmetrized(&(y - x));
    let min_eig = if d.nrows() == 0 {
        0.0
    } else {
        SymmetricEigen::new(d.clone())
            .eigenvalues
            .iter()
            .map(|&e| to_f64(e))
            .fold(f64::INFINITY, f64::min)
    };
    let scale = 1.0 + to_f64(d.norm());
    Ok(LoewnerVerdict {
        min_eig,
        scale,
        tol,
        holds: min_eig >= -tol * scale,
    })
}

/// The operator inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorCase {
    /// `(1/(1−2v))∫_v^{1−v} A♯ₓB dx ≤ AℓB`.
    OpSandwich,
    /// `(Aℓ_vB)A⁻¹(Aℓ_{1−v}B) ≤ (AℓB)A⁻¹(AℓB)`.
    OpProduct,
    /// `AℓB ≤ ½Aℓ_vB + ½Aℓ_{1−v}B`.
    OpAvg,
    /// `AℓB ≤ ½A∇_vB + ½A♯_{1−v}B`.
    OpMix,
    /// `0 ≤ Kᵀ(A♯_vB)K ≤ A∇_vB − A♯_vB`, `K = (μ/√2)A⁻¹S(A|B)`.
    OpZj,
    /// As [`OperatorCase::OpZj`] with `S_r`, for `r > 0, B ≤ A` or `r < 0, A ≤ B`.
    OpZjTsallis,
}

impl OperatorCase {
    pub const ALL: [OperatorCase; 6] = [
        OperatorCase::OpSandwich,
        OperatorCase::OpProduct,
        OperatorCase::OpAvg,
        OperatorCase::OpMix,
        OperatorCase::OpZj,
        OperatorCase::OpZjTsallis,
    ];

    pub fn key(self) -> &'static str {
        match self {
            OperatorCase::OpSandwich => "op_sandwich",
            OperatorCase::OpProduct => "op_product",
            OperatorCase::OpAvg => "op_avg",
            OperatorCase::OpMix => "op_mix",
            OperatorCase::OpZj => "op_zj",
            OperatorCase::OpZjTsallis => "op_zj_tsallis",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            OperatorCase::OpSandwich => "(1/(1-2v)) int_v^{1-v} A#_x B dx <= A l B",
            OperatorCase::OpProduct => "(A l_v B) A^-1 (A l_{1-v} B) <= (A l B) A^-1 (A l B)",
            OperatorCase::OpAvg => "A l B <= (1/2) A l_v B + (1/2) A l_{1-v} B",
            OperatorCase::OpMix => "A l B <= (1/2) A nabla_v B + (1/2) A #_{1-v} B",
            OperatorCase::OpZj => "0 <= K*(A #_v B)K <= A nabla_v B - A #_v B, K = (mu/sqrt 2) A^-1 S(A|B)",
            OperatorCase::OpZjTsallis => {
                "0 <= K_r*(A #_v B)K_r <= A nabla_v B - A #_v B, K_r = (mu/sqrt 2) A^-1 S_r(A|B)"
            }
        }
    }

    pub fn needs_r(self) -> bool {
        self == OperatorCase::OpZjTsallis
    }
}

impl fmt::Display for OperatorCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for OperatorCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.key() == s)
            .ok_or_else(|| Error::UnknownCase(s.to_string()))
    }
}

/// One checked Loewner claim of an operator case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorCheck {
    pub claim: &'static str,
    pub verdict: LoewnerVerdict,
}

/// All claims of an operator case at one pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorReport {
    pub case: OperatorCase,
    pub dim: usize,
    pub v: f64,
    pub r: Option<f64>,
    pub checks: Vec<OperatorCheck>,
}

impl OperatorReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.verdict.holds)
    }

    /// Smallest `min_eig / scale` over the checks.
    pub fn min_relative_eig(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.verdict.min_eig / c.verdict.scale)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Builds both sides of `case` at `(A, B, v)` and checks each claimed `≤`.
pub fn check_operator_case<T: RealField + Copy>(
    case: OperatorCase,
    a: &SpdMatrix<T>,
    b: &SpdMatrix<T>,
    v: f64,
    r: Option<f64>,
    rule: &QuadratureRule,
    tol: f64,
) -> Result<OperatorReport> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange {
            name: "v",
            value: v,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let pair = OperatorPair::new(a, b)?;
    let half = cst::<T>(0.5);
    let vt = cst::<T>(v);
    let mut checks = Vec::new();
    let mut claim = |label, x: &DMatrix<T>, y: &DMatrix<T>| -> Result<()> {
        checks.push(OperatorCheck {
            claim: label,
            verdict: loewner_leq(x, y, tol)?,
        });
        Ok(())
    };
    match case {
        OperatorCase::OpSandwich => {
            let mu = v.min(1.0 - v);
            let lhs = if (1.0 - 2.0 * mu).abs() < SANDWICH_SWITCH {
                pair.geometric(half)
            } else {
                pair.integrated_geometric(mu, 1.0 - mu, rule) * cst::<T>(1.0 / (1.0 - 2.0 * mu))
            };
            claim("sandwich <= A l B", &lhs, &pair.log_mean(rule))?;
        }
        OperatorCase::OpProduct => {
            let a_inv = a.inverse();
            let lhs = pair.log_mean_w(v, rule) * &a_inv * pair.log_mean_w(1.0 - v, rule);
            let l = pair.log_mean(rule);
            let rhs = &l * &a_inv * &l;
            claim("product <= (A l B) A^-1 (A l B)", &lhs, &rhs)?;
        }
        OperatorCase::OpAvg => {
            let rhs = (pair.log_mean_w(v, rule) + pair.log_mean_w(1.0 - v, rule)) * half;
            claim("A l B <= average", &pair.log_mean(rule), &rhs)?;
        }
        OperatorCase::OpMix => {
            let rhs = (pair.arithmetic(vt) + pair.geometric(T::one() - vt)) * half;
            claim("A l B <= mix", &pair.log_mean(rule), &rhs)?;
        }
        OperatorCase::OpZj | OperatorCase::OpZjTsallis => {
            let entropy = if case == OperatorCase::OpZjTsallis {
                let r = r.ok_or_else(|| Error::MissingParameter {
                    case: case.key().to_string(),
                    param: "r",
                })?;
                check_tsallis_order(a, b, r, tol)?;
                pair.tsallis_relative_entropy(cst(r))
            } else {
                pair.relative_entropy()
            };
            let mu = v.min(1.0 - v);
            let k = a.inverse() * entropy * cst::<T>(mu / std::f64::consts::SQRT_2);
            let g = pair.geometric(vt);
            let middle = k.transpose() * &g * &k;
            let zero = DMatrix::zeros(a.dim(), a.dim());
            claim("0 <= middle", &zero, &middle)?;
            claim("middle <= A nabla_v B - A #_v B", &middle, &(pair.arithmetic(vt) - g))?;
        }
    }
    Ok(OperatorReport {
        case,
        dim: a.dim(),
        v,
        r: if case.needs_r() { r } else { None },
        checks,
    })
}

/// The order precondition of the Tsallis case: `B ≤ A` for `r > 0`, `A ≤ B` for `r < 0`.
pub fn check_tsallis_order<T: RealField + Copy>(
    a: &SpdMatrix<T>,
    b: &SpdMatrix<T>,
    r: f64,
    tol: f64,
) -> Result<()> {
    let (condition, verdict) = if r > 0.0 {
        ("r > 0 requires B <= A", loewner_leq(b.matrix(), a.matrix(), tol)?)
    } else if r < 0.0 {
        ("r < 0 requires A <= B", loewner_leq(a.matrix(), b.matrix(), tol)?)
    } else {
        return Err(Error::PreconditionViolated {
            case: OperatorCase::OpZjTsallis.key().to_string(),
            condition: "r must be nonzero".into(),
        });
    };
    if verdict.holds {
        Ok(())
    } else {
        Err(Error::PreconditionViolated {
            case: OperatorCase::OpZjTsallis.key().to_string(),
            condition: condition.into(),
        })
    }
}

/// Deterministic random SPD matrix with eigenvalues log-uniform on `[1, condition]`.
///
/// For `dim ≥ 2` the extreme eigenvalues are pinned to `1` and `condition`; the
/// eigenbasis is the sign-corrected Q factor of a Gaussian matrix.
pub fn random_spd(dim: usize, seed: u64, condition: f64) -> SpdMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_spd_with(&mut rng, dim, condition)
}

pub(crate) fn random_spd_with(rng: &mut impl Rng, dim: usize, condition: f64) -> SpdMatrix<f64> {
    assert!(dim >= 1, "dimension must be positive");
    let condition = condition.max(1.0);
    let log_c = condition.ln();
    let mut eigs: Vec<f64> = (0..dim).map(|_| (rng.gen::<f64>() * log_c).exp()).collect();
    if dim >= 2 {
        eigs[0] = 1.0;
        eigs[dim - 1] = condition;
    }
    let q = haar_orthogonal(rng, dim);
    let m = congruence(&q, &eigs);
    SpdMatrix::new(m).expect("constructed SPD")
}

fn haar_orthogonal(rng: &mut impl Rng, dim: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// How ensemble pairs relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOrder {
    /// Independent draws.
    Unordered,
    /// `B ≤ A`.
    BelowA,
    /// `A ≤ B`.
    AboveA,
}

/// Parameters of a seeded pair ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub dim: usize,
    pub seed: u64,
    /// Upper bound on the condition number of every generated matrix.
    pub max_condition: f64,
    pub order: PairOrder,
}

/// The `index`-th pair of an ensemble; each pair owns its RNG stream.
pub fn ensemble_pair(spec: &EnsembleSpec, index: u64) -> (SpdMatrix<f64>, SpdMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (spec.dim as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    let log_max = spec.max_condition.max(1.0).ln();
    match spec.order {
        PairOrder::Unordered => {
            let ca = (rng.gen::<f64>() * log_max).exp();
            let cb = (rng.gen::<f64>() * log_max).exp();
            let a = random_spd_with(&mut rng, spec.dim, ca);
            let b = random_spd_with(&mut rng, spec.dim, cb);
            (a, b)
        }
        PairOrder::BelowA | PairOrder::AboveA => {
            // cond(B) ≤ cond(A)·cond(C) ≤ max_condition
            let half = 0.5 * log_max;
            let ca = (rng.gen::<f64>() * half).exp();
            let cc = (rng.gen::<f64>() * half).exp();
            let a = random_spd_with(&mut rng, spec.dim, ca);
            let c = random_spd_with(&mut rng, spec.dim, cc);
            // rescale C's spectrum into (0, 1] or [1, ∞)
            let top = c.eigenvalues()[0];
            let bottom = c.eigenvalues()[spec.dim - 1];
            let c = if spec.order == PairOrder::BelowA {
                c.matrix() / top
            } else {
                c.matrix() / bottom
            };
            let root = a.sqrt();
            let b = SpdMatrix::new(&root * c * &root).expect("congruence of SPD is SPD");
            (a, b)
        }
    }
}

/// Plain JSON form `{dim, entries}` with row-major entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let entries = (0..dim).flat_map(|i| (0..dim).map(move |j| m[(i, j)])).collect();
        Self { dim, entries }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim * self.dim,
                right: self.entries.len(),
            });
        }
        Ok(DMatrix::from_row_slice(self.dim, self.dim, &self.entries))
    }

    pub fn to_spd(&self) -> Result<SpdMatrix<f64>> {
        SpdMatrix::new(self.to_matrix()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> SpdMatrix<f64> {
        SpdMatrix::from_diagonal(d).unwrap()
    }

    fn rel_frobenius(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        (x - y).norm() / y.norm().max(f64::MIN_POSITIVE)
    }

    fn rule() -> QuadratureRule {
        QuadratureRule::default()
    }

    #[test]
    fn construction_validates() {
        assert!(matches!(
            SpdMatrix::new(DMatrix::<f64>::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        assert!(matches!(SpdMatrix::new(asym), Err(Error::NotSymmetric { .. })));
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(SpdMatrix::new(indef), Err(Error::NotPositiveDefinite { .. })));
        let m = diag(&[1.0, 4.0]);
        assert_eq!(m.eigenvalues().as_slice(), &[4.0, 1.0]);
    }

    #[test]
    fn geometric_examples() {
        let a = diag(&[1.0, 4.0]);
        let b = diag(&[9.0, 16.0]);
        assert_eq!(op_weighted_geometric(&a, &b, 0.0).unwrap(), a);
        assert_eq!(op_weighted_geometric(&a, &b, 1.0).unwrap(), b);
        let g = op_weighted_geometric(&a, &b, 0.5).unwrap();
        assert!(rel_frobenius(g.matrix(), diag(&[3.0, 8.0]).matrix()) < 1e-14);
        assert!(op_weighted_geometric(&a, &diag(&[1.0, 2.0, 3.0]), 0.5).is_err());
        let a = random_spd(4, 1, 100.0);
        let b = random_spd(4, 2, 100.0);
        let ab = op_weighted_geometric(&a, &b, 0.5).unwrap();
        let ba = op_weighted_geometric(&b, &a, 0.5).unwrap();
        assert!(rel_frobenius(ab.matrix(), ba.matrix()) < 1e-10);
    }

    #[test]
    fn arithmetic_examples() {
        let a = diag(&[1.0, 4.0]);
        let b = diag(&[9.0, 16.0]);
        assert_eq!(op_weighted_arithmetic(&a, &b, 0.0).unwrap(), a);
        let m = op_weighted_arithmetic(&a, &b, 0.5).unwrap();
        assert_eq!(m.matrix(), diag(&[5.0, 10.0]).matrix());
        assert_eq!(op_weighted_arithmetic(&a, &a, 0.3).unwrap().matrix(), a.matrix());
    }

    #[test]
    fn log_mean_examples() {
        let a = diag(&[1.0, 4.0]);
        let b = diag(&[9.0, 16.0]);
        let l = op_log_mean_w(&a, &b, 0.5, &rule()).unwrap();
        let expect = diag(&[8.0 / 9f64.ln(), 12.0 / 4f64.ln()]);
        assert!(rel_frobenius(l.matrix(), expect.matrix()) < 1e-10);
        let same = op_log_mean_w(&a, &a, 0.3, &rule()).unwrap();
        assert!(rel_frobenius(same.matrix(), a.matrix()) < 1e-14);
        let a = random_spd(5, 3, 1e4);
        let b = random_spd(5, 4, 1e4);
        let l32 = op_log_mean_w(&a, &b, 0.3, &rule()).unwrap();
        let l64 = op_log_mean_w(&a, &b, 0.3, &QuadratureRule::gauss_legendre(64).unwrap()).unwrap();
        assert!(rel_frobenius(l32.matrix(), l64.matrix()) < 1e-10);
    }

    #[test]
    fn weighted_log_mean_limits_and_commuting_orientation() {
        let a = diag(&[1.0, 4.0]);
        let b = diag(&[9.0, 16.0]);
        let pair = OperatorPair::new(&a, &b).unwrap();
        let rule = rule();
        assert_eq!(&pair.log_mean_w(0.0, &rule), b.matrix());
        assert_eq!(&pair.log_mean_w(1.0, &rule), a.matrix());
        let near_zero = pair.log_mean_w(1e-7, &rule);
        assert!(rel_frobenius(&near_zero, b.matrix()) < 1e-5);
        let l = pair.log_mean_w(0.3, &rule);
        let scalar = |x: f64, y: f64| {
            let p = crate::means::ScalarPair::new(x, y).unwrap();
            crate::means::weighted_log_mean(&p, &crate::means::WeightSplit::new(0.7).unwrap())
        };
        let expect = diag(&[scalar(1.0, 9.0), scalar(4.0, 16.0)]);
        assert!(rel_frobenius(&l, expect.matrix()) < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let a = random_spd(3, 5, 50.0);
        assert!(relative_entropy(&a, &a).unwrap().norm() < 1e-12);
        let b = diag(&[2.0, 3.0]);
        let s = relative_entropy(&SpdMatrix::identity(2), &b).unwrap();
        assert!(rel_frobenius(&s, diag(&[2f64.ln(), 3f64.ln()]).matrix()) < 1e-15);
        let s = relative_entropy(&diag(&[1.0, 4.0]), &diag(&[9.0, 16.0])).unwrap();
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![9f64.ln(), 4.0 * 4f64.ln()]));
        assert!(rel_frobenius(&s, &expect) < 1e-14);
        assert!(tsallis_relative_entropy(&a, &a, 0.7).unwrap().norm() < 1e-12);
        let t = tsallis_relative_entropy(&SpdMatrix::identity(2), &diag(&[4.0, 9.0]), 1.0).unwrap();
        assert!(rel_frobenius(&t, diag(&[3.0, 8.0]).matrix()) < 1e-14);
        let b = random_spd(3, 6, 50.0);
        let limit = tsallis_relative_entropy(&a, &b, 1e-9).unwrap();
        assert!(rel_frobenius(&limit, &relative_entropy(&a, &b).unwrap()) < 1e-8);
    }

    #[test]
    fn loewner_examples() {
        let x = diag(&[1.0, 2.0]);
        let same = loewner_leq(x.matrix(), x.matrix(), 1e-8).unwrap();
        assert!(same.holds);
        assert_eq!(same.min_eig, 0.0);
        let v = loewner_leq(x.matrix(), diag(&[2.0, 3.0]).matrix(), 1e-8).unwrap();
        assert!(v.holds);
        assert!((v.min_eig - 1.0).abs() < 1e-15);
        let back = loewner_leq(diag(&[2.0, 3.0]).matrix(), x.matrix(), 1e-8).unwrap();
        assert!(!back.holds);
        let a = random_spd(4, 7, 1e3);
        let b = random_spd(4, 8, 1e3);
        let p = OperatorPair::new(&a, &b).unwrap();
        assert!(loewner_leq(&p.geometric(0.37), &p.arithmetic(0.37), 1e-8).unwrap().holds);
    }

    #[test]
    fn zj_on_scalar_matrices() {
        let e2 = std::f64::consts::E.powi(2);
        let a = SpdMatrix::identity(3);
        let b = diag(&[e2, e2, e2]);
        let rep = check_operator_case(OperatorCase::OpZj, &a, &b, 0.5, None, &rule(), 1e-8).unwrap();
        assert!(rep.holds());
        // RHS − middle = (1 + e² − 3e)/2
        let gap = rep.checks[1].verdict.min_eig;
        let e = std::f64::consts::E;
        assert!((gap - (1.0 + e2 - 3.0 * e) / 2.0).abs() < 1e-12);
        assert!((rep.checks[0].verdict.min_eig - e / 2.0).abs() < 1e-12);
    }

    #[test]
    fn tsallis_precondition() {
        let a = diag(&[2.0, 2.0]);
        let b = SpdMatrix::identity(2);
        let ok = check_operator_case(OperatorCase::OpZjTsallis, &a, &b, 0.3, Some(1.0), &rule(), 1e-8);
        assert!(ok.unwrap().holds());
        let bad = check_operator_case(OperatorCase::OpZjTsallis, &b, &a, 0.3, Some(1.0), &rule(), 1e-8);
        assert!(matches!(bad, Err(Error::PreconditionViolated { .. })));
        let missing = check_operator_case(OperatorCase::OpZjTsallis, &a, &b, 0.3, None, &rule(), 1e-8);
        assert!(matches!(missing, Err(Error::MissingParameter { .. })));
    }

    #[test]
    fn every_case_collapses_at_equal_pair() {
        let a = random_spd(3, 9, 100.0);
        for case in OperatorCase::ALL {
            let rep = check_operator_case(case, &a, &a, 0.3, Some(1.0), &rule(), 1e-8).unwrap();
            assert!(rep.holds(), "{case}");
        }
    }

    #[test]
    fn random_spd_examples() {
        let one = random_spd(1, 11, 1e4);
        assert!(one.matrix()[(0, 0)] > 0.0);
        assert_eq!(random_spd(4, 12, 10.0), random_spd(4, 12, 10.0));
        let m = random_spd(8, 13, 1e4);
        let k = m.condition_number();
        assert!((0.5e4..=2e4).contains(&k), "{k}");
    }

    #[test]
    fn ordered_ensembles_respect_order() {
        for order in [PairOrder::BelowA, PairOrder::AboveA] {
            let spec = EnsembleSpec { dim: 4, seed: 3, max_condition: 1e4, order };
            for i in 0..20 {
                let (a, b) = ensemble_pair(&spec, i);
                let v = match order {
                    PairOrder::BelowA => loewner_leq(b.matrix(), a.matrix(), 1e-10).unwrap(),
                    _ => loewner_leq(a.matrix(), b.matrix(), 1e-10).unwrap(),
                };
                assert!(v.holds);
                assert!(b.condition_number() <= 1e4 * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = random_spd(3, 14, 10.0);
        let j = MatrixJson::from_matrix(m.matrix());
        assert_eq!(j.dim, 3);
        assert_eq!(&j.to_matrix().unwrap(), m.matrix());
        let bad = MatrixJson { dim: 2, entries: vec![1.0] };
        assert!(bad.to_matrix().is_err());
    }

    #[test]
    fn generic_over_f32() {
        let a = SpdMatrix::<f32>::from_diagonal(&[1.0, 4.0]).unwrap();
        let b = SpdMatrix::<f32>::from_diagonal(&[9.0, 16.0]).unwrap();
        let g = op_weighted_geometric(&a, &b, 0.5f32).unwrap();
        assert!((g.matrix()[(1, 1)] - 8.0).abs() < 1e-4);
    }
}
