//! Weighted scalar means and deformed logarithms.
//!
//! Every kernel is generic over [`Real`] and total on validated inputs:
//! invalid pairs, weights and deformations are rejected at construction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{c, max_of, min_of, Real};

/// A positive pair `(a, b)` with `ln(a/b)` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPair<T: Real> {
    a: T,
    b: T,
    log_ratio: T,
}

fn check_positive<T: Real>(name: &'static str, x: &T) -> Result<()> {
    if x.is_finite() && *x > T::zero() {
        Ok(())
    } else {
        Err(Error::NonPositive {
            name,
            value: x.to_f64(),
        })
    }
}

/// `ln(hi/lo)` for `hi > lo > 0`.
fn log_ratio_ordered<T: Real>(hi: &T, lo: &T) -> T {
    let diff = hi.clone() - lo.clone();
    if diff <= *lo {
        // lo <= hi <= 2 lo: the difference is exact.
        (diff / lo.clone()).ln_1p()
    } else {
        let ratio = hi.clone() / lo.clone();
        if ratio.is_finite() {
            ratio.ln()
        } else {
            hi.ln() - lo.ln()
        }
    }
}

impl<T: Real> ScalarPair<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        check_positive("a", &a)?;
        check_positive("b", &b)?;
        let log_ratio = if a == b {
            T::zero()
        } else if a > b {
            log_ratio_ordered(&a, &b)
        } else {
            -log_ratio_ordered(&b, &a)
        };
        Ok(Self { a, b, log_ratio })
    }

    pub fn a(&self) -> &T {
        &self.a
    }

    pub fn b(&self) -> &T {
        &self.b
    }

    /// `ln a − ln b`, antisymmetric bit for bit under [`ScalarPair::swapped`].
    pub fn log_ratio(&self) -> &T {
        &self.log_ratio
    }

    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            log_ratio: -self.log_ratio.clone(),
        }
    }

    /// `(c·a, c·b)`.
    pub fn scaled(&self, factor: &T) -> Result<Self> {
        Self::new(self.a.clone() * factor.clone(), self.b.clone() * factor.clone())
    }

    pub fn max(&self) -> T {
        max_of(&self.a, &self.b)
    }
}

/// A weight `v ∈ [0, 1]` with `1 − v`, `μ = min{1−v, v}` and `λ = max{1−v, v}`.
///
/// `1 − v` is computed once; [`WeightSplit::flipped`] swaps the two halves
/// instead of recomputing, so `M_v(a,b)` and `M_{1−v}(b,a)` see identical weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSplit<T: Real> {
    v: T,
    complement: T,
    mu: T,
    lambda: T,
}

impl<T: Real> WeightSplit<T> {
    pub fn new(v: T) -> Result<Self> {
        if !v.is_finite() || v < T::zero() || v > T::one() {
            return Err(Error::OutOfRange {
                name: "v",
                value: v.to_f64(),
                lo: 0.0,
                hi: 1.0,
            });
        }
        let complement = T::one() - v.clone();
        Ok(Self::from_parts(v, complement))
    }

    fn from_parts(v: T, complement: T) -> Self {
        let mu = min_of(&v, &complement);
        let lambda = max_of(&v, &complement);
        Self {
            v,
            complement,
            mu,
            lambda,
        }
    }

    pub fn half() -> Self {
        Self::from_parts(c(0.5), c(0.5))
    }

    pub fn v(&self) -> &T {
        &self.v
    }

    /// `1 − v`.
    pub fn complement(&self) -> &T {
        &self.complement
    }

    pub fn mu(&self) -> &T {
        &self.mu
    }

    pub fn lambda(&self) -> &T {
        &self.lambda
    }

    /// The weight `1 − v`.
    pub fn flipped(&self) -> Self {
        Self {
            v: self.complement.clone(),
            complement: self.v.clone(),
            mu: self.mu.clone(),
            lambda: self.lambda.clone(),
        }
    }

    pub fn is_half(&self) -> bool {
        self.v == self.complement
    }

    /// `max(v/(1−v), (1−v)/v, 1)`, the prefactor amplification of the weighted log-mean kernel.
    ///
    /// Weights snapped to an endpoint by the kernel report 1.
    pub fn kernel_amplification(&self) -> T {
        let cut = T::weight_cutoff();
        if self.v < cut || self.complement < cut {
            return T::one();
        }
        let r = self.lambda.clone() / self.mu.clone();
        max_of(&r, &T::one())
    }
}

/// Deformation parameter `r` of the r-logarithm; `r = 0` is the classical logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct Deformation<T: Real> {
    r: T,
}

impl<T: Real> Deformation<T> {
    pub fn new(r: T) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::NonFinite {
                name: "r",
                value: r.to_f64(),
            });
        }
        Ok(Self { r })
    }

    pub fn classical() -> Self {
        Self { r: T::zero() }
    }

    pub fn r(&self) -> &T {
        &self.r
    }

    pub fn is_classical(&self) -> bool {
        self.r.abs() < T::deformation_cutoff()
    }
}

/// The means the library knows by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeanKind {
    Arithmetic,
    Geometric,
    Harmonic,
    Logarithmic,
    Heinz,
    PowerThird,
}

impl MeanKind {
    pub const ALL: [MeanKind; 6] = [
        MeanKind::Arithmetic,
        MeanKind::Geometric,
        MeanKind::Harmonic,
        MeanKind::Logarithmic,
        MeanKind::Heinz,
        MeanKind::PowerThird,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            MeanKind::Arithmetic => "A",
            MeanKind::Geometric => "G",
            MeanKind::Harmonic => "H",
            MeanKind::Logarithmic => "L",
            MeanKind::Heinz => "Hz",
            MeanKind::PowerThird => "P3",
        }
    }

    /// Whether the kind may appear in a nested mean.
    pub fn nests(self) -> bool {
        !matches!(self, MeanKind::Heinz | MeanKind::PowerThird)
    }

    /// Evaluates the mean. Unweighted kinds ignore `w`.
    pub fn eval<T: Real>(self, pair: &ScalarPair<T>, w: &WeightSplit<T>) -> T {
        match self {
            MeanKind::Arithmetic => weighted_arithmetic(pair, w),
            MeanKind::Geometric => weighted_geometric(pair, w),
            MeanKind::Harmonic => weighted_harmonic(pair, w),
            MeanKind::Logarithmic => weighted_log_mean(pair, w),
            MeanKind::Heinz => heinz(pair, w),
            MeanKind::PowerThird => power_mean_third(pair),
        }
    }
}

impl fmt::Display for MeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for MeanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "a" | "arithmetic" => MeanKind::Arithmetic,
            "g" | "geometric" => MeanKind::Geometric,
            "h" | "harmonic" => MeanKind::Harmonic,
            "l" | "logarithmic" | "log" => MeanKind::Logarithmic,
            "hz" | "heinz" => MeanKind::Heinz,
            "p3" | "power-third" | "powerthird" => MeanKind::PowerThird,
            _ => return Err(Error::Parse(format!("unknown mean kind `{s}`"))),
        };
        Ok(kind)
    }
}

/// `(1−v)a + vb`.
pub fn weighted_arithmetic<T: Real>(pair: &ScalarPair<T>, w: &WeightSplit<T>) -> T {
    w.complement().clone() * pair.a().clone() + w.v().clone() * pair.b().clone()
}

/// `a^{1−v} b^v`, exact at both endpoints.
pub fn weighted_geometric<T: Real>(pair: &ScalarPair<T>, w: &WeightSplit<T>) -> T {
    if w.v().is_zero() {
        return pair.a().clone();
    }
    if w.complement().is_zero() || pair.a() == pair.b() {
        return pair.b().clone();
    }
    pair.a().powf(w.complement()) * pair.b().powf(w.v())
}

/// `((1−v)/a + v/b)^{-1}`.
pub fn weighted_harmonic<T: Real>(pair: &ScalarPair<T>, w: &WeightSplit<T>) -> T {
    let denom =
        w.complement().clone() / pair.a().clone() + w.v().clone() / pair.b().clone();
    T::one() / denom
}

/// `(a − b)/(ln a − ln b)`, with `L(a, a) = a`.
pub fn log_mean<T: Real>(pair: &ScalarPair<T>) -> T {
    let x = pair.log_ratio();
    if x.abs() < T::series_cutoff() {
        // b·(e^x − 1)/x to fourth order
        let x = x.clone();
        let poly = T::one()
            + x.clone()
                * (c::<T>(0.5)
                    + x.clone() * (T::one() / c(6.0) + x * (T::one() / c(24.0))));
        return pair.b().clone() * poly;
    }
    (pair.a().clone() - pair.b().clone()) / x.clone()
}

/// Weighted logarithmic mean `L_v(a, b)`.
///
/// Evaluated as `[(1−v)/v·(a − G_v) + v/(1−v)·(G_v − b)] / ln(a/b)` with both
/// differences rewritten through `expm1` at a non-positive argument, so the
/// two terms share a sign and nothing cancels. `v = 1/2` is the unweighted
/// [`log_mean`]; weights within [`Real::weight_cutoff`] of an endpoint return
/// that endpoint's argument.
pub fn weighted_log_mean<T: Real>(pair: &ScalarPair<T>, w: &WeightSplit<T>) -> T {
    let cut = T::weight_cutoff();
    if *w.v() < cut {
        return pair.a().clone();
    }
    if *w.complement() < cut {
        return pair.b().clone();
    }
    if w.is_half() {
        return log_mean(pair);
    }
    let x = pair.log_ratio();
    let v = w.v().clone();
    let u = w.complement().clone();
    if x.abs() < T::series_cutoff() {
        return pair.b().clone() * log_mean_series(x, &u);
    }
    let g = weighted_geometric(pair, w);
    let outer = u.clone() / v.clone();
    let inner = v.clone() / u.clone();
    let numerator = if *x > T::zero() {
        let head = -(-(v * x.clone())).exp_m1();
        let tail = -(-(u * x.clone())).exp_m1();
        outer * pair.a().clone() * head + inner * g * tail
    } else {
        let head = (v * x.clone()).exp_m1();
        let tail = (u * x.clone()).exp_m1();
        outer * g * head + inner * pair.b().clone() * tail
    };
    numerator / x.clone()
}

/// The literal two-term quotient with no cancellation control.
///
/// Only for reproducing figures computed this way; undefined at `v ∈ {0, 1}`
/// and at `a = b`.
pub fn weighted_log_mean_naive<T: Real>(pair: &ScalarPair<T>, w: &WeightSplit<T>) -> T {
    let (a, b) = (pair.a().clone(), pair.b().clone());
    let (v, u) = (w.v().clone(), w.complement().clone());
    let g = a.powf(&u) * b.powf(&v);
    let num = u.clone() / v.clone() * (a.clone() - g.clone()) + v / u * (g - b.clone());
    num / (a.ln() - b.ln())
}

/// `L_v(e^x, 1)` to fourth order in `x`, with `u = 1 − v`.
fn log_mean_series<T: Real>(x: &T, u: &T) -> T {
    let u2 = u.clone() * u.clone();
    let u3 = u2.clone() * u.clone();
    let c1 = u.clone();
    let c2 = (u.clone() + c::<T>(2.0) * u2.clone()) / c(6.0);
    let c3 = (u.clone() + u2 + c::<T>(2.0) * u3) / c(24.0);
    let x = x.clone();
    T::one() + x.clone() * (c1 + x.clone() * (c2 + x * c3))
}

/// Heinz mean `(a^{1−v}b^v + a^v b^{1−v})/2`.
pub fn heinz<T: Real>(pair: &ScalarPair<T>, w: &WeightSplit<T>) -> T {
    let g = weighted_geometric(pair, w);
    let g_flip = weighted_geometric(pair, &w.flipped());
    (g + g_flip) / c(2.0)
}

/// `((a^{1/3} + b^{1/3})/2)^3`.
pub fn power_mean_third<T: Real>(pair: &ScalarPair<T>) -> T {
    let m = (pair.a().cbrt() + pair.b().cbrt()) / c(2.0);
    m.clone() * m.clone() * m
}

/// `ln_r x = (x^r − 1)/r`, or `ln x` when `r` is below the deformation cutoff.
pub fn r_log<T: Real>(x: &T, d: &Deformation<T>) -> Result<T> {
    check_positive("x", x)?;
    Ok(r_log_from_ln(&x.ln(), d))
}

/// `ln_r` of the number whose natural logarithm is `ln_x`.
pub fn r_log_from_ln<T: Real>(ln_x: &T, d: &Deformation<T>) -> T {
    if d.is_classical() {
        return ln_x.clone();
    }
    (d.r().clone() * ln_x.clone()).exp_m1() / d.r().clone()
}

/// `1 + (μ²/2)·q²` with `q = ln(a/b)`, or `q = ln_r(a/b)` under a deformation.
pub fn refined_young_factor<T: Real>(
    pair: &ScalarPair<T>,
    w: &WeightSplit<T>,
    d: Option<&Deformation<T>>,
) -> T {
    let q = match d {
        Some(d) => r_log_from_ln(pair.log_ratio(), d),
        None => pair.log_ratio().clone(),
    };
    let mu = w.mu().clone();
    T::one() + mu.clone() * mu / c(2.0) * q.clone() * q
}

/// Representing function `t ↦ L_v(t, 1)`.
pub fn representing_l<T: Real>(t: T, w: &WeightSplit<T>) -> Result<T> {
    let pair = ScalarPair::new(t, T::one())?;
    Ok(weighted_log_mean(&pair, w))
}
