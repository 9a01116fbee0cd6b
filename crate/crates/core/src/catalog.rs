//! Registry of scalar mean inequalities as signed gap functions.
//!
//! Every case evaluates `RHS − LHS` per link of its chain, so a case holds at
//! a point exactly when all of its link gaps are nonnegative. The case gap is
//! the smallest link gap.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::means::{
    heinz, log_mean, power_mean_third, refined_young_factor, weighted_arithmetic,
    weighted_geometric, weighted_harmonic, weighted_log_mean, Deformation, MeanKind, ScalarPair,
    WeightSplit,
};
use crate::scalar::{c, fmt17, with_digits, BigFloat, Real};

/// Relative tolerance below zero still accepted as `holds` in double precision.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// What the registry claims about a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expected {
    HoldsEverywhere,
    FailsSomewhere,
    /// Holds on the part of the domain described by [`InequalityCase::guaranteed`].
    Conditional,
    /// Open: evidence is recorded, never asserted.
    Conjecture,
}

impl Expected {
    pub fn as_str(self) -> &'static str {
        match self {
            Expected::HoldsEverywhere => "holds-everywhere",
            Expected::FailsSomewhere => "fails-somewhere",
            Expected::Conditional => "conditional",
            Expected::Conjecture => "conjecture",
        }
    }
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters beyond `(a, b)` that a case consumes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Params {
    pub v: bool,
    pub r: bool,
    pub p: bool,
}

const AB: Params = Params {
    v: false,
    r: false,
    p: false,
};
const ABV: Params = Params {
    v: true,
    r: false,
    p: false,
};
const ABVR: Params = Params {
    v: true,
    r: true,
    p: false,
};
const ABVP: Params = Params {
    v: true,
    r: false,
    p: true,
};

/// An evaluation point. `Point<String>` ([`DecimalPoint`]) is the exact storage form.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<T = f64> {
    pub a: T,
    pub b: T,
    pub v: Option<T>,
    pub r: Option<T>,
    pub p: Option<T>,
}

/// A point written as decimal literals, re-parsed exactly at any precision.
pub type DecimalPoint = Point<String>;

impl<T> Point<T> {
    pub fn new(a: T, b: T) -> Self {
        Self {
            a,
            b,
            v: None,
            r: None,
            p: None,
        }
    }

    pub fn with_v(mut self, v: T) -> Self {
        self.v = Some(v);
        self
    }

    pub fn with_r(mut self, r: T) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_p(mut self, p: T) -> Self {
        self.p = Some(p);
        self
    }

    /// Drops the parameters `params` does not use.
    pub fn restricted(mut self, params: Params) -> Self {
        if !params.v {
            self.v = None;
        }
        if !params.r {
            self.r = None;
        }
        if !params.p {
            self.p = None;
        }
        self
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Point<U> {
        Point {
            a: f(&self.a),
            b: f(&self.b),
            v: self.v.as_ref().map(&mut f),
            r: self.r.as_ref().map(&mut f),
            p: self.p.as_ref().map(&mut f),
        }
    }

    pub fn try_map<U>(&self, mut f: impl FnMut(&T) -> Result<U>) -> Result<Point<U>> {
        Ok(Point {
            a: f(&self.a)?,
            b: f(&self.b)?,
            v: self.v.as_ref().map(&mut f).transpose()?,
            r: self.r.as_ref().map(&mut f).transpose()?,
            p: self.p.as_ref().map(&mut f).transpose()?,
        })
    }

    /// `(name, value)` pairs of the coordinates that are set, in `a, b, v, r, p` order.
    pub fn entries(&self) -> Vec<(&'static str, &T)> {
        let mut out = vec![("a", &self.a), ("b", &self.b)];
        for (name, x) in [("v", &self.v), ("r", &self.r), ("p", &self.p)] {
            if let Some(x) = x {
                out.push((name, x));
            }
        }
        out
    }
}

impl Point<f64> {
    /// Shortest decimal form that round-trips every coordinate.
    pub fn to_decimal(&self) -> DecimalPoint {
        self.map(|x| fmt17(*x))
    }

    /// Exact lift into another scalar type.
    pub fn lift<T: Real>(&self) -> Point<T> {
        self.map(|x| T::from_f64(*x))
    }
}

impl DecimalPoint {
    /// Parses every coordinate at the current working precision of `T`.
    pub fn parse<T: Real>(&self) -> Result<Point<T>> {
        self.try_map(|s| T::parse_decimal(s).ok_or_else(|| Error::Parse(s.clone())))
    }

    pub fn from_strs(a: &str, b: &str) -> Self {
        Point::new(a.to_string(), b.to_string())
    }
}

/// Coefficient `p ∈ [0, 1]` of the mix `(1 − p)A_v + pG_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixCoefficient<T: Real> {
    p: T,
}

impl<T: Real> MixCoefficient<T> {
    pub fn new(p: T) -> Result<Self> {
        if !p.is_finite() || p < T::zero() || p > T::one() {
            return Err(Error::OutOfRange {
                name: "p",
                value: p.to_f64(),
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> &T {
        &self.p
    }
}

/// Case keys. The string keys in [`InequalityCase::key`] are a stable public contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    Polya,
    LinChain,
    RefinedPolya,
    WlogHalfMix,
    WlogTwoThirds,
    FourMeansOrder,
    RefinedYoung,
    RefinedYoungReverse,
    RYoung,
    HeinzChain,
    HeinzRefined,
    HalfMixUnweightedL,
    ThmHeinzV,
    HalfAHeinz,
    ExpRatioBounds,
    NestedAg1,
    NestedAg2,
    NestedHg1,
    NestedHg2,
    NestedAl1,
    NestedAl2,
    NestedGl1,
    NestedGl2,
    LvProduct,
    ConditionalMix,
    OptimalPMix,
    ConjectureNestedL,
}

/// A stored point of interest, with the value printed for it in the literature if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub a: &'static str,
    pub b: &'static str,
    pub v: Option<&'static str>,
    pub r: Option<&'static str>,
    pub p: Option<&'static str>,
    /// Published gap at this point, kept for comparison only.
    pub printed_gap: Option<&'static str>,
    pub note: &'static str,
}

impl Witness {
    pub fn point(&self) -> DecimalPoint {
        Point {
            a: self.a.to_string(),
            b: self.b.to_string(),
            v: self.v.map(str::to_string),
            r: self.r.map(str::to_string),
            p: self.p.map(str::to_string),
        }
    }
}

const fn witness_v(a: &'static str, b: &'static str, v: &'static str) -> Witness {
    Witness {
        a,
        b,
        v: Some(v),
        r: None,
        p: None,
        printed_gap: None,
        note: "",
    }
}

/// A registered inequality.
#[derive(Debug, Clone, Copy)]
pub struct InequalityCase {
    pub id: CaseId,
    pub key: &'static str,
    pub description: &'static str,
    /// The inequality itself, in the orientation the gap uses.
    pub anchor: &'static str,
    pub params: Params,
    pub expected: Expected,
    /// Homogeneity degree of the gap in `(a, b)`; the relative gap divides by `max(a, b)^degree`.
    pub degree: i32,
    pub links: &'static [&'static str],
    pub witnesses: &'static [Witness],
}

macro_rules! case {
    ($id:ident, $key:literal, $params:expr, $expected:ident, $desc:literal, $anchor:literal, [$($link:literal),+]) => {
        case!($id, $key, $params, $expected, $desc, $anchor, [$($link),+], &[])
    };
    ($id:ident, $key:literal, $params:expr, $expected:ident, $desc:literal, $anchor:literal, [$($link:literal),+], $w:expr) => {
        InequalityCase {
            id: CaseId::$id,
            key: $key,
            description: $desc,
            anchor: $anchor,
            params: $params,
            expected: Expected::$expected,
            degree: 1,
            links: &[$($link),+],
            witnesses: $w,
        }
    };
}

static REGISTRY: [InequalityCase; 27] = [
    case!(Polya, "polya", AB, HoldsEverywhere,
        "Polya bound of the logarithmic mean",
        "L <= (2/3)G + (1/3)A",
        ["(2/3)G + (1/3)A - L"]),
    case!(LinChain, "lin_chain", AB, HoldsEverywhere,
        "logarithmic mean between G and the power mean of order 1/3",
        "G <= L <= P_{1/3}",
        ["L - G", "P_{1/3} - L"]),
    case!(RefinedPolya, "refined_polya", AB, HoldsEverywhere,
        "power mean of order 1/3 separating L from the Polya bound",
        "L <= P_{1/3} <= (2/3)G + (1/3)A",
        ["P_{1/3} - L", "(2/3)G + (1/3)A - P_{1/3}"]),
    case!(WlogHalfMix, "wlog_half_mix", ABV, HoldsEverywhere,
        "weighted logarithmic mean below the even mix of A_v and G_v",
        "L_v <= (1/2)G_v + (1/2)A_v",
        ["(1/2)G_v + (1/2)A_v - L_v"]),
    case!(WlogTwoThirds, "wlog_two_thirds", ABV, FailsSomewhere,
        "weighted Polya-type bound, false in general",
        "L_v <= (2/3)G_v + (1/3)A_v",
        ["(2/3)G_v + (1/3)A_v - L_v"],
        &[
            Witness { note: "large v with a < b", ..witness_v("0.5", "1", "0.9") },
            Witness { note: "strongly unequal pair", ..witness_v("0.001", "1", "0.9") },
        ]),
    case!(FourMeansOrder, "four_means_order", ABV, HoldsEverywhere,
        "order of the four weighted means",
        "H_v <= G_v <= L_v <= A_v",
        ["G_v - H_v", "L_v - G_v", "A_v - L_v"]),
    case!(RefinedYoung, "refined_young", ABV, HoldsEverywhere,
        "refined Young inequality with mu = min(v, 1 - v)",
        "G_v <= (1 + (mu^2/2)(log a - log b)^2) G_v <= A_v",
        ["(mu^2/2)(log a - log b)^2 G_v", "A_v - (1 + (mu^2/2)(log a - log b)^2) G_v"]),
    case!(RefinedYoungReverse, "refined_young_reverse", ABV, FailsSomewhere,
        "reverse refined Young with lambda = max(v, 1 - v), false in general",
        "A_v <= (1 + (lambda^2/2)(log a - log b)^2) G_v",
        ["(1 + (lambda^2/2)(log a - log b)^2) G_v - A_v"],
        &[
            witness_v("2", "1", "0.5"),
            witness_v("10", "1", "0.5"),
        ]),
    case!(RYoung, "r_young", ABVR, Conditional,
        "refined Young with the r-logarithm, for r > 0 and a <= b or r < 0 and a >= b",
        "G_v <= (1 + (mu^2/2)(ln_r(a/b))^2) G_v <= A_v",
        ["(mu^2/2)(ln_r(a/b))^2 G_v", "A_v - (1 + (mu^2/2)(ln_r(a/b))^2) G_v"]),
    case!(HeinzChain, "heinz_chain", ABV, HoldsEverywhere,
        "Heinz mean between G and A",
        "G <= Hz_v <= A",
        ["Hz_v - G", "A - Hz_v"]),
    case!(HeinzRefined, "heinz_refined", ABV, HoldsEverywhere,
        "refined Heinz chain",
        "G <= Hz_v <= (1 + (mu^2/2)(log a - log b)^2) Hz_v <= A",
        ["Hz_v - G", "(mu^2/2)(log a - log b)^2 Hz_v", "A - (1 + (mu^2/2)(log a - log b)^2) Hz_v"]),
    case!(HalfMixUnweightedL, "half_mix_unweighted_L", ABV, FailsSomewhere,
        "unweighted L below the even mix of A_v and G_v, false in general",
        "L <= (1/2)A_v + (1/2)G_v",
        ["(1/2)A_v + (1/2)G_v - L"],
        &[
            Witness {
                printed_gap: Some("-0.223091"),
                note: "published value is twice the computed gap",
                ..witness_v("0.5", "1", "0.25")
            },
            Witness {
                printed_gap: Some("-0.446183"),
                note: "published value is twice the computed gap",
                ..witness_v("2", "1", "0.75")
            },
        ]),
    case!(ThmHeinzV, "thm_heinz_v", ABV, HoldsEverywhere,
        "unweighted L below the mix of A_v and G_{1-v}",
        "L <= (1/2)A_v + (1/2)G_{1-v}",
        ["(1/2)A_v + (1/2)G_{1-v} - L"]),
    case!(HalfAHeinz, "half_a_heinz", ABV, HoldsEverywhere,
        "unweighted L below the mix of A and the Heinz mean",
        "L <= (1/2)A + (1/2)Hz_v",
        ["(1/2)A + (1/2)Hz_v - L"]),
    case!(ExpRatioBounds, "exp_ratio_bounds", AB, HoldsEverywhere,
        "bounds of t^(t/(t-1))/e, scaled by b with t = a/b",
        "L <= b exp(a/L - 1) <= (a^2 + b^2)/(a + b)",
        ["b exp(a/L - 1) - L", "(a^2 + b^2)/(a + b) - b exp(a/L - 1)"]),
    case!(NestedAg1, "nested_ag_1", ABV, HoldsEverywhere,
        "geometric mean of A_v and A_{1-v}",
        "G <= G(A_v, A_{1-v}) <= A",
        ["G(A_v, A_{1-v}) - G", "A - G(A_v, A_{1-v})"]),
    case!(NestedAg2, "nested_ag_2", ABV, HoldsEverywhere,
        "arithmetic mean of G_v and G_{1-v}",
        "G <= A(G_v, G_{1-v}) <= A",
        ["A(G_v, G_{1-v}) - G", "A - A(G_v, G_{1-v})"]),
    case!(NestedHg1, "nested_hg_1", ABV, HoldsEverywhere,
        "geometric mean of H_v and H_{1-v}",
        "H <= G(H_v, H_{1-v}) <= G",
        ["G(H_v, H_{1-v}) - H", "G - G(H_v, H_{1-v})"]),
    case!(NestedHg2, "nested_hg_2", ABV, HoldsEverywhere,
        "harmonic mean of G_v and G_{1-v}",
        "H <= H(G_v, G_{1-v}) <= G",
        ["H(G_v, G_{1-v}) - H", "G - H(G_v, G_{1-v})"]),
    case!(NestedAl1, "nested_al_1", ABV, HoldsEverywhere,
        "arithmetic mean of L_v and L_{1-v}",
        "L <= A(L_v, L_{1-v}) <= A",
        ["A(L_v, L_{1-v}) - L", "A - A(L_v, L_{1-v})"]),
    case!(NestedAl2, "nested_al_2", ABV, HoldsEverywhere,
        "logarithmic mean of A_v and A_{1-v}",
        "L <= L(A_v, A_{1-v}) <= A",
        ["L(A_v, A_{1-v}) - L", "A - L(A_v, A_{1-v})"]),
    case!(NestedGl1, "nested_gl_1", ABV, HoldsEverywhere,
        "logarithmic mean of G_v and G_{1-v}",
        "G <= L(G_v, G_{1-v}) <= L",
        ["L(G_v, G_{1-v}) - G", "L - L(G_v, G_{1-v})"]),
    case!(NestedGl2, "nested_gl_2", ABV, HoldsEverywhere,
        "geometric mean of L_v and L_{1-v}",
        "G <= G(L_v, L_{1-v}) <= L",
        ["G(L_v, L_{1-v}) - G", "L - G(L_v, L_{1-v})"]),
    InequalityCase {
        degree: 2,
        ..case!(LvProduct, "lv_product", ABV, HoldsEverywhere,
            "product of complementary weighted logarithmic means",
            "L_v L_{1-v} <= L^2",
            ["L^2 - L_v L_{1-v}"])
    },
    case!(ConditionalMix, "conditional_mix", ABV, Conditional,
        "L below the even mix of A_v and G_v when v <= 1/2 and a >= b, or v >= 1/2 and a <= b",
        "L <= (1/2)A_v + (1/2)G_v",
        ["(1/2)A_v + (1/2)G_v - L"]),
    case!(OptimalPMix, "optimal_p_mix", ABVP, Conditional,
        "weighted logarithmic mean below (1-p)A_v + pG_v; holds for p <= 1/2",
        "L_v <= (1 - p)A_v + pG_v",
        ["(1 - p)A_v + pG_v - L_v"],
        &[
            Witness {
                a: "1e-10",
                b: "1",
                v: Some("0.9999999999"),
                r: None,
                p: Some("0.52"),
                printed_gap: Some("-1.39948e-8"),
                note: "published double-precision figure; not reproduced by the high-precision oracle",
            },
            Witness {
                p: Some("0.6666666666666666666666666666666666666666666666666666666666666667"),
                note: "p = 2/3 agrees with wlog_two_thirds",
                ..witness_v("0.001", "1", "0.9")
            },
        ]),
    case!(ConjectureNestedL, "conjecture_nested_L", ABV, Conjecture,
        "logarithmic mean of L_v and L_{1-v} above L (open)",
        "L <= L(L_v, L_{1-v})",
        ["L(L_v, L_{1-v}) - L"],
        &[Witness { note: "gap about 0.0173327", ..witness_v("10", "1", "0.25") }]),
];

/// Every registered case, in stable order.
pub fn list_cases() -> &'static [InequalityCase] {
    &REGISTRY
}

/// Looks up a case by key.
pub fn lookup(key: &str) -> Result<&'static InequalityCase> {
    REGISTRY
        .iter()
        .find(|case| case.key == key)
        .ok_or_else(|| Error::UnknownCase(key.to_string()))
}

/// `M_outer(N_v(a,b), N_{1−v}(a,b))` with the outer mean unweighted.
pub fn nested_mean<T: Real>(
    outer: MeanKind,
    inner: MeanKind,
    pair: &ScalarPair<T>,
    w: &WeightSplit<T>,
) -> Result<T> {
    for kind in [outer, inner] {
        if !kind.nests() {
            return Err(Error::UnsupportedKind(kind));
        }
    }
    let x = inner.eval(pair, w);
    let y = inner.eval(pair, &w.flipped());
    let nested = ScalarPair::new(x, y)?;
    Ok(outer.eval(&nested, &WeightSplit::half()))
}

/// Validated inputs of one evaluation.
struct Inputs<T: Real> {
    pair: ScalarPair<T>,
    w: Option<WeightSplit<T>>,
    d: Option<Deformation<T>>,
    p: Option<MixCoefficient<T>>,
}

impl<T: Real> Inputs<T> {
    fn w(&self) -> &WeightSplit<T> {
        self.w.as_ref().expect("weight validated")
    }
}

/// Link gaps and derived quantities at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub links: Vec<T>,
    pub gap: T,
    /// `max(a, b)^degree`.
    pub scale: T,
    pub relative_gap: T,
}

fn required<'a, T>(case: &InequalityCase, x: &'a Option<T>, param: &'static str) -> Result<&'a T> {
    x.as_ref().ok_or_else(|| Error::MissingParameter {
        case: case.key.to_string(),
        param,
    })
}

impl InequalityCase {
    fn domain_error(&self, reason: impl Into<String>) -> Error {
        Error::DomainViolation {
            case: self.key.to_string(),
            reason: reason.into(),
        }
    }

    fn inputs<T: Real>(&self, pt: &Point<T>) -> Result<Inputs<T>> {
        let pair = ScalarPair::new(pt.a.clone(), pt.b.clone())?;
        let w = if self.params.v {
            Some(WeightSplit::new(required(self, &pt.v, "v")?.clone())?)
        } else {
            None
        };
        let d = if self.params.r {
            let r = required(self, &pt.r, "r")?.clone();
            if r.is_zero() {
                return Err(self.domain_error("r must be nonzero"));
            }
            Some(Deformation::new(r)?)
        } else {
            None
        };
        let p = if self.params.p {
            Some(MixCoefficient::new(required(self, &pt.p, "p")?.clone())?)
        } else {
            None
        };
        let half = c::<T>(0.5);
        match self.id {
            CaseId::RYoung => {
                let r = d.as_ref().map(|d| d.r().clone()).unwrap_or_else(T::zero);
                let ok = (r > T::zero() && pt.a <= pt.b) || (r < T::zero() && pt.a >= pt.b);
                if !ok {
                    return Err(self.domain_error("requires r > 0 with a <= b, or r < 0 with a >= b"));
                }
            }
            CaseId::ConditionalMix => {
                let v = w.as_ref().map(|w| w.v().clone()).unwrap_or_else(T::zero);
                let ok = (v <= half && pt.a >= pt.b) || (v >= half && pt.a <= pt.b);
                if !ok {
                    return Err(self.domain_error("requires v <= 1/2 with a >= b, or v >= 1/2 with a <= b"));
                }
            }
            _ => {}
        }
        Ok(Inputs { pair, w, d, p })
    }

    /// Checks that `pt` lies in the domain of the case.
    pub fn check_domain<T: Real>(&self, pt: &Point<T>) -> Result<()> {
        self.inputs(pt).map(|_| ())
    }

    /// Whether the case is claimed to hold at an in-domain `pt`.
    pub fn guaranteed(&self, pt: &Point<f64>) -> bool {
        match self.expected {
            Expected::HoldsEverywhere => true,
            Expected::Conditional => match self.id {
                CaseId::OptimalPMix => pt.p.is_some_and(|p| p <= 0.5),
                _ => self.check_domain(pt).is_ok(),
            },
            Expected::FailsSomewhere | Expected::Conjecture => false,
        }
    }

    pub fn link_gaps<T: Real>(&self, pt: &Point<T>) -> Result<Vec<T>> {
        let inputs = self.inputs(pt)?;
        Ok(self.links_of(&inputs))
    }

    /// Evaluates every link, the case gap and the relative gap.
    pub fn evaluate<T: Real>(&self, pt: &Point<T>) -> Result<Evaluation<T>> {
        let inputs = self.inputs(pt)?;
        let links = self.links_of(&inputs);
        let gap = links
            .iter()
            .skip(1)
            .fold(links[0].clone(), |m, x| if *x < m { x.clone() } else { m });
        let base = inputs.pair.max();
        let scale = (1..self.degree).fold(base.clone(), |s, _| s * base.clone());
        let relative_gap = gap.clone() / scale.clone();
        Ok(Evaluation {
            links,
            gap,
            scale,
            relative_gap,
        })
    }

    fn links_of<T: Real>(&self, inputs: &Inputs<T>) -> Vec<T> {
        let pair = &inputs.pair;
        let half_w = WeightSplit::half();
        let half = c::<T>(0.5);
        let a_mean = || weighted_arithmetic(pair, &half_w);
        let g_mean = || weighted_geometric(pair, &half_w);
        let h_mean = || weighted_harmonic(pair, &half_w);
        let l_mean = || log_mean(pair);
        let polya_rhs = || {
            (c::<T>(2.0) * g_mean() + a_mean()) / c(3.0)
        };
        let nested = |outer, inner| {
            nested_mean(outer, inner, pair, inputs.w()).expect("nestable kinds")
        };
        use MeanKind::*;
        match self.id {
            CaseId::Polya => vec![polya_rhs() - l_mean()],
            CaseId::LinChain => {
                let l = l_mean();
                vec![l.clone() - g_mean(), power_mean_third(pair) - l]
            }
            CaseId::RefinedPolya => {
                let p3 = power_mean_third(pair);
                vec![p3.clone() - l_mean(), polya_rhs() - p3]
            }
            CaseId::WlogHalfMix => {
                let w = inputs.w();
                vec![
                    half.clone() * weighted_geometric(pair, w) + half * weighted_arithmetic(pair, w)
                        - weighted_log_mean(pair, w),
                ]
            }
            CaseId::WlogTwoThirds => {
                let w = inputs.w();
                vec![
                    (c::<T>(2.0) * weighted_geometric(pair, w) + weighted_arithmetic(pair, w))
                        / c(3.0)
                        - weighted_log_mean(pair, w),
                ]
            }
            CaseId::FourMeansOrder => {
                let w = inputs.w();
                let g = weighted_geometric(pair, w);
                let l = weighted_log_mean(pair, w);
                vec![
                    g.clone() - weighted_harmonic(pair, w),
                    l.clone() - g,
                    weighted_arithmetic(pair, w) - l,
                ]
            }
            CaseId::RefinedYoung | CaseId::RYoung => {
                let w = inputs.w();
                let g = weighted_geometric(pair, w);
                let lift = (refined_young_factor(pair, w, inputs.d.as_ref()) - T::one()) * g.clone();
                vec![lift.clone(), weighted_arithmetic(pair, w) - g - lift]
            }
            CaseId::RefinedYoungReverse => {
                let w = inputs.w();
                let q = pair.log_ratio().clone();
                let lambda = w.lambda().clone();
                let factor = T::one() + lambda.clone() * lambda / c(2.0) * q.clone() * q;
                vec![factor * weighted_geometric(pair, w) - weighted_arithmetic(pair, w)]
            }
            CaseId::HeinzChain => {
                let hz = heinz(pair, inputs.w());
                vec![hz.clone() - g_mean(), a_mean() - hz]
            }
            CaseId::HeinzRefined => {
                let w = inputs.w();
                let hz = heinz(pair, w);
                let lift = (refined_young_factor(pair, w, None) - T::one()) * hz.clone();
                vec![hz.clone() - g_mean(), lift.clone(), a_mean() - hz - lift]
            }
            CaseId::HalfMixUnweightedL | CaseId::ConditionalMix => {
                let w = inputs.w();
                vec![
                    half.clone() * weighted_arithmetic(pair, w)
                        + half * weighted_geometric(pair, w)
                        - l_mean(),
                ]
            }
            CaseId::ThmHeinzV => {
                let w = inputs.w();
                vec![
                    half.clone() * weighted_arithmetic(pair, w)
                        + half * weighted_geometric(pair, &w.flipped())
                        - l_mean(),
                ]
            }
            CaseId::HalfAHeinz => {
                vec![half.clone() * a_mean() + half * heinz(pair, inputs.w()) - l_mean()]
            }
            CaseId::ExpRatioBounds => {
                let l = l_mean();
                let middle = pair.b().clone() * (pair.a().clone() / l.clone() - T::one()).exp();
                let (a, b) = (pair.a().clone(), pair.b().clone());
                let upper = (a.clone() * a.clone() + b.clone() * b.clone()) / (a + b);
                vec![middle.clone() - l, upper - middle]
            }
            CaseId::NestedAg1 => {
                let m = nested(Geometric, Arithmetic);
                vec![m.clone() - g_mean(), a_mean() - m]
            }
            CaseId::NestedAg2 => {
                let m = nested(Arithmetic, Geometric);
                vec![m.clone() - g_mean(), a_mean() - m]
            }
            CaseId::NestedHg1 => {
                let m = nested(Geometric, Harmonic);
                vec![m.clone() - h_mean(), g_mean() - m]
            }
            CaseId::NestedHg2 => {
                let m = nested(Harmonic, Geometric);
                vec![m.clone() - h_mean(), g_mean() - m]
            }
            CaseId::NestedAl1 => {
                let m = nested(Arithmetic, Logarithmic);
                vec![m.clone() - l_mean(), a_mean() - m]
            }
            CaseId::NestedAl2 => {
                let m = nested(Logarithmic, Arithmetic);
                vec![m.clone() - l_mean(), a_mean() - m]
            }
            CaseId::NestedGl1 => {
                let m = nested(Logarithmic, Geometric);
                vec![m.clone() - g_mean(), l_mean() - m]
            }
            CaseId::NestedGl2 => {
                let m = nested(Geometric, Logarithmic);
                vec![m.clone() - g_mean(), l_mean() - m]
            }
            CaseId::LvProduct => {
                let w = inputs.w();
                let l = l_mean();
                vec![
                    l.clone() * l
                        - weighted_log_mean(pair, w) * weighted_log_mean(pair, &w.flipped()),
                ]
            }
            CaseId::OptimalPMix => {
                let w = inputs.w();
                let p = inputs.p.as_ref().expect("p validated").p().clone();
                vec![
                    (T::one() - p.clone()) * weighted_arithmetic(pair, w)
                        + p * weighted_geometric(pair, w)
                        - weighted_log_mean(pair, w),
                ]
            }
            CaseId::ConjectureNestedL => {
                vec![nested(Logarithmic, Logarithmic) - l_mean()]
            }
        }
    }

    /// A priori error bound on the double-precision gap at `pt`.
    ///
    /// `16·κ·ε·max(a,b)^degree` with `κ = max(v/(1−v), (1−v)/v, 1)·(1 + |ln(a/b)|)`.
    pub fn double_bound(&self, pt: &Point<f64>) -> Result<f64> {
        let pair = ScalarPair::new(pt.a, pt.b)?;
        let amplification = match (self.params.v, pt.v) {
            (true, Some(v)) => WeightSplit::new(v)?.kernel_amplification(),
            _ => 1.0,
        };
        let kappa = amplification * (1.0 + pair.log_ratio().abs());
        Ok(16.0 * kappa * f64::EPSILON / 2.0 * pair.max().powi(self.degree))
    }

    /// Evaluates at the decimal point `pt` with the requested precision.
    pub fn report(&self, pt: &DecimalPoint, precision: Precision, tol: f64) -> Result<GapReport> {
        let pt = pt.clone().restricted(self.params);
        match precision {
            Precision::Double => {
                let x: Point<f64> = pt.parse()?;
                let eval = self.evaluate(&x)?;
                let bound = self.double_bound(&x)?;
                Ok(GapReport {
                    case: self.key,
                    point: pt,
                    gap: eval.gap,
                    gap_text: fmt17(eval.gap),
                    relative_gap: eval.relative_gap,
                    links: eval.links,
                    precision,
                    verdict: Verdict::classify(eval.gap, eval.relative_gap, bound, tol),
                    bound,
                })
            }
            Precision::BigFloat { digits } => with_digits(digits, || {
                let x: Point<BigFloat> = pt.parse()?;
                let eval = self.evaluate(&x)?;
                let bound = 10f64.powi(-(digits as i32 - 10)) * Real::to_f64(&eval.scale);
                let gap = Real::to_f64(&eval.gap);
                Ok(GapReport {
                    case: self.key,
                    point: pt.clone(),
                    gap,
                    gap_text: eval.gap.to_decimal_string(),
                    relative_gap: Real::to_f64(&eval.relative_gap),
                    links: eval.links.iter().map(Real::to_f64).collect(),
                    precision,
                    verdict: Verdict::classify(gap, Real::to_f64(&eval.relative_gap), bound, 0.0),
                    bound,
                })
            }),
        }
    }
}

/// Arithmetic used for an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    Double,
    BigFloat { digits: u32 },
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Double => f.write_str("double"),
            Precision::BigFloat { digits } => write!(f, "bigfloat({digits})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    Indeterminate,
}

impl Verdict {
    /// `indeterminate` when `|gap| < bound`, else `holds` iff `relative_gap ≥ −tol`.
    pub fn classify(gap: f64, relative_gap: f64, bound: f64, tol: f64) -> Verdict {
        if gap.abs() < bound {
            Verdict::Indeterminate
        } else if relative_gap >= -tol {
            Verdict::Holds
        } else {
            Verdict::Violated
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One gap evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub case: &'static str,
    pub point: DecimalPoint,
    /// Smallest link gap, rounded to double.
    pub gap: f64,
    /// The gap at the full evaluation precision.
    pub gap_text: String,
    pub relative_gap: f64,
    pub links: Vec<f64>,
    pub precision: Precision,
    pub verdict: Verdict,
    /// Magnitude below which the sign of the gap is not trusted.
    pub bound: f64,
}

/// Evaluates case `key` at a double-precision point.
pub fn evaluate_gap(key: &str, pt: &Point<f64>, precision: Precision) -> Result<GapReport> {
    lookup(key)?.report(&pt.to_decimal(), precision, DEFAULT_TOLERANCE)
}

/// Per-axis grid values. Axes of parameters a case does not use are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub v: Vec<f64>,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// `n` geometrically spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect();
    if let Some(first) = out.first_mut() {
        *first = lo;
    }
    if n > 1 {
        out[n - 1] = hi;
    }
    out
}

impl GridSpec {
    /// Cartesian product over the axes `params` uses, `a` varying slowest.
    pub fn points(&self, params: Params) -> Result<Vec<Point<f64>>> {
        let one = [f64::NAN];
        let axis = |used: bool, values: &[f64], name: &str| -> Result<Vec<f64>> {
            if !used {
                return Ok(one.to_vec());
            }
            if values.is_empty() {
                return Err(Error::EmptyGrid(format!("axis `{name}` has no values")));
            }
            Ok(values.to_vec())
        };
        let a = axis(true, &self.a, "a")?;
        let b = axis(true, &self.b, "b")?;
        let v = axis(params.v, &self.v, "v")?;
        let r = axis(params.r, &self.r, "r")?;
        let p = axis(params.p, &self.p, "p")?;
        let mut out = Vec::with_capacity(a.len() * b.len() * v.len() * r.len() * p.len());
        for &a in &a {
            for &b in &b {
                for &v in &v {
                    for &r in &r {
                        for &p in &p {
                            let mut pt = Point::new(a, b);
                            pt.v = params.v.then_some(v);
                            pt.r = params.r.then_some(r);
                            pt.p = params.p.then_some(p);
                            out.push(pt);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Reports of a sweep, in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub reports: Vec<GapReport>,
    /// Index of the smallest relative gap (first on ties).
    pub min_index: usize,
}

impl Sweep {
    pub fn min(&self) -> &GapReport {
        &self.reports[self.min_index]
    }
}

/// Evaluates case `key` on every grid point.
pub fn sweep(key: &str, grid: &GridSpec, precision: Precision, tol: f64) -> Result<Sweep> {
    let case = lookup(key)?;
    let points = grid.points(case.params)?;
    for pt in &points {
        case.check_domain(pt)?;
    }
    let reports = points
        .par_iter()
        .map(|pt| case.report(&pt.to_decimal(), precision, tol))
        .collect::<Result<Vec<_>>>()?;
    let min_index = argmin(reports.iter().map(|r| r.relative_gap));
    Ok(Sweep { reports, min_index })
}

/// Range of the log-uniform `a`, `b` samples.
pub const SAMPLE_RANGE: (f64, f64) = (1e-6, 1e6);
const SAMPLE_CHUNK: u64 = 4096;

/// `n` seeded samples for `case`: `a`, `b` log-uniform on [`SAMPLE_RANGE`],
/// `v` uniform on `[0, 1)`, `r` uniform on `[−2, 2]`, `p` fixed (default ½).
///
/// A sample outside the domain is retried with `a` and `b` swapped; `None`
/// marks one that still misses. Each chunk of samples owns an RNG stream, so
/// the result does not depend on the thread count.
pub fn random_points(case: &InequalityCase, n: u64, seed: u64, p: Option<f64>) -> Vec<Option<Point<f64>>> {
    use rand::{Rng, SeedableRng};
    let (lo, hi) = (SAMPLE_RANGE.0.ln(), SAMPLE_RANGE.1.ln());
    (0..n.div_ceil(SAMPLE_CHUNK))
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let end = ((chunk + 1) * SAMPLE_CHUNK).min(n);
            (chunk * SAMPLE_CHUNK..end)
                .map(|_| {
                    let a = rng.gen_range(lo..=hi).exp();
                    let b = rng.gen_range(lo..=hi).exp();
                    let v = rng.gen::<f64>();
                    let r = rng.gen_range(-2.0..=2.0);
                    let mut pt = Point { a, b, v: Some(v), r: Some(r), p: Some(p.unwrap_or(0.5)) }
                        .restricted(case.params);
                    if case.check_domain(&pt).is_err() {
                        std::mem::swap(&mut pt.a, &mut pt.b);
                    }
                    case.check_domain(&pt).is_ok().then_some(pt)
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Index of the smallest value, first on ties; NaN never wins.
pub(crate) fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, x) in values.enumerate() {
        if x < best.1 {
            best = (i, x);
        }
    }
    best.0
}
