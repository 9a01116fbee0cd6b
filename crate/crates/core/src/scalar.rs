//! Scalar abstraction shared by every scalar kernel.
//!
//! The mean and gap kernels are written once against [`Real`] and run on
//! hardware floats (`f32`, `f64`) for search and on [`BigFloat`] for
//! adjudication. The big-float working precision is a per-thread setting
//! scoped with [`with_digits`]; values created with [`Real::from_f64`] pick
//! it up, so constants never silently drop to 53 bits.

use std::cell::Cell;
use std::fmt::Debug;
use std::ops::Neg;
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};
use num_traits::Num;

/// Binary software float used by the adjudication oracle.
pub type BigFloat = FBig<HalfEven, 2>;

/// Extra bits carried beyond the requested decimal digits.
const GUARD_BITS: usize = 24;
const DEFAULT_DIGITS: u32 = 50;

thread_local! {
    static WORKING_DIGITS: Cell<u32> = const { Cell::new(DEFAULT_DIGITS) };
}

/// Decimal digits currently requested for [`BigFloat`] arithmetic on this thread.
pub fn working_digits() -> u32 {
    WORKING_DIGITS.with(Cell::get)
}

/// Binary precision corresponding to `digits` significant decimal digits, guard bits included.
pub fn digits_to_bits(digits: u32) -> usize {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as usize + GUARD_BITS
}

fn working_bits() -> usize {
    digits_to_bits(working_digits())
}

/// Runs `f` with [`BigFloat`] values carrying at least `digits` decimal digits.
pub fn with_digits<R>(digits: u32, f: impl FnOnce() -> R) -> R {
    struct Restore(u32);
    impl Drop for Restore {
        fn drop(&mut self) {
            WORKING_DIGITS.with(|d| d.set(self.0));
        }
    }
    let _restore = Restore(WORKING_DIGITS.with(|d| d.replace(digits.max(1))));
    f()
}

/// Real scalar with the transcendental functions the kernels need.
///
/// Methods take `&self` so that heap-backed scalars are not consumed.
pub trait Real:
    Num + Neg<Output = Self> + PartialOrd + Clone + Debug + Send + Sync + 'static
{
    /// Exact conversion at the working precision.
    fn from_f64(x: f64) -> Self;
    /// Parses a decimal literal (`"0.25"`, `"1e-10"`), rounding once to the working precision.
    fn parse_decimal(s: &str) -> Option<Self>;
    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;
    fn exp(&self) -> Self;
    fn exp_m1(&self) -> Self;
    fn ln(&self) -> Self;
    fn ln_1p(&self) -> Self;
    fn powf(&self, exponent: &Self) -> Self;
    fn sqrt(&self) -> Self;
    fn cbrt(&self) -> Self;
    fn is_finite(&self) -> bool;

    /// Unit roundoff.
    fn epsilon() -> Self;
    /// |log ratio| below which mean kernels switch to their Taylor form.
    fn series_cutoff() -> Self;
    /// Weights closer than this to 0 or 1 are snapped to the endpoint.
    fn weight_cutoff() -> Self;
    /// |r| below which the deformed logarithm is replaced by `ln`.
    fn deformation_cutoff() -> Self;

    /// Decimal text at the full precision of the type (17 significant digits for `f64`).
    fn to_decimal_string(&self) -> String;
}

/// Shorthand for an exact constant.
#[inline]
pub fn c<T: Real>(x: f64) -> T {
    T::from_f64(x)
}

pub(crate) fn max_of<T: Real>(a: &T, b: &T) -> T {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub(crate) fn min_of<T: Real>(a: &T, b: &T) -> T {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

macro_rules! impl_real_for_float {
    ($t:ty, $series:expr, $weight:expr, $deform:expr, $fmt:expr) => {
        impl Real for $t {
            #[inline]
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn parse_decimal(s: &str) -> Option<Self> {
                s.trim().parse::<$t>().ok()
            }
            #[inline]
            fn to_f64(&self) -> f64 {
                f64::from(*self)
            }
            #[inline]
            fn abs(&self) -> Self {
                <$t>::abs(*self)
            }
            #[inline]
            fn exp(&self) -> Self {
                <$t>::exp(*self)
            }
            #[inline]
            fn exp_m1(&self) -> Self {
                <$t>::exp_m1(*self)
            }
            #[inline]
            fn ln(&self) -> Self {
                <$t>::ln(*self)
            }
            #[inline]
            fn ln_1p(&self) -> Self {
                <$t>::ln_1p(*self)
            }
            #[inline]
            fn powf(&self, exponent: &Self) -> Self {
                <$t>::powf(*self, *exponent)
            }
            #[inline]
            fn sqrt(&self) -> Self {
                <$t>::sqrt(*self)
            }
            #[inline]
            fn cbrt(&self) -> Self {
                <$t>::cbrt(*self)
            }
            #[inline]
            fn is_finite(&self) -> bool {
                <$t>::is_finite(*self)
            }
            #[inline]
            fn epsilon() -> Self {
                <$t>::EPSILON / 2.0
            }
            #[inline]
            fn series_cutoff() -> Self {
                $series
            }
            #[inline]
            fn weight_cutoff() -> Self {
                $weight
            }
            #[inline]
            fn deformation_cutoff() -> Self {
                $deform
            }
            fn to_decimal_string(&self) -> String {
                $fmt(*self)
            }
        }
    };
}

impl_real_for_float!(f64, 1e-6, 1e-15, 1e-12, fmt17);
impl_real_for_float!(f32, 1e-3, 1e-7, 1e-6, |x: f32| fmt_sig(f64::from(x), 9));

fn pow2(exp: isize) -> BigFloat {
    BigFloat::from_f64(1.0) << exp
}

impl Real for BigFloat {
    fn from_f64(x: f64) -> Self {
        BigFloat::try_from(x)
            .expect("NaN has no big-float image")
            .with_precision(working_bits())
            .value()
    }

    fn parse_decimal(s: &str) -> Option<Self> {
        let dec = DBig::from_str(s.trim()).ok()?;
        Some(
            dec.with_rounding::<HalfEven>()
                .with_base_and_precision::<2>(working_bits())
                .value(),
        )
    }

    fn to_f64(&self) -> f64 {
        self.to_f64().value()
    }

    fn abs(&self) -> Self {
        num_traits::Signed::abs(self)
    }
    fn exp(&self) -> Self {
        FBig::exp(self)
    }
    fn exp_m1(&self) -> Self {
        FBig::exp_m1(self)
    }
    fn ln(&self) -> Self {
        FBig::ln(self)
    }
    fn ln_1p(&self) -> Self {
        FBig::ln_1p(self)
    }
    fn powf(&self, exponent: &Self) -> Self {
        FBig::powf(self, exponent)
    }
    fn sqrt(&self) -> Self {
        FBig::sqrt(self)
    }
    fn cbrt(&self) -> Self {
        FBig::nth_root(self, 3)
    }
    fn is_finite(&self) -> bool {
        self.repr().is_finite()
    }

    fn epsilon() -> Self {
        pow2(-(working_bits() as isize))
    }
    fn series_cutoff() -> Self {
        pow2(-(working_bits() as isize) / 4)
    }
    fn weight_cutoff() -> Self {
        pow2(-(working_bits() as isize))
    }
    fn deformation_cutoff() -> Self {
        pow2(-(working_bits() as isize))
    }

    fn to_decimal_string(&self) -> String {
        let digits = working_digits() as usize;
        let dec = self.to_decimal().value().with_precision(digits).value();
        normalize_big_decimal(&dec.to_string())
    }
}

/// Rewrites dashu's decimal rendering (`1.25e-3`, `-0.5`, `1e+10`, …) into plain JSON-compatible text.
fn normalize_big_decimal(s: &str) -> String {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let mant = if mant.contains('.') {
        mant.trim_end_matches('0').trim_end_matches('.')
    } else {
        mant
    };
    match exp {
        Some(e) => {
            let e: i64 = e.trim_start_matches('+').parse().unwrap_or(0);
            if e == 0 {
                mant.to_string()
            } else {
                format!("{mant}e{e}")
            }
        }
        None => mant.to_string(),
    }
}

/// `%.17g`-style rendering: 17 significant digits, trailing zeros stripped.
///
/// Always round-trips to the same `f64`.
pub fn fmt17(x: f64) -> String {
    fmt_sig(x, 17)
}

fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mant, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        let mant = strip_zeros(mant);
        format!("{mant}e{exp}")
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
