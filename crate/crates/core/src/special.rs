//! Standard normal distribution functions.

#![allow(clippy::excessive_precision)]

use crate::scalar::Scalar;

/// Below this argument `log_normal_cdf` switches from `erfc` to the
/// continued-fraction tail representation.
const LOG_CDF_TAIL_SWITCH: f64 = -8.0;

/// Terms used in the backward evaluation of the Mills-ratio continued fraction.
/// At |x| = 8 the truncation error is far below one ulp.
const MILLS_TERMS: usize = 120;

/// Standard normal CDF, `0.5 * erfc(-x / sqrt(2))`.
#[inline]
pub fn normal_cdf<S: Scalar>(x: S) -> S {
    S::lit(0.5) * (-x * S::FRAC_1_SQRT_2()).erfc()
}

/// Standard normal density.
#[inline]
pub fn normal_pdf<S: Scalar>(x: S) -> S {
    let inv_sqrt_2pi = S::FRAC_1_SQRT_2() * S::FRAC_2_SQRT_PI() * S::lit(0.5);
    inv_sqrt_2pi * (-S::lit(0.5) * x * x).exp()
}

/// Natural log of the standard normal CDF, accurate deep into the left tail
/// where the CDF itself underflows.
pub fn log_normal_cdf<S: Scalar>(x: S) -> S {
    if x < S::lit(LOG_CDF_TAIL_SWITCH) {
        let z = -x;
        let half_ln_2pi = S::lit(0.918_938_533_204_672_7);
        -S::lit(0.5) * z * z - half_ln_2pi + mills_ratio(z).ln()
    } else if x > S::zero() {
        // log(1 - Q) with Q the upper tail
        (-S::lit(0.5) * (x * S::FRAC_1_SQRT_2()).erfc()).ln_1p()
    } else {
        normal_cdf(x).ln()
    }
}

/// Mills ratio `(1 - Phi(z)) / phi(z)` for `z > 0`, from the Laplace
/// continued fraction `1 / (z + 1 / (z + 2 / (z + 3 / (z + ...))))`.
fn mills_ratio<S: Scalar>(z: S) -> S {
    let mut t = z;
    for k in (1..=MILLS_TERMS).rev() {
        t = z + S::from_count(k) / t;
    }
    t.recip()
}

// Wichura (1988), algorithm AS 241, PPND16.
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

#[inline]
fn horner<S: Scalar>(coeffs: &[f64; 8], r: S) -> S {
    coeffs
        .iter()
        .rev()
        .fold(S::zero(), |acc, &c| acc * r + S::lit(c))
}

/// Inverse of the standard normal CDF for `p` in the open interval (0, 1).
///
/// Relative accuracy about 1e-16 in `f64`. Returns ±infinity at the
/// endpoints and NaN outside [0, 1]; callers that need a domain error
/// check the argument first.
pub fn normal_quantile<S: Scalar>(p: S) -> S {
    let half = S::lit(0.5);
    let q = p - half;
    if q.abs() <= S::lit(0.425) {
        let r = S::lit(0.180_625) - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let tail = if q < S::zero() { p } else { S::one() - p };
    if tail <= S::zero() {
        return if tail == S::zero() {
            if q < S::zero() {
                S::neg_infinity()
            } else {
                S::infinity()
            }
        } else {
            S::nan()
        };
    }
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= S::lit(5.0) {
        r = r - S::lit(1.6);
        horner(&C, r) / horner(&D, r)
    } else {
        r = r - S::lit(5.0);
        horner(&E, r) / horner(&F, r)
    };
    if q < S::zero() {
        -val
    } else {
        val
    }
}
