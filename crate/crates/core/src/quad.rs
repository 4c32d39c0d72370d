//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Stopping rule for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Self {
            rel,
            abs: 0.0,
            max_intervals: 4000,
        }
    }

    pub const fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }
}

/// Integral estimate with its error bound.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature<S> {
    pub value: S,
    pub error: S,
}

struct Piece<S> {
    a: S,
    b: S,
    value: S,
    error: S,
}

fn kronrod<S: Scalar, F: FnMut(S) -> S>(f: &mut F, a: S, b: S) -> Piece<S> {
    let half = S::lit(0.5);
    let center = half * (a + b);
    let h = half * (b - a);
    let fc = f(center);
    let mut resk = fc * S::lit(WGK[7]);
    let mut resg = fc * S::lit(WG[3]);
    for j in 0..7 {
        let dx = h * S::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        resk = resk + S::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            resg = resg + S::lit(WG[j / 2]) * pair;
        }
    }
    Piece {
        a,
        b,
        value: resk * h,
        error: ((resk - resg) * h).abs(),
    }
}

/// Integrates `f` over `[a, b]`, bisecting the piece with the largest error
/// estimate until `error <= max(tol.abs, tol.rel * |value|)`.
pub fn integrate<S, F>(mut f: F, a: S, b: S, tol: Tolerance) -> Result<Quadrature<S>>
where
    S: Scalar,
    F: FnMut(S) -> S,
{
    if a == b {
        return Ok(Quadrature {
            value: S::zero(),
            error: S::zero(),
        });
    }
    let mut pieces = vec![kronrod(&mut f, a, b)];
    loop {
        let value: S = pieces.iter().map(|p| p.value).sum();
        let error: S = pieces.iter().map(|p| p.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                a: a.as_f64(),
                b: b.as_f64(),
                estimate: value.as_f64(),
                error: error.as_f64(),
            });
        }
        let target = S::lit(tol.abs).max(S::lit(tol.rel) * value.abs());
        if error <= target {
            return Ok(Quadrature { value, error });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let p = pieces.swap_remove(worst);
        let mid = S::lit(0.5) * (p.a + p.b);
        if pieces.len() + 2 > tol.max_intervals || mid <= p.a || mid >= p.b {
            return Err(Error::QuadratureNonConvergence {
                a: a.as_f64(),
                b: b.as_f64(),
                estimate: value.as_f64(),
                error: error.as_f64(),
            });
        }
        pieces.push(kronrod(&mut f, p.a, mid));
        pieces.push(kronrod(&mut f, mid, p.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|x: f64| x.powi(5) - 2.0 * x, 0.0, 2.0, Tolerance::relative(1e-14)).unwrap();
        assert!((q.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2
        let q = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, Tolerance::relative(1e-9)).unwrap();
        assert!((q.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn oscillatory() {
        let tol = Tolerance::relative(1e-12).with_abs(1e-14);
        let q = integrate(|x: f64| (10.0 * x).sin(), 0.0, std::f64::consts::PI, tol).unwrap();
        assert!(q.value.abs() < 1e-12);
        let q = integrate(f64::cos, 0.0, 1.0, Tolerance::relative(1e-12)).unwrap();
        assert!((q.value - 1f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let tol = Tolerance {
            rel: 1e-15,
            abs: 0.0,
            max_intervals: 4,
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, tol);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }
}
