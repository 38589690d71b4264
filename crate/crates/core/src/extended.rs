//! Double-double complex arithmetic for sums that cancel catastrophically
//! in plain `f64`.

use num_complex::Complex;
use twofloat::TwoFloat;

use crate::trig::C64;

pub(crate) type DdComplex = Complex<TwoFloat>;

/// Relative size of the last series term kept in [`sinh_cosh`].
const SERIES_EPS: f64 = 1e-33;

pub(crate) fn dd(z: C64) -> DdComplex {
    Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
}

pub(crate) fn to_c64(z: DdComplex) -> C64 {
    C64::new(z.re.hi() + z.re.lo(), z.im.hi() + z.im.lo())
}

pub(crate) fn one() -> DdComplex {
    Complex::new(TwoFloat::from(1.0), TwoFloat::from(0.0))
}

/// `(sinh y, cosh y)` by their Taylor series for moderate `|y|`, and from
/// `exp` beyond that. The library `sinh` loses about three digits near the
/// unit interval, which the series avoids.
fn sinh_cosh(y: TwoFloat) -> (TwoFloat, TwoFloat) {
    let ya = y.hi().abs();
    if ya > 4.0 {
        let e = y.exp();
        let inv = TwoFloat::from(1.0) / e;
        return ((e - inv) / 2.0, (e + inv) / 2.0);
    }
    let y2 = y * y;
    let mut s = y;
    let mut c = TwoFloat::from(1.0);
    let mut term_s = y;
    let mut term_c = TwoFloat::from(1.0);
    let mut k = 1.0;
    loop {
        term_c = term_c * y2 / (k * (k + 1.0));
        term_s = term_s * y2 / ((k + 1.0) * (k + 2.0));
        c += term_c;
        s += term_s;
        k += 2.0;
        if term_c.hi().abs() <= SERIES_EPS * c.hi().abs()
            && term_s.hi().abs() <= SERIES_EPS * s.hi().abs().max(f64::MIN_POSITIVE)
        {
            break;
        }
    }
    (s, c)
}

/// `sin(x + iy) = sin x cosh y + i cos x sinh y`.
pub(crate) fn sin(z: DdComplex) -> DdComplex {
    let (sh, ch) = sinh_cosh(z.im);
    Complex::new(z.re.sin() * ch, z.re.cos() * sh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_matches_f64() {
        for &(re, im) in &[(0.3, 0.2), (-1.4, 1.1), (2.9, -0.05), (0.0, 5.0), (1e-3, 1e-9)] {
            let z = C64::new(re, im);
            let d = to_c64(sin(dd(z)));
            assert!((d - z.sin()).norm() <= 4.0 * f64::EPSILON * z.sin().norm());
        }
    }

    #[test]
    fn sin_resolves_below_f64() {
        // sin² + cos² = 1 well below f64 resolution (the library's real
        // sin/cos are good to about 1e-21).
        let z = dd(C64::new(0.52, 0.5));
        let s = sin(z);
        let half_pi = Complex::new(twofloat::consts::FRAC_PI_2, TwoFloat::from(0.0));
        let c = sin(half_pi - z);
        let r = s * s + c * c - one();
        assert!(r.re.hi().abs() < 1e-20 && r.im.hi().abs() < 1e-20, "{r:?}");
    }
}
