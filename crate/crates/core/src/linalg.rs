//! Dense complex linear algebra helpers: site embeddings, norms, an
//! extended-range complex scalar and an LU determinant with pivot growth.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, MulAssign, Neg, Sub};

use crate::trig::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Entrywise max-norm of a matrix.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc: f64, z| acc.max(z.norm_sqr())).sqrt()
}

/// Entrywise max-norm of `a − b`.
pub fn max_norm_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn vec_max_norm_diff(a: &CVector, b: &CVector) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Spin of site `k` in flat basis index `s` of an `n`-site space; site 0 is
/// the most significant binary digit.
#[inline]
pub fn spin_of(s: usize, k: usize, n: usize) -> usize {
    (s >> (n - 1 - k)) & 1
}

/// Spins of all sites of basis index `s`.
pub fn spins_of(s: usize, n: usize) -> Vec<usize> {
    (0..n).map(|k| spin_of(s, k, n)).collect()
}

/// Flat basis index of a spin configuration.
pub fn index_of(spins: &[usize]) -> usize {
    spins.iter().fold(0, |acc, &b| 2 * acc + b)
}

/// Embeds a single-site operator acting on site `a` of an `n`-site space.
pub fn embed_one(op: &CMatrix, a: usize, n: usize) -> CMatrix {
    assert_eq!(op.shape(), (2, 2));
    assert!(a < n);
    let dim = 1usize << n;
    let bit = n - 1 - a;
    let mut out = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let col = (s >> bit) & 1;
        for row in 0..2 {
            let v = op[(row, col)];
            if v != c(0.0, 0.0) {
                let t = (s & !(1 << bit)) | (row << bit);
                out[(t, s)] += v;
            }
        }
    }
    out
}

/// Embeds a two-site operator (flat index `2·i_a + i_b`) acting on sites
/// `a`, `b` of an `n`-site space. `a` may be greater than `b`.
pub fn embed_two(op: &CMatrix, a: usize, b: usize, n: usize) -> CMatrix {
    assert_eq!(op.shape(), (4, 4));
    assert!(a < n && b < n && a != b);
    let dim = 1usize << n;
    let (ba, bb) = (n - 1 - a, n - 1 - b);
    let mut out = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let col = 2 * ((s >> ba) & 1) + ((s >> bb) & 1);
        let rest = s & !(1 << ba) & !(1 << bb);
        for row in 0..4 {
            let v = op[(row, col)];
            if v != c(0.0, 0.0) {
                let t = rest | ((row >> 1) << ba) | ((row & 1) << bb);
                out[(t, s)] += v;
            }
        }
    }
    out
}

/// Applies a two-site operator on sites `a`, `b` to an `n`-site state.
pub fn apply_two_site(op: &[[C64; 4]; 4], a: usize, b: usize, n: usize, v: &[C64]) -> Vec<C64> {
    let (ba, bb) = (n - 1 - a, n - 1 - b);
    let mut out = vec![c(0.0, 0.0); v.len()];
    for (s, &x) in v.iter().enumerate() {
        if x == c(0.0, 0.0) {
            continue;
        }
        let col = 2 * ((s >> ba) & 1) + ((s >> bb) & 1);
        let rest = s & !(1 << ba) & !(1 << bb);
        for (row, r) in op.iter().enumerate() {
            let w = r[col];
            if w != c(0.0, 0.0) {
                out[rest | ((row >> 1) << ba) | ((row & 1) << bb)] += w * x;
            }
        }
    }
    out
}

/// Applies a single-site operator on site `a` to an `n`-site state.
pub fn apply_one_site(op: &[[C64; 2]; 2], a: usize, n: usize, v: &[C64]) -> Vec<C64> {
    let bit = n - 1 - a;
    let mut out = vec![c(0.0, 0.0); v.len()];
    for (s, &x) in v.iter().enumerate() {
        if x == c(0.0, 0.0) {
            continue;
        }
        let col = (s >> bit) & 1;
        let rest = s & !(1 << bit);
        for (row, r) in op.iter().enumerate() {
            out[rest | (row << bit)] += r[col] * x;
        }
    }
    out
}

/// 4×4 dense matrix as a fixed array.
pub fn to_array4(m: &CMatrix) -> [[C64; 4]; 4] {
    assert_eq!(m.shape(), (4, 4));
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

/// 2×2 dense matrix as a fixed array.
pub fn to_array2(m: &CMatrix) -> [[C64; 2]; 2] {
    assert_eq!(m.shape(), (2, 2));
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

/// Tensor product of per-site 2-vectors (site 0 most significant).
pub fn product_state(factors: &[[C64; 2]]) -> CVector {
    let mut v = CVector::from_element(1, c(1.0, 0.0));
    for f in factors {
        let mut next = CVector::zeros(v.len() * 2);
        for (i, &x) in v.iter().enumerate() {
            next[2 * i] = x * f[0];
            next[2 * i + 1] = x * f[1];
        }
        v = next;
    }
    v
}

/// Basis vector `|s⟩` of dimension `2^n`.
pub fn basis_vector(s: usize, n: usize) -> CVector {
    let mut v = CVector::zeros(1 << n);
    v[s] = c(1.0, 0.0);
    v
}

/// Complex number with an extra binary exponent, `mantissa · 2^exponent`.
///
/// Used for products of many sine ratios and for large determinants, which
/// leave the `f64` range long before they lose relative accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtComplex {
    mantissa: C64,
    exponent: i64,
}

fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // Subnormal: scale into the normal range first.
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let e = raw - 1022;
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, e)
}

/// `x · 2^e` without intermediate overflow.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl ExtComplex {
    pub fn zero() -> Self {
        ExtComplex {
            mantissa: c(0.0, 0.0),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        ExtComplex::from(c(1.0, 0.0))
    }

    fn normalized(mantissa: C64, exponent: i64) -> Self {
        let scale = mantissa.re.abs().max(mantissa.im.abs());
        if scale == 0.0 || !scale.is_finite() {
            return ExtComplex {
                mantissa,
                exponent: if scale == 0.0 { 0 } else { exponent },
            };
        }
        let (_, e) = frexp(scale);
        ExtComplex {
            mantissa: c(ldexp(mantissa.re, -e), ldexp(mantissa.im, -e)),
            exponent: exponent + e,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == c(0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.re.is_finite() && self.mantissa.im.is_finite()
    }

    /// Conversion to `C64`; overflows to infinity / underflows to zero.
    pub fn to_c64(&self) -> C64 {
        c(
            ldexp(self.mantissa.re, self.exponent),
            ldexp(self.mantissa.im, self.exponent),
        )
    }

    /// `log₁₀ |z|` (−∞ for zero).
    pub fn log10_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mantissa.norm().log10() + self.exponent as f64 * std::f64::consts::LOG10_2
    }

    pub fn norm(&self) -> f64 {
        ldexp(self.mantissa.norm(), self.exponent)
    }

    pub fn inv(&self) -> Self {
        ExtComplex::normalized(self.mantissa.inv(), -self.exponent)
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        ExtComplex::normalized(self.mantissa * s, self.exponent)
    }

    /// Product of many factors, renormalizing as it goes.
    pub fn product<I: IntoIterator<Item = C64>>(it: I) -> Self {
        let mut acc = ExtComplex::one();
        let mut pending = c(1.0, 0.0);
        for z in it {
            pending *= z;
            let s = pending.re.abs().max(pending.im.abs());
            if !(1e-100..=1e100).contains(&s) {
                acc *= ExtComplex::from(pending);
                pending = c(1.0, 0.0);
            }
        }
        acc * ExtComplex::from(pending)
    }
}

/// Relative difference of two extended-range values.
pub fn ext_rel_diff(a: ExtComplex, b: ExtComplex) -> f64 {
    if a.is_zero() && b.is_zero() {
        return 0.0;
    }
    let e = a.exponent.max(b.exponent);
    let ma = c(
        ldexp(a.mantissa.re, a.exponent - e),
        ldexp(a.mantissa.im, a.exponent - e),
    );
    let mb = c(
        ldexp(b.mantissa.re, b.exponent - e),
        ldexp(b.mantissa.im, b.exponent - e),
    );
    rel_diff(ma, mb)
}

impl From<C64> for ExtComplex {
    fn from(z: C64) -> Self {
        ExtComplex::normalized(z, 0)
    }
}

impl Mul for ExtComplex {
    type Output = ExtComplex;
    fn mul(self, o: ExtComplex) -> ExtComplex {
        ExtComplex::normalized(self.mantissa * o.mantissa, self.exponent + o.exponent)
    }
}

impl Mul<C64> for ExtComplex {
    type Output = ExtComplex;
    fn mul(self, o: C64) -> ExtComplex {
        self * ExtComplex::from(o)
    }
}

impl MulAssign for ExtComplex {
    fn mul_assign(&mut self, o: ExtComplex) {
        *self = *self * o;
    }
}

impl Div for ExtComplex {
    type Output = ExtComplex;
    fn div(self, o: ExtComplex) -> ExtComplex {
        ExtComplex::normalized(self.mantissa / o.mantissa, self.exponent - o.exponent)
    }
}

impl Neg for ExtComplex {
    type Output = ExtComplex;
    fn neg(self) -> ExtComplex {
        ExtComplex {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Add for ExtComplex {
    type Output = ExtComplex;
    fn add(self, o: ExtComplex) -> ExtComplex {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let e = self.exponent.max(o.exponent);
        let a = c(
            ldexp(self.mantissa.re, self.exponent - e),
            ldexp(self.mantissa.im, self.exponent - e),
        );
        let b = c(
            ldexp(o.mantissa.re, o.exponent - e),
            ldexp(o.mantissa.im, o.exponent - e),
        );
        ExtComplex::normalized(a + b, e)
    }
}

impl Sub for ExtComplex {
    type Output = ExtComplex;
    fn sub(self, o: ExtComplex) -> ExtComplex {
        self + (-o)
    }
}

/// Serialization form: the value as `{re, im}` when representable, plus
/// `log10_abs` which is always finite for nonzero values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtRecord {
    pub re: f64,
    pub im: f64,
    pub log10_abs: f64,
}

impl From<ExtComplex> for ExtRecord {
    fn from(z: ExtComplex) -> Self {
        let v = z.to_c64();
        ExtRecord {
            re: v.re,
            im: v.im,
            log10_abs: z.log10_abs(),
        }
    }
}

/// Accumulates a long product into an [`ExtComplex`] without overflow.
pub(crate) struct ProductAcc {
    acc: ExtComplex,
    pending: C64,
}

impl ProductAcc {
    pub(crate) fn new() -> Self {
        ProductAcc {
            acc: ExtComplex::one(),
            pending: c(1.0, 0.0),
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, z: C64) {
        self.pending *= z;
        let s = self.pending.re.abs().max(self.pending.im.abs());
        if !(1e-150..=1e150).contains(&s) {
            self.acc *= ExtComplex::from(self.pending);
            self.pending = c(1.0, 0.0);
        }
    }

    pub(crate) fn finish(self) -> ExtComplex {
        self.acc * ExtComplex::from(self.pending)
    }
}

/// Determinant from a partial-pivoting LU factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuDeterminant {
    pub det: ExtComplex,
    /// `max |U_ij| / max |A_ij|`.
    pub pivot_growth: f64,
}

/// In-place LU factorization with partial pivoting on the column-major
/// storage; the determinant is accumulated pivot by pivot so it cannot
/// overflow. A zero pivot column gives an exactly zero determinant and
/// infinite pivot growth.
pub fn lu_determinant(mut a: CMatrix) -> LuDeterminant {
    assert!(a.is_square());
    let n = a.nrows();
    if n == 0 {
        return LuDeterminant {
            det: ExtComplex::one(),
            pivot_growth: 1.0,
        };
    }
    let amax = max_norm(&a);
    let data = a.as_mut_slice();
    let mut det = ProductAcc::new();
    let mut umax: f64 = 0.0;
    for k in 0..n {
        let col_k = k * n;
        let mut p = k;
        let mut best = -1.0;
        for i in k..n {
            let v = data[col_k + i].norm_sqr();
            if v > best {
                best = v;
                p = i;
            }
        }
        if !(best > 0.0) {
            return LuDeterminant {
                det: ExtComplex::zero(),
                pivot_growth: f64::INFINITY,
            };
        }
        if p != k {
            for j in 0..n {
                data.swap(j * n + k, j * n + p);
            }
            det.push(C64::new(-1.0, 0.0));
        }
        let pivot = data[col_k + k];
        det.push(pivot);
        umax = umax.max(pivot.norm_sqr());
        let inv = C64::new(1.0, 0.0) / pivot;
        for x in &mut data[col_k + k + 1..col_k + n] {
            *x *= inv;
        }
        let (head, tail) = data.split_at_mut(col_k + n);
        let lcol = &head[col_k + k + 1..col_k + n];
        for col_j in tail.chunks_exact_mut(n) {
            let akj = col_j[k];
            umax = umax.max(akj.norm_sqr());
            if akj == C64::new(0.0, 0.0) {
                continue;
            }
            for (x, &l) in col_j[k + 1..].iter_mut().zip(lcol) {
                *x -= l * akj;
            }
        }
    }
    let pivot_growth = if amax > 0.0 { umax.sqrt() / amax } else { f64::INFINITY };
    LuDeterminant {
        det: det.finish(),
        pivot_growth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embeddings_match_kronecker_products() {
        let op2 = CMatrix::from_fn(2, 2, |i, j| c(i as f64 + 0.5, j as f64 - 0.3));
        let op4 = CMatrix::from_fn(4, 4, |i, j| c((i * 4 + j) as f64, 0.1 * i as f64));
        let id2 = CMatrix::identity(2, 2);
        assert_eq!(embed_one(&op2, 1, 3), kron(&kron(&id2, &op2), &id2));
        assert_eq!(embed_two(&op4, 0, 1, 3), kron(&op4, &id2));
        assert_eq!(embed_two(&op4, 1, 2, 3), kron(&id2, &op4));
        // Swapping the site roles conjugates by the permutation.
        let p = embed_two(&perm4(), 0, 1, 2);
        assert_eq!(embed_two(&op4, 1, 0, 2), &p * &op4 * &p);
    }

    fn perm4() -> CMatrix {
        let mut p = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                p[(2 * j + i, 2 * i + j)] = c(1.0, 0.0);
            }
        }
        p
    }

    #[test]
    fn product_state_matches_kron() {
        let f = [[c(1.0, 2.0), c(0.5, 0.0)], [c(0.0, 1.0), c(3.0, -1.0)]];
        let v = product_state(&f);
        let a = CVector::from_vec(f[0].to_vec());
        let b = CVector::from_vec(f[1].to_vec());
        assert_eq!(v, a.kronecker(&b));
    }

    #[test]
    fn ext_complex_arithmetic() {
        let a = c(1.5, -2.0);
        let b = c(-0.25, 0.75);
        assert!(((ExtComplex::from(a) * ExtComplex::from(b)).to_c64() - a * b).norm() < 1e-15);
        assert!(((ExtComplex::from(a) / ExtComplex::from(b)).to_c64() - a / b).norm() < 1e-14);
        assert!(((ExtComplex::from(a) + ExtComplex::from(b)).to_c64() - (a + b)).norm() < 1e-15);
        let big = ExtComplex::product(std::iter::repeat_n(c(1e200, 0.0), 10));
        assert!((big.log10_abs() - 2000.0).abs() < 1e-9);
        let back = big * ExtComplex::product(std::iter::repeat_n(c(1e-200, 0.0), 10));
        assert!((back.to_c64() - c(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(ext_rel_diff(big, big), 0.0);
    }

    #[test]
    fn lu_determinant_small() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(1.0, 1.0),
                c(0.0, 0.0),
                c(0.0, 1.0),
                c(3.0, 0.0),
                c(1.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(4.0, -1.0),
            ],
        );
        let expect = m.determinant();
        let d = lu_determinant(m);
        assert!((d.det.to_c64() - expect).norm() < 1e-12);
        assert!(d.pivot_growth >= 1.0);
        let mut z = CMatrix::zeros(2, 2);
        z[(0, 0)] = c(1.0, 0.0);
        assert!(lu_determinant(z).det.is_zero());
    }

    #[test]
    fn lu_determinant_random() {
        let m = CMatrix::from_fn(7, 7, |i, j| {
            c(((i * 7 + j) as f64 * 0.37).sin(), ((i + 3 * j) as f64).cos())
        });
        let expect = m.determinant();
        let d = lu_determinant(m);
        assert!((d.det.to_c64() - expect).norm() < 1e-12 * expect.norm().max(1.0));
    }
}
