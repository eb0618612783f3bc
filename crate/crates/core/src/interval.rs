//! Interval arithmetic with outward rounding, plus dense interval vectors
//! and matrices.
//!
//! Every operation returns an interval that encloses the exact real result
//! (fundamental containment). Rounding is realized by nextafter-style
//! perturbation of computed endpoints, guarded by error-free transformations
//! (two-sum / fma residuals) so that exactly representable results stay
//! exact. No global rounding-mode state is touched; everything is safe to
//! call from any thread.

use crate::error::{Error, Result};

#[inline]
pub(crate) fn next_up(x: f64) -> f64 {
    debug_assert!(!x.is_nan());
    x.next_up()
}

#[inline]
pub(crate) fn next_down(x: f64) -> f64 {
    debug_assert!(!x.is_nan());
    x.next_down()
}

/// Knuth's branch-free two-sum: returns (fl(a+b), err) with a+b = fl(a+b) + err exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let av = s - bv;
    let be = b - bv;
    let ae = a - av;
    (s, ae + be)
}

/// Exact product split: returns (fl(a*b), err) with a*b = fl(a*b) + err exactly.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn round_down_sum(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if e < 0.0 {
        next_down(s)
    } else {
        s
    }
}

#[inline]
fn round_up_sum(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if e > 0.0 {
        next_up(s)
    } else {
        s
    }
}

#[inline]
fn round_down_prod(a: f64, b: f64) -> f64 {
    let (p, e) = two_prod(a, b);
    if e < 0.0 {
        next_down(p)
    } else {
        p
    }
}

#[inline]
fn round_up_prod(a: f64, b: f64) -> f64 {
    let (p, e) = two_prod(a, b);
    if e > 0.0 {
        next_up(p)
    } else {
        p
    }
}

/// Directed-rounding quotient. fl(a/b) with the sign of the exact residual
/// a - fl(a/b)*b deciding whether a nudge is needed.
#[inline]
fn round_down_div(a: f64, b: f64) -> f64 {
    let q = a / b;
    let r = q.mul_add(-b, a); // a - q*b, exact
    if (b > 0.0 && r < 0.0) || (b < 0.0 && r > 0.0) {
        next_down(q)
    } else {
        q
    }
}

#[inline]
fn round_up_div(a: f64, b: f64) -> f64 {
    let q = a / b;
    let r = q.mul_add(-b, a);
    if (b > 0.0 && r > 0.0) || (b < 0.0 && r < 0.0) {
        next_up(q)
    } else {
        q
    }
}

/// A closed interval [lo, hi] of f64 with finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Exact point interval.
    #[inline]
    pub fn point(x: f64) -> Interval {
        assert!(x.is_finite(), "non-finite interval endpoint: {x}");
        Interval { lo: x, hi: x }
    }

    #[inline]
    pub fn new(lo: f64, hi: f64) -> Interval {
        assert!(
            lo.is_finite() && hi.is_finite() && lo <= hi,
            "invalid interval [{lo}, {hi}]"
        );
        Interval { lo, hi }
    }

    /// Tightest interval around a value known only up to `ulps` units in the
    /// last place on either side.
    pub fn with_ulps(x: f64, ulps: u32) -> Interval {
        let mut lo = x;
        let mut hi = x;
        for _ in 0..ulps {
            lo = next_down(lo);
            hi = next_up(hi);
        }
        Interval::new(lo, hi)
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    #[inline]
    pub fn width(&self) -> f64 {
        next_up(self.hi - self.lo)
    }

    /// Upper bound on |x| over the interval.
    #[inline]
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Lower bound on |x| over the interval (0 if it straddles 0).
    #[inline]
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    #[inline]
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    #[inline]
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    #[inline]
    pub fn abs(&self) -> Interval {
        Interval {
            lo: self.mig(),
            hi: self.mag(),
        }
    }

    #[inline]
    fn check(self) -> Interval {
        assert!(
            self.lo.is_finite() && self.hi.is_finite(),
            "interval endpoint overflowed to non-finite: [{}, {}]",
            self.lo,
            self.hi
        );
        self
    }

    #[inline]
    pub fn add(&self, rhs: &Interval) -> Interval {
        Interval {
            lo: round_down_sum(self.lo, rhs.lo),
            hi: round_up_sum(self.hi, rhs.hi),
        }
        .check()
    }

    #[inline]
    pub fn sub(&self, rhs: &Interval) -> Interval {
        Interval {
            lo: round_down_sum(self.lo, -rhs.hi),
            hi: round_up_sum(self.hi, -rhs.lo),
        }
        .check()
    }

    #[inline]
    pub fn neg(&self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn mul(&self, rhs: &Interval) -> Interval {
        // Endpoint case analysis; each candidate product rounded outward
        // only when the fma residual says the float result is inexact.
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = round_down_prod(a, c)
            .min(round_down_prod(a, d))
            .min(round_down_prod(b, c))
            .min(round_down_prod(b, d));
        let hi = round_up_prod(a, c)
            .max(round_up_prod(a, d))
            .max(round_up_prod(b, c))
            .max(round_up_prod(b, d));
        Interval { lo, hi }.check()
    }

    /// Fused out += a*b on intervals; the accumulation pattern of every hot loop.
    #[inline]
    pub fn mul_acc(&mut self, a: &Interval, b: &Interval) {
        let p = a.mul(b);
        *self = self.add(&p);
    }

    pub fn checked_div(&self, rhs: &Interval) -> Result<Interval> {
        if rhs.contains(0.0) {
            return Err(Error::DivisionByZeroInterval);
        }
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = round_down_div(a, c)
            .min(round_down_div(a, d))
            .min(round_down_div(b, c))
            .min(round_down_div(b, d));
        let hi = round_up_div(a, c)
            .max(round_up_div(a, d))
            .max(round_up_div(b, c))
            .max(round_up_div(b, d));
        Ok(Interval { lo, hi }.check())
    }

    #[inline]
    pub fn div(&self, rhs: &Interval) -> Interval {
        self.checked_div(rhs).expect("interval division by zero")
    }

    pub fn scale(&self, c: f64) -> Interval {
        self.mul(&Interval::point(c))
    }

    /// Enclosure of x^2; tighter than self.mul(self) when the interval straddles 0.
    pub fn square(&self) -> Interval {
        let m = self.mag();
        let hi = round_up_prod(m, m);
        let lo = if self.contains(0.0) {
            0.0
        } else {
            let n = self.mig();
            round_down_prod(n, n)
        };
        Interval { lo, hi }.check()
    }

    pub fn sqrt(&self) -> Result<Interval> {
        if self.lo < 0.0 {
            return Err(Error::DomainError("sqrt of interval with negative part"));
        }
        // IEEE sqrt is correctly rounded; nudge only when inexact.
        let slo = self.lo.sqrt();
        let lo = if slo.mul_add(slo, -self.lo) > 0.0 {
            next_down(slo)
        } else {
            slo
        };
        let shi = self.hi.sqrt();
        let hi = if shi.mul_add(shi, -self.hi) < 0.0 {
            next_up(shi)
        } else {
            shi
        };
        Ok(Interval { lo, hi }.check())
    }

    /// exp with monotonicity; assumes the platform exp is faithfully rounded
    /// (< 1 ulp error), which the oracle tests in this crate verify.
    pub fn exp(&self) -> Interval {
        let f = |x: f64, up: bool| -> f64 {
            if x == 0.0 {
                return 1.0;
            }
            let v = x.exp();
            if up {
                next_up(v)
            } else {
                next_down(v).max(0.0)
            }
        };
        Interval {
            lo: f(self.lo, false),
            hi: f(self.hi, true),
        }
        .check()
    }

    pub fn ln(&self) -> Result<Interval> {
        if self.lo <= 0.0 {
            return Err(Error::DomainError("ln of interval with nonpositive part"));
        }
        let f = |x: f64, up: bool| -> f64 {
            if x == 1.0 {
                return 0.0;
            }
            let v = x.ln();
            if up {
                next_up(v)
            } else {
                next_down(v)
            }
        };
        Ok(Interval {
            lo: f(self.lo, false),
            hi: f(self.hi, true),
        }
        .check())
    }

    /// Integer power by repeated squaring (enclosure, not tightest for even n
    /// across 0, which square() handles).
    pub fn powi(&self, n: u32) -> Interval {
        match n {
            0 => Interval::ONE,
            1 => *self,
            2 => self.square(),
            _ => {
                let h = self.powi(n / 2);
                let h2 = h.square();
                if n % 2 == 0 {
                    h2
                } else {
                    h2.mul(self)
                }
            }
        }
    }

    pub fn min_i(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn max_i(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::add(&self, &rhs)
    }
}

impl std::ops::Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::sub(&self, &rhs)
    }
}

impl std::ops::Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        Interval::mul(&self, &rhs)
    }
}

impl std::ops::Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        Interval::div(&self, &rhs)
    }
}

impl std::ops::Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::neg(&self)
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo, self.hi)
    }
}

/// Sum of a slice of intervals, sequential fixed order.
pub fn isum(v: &[Interval]) -> Interval {
    let mut acc = Interval::ZERO;
    for x in v {
        acc = acc.add(x);
    }
    acc
}

/// Dense interval vector.
#[derive(Debug, Clone)]
pub struct IVector {
    pub entries: Vec<Interval>,
}

impl IVector {
    pub fn zeros(len: usize) -> IVector {
        IVector {
            entries: vec![Interval::ZERO; len],
        }
    }

    pub fn from_f64(v: &[f64]) -> IVector {
        IVector {
            entries: v.iter().map(|&x| Interval::point(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Upper enclosure of the w-weighted l1 norm sum_i w_i |v_i|.
    pub fn weighted_l1(&self, w: &[f64]) -> Interval {
        assert_eq!(w.len(), self.len());
        let mut acc = Interval::ZERO;
        for (x, &wi) in self.entries.iter().zip(w) {
            acc = acc.add(&x.abs().scale(wi));
        }
        acc
    }

    pub fn l1(&self) -> Interval {
        let mut acc = Interval::ZERO;
        for x in &self.entries {
            acc = acc.add(&x.abs());
        }
        acc
    }
}

impl std::ops::Index<usize> for IVector {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.entries[i]
    }
}

impl std::ops::IndexMut<usize> for IVector {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.entries[i]
    }
}

/// Dense row-major interval matrix.
#[derive(Debug, Clone)]
pub struct IMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Interval>,
}

impl IMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IMatrix {
        IMatrix {
            rows,
            cols,
            entries: vec![Interval::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> IMatrix {
        let mut m = IMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::ONE;
        }
        m
    }

    pub fn apply(&self, v: &IVector) -> Result<IVector> {
        if self.cols != v.len() {
            return Err(Error::ShapeError {
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = IVector::zeros(self.rows);
        for i in 0..self.rows {
            let row = &self.entries[i * self.cols..(i + 1) * self.cols];
            let mut acc = Interval::ZERO;
            for (a, b) in row.iter().zip(&v.entries) {
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc.mul_acc(a, b);
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Entry j: upper enclosure of sum_i row_w_i |M_ij| / col_w_j.
    /// The max over j is the weighted operator norm of the finite block.
    pub fn weighted_colsums(&self, row_w: &IVector, col_w: &IVector) -> Result<IVector> {
        if row_w.len() != self.rows || col_w.len() != self.cols {
            return Err(Error::ShapeError {
                expected: self.rows,
                got: row_w.len(),
            });
        }
        for w in row_w.entries.iter().chain(col_w.entries.iter()) {
            if w.lo() <= 0.0 {
                return Err(Error::WeightError);
            }
        }
        let mut out = IVector::zeros(self.cols);
        for j in 0..self.cols {
            let mut acc = Interval::ZERO;
            for i in 0..self.rows {
                let e = self.entries[i * self.cols + j];
                if e.is_zero() {
                    continue;
                }
                acc.mul_acc(&e.abs(), &row_w[i]);
            }
            out[j] = acc.div(&col_w[j]);
        }
        Ok(out)
    }
}

impl std::ops::Index<(usize, usize)> for IMatrix {
    type Output = Interval;
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        &mut self.entries[i * self.cols + j]
    }
}

/// Double-double value with a rigorous error radius. Used for residual-type
/// quantities where plain f64 accumulation would dominate the final width.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
    /// bound on |true - (hi + lo)|
    pub err: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd {
        hi: 0.0,
        lo: 0.0,
        err: 0.0,
    };

    pub fn from_f64(x: f64) -> Dd {
        Dd {
            hi: x,
            lo: 0.0,
            err: 0.0,
        }
    }

    /// self += a*b for exact f64 inputs.
    #[inline]
    pub fn acc_prod(&mut self, a: f64, b: f64) {
        let (p, pe) = two_prod(a, b);
        let (s1, e1) = two_sum(self.hi, p);
        let (s2, e2) = two_sum(self.lo, pe);
        let lo = e1 + s2;
        let (h, l) = two_sum(s1, lo);
        // e2 and the rounding of (e1 + s2) are swept into err.
        self.err = next_up(next_up(self.err + e2.abs()) + (e1 + s2).abs() * 1e-16);
        self.hi = h;
        self.lo = l;
    }

    #[inline]
    pub fn add_f64(&mut self, x: f64) {
        let (s1, e1) = two_sum(self.hi, x);
        let (h, l) = two_sum(s1, self.lo + e1);
        self.err = next_up(self.err + (self.lo.abs() + e1.abs()) * 1e-16);
        self.hi = h;
        self.lo = l;
    }

    pub fn to_interval(&self) -> Interval {
        let (s, e) = two_sum(self.hi, self.lo);
        let r = next_up(e.abs() + self.err);
        Interval::new(next_down(next_down(s) - r), next_up(next_up(s) + r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap()
    }

    fn contains_rat(iv: &Interval, r: &BigRational) -> bool {
        &rat(iv.lo()) <= r && r <= &rat(iv.hi())
    }

    #[test]
    fn add_exact_integers() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(3.0, 4.0);
        let c = a + b;
        assert_eq!((c.lo(), c.hi()), (4.0, 6.0));
    }

    #[test]
    fn mul_endpoint_cases() {
        let a = Interval::new(-1.0, 2.0);
        let b = Interval::new(3.0, 4.0);
        let c = a * b;
        assert_eq!((c.lo(), c.hi()), (-4.0, 8.0));
    }

    #[test]
    fn div_by_zero_interval_errors() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(-1.0, 1.0);
        assert!(matches!(
            a.checked_div(&b),
            Err(Error::DivisionByZeroInterval)
        ));
    }

    #[test]
    fn rational_containment_all_ops() {
        // 10^4 random cases per the always-on property suite.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let x = rng.gen_range(-1e6..1e6) * rng.gen_range(1e-8..1.0f64);
            let y = rng.gen_range(-1e6..1e6) * rng.gen_range(1e-8..1.0f64);
            let a = Interval::point(x);
            let b = Interval::point(y);
            let (rx, ry) = (rat(x), rat(y));
            assert!(contains_rat(&(a + b), &(&rx + &ry)));
            assert!(contains_rat(&(a - b), &(&rx - &ry)));
            assert!(contains_rat(&(a * b), &(&rx * &ry)));
            if y != 0.0 {
                assert!(contains_rat(&(a / b), &(&rx / &ry)));
            }
        }
    }

    #[test]
    fn widening_monotone() {
        let a = Interval::new(1.0, 2.0);
        let wide = Interval::new(0.5, 2.5);
        let b = Interval::new(-3.0, 7.0);
        assert!(wide.mul(&b).contains_interval(&a.mul(&b)));
        assert!(wide.add(&b).contains_interval(&a.add(&b)));
    }

    #[test]
    fn enclosure_associativity() {
        let a = Interval::point(0.1);
        let b = Interval::point(0.2);
        let c = Interval::point(0.3);
        let exact = rat(0.1) + rat(0.2) + rat(0.3);
        assert!(contains_rat(&((a + b) + c), &exact));
        assert!(contains_rat(&(a + (b + c)), &exact));
    }

    #[test]
    fn exp_point_zero_tight() {
        let e = Interval::point(0.0).exp();
        assert!(e.contains(1.0));
        // width <= 2 ulp of 1.0
        assert!(e.width() <= 2.0 * (1.0f64.next_up() - 1.0));
    }

    #[test]
    fn sqrt_perfect_square() {
        let s = Interval::point(4.0).sqrt().unwrap();
        assert!(s.contains(2.0));
        assert_eq!(s.lo(), 2.0);
        assert_eq!(s.hi(), 2.0);
    }

    #[test]
    fn sqrt_domain_error() {
        assert!(Interval::new(-1.0, 1.0).sqrt().is_err());
    }

    // High-precision oracle for ln via the atanh series in BigRational with
    // an explicit remainder bound; precision far beyond 128 bits.
    fn ln_oracle(x: f64) -> (BigRational, BigRational) {
        assert!(x > 0.0);
        // reduce x = m * 2^k with m in [2/3, 4/3)
        let mut m = rat(x);
        let mut k: i64 = 0;
        let two = BigRational::from_integer(BigInt::from(2));
        let four_thirds = BigRational::new(BigInt::from(4), BigInt::from(3));
        let two_thirds = BigRational::new(BigInt::from(2), BigInt::from(3));
        while m >= four_thirds {
            m /= &two;
            k += 1;
        }
        while m < two_thirds {
            m *= &two;
            k -= 1;
        }
        // ln m = 2 atanh t, t = (m-1)/(m+1), |t| <= 1/5
        let one = BigRational::from_integer(BigInt::from(1));
        let t = (&m - &one) / (&m + &one);
        let t2 = &t * &t;
        let mut term = t.clone();
        let mut sum = BigRational::from_integer(BigInt::from(0));
        let mut n = 0u32;
        while n < 60 {
            sum += &term / BigRational::from_integer(BigInt::from(2 * n + 1));
            term *= &t2;
            n += 1;
        }
        let ln_m = &sum * &two;
        // remainder of the atanh tail: |t|^(2N+1)/(1-t^2) / (2N+1), tiny
        let rem = {
            let mut p = t.clone();
            for _ in 0..(2 * 60) {
                p *= &t;
            }
            let p = if p < BigRational::from_integer(BigInt::from(0)) {
                -p
            } else {
                p
            };
            p * BigRational::from_integer(BigInt::from(2))
        };
        // ln 2 to high precision via the same series at x=2: 2 atanh(1/3)
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let t2b = &third * &third;
        let mut termb = third.clone();
        let mut ln2 = BigRational::from_integer(BigInt::from(0));
        for nb in 0..120u32 {
            ln2 += &termb / BigRational::from_integer(BigInt::from(2 * nb + 1));
            termb *= &t2b;
        }
        ln2 *= &two;
        let val = ln_m + BigRational::from_integer(BigInt::from(k)) * ln2;
        (val.clone() - &rem, val + &rem)
    }

    #[test]
    fn ln_contains_high_precision_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x: f64 = rng.gen_range(1e-6..1e6);
            let iv = Interval::point(x).ln().unwrap();
            let (olo, ohi) = ln_oracle(x);
            assert!(
                rat(iv.lo()) <= ohi && olo <= rat(iv.hi()),
                "ln({x}) enclosure {iv} misses oracle"
            );
        }
    }

    #[test]
    fn exp_contains_oracle_via_ln_inverse() {
        // check exp by inverting: for y = exp(x) enclosure, ln of the
        // endpoints must straddle x.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let x: f64 = rng.gen_range(-40.0..40.0);
            let e = Interval::point(x).exp();
            let back = e.ln().unwrap();
            assert!(back.contains(x), "exp({x}) -> {e} -> ln {back}");
        }
    }

    #[test]
    fn mat_apply_identity_and_zero() {
        let v = IVector::from_f64(&[1.0, -2.5, 3.25]);
        let id = IMatrix::identity(3);
        let out = id.apply(&v).unwrap();
        for i in 0..3 {
            assert!(out[i].contains(v[i].mid()));
            assert!(out[i].width() <= 1e-15 * v[i].mag().max(1.0));
        }
        let z = IMatrix::zeros(3, 3);
        let out = z.apply(&v).unwrap();
        for i in 0..3 {
            assert!(out[i].is_zero());
        }
    }

    #[test]
    fn mat_apply_rational_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 5;
        let mut m = IMatrix::zeros(n, n);
        let mut v = IVector::zeros(n);
        let mut mr = vec![BigRational::from_integer(BigInt::from(0)); n * n];
        let mut vr = vec![BigRational::from_integer(BigInt::from(0)); n];
        for i in 0..n {
            let x: f64 = rng.gen_range(-3.0..3.0);
            v[i] = Interval::point(x);
            vr[i] = rat(x);
            for j in 0..n {
                let y: f64 = rng.gen_range(-3.0..3.0);
                m[(i, j)] = Interval::point(y);
                mr[i * n + j] = rat(y);
            }
        }
        let out = m.apply(&v).unwrap();
        for i in 0..n {
            let mut acc = BigRational::from_integer(BigInt::from(0));
            for j in 0..n {
                acc += &mr[i * n + j] * &vr[j];
            }
            assert!(contains_rat(&out[i], &acc));
        }
    }

    #[test]
    fn mat_apply_shape_error() {
        let m = IMatrix::zeros(2, 3);
        let v = IVector::zeros(2);
        assert!(matches!(m.apply(&v), Err(Error::ShapeError { .. })));
    }

    #[test]
    fn weighted_colsums_diagonal() {
        let n = 4;
        let mut m = IMatrix::zeros(n, n);
        let d = [1.5, -2.0, 0.25, 3.0];
        for i in 0..n {
            m[(i, i)] = Interval::point(d[i]);
        }
        let w = IVector::from_f64(&[1.0; 4]);
        let cs = m.weighted_colsums(&w, &w).unwrap();
        for j in 0..n {
            assert!(cs[j].contains(d[j].abs()));
        }
        let z = IMatrix::zeros(n, n);
        let cs = z.weighted_colsums(&w, &w).unwrap();
        for j in 0..n {
            assert!(cs[j].is_zero());
        }
    }

    #[test]
    fn weighted_colsums_oracle_and_weight_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 4;
        let mut m = IMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Interval::point(rng.gen_range(-2.0..2.0));
            }
        }
        let rw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let cw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let cs = m
            .weighted_colsums(&IVector::from_f64(&rw), &IVector::from_f64(&cw))
            .unwrap();
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += rw[i] * m[(i, j)].mid().abs();
            }
            acc /= cw[j];
            assert!(cs[j].lo() <= acc * (1.0 + 1e-12) && acc * (1.0 - 1e-12) <= cs[j].hi());
        }
        let bad = IVector::from_f64(&[1.0, 0.0, 1.0, 1.0]);
        assert!(matches!(
            m.weighted_colsums(&bad, &IVector::from_f64(&cw)),
            Err(Error::WeightError)
        ));
    }

    #[test]
    fn dd_accumulation_tightness() {
        // sum of many products stays tight relative to the small result
        let mut acc = Dd::ZERO;
        let n = 10_000;
        for i in 0..n {
            let a = (i as f64).sin();
            acc.acc_prod(a, 1.0);
            acc.acc_prod(-a, 1.0);
        }
        let iv = acc.to_interval();
        assert!(iv.contains(0.0));
        assert!(iv.width() < 1e-9, "dd width {}", iv.width());
    }
}
