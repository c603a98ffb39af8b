//! Truncated power-series arithmetic in one and two variables.
//!
//! A series holds monomial coefficients up to a fixed truncation order; all
//! products drop the terms the truncation cannot represent. The coupling-flow
//! beta functions are generated by pushing the potential's second derivative
//! through [`TruncatedSeries1::log1p`] (and the two-variable analogue), so
//! the same code produces the coupled ODEs at any truncation order.

use crate::error::{Error, Result};

/// Polynomial coefficients `c[0..=order]` of `sum_n c_n x^n`, truncated at a
/// fixed order. Binary operations require equal orders.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries1 {
    c: Vec<f64>,
}

impl TruncatedSeries1 {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        Self { c: coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self { c: vec![0.0; order + 1] }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.c[0] = value;
        s
    }

    /// Truncation order (highest represented power).
    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeff(&self, n: usize) -> f64 {
        self.c.get(n).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.c
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order(), "order mismatch");
        Self { c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order(), "order mismatch");
        Self { c: self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { c: self.c.iter().map(|a| k * a).collect() }
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order(), "order mismatch");
        let n = self.c.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                out[i + j] += self.c[i] * other.c[j];
            }
        }
        Self { c: out }
    }

    /// `ln(1 + u)` for this series `u`, requiring `1 + u_0 > 0`.
    ///
    /// Split off the constant: with `w = (u - u_0)/(1 + u_0)` (zero constant
    /// term),
    ///
    /// ```text
    /// ln(1 + u) = ln(1 + u_0) + sum_{k>=1} (-1)^{k+1} w^k / k
    /// ```
    ///
    /// and the alternating sum is exact at the truncation order because `w^k`
    /// starts at degree `k`.
    pub fn log1p(&self) -> Result<Self> {
        let u0 = self.c[0];
        if !(1.0 + u0 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "series log argument has non-positive constant term 1 + {u0}"
            )));
        }
        let order = self.order();
        let mut w = self.clone();
        w.c[0] = 0.0;
        let w = w.scale(1.0 / (1.0 + u0));

        // ln_1p, not (1 + u0).ln(): the tail quadratures feed in constant
        // terms down to ~1e-10, where the naive form loses half the digits.
        let mut out = Self::constant(u0.ln_1p(), order);
        let mut wk = w.clone(); // w^k
        let mut sign = 1.0;
        for k in 1..=order {
            out = out.add(&wk.scale(sign / k as f64));
            sign = -sign;
            if k < order {
                wk = wk.mul(&w);
            }
        }
        Ok(out)
    }

    /// Series exponential, by the standard derivative recurrence
    /// `n e_n = sum_{k=1..n} k u_k e_{n-k}`. Serves as the independent
    /// inverse of [`Self::log1p`] in tests.
    pub fn exp(&self) -> Self {
        let n = self.c.len();
        let mut e = vec![0.0; n];
        e[0] = self.c[0].exp();
        for m in 1..n {
            let mut acc = 0.0;
            for k in 1..=m {
                acc += k as f64 * self.c[k] * e[m - k];
            }
            e[m] = acc / m as f64;
        }
        Self { c: e }
    }

    /// Exact derivative, padded back to the same truncation order with a
    /// zero top coefficient (valid when the series is a polynomial of degree
    /// <= order, as the flow states are).
    pub fn derivative(&self) -> Self {
        let n = self.c.len();
        let mut d = vec![0.0; n];
        for k in 1..n {
            d[k - 1] = k as f64 * self.c[k];
        }
        Self { c: d }
    }
}

/// Dense bivariate polynomial truncated at total degree `order`:
/// coefficients `c_{ij}` of `x1^i x2^j` with `i + j <= order`, stored by
/// total degree then by `i` (a fixed iteration order keeps every reduction
/// deterministic).
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries2 {
    order: usize,
    c: Vec<f64>,
}

fn tri_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

impl TruncatedSeries2 {
    pub fn zero(order: usize) -> Self {
        Self { order, c: vec![0.0; tri_len(order)] }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.c[0] = value;
        s
    }

    /// Truncation order (maximum total degree).
    pub fn order(&self) -> usize {
        self.order
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        let d = i + j;
        debug_assert!(d <= self.order);
        d * (d + 1) / 2 + i
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.order {
            0.0
        } else {
            self.c[self.idx(i, j)]
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, value: f64) {
        assert!(i + j <= self.order, "monomial degree exceeds truncation order");
        let k = self.idx(i, j);
        self.c[k] = value;
    }

    /// Iterates `(i, j, c_ij)` in storage order.
    pub fn monomials(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.order).flat_map(move |d| {
            (0..=d).map(move |i| (i, d - i, self.c[d * (d + 1) / 2 + i]))
        })
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let mut p1 = vec![1.0; self.order + 1];
        let mut p2 = vec![1.0; self.order + 1];
        for k in 1..=self.order {
            p1[k] = p1[k - 1] * x1;
            p2[k] = p2[k - 1] * x2;
        }
        let mut acc = 0.0;
        for (i, j, cij) in self.monomials() {
            if cij != 0.0 {
                acc += cij * p1[i] * p2[j];
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order, "order mismatch");
        Self { order: self.order, c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order, "order mismatch");
        Self { order: self.order, c: self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { order: self.order, c: self.c.iter().map(|a| k * a).collect() }
    }

    /// Product truncated at the common total degree.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order, "order mismatch");
        let mut out = Self::zero(self.order);
        for (i1, j1, a) in self.monomials() {
            if a == 0.0 {
                continue;
            }
            for (i2, j2, b) in other.monomials() {
                if b == 0.0 || i1 + i2 + j1 + j2 > self.order {
                    continue;
                }
                let k = out.idx(i1 + i2, j1 + j2);
                out.c[k] += a * b;
            }
        }
        out
    }

    /// Exact partial derivative in `x1`, padded to the same order.
    pub fn d1(&self) -> Self {
        let mut out = Self::zero(self.order);
        for (i, j, cij) in self.monomials() {
            if i >= 1 && cij != 0.0 {
                let k = out.idx(i - 1, j);
                out.c[k] += i as f64 * cij;
            }
        }
        out
    }

    /// Exact partial derivative in `x2`, padded to the same order.
    pub fn d2(&self) -> Self {
        let mut out = Self::zero(self.order);
        for (i, j, cij) in self.monomials() {
            if j >= 1 && cij != 0.0 {
                let k = out.idx(i, j - 1);
                out.c[k] += j as f64 * cij;
            }
        }
        out
    }

    /// `ln(1 + u)`, same construction as the one-variable case.
    pub fn log1p(&self) -> Result<Self> {
        let u0 = self.c[0];
        if !(1.0 + u0 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "series log argument has non-positive constant term 1 + {u0}"
            )));
        }
        let mut w = self.clone();
        w.c[0] = 0.0;
        let w = w.scale(1.0 / (1.0 + u0));

        // See the one-variable case: ln_1p preserves tiny constant terms.
        let mut out = Self::constant(u0.ln_1p(), self.order);
        let mut wk = w.clone();
        let mut sign = 1.0;
        for k in 1..=self.order {
            out = out.add(&wk.scale(sign / k as f64));
            sign = -sign;
            if k < self.order {
                wk = wk.mul(&w);
            }
        }
        Ok(out)
    }

    /// Copies the coefficients into a (possibly larger) truncation order.
    pub fn pad_to(&self, order: usize) -> Self {
        assert!(order >= self.order, "pad_to cannot shrink a series");
        let mut out = Self::zero(order);
        for (i, j, cij) in self.monomials() {
            let k = out.idx(i, j);
            out.c[k] = cij;
        }
        out
    }

    /// Exact linear substitution `x1 -> a11 y1 + a12 y2`, `x2 -> a21 y1 + a22 y2`.
    /// Total degree is preserved, so no truncation error is introduced.
    pub fn substitute_linear(&self, a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        // Binomial expansion of (a11 y1 + a12 y2)^i (a21 y1 + a22 y2)^j.
        let n = self.order;
        let mut binom = vec![vec![0.0; n + 1]; n + 1];
        for r in 0..=n {
            binom[r][0] = 1.0;
            for s in 1..=r {
                binom[r][s] = binom[r - 1][s - 1] + if s <= r - 1 { binom[r - 1][s] } else { 0.0 };
            }
        }
        let mut out = Self::zero(n);
        for (i, j, cij) in self.monomials() {
            if cij == 0.0 {
                continue;
            }
            for p in 0..=i {
                let f1 = binom[i][p] * a11.powi(p as i32) * a12.powi((i - p) as i32);
                for q in 0..=j {
                    let f2 = binom[j][q] * a21.powi(q as i32) * a22.powi((j - q) as i32);
                    let k = out.idx(p + q, i + j - p - q);
                    out.c[k] += cij * f1 * f2;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log1p_of_zero_is_zero() {
        let u = TruncatedSeries1::zero(6);
        let l = u.log1p().unwrap();
        assert_eq!(l.coeffs(), &[0.0; 7]);
    }

    #[test]
    fn log1p_of_x_is_the_mercator_series() {
        // ln(1 + x) = x - x²/2 + x³/3 - ...
        let mut u = TruncatedSeries1::zero(3);
        u.coeffs_mut()[1] = 1.0;
        let l = u.log1p().unwrap();
        assert_relative_eq!(l.coeff(0), 0.0);
        assert_relative_eq!(l.coeff(1), 1.0);
        assert_relative_eq!(l.coeff(2), -0.5);
        assert_relative_eq!(l.coeff(3), 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn log1p_rejects_nonpositive_argument() {
        let u = TruncatedSeries1::constant(-1.0, 4);
        assert!(u.log1p().is_err());
    }

    /// The series exponential inverts log1p to truncation order: this is the
    /// independent oracle for the logarithm used by the beta generator.
    #[test]
    fn exp_inverts_log1p_on_random_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5e41e5);
        for _ in 0..50 {
            let order = rng.gen_range(2..=12);
            let mut u = TruncatedSeries1::zero(order);
            u.coeffs_mut()[0] = rng.gen_range(-0.8..4.0);
            for k in 1..=order {
                u.coeffs_mut()[k] = rng.gen_range(-1.5..1.5);
            }
            let roundtrip = u.log1p().unwrap().exp();
            for k in 0..=order {
                let expect = if k == 0 { 1.0 + u.coeff(0) } else { u.coeff(k) };
                assert_relative_eq!(roundtrip.coeff(k), expect, epsilon = 1e-11, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn product_matches_pointwise_evaluation_below_truncation() {
        // For polynomials whose product degree fits the truncation, mul is
        // exact, so series eval must match pointwise products.
        let a = TruncatedSeries1::new(vec![1.0, -2.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
        let b = TruncatedSeries1::new(vec![0.3, 1.0, 0.0, -0.7, 0.0, 0.0, 0.0]);
        let p = a.mul(&b);
        for &x in &[-0.9, -0.3, 0.0, 0.4, 1.1] {
            assert_relative_eq!(p.eval(x), a.eval(x) * b.eval(x), epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn ring_laws_hold_to_roundoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let order = rng.gen_range(1..=10);
            let rand_series = |rng: &mut ChaCha8Rng| {
                TruncatedSeries1::new((0..=order).map(|_| rng.gen_range(-2.0..2.0)).collect())
            };
            let a = rand_series(&mut rng);
            let b = rand_series(&mut rng);
            let c = rand_series(&mut rng);
            let assoc_l = a.mul(&b).mul(&c);
            let assoc_r = a.mul(&b.mul(&c));
            let dist_l = a.mul(&b.add(&c));
            let dist_r = a.mul(&b).add(&a.mul(&c));
            for k in 0..=order {
                assert_relative_eq!(assoc_l.coeff(k), assoc_r.coeff(k), epsilon = 1e-10, max_relative = 1e-10);
                assert_relative_eq!(dist_l.coeff(k), dist_r.coeff(k), epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn derivative_matches_polynomial_rule() {
        let s = TruncatedSeries1::new(vec![3.0, 1.0, -0.5, 2.0]);
        let d = s.derivative();
        assert_eq!(d.coeffs(), &[1.0, -1.0, 6.0, 0.0]);
    }

    #[test]
    fn bivariate_product_matches_pointwise_evaluation() {
        let mut a = TruncatedSeries2::zero(6);
        a.set_coeff(0, 0, 1.0);
        a.set_coeff(2, 0, -0.5);
        a.set_coeff(1, 1, 2.0);
        let mut b = TruncatedSeries2::zero(6);
        b.set_coeff(0, 1, 1.0);
        b.set_coeff(0, 2, 0.25);
        b.set_coeff(3, 0, -1.0);
        let p = a.mul(&b);
        for &(x1, x2) in &[(0.3, -0.2), (-0.7, 0.5), (0.1, 0.9)] {
            assert_relative_eq!(
                p.eval(x1, x2),
                a.eval(x1, x2) * b.eval(x1, x2),
                epsilon = 1e-12,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn bivariate_log1p_agrees_with_univariate_on_separable_input() {
        // u(x1, x2) = f(x1): the bivariate log must reduce to the univariate one.
        let f = TruncatedSeries1::new(vec![0.5, 0.3, -0.1, 0.02, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let mut u2 = TruncatedSeries2::zero(8);
        for (k, &ck) in f.coeffs().iter().enumerate() {
            u2.set_coeff(k, 0, ck);
        }
        let l1 = f.log1p().unwrap();
        let l2 = u2.log1p().unwrap();
        for k in 0..=8 {
            assert_relative_eq!(l2.coeff(k, 0), l1.coeff(k), epsilon = 1e-13, max_relative = 1e-13);
            if k >= 1 {
                assert_eq!(l2.coeff(0, k), 0.0);
            }
        }
    }

    #[test]
    fn linear_substitution_matches_pointwise_evaluation() {
        let mut v = TruncatedSeries2::zero(5);
        v.set_coeff(0, 0, 0.2);
        v.set_coeff(2, 0, 1.0);
        v.set_coeff(0, 3, -0.4);
        v.set_coeff(2, 2, 0.7);
        v.set_coeff(1, 1, -1.3);
        let (a11, a12, a21, a22) = (0.6, -0.8, 0.8, 0.6);
        let w = v.substitute_linear(a11, a12, a21, a22);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let y1 = rng.gen_range(-1.0..1.0);
            let y2 = rng.gen_range(-1.0..1.0);
            let direct = v.eval(a11 * y1 + a12 * y2, a21 * y1 + a22 * y2);
            assert_relative_eq!(w.eval(y1, y2), direct, epsilon = 1e-12, max_relative = 1e-12);
        }
    }
}
