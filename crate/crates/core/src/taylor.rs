//! Truncated multivariate Taylor series in the four base coordinates
//! `(t, x, u, h)`.
//!
//! A [`Taylor`] value holds the coefficients of a polynomial in the
//! displacements `(dt, dx, du, dh)` up to a fixed total degree. Arithmetic
//! and elementary functions propagate these coefficients exactly (up to
//! floating-point roundoff), which gives the symmetry machinery exact
//! partial derivatives of any order it needs without finite differencing.
//!
//! Monomials are stored in graded order, so a series of order `n` uses a
//! prefix of the global monomial table.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

/// Number of independent variables.
pub const NVARS: usize = 4;
/// Highest supported truncation order.
pub const MAX_ORDER: usize = 6;

/// Variable index of `t`.
pub const T: usize = 0;
/// Variable index of `x`.
pub const X: usize = 1;
/// Variable index of `u`.
pub const U: usize = 2;
/// Variable index of `h`.
pub const H: usize = 3;

const NONE: u16 = u16::MAX;

struct Tables {
    exps: Vec<[u8; NVARS]>,
    degree: Vec<usize>,
    /// `len[n]` = number of monomials with degree <= n.
    len: Vec<usize>,
    /// Dense `(i, j) -> index(m_i * m_j)` over all monomials, `NONE` when
    /// the product exceeds `MAX_ORDER`.
    product: Vec<u16>,
    /// `down[v][i]` = index of `m_i / var_v`, or `NONE`.
    down: [Vec<u16>; NVARS],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

fn build_tables() -> Tables {
    let mut exps = Vec::new();
    let mut degree = Vec::new();
    let mut len = Vec::new();
    for d in 0..=MAX_ORDER {
        // lexicographic enumeration of exponent vectors summing to d
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                for c in (0..=d - a - b).rev() {
                    let e = d - a - b - c;
                    exps.push([a as u8, b as u8, c as u8, e as u8]);
                    degree.push(d);
                }
            }
        }
        len.push(exps.len());
    }
    let n = exps.len();
    let find = |e: [u8; NVARS]| -> u16 {
        exps.iter()
            .position(|x| *x == e)
            .map(|p| p as u16)
            .unwrap_or(NONE)
    };
    let mut product = vec![NONE; n * n];
    for i in 0..n {
        for j in 0..n {
            if degree[i] + degree[j] <= MAX_ORDER {
                let mut e = exps[i];
                for v in 0..NVARS {
                    e[v] += exps[j][v];
                }
                product[i * n + j] = find(e);
            }
        }
    }
    let mut down: [Vec<u16>; NVARS] = Default::default();
    for v in 0..NVARS {
        down[v] = exps
            .iter()
            .map(|e| {
                if e[v] == 0 {
                    NONE
                } else {
                    let mut f = *e;
                    f[v] -= 1;
                    find(f)
                }
            })
            .collect();
    }
    Tables {
        exps,
        degree,
        len,
        product,
        down,
    }
}

fn len_for(order: usize) -> usize {
    assert!(order <= MAX_ORDER, "taylor order {order} exceeds {MAX_ORDER}");
    tables().len[order]
}

/// Truncated Taylor expansion around a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Taylor {
    order: usize,
    c: Vec<f64>,
}

impl Taylor {
    /// A constant series.
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; len_for(order)];
        c[0] = value;
        Self { order, c }
    }

    /// The coordinate function `var` expanded at `value`.
    pub fn variable(value: f64, var: usize, order: usize) -> Self {
        let mut s = Self::constant(value, order);
        if order >= 1 {
            s.c[1 + var] = 1.0;
        }
        s
    }

    /// First-order series from a value and its gradient.
    pub fn first_order(value: f64, grad: [f64; NVARS]) -> Self {
        let mut s = Self::constant(value, 1);
        s.c[1..].copy_from_slice(&grad);
        s
    }

    /// The four coordinate seeds at `point`.
    pub fn seeds(point: [f64; NVARS], order: usize) -> [Taylor; NVARS] {
        std::array::from_fn(|v| Self::variable(point[v], v, order))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coeff(&self, exps: [u8; NVARS]) -> f64 {
        let t = tables();
        let d: usize = exps.iter().map(|e| *e as usize).sum();
        if d > self.order {
            return 0.0;
        }
        t.exps[..self.c.len()]
            .iter()
            .position(|e| *e == exps)
            .map(|i| self.c[i])
            .unwrap_or(0.0)
    }

    /// Partial derivative of the expanded function at the base point for
    /// the multi-index `exps`.
    pub fn derivative(&self, exps: [u8; NVARS]) -> f64 {
        let fact: f64 = exps
            .iter()
            .map(|&e| (1..=e as u32).map(f64::from).product::<f64>())
            .product();
        self.coeff(exps) * fact
    }

    /// First partial with respect to `var` at the base point.
    pub fn d1(&self, var: usize) -> f64 {
        if self.order == 0 {
            return 0.0;
        }
        self.c[1 + var]
    }

    /// Second partial with respect to `a` and `b` at the base point.
    pub fn d2(&self, a: usize, b: usize) -> f64 {
        let mut e = [0u8; NVARS];
        e[a] += 1;
        e[b] += 1;
        self.derivative(e)
    }

    /// The series of the partial derivative with respect to `var`, one
    /// order lower.
    pub fn deriv(&self, var: usize) -> Taylor {
        assert!(self.order >= 1, "cannot differentiate an order-0 series");
        let t = tables();
        let order = self.order - 1;
        let mut out = vec![0.0; len_for(order)];
        for (i, &ci) in self.c.iter().enumerate() {
            let j = t.down[var][i];
            if j != NONE {
                out[j as usize] += ci * f64::from(t.exps[i][var]);
            }
        }
        Taylor { order, c: out }
    }

    /// Drop all terms above `order`.
    pub fn truncate(&self, order: usize) -> Taylor {
        let order = order.min(self.order);
        Taylor {
            order,
            c: self.c[..len_for(order)].to_vec(),
        }
    }

    /// Rebuild a series of order `grad_u.order() + 1` depending only on
    /// `(u, h)` from its value and the series of its two partials. The
    /// partials must be compatible (mixed derivatives agree); the `u`-partial
    /// supplies every monomial containing `u`, the `h`-partial the pure
    /// `h` powers.
    pub fn from_uh_gradient(value: f64, grad_u: &Taylor, grad_h: &Taylor) -> Taylor {
        let t = tables();
        let order = grad_u.order.min(grad_h.order) + 1;
        let mut out = vec![0.0; len_for(order)];
        out[0] = value;
        for (i, e) in t.exps[..out.len()].iter().enumerate().skip(1) {
            if e[T] != 0 || e[X] != 0 {
                continue;
            }
            if e[U] > 0 {
                let mut f = *e;
                f[U] -= 1;
                out[i] = grad_u.coeff(f) / f64::from(e[U]);
            } else {
                let mut f = *e;
                f[H] -= 1;
                out[i] = grad_h.coeff(f) / f64::from(e[H]);
            }
        }
        Taylor { order, c: out }
    }

    /// Evaluate the polynomial at displacement `d` from the base point.
    pub fn eval_at(&self, d: [f64; NVARS]) -> f64 {
        let t = tables();
        self.c
            .iter()
            .zip(&t.exps)
            .map(|(c, e)| {
                let mut m = *c;
                for v in 0..NVARS {
                    for _ in 0..e[v] {
                        m *= d[v];
                    }
                }
                m
            })
            .sum()
    }

    fn mul_series(&self, other: &Taylor) -> Taylor {
        let t = tables();
        let order = self.order.min(other.order);
        let n = len_for(order);
        let stride = t.exps.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let a = self.c[i];
            if a == 0.0 {
                continue;
            }
            let lim = t.len[order - t.degree[i]];
            let row = &t.product[i * stride..i * stride + lim];
            for (j, &k) in row.iter().enumerate() {
                out[k as usize] += a * other.c[j];
            }
        }
        Taylor { order, c: out }
    }

    /// Compose with a univariate function given its Taylor coefficients
    /// `a_k = f^(k)(v)/k!` at the base value `v = self.value()`.
    pub fn compose(&self, coeffs: &[f64]) -> Taylor {
        let order = self.order;
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let mut out = Taylor::constant(coeffs[0], order);
        let mut power = Taylor::constant(1.0, order);
        for a in coeffs.iter().take(order + 1).skip(1) {
            power = power.mul_series(&delta);
            if *a != 0.0 {
                out.axpy(*a, &power);
            }
        }
        out
    }

    fn axpy(&mut self, a: f64, other: &Taylor) {
        for (x, y) in self.c.iter_mut().zip(&other.c) {
            *x += a * y;
        }
    }

    pub fn scale(&self, a: f64) -> Taylor {
        Taylor {
            order: self.order,
            c: self.c.iter().map(|c| c * a).collect(),
        }
    }

    pub fn recip(&self) -> Taylor {
        let v = self.value();
        let mut a = Vec::with_capacity(self.order + 1);
        let mut term = 1.0 / v;
        for _ in 0..=self.order {
            a.push(term);
            term *= -1.0 / v;
        }
        self.compose(&a)
    }

    /// `self^r` for real `r`; the base value must be positive unless `r` is
    /// a non-negative integer.
    pub fn powf(&self, r: f64) -> Taylor {
        let v = self.value();
        let mut a = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            a.push(binom * v.powf(r - k as f64));
            binom *= (r - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&a)
    }

    pub fn powi(&self, n: i32) -> Taylor {
        if n >= 0 {
            let mut out = Taylor::constant(1.0, self.order);
            for _ in 0..n {
                out = out.mul_series(self);
            }
            out
        } else {
            self.powi(-n).recip()
        }
    }

    pub fn sqrt(&self) -> Taylor {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Taylor {
        let e = self.value().exp();
        let mut a = Vec::with_capacity(self.order + 1);
        let mut fact = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                fact *= k as f64;
            }
            a.push(e / fact);
        }
        self.compose(&a)
    }

    pub fn ln(&self) -> Taylor {
        let v = self.value();
        let mut a = vec![v.ln()];
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            a.push(sign / (k as f64 * v.powi(k as i32)));
        }
        self.compose(&a)
    }

    pub fn sin(&self) -> Taylor {
        let (s, c) = self.value().sin_cos();
        self.compose(&trig_coeffs(s, c, self.order))
    }

    pub fn cos(&self) -> Taylor {
        let (s, c) = self.value().sin_cos();
        // cos(v + d) = sin(v + pi/2 + d)
        self.compose(&trig_coeffs(c, -s, self.order))
    }
}

/// Taylor coefficients of `sin` at a point where `sin = s`, `cos = c`.
fn trig_coeffs(s: f64, c: f64, order: usize) -> Vec<f64> {
    let cycle = [s, c, -s, -c];
    let mut fact = 1.0;
    (0..=order)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            cycle[k % 4] / fact
        })
        .collect()
}

impl Add for &Taylor {
    type Output = Taylor;
    fn add(self, rhs: &Taylor) -> Taylor {
        let order = self.order.min(rhs.order);
        let n = len_for(order);
        Taylor {
            order,
            c: (0..n).map(|i| self.c[i] + rhs.c[i]).collect(),
        }
    }
}

impl Sub for &Taylor {
    type Output = Taylor;
    fn sub(self, rhs: &Taylor) -> Taylor {
        let order = self.order.min(rhs.order);
        let n = len_for(order);
        Taylor {
            order,
            c: (0..n).map(|i| self.c[i] - rhs.c[i]).collect(),
        }
    }
}

impl Mul for &Taylor {
    type Output = Taylor;
    fn mul(self, rhs: &Taylor) -> Taylor {
        self.mul_series(rhs)
    }
}

impl Div for &Taylor {
    type Output = Taylor;
    fn div(self, rhs: &Taylor) -> Taylor {
        self.mul_series(&rhs.recip())
    }
}

impl Neg for &Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        self.scale(-1.0)
    }
}

impl Neg for Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        self.scale(-1.0)
    }
}

impl AddAssign<&Taylor> for Taylor {
    fn add_assign(&mut self, rhs: &Taylor) {
        if rhs.order < self.order {
            *self = self.truncate(rhs.order);
        }
        for (x, y) in self.c.iter_mut().zip(&rhs.c) {
            *x += y;
        }
    }
}

impl Add<f64> for &Taylor {
    type Output = Taylor;
    fn add(self, rhs: f64) -> Taylor {
        let mut out = self.clone();
        out.c[0] += rhs;
        out
    }
}

impl Sub<f64> for &Taylor {
    type Output = Taylor;
    fn sub(self, rhs: f64) -> Taylor {
        self + (-rhs)
    }
}

impl Mul<f64> for &Taylor {
    type Output = Taylor;
    fn mul(self, rhs: f64) -> Taylor {
        self.scale(rhs)
    }
}

impl Div<f64> for &Taylor {
    type Output = Taylor;
    fn div(self, rhs: f64) -> Taylor {
        self.scale(1.0 / rhs)
    }
}

impl Add<&Taylor> for f64 {
    type Output = Taylor;
    fn add(self, rhs: &Taylor) -> Taylor {
        rhs + self
    }
}

impl Sub<&Taylor> for f64 {
    type Output = Taylor;
    fn sub(self, rhs: &Taylor) -> Taylor {
        &(-rhs) + self
    }
}

impl Mul<&Taylor> for f64 {
    type Output = Taylor;
    fn mul(self, rhs: &Taylor) -> Taylor {
        rhs.scale(self)
    }
}

impl Div<&Taylor> for f64 {
    type Output = Taylor;
    fn div(self, rhs: &Taylor) -> Taylor {
        rhs.recip().scale(self)
    }
}

// Owned-operand forwarding so expressions chain without explicit borrows.
macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Taylor> for Taylor {
            type Output = Taylor;
            fn $m(self, rhs: Taylor) -> Taylor { (&self).$m(&rhs) }
        }
        impl $tr<&Taylor> for Taylor {
            type Output = Taylor;
            fn $m(self, rhs: &Taylor) -> Taylor { (&self).$m(rhs) }
        }
        impl $tr<Taylor> for &Taylor {
            type Output = Taylor;
            fn $m(self, rhs: Taylor) -> Taylor { self.$m(&rhs) }
        }
        impl $tr<f64> for Taylor {
            type Output = Taylor;
            fn $m(self, rhs: f64) -> Taylor { (&self).$m(rhs) }
        }
        impl $tr<Taylor> for f64 {
            type Output = Taylor;
            fn $m(self, rhs: Taylor) -> Taylor { self.$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn table_sizes_are_binomial() {
        // C(n + 4, 4)
        assert_eq!(len_for(0), 1);
        assert_eq!(len_for(1), 5);
        assert_eq!(len_for(2), 15);
        assert_eq!(len_for(4), 70);
        assert_eq!(len_for(6), 210);
    }

    #[test]
    fn product_rule_and_chain_rule() {
        let [t, x, u, h] = Taylor::seeds([0.7, -0.3, 0.4, 1.3], 3);
        let f = &(&u * &u) * &h.ln() + (&t * &x).sin();
        // f_u = 2 u ln h, f_h = u^2 / h, f_tx = cos(tx) - tx sin(tx)
        assert!(close(f.d1(U), 2.0 * 0.4 * 1.3f64.ln(), 1e-14));
        assert!(close(f.d1(H), 0.16 / 1.3, 1e-14));
        let tx: f64 = 0.7 * -0.3;
        assert!(close(f.d2(T, X), tx.cos() - tx * tx.sin(), 1e-14));
        assert!(close(f.d2(H, H), -0.16 / (1.3 * 1.3), 1e-14));
        let e = [0u8, 0, 2, 1];
        // d^3/du^2 dh of u^2 ln h = 2/h
        assert!(close(f.derivative(e), 2.0 / 1.3, 1e-13));
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let h = Taylor::variable(1.7, H, 4);
        let p = h.powf(-0.75);
        // fourth derivative of h^-3/4
        let r = -0.75f64;
        let d4 = r * (r - 1.0) * (r - 2.0) * (r - 3.0) * 1.7f64.powf(r - 4.0);
        assert!(close(p.derivative([0, 0, 0, 4]), d4, 1e-13));
        let q = &h.exp() * &(-&h).exp();
        assert!(close(q.value(), 1.0, 1e-15));
        assert!(q.coefficients()[1..].iter().all(|c| c.abs() < 1e-14));
        let s = &h.sin() * &h.sin() + &h.cos() * &h.cos();
        assert!(s.coefficients()[1..].iter().all(|c| c.abs() < 1e-14));
        let inv = &h / &h;
        assert!(close(inv.value(), 1.0, 1e-15));
    }

    #[test]
    fn gradient_reconstruction_inverts_differentiation() {
        let [_, _, u, h] = Taylor::seeds([0.0, 0.0, 0.3, 0.9], 4);
        let g = &(&u * &u) / &h + h.ln();
        let rebuilt = Taylor::from_uh_gradient(g.value(), &g.deriv(U), &g.deriv(H));
        for (a, b) in rebuilt.coefficients().iter().zip(g.coefficients()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn eval_at_reproduces_polynomials_exactly() {
        let [t, x, _, _] = Taylor::seeds([1.0, 2.0, 0.0, 1.0], 3);
        let p = &(&t * &t) * &x;
        let v = p.eval_at([0.5, -0.25, 0.0, 0.0]);
        assert!(close(v, 1.5 * 1.5 * 1.75, 1e-15));
    }
}
