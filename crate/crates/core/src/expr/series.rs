//! Truncated power-series arithmetic. All slices have equal length `K+1`.

use num_complex::Complex;

use crate::scalar::{Cx, Real};

fn zero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

pub(super) fn mul<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> Vec<Cx<T>> {
    let n = a.len();
    (0..n)
        .map(|k| (0..=k).fold(zero(), |acc, j| acc + a[j] * b[k - j]))
        .collect()
}

/// `a / b`, requires `b[0] != 0`.
pub(super) fn div<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> Vec<Cx<T>> {
    let n = a.len();
    let mut q = vec![zero(); n];
    for k in 0..n {
        let s = (1..=k).fold(zero(), |acc, j| acc + b[j] * q[k - j]);
        q[k] = (a[k] - s) / b[0];
    }
    q
}

pub(super) fn powu<T: Real>(a: &[Cx<T>], mut n: u32) -> Vec<Cx<T>> {
    let mut result = vec![zero(); a.len()];
    result[0] = Complex::new(T::one(), T::zero());
    let mut base = a.to_vec();
    while n > 0 {
        if n & 1 == 1 {
            result = mul(&result, &base);
        }
        n >>= 1;
        if n > 0 {
            base = mul(&base, &base);
        }
    }
    result
}

/// `e_k = (1/k) Σ_{j=1..k} j a_j e_{k-j}`.
pub(super) fn exp<T: Real>(a: &[Cx<T>]) -> Vec<Cx<T>> {
    let n = a.len();
    let mut e = vec![zero(); n];
    e[0] = a[0].exp();
    for k in 1..n {
        let s = (1..=k).fold(zero(), |acc, j| {
            acc + a[j] * e[k - j] * T::from_usize_lossy(j)
        });
        e[k] = s / T::from_usize_lossy(k);
    }
    e
}

/// Coupled recurrences `s' = c a'`, `c' = -s a'`.
pub(super) fn sin_cos<T: Real>(a: &[Cx<T>]) -> (Vec<Cx<T>>, Vec<Cx<T>>) {
    let n = a.len();
    let mut s = vec![zero(); n];
    let mut c = vec![zero(); n];
    s[0] = a[0].sin();
    c[0] = a[0].cos();
    for k in 1..n {
        let (mut ss, mut cc) = (zero(), zero());
        for j in 1..=k {
            let w = a[j] * T::from_usize_lossy(j);
            ss = ss + w * c[k - j];
            cc = cc + w * s[k - j];
        }
        let kk = T::from_usize_lossy(k);
        s[k] = ss / kk;
        c[k] = -cc / kk;
    }
    (s, c)
}

/// Taylor coefficients `c_k = F^(k)(base)/k!` for `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    base: Cx<T>,
    coefficients: Vec<Cx<T>>,
}

impl<T: Real> Jet<T> {
    pub(crate) fn new(base: Cx<T>, coefficients: Vec<Cx<T>>) -> Self {
        debug_assert!(!coefficients.is_empty());
        Self { base, coefficients }
    }

    pub fn base(&self) -> Cx<T> {
        self.base
    }

    pub fn coefficients(&self) -> &[Cx<T>] {
        &self.coefficients
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficient(&self, k: usize) -> Option<Cx<T>> {
        self.coefficients.get(k).copied()
    }

    /// Evaluates the truncated polynomial at `base + h`.
    pub fn eval_offset(&self, h: Cx<T>) -> Cx<T> {
        self.coefficients
            .iter()
            .rev()
            .fold(zero(), |acc, c| acc * h + c)
    }

    /// Largest coefficient modulus over `c_1 … c_K`.
    pub fn max_modulus(&self) -> T {
        self.coefficients
            .iter()
            .skip(1)
            .map(|c| c.norm())
            .fold(T::zero(), T::max)
    }

    /// Degree-`k` homogeneous parts `(F₁^[k](x, y), F₂^[k](x, y))` of the
    /// real and imaginary components, expanded with the binomial theorem in
    /// real monomials `x^(k-j) y^j`.
    pub fn homogeneous_part(&self, k: usize, x: T, y: T) -> (T, T) {
        match self.coefficient(k) {
            Some(ck) => homogeneous_part(ck, k, x, y),
            None => (T::zero(), T::zero()),
        }
    }
}

/// `(Re(c·(x+iy)^k), Im(c·(x+iy)^k))` expanded with the binomial theorem in
/// real monomials `x^(k-j) y^j`.
pub fn homogeneous_part<T: Real>(ck: Cx<T>, k: usize, x: T, y: T) -> (T, T) {
    // (x + iy)^k = Σ binom(k,j) x^(k-j) (iy)^j, with i^j cycling 1, i, -1, -i
    let (mut re, mut im) = (T::zero(), T::zero());
    let mut binom = T::one();
    for j in 0..=k {
        let mono = binom * x.powi((k - j) as i32) * y.powi(j as i32);
        match j % 4 {
            0 => re = re + mono,
            1 => im = im + mono,
            2 => re = re - mono,
            _ => im = im - mono,
        }
        binom = binom * T::from_usize_lossy(k - j) / T::from_usize_lossy(j + 1);
    }
    (ck.re * re - ck.im * im, ck.re * im + ck.im * re)
}
