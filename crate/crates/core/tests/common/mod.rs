//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls into the library's algorithms; only its value types are used.

#![allow(dead_code)]

use badlatt::arith::{int, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Determinant by permutation expansion with exact rationals.
pub fn det_permutations(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Rational::zero();
    permute(&mut perm, 0, &mut |p| {
        let mut sign = 1i64;
        for i in 0..n {
            for j in i + 1..n {
                if p[i] > p[j] {
                    sign = -sign;
                }
            }
        }
        let prod = (0..n).fold(int(sign), |acc, i| acc * &m[i][p[i]]);
        total += prod;
    });
    total
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Coordinates of `v_1 ^ ... ^ v_r` as maximal minors, in lexicographic subset order.
pub fn wedge_minors(vs: &[Vec<Rational>]) -> Vec<Rational> {
    let dim = vs[0].len();
    subsets(dim, vs.len())
        .into_iter()
        .map(|cols| {
            let m: Vec<Vec<Rational>> = vs.iter().map(|v| cols.iter().map(|&c| v[c].clone()).collect()).collect();
            det_permutations(&m)
        })
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[Rational]) -> Rational {
    dot(a, a)
}

pub fn to_rationals(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

pub fn to_bigints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn random_int_vec(rng: &mut ChaCha8Rng, dim: usize, bound: i64) -> Vec<i64> {
    (0..dim).map(|_| rng.gen_range(-bound..=bound)).collect()
}

pub fn random_rational(rng: &mut ChaCha8Rng, bound: i64, den: i64) -> Rational {
    let d = rng.gen_range(1..=den);
    Rational::new(rng.gen_range(-bound * d..=bound * d).into(), d.into())
}

/// Columns of a random unimodular integer matrix built from elementary operations.
pub fn unimodular_columns(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<i64>> {
    let mut cols: Vec<Vec<i64>> = (0..dim).map(|j| (0..dim).map(|i| i64::from(i == j)).collect()).collect();
    for _ in 0..3 * dim {
        let (i, j) = (rng.gen_range(0..dim), rng.gen_range(0..dim));
        if i == j {
            cols.swap(0, i);
            continue;
        }
        let k = rng.gen_range(-2..=2);
        let src = cols[j].clone();
        for (a, b) in cols[i].iter_mut().zip(src) {
            *a += k * b;
        }
    }
    cols
}

/// Greatest common divisor of all maximal minors: 1 exactly for primitive collections.
pub fn minor_gcd(vs: &[Vec<i64>]) -> BigInt {
    let rs: Vec<Vec<Rational>> = vs.iter().map(|v| to_rationals(v)).collect();
    wedge_minors(&rs)
        .into_iter()
        .fold(BigInt::zero(), |g, m| num_integer::Integer::gcd(&g, &m.to_integer().abs()))
}

/// First minimum of `diag(e^t, e^-t) [[1, x], [0, 1]] Z^2` by Lagrange-Gauss reduction in floating point.
pub fn lambda1_line(t: f64, x: f64) -> f64 {
    let (s, u) = (t.exp(), (-t).exp());
    let mut b1 = (s, 0.0);
    let mut b2 = (s * x, u);
    let n2 = |v: (f64, f64)| v.0 * v.0 + v.1 * v.1;
    loop {
        if n2(b2) < n2(b1) {
            std::mem::swap(&mut b1, &mut b2);
        }
        let mu = ((b1.0 * b2.0 + b1.1 * b2.1) / n2(b1)).round();
        if mu == 0.0 {
            break;
        }
        b2 = (b2.0 - mu * b1.0, b2.1 - mu * b1.1);
        if n2(b2) >= n2(b1) {
            break;
        }
    }
    n2(b1).min(n2(b2)).sqrt()
}

/// `min_{lo <= q <= hi} q |q x - p|` by direct search in floating point.
pub fn brute_min_q_dist(x: f64, lo: u64, hi: u64) -> (f64, u64) {
    (lo..=hi)
        .map(|q| {
            let y = q as f64 * x;
            (q as f64 * (y - y.round()).abs(), q)
        })
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
}

/// Golden-ratio values `F_k |F_k phi - F_(k+1)|` along the convergent denominators up to `q_max`.
///
/// Uses `F_k phi - F_(k+1) = (-1)^(k+1) phi^-k`, so no cancellation occurs.
pub fn golden_convergent_values(q_max: u64) -> Vec<(u64, f64)> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let (mut a, mut b) = (1u64, 1u64);
    let mut k = 1i32;
    let mut out = Vec::new();
    while a <= q_max {
        out.push((a, a as f64 * phi.powi(-k)));
        (a, b) = (b, a + b);
        k += 1;
    }
    out
}

/// Middle-third mass of `[0, x]` for triadic `x = m / 3^depth`, by counting depth-`depth` cylinders.
pub fn cantor_cdf_by_counting(m: u64, depth: u32) -> Rational {
    let mut count = 0u64;
    for idx in 0..m {
        let mut v = idx;
        let allowed = (0..depth).all(|_| {
            let ok = v % 3 != 1;
            v /= 3;
            ok
        });
        count += u64::from(allowed);
    }
    Rational::new(count.into(), BigInt::from(2u64).pow(depth))
}
