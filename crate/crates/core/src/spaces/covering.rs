//! Deterministic direction sets for sampling unit spheres.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::scalar::Scalar;

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = 2u64;
    while out.len() < count {
        if out.iter().take_while(|p| *p * *p <= n).all(|p| n % p != 0) {
            out.push(n);
        }
        n += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    inv = r;
    inv
}

/// `count` standard-normal-like deviates built from Halton point `index`.
fn gaussian_coords(index: u64, count: usize, bases: &[u64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(count + 1);
    let mut k = 0;
    while out.len() < count {
        let u1 = radical_inverse(index, bases[k]).max(1e-300);
        let u2 = radical_inverse(index, bases[k + 1]);
        let r = libm::sqrt(-2.0 * libm::log(u1));
        out.push(r * libm::cos(2.0 * PI * u2));
        out.push(r * libm::sin(2.0 * PI * u2));
        k += 2;
    }
    out.truncate(count);
    out
}

/// `budget` unit vectors (Euclidean norm) in the real or complex
/// `dim`-space: coordinate vectors first, then low-discrepancy directions.
/// Real planes and complex lines use equally spaced angles instead.
pub fn sphere_directions<S: Scalar>(dim: usize, budget: usize) -> Vec<Vec<S>> {
    let budget = budget.max(1);
    if dim == 0 {
        return Vec::new();
    }
    if dim == 2 && !S::IS_COMPLEX {
        return (0..budget)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / budget as f64;
                vec![S::from_real(libm::cos(a)), S::from_real(libm::sin(a))]
            })
            .collect();
    }
    if dim == 1 {
        if !S::IS_COMPLEX {
            return vec![vec![S::one()], vec![-S::one()]];
        }
        return (0..budget)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / budget as f64;
                vec![S::from_parts(libm::cos(a), libm::sin(a))]
            })
            .collect();
    }
    let reals = if S::IS_COMPLEX { 2 * dim } else { dim };
    let bases = primes(reals + 1);
    let mut out: Vec<Vec<S>> = Vec::with_capacity(budget);
    for i in 0..dim.min(budget) {
        let mut e = vec![S::zero(); dim];
        e[i] = S::one();
        out.push(e);
    }
    let mut index = 1u64;
    while out.len() < budget {
        let g = gaussian_coords(index, reals, &bases);
        index += 1;
        let v: Vec<S> = if S::IS_COMPLEX {
            (0..dim).map(|i| S::from_parts(g[2 * i], g[2 * i + 1])).collect()
        } else {
            g.iter().map(|x| S::from_real(*x)).collect()
        };
        let n = libm::sqrt(v.iter().map(|z| z.modulus_squared()).sum::<f64>());
        if n < 1e-12 {
            continue;
        }
        out.push(v.into_iter().map(|z| z.unscale(n)).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn directions_are_unit_and_deterministic() {
        let a = sphere_directions::<f64>(4, 50);
        let b = sphere_directions::<f64>(4, 50);
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        for v in &a {
            let n: f64 = v.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        let c = sphere_directions::<Complex64>(3, 20);
        for v in &c {
            let n: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn plane_uses_equal_angles() {
        let a = sphere_directions::<f64>(2, 8);
        assert_eq!(a[0], vec![1.0, 0.0]);
        assert!((a[2][0]).abs() < 1e-15 && (a[2][1] - 1.0).abs() < 1e-15);
    }
}
