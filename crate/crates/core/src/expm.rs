//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (degrees 3, 5, 7, 9, 13).

use nalgebra::DMatrix;

use crate::scalar::Scalar;

/// Above this 1-norm of the exponent the relative-accuracy contract of
/// `1e-12` is no longer claimed.
pub const ACCURATE_NORM_LIMIT: f64 = 100.0;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Result of an exponential evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Exponential<S: Scalar> {
    pub matrix: DMatrix<S>,
    /// Set when the scaled exponent exceeded [`ACCURATE_NORM_LIMIT`].
    pub reduced_accuracy: bool,
    pub squarings: u32,
}

pub(crate) fn one_norm<S: Scalar>(a: &DMatrix<S>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled<S: Scalar>(a: &DMatrix<S>, c: f64) -> DMatrix<S> {
    a * S::from_real(c)
}

fn pade_low<S: Scalar>(a: &DMatrix<S>, b: &[f64]) -> (DMatrix<S>, DMatrix<S>) {
    let n = a.nrows();
    let id = DMatrix::<S>::identity(n, n);
    let a2 = a * a;
    let mut u_inner = scaled(&id, b[1]);
    let mut v = scaled(&id, b[0]);
    let mut power = id.clone();
    let mut k = 1;
    while 2 * k < b.len() {
        power = &power * &a2;
        u_inner += scaled(&power, b[2 * k + 1]);
        v += scaled(&power, b[2 * k]);
        k += 1;
    }
    (a * u_inner, v)
}

fn pade13<S: Scalar>(a: &DMatrix<S>) -> (DMatrix<S>, DMatrix<S>) {
    let b = &B13;
    let n = a.nrows();
    let id = DMatrix::<S>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u_inner = &a6 * u_hi
        + scaled(&a6, b[7])
        + scaled(&a4, b[5])
        + scaled(&a2, b[3])
        + scaled(&id, b[1]);
    let u = a * u_inner;
    let v_hi = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = &a6 * v_hi
        + scaled(&a6, b[6])
        + scaled(&a4, b[4])
        + scaled(&a2, b[2])
        + scaled(&id, b[0]);
    (u, v)
}

fn solve_pade<S: Scalar>(u: DMatrix<S>, v: DMatrix<S>) -> DMatrix<S> {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is invertible within the scaling thresholds")
}

/// `exp(a)` for a square matrix.
pub fn expm_matrix<S: Scalar>(a: &DMatrix<S>) -> Exponential<S> {
    assert_eq!(a.nrows(), a.ncols(), "expm of a non-square matrix");
    let norm = one_norm(a);
    let reduced_accuracy = norm > ACCURATE_NORM_LIMIT;
    if a.nrows() == 0 {
        return Exponential {
            matrix: a.clone(),
            reduced_accuracy,
            squarings: 0,
        };
    }
    for (deg, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match deg {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(a, coeffs);
            return Exponential {
                matrix: solve_pade(u, v),
                reduced_accuracy,
                squarings: 0,
            };
        }
    }
    let squarings = if norm > THETA_13 {
        libm::ceil(libm::log2(norm / THETA_13)).max(0.0) as u32
    } else {
        0
    };
    let scaled_a = scaled(a, libm::ldexp(1.0, -(squarings as i32)));
    let (u, v) = pade13(&scaled_a);
    let mut r = solve_pade(u, v);
    for _ in 0..squarings {
        r = &r * &r;
    }
    Exponential {
        matrix: r,
        reduced_accuracy,
        squarings,
    }
}

/// `exp(ρ·a)`.
pub fn expm_scaled<S: Scalar>(a: &DMatrix<S>, rho: f64) -> Exponential<S> {
    expm_matrix(&scaled(a, rho))
}
