//! Matrix exponential by scaling and squaring with Padé approximants.
//!
//! Degree selection and the `theta_m` thresholds follow Higham's 2005
//! scheme: the lowest degree whose backward error bound covers the 1-norm
//! is used, and degree 13 with `s` squarings otherwise.

use nalgebra::SMatrix;
use num_complex::Complex64;

pub type CMatrix<const N: usize> = SMatrix<Complex64, N, N>;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
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

pub fn norm1<const N: usize>(a: &CMatrix<N>) -> f64 {
    (0..N)
        .map(|j| (0..N).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `exp(a)`.
pub fn expm<const N: usize>(a: &CMatrix<N>) -> CMatrix<N> {
    let n1 = norm1(a);
    if n1 == 0.0 {
        return CMatrix::<N>::identity();
    }
    for (m, theta) in THETA {
        if n1 <= theta {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, b);
        }
    }
    let s = ((n1 / THETA_13).log2().ceil()).max(0.0) as i32;
    let scaled = a * real(0.5f64.powi(s));
    let mut x = pade13(&scaled);
    for _ in 0..s {
        x = x * x;
    }
    x
}

fn solve_pade<const N: usize>(u: CMatrix<N>, v: CMatrix<N>) -> CMatrix<N> {
    solve(v - u, v + u)
}

/// `a^-1 b` by Gaussian elimination with partial pivoting.
fn solve<const N: usize>(mut a: CMatrix<N>, mut b: CMatrix<N>) -> CMatrix<N> {
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
            .expect("nonempty column");
        if piv != col {
            a.swap_rows(piv, col);
            b.swap_rows(piv, col);
        }
        let d = a[(col, col)];
        assert!(d.norm() > 0.0, "Pade denominator is singular");
        for r in (col + 1)..N {
            let f = a[(r, col)] / d;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for c in col..N {
                let v = a[(col, c)];
                a[(r, c)] -= f * v;
            }
            for c in 0..N {
                let v = b[(col, c)];
                b[(r, c)] -= f * v;
            }
        }
    }
    for col in (0..N).rev() {
        let d = a[(col, col)];
        for c in 0..N {
            b[(col, c)] /= d;
        }
        for r in 0..col {
            let f = a[(r, col)];
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..N {
                let v = b[(col, c)];
                b[(r, c)] -= f * v;
            }
        }
    }
    b
}

fn pade_low<const N: usize>(a: &CMatrix<N>, b: &[f64]) -> CMatrix<N> {
    let id = CMatrix::<N>::identity();
    let a2 = a * a;
    let mut u = id * real(b[1]);
    let mut v = id * real(b[0]);
    let mut pow = id;
    let m = b.len() - 1;
    for j in 1..=m / 2 {
        pow *= a2;
        u += pow * real(b[2 * j + 1]);
        v += pow * real(b[2 * j]);
    }
    solve_pade(a * u, v)
}

fn pade13<const N: usize>(a: &CMatrix<N>) -> CMatrix<N> {
    let b = &B13;
    let id = CMatrix::<N>::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let inner_u = a6 * real(b[13]) + a4 * real(b[11]) + a2 * real(b[9]);
    let u =
        a * (a6 * inner_u + a6 * real(b[7]) + a4 * real(b[5]) + a2 * real(b[3]) + id * real(b[1]));
    let inner_v = a6 * real(b[12]) + a4 * real(b[10]) + a2 * real(b[8]);
    let v = a6 * inner_v + a6 * real(b[6]) + a4 * real(b[4]) + a2 * real(b[2]) + id * real(b[0]);
    solve_pade(u, v)
}

/// `(exp(z), phi1(z), phi2(z))` for a 4x4 matrix `z`, with
/// `phi1(z) = z^-1 (e^z - I)` and `phi2(z) = z^-2 (e^z - I - z)` understood
/// as their entire power series, read off the exponential of the block
/// matrix `[[z, I, 0], [0, 0, I], [0, 0, 0]]`.
pub fn exp_phi12(z: &CMatrix<4>) -> (CMatrix<4>, CMatrix<4>, CMatrix<4>) {
    let mut big = CMatrix::<12>::zeros();
    big.fixed_view_mut::<4, 4>(0, 0).copy_from(z);
    for i in 0..4 {
        big[(i, 4 + i)] = real(1.0);
        big[(4 + i, 8 + i)] = real(1.0);
    }
    let e = expm(&big);
    (
        e.fixed_view::<4, 4>(0, 0).into_owned(),
        e.fixed_view::<4, 4>(0, 4).into_owned(),
        e.fixed_view::<4, 4>(0, 8).into_owned(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_exponential() {
        let d = CMatrix::<4>::from_diagonal(&nalgebra::Vector4::new(
            c(0.5, 0.0),
            c(-3.0, 1.0),
            c(20.0, 0.0),
            c(1e-6, -2.0),
        ));
        let e = expm(&d);
        for i in 0..4 {
            let expect = d[(i, i)].exp();
            assert!((e[(i, i)] - expect).norm() < 1e-13 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn defective_jordan_block() {
        // exp([[a, 1], [0, a]]) = e^a [[1, 1], [0, 1]]
        let a = -2.5;
        let m = CMatrix::<2>::new(c(a, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(a, 0.0));
        let e = expm(&m);
        let ea = a.exp();
        assert!((e[(0, 0)].re - ea).abs() < 1e-14);
        assert!((e[(0, 1)].re - ea).abs() < 1e-14);
        assert!(e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        let t = 7.3;
        let m = CMatrix::<2>::new(c(0.0, 0.0), c(-t, 0.0), c(t, 0.0), c(0.0, 0.0));
        let e = expm(&m);
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-13);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-13);
    }

    #[test]
    fn phi_functions_scalar_limit() {
        for z in [c(-1e-9, 0.0), c(-0.3, 0.2), c(-40.0, 0.0), c(0.0, 0.0)] {
            let m = CMatrix::<4>::identity() * z;
            let (e, p1, p2) = exp_phi12(&m);
            let (e_ref, p1_ref, p2_ref) = if z.norm() < 1e-6 {
                (z.exp(), real(1.0) + z / 2.0, real(0.5) + z / 6.0)
            } else {
                (z.exp(), (z.exp() - 1.0) / z, (z.exp() - 1.0 - z) / (z * z))
            };
            assert!((e[(0, 0)] - e_ref).norm() < 1e-14);
            assert!((p1[(1, 1)] - p1_ref).norm() < 1e-13);
            assert!((p2[(2, 2)] - p2_ref).norm() < 1e-13);
            assert!(p2[(0, 1)].norm() < 1e-15);
        }
    }
}
