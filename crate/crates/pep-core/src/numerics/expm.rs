//! Matrix exponential by scaling-and-squaring with a [13/13] Pade
//! approximant.  Needed only for building squeezed states, where the
//! generator is dense and small.

use super::lu::lu_decompose;
use super::matrix::{C64, ComplexMatrix};
use crate::error::Result;

const PADE13: [f64; 14] = [
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
// Keeps |A/2^s| below the [13/13] accuracy radius.
const THETA13: f64 = 5.371920351148152;

pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_square_finite()?;
    let n = a.rows();
    let norm = a.norm_one();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.scale(C64::new(0.5f64.powi(s), 0.0));

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let ident = ComplexMatrix::identity(n);

    let b = &PADE13;
    let u_inner = {
        let t = &(&a6.scale(b[13].into()) + &a4.scale(b[11].into())) + &a2.scale(b[9].into());
        let hi = &a6 * &t;
        let lo = &(&a6.scale(b[7].into()) + &a4.scale(b[5].into()))
            + &(&a2.scale(b[3].into()) + &ident.scale(b[1].into()));
        &hi + &lo
    };
    let u = &a * &u_inner;
    let v = {
        let t = &(&a6.scale(b[12].into()) + &a4.scale(b[10].into())) + &a2.scale(b[8].into());
        let hi = &a6 * &t;
        let lo = &(&a6.scale(b[6].into()) + &a4.scale(b[4].into()))
            + &(&a2.scale(b[2].into()) + &ident.scale(b[0].into()));
        &hi + &lo
    };

    // solve (V - U) X = (V + U)
    let lhs = &v - &u;
    let rhs = &v + &u;
    let lu = lu_decompose(&lhs)?;
    let mut x = ComplexMatrix::zeros(n, n);
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        for (i, c) in col.iter_mut().enumerate() {
            *c = rhs[(i, j)];
        }
        let sol = lu.solve(&col);
        for (i, v) in sol.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    for _ in 0..s {
        x = &x * &x;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exp_of_diagonal() {
        let a = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(0.0, std::f64::consts::PI), c(-2.0, 0.5)]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - c(1f64.exp(), 0.0)).norm() < 1e-13);
        assert!((e[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-13);
        assert!((e[(2, 2)] - C64::new(-2.0, 0.5).exp()).norm() < 1e-13);
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn exp_of_pauli_rotation() {
        // exp(i phi sigma_x) = cos(phi) I + i sin(phi) sigma_x
        let phi = 0.7;
        let a = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(0.0, phi)],
            vec![c(0.0, phi), c(0.0, 0.0)],
        ]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - c(phi.cos(), 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - c(0.0, phi.sin())).norm() < 1e-14);
    }

    #[test]
    fn scaling_branch_large_norm() {
        // exp of 40*skew matrix still unitary-ish
        let a = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(40.0, 0.0)],
            vec![c(-40.0, 0.0), c(0.0, 0.0)],
        ]);
        let e = expm(&a).unwrap();
        // rotation by 40 rad
        assert!((e[(0, 0)].re - 40f64.cos()).abs() < 1e-11);
        assert!((e[(0, 1)].re - 40f64.sin()).abs() < 1e-11);
    }
}
