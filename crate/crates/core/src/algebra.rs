//! Pauli and Dirac matrices, the relativistic dispersion relation, and the
//! momentum-space eigenbases of the Dirac Hamiltonian in one and three
//! spatial dimensions.
//!
//! Conventions: the 4x4 matrices use the Dirac representation with
//! `beta = diag(I, -I)` and `alpha_j` holding `sigma_j` in the off-diagonal
//! blocks. The gamma matrices are `gamma_0 = beta`, `gamma_j = beta alpha_j`,
//! so `gamma_0 gamma_j = alpha_j`.

use crate::matrix::{ComplexMatrix, Spinor2, Spinor4};
use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Pauli matrix `sigma_j`, `j` in 1..=3.
pub fn pauli(j: usize) -> ComplexMatrix {
    match j {
        1 => ComplexMatrix::from_rows_2([[ZERO, ONE], [ONE, ZERO]]),
        2 => ComplexMatrix::from_rows_2([[ZERO, -I], [I, ZERO]]),
        3 => ComplexMatrix::from_rows_2([[ONE, ZERO], [ZERO, -ONE]]),
        _ => panic!("pauli index must be 1, 2, or 3"),
    }
}

/// The 4x4 Dirac matrices in the representation fixed by this crate.
pub struct DiracMatrices {
    pub beta: ComplexMatrix,
    /// alpha[0..3] are alpha_1, alpha_2, alpha_3.
    pub alpha: [ComplexMatrix; 3],
    /// gamma[0..4] are gamma_0 .. gamma_3.
    pub gamma: [ComplexMatrix; 4],
}

pub fn dirac_matrices() -> DiracMatrices {
    let id2 = ComplexMatrix::identity(2);
    let z2 = ComplexMatrix::zero(2);
    let beta = ComplexMatrix::from_blocks(&id2, &z2, &z2, &id2.scale(-ONE));
    let alpha = [
        ComplexMatrix::from_blocks(&z2, &pauli(1), &pauli(1), &z2),
        ComplexMatrix::from_blocks(&z2, &pauli(2), &pauli(2), &z2),
        ComplexMatrix::from_blocks(&z2, &pauli(3), &pauli(3), &z2),
    ];
    let gamma = [
        beta,
        beta.mul(&alpha[0]),
        beta.mul(&alpha[1]),
        beta.mul(&alpha[2]),
    ];
    DiracMatrices { beta, alpha, gamma }
}

/// Relativistic dispersion lambda(k) = sqrt(|k|^2 + m^2) for mass m >= 0.
#[derive(Clone, Copy, Debug)]
pub struct Dispersion {
    pub mass: f64,
}

impl Dispersion {
    pub fn new(mass: f64) -> Self {
        assert!(mass >= 0.0, "mass must be nonnegative");
        Dispersion { mass }
    }

    pub fn lambda_1d(&self, k: f64) -> f64 {
        (k * k + self.mass * self.mass).sqrt()
    }

    pub fn lambda_3d(&self, k: [f64; 3]) -> f64 {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        (k2 + self.mass * self.mass).sqrt()
    }
}

/// Orthonormal eigenpair of the 2x2 symbol `k sigma_1 + m sigma_3` at a
/// single momentum: `pos` has eigenvalue +lambda(k), `neg` has -lambda(k).
#[derive(Clone, Copy, Debug)]
pub struct EigenBasis1d {
    pub k: f64,
    pub lambda: f64,
    pub pos: Spinor2,
    pub neg: Spinor2,
}

/// Eigenbasis of the one-dimensional Hamiltonian symbol at momentum `k`.
///
/// At k = 0 the symbol is m sigma_3 and the basis degenerates to the
/// standard one; for m = 0 the square roots collapse to sgn(k) branches.
pub fn eigenbasis_1d(k: f64, disp: Dispersion) -> EigenBasis1d {
    let m = disp.mass;
    let lambda = disp.lambda_1d(k);
    if lambda == 0.0 {
        // k = 0, m = 0: symbol is the zero matrix, any basis works.
        return EigenBasis1d {
            k,
            lambda,
            pos: Spinor2([ONE, ZERO]),
            neg: Spinor2([ZERO, ONE]),
        };
    }
    let sgn = if k >= 0.0 { 1.0 } else { -1.0 };
    let up = (0.5 * (1.0 + m / lambda)).sqrt();
    let dn = sgn * (0.5 * (1.0 - m / lambda)).sqrt();
    EigenBasis1d {
        k,
        lambda,
        pos: Spinor2([C64::new(up, 0.0), C64::new(dn, 0.0)]),
        neg: Spinor2([C64::new(-dn, 0.0), C64::new(up, 0.0)]),
    }
}

/// Helicity eigenvectors of `(k . sigma)/|k|`: `plus` for +1, `minus` for -1.
///
/// The formulas degenerate on the positive k3 axis (the spherical chart is
/// singular there); that ray gets the standard basis, which is the actual
/// directional limit along k3 -> |k|.
pub fn helicity_spinors(k: [f64; 3]) -> (Spinor2, Spinor2) {
    let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    assert!(kn > 0.0, "helicity is undefined at k = 0");
    let denom2 = kn - k[2];
    if denom2 <= 1e-12 * kn {
        return (Spinor2([ONE, ZERO]), Spinor2([ZERO, ONE]));
    }
    let s = 1.0 / (2.0 * kn * denom2).sqrt();
    let plus = Spinor2([
        C64::new(k[0] * s, -k[1] * s),
        C64::new(denom2 * s, 0.0),
    ]);
    let minus = Spinor2([
        C64::new((k[2] - kn) * s, 0.0),
        C64::new(k[0] * s, k[1] * s),
    ]);
    (plus, minus)
}

/// Orthonormal eigenbasis of the 3+1 dimensional Hamiltonian symbol
/// `alpha . k + m beta` at momentum `k != 0`.
///
/// `pos` spans the +lambda(k) eigenspace, `neg` the -lambda(k) one; the
/// second index is helicity (0 -> +, 1 -> -).
#[derive(Clone, Copy, Debug)]
pub struct EigenBasis3d {
    pub k: [f64; 3],
    pub lambda: f64,
    pub pos: [Spinor4; 2],
    pub neg: [Spinor4; 2],
}

pub fn eigenbasis_3d(k: [f64; 3], disp: Dispersion) -> EigenBasis3d {
    let m = disp.mass;
    let lambda = disp.lambda_3d(k);
    assert!(lambda > 0.0, "eigenbasis is undefined at k = 0 with m = 0");
    let (h_plus, h_minus) = helicity_spinors(k);
    let a_plus = (0.5 * (1.0 + m / lambda)).sqrt();
    let a_minus = (0.5 * (1.0 - m / lambda)).sqrt();
    let build = |h: &Spinor2, upper: f64, lower: f64| {
        Spinor4::from_blocks(&h.scale(C64::new(upper, 0.0)), &h.scale(C64::new(lower, 0.0)))
    };
    EigenBasis3d {
        k,
        lambda,
        pos: [
            build(&h_plus, a_plus, a_minus),
            build(&h_minus, a_plus, -a_minus),
        ],
        neg: [
            build(&h_plus, -a_minus, a_plus),
            build(&h_minus, a_minus, a_plus),
        ],
    }
}

/// Limit of `eigenbasis_3d(k / eps)` as eps -> 0 along direction `k`: the
/// mass coefficients flatten to 1/sqrt(2) while the helicity content is
/// already scale invariant. This is the basis the concentration limit
/// selects at each direction on the sphere.
pub fn eigenbasis_3d_homogeneous(k: [f64; 3]) -> EigenBasis3d {
    let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    assert!(kn > 0.0, "direction must be nonzero");
    let (h_plus, h_minus) = helicity_spinors(k);
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let build = |h: &Spinor2, upper: f64, lower: f64| {
        Spinor4::from_blocks(&h.scale(C64::new(upper, 0.0)), &h.scale(C64::new(lower, 0.0)))
    };
    EigenBasis3d {
        k,
        lambda: kn,
        pos: [build(&h_plus, a, a), build(&h_minus, a, -a)],
        neg: [build(&h_plus, -a, a), build(&h_minus, a, a)],
    }
}

/// Symbol of the 1d Hamiltonian: k sigma_1 + m sigma_3.
pub fn hamiltonian_symbol_1d(k: f64, disp: Dispersion) -> ComplexMatrix {
    pauli(1)
        .scale(C64::new(k, 0.0))
        .add(&pauli(3).scale(C64::new(disp.mass, 0.0)))
}

/// Symbol of the 3d Hamiltonian: alpha . k + m beta.
pub fn hamiltonian_symbol_3d(k: [f64; 3], disp: Dispersion) -> ComplexMatrix {
    let d = dirac_matrices();
    let mut h = d.beta.scale(C64::new(disp.mass, 0.0));
    for j in 0..3 {
        h = h.add(&d.alpha[j].scale(C64::new(k[j], 0.0)));
    }
    h
}
