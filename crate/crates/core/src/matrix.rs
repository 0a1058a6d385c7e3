//! Dense complex matrices of dimension 2 or 4 and the spinor value types.
//!
//! Everything in this crate works with 2-component spinors (one spatial
//! dimension) or 4-component spinors (three spatial dimensions), so a single
//! fixed-capacity matrix type with a runtime dimension of 2 or 4 covers all
//! uses without pulling in a general linear-algebra dependency.

use num_complex::Complex64 as C64;

/// Inline storage for up to a 4x4 complex matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [C64; 16],
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix(dim={})", self.dim)?;
        for i in 0..self.dim {
            write!(f, "  [")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zero(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "matrix dimension must be 2 or 4");
        ComplexMatrix {
            dim,
            data: [C64::new(0.0, 0.0); 16],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build a 2x2 matrix from rows.
    pub fn from_rows_2(rows: [[C64; 2]; 2]) -> Self {
        let mut m = Self::zero(2);
        for (i, row) in rows.iter().enumerate() {
            for (j, &z) in row.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        m
    }

    /// Build a 4x4 matrix from rows.
    pub fn from_rows_4(rows: [[C64; 4]; 4]) -> Self {
        let mut m = Self::zero(4);
        for (i, row) in rows.iter().enumerate() {
            for (j, &z) in row.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        m
    }

    /// 4x4 matrix from 2x2 blocks: [[a, b], [c, d]].
    pub fn from_blocks(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix, d: &ComplexMatrix) -> Self {
        assert!(a.dim == 2 && b.dim == 2 && c.dim == 2 && d.dim == 2);
        let mut m = Self::zero(4);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = a[(i, j)];
                m[(i, j + 2)] = b[(i, j)];
                m[(i + 2, j)] = c[(i, j)];
                m[(i + 2, j + 2)] = d[(i, j)];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(j, i)].conj();
            }
        }
        m
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut m = *self;
        for v in m.data.iter_mut() {
            *v *= z;
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut m = *self;
        for (v, w) in m.data.iter_mut().zip(other.data.iter()) {
            *v += w;
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut m = *self;
        for (v, w) in m.data.iter_mut().zip(other.data.iter()) {
            *v -= w;
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut m = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for l in 0..n {
                    s += self[(i, l)] * other[(l, j)];
                }
                m[(i, j)] = s;
            }
        }
        m
    }

    /// {A, B} = AB + BA
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    /// [A, B] = AB - BA
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data[..self.dim * self.dim]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data[..self.dim * self.dim]
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// max-norm of A + A^*; zero iff the matrix is anti-Hermitian.
    pub fn hermitian_defect(&self) -> f64 {
        self.add(&self.adjoint()).max_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.data[..self.dim * self.dim]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn apply2(&self, v: &Spinor2) -> Spinor2 {
        assert_eq!(self.dim, 2);
        Spinor2([
            self[(0, 0)] * v.0[0] + self[(0, 1)] * v.0[1],
            self[(1, 0)] * v.0[0] + self[(1, 1)] * v.0[1],
        ])
    }

    pub fn apply4(&self, v: &Spinor4) -> Spinor4 {
        assert_eq!(self.dim, 4);
        let mut out = [C64::new(0.0, 0.0); 4];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..4 {
                *o += self[(i, j)] * v.0[j];
            }
        }
        Spinor4(out)
    }

    /// Matrix exponential exp(A).
    ///
    /// Anti-Hermitian input is diagonalized (exactness keeps the factor
    /// unitary to roundoff); anything else falls back to scaling and
    /// squaring on the Taylor series.
    pub fn expm(&self) -> Self {
        if self.hermitian_defect() < 1e-13 * (1.0 + self.max_norm()) {
            // A = iH with H Hermitian; exp(A) = V diag(e^{i mu_j}) V^*.
            let h = self.scale(C64::new(0.0, -1.0));
            let (eigvals, v) = hermitian_eigen(&h);
            let mut m = Self::zero(self.dim);
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let mut s = C64::new(0.0, 0.0);
                    for l in 0..self.dim {
                        let phase = C64::new(0.0, eigvals[l]).exp();
                        s += v[(i, l)] * phase * v[(j, l)].conj();
                    }
                    m[(i, j)] = s;
                }
            }
            m
        } else {
            expm_scaling_squaring(self)
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Scaling and squaring with a fixed-order Taylor kernel; adequate for the
/// 4x4 coefficient matrices that occur here.
fn expm_scaling_squaring(a: &ComplexMatrix) -> ComplexMatrix {
    let norm = a.max_norm() * a.dim as f64;
    let scale_pow = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let factor = 1.0 / f64::powi(2.0, scale_pow as i32);
    let scaled = a.scale(C64::new(factor, 0.0));

    // Taylor to order 16 on the scaled matrix (entry error far below 1e-16).
    let mut result = ComplexMatrix::identity(a.dim());
    let mut term = ComplexMatrix::identity(a.dim());
    for n in 1..=16 {
        term = term.mul(&scaled).scale(C64::new(1.0 / n as f64, 0.0));
        result = result.add(&term);
    }
    for _ in 0..scale_pow {
        result = result.mul(&result);
    }
    result
}

/// Cyclic-Jacobi eigendecomposition of a Hermitian matrix.
/// Returns (eigenvalues, unitary matrix of column eigenvectors).
pub fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.dim();
    let mut m = *a;
    let mut v = ComplexMatrix::identity(n);

    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-15 * (1.0 + m.max_norm()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() < 1e-300 {
                    continue;
                }
                // Unitary 2x2 rotation annihilating m[p][q].
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let abs_apq = apq.norm();
                let phase = apq / abs_apq;
                let tau = (aqq - app) / (2.0 * abs_apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Columns p,q of both m (two-sided) and v (one-sided).
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c - miq * phase.conj() * s;
                    m[(i, q)] = mip * phase * s + miq * c;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * phase.conj() * s;
                    v[(i, q)] = vip * phase * s + viq * c;
                }
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * c - mqj * phase * s;
                    m[(q, j)] = mpj * phase.conj() * s + mqj * c;
                }
            }
        }
    }
    let eig = (0..n).map(|i| m[(i, i)].re).collect();
    (eig, v)
}

/// Two-component complex spinor value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spinor2(pub [C64; 2]);

/// Four-component complex spinor value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spinor4(pub [C64; 4]);

impl Spinor2 {
    pub const ZERO: Spinor2 = Spinor2([C64::new(0.0, 0.0); 2]);

    /// <self|other> with the convention of conjugation in the first slot.
    pub fn dot(&self, other: &Spinor2) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, z: C64) -> Spinor2 {
        Spinor2([self.0[0] * z, self.0[1] * z])
    }

    pub fn add(&self, other: &Spinor2) -> Spinor2 {
        Spinor2([self.0[0] + other.0[0], self.0[1] + other.0[1]])
    }

    pub fn sub(&self, other: &Spinor2) -> Spinor2 {
        Spinor2([self.0[0] - other.0[0], self.0[1] - other.0[1]])
    }
}

impl Spinor4 {
    pub const ZERO: Spinor4 = Spinor4([C64::new(0.0, 0.0); 4]);

    pub fn dot(&self, other: &Spinor4) -> C64 {
        (0..4).map(|i| self.0[i].conj() * other.0[i]).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, z: C64) -> Spinor4 {
        let mut out = self.0;
        for v in out.iter_mut() {
            *v *= z;
        }
        Spinor4(out)
    }

    pub fn add(&self, other: &Spinor4) -> Spinor4 {
        let mut out = self.0;
        for (v, w) in out.iter_mut().zip(other.0.iter()) {
            *v += w;
        }
        Spinor4(out)
    }

    pub fn sub(&self, other: &Spinor4) -> Spinor4 {
        let mut out = self.0;
        for (v, w) in out.iter_mut().zip(other.0.iter()) {
            *v -= w;
        }
        Spinor4(out)
    }

    /// Stack two 2-spinors into (upper, lower).
    pub fn from_blocks(upper: &Spinor2, lower: &Spinor2) -> Spinor4 {
        Spinor4([upper.0[0], upper.0[1], lower.0[0], lower.0[1]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mul_and_adjoint() {
        let a = ComplexMatrix::from_rows_2([[c(1.0, 0.0), c(0.0, 1.0)], [c(2.0, 0.0), c(0.0, 0.0)]]);
        let b = a.mul(&ComplexMatrix::identity(2));
        assert_eq!(a, b);
        let adj = a.adjoint();
        assert_eq!(adj[(0, 1)], c(2.0, 0.0));
        assert_eq!(adj[(1, 0)], c(0.0, -1.0));
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = ComplexMatrix::zero(4);
        let e = z.expm();
        assert!(e.sub(&ComplexMatrix::identity(4)).max_norm() < 1e-15);
    }

    #[test]
    fn expm_diagonal_antihermitian() {
        // exp(i t sigma3) = diag(e^{it}, e^{-it})
        let t = 0.7_f64;
        let mut a = ComplexMatrix::zero(2);
        a[(0, 0)] = c(0.0, t);
        a[(1, 1)] = c(0.0, -t);
        let e = a.expm();
        assert!((e[(0, 0)] - C64::new(0.0, t).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - C64::new(0.0, -t).exp()).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn expm_antihermitian_is_unitary() {
        // A generic anti-Hermitian 4x4: i * (random Hermitian).
        let mut h = ComplexMatrix::zero(4);
        let vals = [
            (0, 0, 0.3, 0.0),
            (1, 1, -1.1, 0.0),
            (2, 2, 0.2, 0.0),
            (3, 3, 2.0, 0.0),
            (0, 1, 0.5, 0.7),
            (0, 2, -0.3, 0.1),
            (0, 3, 0.0, -0.9),
            (1, 2, 1.5, 0.0),
            (1, 3, 0.2, 0.4),
            (2, 3, -0.6, 0.3),
        ];
        for &(i, j, re, im) in &vals {
            h[(i, j)] = c(re, im);
            if i != j {
                h[(j, i)] = c(re, -im);
            }
        }
        let a = h.scale(c(0.0, 1.0));
        let e = a.expm();
        let gram = e.adjoint().mul(&e);
        assert!(
            gram.sub(&ComplexMatrix::identity(4)).max_norm() < 1e-13,
            "exp of anti-Hermitian must be unitary"
        );
    }

    #[test]
    fn expm_general_matches_series() {
        // Non-normal matrix: compare against a long Taylor sum.
        let mut a = ComplexMatrix::zero(2);
        a[(0, 0)] = c(0.1, 0.2);
        a[(0, 1)] = c(1.3, 0.0);
        a[(1, 1)] = c(-0.4, 0.1);
        let e = a.expm();
        let mut series = ComplexMatrix::identity(2);
        let mut term = ComplexMatrix::identity(2);
        for n in 1..40 {
            term = term.mul(&a).scale(c(1.0 / n as f64, 0.0));
            series = series.add(&term);
        }
        assert!(e.sub(&series).max_norm() < 1e-13);
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let mut h = ComplexMatrix::zero(4);
        h[(0, 0)] = c(1.0, 0.0);
        h[(1, 1)] = c(-2.0, 0.0);
        h[(2, 2)] = c(0.5, 0.0);
        h[(3, 3)] = c(3.0, 0.0);
        h[(0, 2)] = c(0.3, 0.8);
        h[(2, 0)] = c(0.3, -0.8);
        h[(1, 3)] = c(-0.2, 0.1);
        h[(3, 1)] = c(-0.2, -0.1);
        let (eig, v) = hermitian_eigen(&h);
        // V diag(eig) V^* == h
        let mut rec = ComplexMatrix::zero(4);
        for i in 0..4 {
            for j in 0..4 {
                let mut s = c(0.0, 0.0);
                for l in 0..4 {
                    s += v[(i, l)] * c(eig[l], 0.0) * v[(j, l)].conj();
                }
                rec[(i, j)] = s;
            }
        }
        assert!(rec.sub(&h).max_norm() < 1e-12);
        let gram = v.adjoint().mul(&v);
        assert!(gram.sub(&ComplexMatrix::identity(4)).max_norm() < 1e-12);
    }
}
