use core::ops::Mul;

#[allow(unused_imports)]
use num_traits::Float;

use super::Mat3;
use crate::error::{Error, Result};

/// A projective transform normalized to unit determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Homography {
    m: Mat3,
}

impl Homography {
    pub const IDENTITY: Homography = Homography { m: Mat3::IDENTITY };

    /// Scales `m` so that its determinant is exactly representable as 1 (up
    /// to rounding).
    pub fn new(m: Mat3) -> Result<Self> {
        let det = m.det();
        let scale = m.max_abs();
        if !det.is_finite() || scale == 0.0 || det.abs() <= 1e-14 * scale * scale * scale {
            return Err(Error::DegenerateConfiguration);
        }
        let m = m.scale(1.0 / det.cbrt());
        Ok(Homography { m })
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Homography {
            m: Mat3::translation(tx, ty),
        }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn inverse(&self) -> Homography {
        // det = 1 so the adjugate never fails on a constructed homography
        let inv = self.m.inverse().expect("unit-determinant matrix is invertible");
        Homography { m: inv }
    }

    pub fn apply(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        self.m.apply(x, y)
    }

    pub fn is_identity(&self) -> bool {
        self.m == Mat3::IDENTITY
    }

    /// Principal square root by the product form of the Denman–Beavers
    /// iteration.
    pub fn sqrt(&self) -> Result<Homography> {
        check_principal_branch(&self.m)?;
        Homography::new(sqrtm(&self.m)?)
    }

    /// Principal matrix logarithm of the unit-determinant matrix.
    pub fn log(&self) -> Result<Mat3> {
        check_principal_branch(&self.m)?;
        logm(&self.m)
    }
}

impl Mul for Homography {
    type Output = Homography;

    fn mul(self, rhs: Homography) -> Homography {
        let m = self.m * rhs.m;
        // product of unit-determinant matrices; renormalize to absorb rounding
        Homography::new(m).unwrap_or(Homography { m })
    }
}

/// `h^p = exp(p · log h)` on the principal branch.
///
/// `p = 0` and `p = 1` return the identity and `h` exactly.
pub fn fractional_power(h: &Homography, p: f64) -> Result<Homography> {
    if p == 0.0 {
        return Ok(Homography::IDENTITY);
    }
    if p == 1.0 {
        return Ok(*h);
    }
    if h.is_identity() {
        return Ok(Homography::IDENTITY);
    }
    let log = h.log()?;
    let out = expm(&log.scale(p));
    if !out.is_finite() {
        return Err(Error::BranchFailure);
    }
    Homography::new(out)
}

/// Fails when `m` has a real eigenvalue on the closed negative real axis.
///
/// The characteristic cubic `λ³ - tλ² + cλ - d` is negative at 0 for `d > 0`
/// and tends to `-∞` on the left, so a non-positive root exists exactly when
/// its local maximum lies left of 0 and reaches 0.
pub fn check_principal_branch(m: &Mat3) -> Result<()> {
    let d = m.det();
    if d <= 0.0 || !d.is_finite() {
        return Err(Error::BranchFailure);
    }
    let t = m.trace();
    let a = &m.0;
    let c = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let disc = t * t - 3.0 * c;
    if disc < 0.0 {
        return Ok(());
    }
    let lmax = (t - disc.sqrt()) / 3.0;
    if lmax >= 0.0 {
        return Ok(());
    }
    let p = lmax * lmax * lmax - t * lmax * lmax + c * lmax - d;
    let tol = 1e-10 * (1.0 + lmax.abs().powi(3) + t.abs() * lmax * lmax + c.abs() * lmax.abs() + d.abs());
    if p >= -tol {
        Err(Error::BranchFailure)
    } else {
        Ok(())
    }
}

fn sqrtm(a: &Mat3) -> Result<Mat3> {
    let mut y = *a;
    let mut m = *a;
    for _ in 0..100 {
        let m_inv = m.inverse().ok_or(Error::BranchFailure)?;
        y = (y * (Mat3::IDENTITY + m_inv)).scale(0.5);
        m = (Mat3::IDENTITY + (m + m_inv).scale(0.5)).scale(0.5);
        if !y.is_finite() {
            return Err(Error::BranchFailure);
        }
        if (m - Mat3::IDENTITY).norm1() < 1e-15 {
            return Ok(y);
        }
    }
    // Converged to rounding level without hitting the tolerance.
    if (m - Mat3::IDENTITY).norm1() < 1e-10 {
        Ok(y)
    } else {
        Err(Error::BranchFailure)
    }
}

/// Inverse scaling and squaring: square roots until near identity, then the
/// Gregory series `log X = 2 Σ Z^(2k+1) / (2k+1)` with `Z = (X-I)(X+I)^-1`.
fn logm(a: &Mat3) -> Result<Mat3> {
    let mut x = *a;
    let mut roots = 0u32;
    while (x - Mat3::IDENTITY).norm1() > 0.25 {
        x = sqrtm(&x)?;
        roots += 1;
        if roots > 64 {
            return Err(Error::BranchFailure);
        }
    }
    let denom = (x + Mat3::IDENTITY).inverse().ok_or(Error::BranchFailure)?;
    let z = (x - Mat3::IDENTITY) * denom;
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for k in 1..64 {
        term = term * z2;
        let add = term.scale(1.0 / (2 * k + 1) as f64);
        sum = sum + add;
        if add.norm1() <= 1e-18 * sum.norm1().max(1e-300) {
            break;
        }
    }
    Ok(sum.scale(2.0 * (1u64 << roots) as f64))
}

/// Scaling and squaring with a truncated Taylor series.
fn expm(l: &Mat3) -> Mat3 {
    let norm = l.norm1();
    let mut squarings = 0i32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as i32;
    }
    let a = l.scale(0.5f64.powi(squarings));
    let mut term = Mat3::IDENTITY;
    let mut sum = Mat3::IDENTITY;
    for k in 1..40 {
        term = (term * a).scale(1.0 / k as f64);
        sum = sum + term;
        if term.norm1() <= 1e-18 * sum.norm1() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}
