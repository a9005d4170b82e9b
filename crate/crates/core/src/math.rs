//! Complex vector type and small numeric helpers shared by every module.

use core::ops::{Add, Index, IndexMut, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::prelude::*;

/// Complex gain vector between one sector array and one user, or any other
/// length-M array-domain quantity (estimates, precoders, received pilots).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector(Vec<Complex64>);

impl ChannelVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn from_vec(v: Vec<Complex64>) -> Self {
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Hermitian inner product `selfᴴ · other`.
    pub fn inner(&self, other: &ChannelVector) -> Complex64 {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Plain bilinear product `selfᵀ · other`, as used for `hᵀw`.
    pub fn dot_t(&self, other: &ChannelVector) -> Complex64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn conj(&self) -> ChannelVector {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn scale(&self, s: Complex64) -> ChannelVector {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    pub fn scale_re(&self, s: f64) -> ChannelVector {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    /// `self += s · other`
    pub fn axpy(&mut self, s: Complex64, other: &ChannelVector) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += s * b;
        }
    }
}

impl Index<usize> for ChannelVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ChannelVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for &ChannelVector {
    type Output = ChannelVector;
    fn add(self, rhs: &ChannelVector) -> ChannelVector {
        ChannelVector(
            self.0
                .iter()
                .zip(rhs.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &ChannelVector {
    type Output = ChannelVector;
    fn sub(self, rhs: &ChannelVector) -> ChannelVector {
        ChannelVector(
            self.0
                .iter()
                .zip(rhs.0.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl FromIterator<Complex64> for ChannelVector {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Thermal noise power in mW over `bandwidth_hz` with a noise figure.
pub fn noise_power_mw(psd_dbm_hz: f64, bandwidth_hz: f64, nf_db: f64) -> f64 {
    db_to_lin(psd_dbm_hz + lin_to_db(bandwidth_hz) + nf_db)
}

/// Wraps an angle in degrees to (−180, 180].
pub fn wrap_deg(a: f64) -> f64 {
    let mut w = a % 360.0;
    if w <= -180.0 {
        w += 360.0;
    } else if w > 180.0 {
        w -= 360.0;
    }
    w
}

/// Wraps an angle in degrees to [0, 360).
pub fn wrap_deg_pos(a: f64) -> f64 {
    let w = a % 360.0;
    if w < 0.0 {
        // -1e-20 % 360 + 360 rounds to 360
        let w = w + 360.0;
        if w >= 360.0 {
            0.0
        } else {
            w
        }
    } else {
        w
    }
}

/// Angular distance used for peak separation and path matching:
/// max of the wrapped azimuth difference and the elevation difference.
pub fn angle_sep_deg(az1: f64, el1: f64, az2: f64, el2: f64) -> f64 {
    wrap_deg(az1 - az2).abs().max((el1 - el2).abs())
}

/// Circularly-symmetric complex Gaussian sample with `E|z|² = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Gaussian sample with mean and standard deviation.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, std: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + std * z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapping() {
        assert_eq!(wrap_deg(180.0), 180.0);
        assert_eq!(wrap_deg(-180.0), 180.0);
        assert_eq!(wrap_deg(190.0), -170.0);
        assert_eq!(wrap_deg(-2.0 + 360.0 * 3.0), -2.0);
        assert_eq!(wrap_deg_pos(-1.0), 359.0);
        assert_eq!(wrap_deg_pos(720.0), 0.0);
        assert_eq!(angle_sep_deg(359.0, 10.0, 1.0, 11.0), 2.0);
    }

    #[test]
    fn noise_budget() {
        // −174 dBm/Hz + 60 dB (1 MHz) + 9 dB
        let n = noise_power_mw(-174.0, 1e6, 9.0);
        assert!((lin_to_db(n) + 105.0).abs() < 1e-12);
    }

    #[test]
    fn inner_products() {
        let a = ChannelVector::from_vec(vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)]);
        let b = ChannelVector::from_vec(vec![Complex64::new(0.0, 1.0), Complex64::new(2.0, 0.0)]);
        assert_eq!(a.inner(&b), Complex64::new(3.0, 0.0));
        assert_eq!(a.dot_t(&b), Complex64::new(1.0, 0.0));
        assert_eq!(a.norm_sqr(), 2.0);
    }
}
