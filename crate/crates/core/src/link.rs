//! Downlink evaluation: max-RSRP association, MRT precoding and SINR, plus
//! the distribution statistics used for reporting.
//!
//! Channels are uplink vectors `h` (sector array ← user). By reciprocity the
//! downlink signal seen by the user is `hᵀx`.

use crate::error::{Error, Result};
use crate::geometry::UserKind;
use crate::math::{lin_to_db, ChannelVector};
use crate::prelude::*;

/// How the precoder's channel knowledge was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CsiScheme {
    Ideal,
    Contaminated,
    Decontaminated,
}

impl CsiScheme {
    pub const ALL: [CsiScheme; 3] = [
        CsiScheme::Ideal,
        CsiScheme::Contaminated,
        CsiScheme::Decontaminated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CsiScheme::Ideal => "ideal",
            CsiScheme::Contaminated => "contaminated",
            CsiScheme::Decontaminated => "decontaminated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrRecord {
    pub drop: usize,
    pub user_id: usize,
    pub kind: UserKind,
    pub scheme: CsiScheme,
    pub sinr_db: f64,
}

/// Channel vectors for every (sector, user) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    n_sectors: usize,
    n_users: usize,
    h: Vec<ChannelVector>,
}

impl ChannelSet {
    /// `h[s * n_users + u]` is the channel between sector `s` and user `u`.
    pub fn new(n_sectors: usize, n_users: usize, h: Vec<ChannelVector>) -> Result<Self> {
        if h.len() != n_sectors * n_users {
            return Err(Error::Dimension {
                expected: n_sectors * n_users,
                got: h.len(),
            });
        }
        Ok(Self {
            n_sectors,
            n_users,
            h,
        })
    }

    pub fn n_sectors(&self) -> usize {
        self.n_sectors
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn get(&self, sector: usize, user: usize) -> &ChannelVector {
        &self.h[sector * self.n_users + user]
    }
}

/// `P_tx + 10·log10‖h‖²`.
pub fn rsrp_dbm(tx_power_dbm: f64, h: &ChannelVector) -> f64 {
    tx_power_dbm + lin_to_db(h.norm_sqr())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    /// Serving sector per user id.
    pub serving: Vec<usize>,
    /// Users served by each sector, ascending.
    pub served: Vec<Vec<usize>>,
}

impl Association {
    pub fn from_serving(serving: Vec<usize>, n_sectors: usize) -> Self {
        let mut served = vec![Vec::new(); n_sectors];
        for (u, &s) in serving.iter().enumerate() {
            served[s].push(u);
        }
        Self { serving, served }
    }
}

/// Each user attaches to the sector with the highest RSRP; ties go to the
/// lowest sector id.
pub fn associate(channels: &ChannelSet, tx_power_dbm: f64) -> Association {
    let serving = (0..channels.n_users())
        .map(|u| {
            let mut best = 0;
            let mut best_rsrp = f64::NEG_INFINITY;
            for s in 0..channels.n_sectors() {
                let r = rsrp_dbm(tx_power_dbm, channels.get(s, u));
                if r > best_rsrp {
                    best = s;
                    best_rsrp = r;
                }
            }
            best
        })
        .collect();
    Association::from_serving(serving, channels.n_sectors())
}

/// `conj(ĥ)/‖ĥ‖`.
pub fn mrt_precoder(h_est: &ChannelVector) -> Result<ChannelVector> {
    let n = h_est.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::ZeroEstimate);
    }
    Ok(h_est.conj().scale_re(1.0 / n))
}

/// Per-user transmit power: each sector splits its power evenly over the
/// users it serves.
pub fn per_user_power_mw(assoc: &Association, sector_power_mw: f64) -> Vec<f64> {
    assoc
        .serving
        .iter()
        .map(|&s| sector_power_mw / assoc.served[s].len() as f64)
        .collect()
}

/// Downlink SINR (dB) of every user, all users sharing one channel:
///
/// `SINR_k = P_k|h_{b(k),k}ᵀw_k|² / (Σ_{j≠k} P_j|h_{b(j),k}ᵀw_j|² + N₀)`
pub fn downlink_sinr_db(
    assoc: &Association,
    channels: &ChannelSet,
    precoders: &[ChannelVector],
    sector_power_mw: f64,
    noise_mw: f64,
) -> Result<Vec<f64>> {
    let n = channels.n_users();
    if precoders.len() != n || assoc.serving.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: precoders.len().min(assoc.serving.len()),
        });
    }
    let power = per_user_power_mw(assoc, sector_power_mw);
    Ok((0..n)
        .map(|k| {
            let gain = |j: usize| -> f64 {
                let h = channels.get(assoc.serving[j], k);
                power[j] * h.dot_t(&precoders[j]).norm_sqr()
            };
            let signal = gain(k);
            let interference: f64 = (0..n).filter(|&j| j != k).map(gain).sum();
            lin_to_db(signal / (interference + noise_mw))
        })
        .collect())
}

/// Right-continuous empirical CDF as `(value, P[X ≤ value])` at each
/// distinct value, ascending.
pub fn empirical_cdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = p,
            _ => out.push((*x, p)),
        }
    }
    Ok(out)
}

/// Percentile `p ∈ [0, 100]` by linear interpolation between order
/// statistics at rank `p/100·(n−1)`.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::Validation {
            key: "percentile",
            constraint: "0 <= p <= 100",
        });
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let rank = p / 100.0 * (v.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    let frac = rank - lo as f64;
    Ok(v[lo] + frac * (v[hi] - v[lo]))
}

/// `|hᵀw|²`, the beamforming power gain of precoder `w` on channel `h`.
pub fn bf_gain(h: &ChannelVector, w: &ChannelVector) -> f64 {
    h.dot_t(w).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::path_loss_db;
    use crate::config::derive_substream;
    use crate::geometry::{angles_to, steering_vector, ArrayGeometry, Sector, Vec3};
    use crate::math::{complex_gaussian, db_to_lin, gaussian};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn random_vec(seed: u64, m: usize) -> ChannelVector {
        let mut rng = derive_substream(seed, "link-test", 0);
        (0..m).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
    }

    #[test]
    fn rsrp_examples() {
        let mut h = ChannelVector::zeros(4);
        h[2] = Complex64::new(0.0, 1.0);
        assert_eq!(rsrp_dbm(46.0, &h), 46.0);
        let h = random_vec(1, 16);
        let up = h.scale_re(10f64.sqrt());
        assert!((rsrp_dbm(46.0, &up) - rsrp_dbm(46.0, &h) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn nearer_sector_wins() {
        // two LoS UAV links; path loss is monotone in distance
        let array = ArrayGeometry {
            rows: 8,
            cols: 16,
            spacing_wavelengths: 0.5,
            boresight_az_deg: 0.0,
        };
        let sectors = [
            Sector {
                id: 0,
                site: 0,
                boresight_az_deg: 0.0,
                position: Vec3::new(0.0, 0.0, 25.0),
            },
            Sector {
                id: 1,
                site: 1,
                boresight_az_deg: 180.0,
                position: Vec3::new(500.0, 0.0, 25.0),
            },
        ];
        let mut rng = derive_substream(2, "near", 0);
        for _ in 0..50 {
            let x = rand::Rng::random_range(&mut rng, 10.0..490.0);
            let y = rand::Rng::random_range(&mut rng, -200.0..200.0);
            let p = Vec3::new(x, y, 120.0);
            let h: Vec<ChannelVector> = sectors
                .iter()
                .map(|s| {
                    let a = angles_to(s, &p).unwrap();
                    let pl = path_loss_db(UserKind::Uav, true, a.d3d_m, 2e9, p.z);
                    steering_vector(&array, 0.0, 0.0).scale_re(db_to_lin(-pl).sqrt())
                })
                .collect();
            let set = ChannelSet::new(2, 1, h).unwrap();
            let want = usize::from(x > 250.0);
            assert_eq!(associate(&set, 46.0).serving[0], want, "x={x}");
        }
    }

    #[test]
    fn association_rules() {
        let h: Vec<ChannelVector> = (0..3).map(|s| random_vec(s, 8)).collect();
        let one = ChannelSet::new(1, 3, h).unwrap();
        let a = associate(&one, 46.0);
        assert_eq!(a.serving, vec![0, 0, 0]);
        assert_eq!(a.served, vec![vec![0, 1, 2]]);

        let base = random_vec(9, 8);
        let h: Vec<ChannelVector> = (0..10)
            .map(|s| {
                if s == 3 || s == 7 {
                    base.clone()
                } else {
                    base.scale_re(0.5)
                }
            })
            .collect();
        let tie = ChannelSet::new(10, 1, h).unwrap();
        assert_eq!(associate(&tie, 46.0).serving, vec![3]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn association_invariant_under_common_offset(seed in 0u64..10_000, offset_db in -40.0f64..40.0) {
            let (ns, nu) = (4, 5);
            let h: Vec<ChannelVector> = (0..ns * nu)
                .map(|i| random_vec(seed * 100 + i as u64, 8))
                .collect();
            let set = ChannelSet::new(ns, nu, h.clone()).unwrap();
            let scaled = ChannelSet::new(
                ns,
                nu,
                h.iter().map(|v| v.scale_re(db_to_lin(offset_db).sqrt())).collect(),
            )
            .unwrap();
            prop_assert_eq!(associate(&set, 46.0), associate(&scaled, 46.0));
            prop_assert_eq!(associate(&set, 46.0), associate(&set, 46.0 + offset_db));
        }

        #[test]
        fn mrt_is_unit_norm_and_bounded(seed in 0u64..10_000) {
            let h = random_vec(seed, 32);
            let h_est = random_vec(seed + 1, 32);
            let w = mrt_precoder(&h_est).unwrap();
            prop_assert!((w.norm() - 1.0).abs() < 1e-12);
            // Cauchy-Schwarz: estimated CSI never beats the matched filter
            let ideal = bf_gain(&h, &mrt_precoder(&h).unwrap());
            prop_assert!(bf_gain(&h, &w) <= ideal * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mrt_examples() {
        let h = random_vec(4, 16);
        let w = mrt_precoder(&h).unwrap();
        assert!((bf_gain(&h, &w) - h.norm_sqr()).abs() < 1e-9 * h.norm_sqr());

        let mut a = ChannelVector::zeros(2);
        a[0] = Complex64::new(1.0, 0.0);
        let mut b = ChannelVector::zeros(2);
        b[1] = Complex64::new(0.0, 2.0);
        assert_eq!(bf_gain(&a, &mrt_precoder(&b).unwrap()), 0.0);

        assert_eq!(
            mrt_precoder(&ChannelVector::zeros(4)),
            Err(Error::ZeroEstimate)
        );
    }

    #[test]
    fn single_user_sinr_is_snr() {
        let h = random_vec(5, 16);
        let set = ChannelSet::new(1, 1, vec![h.clone()]).unwrap();
        let assoc = associate(&set, 46.0);
        let w = mrt_precoder(&h).unwrap();
        let (p, n0) = (39_810.717_055_349_72, 3.16e-11);
        let sinr = downlink_sinr_db(&assoc, &set, &[w], p, n0).unwrap();
        assert!((sinr[0] - 10.0 * (p * h.norm_sqr() / n0).log10()).abs() < 1e-9);
    }

    #[test]
    fn two_sector_toy_matches_hand_computation() {
        // M = 2, user 0 served by sector 0, user 1 by sector 1
        let c = |re, im| Complex64::new(re, im);
        let h00 = ChannelVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let h01 = ChannelVector::from_vec(vec![c(0.1, 0.0), c(0.0, 0.0)]);
        let h10 = ChannelVector::from_vec(vec![c(0.0, 0.2), c(0.1, 0.0)]);
        let h11 = ChannelVector::from_vec(vec![c(0.5, 0.5), c(0.5, -0.5)]);
        let set = ChannelSet::new(2, 2, vec![h00.clone(), h01, h10, h11.clone()]).unwrap();
        let assoc = associate(&set, 46.0);
        assert_eq!(assoc.serving, vec![0, 1]);
        let w = [mrt_precoder(&h00).unwrap(), mrt_precoder(&h11).unwrap()];
        let (p, n0) = (2.0, 0.01);
        // w0 = [1, -j]/√2, w1 = [0.5-0.5j, 0.5+0.5j]
        // user 0: signal |h00ᵀw0|² = |(1 + 1)/√2|² = 2
        //         interference from w1 via h10 = [0.2j, 0.1]:
        //         0.2j(0.5-0.5j) + 0.1(0.5+0.5j) = 0.1+0.1j + 0.05+0.05j → |0.15+0.15j|² = 0.045
        // user 1: signal (0.5+0.5j)(0.5-0.5j) + (0.5-0.5j)(0.5+0.5j) = 1 → 1
        //         interference from w0 via h01 = [0.1, 0]: |0.1/√2|² = 0.005
        let want0 = 10.0 * (p * 2.0 / (p * 0.045 + n0)).log10();
        let want1 = 10.0 * (p * 1.0 / (p * 0.005 + n0)).log10();
        let got = downlink_sinr_db(&assoc, &set, &w, p, n0).unwrap();
        assert!((got[0] - want0).abs() < 1e-12, "{} {}", got[0], want0);
        assert!((got[1] - want1).abs() < 1e-12, "{} {}", got[1], want1);
    }

    #[test]
    fn sector_power_is_conserved() {
        let assoc = Association::from_serving(vec![0, 2, 2, 2, 0, 1], 4);
        let p = per_user_power_mw(&assoc, 40.0);
        for (s, users) in assoc.served.iter().enumerate() {
            let total: f64 = users.iter().map(|&u| p[u]).sum();
            if users.is_empty() {
                assert_eq!(total, 0.0, "sector {s}");
            } else {
                assert!((total - 40.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cdf_and_percentile_examples() {
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0], 50.0), Ok(2.5));
        assert_eq!(percentile(&[4.0, 1.0, 3.0, 2.0], 0.0), Ok(1.0));
        assert_eq!(percentile(&[4.0, 1.0, 3.0, 2.0], 100.0), Ok(4.0));
        assert_eq!(empirical_cdf(&[3.0; 5]), Ok(vec![(3.0, 1.0)]));
        assert_eq!(
            empirical_cdf(&[2.0, 1.0, 2.0, 4.0]),
            Ok(vec![(1.0, 0.25), (2.0, 0.75), (4.0, 1.0)])
        );
        assert_eq!(empirical_cdf(&[]), Err(Error::EmptyInput));
        assert_eq!(percentile(&[], 5.0), Err(Error::EmptyInput));
        assert!(percentile(&[1.0], 101.0).is_err());
    }

    #[test]
    fn normal_fifth_percentile() {
        let mut rng = derive_substream(6, "normal", 0);
        let v: Vec<f64> = (0..10_000).map(|_| gaussian(&mut rng, 0.0, 1.0)).collect();
        let p5 = percentile(&v, 5.0).unwrap();
        assert!((p5 + 1.645).abs() < 0.05, "{p5}");
    }
}
