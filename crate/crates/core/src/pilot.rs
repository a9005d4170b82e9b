//! Zadoff-Chu pilots, network pilot reuse, uplink pilot reception and
//! least-squares channel estimation.

use core::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::gcd;
use crate::error::{Error, Result};
use crate::geometry::NetworkLayout;
use crate::math::{complex_gaussian, ChannelVector};
use crate::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct PilotSequence {
    pub root: u32,
    pub shift: usize,
    pub symbols: Vec<Complex64>,
}

impl PilotSequence {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum()
    }

    /// `selfᴴ · other`
    pub fn correlate(&self, other: &PilotSequence) -> Complex64 {
        self.symbols
            .iter()
            .zip(&other.symbols)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Zadoff-Chu sequence of length `n`, cyclically shifted by `shift`.
///
/// `x(k) = exp(−jπ·root·k²/n)` for even `n`, `exp(−jπ·root·k(k+1)/n)` for odd.
pub fn zc_sequence(root: u32, shift: usize, n: usize) -> Result<PilotSequence> {
    if n == 0 || root == 0 || gcd(root as u64, n as u64) != 1 {
        return Err(Error::RootNotCoprime {
            root,
            len: n as u32,
        });
    }
    let nn = n as u64;
    let symbols = (0..n)
        .map(|k| {
            let k = ((k + shift) % n) as u64;
            // reduce the quadratic index modulo 2n to keep the phase argument small
            let q = if n.is_multiple_of(2) {
                k * k
            } else {
                k * (k + 1)
            };
            let q = (root as u64 * (q % (2 * nn))) % (2 * nn);
            let phase = -PI * q as f64 / n as f64;
            Complex64::new(phase.cos(), phase.sin())
        })
        .collect();
    Ok(PilotSequence {
        root,
        shift: shift % n,
        symbols,
    })
}

/// Network pilot of every sector.
///
/// With `reuse >= n_sectors` every sector gets its own pilot. Otherwise
/// sector `k` of site `s` uses pilot `perm[(s + c·k) mod reuse]`, so the
/// sectors of one site get distinct pilots and, with `n_sites == reuse`,
/// every pilot is used by exactly one sector per orientation at distinct
/// sites. `perm` and `c` are drawn from `rng`.
pub fn sector_pilots<R: Rng + ?Sized>(
    n_sites: usize,
    sectors_per_site: usize,
    reuse: usize,
    rng: &mut R,
) -> Vec<usize> {
    let n_sectors = n_sites * sectors_per_site;
    let mut perm: Vec<usize> = (0..reuse).collect();
    perm.shuffle(rng);
    if reuse >= n_sectors {
        return (0..n_sectors).map(|i| perm[i]).collect();
    }
    // multipliers that keep one site's sectors on distinct pilots
    let candidates: Vec<usize> = (1..reuse.max(2))
        .filter(|&c| {
            let mut seen: Vec<usize> = (0..sectors_per_site).map(|k| (c * k) % reuse).collect();
            seen.sort_unstable();
            seen.dedup();
            seen.len() == sectors_per_site.min(reuse)
        })
        .collect();
    let c = if candidates.is_empty() {
        1
    } else {
        candidates[rng.random_range(0..candidates.len())]
    };
    (0..n_sectors)
        .map(|i| {
            let (s, k) = (i / sectors_per_site, i % sectors_per_site);
            perm[(s + c * k) % reuse]
        })
        .collect()
}

/// Gives every user the pilot of the sector it was dropped in and returns
/// the per-user pilot indices (pilot `p` is cyclic shift `p` of the root).
pub fn assign_pilots<R: Rng + ?Sized>(
    layout: &mut NetworkLayout,
    sectors_per_site: usize,
    reuse: usize,
    rng: &mut R,
) -> Vec<usize> {
    let n_sites = layout.sites.len();
    let per_sector = sector_pilots(n_sites, sectors_per_site, reuse, rng);
    for u in layout.users.iter_mut() {
        u.pilot_index = per_sector[u.home_sector];
    }
    layout.users.iter().map(|u| u.pilot_index).collect()
}

/// Pilot shifts not used by any user: the pool for extra training rounds.
pub fn extra_pilot_pool(pilot_len: usize, used: &[usize]) -> Vec<usize> {
    (0..pilot_len).filter(|s| !used.contains(s)).collect()
}

/// Shifts for `n_rounds` extra pilot rounds of `n_users` users, drawn
/// uniformly and independently from `pool`: `out[round][user]`.
pub fn draw_extra_pilots<R: Rng + ?Sized>(
    pool: &[usize],
    n_users: usize,
    n_rounds: usize,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    if pool.is_empty() {
        return vec![Vec::new(); n_rounds];
    }
    (0..n_rounds)
        .map(|_| {
            (0..n_users)
                .map(|_| pool[rng.random_range(0..pool.len())])
                .collect()
        })
        .collect()
}

/// `M × L` block of received pilot samples at one sector, row-major by antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedPilotBlock {
    pub sector: usize,
    pub n_antennas: usize,
    pub pilot_len: usize,
    pub samples: Vec<Complex64>,
    pub noise_power_mw: f64,
}

/// One user's contribution to an uplink pilot round.
#[derive(Debug, Clone, Copy)]
pub struct PilotTx<'a> {
    pub channel: &'a ChannelVector,
    pub pilot: &'a PilotSequence,
    pub power_mw: f64,
}

/// `Y = Σ_k √P_k·h_k·s_kᴴ + W`, `W` i.i.d. CN(0, noise_power_mw).
pub fn uplink_rx<R: Rng + ?Sized>(
    sector: usize,
    n_antennas: usize,
    pilot_len: usize,
    transmitters: &[PilotTx<'_>],
    noise_power_mw: f64,
    rng: &mut R,
) -> Result<ReceivedPilotBlock> {
    let mut samples = vec![Complex64::new(0.0, 0.0); n_antennas * pilot_len];
    for tx in transmitters {
        if tx.channel.len() != n_antennas {
            return Err(Error::Dimension {
                expected: n_antennas,
                got: tx.channel.len(),
            });
        }
        if tx.pilot.len() != pilot_len {
            return Err(Error::Dimension {
                expected: pilot_len,
                got: tx.pilot.len(),
            });
        }
        let amp = tx.power_mw.sqrt();
        for (m, h) in tx.channel.iter().enumerate() {
            let row = &mut samples[m * pilot_len..(m + 1) * pilot_len];
            let hm = h * amp;
            for (y, s) in row.iter_mut().zip(&tx.pilot.symbols) {
                *y += hm * s.conj();
            }
        }
    }
    if noise_power_mw > 0.0 {
        for y in samples.iter_mut() {
            *y += complex_gaussian(rng, noise_power_mw);
        }
    }
    Ok(ReceivedPilotBlock {
        sector,
        n_antennas,
        pilot_len,
        samples,
        noise_power_mw,
    })
}

/// `ĥ = Y·s / (sᴴs)`
pub fn ls_estimate(block: &ReceivedPilotBlock, pilot: &PilotSequence) -> Result<ChannelVector> {
    if pilot.len() != block.pilot_len {
        return Err(Error::Dimension {
            expected: block.pilot_len,
            got: pilot.len(),
        });
    }
    let energy = pilot.energy();
    Ok(block
        .samples
        .chunks_exact(block.pilot_len)
        .map(|row| {
            row.iter()
                .zip(&pilot.symbols)
                .map(|(y, s)| y * s)
                .sum::<Complex64>()
                / energy
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{derive_substream, ScenarioConfig};
    use crate::geometry::build_layout;

    fn random_vec(rng: &mut impl Rng, m: usize) -> ChannelVector {
        (0..m).map(|_| complex_gaussian(rng, 1.0)).collect()
    }

    #[test]
    fn zc_basics() {
        let s = zc_sequence(1, 0, 12).unwrap();
        assert_eq!(s.symbols[0], Complex64::new(1.0, 0.0));
        for root in [1, 5, 7, 11] {
            for shift in 0..12 {
                let s = zc_sequence(root, shift, 12).unwrap();
                assert!(s.symbols.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
                assert!((s.energy() - 12.0).abs() < 1e-12);
            }
        }
        assert!(zc_sequence(2, 0, 12).is_err());
        assert!(zc_sequence(3, 0, 12).is_err());
        // odd length uses k(k+1)
        let s = zc_sequence(2, 0, 13).unwrap();
        assert_eq!(s.len(), 13);
    }

    #[test]
    fn zc_shift_orthogonality_brute_force() {
        // direct O(n) correlation of every shift pair
        let seqs: Vec<_> = (0..12).map(|k| zc_sequence(1, k, 12).unwrap()).collect();
        let mut pairs = 0;
        for a in 0..12 {
            for b in (a + 1)..12 {
                let c: Complex64 = (0..12)
                    .map(|i| seqs[a].symbols[i].conj() * seqs[b].symbols[i])
                    .sum();
                assert!(c.norm() < 1e-12, "shift {a} vs {b}: {}", c.norm());
                pairs += 1;
            }
        }
        assert_eq!(pairs, 66);
        assert!(seqs[0].correlate(&seqs[3]).norm() < 1e-12);
    }

    #[test]
    fn default_assignment_reuses_each_pilot_three_times() {
        let c = ScenarioConfig::default();
        let mut l = build_layout(&c, &mut derive_substream(5, "layout", 0));
        let p = assign_pilots(&mut l, 3, 7, &mut derive_substream(5, "pilot", 0));
        let mut counts = [0usize; 7];
        for &i in &p {
            counts[i] += 1;
        }
        assert_eq!(counts, [3; 7]);
        let per_sector = sector_pilots(7, 3, 7, &mut derive_substream(5, "pilot", 0));
        for pilot in 0..7 {
            let mut sites: Vec<usize> = (0..21)
                .filter(|&i| per_sector[i] == pilot)
                .map(|i| i / 3)
                .collect();
            sites.dedup();
            assert_eq!(
                sites.len(),
                3,
                "co-pilot sectors must sit at distinct sites"
            );
        }
        assert_eq!(extra_pilot_pool(12, &p), vec![7, 8, 9, 10, 11]);
    }

    #[test]
    fn full_reuse_is_orthogonal() {
        let c = ScenarioConfig {
            pilot_len: 24,
            pilot_reuse: 21,
            ..Default::default()
        };
        let mut l = build_layout(&c, &mut derive_substream(5, "layout", 0));
        let mut p = assign_pilots(&mut l, 3, 21, &mut derive_substream(5, "pilot", 0));
        p.sort();
        assert_eq!(p, (0..21).collect::<Vec<_>>());
    }

    #[test]
    fn assignment_is_deterministic() {
        let a = sector_pilots(7, 3, 7, &mut derive_substream(8, "pilot", 2));
        let b = sector_pilots(7, 3, 7, &mut derive_substream(8, "pilot", 2));
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_single_user_rx_is_rank_one_and_ls_recovers() {
        let mut rng = derive_substream(0, "rx", 0);
        let h = random_vec(&mut rng, 128);
        let s = zc_sequence(1, 4, 12).unwrap();
        let p = 200.0;
        let tx = [PilotTx {
            channel: &h,
            pilot: &s,
            power_mw: p,
        }];
        let y = uplink_rx(0, 128, 12, &tx, 0.0, &mut rng).unwrap();
        for m in 0..128 {
            for l in 0..12 {
                let expect = h[m] * p.sqrt() * s.symbols[l].conj();
                assert!((y.samples[m * 12 + l] - expect).norm() < 1e-12);
            }
        }
        let est = ls_estimate(&y, &s).unwrap().scale_re(1.0 / p.sqrt());
        assert!((&est - &h).norm() <= 1e-12 * h.norm());
    }

    #[test]
    fn contamination_is_superposition_and_orthogonal_pilots_vanish() {
        let mut rng = derive_substream(0, "rx", 1);
        let h1 = random_vec(&mut rng, 32);
        let h2 = random_vec(&mut rng, 32);
        let h3 = random_vec(&mut rng, 32);
        let s = zc_sequence(1, 2, 12).unwrap();
        let other = zc_sequence(1, 9, 12).unwrap();
        let (p1, p2) = (3.0, 0.5);
        let tx = [
            PilotTx {
                channel: &h1,
                pilot: &s,
                power_mw: p1,
            },
            PilotTx {
                channel: &h2,
                pilot: &s,
                power_mw: p2,
            },
            PilotTx {
                channel: &h3,
                pilot: &other,
                power_mw: 10.0,
            },
        ];
        let y = uplink_rx(0, 32, 12, &tx, 0.0, &mut rng).unwrap();
        let est = ls_estimate(&y, &s).unwrap();
        let mut expect = h1.scale_re(p1.sqrt());
        expect.axpy(Complex64::new(p2.sqrt(), 0.0), &h2);
        assert!((&est - &expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn noise_statistics() {
        let mut rng = derive_substream(0, "noise", 0);
        let s = zc_sequence(1, 0, 12).unwrap();
        let n0 = 2.5e-11;
        let trials = 10_000 / 12 + 1;
        let mut raw = 0.0;
        let mut raw_n = 0usize;
        let mut est_acc = 0.0;
        let mut est_n = 0usize;
        for _ in 0..trials {
            let y = uplink_rx(0, 12, 12, &[], n0, &mut rng).unwrap();
            raw += y.samples.iter().map(|z| z.norm_sqr()).sum::<f64>();
            raw_n += y.samples.len();
            let e = ls_estimate(&y, &s).unwrap();
            est_acc += e.norm_sqr();
            est_n += e.len();
        }
        let v = raw / raw_n as f64;
        assert!((v / n0 - 1.0).abs() < 0.05, "{}", v / n0);
        // per-antenna LS estimation noise is n0 / L; 10⁴ trials of 12 antennas
        let ve = est_acc / est_n as f64;
        assert!(
            (ve / (n0 / 12.0) - 1.0).abs() < 0.05,
            "{}",
            ve / (n0 / 12.0)
        );
    }
}
