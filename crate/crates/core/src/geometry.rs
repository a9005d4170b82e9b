//! Hexagonal multi-site layout, user drops, and UPA array response.
//!
//! Frame: x east, y north, z up. Azimuth is measured counter-clockwise from
//! +x. Each sector array is a vertical plane facing its boresight; angles
//! handed to the array are relative to that boresight.

use core::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::math::{wrap_deg, ChannelVector};
use crate::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn add_scaled(&self, v: &Vec3, s: f64) -> Vec3 {
        Vec3::new(self.x + v.x * s, self.y + v.y * s, self.z + v.z * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UserKind {
    Uav,
    Gue,
}

impl UserKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            UserKind::Uav => "uav",
            UserKind::Gue => "gue",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub id: usize,
    pub site: usize,
    pub boresight_az_deg: f64,
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserState {
    pub id: usize,
    pub kind: UserKind,
    pub position: Vec3,
    /// m/s
    pub velocity: Vec3,
    /// Sector whose coverage area the user was dropped in.
    pub home_sector: usize,
    pub pilot_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    pub sites: Vec<[f64; 2]>,
    pub sectors: Vec<Sector>,
    pub users: Vec<UserState>,
}

/// Uniform planar array. Element `(m, n)` (row `m` vertical, column `n`
/// horizontal) lives at index `m * cols + n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    pub spacing_wavelengths: f64,
    pub boresight_az_deg: f64,
}

impl ArrayGeometry {
    /// Array in its own sector frame (boresight at 0°).
    pub fn from_config(c: &ScenarioConfig) -> Self {
        Self {
            rows: c.array_rows,
            cols: c.array_cols,
            spacing_wavelengths: c.element_spacing_wavelengths,
            boresight_az_deg: 0.0,
        }
    }

    pub fn n_antennas(&self) -> usize {
        self.rows * self.cols
    }
}

/// Direction and distance from a sector array to a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAngles {
    /// Relative to boresight, in (−180, 180].
    pub az_deg: f64,
    pub el_deg: f64,
    pub d3d_m: f64,
    pub d2d_m: f64,
}

/// Site centres: origin first, then hexagonal rings at `isd_m` spacing.
pub fn site_positions(n_sites: usize, isd_m: f64) -> Vec<[f64; 2]> {
    // axial basis: e1 at 30°, e2 at 90°
    let e1 = [isd_m * (PI / 6.0).cos(), isd_m * 0.5];
    let e2 = [0.0, isd_m];
    let mut ring_max = 0i64;
    while 1 + 3 * ring_max * (ring_max + 1) < n_sites as i64 {
        ring_max += 1;
    }
    let mut cells: Vec<(i64, f64, [f64; 2])> = Vec::new();
    for q in -ring_max..=ring_max {
        for r in -ring_max..=ring_max {
            let dist = (q.abs() + r.abs() + (q + r).abs()) / 2;
            if dist > ring_max {
                continue;
            }
            let p = [
                q as f64 * e1[0] + r as f64 * e2[0],
                q as f64 * e1[1] + r as f64 * e2[1],
            ];
            let ang = if dist == 0 {
                0.0
            } else {
                crate::math::wrap_deg_pos(p[1].atan2(p[0]).to_degrees())
            };
            cells.push((dist, ang, p));
        }
    }
    cells.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    cells.into_iter().take(n_sites).map(|c| c.2).collect()
}

fn sectors_for(sites: &[[f64; 2]], per_site: usize, height: f64) -> Vec<Sector> {
    let mut out = Vec::with_capacity(sites.len() * per_site);
    for (s, p) in sites.iter().enumerate() {
        for k in 0..per_site {
            out.push(Sector {
                id: s * per_site + k,
                site: s,
                boresight_az_deg: 360.0 * k as f64 / per_site as f64,
                position: Vec3::new(p[0], p[1], height),
            });
        }
    }
    out
}

/// Drop region: regular hexagon with vertices toward the first ring of sites,
/// circumscribing all sites with `isd/2` padding.
struct DropRegion {
    circumradius: f64,
}

impl DropRegion {
    fn new(sites: &[[f64; 2]], isd: f64) -> Self {
        let far = sites
            .iter()
            .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
            .fold(0.0, f64::max);
        Self {
            circumradius: far + isd / 2.0,
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let apothem = self.circumradius * (PI / 6.0).cos();
        (0..6).all(|j| {
            let a = j as f64 * PI / 3.0;
            x * a.cos() + y * a.sin() <= apothem
        })
    }
}

/// Sector owning a ground point: nearest site (lowest index on ties), then
/// the sector whose boresight is closest in azimuth.
pub fn sector_of_point(sites: &[[f64; 2]], per_site: usize, x: f64, y: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, s) in sites.iter().enumerate() {
        let d = (x - s[0]) * (x - s[0]) + (y - s[1]) * (y - s[1]);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    let s = sites[best];
    let az = (y - s[1]).atan2(x - s[0]).to_degrees();
    let width = 360.0 / per_site as f64;
    let k = (crate::math::wrap_deg_pos(az + width / 2.0) / width) as usize;
    best * per_site + k.min(per_site - 1)
}

/// Builds the site/sector layout and drops users.
///
/// Users are spread over the sectors one per sector (sector order shuffled,
/// cycling when there are more users than sectors), each uniformly inside
/// its sector's coverage area clipped to the drop hexagon. User ids
/// `0..n_uavs` are UAVs, the rest GUEs.
pub fn build_layout<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> NetworkLayout {
    let sites = site_positions(config.n_sites, config.isd_m);
    let sectors = sectors_for(&sites, config.sectors_per_site, config.gbs_height_m);
    let region = DropRegion::new(&sites, config.isd_m);

    let mut order: Vec<usize> = (0..sectors.len()).collect();
    order.shuffle(rng);

    let n_users = config.n_users();
    let mut users = Vec::with_capacity(n_users);
    for id in 0..n_users {
        let kind = if id < config.n_uavs {
            UserKind::Uav
        } else {
            UserKind::Gue
        };
        let home = order[id % order.len()];
        let site = sites[sectors[home].site];
        let r = region.circumradius;
        let (x, y) = loop {
            let x = rng.random_range(-r..r);
            let y = rng.random_range(-r..r);
            if !region.contains(x, y) {
                continue;
            }
            let d2d = ((x - site[0]).powi(2) + (y - site[1]).powi(2)).sqrt();
            if d2d < config.min_d2d_m {
                continue;
            }
            if sector_of_point(&sites, config.sectors_per_site, x, y) == home {
                break (x, y);
            }
        };
        let z = match kind {
            UserKind::Uav => rng.random_range(config.uav_height_min_m..=config.uav_height_max_m),
            UserKind::Gue => config.gue_height_m,
        };
        users.push(UserState {
            id,
            kind,
            position: Vec3::new(x, y, z),
            velocity: Vec3::default(),
            home_sector: home,
            pilot_index: 0,
        });
    }

    NetworkLayout {
        sites,
        sectors,
        users,
    }
}

/// Azimuth (relative to boresight), elevation and distances from a sector
/// array to `p`.
pub fn angles_to(sector: &Sector, p: &Vec3) -> Result<LinkAngles> {
    let dx = p.x - sector.position.x;
    let dy = p.y - sector.position.y;
    let dz = p.z - sector.position.z;
    let d2d = (dx * dx + dy * dy).sqrt();
    let d3d = (d2d * d2d + dz * dz).sqrt();
    if d3d < 1e-9 {
        return Err(Error::CoincidentPoint);
    }
    let az = if d2d == 0.0 {
        0.0
    } else {
        wrap_deg(dy.atan2(dx).to_degrees() - sector.boresight_az_deg)
    };
    let el = dz.atan2(d2d).to_degrees();
    Ok(LinkAngles {
        az_deg: az,
        el_deg: el,
        d3d_m: d3d,
        d2d_m: d2d,
    })
}

/// Inverse of [`angles_to`]: the point at the given relative direction and
/// 3D distance from the sector array.
pub fn point_at(sector: &Sector, az_rel_deg: f64, el_deg: f64, d3d_m: f64) -> Vec3 {
    let az = (az_rel_deg + sector.boresight_az_deg).to_radians();
    let el = el_deg.to_radians();
    let d2d = d3d_m * el.cos();
    Vec3::new(
        sector.position.x + d2d * az.cos(),
        sector.position.y + d2d * az.sin(),
        sector.position.z + d3d_m * el.sin(),
    )
}

/// Unit-modulus array response toward `(az_deg, el_deg)`.
///
/// Element `(m, n)` has phase `2π·d·(n·cos(el)·sin(az − boresight) + m·sin(el))`.
pub fn steering_vector(array: &ArrayGeometry, az_deg: f64, el_deg: f64) -> ChannelVector {
    let az = (az_deg - array.boresight_az_deg).to_radians();
    let el = el_deg.to_radians();
    let k = 2.0 * PI * array.spacing_wavelengths;
    let horiz = k * el.cos() * az.sin();
    let vert = k * el.sin();
    // separable: element (m, n) = v_m·h_n
    let col: Vec<Complex64> = (0..array.cols)
        .map(|n| Complex64::from_polar(1.0, n as f64 * horiz))
        .collect();
    let mut out = Vec::with_capacity(array.n_antennas());
    for m in 0..array.rows {
        let v = Complex64::from_polar(1.0, m as f64 * vert);
        out.extend(col.iter().map(|h| v * h));
    }
    ChannelVector::from_vec(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::derive_substream;

    fn origin_sector() -> Sector {
        Sector {
            id: 0,
            site: 0,
            boresight_az_deg: 0.0,
            position: Vec3::new(0.0, 0.0, 25.0),
        }
    }

    fn upa() -> ArrayGeometry {
        ArrayGeometry {
            rows: 8,
            cols: 16,
            spacing_wavelengths: 0.5,
            boresight_az_deg: 0.0,
        }
    }

    #[test]
    fn angles_examples() {
        let s = origin_sector();
        let a = angles_to(&s, &Vec3::new(100.0, 0.0, 25.0)).unwrap();
        assert_eq!(
            (a.az_deg, a.el_deg, a.d3d_m, a.d2d_m),
            (0.0, 0.0, 100.0, 100.0)
        );

        let a = angles_to(&s, &Vec3::new(100.0, 0.0, 125.0)).unwrap();
        assert!(a.az_deg.abs() < 1e-12);
        assert!((a.el_deg - 45.0).abs() < 1e-12);
        assert!((a.d3d_m - 141.421_356_237_309_5).abs() < 1e-9);
        assert!((a.d2d_m - 100.0).abs() < 1e-12);

        let a = angles_to(&s, &Vec3::new(0.0, 100.0, 25.0)).unwrap();
        assert!((a.az_deg - 90.0).abs() < 1e-12);
        assert!(a.el_deg.abs() < 1e-12);

        assert_eq!(
            angles_to(&s, &Vec3::new(0.0, 0.0, 25.0)),
            Err(Error::CoincidentPoint)
        );
    }

    #[test]
    fn azimuth_is_relative_to_boresight() {
        let s = Sector {
            boresight_az_deg: 120.0,
            ..origin_sector()
        };
        let a = angles_to(&s, &Vec3::new(-100.0, 0.0, 25.0)).unwrap();
        assert!((a.az_deg - 60.0).abs() < 1e-12);
    }

    #[test]
    fn steering_examples() {
        let arr = upa();
        let a = steering_vector(&arr, 0.0, 0.0);
        assert!(a
            .iter()
            .all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let a = steering_vector(&arr, 30.0, 0.0);
        // element (m=0, n=1): phase π/2
        assert!((a[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        for (az, el) in [(13.0, 7.0), (-170.0, 89.0), (45.5, -30.0)] {
            let a = steering_vector(&arr, az, el);
            assert!((a.norm_sqr() - 128.0).abs() < 128.0 * 1e-12);
        }
    }

    #[test]
    fn steering_honours_boresight() {
        let arr = ArrayGeometry {
            boresight_az_deg: 120.0,
            ..upa()
        };
        let a = steering_vector(&arr, 150.0, 10.0);
        let b = steering_vector(&upa(), 30.0, 10.0);
        assert!((&a - &b).norm() < 1e-12);
    }

    #[test]
    fn default_layout() {
        let c = ScenarioConfig::default();
        let l = build_layout(&c, &mut derive_substream(1, "layout", 0));
        assert_eq!(l.sites.len(), 7);
        assert_eq!(l.sectors.len(), 21);
        assert_eq!(l.users.len(), 21);
        assert_eq!(
            l.users.iter().filter(|u| u.kind == UserKind::Uav).count(),
            15
        );
        assert_eq!(l.sites[0], [0.0, 0.0]);
        for s in &l.sites[1..] {
            assert!(((s[0] * s[0] + s[1] * s[1]).sqrt() - 500.0).abs() < 1e-9);
        }
        // one user per sector under defaults
        let mut homes: Vec<usize> = l.users.iter().map(|u| u.home_sector).collect();
        homes.sort();
        assert_eq!(homes, (0..21).collect::<Vec<_>>());
        for u in &l.users {
            match u.kind {
                UserKind::Gue => assert_eq!(u.position.z, 1.5),
                UserKind::Uav => assert!((50.0..=300.0).contains(&u.position.z)),
            }
            assert_eq!(
                sector_of_point(&l.sites, 3, u.position.x, u.position.y),
                u.home_sector
            );
        }
        for site in 0..7 {
            let b: Vec<f64> = l.sectors[site * 3..site * 3 + 3]
                .iter()
                .map(|s| s.boresight_az_deg)
                .collect();
            assert_eq!(b, vec![0.0, 120.0, 240.0]);
        }
    }

    #[test]
    fn single_site_layout() {
        let c = ScenarioConfig {
            n_sites: 1,
            ..Default::default()
        };
        let l = build_layout(&c, &mut derive_substream(1, "layout", 0));
        assert_eq!(l.sites, vec![[0.0, 0.0]]);
        assert_eq!(l.sectors.len(), 3);
        assert_eq!(l.users.len(), 21);
    }

    #[test]
    fn layout_is_deterministic() {
        let c = ScenarioConfig::default();
        let a = build_layout(&c, &mut derive_substream(9, "layout", 3));
        let b = build_layout(&c, &mut derive_substream(9, "layout", 3));
        assert_eq!(a, b);
    }

    #[test]
    fn nineteen_sites_form_two_rings() {
        let s = site_positions(19, 500.0);
        let ring2: Vec<f64> = s[7..]
            .iter()
            .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
            .collect();
        assert!(ring2.iter().all(|&d| d > 800.0 && d <= 1000.0 + 1e-9));
    }
}
