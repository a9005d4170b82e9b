//! Pilot decontamination at a single sector.
//!
//! Ground users: a spatial matched filter over the elevation range above the
//! horizon finds the LoS directions of contaminating UAVs, and the GUE's
//! estimate is projected onto the orthogonal complement of those directions.
//!
//! UAVs: the served UAV sends extra pilots drawn at random from the unused
//! shifts. Interferers are unlikely to follow it through every round, so the
//! only path present in every round is the served UAV's LoS path; the estimate
//! is rebuilt as a rank-1 ray along it.
//!
//! The sector array has isotropic elements, so `az` and `180° − az` (relative
//! to boresight) produce the same response. Detected peaks are reported on
//! the front half-plane.

use num_complex::Complex64;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::{steering_vector, ArrayGeometry};
use crate::math::{angle_sep_deg, wrap_deg, ChannelVector};
use crate::prelude::*;

/// Rectangular search grid: azimuth `az_start + i·az_step` for `i < n_az`,
/// elevation `el_start + j·el_step` for `j < n_el`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleGrid {
    pub az_start_deg: f64,
    pub az_step_deg: f64,
    pub n_az: usize,
    pub el_start_deg: f64,
    pub el_step_deg: f64,
    pub n_el: usize,
}

impl AngleGrid {
    /// Azimuth over `[az_lo, az_hi)` and elevation over `[el_lo, el_hi]`.
    pub fn new(
        az_range_deg: (f64, f64),
        el_range_deg: (f64, f64),
        az_step_deg: f64,
        el_step_deg: f64,
    ) -> Result<Self> {
        let (az_lo, az_hi) = az_range_deg;
        let (el_lo, el_hi) = el_range_deg;
        if !(az_step_deg > 0.0 && el_step_deg > 0.0) || az_hi <= az_lo || el_hi < el_lo {
            return Err(Error::EmptyGrid);
        }
        let n_az = ((az_hi - az_lo) / az_step_deg - 1e-9).ceil() as usize;
        let n_el = ((el_hi - el_lo) / el_step_deg + 1e-9).floor() as usize + 1;
        if n_az == 0 || n_el == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(Self {
            az_start_deg: az_lo,
            az_step_deg,
            n_az,
            el_start_deg: el_lo,
            el_step_deg,
            n_el,
        })
    }

    /// Full azimuth circle, elevation from the horizon to the zenith.
    pub fn upper_hemisphere(az_step_deg: f64, el_step_deg: f64) -> Result<Self> {
        Self::new((0.0, 360.0), (0.0, 90.0), az_step_deg, el_step_deg)
    }

    /// Full azimuth circle and elevation from nadir to zenith.
    pub fn full_sphere(az_step_deg: f64, el_step_deg: f64) -> Result<Self> {
        Self::new((0.0, 360.0), (-90.0, 90.0), az_step_deg, el_step_deg)
    }

    /// The search grid used by the simulator: the full sphere, so that a
    /// path below the horizon is found (and deflated) at its true direction
    /// instead of leaving its elevation sidelobes above the horizon.
    pub fn from_config(c: &ScenarioConfig) -> Result<Self> {
        Self::full_sphere(c.grid_az_step_deg, c.grid_el_step_deg)
    }

    pub fn az(&self, i: usize) -> f64 {
        self.az_start_deg + i as f64 * self.az_step_deg
    }

    pub fn el(&self, j: usize) -> f64 {
        self.el_start_deg + j as f64 * self.el_step_deg
    }

    pub fn len(&self) -> usize {
        self.n_az * self.n_el
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when the azimuth axis closes on itself.
    pub fn wraps_az(&self) -> bool {
        (self.n_az as f64 * self.az_step_deg - 360.0).abs() < 1e-9
    }
}

/// Matched-filter output `|a(az,el)ᴴy|²/M` on a grid (row-major by elevation).
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSpectrum {
    pub grid: AngleGrid,
    pub power: Vec<f64>,
    pub source: ChannelVector,
    pub array: ArrayGeometry,
}

impl SpatialSpectrum {
    pub fn at(&self, j_el: usize, i_az: usize) -> f64 {
        self.power[j_el * self.grid.n_az + i_az]
    }

    pub fn az_grid(&self) -> Vec<f64> {
        (0..self.grid.n_az).map(|i| self.grid.az(i)).collect()
    }

    pub fn el_grid(&self) -> Vec<f64> {
        (0..self.grid.n_el).map(|j| self.grid.el(j)).collect()
    }
}

/// A detected propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEstimate {
    pub az_deg: f64,
    pub el_deg: f64,
    /// `|aᴴy|²/M` at the refined direction.
    pub power: f64,
    /// `aᴴy/M`; a pure ray `c·a(θ)` gives `c`.
    pub amplitude: Complex64,
}

/// `aᴴy / M` for one direction.
pub fn path_amplitude(y: &ChannelVector, array: &ArrayGeometry, az: f64, el: f64) -> Complex64 {
    let a = steering_vector(array, az, el);
    a.inner(y) / array.n_antennas() as f64
}

/// Evaluates `|a(az,el)ᴴy|²/M` over `grid`.
///
/// The UPA response factors into a vertical and a horizontal phase ramp, so
/// each elevation row first collapses the rows of `y` into one column vector
/// and then sweeps azimuth over `cols` terms only.
pub fn matched_filter_spectrum(
    y: &ChannelVector,
    array: &ArrayGeometry,
    grid: &AngleGrid,
) -> Result<SpatialSpectrum> {
    let m_total = array.n_antennas();
    if y.len() != m_total {
        return Err(Error::Dimension {
            expected: m_total,
            got: y.len(),
        });
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let k = 2.0 * core::f64::consts::PI * array.spacing_wavelengths;
    // az and 180° − az share a response: evaluate each folded azimuth once
    let folded: Vec<f64> = (0..grid.n_az)
        .map(|i| wrap_deg(fold_to_front(array, grid.az(i)) - array.boresight_az_deg))
        .collect();
    let mut unique: Vec<f64> = folded.clone();
    unique.sort_by(|a, b| a.total_cmp(b));
    unique.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let slot: Vec<usize> = folded
        .iter()
        .map(|f| {
            let p = unique.partition_point(|u| *u < f - 1e-9);
            p.min(unique.len() - 1)
        })
        .collect();
    let sin_az: Vec<f64> = unique.iter().map(|u| u.to_radians().sin()).collect();

    let ys = y.as_slice();
    let zero = Complex64::new(0.0, 0.0);
    let mut z = vec![zero; array.cols];
    let mut row_power = vec![0.0; unique.len()];
    let mut power = Vec::with_capacity(grid.len());
    const LANES: usize = 8;
    for j in 0..grid.n_el {
        let el = grid.el(j).to_radians();
        let (sin_el, cos_el) = (el.sin(), el.cos());
        z.fill(zero);
        for m in 0..array.rows {
            let ph = -k * m as f64 * sin_el;
            let w = Complex64::new(ph.cos(), ph.sin());
            let row = &ys[m * array.cols..(m + 1) * array.cols];
            for (zn, yv) in z.iter_mut().zip(row) {
                *zn += w * yv;
            }
        }
        // Horner in rot = e^{−j k cos(el) sin(az)}, several azimuths at once
        for (chunk_sin, chunk_out) in sin_az.chunks(LANES).zip(row_power.chunks_mut(LANES)) {
            let mut rot = [zero; LANES];
            for (r, &sa) in rot.iter_mut().zip(chunk_sin) {
                let ph = -k * cos_el * sa;
                *r = Complex64::new(ph.cos(), ph.sin());
            }
            let mut acc = [zero; LANES];
            for zn in z.iter().rev() {
                for l in 0..LANES {
                    acc[l] = acc[l] * rot[l] + zn;
                }
            }
            for (o, a) in chunk_out.iter_mut().zip(&acc) {
                *o = a.norm_sqr() / m_total as f64;
            }
        }
        power.extend(slot.iter().map(|&u| row_power[u]));
    }
    Ok(SpatialSpectrum {
        grid: *grid,
        power,
        source: y.clone(),
        array: *array,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakOptions {
    pub threshold_over_median_db: f64,
    pub min_separation_deg: f64,
    pub max_peaks: usize,
    /// Only paths strictly above this elevation are reported. Paths below
    /// it are still searched for and deflated.
    pub min_elevation_deg: f64,
    /// Absolute floor on the detection threshold (same units as the
    /// spectrum). Zero disables it.
    pub min_power: f64,
}

impl PeakOptions {
    pub fn from_config(c: &ScenarioConfig) -> Self {
        Self {
            threshold_over_median_db: c.peak_threshold_over_median_db,
            min_separation_deg: c.peak_min_separation_deg,
            max_peaks: c.max_peaks,
            min_elevation_deg: 0.0,
            min_power: 0.0,
        }
    }

    /// Floor the threshold `floor_db` above the matched-filter output of
    /// white noise with per-antenna variance `noise_var`.
    pub fn with_noise_floor(mut self, noise_var: f64, floor_db: f64) -> Self {
        self.min_power = noise_var * crate::math::db_to_lin(floor_db);
        self
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    let n = v.len();
    let mid = n / 2;
    let (_, hi, _) = v.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let hi = *hi;
    if n % 2 == 1 {
        hi
    } else {
        let lo = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

/// Vertex offset of a parabola through three samples, in grid steps.
fn parabolic_offset(left: f64, centre: f64, right: f64) -> f64 {
    let (l, c, r) = if left > 0.0 && centre > 0.0 && right > 0.0 {
        (left.ln(), centre.ln(), right.ln())
    } else {
        (left, centre, right)
    };
    let denom = l - 2.0 * c + r;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
}

// At high elevation the mainlobe is a tilted ridge whose grid maximum can
// sit two cells from the true peak.
const POLISH_CELLS: f64 = 3.0;
const POLISH_MAX_ITER: usize = 2000;

/// Pattern search on `|a(az,el)ᴴy|²` from the parabolic estimate, kept
/// within `POLISH_CELLS` grid steps of the winning cell.
fn polish(
    y: &ChannelVector,
    spec: &SpatialSpectrum,
    (az0, el0): (f64, f64),
    cell: (f64, f64),
    min_el: f64,
    others: Option<&InterfererSubspace>,
    tol_deg: f64,
) -> (f64, f64) {
    let (array, g) = (&spec.array, &spec.grid);
    // with other paths projected out of `y`, the conditional ML criterion
    // divides by the energy of a(θ) left in the complement
    let f = |az: f64, el: f64| {
        let a = steering_vector(array, az, el);
        let c = a.inner(y).norm_sqr();
        match others {
            Some(o) => c / o.project_out(&a).norm_sqr().max(f64::MIN_POSITIVE),
            None => c,
        }
    };
    let inside = |az: f64, el: f64| {
        (az - cell.0).abs() <= POLISH_CELLS * g.az_step_deg
            && (el - cell.1).abs() <= POLISH_CELLS * g.el_step_deg
            && el > min_el
            && (-90.0..=90.0).contains(&el)
    };
    // one coordinate sweep around `x`, taking every improving move; the
    // azimuth stride is widened toward the poles so each move covers about
    // `step` of arc
    let explore = |(mut az, mut el): (f64, f64), mut val: f64, step: f64| {
        let s_az = step / el.to_radians().cos().max(0.05);
        for (da, de) in [(s_az, 0.0), (-s_az, 0.0), (0.0, step), (0.0, -step)] {
            let (a, e) = (az + da, el + de);
            if !inside(a, e) {
                continue;
            }
            let v = f(a, e);
            if v > val {
                (az, el, val) = (a, e, v);
            }
        }
        ((az, el), val)
    };

    // Hooke-Jeeves: after a successful sweep, keep stepping along the
    // direction of progress so diagonal ridges are climbed at full stride
    let mut base = (az0, el0);
    let mut best = f(base.0, base.1);
    let mut step = 0.25 * g.az_step_deg.min(g.el_step_deg);
    let mut iter = 0;
    while step > tol_deg && iter < POLISH_MAX_ITER {
        iter += 1;
        let (mut x, mut val) = explore(base, best, step);
        if val <= best {
            step *= 0.5;
            continue;
        }
        while iter < POLISH_MAX_ITER {
            iter += 1;
            let p = (2.0 * x.0 - base.0, 2.0 * x.1 - base.1);
            let stride = angle_sep_deg(x.0, x.1, base.0, base.1);
            (base, best) = (x, val);
            // exploratory moves can cancel the stride; a stub left over
            // would creep at no useful rate
            if stride < 0.5 * step || !inside(p.0, p.1) {
                break;
            }
            let (y, v) = explore(p, f(p.0, p.1), step);
            if v <= best {
                break;
            }
            (x, val) = (y, v);
        }
    }
    base
}

/// Maps a direction onto the array's front half-plane (same response).
pub fn fold_to_front(array: &ArrayGeometry, az_deg: f64) -> f64 {
    let rel = wrap_deg(az_deg - array.boresight_az_deg);
    let rel = if rel.abs() > 90.0 {
        wrap_deg(180.0 - rel)
    } else {
        rel
    };
    wrap_deg(rel + array.boresight_az_deg)
}

/// Grid local maxima (≥ all 8 neighbours, azimuth wrapping when the grid
/// closes) strictly above `threshold`, strongest first, each refined
/// (lazily) to a front-half-plane direction.
fn refined_maxima(
    spec: &SpatialSpectrum,
    threshold: f64,
) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
    let g = &spec.grid;
    let wraps = g.wraps_az();
    let neighbour_az = move |i: usize, d: isize| -> Option<usize> {
        let n = g.n_az as isize;
        let t = i as isize + d;
        if (0..n).contains(&t) {
            Some(t as usize)
        } else if wraps {
            Some(t.rem_euclid(n) as usize)
        } else {
            None
        }
    };
    let neighbour_el = move |j: usize, d: isize| -> Option<usize> {
        let t = j as isize + d;
        if (0..g.n_el as isize).contains(&t) {
            Some(t as usize)
        } else {
            None
        }
    };

    let mut cells: Vec<(f64, usize, usize)> = Vec::new();
    for j in 0..g.n_el {
        for i in 0..g.n_az {
            let p = spec.at(j, i);
            if p <= threshold {
                continue;
            }
            let mut is_max = true;
            'nb: for dj in -1..=1isize {
                for di in -1..=1isize {
                    if dj == 0 && di == 0 {
                        continue;
                    }
                    if let (Some(jj), Some(ii)) = (neighbour_el(j, dj), neighbour_az(i, di)) {
                        if spec.at(jj, ii) > p {
                            is_max = false;
                            break 'nb;
                        }
                    }
                }
            }
            if is_max {
                cells.push((p, j, i));
            }
        }
    }
    cells.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    cells.into_iter().map(move |(p, j, i)| {
        let d_az = match (neighbour_az(i, -1), neighbour_az(i, 1)) {
            (Some(l), Some(r)) => parabolic_offset(spec.at(j, l), p, spec.at(j, r)),
            _ => 0.0,
        };
        let d_el = match (neighbour_el(j, -1), neighbour_el(j, 1)) {
            (Some(l), Some(r)) => parabolic_offset(spec.at(l, i), p, spec.at(r, i)),
            _ => 0.0,
        };
        let (az, el) = polish(
            &spec.source,
            spec,
            (
                g.az(i) + d_az * g.az_step_deg,
                (g.el(j) + d_el * g.el_step_deg).clamp(-90.0, 90.0),
            ),
            (g.az(i), g.el(j)),
            f64::NEG_INFINITY,
            None,
            FINE_TOL_DEG,
        );
        (p, fold_to_front(&spec.array, az), el)
    })
}

const FINE_TOL_DEG: f64 = 1e-7;

/// Re-fit schedule: after each new path, and once at the end.
#[derive(Clone, Copy)]
struct Refit {
    passes: usize,
    tol_deg: f64,
}

const INTERIM_REFIT: Refit = Refit {
    passes: 3,
    tol_deg: 1e-3,
};
const FINAL_REFIT: Refit = Refit {
    passes: 20,
    tol_deg: FINE_TOL_DEG,
};

/// Re-fits every direction against all the others (conditional ML),
/// keeping each on its side of the reporting floor.
fn refit(spec: &SpatialSpectrum, dirs: &mut [(f64, f64)], min_el: f64, how: Refit) {
    if dirs.len() < 2 {
        return;
    }
    let above: Vec<bool> = dirs.iter().map(|d| d.1 > min_el).collect();
    for _ in 0..how.passes {
        let mut shift: f64 = 0.0;
        for i in 0..dirs.len() {
            let mut others = InterfererSubspace::empty();
            for (k, &(az, el)) in dirs.iter().enumerate() {
                if k != i {
                    others.push(steering_vector(&spec.array, az, el));
                }
            }
            let y = others.project_out(&spec.source);
            let floor = if above[i] { min_el } else { f64::NEG_INFINITY };
            let (az, el) = polish(
                &y,
                spec,
                dirs[i],
                dirs[i],
                floor,
                Some(&others),
                how.tol_deg,
            );
            let moved = (fold_to_front(&spec.array, az), el);
            shift = shift.max(angle_sep_deg(moved.0, moved.1, dirs[i].0, dirs[i].1));
            dirs[i] = moved;
        }
        if shift < 10.0 * how.tol_deg {
            break;
        }
    }
}

/// Dominant paths above `min_elevation_deg`, in descending order of
/// strength.
///
/// The threshold is `median·10^(threshold/10)` of the input spectrum
/// (floored at `min_power`). Peaks are taken one at a time: the strongest
/// grid local maximum that respects `min_separation_deg` against the peaks
/// already accepted (separation is `max(|Δaz| wrapped, |Δel|)`) is refined,
/// every accepted direction is re-fitted against the others, their steering
/// vectors are projected out of the source vector, and the spectrum of the
/// residual is searched again. Without this deflation every sidelobe of a
/// strong path would pass a median-relative threshold; without the re-fit a
/// first pick on the merged lobe of two close paths leaves residue that
/// reads as extra paths.
///
/// Paths at or below `min_elevation_deg` are deflated like any other but
/// not reported. The search stops after `max_peaks` reported paths or
/// `2·max_peaks` paths in total.
pub fn detect_peaks(spec: &SpatialSpectrum, opts: &PeakOptions) -> Vec<PathEstimate> {
    if spec.grid.is_empty() || opts.max_peaks == 0 {
        return Vec::new();
    }
    let threshold = (median(&spec.power) * crate::math::db_to_lin(opts.threshold_over_median_db))
        .max(opts.min_power);
    let m_total = spec.array.n_antennas() as f64;
    let min_el = opts.min_elevation_deg;
    let reported = |dirs: &[(f64, f64)]| dirs.iter().filter(|d| d.1 > min_el).count();
    let budget = 2 * opts.max_peaks;
    let mut dirs: Vec<(f64, f64)> = Vec::new();
    let mut residual: Option<SpatialSpectrum> = None;

    while reported(&dirs) < opts.max_peaks && dirs.len() < budget {
        let current = residual.as_ref().unwrap_or(spec);
        let next = refined_maxima(current, threshold).find(|&(_, az, el)| {
            dirs.iter()
                .all(|&(qa, qe)| angle_sep_deg(qa, qe, az, el) >= opts.min_separation_deg)
        });
        let Some((_, az, el)) = next else { break };
        dirs.push((az, el));
        refit(spec, &mut dirs, min_el, INTERIM_REFIT);
        if reported(&dirs) == opts.max_peaks {
            break;
        }
        let mut subspace = InterfererSubspace::empty();
        let full_rank = dirs
            .iter()
            .all(|&(az, el)| subspace.push(steering_vector(&spec.array, az, el)));
        if !full_rank {
            break;
        }
        let y = subspace.project_out(&spec.source);
        match matched_filter_spectrum(&y, &spec.array, &spec.grid) {
            Ok(s) => residual = Some(s),
            Err(_) => break,
        }
    }

    refit(spec, &mut dirs, min_el, FINAL_REFIT);

    // two estimates may converge onto one path; keep the earlier (stronger)
    let mut kept: Vec<(f64, f64)> = Vec::with_capacity(dirs.len());
    for d in dirs {
        if kept
            .iter()
            .all(|k| angle_sep_deg(k.0, k.1, d.0, d.1) >= opts.min_separation_deg)
        {
            kept.push(d);
        }
    }

    kept.into_iter()
        .filter(|d| d.1 > min_el)
        .map(|(az, el)| {
            let amplitude = path_amplitude(&spec.source, &spec.array, az, el);
            PathEstimate {
                az_deg: az,
                el_deg: el,
                power: amplitude.norm_sqr() * m_total,
                amplitude,
            }
        })
        .collect()
}

/// Drops peaks within `guard_deg` of a user's own direction.
pub fn exclude_near(
    peaks: &[PathEstimate],
    az_deg: f64,
    el_deg: f64,
    guard_deg: f64,
) -> Vec<PathEstimate> {
    peaks
        .iter()
        .filter(|p| angle_sep_deg(p.az_deg, p.el_deg, az_deg, el_deg) > guard_deg)
        .copied()
        .collect()
}

/// Orthonormal basis of the span of a set of steering vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterfererSubspace {
    basis: Vec<ChannelVector>,
}

/// Columns whose residual energy after orthogonalisation falls below this
/// fraction of their own energy are treated as duplicates.
const RANK_TOL: f64 = 1e-6;

impl InterfererSubspace {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds the basis strongest direction first; a direction that is
    /// (numerically) already spanned is dropped.
    pub fn new(dirs: &[PathEstimate], array: &ArrayGeometry) -> Self {
        let mut order: Vec<&PathEstimate> = dirs.iter().collect();
        order.sort_by(|a, b| b.power.total_cmp(&a.power));
        let mut s = Self::empty();
        for d in order {
            s.push(steering_vector(array, d.az_deg, d.el_deg));
        }
        s
    }

    /// Adds `v` to the span; returns false if it was already (numerically)
    /// inside it.
    pub fn push(&mut self, mut v: ChannelVector) -> bool {
        let e0 = v.norm_sqr();
        // two Gram-Schmidt passes keep the basis orthogonal to rounding
        for _ in 0..2 {
            for q in &self.basis {
                let c = q.inner(&v);
                v.axpy(-c, q);
            }
        }
        let e = v.norm_sqr();
        if e <= RANK_TOL * e0 || e == 0.0 {
            return false;
        }
        self.basis.push(v.scale_re(1.0 / e.sqrt()));
        true
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `(I − QQᴴ)·h`
    pub fn project_out(&self, h: &ChannelVector) -> ChannelVector {
        let mut out = h.clone();
        for _ in 0..2 {
            for q in &self.basis {
                let c = q.inner(&out);
                out.axpy(-c, q);
            }
        }
        out
    }
}

/// `(I − A(AᴴA)⁻¹Aᴴ)·h_est` with `A` the steering vectors of `uav_dirs`.
pub fn decontaminate_gue(
    h_est: &ChannelVector,
    uav_dirs: &[PathEstimate],
    array: &ArrayGeometry,
) -> ChannelVector {
    if uav_dirs.is_empty() {
        return h_est.clone();
    }
    InterfererSubspace::new(uav_dirs, array).project_out(h_est)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonPath {
    /// The round-0 peak.
    pub path: PathEstimate,
    /// Smallest matched power across rounds.
    pub min_power: f64,
    /// Number of round-0 peaks present in every round.
    pub candidates: usize,
    /// `candidates != 1`. With none, `path` is the strongest round-0 peak;
    /// with several, it is the one with the highest minimum power.
    pub ambiguous: bool,
}

/// Finds the round-0 peak that has a match within `tol_deg` in every other
/// round, preferring the one with the highest minimum power across rounds.
pub fn identify_common_path(rounds: &[Vec<PathEstimate>], tol_deg: f64) -> Result<CommonPath> {
    let first = rounds.first().ok_or(Error::NoRounds)?;
    let strongest = first
        .iter()
        .max_by(|a, b| a.power.total_cmp(&b.power))
        .ok_or(Error::NoPaths)?;

    let mut best: Option<CommonPath> = None;
    let mut candidates = 0;
    for p in first {
        let mut min_power = p.power;
        let mut everywhere = true;
        for round in &rounds[1..] {
            let matched = round
                .iter()
                .filter(|q| angle_sep_deg(p.az_deg, p.el_deg, q.az_deg, q.el_deg) <= tol_deg)
                .map(|q| q.power)
                .fold(None, |acc: Option<f64>, x| {
                    Some(acc.map_or(x, |a| a.max(x)))
                });
            match matched {
                Some(pw) => min_power = min_power.min(pw),
                None => {
                    everywhere = false;
                    break;
                }
            }
        }
        if !everywhere {
            continue;
        }
        candidates += 1;
        if best.is_none_or(|b| min_power > b.min_power) {
            best = Some(CommonPath {
                path: *p,
                min_power,
                candidates: 0,
                ambiguous: false,
            });
        }
    }
    let mut c = best.unwrap_or(CommonPath {
        path: *strongest,
        min_power: strongest.power,
        candidates: 0,
        ambiguous: true,
    });
    c.candidates = candidates;
    c.ambiguous = candidates != 1;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavEstimate {
    pub estimate: ChannelVector,
    pub path: PathEstimate,
    pub ambiguous: bool,
}

/// Rank-1 rebuild `amplitude₀·a(az*, el*)` along the common path.
pub fn decontaminate_uav(
    rounds: &[Vec<PathEstimate>],
    array: &ArrayGeometry,
    tol_deg: f64,
) -> Result<UavEstimate> {
    let common = identify_common_path(rounds, tol_deg)?;
    let p = common.path;
    Ok(UavEstimate {
        estimate: steering_vector(array, p.az_deg, p.el_deg).scale(p.amplitude),
        path: p,
        ambiguous: common.ambiguous,
    })
}
