//! Spatial geometry and experimental designs: distance metrics, location
//! containers, regular grids, maximin Latin hypercube sampling, and
//! directional semivariograms.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in kilometres, used when a spherical metric is built
/// without an explicit radius.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Distance metric attached to a set of locations.
///
/// Spherical metrics take coordinates as (longitude, latitude) in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    /// Straight-line distance through the sphere, 2R sin(Δσ/2); preserves
    /// positive definiteness of kernels valid on R³.
    Chordal { radius: f64 },
    /// Great-circle (arc) distance R Δσ.
    GreatCircle { radius: f64 },
}

impl Metric {
    pub fn chordal_earth() -> Metric {
        Metric::Chordal { radius: EARTH_RADIUS_KM }
    }

    pub fn great_circle_earth() -> Metric {
        Metric::GreatCircle { radius: EARTH_RADIUS_KM }
    }

    fn is_spherical(&self) -> bool {
        !matches!(self, Metric::Euclidean)
    }

    /// Distance between two points of equal dimension.
    pub fn distance(&self, s: &[f64], u: &[f64]) -> Result<f64> {
        if s.len() != u.len() {
            return Err(Error::Dimension(format!(
                "point dimensions differ: {} vs {}",
                s.len(),
                u.len()
            )));
        }
        match self {
            Metric::Euclidean => Ok(s
                .iter()
                .zip(u)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()),
            Metric::Chordal { radius } => {
                let half_angle = half_central_angle(s, u)?;
                Ok(2.0 * radius * half_angle.sin())
            }
            Metric::GreatCircle { radius } => {
                let half_angle = half_central_angle(s, u)?;
                Ok(2.0 * radius * half_angle)
            }
        }
    }
}

/// Half the central angle between two (lon, lat) points in degrees, from the
/// haversine formula.
fn half_central_angle(s: &[f64], u: &[f64]) -> Result<f64> {
    if s.len() != 2 {
        return Err(Error::Dimension(
            "spherical metrics require (lon, lat) coordinates".into(),
        ));
    }
    let (lon1, lat1) = (s[0].to_radians(), s[1].to_radians());
    let (lon2, lat2) = (u[0].to_radians(), u[1].to_radians());
    let sdlat = ((lat2 - lat1) / 2.0).sin();
    let sdlon = ((lon2 - lon1) / 2.0).sin();
    let hav = sdlat * sdlat + lat1.cos() * lat2.cos() * sdlon * sdlon;
    Ok(hav.clamp(0.0, 1.0).sqrt().asin())
}

/// A set of n locations in d coordinates with an attached metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Locations {
    coords: Vec<Vec<f64>>,
    metric: Metric,
}

impl Locations {
    pub fn new(coords: Vec<Vec<f64>>, metric: Metric) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("need at least one location"));
        }
        let d = coords[0].len();
        for (i, row) in coords.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Dimension(format!(
                    "location {i} has dimension {}, expected {d}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("location {i} has a non-finite coordinate")));
            }
        }
        if metric.is_spherical() {
            if d != 2 {
                return Err(Error::Dimension(
                    "spherical metrics require 2-dimensional (lon, lat) coordinates".into(),
                ));
            }
            for (i, row) in coords.iter().enumerate() {
                let (lon, lat) = (row[0], row[1]);
                if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
                    return Err(Error::invalid(format!(
                        "location {i}: lon must be in [-180, 180] and lat in [-90, 90], got ({lon}, {lat})"
                    )));
                }
            }
        } else if !(1..=3).contains(&d) {
            return Err(Error::Dimension(format!(
                "euclidean locations support d in {{1, 2, 3}}, got {d}"
            )));
        }
        Ok(Locations { coords, metric })
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn dim(&self) -> usize {
        self.coords[0].len()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.coords
    }

    /// Largest single-coordinate extent, a cheap proxy for the domain
    /// diameter used to scale default optimizer bounds.
    pub fn extent(&self) -> f64 {
        let d = self.dim();
        let mut widest = 0.0f64;
        for k in 0..d {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for row in &self.coords {
                lo = lo.min(row[k]);
                hi = hi.max(row[k]);
            }
            widest = widest.max(hi - lo);
        }
        widest
    }

    /// Concatenate two location sets sharing the same metric and dimension.
    pub fn concat(&self, other: &Locations) -> Result<Locations> {
        if self.metric != other.metric {
            return Err(Error::Dimension(
                "cannot concatenate locations with different metrics".into(),
            ));
        }
        let mut coords = self.coords.clone();
        coords.extend(other.coords.iter().cloned());
        Locations::new(coords, self.metric)
    }
}

/// Symmetric matrix of pairwise distances with zero diagonal.
pub fn pairwise_dist(locs: &Locations) -> Result<Array2<f64>> {
    let n = locs.n();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = locs.metric.distance(locs.point(i), locs.point(j))?;
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    Ok(d)
}

/// Rectangular matrix of distances between two location sets (rows index
/// `a`, columns index `b`). The metrics must agree.
pub fn cross_dist(a: &Locations, b: &Locations) -> Result<Array2<f64>> {
    if a.metric != b.metric {
        return Err(Error::Dimension("metrics differ between location sets".into()));
    }
    let mut d = Array2::zeros((a.n(), b.n()));
    for i in 0..a.n() {
        for j in 0..b.n() {
            d[[i, j]] = a.metric.distance(a.point(i), b.point(j))?;
        }
    }
    Ok(d)
}

fn unit_lhs(n: usize, d: usize, rng: &mut ChaCha20Rng) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; d]; n];
    for k in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        for (i, &s) in strata.iter().enumerate() {
            let u: f64 = rng.random();
            pts[i][k] = (s as f64 + u) / n as f64;
        }
    }
    pts
}

fn min_pairwise_sq(pts: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d2: f64 = pts[i]
                .iter()
                .zip(&pts[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            best = best.min(d2);
        }
    }
    best
}

/// Maximin Latin hypercube design: the best of `n_candidates` seeded LHS
/// draws by minimum pairwise distance in the unit cube, then mapped to
/// `bounds`. Deterministic given `seed`; candidate c uses RNG stream c, so
/// the winner does not depend on evaluation order.
pub fn maximin_lhs(
    n: usize,
    bounds: &[(f64, f64)],
    seed: u64,
    n_candidates: usize,
) -> Result<Locations> {
    if n < 2 {
        return Err(Error::invalid("maximin_lhs needs n >= 2"));
    }
    if bounds.is_empty() || bounds.len() > 3 {
        return Err(Error::Dimension(format!(
            "maximin_lhs supports 1 to 3 dimensions, got {}",
            bounds.len()
        )));
    }
    for &(lo, hi) in bounds {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!("invalid bounds ({lo}, {hi})")));
        }
    }
    let n_candidates = n_candidates.max(1);
    let d = bounds.len();
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for c in 0..n_candidates {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let pts = unit_lhs(n, d, &mut rng);
        let score = min_pairwise_sq(&pts);
        // strictly-greater keeps the lowest candidate index on ties
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, pts));
        }
    }
    let (_, pts) = best.expect("at least one candidate");
    let coords = pts
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(bounds)
                .map(|(u, &(lo, hi))| lo + u * (hi - lo))
                .collect()
        })
        .collect();
    Locations::new(coords, Metric::Euclidean)
}

/// Axis-aligned equally spaced grid including both endpoints, `counts[k]`
/// points along dimension k. The last coordinate varies fastest.
pub fn regular_grid(bounds: &[(f64, f64)], counts: &[usize]) -> Result<Locations> {
    if bounds.len() != counts.len() {
        return Err(Error::Dimension("bounds and counts lengths differ".into()));
    }
    if bounds.is_empty() || bounds.len() > 3 {
        return Err(Error::Dimension(format!(
            "regular_grid supports 1 to 3 dimensions, got {}",
            bounds.len()
        )));
    }
    for (&(lo, hi), &c) in bounds.iter().zip(counts) {
        if c < 2 {
            return Err(Error::invalid("regular_grid needs at least 2 points per dimension"));
        }
        if !(lo < hi) {
            return Err(Error::invalid(format!("invalid bounds ({lo}, {hi})")));
        }
    }
    let d = bounds.len();
    let total: usize = counts.iter().product();
    let mut coords = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    loop {
        let pt: Vec<f64> = (0..d)
            .map(|k| {
                let (lo, hi) = bounds[k];
                lo + (hi - lo) * idx[k] as f64 / (counts[k] - 1) as f64
            })
            .collect();
        coords.push(pt);
        // odometer increment, last dimension fastest
        let mut k = d;
        loop {
            if k == 0 {
                return Locations::new(coords, Metric::Euclidean);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// One distance bin of a directional semivariogram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemivarBin {
    pub h_lo: f64,
    pub h_hi: f64,
    pub n_pairs: usize,
    /// Classical estimator (1/2|N|) Σ (z_i - z_j)²; `None` when the bin is empty.
    pub gamma: Option<f64>,
}

/// Semivariogram for one direction sector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionalSemivariogram {
    pub angle_deg: f64,
    pub bins: Vec<SemivarBin>,
}

/// Classical directional semivariogram estimator for 2-d locations.
///
/// Pairs are assigned by the direction of s_j - s_i measured from the first
/// axis modulo 180°, to every sector whose center is within `angle_tol_deg`
/// (half-open on the upper side). Bin edges partition distance as `[lo, hi)`.
pub fn directional_semivariogram(
    locs: &Locations,
    z: &[f64],
    angles_deg: &[f64],
    angle_tol_deg: f64,
    bin_edges: &[f64],
) -> Result<Vec<DirectionalSemivariogram>> {
    if locs.dim() != 2 {
        return Err(Error::Dimension(
            "directional semivariograms require 2-d locations".into(),
        ));
    }
    if z.len() != locs.n() {
        return Err(Error::Dimension(format!(
            "{} observations for {} locations",
            z.len(),
            locs.n()
        )));
    }
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "bin_edges must be strictly increasing with at least two edges",
        ));
    }
    if !(angle_tol_deg > 0.0) {
        return Err(Error::invalid("angle_tol_deg must be positive"));
    }
    let n_bins = bin_edges.len() - 1;
    let mut acc = vec![vec![(0usize, 0.0f64); n_bins]; angles_deg.len()];
    let n = locs.n();
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = locs.metric.distance(locs.point(i), locs.point(j))?;
            if dist < bin_edges[0] || dist >= bin_edges[n_bins] {
                continue;
            }
            let bin = match bin_edges[1..].iter().position(|&e| dist < e) {
                Some(b) => b,
                None => continue,
            };
            let dx = locs.point(j)[0] - locs.point(i)[0];
            let dy = locs.point(j)[1] - locs.point(i)[1];
            let theta = dy.atan2(dx).to_degrees().rem_euclid(180.0);
            let dz2 = (z[i] - z[j]) * (z[i] - z[j]);
            for (a, &angle) in angles_deg.iter().enumerate() {
                let mut sep = (theta - angle.rem_euclid(180.0)).abs();
                sep = sep.min(180.0 - sep);
                if sep < angle_tol_deg {
                    let cell = &mut acc[a][bin];
                    cell.0 += 1;
                    cell.1 += dz2;
                }
            }
        }
    }
    Ok(angles_deg
        .iter()
        .enumerate()
        .map(|(a, &angle)| DirectionalSemivariogram {
            angle_deg: angle,
            bins: (0..n_bins)
                .map(|b| {
                    let (count, sum) = acc[a][b];
                    SemivarBin {
                        h_lo: bin_edges[b],
                        h_hi: bin_edges[b + 1],
                        n_pairs: count,
                        gamma: if count > 0 {
                            Some(sum / (2.0 * count as f64))
                        } else {
                            None
                        },
                    }
                })
                .collect(),
        })
        .collect())
}

/// Omnidirectional semivariogram: one sector wide enough to catch every pair.
pub fn semivariogram(locs: &Locations, z: &[f64], bin_edges: &[f64]) -> Result<Vec<SemivarBin>> {
    let mut v = directional_semivariogram(locs, z, &[0.0], 90.0001, bin_edges)?;
    Ok(v.remove(0).bins)
}

/// Coordinates as an n×d array.
pub fn coords_array(locs: &Locations) -> Array2<f64> {
    let mut a = Array2::zeros((locs.n(), locs.dim()));
    for i in 0..locs.n() {
        for (k, &v) in locs.point(i).iter().enumerate() {
            a[[i, k]] = v;
        }
    }
    a
}

/// Observation slice as an owned Array1.
pub fn values_array(z: &[f64]) -> Array1<f64> {
    Array1::from_vec(z.to_vec())
}
