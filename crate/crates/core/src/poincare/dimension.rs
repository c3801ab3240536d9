//! Curve-versus-area classification of section point sets by their
//! correlation dimension (Grassberger-Procaccia).

use serde::{Deserialize, Serialize};

use super::SectionRecord;

/// Below this dimension a point set counts as a curve.
pub const CURVE_THRESHOLD: f64 = 1.3;
/// Above this dimension a point set counts as filling an area.
pub const AREA_THRESHOLD: f64 = 1.7;
/// Fewer points than this give no dimension estimate.
pub const MIN_POINTS: usize = 50;

/// Point sets are thinned to at most this many points by a fixed stride.
const MAX_POINTS: usize = 4500;
/// Scaling range, as quantiles of the pair-distance distribution.
const LOW_QUANTILE: f64 = 0.003;
const HIGH_QUANTILE: f64 = 0.03;
const RADII: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    CurveLike,
    AreaLike,
    Ambiguous,
}

impl Classification {
    pub fn from_dimension(dimension: Option<f64>) -> Self {
        match dimension {
            Some(d) if d < CURVE_THRESHOLD => Classification::CurveLike,
            Some(d) if d > AREA_THRESHOLD => Classification::AreaLike,
            _ => Classification::Ambiguous,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Classification::CurveLike => "curve-like",
            Classification::AreaLike => "area-like",
            Classification::Ambiguous => "ambiguous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryClass {
    pub trajectory_id: usize,
    pub points: usize,
    pub dimension: Option<f64>,
    pub class: Classification,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// Slope of `ln C(r)` against `ln r` over radii spanning the lower pair-distance
/// quantiles, where `C(r)` is the fraction of point pairs closer than `r`.
pub fn correlation_dimension<const D: usize>(points: &[[f64; D]]) -> Option<f64> {
    if points.len() < MIN_POINTS {
        return None;
    }
    let stride = points.len().div_ceil(MAX_POINTS);
    let pts: Vec<[f64; D]> = points.iter().step_by(stride).copied().collect();
    let mut d = Vec::with_capacity(pts.len() * (pts.len() - 1) / 2);
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let r = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            if r > 0.0 {
                d.push(r);
            }
        }
    }
    if d.len() < 2 {
        return None;
    }
    d.sort_by(f64::total_cmp);
    let (lo, hi) = (quantile(&d, LOW_QUANTILE), quantile(&d, HIGH_QUANTILE));
    if !(lo > 0.0 && hi > lo) {
        return None;
    }
    let mut xs = Vec::with_capacity(RADII);
    let mut ys = Vec::with_capacity(RADII);
    for k in 0..RADII {
        let r = lo * (hi / lo).powf(k as f64 / (RADII - 1) as f64);
        let count = d.partition_point(|&x| x < r);
        if count > 0 {
            xs.push(r.ln());
            ys.push((count as f64 / d.len() as f64).ln());
        }
    }
    if xs.len() < 3 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

pub fn classify_points<const D: usize>(points: &[[f64; D]]) -> (Option<f64>, Classification) {
    let dim = correlation_dimension(points);
    (dim, Classification::from_dimension(dim))
}

/// Classifies the records of trajectories `0..trajectories`.
///
/// Distances are taken between full reduced states rather than the plotted
/// projection, so a curve that folds over itself in the projection still
/// scales as a curve. The section coordinate is constant on the records and
/// does not contribute.
pub fn classify_records(records: &[SectionRecord], trajectories: usize) -> Vec<TrajectoryClass> {
    let mut groups: Vec<Vec<[f64; 4]>> = vec![Vec::new(); trajectories];
    for r in records {
        if r.trajectory_id < trajectories {
            groups[r.trajectory_id].push(r.state);
        }
    }
    groups
        .iter()
        .enumerate()
        .map(|(id, pts)| {
            let (dimension, class) = classify_points(pts);
            TrajectoryClass { trajectory_id: id, points: pts.len(), dimension, class }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn circle_is_one_dimensional() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let pts: Vec<[f64; 2]> = (0..800)
            .map(|k| {
                let a = std::f64::consts::TAU * golden * k as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        let (d, c) = classify_points(&pts);
        assert!((d.unwrap() - 1.0).abs() < 0.15, "{d:?}");
        assert_eq!(c, Classification::CurveLike);
    }

    #[test]
    fn filled_square_is_two_dimensional() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<[f64; 2]> = (0..800).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let (d, c) = classify_points(&pts);
        assert!((d.unwrap() - 2.0).abs() < 0.2, "{d:?}");
        assert_eq!(c, Classification::AreaLike);
    }

    #[test]
    fn space_curve_with_close_projected_branches_is_one_dimensional() {
        // (cos a, sin 2a, sin a) projects onto the first two coordinates as a
        // figure eight whose branches touch at the origin.
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let pts: Vec<[f64; 3]> = (0..1500)
            .map(|k| {
                let a = std::f64::consts::TAU * golden * k as f64;
                [a.cos(), (2.0 * a).sin(), a.sin()]
            })
            .collect();
        let (d, c) = classify_points(&pts);
        assert!((d.unwrap() - 1.0).abs() < 0.15, "{d:?}");
        assert_eq!(c, Classification::CurveLike);
    }

    #[test]
    fn too_few_points_are_ambiguous() {
        let pts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert_eq!(classify_points(&pts), (None, Classification::Ambiguous));
    }
}
