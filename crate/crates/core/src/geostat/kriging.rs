//! Ordinary kriging with a local neighborhood and an IDW fallback.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{dist, GeostatError, SpatialSamples, COINCIDENT_EPS};
use crate::geostat::variogram::VariogramModel;

/// Neighborhood cap: kriging uses at most this many nearest samples.
pub const MAX_NEIGHBORS: usize = 32;
/// Condition-estimate threshold beyond which the system falls back to IDW.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrigePrediction {
    pub value: f64,
    pub variance: f64,
    /// True when the kriging system was near-singular and IDW was used.
    pub fallback: bool,
}

/// Ordinary kriging at each target from the m = min(N, 32) nearest samples.
///
/// The (m+1)-dimensional system carries the unit-sum constraint through a
/// Lagrange multiplier, so weights always sum to 1; a singular system
/// (condition estimate above [`CONDITION_LIMIT`]) falls back to IDW with
/// power 2 and is flagged.
pub fn krige(
    s: &SpatialSamples,
    vm: &VariogramModel,
    targets: &[(f64, f64)],
) -> Result<Vec<KrigePrediction>, GeostatError> {
    if s.is_empty() {
        return Err(GeostatError::NoSamples);
    }
    targets
        .iter()
        .map(|t| match solve_system(s, vm, *t) {
            Some(sol) => {
                let value = sol
                    .weights
                    .iter()
                    .zip(&sol.neighbors)
                    .map(|(w, &i)| w * s.values()[i])
                    .sum();
                let variance = sol
                    .weights
                    .iter()
                    .zip(&sol.gamma_to_target)
                    .map(|(w, g)| w * g)
                    .sum::<f64>()
                    + sol.lagrange;
                Ok(KrigePrediction {
                    value,
                    variance: variance.max(0.0),
                    fallback: false,
                })
            }
            None => Ok(KrigePrediction {
                value: idw_one(s, *t, 2.0),
                variance: f64::NAN,
                fallback: true,
            }),
        })
        .collect()
}

/// Kriging weights, neighbor sample indices, and the Lagrange multiplier for
/// one target. `None` when the system is near-singular.
pub fn krige_weights(
    s: &SpatialSamples,
    vm: &VariogramModel,
    target: (f64, f64),
) -> Result<Option<(Vec<f64>, Vec<usize>, f64)>, GeostatError> {
    if s.is_empty() {
        return Err(GeostatError::NoSamples);
    }
    Ok(solve_system(s, vm, target).map(|sol| (sol.weights, sol.neighbors, sol.lagrange)))
}

struct Solution {
    weights: Vec<f64>,
    neighbors: Vec<usize>,
    gamma_to_target: Vec<f64>,
    lagrange: f64,
}

fn solve_system(s: &SpatialSamples, vm: &VariogramModel, target: (f64, f64)) -> Option<Solution> {
    let points = s.points();
    // m nearest samples, ties broken by index for determinism.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        dist(points[a], target)
            .partial_cmp(&dist(points[b], target))
            .unwrap()
            .then(a.cmp(&b))
    });
    let m = points.len().min(MAX_NEIGHBORS);
    let neighbors = order[..m].to_vec();

    let mut a = DMatrix::zeros(m + 1, m + 1);
    for (r, &i) in neighbors.iter().enumerate() {
        for (c, &j) in neighbors.iter().enumerate() {
            a[(r, c)] = vm.gamma(dist(points[i], points[j]));
        }
        a[(r, m)] = 1.0;
        a[(m, r)] = 1.0;
    }
    let gamma_to_target: Vec<f64> = neighbors
        .iter()
        .map(|&i| vm.gamma(dist(points[i], target)))
        .collect();
    let mut b = DVector::zeros(m + 1);
    for (r, g) in gamma_to_target.iter().enumerate() {
        b[r] = *g;
    }
    b[m] = 1.0;

    let lu = a.full_piv_lu();
    // Cheap condition estimate from the LU diagonal spread.
    let diag = lu.u().diagonal();
    let (mut dmax, mut dmin) = (0.0f64, f64::INFINITY);
    for v in diag.iter() {
        dmax = dmax.max(v.abs());
        dmin = dmin.min(v.abs());
    }
    if dmin == 0.0 || dmax / dmin > CONDITION_LIMIT {
        return None;
    }
    let x = lu.solve(&b)?;
    Some(Solution {
        weights: x.as_slice()[..m].to_vec(),
        neighbors,
        gamma_to_target,
        lagrange: x[m],
    })
}

/// Inverse-distance weighting with Shepard weights d^(-power).
/// A coincident sample (distance below [`COINCIDENT_EPS`]) wins exactly.
pub fn idw(
    s: &SpatialSamples,
    targets: &[(f64, f64)],
    power: f64,
) -> Result<Vec<f64>, GeostatError> {
    if s.is_empty() {
        return Err(GeostatError::NoSamples);
    }
    Ok(targets.iter().map(|t| idw_one(s, *t, power)).collect())
}

fn idw_one(s: &SpatialSamples, target: (f64, f64), power: f64) -> f64 {
    let points = s.points();
    let values = s.values();
    for (p, v) in points.iter().zip(values) {
        if dist(*p, target) < COINCIDENT_EPS {
            return *v;
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, v) in points.iter().zip(values) {
        let w = dist(*p, target).powf(-power);
        num += w * v;
        den += w;
    }
    num / den
}
