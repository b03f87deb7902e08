//! Empirical semivariograms and weighted least-squares model fitting.

use serde::{Deserialize, Serialize};

use super::{dist, GeostatError, SpatialSamples};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariogramFamily {
    Spherical,
    Exponential,
    Gaussian,
}

/// A fitted semivariogram. `range` is the e-folding length for the
/// exponential and gaussian families and the exact cutoff for spherical;
/// gamma(0) = 0 and gamma(h) tends to nugget + partial_sill.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramModel {
    pub family: VariogramFamily,
    pub nugget: f64,
    pub partial_sill: f64,
    pub range: f64,
}

impl VariogramModel {
    pub fn gamma(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let structured = match self.family {
            VariogramFamily::Spherical => {
                if h >= self.range {
                    1.0
                } else {
                    let t = h / self.range;
                    1.5 * t - 0.5 * t * t * t
                }
            }
            VariogramFamily::Exponential => 1.0 - (-h / self.range).exp(),
            VariogramFamily::Gaussian => 1.0 - (-(h / self.range).powi(2)).exp(),
        };
        self.nugget + self.partial_sill * structured
    }
}

/// One lag bin: mean pair distance, semivariance, and pair count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramBin {
    pub lag: f64,
    pub gamma: f64,
    pub pair_count: usize,
}

/// Empirical semivariance in `n_bins` equal-width lag bins up to `max_dist`
/// (default: half the maximum pairwise distance). Pairs exactly at
/// `max_dist` fall in the last bin; empty bins are omitted.
pub fn empirical_variogram(
    s: &SpatialSamples,
    n_bins: usize,
    max_dist: Option<f64>,
) -> Result<Vec<VariogramBin>, GeostatError> {
    let n = s.len();
    if n < 2 {
        return Err(GeostatError::TooFewSamples(n));
    }
    assert!(n_bins >= 1, "need at least one lag bin");
    let points = s.points();
    let values = s.values();

    let mut max_pair = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_pair = max_pair.max(dist(points[i], points[j]));
        }
    }
    let max_dist = max_dist.unwrap_or(max_pair / 2.0);
    let width = max_dist / n_bins as f64;

    let mut dist_sum = vec![0.0; n_bins];
    let mut gamma_sum = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist(points[i], points[j]);
            if d > max_dist {
                continue;
            }
            let bin = ((d / width) as usize).min(n_bins - 1);
            dist_sum[bin] += d;
            gamma_sum[bin] += 0.5 * (values[i] - values[j]).powi(2);
            counts[bin] += 1;
        }
    }

    Ok((0..n_bins)
        .filter(|&b| counts[b] > 0)
        .map(|b| VariogramBin {
            lag: dist_sum[b] / counts[b] as f64,
            gamma: gamma_sum[b] / counts[b] as f64,
            pair_count: counts[b],
        })
        .collect())
}

/// A variogram fit plus its loss and degeneracy flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedVariogram {
    pub model: VariogramModel,
    /// Weighted least-squares loss at the optimum.
    pub loss: f64,
    /// True when the empirical points could not constrain a fit and a
    /// pure-nugget model was substituted.
    pub degenerate: bool,
}

/// Weighted least-squares fit over (nugget, partial_sill, range).
///
/// Weights are pair_count / lag^2. The search runs Nelder-Mead from 16
/// deterministic data-driven starts with parameters projected to
/// nugget >= 0, partial_sill >= 0, range in [min lag, 2 * max lag]. Fewer
/// than 3 bins, or bins with equal semivariance, yield a flagged pure-nugget
/// model instead.
pub fn fit_variogram(
    emp: &[VariogramBin],
    family: VariogramFamily,
) -> Result<FittedVariogram, GeostatError> {
    if emp.is_empty() {
        return Err(GeostatError::TooFewBins(0));
    }
    let gamma_bar = emp.iter().map(|b| b.gamma).sum::<f64>() / emp.len() as f64;
    let max_lag = emp.iter().map(|b| b.lag).fold(0.0f64, f64::max).max(1e-9);
    let min_lag = emp.iter().map(|b| b.lag).fold(f64::INFINITY, f64::min);
    let gamma_spread = emp
        .iter()
        .map(|b| (b.gamma - gamma_bar).abs())
        .fold(0.0f64, f64::max);

    if emp.len() < 3 || gamma_spread <= 1e-12 * gamma_bar.abs().max(1.0) {
        return Ok(FittedVariogram {
            model: VariogramModel {
                family,
                nugget: gamma_bar,
                partial_sill: 0.0,
                range: max_lag,
            },
            loss: 0.0,
            degenerate: true,
        });
    }

    let lo = [0.0, 0.0, min_lag];
    let hi = [f64::INFINITY, f64::INFINITY, 2.0 * max_lag];
    let project = move |p: &[f64; 3]| -> [f64; 3] {
        [
            p[0].clamp(lo[0], hi[0]),
            p[1].clamp(lo[1], hi[1]),
            p[2].clamp(lo[2], hi[2]),
        ]
    };
    let loss = |p: &[f64; 3]| -> f64 {
        let q = project(p);
        let m = VariogramModel {
            family,
            nugget: q[0],
            partial_sill: q[1],
            range: q[2],
        };
        emp.iter()
            .map(|b| {
                let w = b.pair_count as f64 / (b.lag * b.lag).max(1e-12);
                w * (m.gamma(b.lag) - b.gamma).powi(2)
            })
            .sum()
    };

    let gamma_max = emp.iter().map(|b| b.gamma).fold(0.0f64, f64::max);
    // 16 deterministic starts spanning the data-driven parameter ranges.
    let mut starts = Vec::with_capacity(16);
    for nug in [0.0, 0.5 * gamma_bar] {
        for sill in [0.5 * gamma_max, gamma_max] {
            for r in [
                min_lag + 0.125 * (max_lag - min_lag),
                min_lag + 0.375 * (max_lag - min_lag),
                max_lag,
                1.5 * max_lag,
            ] {
                starts.push([nug, sill.max(1e-12), r]);
            }
        }
    }

    let mut best: Option<([f64; 3], f64)> = None;
    for start in starts {
        let (p, l) = nelder_mead(&loss, start, 400);
        // Polish the winner of each start from its own optimum.
        let (p, l2) = nelder_mead(&loss, p, 200);
        let l = l.min(l2);
        if best.as_ref().is_none_or(|(_, bl)| l < *bl) {
            best = Some((p, l));
        }
    }
    let (p, l) = best.expect("at least one start");
    let q = project(&p);
    Ok(FittedVariogram {
        model: VariogramModel {
            family,
            nugget: q[0],
            partial_sill: q[1],
            range: q[2],
        },
        loss: l,
        degenerate: false,
    })
}

/// Standard Nelder-Mead on 3 parameters with fixed coefficients
/// (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
fn nelder_mead(
    f: &impl Fn(&[f64; 3]) -> f64,
    start: [f64; 3],
    max_iter: usize,
) -> ([f64; 3], f64) {
    let mut simplex: Vec<[f64; 3]> = vec![start];
    for d in 0..3 {
        let mut v = start;
        let step = if v[d].abs() > 1e-8 { 0.1 * v[d].abs() } else { 0.05 * (1.0 + start[2].abs()) };
        v[d] += step;
        simplex.push(v);
    }
    let mut fx: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| fx[a].partial_cmp(&fx[b]).unwrap());
        let (best, worst, second_worst) = (order[0], order[3], order[2]);
        if (fx[worst] - fx[best]).abs() <= 1e-14 * (1.0 + fx[best].abs()) {
            break;
        }

        let mut centroid = [0.0; 3];
        for (i, p) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for d in 0..3 {
                centroid[d] += p[d] / 3.0;
            }
        }
        let reflect = |t: f64| -> [f64; 3] {
            let mut p = [0.0; 3];
            for d in 0..3 {
                p[d] = centroid[d] + t * (centroid[d] - simplex[worst][d]);
            }
            p
        };

        let pr = reflect(1.0);
        let fr = f(&pr);
        if fr < fx[best] {
            let pe = reflect(2.0);
            let fe = f(&pe);
            if fe < fr {
                simplex[worst] = pe;
                fx[worst] = fe;
            } else {
                simplex[worst] = pr;
                fx[worst] = fr;
            }
        } else if fr < fx[second_worst] {
            simplex[worst] = pr;
            fx[worst] = fr;
        } else {
            let pc = reflect(-0.5);
            let fc = f(&pc);
            if fc < fx[worst] {
                simplex[worst] = pc;
                fx[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[best];
                for (i, p) in simplex.iter_mut().enumerate() {
                    if i == best {
                        continue;
                    }
                    for d in 0..3 {
                        p[d] = anchor[d] + 0.5 * (p[d] - anchor[d]);
                    }
                    fx[i] = f(p);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..4 {
        if fx[i] < fx[best] {
            best = i;
        }
    }
    (simplex[best], fx[best])
}
