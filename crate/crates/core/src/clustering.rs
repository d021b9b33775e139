//! Rule-base initialization by k-means.
//!
//! Centers start from farthest-point seeding (a seeded first pick, then
//! repeatedly the point farthest from every chosen center) and are refined by
//! Lloyd iterations. Each cluster's per-feature standard deviation becomes the
//! width of the matching Gaussian premise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AnfisError, Result};
use crate::fuzzy::{AnfisModel, GaussianMF, Rule};

pub const MAX_LLOYD_ITERATIONS: usize = 300;

/// Minimum spread, as a fraction of the feature's overall standard deviation.
pub const SPREAD_FLOOR_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSeed {
    pub center: Vec<f64>,
    /// Per-feature within-cluster standard deviation, floored.
    pub spread: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Per-feature spread floors for `rows`. Constant features fall back to the
/// fraction of a unit scale.
pub fn spread_floors<R: AsRef<[f64]>>(rows: &[R]) -> Vec<f64> {
    let n = rows.first().map_or(0, |r| r.as_ref().len());
    let m = rows.len() as f64;
    (0..n)
        .map(|j| {
            let mean = rows.iter().map(|r| r.as_ref()[j]).sum::<f64>() / m;
            let var = rows
                .iter()
                .map(|r| (r.as_ref()[j] - mean).powi(2))
                .sum::<f64>()
                / m;
            let sd = var.sqrt();
            SPREAD_FLOOR_FRACTION * if sd > 0.0 { sd } else { 1.0 }
        })
        .collect()
}

/// Partition `rows` into `n_clusters` groups and describe each one.
pub fn cluster<R: AsRef<[f64]>>(rows: &[R], n_clusters: usize, seed: u64) -> Result<Vec<ClusterSeed>> {
    if n_clusters == 0 {
        return Err(AnfisError::config("n_clusters", "must be at least 1"));
    }
    if rows.len() < n_clusters {
        return Err(AnfisError::InsufficientData {
            needed: n_clusters,
            found: rows.len(),
        });
    }
    let points: Vec<&[f64]> = rows.iter().map(AsRef::as_ref).collect();
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(AnfisError::Shape {
            context: "clustering row",
            expected: dim,
            found: bad.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = vec![points[rng.random_range(0..points.len())].to_vec()];
    let mut min_d: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < n_clusters {
        let mut far = 0;
        for (i, &d) in min_d.iter().enumerate() {
            if d > min_d[far] {
                far = i;
            }
        }
        let c = points[far].to_vec();
        for (d, p) in min_d.iter_mut().zip(&points) {
            *d = d.min(sq_dist(p, &c));
        }
        centers.push(c);
    }

    let mut assign: Vec<usize> = vec![usize::MAX; points.len()];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        for (a, p) in assign.iter_mut().zip(&points) {
            let (k, _) = nearest(p, &centers);
            if *a != k {
                *a = k;
                changed = true;
            }
        }

        let mut sums = vec![vec![0.0; dim]; n_clusters];
        let mut counts = vec![0usize; n_clusters];
        for (&k, p) in assign.iter().zip(&points) {
            counts[k] += 1;
            for (s, v) in sums[k].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        for k in 0..n_clusters {
            if counts[k] > 0 {
                centers[k] = sums[k].iter().map(|s| s / counts[k] as f64).collect();
                continue;
            }
            // Empty: take over the point farthest from its own center, as long
            // as that does not empty another cluster.
            let far = (0..points.len())
                .filter(|&i| counts[assign[i]] > 1)
                .max_by(|&a, &b| {
                    let da = sq_dist(points[a], &centers[assign[a]]);
                    let db = sq_dist(points[b], &centers[assign[b]]);
                    da.total_cmp(&db).then(b.cmp(&a))
                });
            if let Some(i) = far {
                counts[assign[i]] -= 1;
                assign[i] = k;
                counts[k] = 1;
                centers[k] = points[i].to_vec();
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let floors = spread_floors(rows);
    let seeds = (0..n_clusters)
        .map(|k| {
            let members: Vec<&[f64]> = points
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == k)
                .map(|(p, _)| *p)
                .collect();
            let spread = (0..dim)
                .map(|j| {
                    let sd = if members.is_empty() {
                        0.0
                    } else {
                        let n = members.len() as f64;
                        members
                            .iter()
                            .map(|p| (p[j] - centers[k][j]).powi(2))
                            .sum::<f64>()
                            / n
                    }
                    .sqrt();
                    sd.max(floors[j])
                })
                .collect();
            ClusterSeed {
                center: centers[k].clone(),
                spread,
            }
        })
        .collect();
    Ok(seeds)
}

/// One rule per seed; consequents start at zero.
pub fn seed_model(seeds: &[ClusterSeed], n_inputs: usize) -> Result<AnfisModel> {
    if seeds.is_empty() {
        return Err(AnfisError::InvalidArgument("no cluster seeds".into()));
    }
    let rules = seeds
        .iter()
        .map(|s| {
            if s.center.len() != n_inputs || s.spread.len() != n_inputs {
                return Err(AnfisError::Shape {
                    context: "cluster seed",
                    expected: n_inputs,
                    found: s.center.len().min(s.spread.len()),
                });
            }
            let premise = s
                .center
                .iter()
                .zip(&s.spread)
                .map(|(&c, &w)| GaussianMF::new(c, w))
                .collect::<Result<Vec<_>>>()?;
            Rule::with_zero_consequent(premise)
        })
        .collect::<Result<Vec<_>>>()?;
    AnfisModel::new(rules)
}

/// Rows (in the model's scaled space) whose best rule fires at or below
/// `exp(-8 n)`, i.e. farther than about four widths from every center.
pub fn coverage_gaps<R: AsRef<[f64]>>(model: &AnfisModel, scaled_rows: &[R]) -> Vec<usize> {
    let threshold = -8.0 * model.n_inputs() as f64;
    scaled_rows
        .iter()
        .enumerate()
        .filter(|(_, z)| {
            let best = model
                .rules()
                .iter()
                .map(|r| r.log_strength(z.as_ref()))
                .fold(f64::NEG_INFINITY, f64::max);
            best <= threshold
        })
        .map(|(i, _)| i)
        .collect()
}
