//! Wolfe's min-norm-point algorithm over a finite point set's convex hull.
//!
//! Used for exact Euclidean distance from an exterior point to a polytope
//! (the polytope is translated so the query sits at the origin). Works in
//! any of the ambient dimensions this crate uses (2..=6).

use nalgebra::{DMatrix, DVector};

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimum-norm point of conv(points). Returns (norm, coordinates).
pub fn min_norm_point(points: &[Vec<f64>], d: usize) -> (f64, Vec<f64>) {
    assert!(!points.is_empty());
    // Start from the smallest-norm input point.
    let start = (0..points.len())
        .min_by(|&a, &b| {
            dot(&points[a], &points[a])
                .partial_cmp(&dot(&points[b], &points[b]))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap();
    let mut active: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x: Vec<f64> = points[start].clone();

    for _ in 0..1000 {
        let xx = dot(&x, &x);
        if xx < 1e-28 {
            return (0.0, x);
        }
        // Most improving vertex in direction -x.
        let q = (0..points.len())
            .min_by(|&a, &b| {
                dot(&x, &points[a])
                    .partial_cmp(&dot(&x, &points[b]))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if xx - dot(&x, &points[q]) <= 1e-12 * xx.max(1e-12) {
            break;
        }
        if active.contains(&q) {
            break;
        }
        active.push(q);
        weights.push(0.0);

        // Minor cycle: pull x to the affine minimizer over the active set,
        // dropping points whose weight would go negative.
        loop {
            let m = active.len();
            let mut kkt = DMatrix::zeros(m + 1, m + 1);
            for i in 0..m {
                for j in 0..m {
                    kkt[(i, j)] = dot(&points[active[i]], &points[active[j]]);
                }
                kkt[(i, m)] = 1.0;
                kkt[(m, i)] = 1.0;
            }
            let mut rhs = DVector::zeros(m + 1);
            rhs[m] = 1.0;
            let alpha: Vec<f64> = match kkt.clone().lu().solve(&rhs) {
                Some(sol) => (0..m).map(|i| sol[i]).collect(),
                None => {
                    // Singular Gram system: drop the oldest active point.
                    if m <= 1 {
                        break;
                    }
                    active.remove(0);
                    weights.remove(0);
                    continue;
                }
            };
            if alpha.iter().all(|&a| a > 1e-12) {
                weights = alpha;
                x = vec![0.0; d];
                for (w, &i) in weights.iter().zip(&active) {
                    for k in 0..d {
                        x[k] += w * points[i][k];
                    }
                }
                break;
            }
            // Step toward alpha until the first weight hits zero.
            let mut theta = 1.0f64;
            for i in 0..m {
                if alpha[i] <= 1e-12 {
                    let denom = weights[i] - alpha[i];
                    if denom > 1e-30 {
                        theta = theta.min(weights[i] / denom);
                    }
                }
            }
            for i in 0..m {
                weights[i] = (1.0 - theta) * weights[i] + theta * alpha[i];
            }
            let mut kept_active = Vec::with_capacity(m);
            let mut kept_weights = Vec::with_capacity(m);
            for i in 0..m {
                if weights[i] > 1e-12 {
                    kept_active.push(active[i]);
                    kept_weights.push(weights[i]);
                }
            }
            if kept_active.is_empty() {
                kept_active.push(active[0]);
                kept_weights.push(1.0);
            }
            active = kept_active;
            weights = kept_weights;
            let s: f64 = kept_weights_sum(&weights);
            for w in &mut weights {
                *w /= s;
            }
            x = vec![0.0; d];
            for (w, &i) in weights.iter().zip(&active) {
                for k in 0..d {
                    x[k] += w * points[i][k];
                }
            }
        }
    }
    (dot(&x, &x).sqrt(), x)
}

fn kept_weights_sum(w: &[f64]) -> f64 {
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Euclidean distance from `query` to conv(points).
pub fn distance_to_hull(points: &[Vec<f64>], query: &[f64], d: usize) -> f64 {
    let translated: Vec<Vec<f64>> = points
        .iter()
        .map(|p| (0..d).map(|k| p[k] - query[k]).collect())
        .collect();
    min_norm_point(&translated, d).0
}
