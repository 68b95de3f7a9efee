//! k-means with k-means++ seeding and Lloyd iterations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn distinct_count(points: &[Vec<f64>]) -> usize {
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    sorted.dedup();
    sorted.len()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = d2.iter().rposition(|&d| d > 0.0).unwrap_or(0);
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.gen_range(0..points.len())
        };
        centroids.push(points[pick].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

/// Cluster labels in `0..k'` where `k' = min(k, distinct points)`.
pub(crate) fn kmeans(points: &[Vec<f64>], k: usize, max_iter: usize, seed: u64) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let k = k.min(distinct_count(points)).max(1);
    let dim = points[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(points, k, &mut rng);
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
    for _ in 0..max_iter {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // re-seed empty clusters at the point farthest from its own centroid
        for c in 0..k {
            if counts[c] == 0 {
                let far = points
                    .iter()
                    .zip(&labels)
                    .enumerate()
                    .max_by(|(_, (p, &l)), (_, (q, &m))| {
                        sq_dist(p, &centroids[l]).total_cmp(&sq_dist(q, &centroids[m]))
                    })
                    .map(|(i, _)| i)
                    .unwrap();
                centroids[c] = points[far].clone();
                labels[far] = c;
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_points() {
        let pts = vec![vec![0.0, 0.0], vec![0.0, 0.1], vec![10.0, 0.0], vec![10.0, 0.1]];
        let labels = kmeans(&pts, 2, 300, 1);
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[2], labels[3]);
        assert_ne!(labels[0], labels[2]);
    }

    #[test]
    fn clamps_to_distinct_points() {
        let pts = vec![vec![1.0], vec![1.0], vec![2.0], vec![3.0], vec![3.0]];
        assert_eq!(distinct_count(&pts), 3);
        let labels = kmeans(&pts, 5, 300, 4);
        let mut used = labels.clone();
        used.sort_unstable();
        used.dedup();
        assert_eq!(used.len(), 3);
    }

    #[test]
    fn deterministic() {
        let pts: Vec<Vec<f64>> = (0..40).map(|i| vec![(i * 7 % 13) as f64, (i % 5) as f64]).collect();
        assert_eq!(kmeans(&pts, 4, 300, 9), kmeans(&pts, 4, 300, 9));
    }
}
