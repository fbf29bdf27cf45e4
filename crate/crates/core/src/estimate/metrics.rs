//! Error measures between estimates and ground truth.

use super::ParameterEstimate;
use crate::config::{azimuth_distance, Target};

/// Per-target absolute errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetError {
    pub position: f64,
    pub velocity: f64,
    pub azimuth: f64,
    pub elevation: f64,
    pub range: f64,
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn target_error(est: &ParameterEstimate, truth: &Target) -> TargetError {
    TargetError {
        position: distance(est.position(), truth.position()),
        velocity: (est.velocity - truth.radial_velocity).abs(),
        azimuth: azimuth_distance(est.azimuth, truth.azimuth),
        elevation: (est.elevation - truth.elevation).abs(),
        range: (est.range - truth.range).abs(),
    }
}

/// Pairs each true target with an estimate, minimizing the summed 3-D
/// error over all assignments. Returns `assignment[q] = estimate index`.
pub fn match_estimates(ests: &[ParameterEstimate], truth: &[Target]) -> Vec<usize> {
    let n = truth.len().min(ests.len());
    let cost: Vec<Vec<f64>> = truth
        .iter()
        .map(|t| ests.iter().map(|e| distance(e.position(), t.position())).collect())
        .collect();
    let mut best = (f64::INFINITY, Vec::new());
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; ests.len()];
    search(&cost, 0, n, &mut perm, &mut used, 0.0, &mut best);
    best.1
}

fn search(
    cost: &[Vec<f64>],
    q: usize,
    n: usize,
    perm: &mut Vec<usize>,
    used: &mut [bool],
    acc: f64,
    best: &mut (f64, Vec<usize>),
) {
    if acc >= best.0 {
        return;
    }
    if q == n {
        *best = (acc, perm.clone());
        return;
    }
    for e in 0..used.len() {
        if !used[e] {
            used[e] = true;
            perm.push(e);
            search(cost, q + 1, n, perm, used, acc + cost[q][e], best);
            perm.pop();
            used[e] = false;
        }
    }
}

/// Errors of matched estimates, in truth order.
pub fn matched_errors(ests: &[ParameterEstimate], truth: &[Target]) -> Vec<TargetError> {
    match_estimates(ests, truth)
        .iter()
        .zip(truth)
        .map(|(&e, t)| target_error(&ests[e], t))
        .collect()
}

/// Angle between the true and estimated line-of-sight directions.
pub fn direction_error(est_az: f64, est_el: f64, truth: &Target) -> f64 {
    let a = crate::config::spherical_to_cartesian(1.0, est_az, est_el);
    let b = crate::config::spherical_to_cartesian(1.0, truth.azimuth, truth.elevation);
    let dot = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
    dot.acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn est(t: &Target) -> ParameterEstimate {
        ParameterEstimate {
            amplitude: Complex64::new(1.0, 0.0),
            ..ParameterEstimate::from_target(t)
        }
    }

    #[test]
    fn matching_undoes_permutation() {
        let truth = vec![
            Target::from_degrees(51.0, 15.0, 25.0, 5.0),
            Target::from_degrees(69.0, 50.0, 30.0, 2.2),
            Target::from_degrees(60.0, 20.0, 55.0, 3.5),
        ];
        let ests = vec![est(&truth[2]), est(&truth[0]), est(&truth[1])];
        assert_eq!(match_estimates(&ests, &truth), vec![1, 2, 0]);
        assert!(matched_errors(&ests, &truth).iter().all(|e| e.position < 1e-12));
    }

    #[test]
    fn direction_error_is_great_circle() {
        let t = Target::from_degrees(10.0, 0.0, 30.0, 0.0);
        assert!((direction_error(0.0, 35f64.to_radians(), &t) - 5f64.to_radians()).abs() < 1e-12);
        assert!(direction_error(t.azimuth, t.elevation, &t) < 1e-7);
    }
}
