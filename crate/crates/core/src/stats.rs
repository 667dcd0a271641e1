//! Chi-square goodness-of-fit and homogeneity tests used by the sampling audits.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn upper_tail(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
}

/// Goodness of fit of `counts` against the uniform distribution.
pub fn chi_square_uniform(counts: &[u64]) -> ChiSquare {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let dof = counts.len().saturating_sub(1);
    ChiSquare { statistic, dof, p_value: upper_tail(statistic, dof) }
}

/// Two-sample homogeneity test on a 2×k contingency table. Categories that
/// are empty in both samples are dropped.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquare {
    assert_eq!(a.len(), b.len(), "samples must share categories");
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let mut statistic = 0.0;
    let mut used = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        used += 1;
        let (ea, eb) = (na * col / total, nb * col / total);
        statistic += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let dof = used.saturating_sub(1);
    ChiSquare { statistic, dof, p_value: upper_tail(statistic, dof) }
}

/// Per-position bit frequencies folded into a goodness-of-fit test against
/// Bernoulli(1/2) marginals: one 2-cell table per bit, statistics summed.
pub fn chi_square_bit_marginals(ones: &[u64], trials: u64) -> ChiSquare {
    let half = trials as f64 / 2.0;
    let statistic = ones
        .iter()
        .map(|&k| {
            let zeros = trials - k;
            ((k as f64 - half).powi(2) + (zeros as f64 - half).powi(2)) / half
        })
        .sum();
    let dof = ones.len();
    ChiSquare { statistic, dof, p_value: upper_tail(statistic, dof) }
}
