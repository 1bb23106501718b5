//! Rank statistics: one-sided Mann-Whitney U and Spearman correlation.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Combined sample size up to which `Auto` uses the exact distribution.
pub const EXACT_MAX_COMBINED: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Alternative {
    /// The second sample is stochastically greater than the first.
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UTestMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UTestResult {
    /// U of the second sample: pairs `(a_i, b_j)` with `b_j > a_i`, ties half.
    pub u_statistic: f64,
    pub p_value: f64,
    pub alternative: Alternative,
    pub method: UTestMethod,
    /// Every observation identical; the test carries no information.
    pub degenerate: bool,
    pub n_first: usize,
    pub n_second: usize,
}

/// Average ranks (1-based), ties receiving their midrank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

pub fn mann_whitney_u(a: &[f64], b: &[f64], alternative: Alternative) -> Result<UTestResult> {
    mann_whitney_u_with(a, b, alternative, MethodChoice::Auto)
}

pub fn mann_whitney_u_with(
    a: &[f64],
    b: &[f64],
    alternative: Alternative,
    method: MethodChoice,
) -> Result<UTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("samples", "both samples must be non-empty"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::param("samples", "values must be finite"));
    }
    let (na, nb) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_b: f64 = ranks[na..].iter().sum();
    let u_b = rank_sum_b - (nb * (nb + 1)) as f64 / 2.0;
    let degenerate = pooled.iter().all(|&v| v == pooled[0]);

    let method = match method {
        MethodChoice::Exact => UTestMethod::Exact,
        MethodChoice::Normal => UTestMethod::NormalApproximation,
        MethodChoice::Auto if na + nb <= EXACT_MAX_COMBINED => UTestMethod::Exact,
        MethodChoice::Auto => UTestMethod::NormalApproximation,
    };
    let p_value = if degenerate {
        1.0
    } else {
        match (method, alternative) {
            (UTestMethod::Exact, Alternative::Greater) => exact_upper_tail(&ranks, nb, rank_sum_b),
            (UTestMethod::NormalApproximation, Alternative::Greater) => normal_upper_tail(&pooled, na, nb, u_b),
        }
    };
    Ok(UTestResult {
        u_statistic: u_b,
        p_value: p_value.clamp(0.0, 1.0),
        alternative,
        method,
        degenerate,
        n_first: na,
        n_second: nb,
    })
}

/// `P(R_b >= observed)` over all equally likely ways of choosing which
/// `nb` of the pooled midranks belong to the second sample.
///
/// Midranks are half-integers, so doubled rank sums are exact integers and
/// the distribution is counted by dynamic programming over subsets.
fn exact_upper_tail(ranks: &[f64], nb: usize, rank_sum_b: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // ways[k][s]: subsets of size k with doubled rank sum s
    let mut ways = vec![vec![0f64; max_sum + 1]; nb + 1];
    ways[0][0] = 1.0;
    for &r in &doubled {
        for k in (1..=nb).rev() {
            let (lo, hi) = ways.split_at_mut(k);
            let (prev, cur) = (&lo[k - 1], &mut hi[0]);
            for s in (r..=max_sum).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let observed = (rank_sum_b * 2.0).round() as usize;
    let total: f64 = ways[nb].iter().sum();
    let tail: f64 = ways[nb][observed..].iter().sum();
    tail / total
}

/// Normal approximation with tie-corrected variance and a 0.5 continuity
/// correction.
fn normal_upper_tail(pooled: &[f64], na: usize, nb: usize, u_b: f64) -> f64 {
    let n = (na + nb) as f64;
    let (naf, nbf) = (na as f64, nb as f64);
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = naf * nbf / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let mean = naf * nbf / 2.0;
    let z = (u_b - mean - 0.5) / var.sqrt();
    Normal::new(0.0, 1.0).expect("unit normal").sf(z)
}

/// Spearman rank correlation (Pearson correlation of midranks).
///
/// Returns `None` when either input is constant or lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = midranks(x);
    let ry = midranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    /// Direct enumeration over every labelling: the oracle for the exact path.
    fn brute_force_p(a: &[f64], b: &[f64]) -> f64 {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let ranks = midranks(&pooled);
        let n = pooled.len();
        let nb = b.len();
        let observed: f64 = ranks[a.len()..].iter().sum();
        let (mut hits, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != nb {
                continue;
            }
            let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            total += 1;
            if s >= observed - 1e-9 {
                hits += 1;
            }
        }
        hits as f64 / total as f64
    }

    #[test]
    fn midranks_with_ties() {
        assert_eq!(midranks(&[1.0, 2.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(midranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn exact_small_cases() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0], Alternative::Greater).unwrap();
        assert_eq!(r.method, UTestMethod::Exact);
        assert_eq!(r.u_statistic, 4.0);
        assert!((r.p_value - 1.0 / 6.0).abs() < 1e-12);

        let r = mann_whitney_u(&[5.0, 6.0, 7.0], &[1.0, 2.0, 3.0], Alternative::Greater).unwrap();
        assert_eq!(r.u_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn identical_samples_not_significant() {
        let a = [0.1, 0.4, 0.4, 0.9, 1.0];
        let r = mann_whitney_u(&a, &a, Alternative::Greater).unwrap();
        assert!(r.p_value >= 0.5);
        assert!((r.p_value - brute_force_p(&a, &a)).abs() < 1e-12);
    }

    #[test]
    fn all_identical_is_degenerate() {
        let r = mann_whitney_u(&[1.0; 3], &[1.0; 4], Alternative::Greater).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
        let r = mann_whitney_u_with(&[1.0; 30], &[1.0; 30], Alternative::Greater, MethodChoice::Normal).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn dominance_gives_minimal_p() {
        let a = [0.0; 6];
        let b = [1.0; 6];
        let r = mann_whitney_u(&a, &b, Alternative::Greater).unwrap();
        // one labelling in C(12, 6) = 924 puts all ranks high
        assert!((r.p_value - 1.0 / 924.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(mann_whitney_u(&[], &[1.0], Alternative::Greater).is_err());
    }

    #[test]
    fn exact_matches_enumeration_with_ties() {
        let mut rng = crate::rng::stream(3, crate::rng::Domain::Cli, 0, 0, 0);
        for _ in 0..40 {
            let na = rng.random_range(1..8);
            let nb = rng.random_range(1..8);
            let a: Vec<f64> = (0..na).map(|_| f64::from(rng.random_range(0..5u8))).collect();
            let b: Vec<f64> = (0..nb).map(|_| f64::from(rng.random_range(0..5u8))).collect();
            let r = mann_whitney_u_with(&a, &b, Alternative::Greater, MethodChoice::Exact).unwrap();
            if !r.degenerate {
                assert!((r.p_value - brute_force_p(&a, &b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn auto_switches_to_normal_above_twenty() {
        let a: Vec<f64> = (0..11).map(f64::from).collect();
        let b: Vec<f64> = (0..10).map(|v| f64::from(v) + 0.5).collect();
        let r = mann_whitney_u(&a, &b, Alternative::Greater).unwrap();
        assert_eq!(r.method, UTestMethod::NormalApproximation);
    }

    #[test]
    fn normal_tracks_exact_on_tie_free_data() {
        let mut rng = crate::rng::stream(5, crate::rng::Domain::Cli, 1, 0, 0);
        for _ in 0..50 {
            let n = rng.random_range(15..=25usize);
            let na = rng.random_range(5..=n - 5);
            let mut values: Vec<f64> = (0..n).map(|i| i as f64).collect();
            values.shuffle(&mut rng);
            let (a, b) = values.split_at(na);
            let e = mann_whitney_u_with(a, b, Alternative::Greater, MethodChoice::Exact).unwrap();
            let z = mann_whitney_u_with(a, b, Alternative::Greater, MethodChoice::Normal).unwrap();
            assert!((e.p_value - z.p_value).abs() <= 0.02, "{} vs {}", e.p_value, z.p_value);
        }
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(spearman(&[1.0, 2.0], &[5.0, 5.0]), None);
    }
}
