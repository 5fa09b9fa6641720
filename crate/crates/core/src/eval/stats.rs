use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    /// Two-sided, from the t distribution with `n - 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::DegenerateTest(format!(
            "correlation needs at least 3 points, got {n}"
        )));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateTest("a series has zero variance".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        (2.0 * (1.0 - dist.cdf(t.abs()))).min(1.0)
    };
    Ok(Correlation { r, p_value, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Non-zero differences used.
    pub n: usize,
    pub z: f64,
    /// Two-sided, normal approximation with tie correction.
    pub p_value: f64,
}

pub const WILCOXON_MIN_PAIRS: usize = 6;

/// Average ranks (1-based) of `values`.
pub(crate) fn average_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    (ranks, tie_sizes)
}

/// Wilcoxon signed-rank test on paired samples. Zero differences are
/// dropped; tied magnitudes share their average rank.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<Wilcoxon> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "paired series lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| y - x)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(Error::DegenerateTest("all paired differences are zero".into()));
    }
    let n = diffs.len();
    if n < WILCOXON_MIN_PAIRS {
        return Err(Error::DegenerateTest(format!(
            "{n} non-zero differences; at least {WILCOXON_MIN_PAIRS} are needed"
        )));
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = average_ranks(&magnitudes);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    let z = (statistic - mean) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p_value = (2.0 * normal.cdf(-z.abs())).min(1.0);
    Ok(Wilcoxon {
        statistic,
        w_plus,
        w_minus,
        n,
        z,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_correlations() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let up: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        let c = pearson(&x, &up).unwrap();
        assert!((c.r - 1.0).abs() < 1e-12);
        assert_eq!(c.p_value, 0.0);
        assert!((pearson(&x, &down).unwrap().r + 1.0).abs() < 1e-12);
        assert!(pearson(&x, &[1.0; 5]).is_err());
        assert!(pearson(&x[..2], &up[..2]).is_err());
    }

    #[test]
    fn pearson_p_value_reference() {
        // sxy = 6, sxx = 10, syy = 6, so r = 6 / sqrt(60); t = 2.1213 on 3 df
        let c = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 5.0, 4.0, 5.0]).unwrap();
        assert!((c.r - 6.0 / 60f64.sqrt()).abs() < 1e-12);
        assert!((c.p_value - 0.1240).abs() < 5e-4, "{}", c.p_value);
    }

    #[test]
    fn wilcoxon_dominance_and_degenerate() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let b: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        let w = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(w.statistic, 0.0);
        assert!(w.p_value < 0.02, "{w:?}");
        assert!(matches!(
            wilcoxon_signed_rank(&a, &a),
            Err(Error::DegenerateTest(_))
        ));
    }

    #[test]
    fn wilcoxon_textbook_example() {
        // 8 pairs with differences 3, -2, 5, 1, -4, 6, 2, 7 (b - a)
        let a = [10.0, 12.0, 9.0, 11.0, 14.0, 8.0, 10.0, 7.0];
        let diffs = [3.0, -2.0, 5.0, 1.0, -4.0, 6.0, 2.0, 7.0];
        let b: Vec<f64> = a.iter().zip(&diffs).map(|(x, d)| x + d).collect();

        // hand ranking of |d| = 3,2,5,1,4,6,2,7: 1->1, 2,2->2.5, 3->4, 4->5, 5->6, 6->7, 7->8
        let ranks = [4.0, 2.5, 6.0, 1.0, 5.0, 7.0, 2.5, 8.0];
        let w_minus: f64 = ranks
            .iter()
            .zip(&diffs)
            .filter(|(_, d)| **d < 0.0)
            .map(|(r, _)| r)
            .sum();
        assert_eq!(w_minus, 7.5);

        let w = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(w.statistic, 7.5);
        assert_eq!(w.w_plus, 28.5);
        // mean 18, var 51 - (2^3 - 2)/48 = 50.875
        let z = (7.5 - 18.0) / 50.875f64.sqrt();
        assert!((w.z - z).abs() < 1e-12);
        assert!((w.p_value - 0.1405).abs() < 1e-3, "{}", w.p_value);
    }

    #[test]
    fn average_ranks_with_ties() {
        let (r, t) = average_ranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(t, vec![1, 1, 2]);
    }
}
