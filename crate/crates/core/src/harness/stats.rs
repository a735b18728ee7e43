//! Descriptive statistics and the two tests used to compare channels.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// 1-based ranks, ties sharing their average rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Spearman rank correlation; NaN when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "paired samples");
    pearson(&ranks(xs), &ranks(ys))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedTest {
    pub n: usize,
    pub mean_difference: f64,
    pub t: f64,
    /// Probability of a mean difference this large if the true one were zero.
    pub p_value: f64,
}

/// One-sided paired t-test of `mean(a - b) > 0`.
pub fn paired_t_greater(a: &[f64], b: &[f64]) -> PairedTest {
    assert_eq!(a.len(), b.len(), "paired samples");
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len();
    let md = mean(&d);
    let sd = std_dev(&d);
    let (t, p_value) = if n < 2 {
        (f64::NAN, 1.0)
    } else if sd == 0.0 {
        if md > 0.0 {
            (f64::INFINITY, 0.0)
        } else {
            (f64::NAN, 1.0)
        }
    } else {
        let t = md / (sd / (n as f64).sqrt());
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
        (t, 1.0 - dist.cdf(t))
    };
    PairedTest { n, mean_difference: md, t, p_value }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Bins aligned to multiples of `width`, covering every value.
    pub fn new(values: &[f64], width: f64) -> Self {
        assert!(width > 0.0, "bin width must be positive");
        if values.is_empty() {
            return Self { lo: 0.0, width, counts: Vec::new() };
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = (min / width).floor() * width;
        let bins = ((max - lo) / width).floor() as usize + 1;
        let mut counts = vec![0; bins];
        for v in values {
            counts[(((v - lo) / width).floor() as usize).min(bins - 1)] += 1;
        }
        Self { lo, width, counts }
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width
    }

    /// Centres of the local maxima: occupied bins higher than the bin on
    /// their left and at least as high as the bin on their right.
    pub fn modes(&self) -> Vec<f64> {
        let c = &self.counts;
        (0..c.len())
            .filter(|&i| {
                let left = if i == 0 { 0 } else { c[i - 1] };
                let right = c.get(i + 1).copied().unwrap_or(0);
                c[i] > 0 && c[i] > left && c[i] >= right
            })
            .map(|i| self.bin_center(i))
            .collect()
    }
}

/// Fraction of values strictly inside `(lo, hi)`.
pub fn fraction_between(values: &[f64], lo: f64, hi: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| lo < v && v < hi).count() as f64 / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn spearman_of_monotone_data() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[-5.0, 0.0, 7.0, 100.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        // One adjacent swap among four.
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn paired_t_reference_value() {
        // Differences 1, 2, 3: mean 2, sd 1, t = 2 * sqrt(3).
        let r = paired_t_greater(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]);
        assert!((r.t - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        // Upper tail of t with 2 degrees of freedom at 2*sqrt(3).
        let expected = 0.5 * (1.0 - r.t / (2.0 + r.t * r.t).sqrt());
        assert!((r.p_value - expected).abs() < 1e-9);
    }

    #[test]
    fn histogram_and_modes() {
        let v = [-12.0, -10.0, -9.0, 105.0, 110.0, 112.0, 118.0, 1300.0];
        let h = Histogram::new(&v, 25.0);
        assert_eq!(h.lo, -25.0);
        assert_eq!(h.counts.iter().sum::<usize>(), v.len());
        assert_eq!(h.modes(), vec![-12.5, 112.5, 1312.5]);
        assert_eq!(fraction_between(&v, 40.0, 90.0), 0.0);
    }
}
