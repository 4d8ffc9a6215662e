//! Small statistical helpers for goodness-of-fit checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn upper_tail(statistic: f64, dof: usize) -> f64 {
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0)
}

/// Pearson goodness of fit of `observed` counts against cell probabilities.
/// Cells with zero expected probability must have zero counts and are dropped.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareTest {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            if o > 0 {
                return ChiSquareTest { statistic: f64::INFINITY, dof: cells.max(1), p_value: 0.0 };
            }
            continue;
        }
        let e = p * n as f64;
        statistic += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    let dof = cells.saturating_sub(1).max(1);
    ChiSquareTest { statistic, dof, p_value: upper_tail(statistic, dof) }
}

/// Two-sample homogeneity test on paired histograms.
pub fn chi_square_homogeneity(first: &[u64], second: &[u64]) -> ChiSquareTest {
    assert_eq!(first.len(), second.len());
    let n1: u64 = first.iter().sum();
    let n2: u64 = second.iter().sum();
    let total = (n1 + n2) as f64;
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in first.iter().zip(second) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        let e1 = col * n1 as f64 / total;
        let e2 = col * n2 as f64 / total;
        statistic += (x as f64 - e1).powi(2) / e1 + (y as f64 - e2).powi(2) / e2;
        cells += 1;
    }
    let dof = cells.saturating_sub(1).max(1);
    ChiSquareTest { statistic, dof, p_value: upper_tail(statistic, dof) }
}

/// Shannon entropy in bits of a Bernoulli(p) variable.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Empirical per-symbol entropy of a bit sequence.
pub fn empirical_bit_entropy(bits: &[bool]) -> f64 {
    if bits.is_empty() {
        return 0.0;
    }
    let ones = bits.iter().filter(|b| **b).count();
    binary_entropy(ones as f64 / bits.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(empirical_bit_entropy(&[false; 10]), 0.0);
        assert_eq!(empirical_bit_entropy(&[true, false]), 1.0);
    }

    #[test]
    fn perfect_fit_has_unit_p_value() {
        let t = chi_square_gof(&[25, 25, 25, 25], &[0.25; 4]);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 3);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gross_misfit_is_rejected() {
        let t = chi_square_gof(&[1000, 0], &[0.5, 0.5]);
        assert!(t.p_value < 1e-6);
        let h = chi_square_homogeneity(&[900, 100], &[100, 900]);
        assert!(h.p_value < 1e-6);
    }

    #[test]
    fn impossible_cell_hit_fails() {
        let t = chi_square_gof(&[5, 1], &[1.0, 0.0]);
        assert_eq!(t.p_value, 0.0);
    }
}
