use super::level::{analyze_level_counted, synth_lp_counted, synth_standard_counted, OpCounts};
use super::ops::divided_shape;
use super::signal::Signal;
use crate::construct::FilterBank;
use crate::error::Result;

/// Multiplication counts of one analysis/synthesis cycle, measured and predicted.
///
/// Only multiplications are counted; additions are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    /// Nonzero taps of the lowpass filter.
    pub alpha: usize,
    /// Nonzero taps of each directional highpass filter.
    pub beta: Vec<usize>,
    /// Mean of `beta`.
    pub beta_star: f64,
    pub lambda: i64,
    pub dim: usize,
    /// Number of sample points `L`.
    pub signal_len: usize,
    /// Analysis plus LP synthesis.
    pub lp_cycle: OpCounts,
    /// Analysis plus standard synthesis.
    pub standard_cycle: OpCounts,
    /// Per-phase counts implied by the filter sizes (same fields as the measured ones).
    pub lp_itemized: OpCounts,
    pub standard_itemized: OpCounts,
    /// `3 alpha + beta*`.
    pub predicted_lp: f64,
    /// `(N + 5) alpha + (lambda N + 1) beta*`.
    pub predicted_standard: f64,
}

impl ComplexityReport {
    pub fn lp_per_point(&self) -> f64 {
        self.lp_cycle.total() as f64 / self.signal_len as f64
    }

    pub fn standard_per_point(&self) -> f64 {
        self.standard_cycle.total() as f64 / self.signal_len as f64
    }

    /// Measured counts agree with the itemized formulas in every phase.
    pub fn itemized_match(&self) -> bool {
        self.lp_cycle == self.lp_itemized && self.standard_cycle == self.standard_itemized
    }
}

/// Runs one instrumented cycle in both synthesis modes on a signal of the given shape.
pub fn complexity_report(bank: &FilterBank, shape: &[usize]) -> Result<ComplexityReport> {
    let lambda = bank.lambda as usize;
    divided_shape(shape, lambda)?;
    let x = Signal::from_fn(shape, |k| {
        k.iter().enumerate().map(|(a, &v)| ((a + 1) as f64 * v as f64).sin()).sum()
    })?;

    let mut analysis = OpCounts::default();
    let out = analyze_level_counted(bank, &x, &mut analysis)?;
    let mut lp_cycle = analysis;
    synth_lp_counted(bank, &out.coarse, &out.d_c, &mut lp_cycle)?;
    let mut standard_cycle = analysis;
    synth_standard_counted(bank, &out.coarse, &out.d_d, &out.d_c, &mut standard_cycle)?;

    let alpha = bank.tau.nnz();
    let beta: Vec<usize> = bank.g.iter().map(|g| g.nnz()).collect();
    let n_dir = beta.len();
    let sum_beta: usize = beta.iter().sum();
    let beta_star = sum_beta as f64 / n_dir.max(1) as f64;
    let len = x.len() as u64;
    let coarse_len = len / (lambda.pow(bank.dim as u32) as u64);
    let a = alpha as u64;

    let analysis_items = OpCounts {
        analysis_lowpass: a * len,
        analysis_directional: sum_beta as u64 * coarse_len,
        analysis_residual: a * len,
        ..OpCounts::default()
    };
    let lp_itemized = OpCounts {
        synthesis_lowpass: a * len,
        ..analysis_items
    };
    let standard_itemized = OpCounts {
        synthesis_lowpass: a * len,
        synthesis_directional: (sum_beta as u64 + n_dir as u64 * a) * len,
        synthesis_complementary: 2 * a * len,
        ..analysis_items
    };

    let n = n_dir as f64;
    let lam = bank.lambda as f64;
    Ok(ComplexityReport {
        alpha,
        beta,
        beta_star,
        lambda: bank.lambda,
        dim: bank.dim,
        signal_len: x.len(),
        lp_cycle,
        standard_cycle,
        lp_itemized,
        standard_itemized,
        predicted_lp: 3.0 * alpha as f64 + beta_star,
        predicted_standard: (n + 5.0) * alpha as f64 + (lam * n + 1.0) * beta_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_bank, BankConfig, DirectionSpec};

    #[test]
    fn example1_counts() {
        let dirs = vec![
            DirectionSpec::new([1, 0], 1),
            DirectionSpec::new([0, 1], 1),
            DirectionSpec::new([1, 1], 1),
        ];
        let bank = build_bank(&BankConfig::new(2, 2, dirs).unwrap()).unwrap();
        let r = complexity_report(&bank, &[16, 16]).unwrap();
        assert_eq!((r.alpha, r.beta.clone(), r.beta_star), (7, vec![2, 2, 2], 2.0));
        assert_eq!(r.predicted_lp, 23.0);
        assert_eq!(r.predicted_standard, 70.0);
        assert!(r.itemized_match());
        assert_eq!(r.lp_per_point(), 22.5);
        assert_eq!(r.standard_per_point(), 63.5);
    }

    #[test]
    fn lp_bound_is_attained_when_every_coset_has_a_direction() {
        let dirs = vec![DirectionSpec::new([1], 1), DirectionSpec::new([2], 1)];
        let bank = build_bank(&BankConfig::new(1, 2, dirs).unwrap()).unwrap();
        let r = complexity_report(&bank, &[32]).unwrap();
        assert!(r.itemized_match());
        assert_eq!(r.lp_per_point(), r.predicted_lp);
    }

    #[test]
    fn rejects_indivisible_shape() {
        let dirs = vec![DirectionSpec::new([1], 1)];
        let bank = build_bank(&BankConfig::new(1, 2, dirs).unwrap()).unwrap();
        assert!(complexity_report(&bank, &[7]).is_err());
    }
}
