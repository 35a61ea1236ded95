use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::bank::FilterBank;
use crate::trigpoly::{digit_vectors, lowpass_gain, MultiIndex, TrigPoly};

/// Default tolerance on the Gram residual for declaring a bank tight.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-9;
/// Upper bound on the number of mask evaluations per mask in the sampled UEP
/// check (grid points times `lambda^n` shifts).
pub const GRID_POINT_BUDGET: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentsReport {
    /// Vanishing moments of each directional mask.
    pub directional: Vec<usize>,
    /// Vanishing moments of each complementary mask.
    pub complementary: Vec<usize>,
    pub accuracy: usize,
    pub flatness: usize,
    /// Root order of `|tau|^2 - lambda^n` at the origin.
    pub c_order: usize,
    /// `min(a, c/2)`, the minimum vanishing moments over all wavelet masks.
    pub min_a_half_c: f64,
    /// Every directional mask has exactly the prescribed number of moments.
    pub directional_exact: bool,
    /// Every complementary mask has at least `min(a, b)` moments.
    pub complementary_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Max coefficient deviation of the polyphase Gram matrix from the identity.
    pub uep_max_residual: f64,
    /// Max deviation of the sampled UEP identity; `None` when sampling was skipped.
    pub grid_max_residual: Option<f64>,
    /// Residual of the sum-of-squares identity; `None` for banks without `p` masks.
    pub sos_max_residual: Option<f64>,
    pub moments: MomentsReport,
    pub tol: f64,
    pub tight: bool,
}

/// Full verification with the default sampling grid.
pub fn verify_uep(bank: &FilterBank, tol: f64) -> VerificationReport {
    verify_uep_with_grid(bank, tol, default_grid(bank.dim, bank.lambda))
}

/// Full verification; `grid_per_axis = 0` skips the sampled check.
pub fn verify_uep_with_grid(bank: &FilterBank, tol: f64, grid_per_axis: usize) -> VerificationReport {
    let uep = gram_residual(bank);
    let grid = (grid_per_axis > 0).then(|| grid_residual(bank, grid_per_axis));
    let sos = (!bank.p.is_empty()).then(|| verify_sos_identity(bank));
    VerificationReport {
        uep_max_residual: uep,
        grid_max_residual: grid,
        sos_max_residual: sos,
        moments: moments_report(bank),
        tol,
        tight: uep < tol,
    }
}

/// 32 points per axis, shrunk so that `g^n lambda^n` stays within [`GRID_POINT_BUDGET`].
pub fn default_grid(dim: usize, lambda: i64) -> usize {
    let shifts = (lambda as usize).pow(dim as u32);
    let mut g = 32usize;
    while g > 2 && g.pow(dim as u32) * shifts > GRID_POINT_BUDGET {
        g -= 1;
    }
    g
}

/// Exact tightness check.
///
/// With `M_nu` the polyphase components of mask `M`, the bank satisfies the
/// UEP condition iff `sum_M M_nu conj(M_nu')` is `delta_{nu nu'}` for all
/// `nu, nu'` in `Lambda`. Returns the largest coefficient deviation.
pub fn gram_residual(bank: &FilterBank) -> f64 {
    let lambda = bank.lambda;
    let reps = &bank.coset_reps;
    let comps: Vec<Vec<Vec<(MultiIndex, f64)>>> = bank
        .masks()
        .map(|(_, m)| {
            reps.iter()
                .map(|nu| {
                    m.polyphase(nu, lambda)
                        .expect("dimensions agree")
                        .terms()
                        .map(|(k, c)| (k.clone(), c))
                        .collect()
                })
                .collect()
        })
        .collect();

    let pairs: Vec<(usize, usize)> = (0..reps.len())
        .flat_map(|i| (i..reps.len()).map(move |j| (i, j)))
        .collect();
    let zero = MultiIndex::zeros(bank.dim);
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut acc: HashMap<MultiIndex, f64> = HashMap::new();
            for mask in &comps {
                for (a, ca) in &mask[i] {
                    for (b, cb) in &mask[j] {
                        *acc.entry(a.sub(b)).or_insert(0.0) += ca * cb;
                    }
                }
            }
            if i == j {
                *acc.entry(zero.clone()).or_insert(0.0) -= 1.0;
            }
            acc.values().fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .reduce(|| 0.0, f64::max)
}

/// Samples `sum_M M(w) conj(M(w + gamma)) = lambda^n delta_gamma` on a
/// `grid_per_axis^n` grid for every `gamma` in `Gamma`.
pub fn grid_residual(bank: &FilterBank, grid_per_axis: usize) -> f64 {
    let n = bank.dim;
    let lambda = bank.lambda;
    let g = grid_per_axis as i64;
    // angles are multiples of 2 pi / (g lambda): grid points step by lambda, gamma by g
    let period = g * lambda;
    let table: Vec<Complex64> = (0..period)
        .map(|t| Complex64::from_polar(1.0, -2.0 * PI * t as f64 / period as f64))
        .collect();
    let masks: Vec<Vec<(Vec<i64>, f64)>> = bank
        .masks()
        .map(|(_, m)| m.terms().map(|(k, c)| (k.as_slice().to_vec(), c)).collect())
        .collect();
    let gammas = digit_vectors(n, lambda);
    let target = lowpass_gain(n, lambda).powi(2);
    let points = digit_vectors(n, g);

    points
        .par_iter()
        .map(|pt| {
            let mut worst: f64 = 0.0;
            let values: Vec<Vec<Complex64>> = gammas
                .iter()
                .map(|gam| {
                    let idx: Vec<i64> = pt.iter().zip(gam).map(|(p, q)| p * lambda + q * g).collect();
                    masks
                        .iter()
                        .map(|taps| {
                            taps.iter()
                                .map(|(k, c)| {
                                    let t: i64 = k.iter().zip(&idx).map(|(a, b)| a * b).sum();
                                    table[t.rem_euclid(period) as usize] * *c
                                })
                                .sum()
                        })
                        .collect()
                })
                .collect();
            for (gi, vals) in values.iter().enumerate() {
                let s: Complex64 = values[0].iter().zip(vals).map(|(a, b)| a * b.conj()).sum();
                let want = if gi == 0 { target } else { 0.0 };
                worst = worst.max((s - want).norm());
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Residual of `1 - sum |g_l|^2 - lambda^{-n} sum |p_l|^2 - (lambda^n - N) lambda^{-n}`.
pub fn verify_sos_identity(bank: &FilterBank) -> f64 {
    let n = bank.dim;
    let inv = 1.0 / lowpass_gain(n, bank.lambda).powi(2);
    let cosets = bank.coset_reps.len();
    let mut acc = TrigPoly::constant(n, 1.0 - (cosets - bank.p.len()) as f64 * inv);
    for g in &bank.g {
        acc = acc.sub(&g.multiply(&g.reflect()).expect("same dim")).expect("same dim");
    }
    for p in &bank.p {
        let sq = p.multiply(&p.reflect()).expect("same dim").scale(inv);
        acc = acc.sub(&sq).expect("same dim");
    }
    acc.max_abs_coeff()
}

pub fn moments_report(bank: &FilterBank) -> MomentsReport {
    let lambda = bank.lambda;
    let directional: Vec<usize> = bank.q_d.iter().map(TrigPoly::vanishing_moments).collect();
    let complementary: Vec<usize> = bank.q_c.iter().map(TrigPoly::vanishing_moments).collect();
    let accuracy = bank.tau.accuracy(lambda).expect("dimensions agree");
    let flatness = bank.tau.flatness(lambda).expect("dimensions agree");
    let c_order = bank.tau.root_order_c(lambda).expect("dimensions agree");
    let directional_exact = match &bank.config {
        Some(cfg) => cfg
            .directions
            .iter()
            .zip(&directional)
            .all(|(d, &vm)| d.m == vm),
        None => bank
            .g
            .iter()
            .zip(&directional)
            .all(|(g, &vm)| g.vanishing_moments() == vm),
    };
    let floor = accuracy.min(flatness);
    MomentsReport {
        complementary_bound: floor >= 1 && complementary.iter().all(|&vm| vm >= floor),
        directional,
        complementary,
        accuracy,
        flatness,
        c_order,
        min_a_half_c: (accuracy as f64).min(c_order as f64 / 2.0),
        directional_exact,
    }
}
