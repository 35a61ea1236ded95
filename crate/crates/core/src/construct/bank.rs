use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::{num_cosets, validate_coset_reps, BankConfig, DirectionSpec};
use crate::error::{Error, Result};
use crate::spectral::{half_angle_factor, CausalFactor, Orientation};
use crate::trigpoly::{lowpass_gain, MultiIndex, TrigPoly};

/// A tight wavelet filter bank `{tau, q_D,1..N, q_C,1..lambda^n}`.
///
/// `g` and `p` hold the factors used by the construction: `q_D,l = tau g_l(lambda w)`,
/// and `p_l` is the polyphase component of `tau` paired with `coset_reps[l]`
/// (scaled by `lambda^{n/2}`). Banks built by [`build_from_sos`] carry no `p`
/// and no config.
#[derive(Debug, Clone)]
pub struct FilterBank {
    pub dim: usize,
    pub lambda: i64,
    pub coset_reps: Vec<MultiIndex>,
    pub tau: TrigPoly,
    pub g: Vec<TrigPoly>,
    pub p: Vec<TrigPoly>,
    pub q_d: Vec<TrigPoly>,
    pub q_c: Vec<TrigPoly>,
    pub config: Option<BankConfig>,
}

/// Role of a mask inside a bank, used for reporting and export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskRole {
    Lowpass,
    Directional(usize),
    Complementary(usize),
}

impl MaskRole {
    pub fn label(&self) -> String {
        match self {
            MaskRole::Lowpass => "tau".to_string(),
            MaskRole::Directional(l) => format!("q_D{}", l + 1),
            MaskRole::Complementary(m) => format!("q_C{}", m + 1),
        }
    }
}

impl FilterBank {
    /// All masks: lowpass first, then directional, then complementary.
    pub fn masks(&self) -> impl Iterator<Item = (MaskRole, &TrigPoly)> {
        std::iter::once((MaskRole::Lowpass, &self.tau))
            .chain(self.q_d.iter().enumerate().map(|(l, q)| (MaskRole::Directional(l), q)))
            .chain(self.q_c.iter().enumerate().map(|(m, q)| (MaskRole::Complementary(m), q)))
    }

    pub fn num_masks(&self) -> usize {
        1 + self.q_d.len() + self.q_c.len()
    }

    /// Copy with complementary mask `mu` (0-based) removed; such a bank is no longer tight.
    pub fn without_complementary(&self, mu: usize) -> Result<FilterBank> {
        if mu >= self.q_c.len() {
            return Err(Error::InvalidArgument(format!(
                "no complementary mask {mu} (bank has {})",
                self.q_c.len()
            )));
        }
        let mut bank = self.clone();
        bank.q_c.remove(mu);
        Ok(bank)
    }
}

/// `p_l(w) = b_{m}(xi.w)` with `b_m` the normalized half-angle factor.
pub fn build_p(direction: &DirectionSpec, orientation: Orientation) -> Result<TrigPoly> {
    Ok(half_angle_factor(direction.m, orientation)?.along(&direction.xi))
}

/// `g_l(w) = lambda^{-n/2} 2^{-m} e^{-i m zeta.w} (1 - e^{-i xi.w})^m`.
pub fn build_g(direction: &DirectionSpec, lambda: i64, n: usize) -> Result<TrigPoly> {
    if direction.xi.dim() != n || direction.zeta.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: direction.xi.dim(),
        });
    }
    let m = direction.m;
    let scale = 2f64.powi(-(m as i32)) / lowpass_gain(n, lambda);
    let shift = direction.zeta.scale(m as i64);
    let mut binom = 1.0;
    let mut terms = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        terms.push((direction.xi.scale(j as i64).add(&shift), sign * binom * scale));
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    TrigPoly::from_terms(n, terms)
}

/// `tau(w) = sum_{l<=N} lambda^{-n/2} p_l(lambda w) e^{i nu_l.w} + sum_{l>N} lambda^{-n/2} e^{i nu_l.w}`.
pub fn build_lowpass(p_list: &[TrigPoly], config: &BankConfig) -> Result<TrigPoly> {
    config.validate()?;
    if p_list.len() != config.directions.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} p masks, got {}",
            config.directions.len(),
            p_list.len()
        )));
    }
    let n = config.n;
    let scale = 1.0 / lowpass_gain(n, config.lambda);
    let one = TrigPoly::constant(n, 1.0);
    let mut tau = TrigPoly::zero(n);
    for (l, nu) in config.coset_reps.iter().enumerate() {
        let p = p_list.get(l).unwrap_or(&one);
        // e^{i nu.w} is a tap at -nu
        let part = p.upsample_arg(config.lambda)?.shift(&nu.neg())?.scale(scale);
        tau = tau.add(&part)?;
    }
    Ok(tau)
}

/// Generic sum-of-squares bank: `q_1,l = tau g_l(lambda w)` and
/// `q_2,nu = e^{i nu.w} - tau conj(tau_nu(lambda w))`.
pub fn build_from_sos(
    tau: &TrigPoly,
    g_list: &[TrigPoly],
    lambda: i64,
    coset_reps: &[MultiIndex],
) -> Result<FilterBank> {
    let n = tau.dim();
    validate_coset_reps(n, lambda, coset_reps)?;
    let gain = lowpass_gain(n, lambda);
    if (tau.coefficient_sum() - gain).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "tau(0) = {} but a lowpass mask needs {gain}",
            tau.coefficient_sum()
        )));
    }
    let q_d = g_list
        .iter()
        .map(|g| tau.multiply(&g.upsample_arg(lambda)?))
        .collect::<Result<Vec<_>>>()?;
    let q_c = coset_reps
        .iter()
        .map(|nu| {
            let conj_phase = tau.polyphase(nu, lambda)?.upsample_arg(lambda)?.reflect();
            TrigPoly::monomial(nu.neg(), 1.0).sub(&tau.multiply(&conj_phase)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FilterBank {
        dim: n,
        lambda,
        coset_reps: coset_reps.to_vec(),
        tau: tau.clone(),
        g: g_list.to_vec(),
        p: Vec::new(),
        q_d,
        q_c,
        config: None,
    })
}

/// Builds the bank with prescribed directions.
pub fn build_bank(config: &BankConfig) -> Result<FilterBank> {
    config.validate()?;
    let n = config.n;
    let lambda = config.lambda;

    let mut factors: BTreeMap<usize, CausalFactor> = BTreeMap::new();
    for d in &config.directions {
        if let std::collections::btree_map::Entry::Vacant(slot) = factors.entry(d.m) {
            slot.insert(half_angle_factor(d.m, config.orientation)?);
        }
    }
    let p: Vec<TrigPoly> = config
        .directions
        .iter()
        .map(|d| factors[&d.m].along(&d.xi))
        .collect();
    let g = config
        .directions
        .iter()
        .map(|d| build_g(d, lambda, n))
        .collect::<Result<Vec<_>>>()?;
    let tau = build_lowpass(&p, config)?;

    let q_d = g
        .par_iter()
        .map(|gl| tau.multiply(&gl.upsample_arg(lambda)?))
        .collect::<Result<Vec<_>>>()?;

    let scale = 1.0 / lowpass_gain(n, lambda);
    let one = TrigPoly::constant(n, 1.0);
    let q_c = config
        .coset_reps
        .par_iter()
        .enumerate()
        .map(|(mu, nu)| {
            // mu > N is the same formula with p = 1
            let pm = p.get(mu).unwrap_or(&one);
            let conj_p = pm.upsample_arg(lambda)?.reflect();
            let lp = tau.multiply(&conj_p)?.scale(scale);
            TrigPoly::monomial(nu.neg(), 1.0).sub(&lp)
        })
        .collect::<Result<Vec<_>>>()?;

    debug_assert_eq!(q_c.len(), num_cosets(n, lambda));
    Ok(FilterBank {
        dim: n,
        lambda,
        coset_reps: config.coset_reps.clone(),
        tau,
        g,
        p,
        q_d,
        q_c,
        config: Some(config.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2(terms: &[([i64; 2], f64)]) -> TrigPoly {
        TrigPoly::from_terms(2, terms.iter().map(|&(k, c)| (MultiIndex::from(k), c))).unwrap()
    }

    fn example1() -> BankConfig {
        BankConfig::new(
            2,
            2,
            vec![
                DirectionSpec::new([1, 0], 1),
                DirectionSpec::new([0, 1], 1),
                DirectionSpec::new([1, 1], 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn p_masks() {
        let p = build_p(&DirectionSpec::new([1, 0], 1), Orientation::MaxPhase).unwrap();
        assert_eq!(p, p2(&[([0, 0], 0.5), ([1, 0], 0.5)]));
        let p = build_p(&DirectionSpec::new([1, 1], 2), Orientation::MaxPhase).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        let want = p2(&[
            ([0, 0], (1.0 + s2) / 4.0),
            ([1, 1], 0.5),
            ([2, 2], (1.0 - s2) / 4.0),
        ]);
        assert!(p.sub(&want).unwrap().max_abs_coeff() < 1e-10);
        let p = build_p(&DirectionSpec::new([-2, 3], 1), Orientation::MinPhase).unwrap();
        assert!((p.coefficient_sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn g_masks() {
        let g = build_g(&DirectionSpec::new([1, 0], 1), 2, 2).unwrap();
        assert_eq!(g, p2(&[([0, 0], 0.25), ([1, 0], -0.25)]));
        let g4 = build_g(&DirectionSpec::new([-1, 1], 1).with_zeta([1, 0]), 2, 2).unwrap();
        assert_eq!(g4, p2(&[([1, 0], 0.25), ([0, 1], -0.25)]));
        let g = build_g(&DirectionSpec::new([1, 0], 2), 2, 2).unwrap();
        assert_eq!(
            g,
            p2(&[([0, 0], 0.125), ([1, 0], -0.25), ([2, 0], 0.125)])
        );
        assert!(build_g(&DirectionSpec::new([1, 0], 1), 2, 3).is_err());
    }

    #[test]
    fn lowpass_example1() {
        let cfg = example1();
        let p: Vec<_> = cfg
            .directions
            .iter()
            .map(|d| build_p(d, cfg.orientation).unwrap())
            .collect();
        let tau = build_lowpass(&p, &cfg).unwrap();
        let want = p2(&[
            ([0, 0], 0.5),
            ([1, 0], 0.25),
            ([-1, 0], 0.25),
            ([0, 1], 0.25),
            ([0, -1], 0.25),
            ([1, 1], 0.25),
            ([-1, -1], 0.25),
        ]);
        assert!(tau.sub(&want).unwrap().is_zero());
        assert!(build_lowpass(&p[..2], &cfg).is_err());
    }

    #[test]
    fn bank_masks_are_consistent() {
        let bank = build_bank(&example1()).unwrap();
        assert!((bank.tau.coefficient_sum() - 2.0).abs() < 1e-12);
        for (role, q) in bank.masks().skip(1) {
            assert!(q.coefficient_sum().abs() < 1e-12, "{role:?}");
        }
        for (l, q) in bank.q_d.iter().enumerate() {
            let direct = bank.tau.multiply(&bank.g[l].upsample_arg(2).unwrap()).unwrap();
            assert_eq!(&direct, q);
        }
        // q_C,4 = 1 - tau/2
        let want = TrigPoly::constant(2, 1.0).sub(&bank.tau.scale(0.5)).unwrap();
        assert!(bank.q_c[3].sub(&want).unwrap().is_zero());
        assert_eq!(bank.num_masks(), 8);
        assert!(bank.without_complementary(4).is_err());
        assert_eq!(bank.without_complementary(0).unwrap().q_c.len(), 3);
    }

    #[test]
    fn haar_from_sos() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let tau = TrigPoly::from_coeffs_1d(0, &[r, r]);
        let reps = vec![MultiIndex::new(&[0]), MultiIndex::new(&[1])];
        let bank = build_from_sos(&tau, &[], 2, &reps).unwrap();
        // polyphases of tau: 1/sqrt2 at nu=0 and e^{-iw}/sqrt2 at nu=1
        assert_eq!(
            tau.polyphase(&reps[0], 2).unwrap(),
            TrigPoly::constant(1, r)
        );
        assert_eq!(
            tau.polyphase(&reps[1], 2).unwrap(),
            TrigPoly::from_coeffs_1d(1, &[r])
        );
        // q_2,0 = 1 - tau / sqrt2, q_2,1 = e^{iw} - tau e^{2iw} / sqrt2
        let q0 = TrigPoly::from_coeffs_1d(0, &[0.5, -0.5]);
        let q1 = TrigPoly::from_coeffs_1d(-2, &[-0.5, 0.5]);
        assert!(bank.q_c[0].sub(&q0).unwrap().is_zero());
        assert!(bank.q_c[1].sub(&q1).unwrap().is_zero());
        assert!(bank.q_d.is_empty());

        let not_lowpass = TrigPoly::from_coeffs_1d(0, &[1.0, 1.0]);
        assert!(build_from_sos(&not_lowpass, &[], 2, &reps).is_err());
    }
}
