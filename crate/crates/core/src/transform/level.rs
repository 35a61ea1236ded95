use rayon::prelude::*;

use super::ops::{convolve_counted, coset_add, coset_extract, divided_shape, downsample, upsample};
use super::signal::Signal;
use crate::construct::FilterBank;
use crate::error::{Error, Result};
use crate::trigpoly::TrigPoly;

/// Multiplications spent in each phase of a decomposition/reconstruction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    /// Step (i): `h~ * x`.
    pub analysis_lowpass: u64,
    /// Step (ii): `h~_l * x_j`.
    pub analysis_directional: u64,
    /// Step (iii): `h * (x_j up)`.
    pub analysis_residual: u64,
    /// `h * (x_j up)` in either synthesis.
    pub synthesis_lowpass: u64,
    /// `((h_l up) * h) * (d_D up)` in the standard synthesis.
    pub synthesis_directional: u64,
    /// Complementary terms of the standard synthesis.
    pub synthesis_complementary: u64,
}

impl OpCounts {
    pub fn analysis(&self) -> u64 {
        self.analysis_lowpass + self.analysis_directional + self.analysis_residual
    }

    pub fn synthesis(&self) -> u64 {
        self.synthesis_lowpass + self.synthesis_directional + self.synthesis_complementary
    }

    pub fn total(&self) -> u64 {
        self.analysis() + self.synthesis()
    }
}

/// Output of one analysis level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelOutput {
    pub coarse: Signal,
    pub d_d: Vec<Signal>,
    pub d_c: Vec<Signal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynthesisMode {
    #[default]
    Standard,
    Lp,
}

/// Detail coefficients of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDetails {
    pub d_d: Vec<Signal>,
    pub d_c: Vec<Signal>,
}

/// Multi-level decomposition. `details[j]` holds level `j`; `details[0]` is the
/// coarsest and sits next to `coarse`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub levels: usize,
    pub lambda: i64,
    pub input_shape: Vec<usize>,
    pub coarse: Signal,
    pub details: Vec<LevelDetails>,
}

/// Filters used by the fast algorithms, derived once per bank.
struct Filters {
    lambda: usize,
    h: TrigPoly,
    h_rev: TrigPoly,
    g_rev: Vec<TrigPoly>,
    g_up: Vec<TrigPoly>,
    /// `reflect(tau_nu) (lambda w)` per coset: `sum_m h(-lambda m - nu) delta(. - lambda m)`.
    e_up: Vec<TrigPoly>,
    /// Polyphase components `tau_nu(k) = h(lambda k - nu)`.
    poly: Vec<TrigPoly>,
}

impl Filters {
    fn new(bank: &FilterBank) -> Result<Self> {
        let lambda = bank.lambda;
        let poly = bank
            .coset_reps
            .iter()
            .map(|nu| bank.tau.polyphase(nu, lambda))
            .collect::<Result<Vec<_>>>()?;
        Ok(Filters {
            lambda: lambda as usize,
            h: bank.tau.clone(),
            h_rev: bank.tau.reflect(),
            g_rev: bank.g.iter().map(TrigPoly::reflect).collect(),
            g_up: bank
                .g
                .iter()
                .map(|g| g.upsample_arg(lambda))
                .collect::<Result<_>>()?,
            e_up: poly
                .iter()
                .map(|t| t.reflect().upsample_arg(lambda))
                .collect::<Result<_>>()?,
            poly,
        })
    }
}

fn check_dim(bank: &FilterBank, x: &Signal) -> Result<()> {
    if bank.dim != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: bank.dim,
            found: x.dim(),
        });
    }
    Ok(())
}

/// One level of analysis: steps (i), (ii) and (iii).
pub fn analyze_level(bank: &FilterBank, x: &Signal) -> Result<LevelOutput> {
    analyze_level_counted(bank, x, &mut OpCounts::default())
}

pub fn analyze_level_counted(
    bank: &FilterBank,
    x: &Signal,
    counts: &mut OpCounts,
) -> Result<LevelOutput> {
    check_dim(bank, x)?;
    let f = Filters::new(bank)?;
    analyze_with(&f, bank, x, counts)
}

fn analyze_with(f: &Filters, bank: &FilterBank, x: &Signal, counts: &mut OpCounts) -> Result<LevelOutput> {
    divided_shape(x.shape(), f.lambda)?;
    let coarse = downsample(
        &convolve_counted(&f.h_rev, x, &mut counts.analysis_lowpass)?,
        f.lambda,
    )?;
    let d_d = f
        .g_rev
        .iter()
        .map(|g| convolve_counted(g, &coarse, &mut counts.analysis_directional))
        .collect::<Result<Vec<_>>>()?;

    let mut residual = x.clone();
    residual.sub_assign(&convolve_counted(
        &f.h,
        &upsample(&coarse, f.lambda),
        &mut counts.analysis_residual,
    )?)?;
    let d_c = bank
        .coset_reps
        .iter()
        .map(|nu| coset_extract(&residual, nu, f.lambda))
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelOutput { coarse, d_d, d_c })
}

fn check_details(f: &Filters, bank: &FilterBank, coarse: &Signal, d_d: &[Signal], d_c: &[Signal]) -> Result<Vec<usize>> {
    check_dim(bank, coarse)?;
    for (name, list, want) in [("directional", d_d, bank.g.len()), ("complementary", d_c, bank.coset_reps.len())] {
        if list.len() != want {
            return Err(Error::InvalidArgument(format!(
                "expected {want} {name} detail signals, got {}",
                list.len()
            )));
        }
        if let Some(bad) = list.iter().find(|d| d.shape() != coarse.shape()) {
            return Err(Error::Shape(format!(
                "{name} detail has shape {:?}, coarse has {:?}",
                bad.shape(),
                coarse.shape()
            )));
        }
    }
    Ok(coarse.shape().iter().map(|s| s * f.lambda).collect())
}

/// Standard synthesis: `x = h*(x_j up) + sum_l ((h_l up)*h)*(d_D up) + sum_mu (delta_mu - ...)*(d_C up)`.
pub fn synth_standard(bank: &FilterBank, coarse: &Signal, d_d: &[Signal], d_c: &[Signal]) -> Result<Signal> {
    synth_standard_counted(bank, coarse, d_d, d_c, &mut OpCounts::default())
}

pub fn synth_standard_counted(
    bank: &FilterBank,
    coarse: &Signal,
    d_d: &[Signal],
    d_c: &[Signal],
    counts: &mut OpCounts,
) -> Result<Signal> {
    let f = Filters::new(bank)?;
    synth_standard_with(&f, bank, coarse, d_d, d_c, counts)
}

fn synth_standard_with(
    f: &Filters,
    bank: &FilterBank,
    coarse: &Signal,
    d_d: &[Signal],
    d_c: &[Signal],
    counts: &mut OpCounts,
) -> Result<Signal> {
    if bank.q_c.len() != bank.coset_reps.len() {
        return Err(Error::InvalidArgument(
            "standard synthesis needs every complementary mask".into(),
        ));
    }
    check_details(f, bank, coarse, d_d, d_c)?;
    let mut out = convolve_counted(&f.h, &upsample(coarse, f.lambda), &mut counts.synthesis_lowpass)?;

    for (g_up, d) in f.g_up.iter().zip(d_d) {
        let t = convolve_counted(g_up, &upsample(d, f.lambda), &mut counts.synthesis_directional)?;
        out.add_assign(&convolve_counted(&f.h, &t, &mut counts.synthesis_directional)?)?;
    }

    // delta part: place each d_C on its coset; filtered part: h * sum_mu e_mu * (d_C up)
    let mut placed = Signal::zeros(out.shape())?;
    let mut mixed = Signal::zeros(out.shape())?;
    for ((nu, e), d) in bank.coset_reps.iter().zip(&f.e_up).zip(d_c) {
        coset_add(&mut placed, d, nu, f.lambda)?;
        mixed.add_assign(&convolve_counted(e, &upsample(d, f.lambda), &mut counts.synthesis_complementary)?)?;
    }
    placed.sub_assign(&convolve_counted(&f.h, &mixed, &mut counts.synthesis_complementary)?)?;
    out.add_assign(&placed)?;
    Ok(out)
}

/// LP-based synthesis (step iv): `x(lambda k - nu_mu) = (h*(x_j up))(lambda k - nu_mu) + d_C,mu(k)`.
pub fn synth_lp(bank: &FilterBank, coarse: &Signal, d_c: &[Signal]) -> Result<Signal> {
    synth_lp_counted(bank, coarse, d_c, &mut OpCounts::default())
}

pub fn synth_lp_counted(
    bank: &FilterBank,
    coarse: &Signal,
    d_c: &[Signal],
    counts: &mut OpCounts,
) -> Result<Signal> {
    let f = Filters::new(bank)?;
    synth_lp_with(&f, bank, coarse, d_c, counts)
}

fn synth_lp_with(
    f: &Filters,
    bank: &FilterBank,
    coarse: &Signal,
    d_c: &[Signal],
    counts: &mut OpCounts,
) -> Result<Signal> {
    check_dim(bank, coarse)?;
    if d_c.len() != bank.coset_reps.len() {
        return Err(Error::InvalidArgument(format!(
            "LP synthesis needs a residual for each of the {} cosets, got {}",
            bank.coset_reps.len(),
            d_c.len()
        )));
    }
    if let Some(bad) = d_c.iter().find(|d| d.shape() != coarse.shape()) {
        return Err(Error::Shape(format!(
            "complementary detail has shape {:?}, coarse has {:?}",
            bad.shape(),
            coarse.shape()
        )));
    }
    let mut out = convolve_counted(&f.h, &upsample(coarse, f.lambda), &mut counts.synthesis_lowpass)?;
    for (nu, d) in bank.coset_reps.iter().zip(d_c) {
        coset_add(&mut out, d, nu, f.lambda)?;
    }
    Ok(out)
}

/// `J + 1` analysis levels, `j = J, ..., 0`.
pub fn analyze(bank: &FilterBank, x: &Signal, levels: usize) -> Result<Decomposition> {
    analyze_counted(bank, x, levels, &mut OpCounts::default())
}

pub fn analyze_counted(
    bank: &FilterBank,
    x: &Signal,
    levels: usize,
    counts: &mut OpCounts,
) -> Result<Decomposition> {
    check_dim(bank, x)?;
    let total = (bank.lambda as usize)
        .checked_pow(levels as u32 + 1)
        .ok_or_else(|| Error::InvalidArgument(format!("{levels} levels overflow")))?;
    divided_shape(x.shape(), total)?;
    let f = Filters::new(bank)?;
    let mut current = x.clone();
    let mut details = Vec::with_capacity(levels + 1);
    for _ in 0..=levels {
        let out = analyze_with(&f, bank, &current, counts)?;
        details.push(LevelDetails {
            d_d: out.d_d,
            d_c: out.d_c,
        });
        current = out.coarse;
    }
    details.reverse();
    Ok(Decomposition {
        levels,
        lambda: bank.lambda,
        input_shape: x.shape().to_vec(),
        coarse: current,
        details,
    })
}

pub fn synthesize(bank: &FilterBank, dec: &Decomposition, mode: SynthesisMode) -> Result<Signal> {
    synthesize_counted(bank, dec, mode, &mut OpCounts::default())
}

pub fn synthesize_counted(
    bank: &FilterBank,
    dec: &Decomposition,
    mode: SynthesisMode,
    counts: &mut OpCounts,
) -> Result<Signal> {
    if dec.lambda != bank.lambda || dec.details.len() != dec.levels + 1 {
        return Err(Error::InvalidArgument(
            "decomposition does not match the bank".into(),
        ));
    }
    let f = Filters::new(bank)?;
    let mut current = dec.coarse.clone();
    for level in &dec.details {
        current = match mode {
            SynthesisMode::Standard => {
                synth_standard_with(&f, bank, &current, &level.d_d, &level.d_c, counts)?
            }
            SynthesisMode::Lp => synth_lp_with(&f, bank, &current, &level.d_c, counts)?,
        };
    }
    Ok(current)
}

/// Subbands computed straight from the masks: `(M~ * x) down` for every mask,
/// in the order of [`FilterBank::masks`].
pub fn analyze_direct(bank: &FilterBank, x: &Signal) -> Result<Vec<Signal>> {
    check_dim(bank, x)?;
    let lambda = bank.lambda as usize;
    let masks: Vec<&TrigPoly> = bank.masks().map(|(_, m)| m).collect();
    masks
        .par_iter()
        .map(|m| downsample(&convolve_counted(&m.reflect(), x, &mut 0)?, lambda))
        .collect()
}

/// Polyphase components `tau_nu` of the lowpass mask, in coset order.
pub fn lowpass_polyphase(bank: &FilterBank) -> Result<Vec<TrigPoly>> {
    Ok(Filters::new(bank)?.poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_bank, BankConfig, DirectionSpec};
    use crate::trigpoly::MultiIndex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example1() -> FilterBank {
        let dirs = vec![
            DirectionSpec::new([1, 0], 1),
            DirectionSpec::new([0, 1], 1),
            DirectionSpec::new([1, 1], 1),
        ];
        build_bank(&BankConfig::new(2, 2, dirs).unwrap()).unwrap()
    }

    fn example3() -> FilterBank {
        let dirs = vec![
            DirectionSpec::new([1, 0], 1),
            DirectionSpec::new([0, 1], 1),
            DirectionSpec::new([1, 1], 1),
            DirectionSpec::new([-1, 1], 1).with_zeta([1, 0]),
            DirectionSpec::new([2, 1], 1),
            DirectionSpec::new([1, 2], 1),
            DirectionSpec::new([-1, 2], 1).with_zeta([1, 0]),
            DirectionSpec::new([-2, 1], 1).with_zeta([2, 0]),
        ];
        let reps = [[1, 0], [0, 1], [1, 1], [-4, 2], [2, 1], [1, 2], [0, 2], [-4, 0], [0, 0]]
            .into_iter()
            .map(MultiIndex::from)
            .collect();
        let cfg = BankConfig::new(2, 3, dirs).unwrap().with_coset_reps(reps).unwrap();
        build_bank(&cfg).unwrap()
    }

    fn example4() -> FilterBank {
        let dirs = vec![
            DirectionSpec::new([1, 0], 2),
            DirectionSpec::new([0, 1], 2),
            DirectionSpec::new([1, 1], 2),
        ];
        build_bank(&BankConfig::new(2, 2, dirs).unwrap()).unwrap()
    }

    fn random(shape: &[usize], seed: u64) -> Signal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Signal::from_fn(shape, |_| rng.random_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn lowpass_of_constant() {
        let bank = example1();
        let ones = Signal::new(vec![4, 4], vec![1.0; 16]).unwrap();
        let y = convolve_counted(&bank.tau, &ones, &mut 0).unwrap();
        assert!(y.data().iter().all(|v| (v - 2.0).abs() < 1e-15));

        let c = Signal::new(vec![8, 8], vec![0.75; 64]).unwrap();
        let out = analyze_level(&bank, &c).unwrap();
        assert!(out.coarse.data().iter().all(|v| (v - 1.5).abs() < 1e-14));
        for d in out.d_d.iter().chain(&out.d_c) {
            assert!(d.max_abs() < 1e-14);
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let bank = example1();
        let out = analyze_level(&bank, &Signal::zeros(&[4, 6]).unwrap()).unwrap();
        assert_eq!(out.coarse.max_abs(), 0.0);
        assert!(out.d_d.iter().chain(&out.d_c).all(|d| d.max_abs() == 0.0));
    }

    #[test]
    fn shortcuts_match_direct_subbands() {
        for bank in [example1(), example3(), example4()] {
            let shape = if bank.lambda == 2 { [8, 8] } else { [9, 9] };
            let x = random(&shape, 5);
            let out = analyze_level(&bank, &x).unwrap();
            let direct = analyze_direct(&bank, &x).unwrap();
            let fast: Vec<&Signal> = std::iter::once(&out.coarse).chain(&out.d_d).chain(&out.d_c).collect();
            assert_eq!(fast.len(), direct.len());
            for (a, b) in fast.iter().zip(&direct) {
                assert!(a.max_abs_diff(b).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn impulse_shortcut() {
        let bank = example1();
        let mut x = Signal::zeros(&[4, 4]).unwrap();
        x.data_mut()[5] = 1.0;
        let out = analyze_level(&bank, &x).unwrap();
        let direct = analyze_direct(&bank, &x).unwrap();
        for (a, b) in out.d_d.iter().zip(&direct[1..4]) {
            assert!(a.max_abs_diff(b).unwrap() < 1e-15);
        }
    }

    #[test]
    fn single_level_round_trips() {
        for (bank, shape) in [(example1(), [8, 8]), (example4(), [8, 6]), (example3(), [9, 9])] {
            let x = random(&shape, 9);
            let out = analyze_level(&bank, &x).unwrap();
            let std = synth_standard(&bank, &out.coarse, &out.d_d, &out.d_c).unwrap();
            let lp = synth_lp(&bank, &out.coarse, &out.d_c).unwrap();
            assert!(std.max_abs_diff(&x).unwrap() < 1e-10);
            assert!(lp.max_abs_diff(&x).unwrap() < 1e-10);
            assert!(lp.max_abs_diff(&std).unwrap() < 1e-10);
        }
    }

    #[test]
    fn zero_details_reproject_the_coarse_signal() {
        let bank = example1();
        let coarse = random(&[4, 4], 2);
        let zeros = |k| vec![Signal::zeros(&[4, 4]).unwrap(); k];
        let expect = convolve_counted(&bank.tau, &upsample(&coarse, 2), &mut 0).unwrap();
        let std = synth_standard(&bank, &coarse, &zeros(3), &zeros(4)).unwrap();
        let lp = synth_lp(&bank, &coarse, &zeros(4)).unwrap();
        assert!(std.max_abs_diff(&expect).unwrap() < 1e-15);
        assert_eq!(lp, expect);
    }

    #[test]
    fn multi_level_round_trips() {
        let bank = example1();
        let x = random(&[16, 16], 1);
        let dec = analyze(&bank, &x, 1).unwrap();
        assert_eq!(dec.coarse.shape(), &[4, 4]);
        assert_eq!(dec.details[0].d_c[0].shape(), &[4, 4]);
        assert_eq!(dec.details[1].d_d[0].shape(), &[8, 8]);
        for mode in [SynthesisMode::Standard, SynthesisMode::Lp] {
            assert!(synthesize(&bank, &dec, mode).unwrap().max_abs_diff(&x).unwrap() < 1e-9);
        }

        let bank = example3();
        let x = random(&[27, 27], 3);
        let dec = analyze(&bank, &x, 1).unwrap();
        for mode in [SynthesisMode::Standard, SynthesisMode::Lp] {
            assert!(synthesize(&bank, &dec, mode).unwrap().max_abs_diff(&x).unwrap() < 1e-9);
        }
    }

    #[test]
    fn zero_levels_is_one_analysis_step() {
        let bank = example1();
        let x = random(&[4, 4], 4);
        let dec = analyze(&bank, &x, 0).unwrap();
        let out = analyze_level(&bank, &x).unwrap();
        assert_eq!(dec.coarse, out.coarse);
        assert_eq!(dec.details[0].d_d, out.d_d);
        assert_eq!(dec.details[0].d_c, out.d_c);
    }

    #[test]
    fn divisibility_and_arity_errors() {
        let bank = example1();
        assert!(matches!(analyze(&bank, &random(&[12, 12], 0), 2), Err(Error::Shape(_))));
        assert!(analyze_level(&bank, &random(&[5, 4], 0)).is_err());
        assert!(analyze_level(&bank, &random(&[4], 0)).is_err());
        let out = analyze_level(&bank, &random(&[4, 4], 0)).unwrap();
        assert!(matches!(
            synth_lp(&bank, &out.coarse, &out.d_c[..3]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(synth_standard(&bank, &out.coarse, &out.d_d[..2], &out.d_c).is_err());
    }

    #[test]
    fn shift_equivariance() {
        let bank = example3();
        let x = random(&[9, 18], 8);
        let v = [2i64, -1];
        let shifted = x.shifted(&[3 * v[0], 3 * v[1]]);
        let a = analyze_level(&bank, &x).unwrap();
        let b = analyze_level(&bank, &shifted).unwrap();
        let pairs = std::iter::once((&a.coarse, &b.coarse))
            .chain(a.d_d.iter().zip(&b.d_d))
            .chain(a.d_c.iter().zip(&b.d_c));
        for (p, q) in pairs {
            assert!(p.shifted(&v).max_abs_diff(q).unwrap() < 1e-13);
        }
    }

    #[test]
    fn parseval() {
        for bank in [example1(), example4()] {
            let x = random(&[8, 8], 12);
            let energy: f64 = analyze_direct(&bank, &x).unwrap().iter().map(Signal::norm_sq).sum();
            assert!((energy - x.norm_sq()).abs() < 1e-10 * x.norm_sq());
        }
    }
}
