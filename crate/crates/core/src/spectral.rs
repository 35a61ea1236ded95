//! Univariate Fejér–Riesz factorization.
//!
//! A nonnegative real trigonometric polynomial `f(w) = sum_{|k|<=d} c_k e^{-ikw}`
//! is written as `|g(w)|^2` with `g(w) = sum_{k=0}^{d} a_k e^{-ikw}` and real `a_k`.
//! Roots of `z^d f(z)` (with `z = e^{-iw}`) come in reciprocal pairs
//! `{r, 1/conj(r)}`; one member of every pair is kept, and roots on the unit
//! circle contribute half their multiplicity.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::trigpoly::{MultiIndex, TrigPoly};

/// Roots closer than this (relative) are treated as one repeated root.
pub const ROOT_CLUSTER_TOL: f64 = 1e-7;
/// Roots with `||r| - 1|` below this lie on the unit circle.
pub const UNIT_CIRCLE_BAND: f64 = 1e-7;

/// Which member of each reciprocal root pair `{r, 1/conj(r)}` the factor keeps,
/// measured in the variable `z = e^{-iw}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Keep roots with `|r| <= 1`.
    MinPhase,
    /// Keep roots with `|r| >= 1`.
    #[default]
    MaxPhase,
}

/// `g(w) = sum_{k=0}^{d} a_k e^{-ikw}` with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalFactor {
    coeffs: Vec<f64>,
}

impl CausalFactor {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("causal factor needs a coefficient".into()));
        }
        Ok(CausalFactor { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `g(0)`.
    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn to_trigpoly(&self) -> TrigPoly {
        TrigPoly::from_coeffs_1d(0, &self.coeffs)
    }

    /// The n-variate polynomial `w -> g(xi.w)`, with taps at `k xi`.
    pub fn along(&self, xi: &MultiIndex) -> TrigPoly {
        TrigPoly::from_terms(
            xi.dim(),
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &a)| (xi.scale(k as i64), a)),
        )
        .expect("taps share the dimension of xi")
    }

    /// Coefficient reversal `z^d g(1/z)`, which swaps the phase orientation.
    pub fn reversed(&self) -> CausalFactor {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        CausalFactor { coeffs }
    }

    /// Max coefficient deviation between `|g|^2` and `f`.
    pub fn residual(&self, f: &TrigPoly) -> Result<f64> {
        let g = self.to_trigpoly();
        Ok(g.multiply(&g.reflect())?.sub(f)?.max_abs_coeff())
    }
}

/// Spectral factor `g` with `|g|^2 = f`.
///
/// `tol` bounds the Hermitian-symmetry defect of `f` and how far its sampled
/// minimum may dip below zero. The returned factor has degree
/// `d = max |k|` over the support of `f` and satisfies `g(0) >= 0`.
pub fn hermitian_sqrt(f: &TrigPoly, tol: f64, orientation: Orientation) -> Result<CausalFactor> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim(),
        });
    }
    let d = f
        .terms()
        .map(|(k, _)| k.as_slice()[0].unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    // c[j] holds the coefficient of e^{-i(j-d)w}
    let mut c = vec![0.0; 2 * d + 1];
    for (k, v) in f.terms() {
        c[(k.as_slice()[0] + d as i64) as usize] = v;
    }
    for j in 0..d {
        if (c[j] - c[2 * d - j]).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "polynomial is not Hermitian: c[{}] = {} but c[{}] = {}",
                j as i64 - d as i64,
                c[j],
                d - j,
                c[2 * d - j]
            )));
        }
    }
    // symmetrize away sub-tolerance defects
    for j in 0..d {
        let avg = 0.5 * (c[j] + c[2 * d - j]);
        c[j] = avg;
        c[2 * d - j] = avg;
    }

    let min = sampled_min(&c, d);
    if min < -tol {
        return Err(Error::NotNonnegative { min });
    }
    if d == 0 {
        return CausalFactor::new(vec![c[0].max(0.0).sqrt()]);
    }

    // z^d f(z) = sum_j c[j] z^j, with c[2d] = c[0] != 0 so no root sits at 0.
    let roots = polynomial_roots(&c);
    let selected = select_roots(&roots, d, orientation)?;

    let mut monic = vec![Complex64::new(1.0, 0.0)];
    for r in &selected {
        // multiply by (z - r)
        let mut next = vec![Complex64::new(0.0, 0.0); monic.len() + 1];
        for (j, &m) in monic.iter().enumerate() {
            next[j + 1] += m;
            next[j] -= m * r;
        }
        monic = next;
    }
    let mut a: Vec<f64> = monic.iter().map(|z| z.re).collect();

    // Fix the scale by least squares on the autocorrelation coefficients.
    let acf = autocorrelation(&a);
    let num: f64 = acf.iter().zip(&c).map(|(x, y)| x * y).sum();
    let den: f64 = acf.iter().map(|x| x * x).sum();
    let s = (num / den).max(0.0).sqrt();
    a.iter_mut().for_each(|v| *v *= s);

    let sum: f64 = a.iter().sum();
    let flip = if sum.abs() > tol {
        sum < 0.0
    } else {
        a.iter().find(|v| v.abs() > tol).is_some_and(|v| *v < 0.0)
    };
    if flip {
        a.iter_mut().for_each(|v| *v = -*v);
    }
    CausalFactor::new(a)
}

/// Factor `b` of degree `m` with `|b(u)|^2 = 1 - ((1 - cos u)/2)^m` and `b(0) = 1`.
pub fn half_angle_factor(m: usize, orientation: Orientation) -> Result<CausalFactor> {
    if m == 0 {
        return Err(Error::InvalidArgument("half-angle factor needs m >= 1".into()));
    }
    let f = half_angle_target(m);
    let b = hermitian_sqrt(&f, 1e-9, orientation)?;
    let sum = b.sum();
    CausalFactor::new(b.coeffs().iter().map(|v| v / sum).collect())
}

/// `1 - ((1 - cos u)/2)^m = 1 - sin^{2m}(u/2)` as a trigonometric polynomial in `u`.
pub fn half_angle_target(m: usize) -> TrigPoly {
    let s = TrigPoly::from_coeffs_1d(-1, &[-0.25, 0.5, -0.25]);
    let mut pow = TrigPoly::constant(1, 1.0);
    for _ in 0..m {
        pow = pow.multiply(&s).expect("univariate");
    }
    TrigPoly::constant(1, 1.0).sub(&pow).expect("univariate")
}

fn autocorrelation(a: &[f64]) -> Vec<f64> {
    let d = a.len() - 1;
    let mut out = vec![0.0; 2 * d + 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in a.iter().enumerate() {
            // coefficient of e^{-i(i-j)w}
            out[(i as i64 - j as i64 + d as i64) as usize] += x * y;
        }
    }
    out
}

fn sampled_min(c: &[f64], d: usize) -> f64 {
    let samples = 64 * (d + 1);
    (0..samples)
        .map(|s| {
            let w = 2.0 * std::f64::consts::PI * s as f64 / samples as f64;
            c.iter()
                .enumerate()
                .map(|(j, &v)| v * ((j as f64 - d as f64) * w).cos())
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Roots of `sum_j c[j] z^j` from the companion-matrix eigenvalues, refined by Newton steps.
fn polynomial_roots(c: &[f64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / lead;
    }
    comp.complex_eigenvalues()
        .iter()
        .map(|&r| polish(c, r))
        .collect()
}

fn polish(c: &[f64], mut r: Complex64) -> Complex64 {
    for _ in 0..3 {
        let (p, dp) = horner(c, r);
        if dp.norm() < 1e-8 * (1.0 + r.norm()) {
            break;
        }
        let step = p / dp;
        // a step much larger than the root itself means we sit near a repeated root
        if !step.is_finite() || step.norm() > 1e-3 * (1.0 + r.norm()) {
            break;
        }
        r -= step;
    }
    r
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &v in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + v;
    }
    (p, dp)
}

fn select_roots(roots: &[Complex64], d: usize, orientation: Orientation) -> Result<Vec<Complex64>> {
    let (on_circle, off): (Vec<Complex64>, Vec<Complex64>) = roots
        .iter()
        .partition(|r| (r.norm() - 1.0).abs() < UNIT_CIRCLE_BAND);

    let mut selected: Vec<Complex64> = off
        .into_iter()
        .filter(|r| match orientation {
            Orientation::MaxPhase => r.norm() > 1.0,
            Orientation::MinPhase => r.norm() < 1.0,
        })
        .collect();

    // Pair every unit-circle root with its nearest unpaired neighbour; the
    // centroid of a split pair is far more accurate than either member.
    let mut pool = on_circle;
    while let Some(r) = pool.pop() {
        let (idx, dist) = pool
            .iter()
            .enumerate()
            .map(|(i, s)| (i, (s - r).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| {
                Error::NoSpectralFactor(format!("unit-circle root {r} has odd multiplicity"))
            })?;
        if dist > ROOT_CLUSTER_TOL * (1.0 + r.norm()) {
            return Err(Error::NoSpectralFactor(format!(
                "unit-circle root {r} has odd multiplicity"
            )));
        }
        let partner = pool.swap_remove(idx);
        let centroid = (r + partner) * 0.5;
        selected.push(centroid / centroid.norm());
    }

    if selected.len() != d {
        return Err(Error::NoSpectralFactor(format!(
            "selected {} roots for a degree-{d} factor",
            selected.len()
        )));
    }
    Ok(selected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn assert_coeffs(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn perfect_square() {
        let f = TrigPoly::from_coeffs_1d(-1, &[0.25, 0.5, 0.25]);
        for o in [Orientation::MinPhase, Orientation::MaxPhase] {
            let g = hermitian_sqrt(&f, 1e-9, o).unwrap();
            assert_coeffs(g.coeffs(), &[0.5, 0.5], 1e-12);
        }
    }

    #[test]
    fn constant() {
        let g = hermitian_sqrt(&TrigPoly::constant(1, 1.0), 1e-9, Orientation::MaxPhase).unwrap();
        assert_coeffs(g.coeffs(), &[1.0], 1e-15);
    }

    #[test]
    fn m2_max_phase_closed_form() {
        let g = hermitian_sqrt(&half_angle_target(2), 1e-9, Orientation::MaxPhase).unwrap();
        assert_coeffs(
            g.coeffs(),
            &[(1.0 + SQRT2) / 4.0, 0.5, (1.0 - SQRT2) / 4.0],
            1e-10,
        );
    }

    #[test]
    fn half_angle_low_orders() {
        let b1 = half_angle_factor(1, Orientation::MaxPhase).unwrap();
        assert_coeffs(b1.coeffs(), &[0.5, 0.5], 1e-12);
        let b2 = half_angle_factor(2, Orientation::MaxPhase).unwrap();
        assert_coeffs(
            b2.coeffs(),
            &[(1.0 + SQRT2) / 4.0, 0.5, (1.0 - SQRT2) / 4.0],
            1e-10,
        );
        let b2min = half_angle_factor(2, Orientation::MinPhase).unwrap();
        assert_coeffs(
            b2min.coeffs(),
            &[(1.0 - SQRT2) / 4.0, 0.5, (1.0 + SQRT2) / 4.0],
            1e-10,
        );
    }

    /// Term-by-term re-expansion of |b|^2 against the cosine polynomial,
    /// computed with an explicit double loop rather than `TrigPoly`.
    fn reexpansion_residual(b: &[f64], m: usize) -> f64 {
        let target = half_angle_target(m);
        let mut worst: f64 = 0.0;
        for lag in -(m as i64)..=(m as i64) {
            let mut acc = 0.0;
            for (i, &x) in b.iter().enumerate() {
                let j = i as i64 - lag;
                if j >= 0 && (j as usize) < b.len() {
                    acc += x * b[j as usize];
                }
            }
            worst = worst.max((acc - target.coeff(&MultiIndex::new(&[lag]))).abs());
        }
        worst
    }

    #[test]
    fn m3_reexpands() {
        for o in [Orientation::MinPhase, Orientation::MaxPhase] {
            let b = half_angle_factor(3, o).unwrap();
            assert_eq!(b.degree(), 3);
            assert!(reexpansion_residual(b.coeffs(), 3) < 1e-10);
            assert!((b.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_orders_up_to_eight() {
        for m in 1..=8 {
            for o in [Orientation::MinPhase, Orientation::MaxPhase] {
                let b = half_angle_factor(m, o).unwrap();
                assert_eq!(b.degree(), m);
                let r = reexpansion_residual(b.coeffs(), m);
                assert!(r < 1e-9, "m={m} {o:?}: residual {r:e}");
                assert!((b.sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orientations_are_reversals() {
        for m in 2..=4 {
            let lo = half_angle_factor(m, Orientation::MinPhase).unwrap();
            let hi = half_angle_factor(m, Orientation::MaxPhase).unwrap();
            let rev = hi.reversed();
            let same = lo.coeffs().iter().zip(rev.coeffs()).all(|(a, b)| (a - b).abs() < 1e-9);
            let flipped = lo.coeffs().iter().zip(rev.coeffs()).all(|(a, b)| (a + b).abs() < 1e-9);
            assert!(same || flipped, "m={m}: {lo:?} vs {hi:?}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let neg = TrigPoly::from_coeffs_1d(-1, &[1.0, 0.0, 1.0]); // 2 cos w
        assert!(matches!(
            hermitian_sqrt(&neg, 1e-9, Orientation::MaxPhase),
            Err(Error::NotNonnegative { .. })
        ));
        let skew = TrigPoly::from_coeffs_1d(-1, &[0.1, 1.0, 0.3]);
        assert!(matches!(
            hermitian_sqrt(&skew, 1e-9, Orientation::MaxPhase),
            Err(Error::InvalidArgument(_))
        ));
        assert!(hermitian_sqrt(&TrigPoly::constant(2, 1.0), 1e-9, Orientation::MaxPhase).is_err());
        assert!(half_angle_factor(0, Orientation::MaxPhase).is_err());
    }

    #[test]
    fn odd_multiplicity_unit_root_has_no_factor() {
        // 1 - cos w - 1e-10: two simple unit-circle roots next to w = 0, dip within tolerance
        let f = TrigPoly::from_coeffs_1d(-1, &[-0.5, 1.0 - 1e-10, -0.5]);
        let res = hermitian_sqrt(&f, 1e-9, Orientation::MaxPhase);
        assert!(matches!(res, Err(Error::NoSpectralFactor(_))), "{res:?}");
    }

    proptest! {
        #[test]
        fn recovers_random_causal_factor(coeffs in prop::collection::vec(-1.0f64..1.0, 1..=7)) {
            let lead = coeffs[coeffs.len() - 1];
            prop_assume!(lead.abs() > 0.05 && coeffs[0].abs() > 0.05);
            let g = TrigPoly::from_coeffs_1d(0, &coeffs);
            let f = g.multiply(&g.reflect()).unwrap();
            for o in [Orientation::MinPhase, Orientation::MaxPhase] {
                let h = hermitian_sqrt(&f, 1e-9, o).unwrap();
                prop_assert_eq!(h.degree(), coeffs.len() - 1);
                prop_assert!(h.residual(&f).unwrap() < 1e-8);
            }
        }
    }
}
