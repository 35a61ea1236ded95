//! Sparse multivariate trigonometric polynomials with real coefficients.
//!
//! A [`TrigPoly`] of dimension `n` stores the finitely supported filter
//! `h: Z^n -> R` and represents the mask `tau(w) = sum_k h(k) e^{-i k.w}`.
//! Every arithmetic result is pruned: coefficients with magnitude at or
//! below [`PRUNE_TOL`] are dropped, so the zero polynomial has no terms.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{check_dim, Error, Result};

/// Coefficients with magnitude `<= PRUNE_TOL` are removed after every operation.
pub const PRUNE_TOL: f64 = 1e-12;
/// Default highest derivative order probed by the root-order queries.
pub const DEFAULT_MAX_ORDER: usize = 10;
/// Default threshold on derivative magnitude for the root-order queries.
pub const DEFAULT_ROOT_TOL: f64 = 1e-8;

/// Integer lattice point in `Z^n`: a filter tap location, or equivalently
/// the exponent of `e^{-i k.w}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(SmallVec<[i64; 4]>);

impl MultiIndex {
    pub fn new(k: &[i64]) -> Self {
        MultiIndex(SmallVec::from_slice(k))
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, dim))
    }

    /// Unit vector along `axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut k = Self::zeros(dim);
        k.0[axis] = 1;
        k
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, s: i64) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| a * s).collect())
    }

    pub fn dot(&self, omega: &[f64]) -> f64 {
        self.0.iter().zip(omega).map(|(&k, &w)| k as f64 * w).sum()
    }

    /// Canonical representative of the coset `k + lambda Z^n` in `{0..lambda-1}^n`.
    pub fn coset(&self, lambda: i64) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| a.rem_euclid(lambda)).collect())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex(SmallVec::from_vec(v))
    }
}

impl<const N: usize> From<[i64; N]> for MultiIndex {
    fn from(v: [i64; N]) -> Self {
        MultiIndex::new(&v)
    }
}

/// Sparse trigonometric (Laurent) polynomial with real coefficients.
#[derive(Clone, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl fmt::Debug for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl TrigPoly {
    pub fn zero(dim: usize) -> Self {
        TrigPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::monomial(MultiIndex::zeros(dim), c)
    }

    /// `c e^{-i k.w}`: a single tap `c` at `k`.
    pub fn monomial(k: MultiIndex, c: f64) -> Self {
        let mut p = Self::zero(k.dim());
        if c.abs() > PRUNE_TOL {
            p.terms.insert(k, c);
        }
        p
    }

    /// Builds a polynomial from `(index, coefficient)` pairs; repeated indices accumulate.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            check_dim(dim, k.dim())?;
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient at {k:?}"
                )));
            }
            *map.entry(k).or_insert(0.0) += c;
        }
        Ok(Self::pruned(dim, map))
    }

    /// Univariate polynomial `sum_j coeffs[j] e^{-i (offset + j) w}`.
    pub fn from_coeffs_1d(offset: i64, coeffs: &[f64]) -> Self {
        let map = coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| (MultiIndex::new(&[offset + j as i64]), c))
            .collect();
        Self::pruned(1, map)
    }

    fn pruned(dim: usize, mut terms: BTreeMap<MultiIndex, f64>) -> Self {
        terms.retain(|_, c| c.abs() > PRUNE_TOL);
        TrigPoly { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Terms in lexicographic index order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> + '_ {
        self.terms.iter().map(|(k, &c)| (k, c))
    }

    pub fn coeff(&self, k: &MultiIndex) -> f64 {
        self.terms.get(k).copied().unwrap_or(0.0)
    }

    /// Number of nonzero taps.
    pub fn nnz(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value at `w = 0`.
    pub fn coefficient_sum(&self) -> f64 {
        self.terms.values().sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Componentwise (min, max) of the support, or `None` for the zero polynomial.
    pub fn support_bounds(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut iter = self.terms.keys();
        let first = iter.next()?;
        let mut lo = first.as_slice().to_vec();
        let mut hi = lo.clone();
        for k in iter {
            for (d, &v) in k.as_slice().iter().enumerate() {
                lo[d] = lo[d].min(v);
                hi[d] = hi[d].max(v);
            }
        }
        Some((lo, hi))
    }

    pub fn eval(&self, omega: &[f64]) -> Result<Complex64> {
        check_dim(self.dim, omega.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(k, &c)| Complex64::from_polar(c, -k.dot(omega)))
            .sum())
    }

    pub fn add(&self, other: &TrigPoly) -> Result<TrigPoly> {
        check_dim(self.dim, other.dim)?;
        let mut terms = self.terms.clone();
        for (k, &c) in &other.terms {
            *terms.entry(k.clone()).or_insert(0.0) += c;
        }
        Ok(Self::pruned(self.dim, terms))
    }

    pub fn sub(&self, other: &TrigPoly) -> Result<TrigPoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TrigPoly {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> TrigPoly {
        let terms = self.terms.iter().map(|(k, &v)| (k.clone(), v * c)).collect();
        Self::pruned(self.dim, terms)
    }

    /// Product of masks, i.e. the convolution of the filters.
    pub fn multiply(&self, other: &TrigPoly) -> Result<TrigPoly> {
        check_dim(self.dim, other.dim)?;
        let mut terms = BTreeMap::new();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                *terms.entry(a.add(b)).or_insert(0.0) += ca * cb;
            }
        }
        Ok(Self::pruned(self.dim, terms))
    }

    /// Multiplies by `e^{-i k.w}`, i.e. translates every tap by `k`.
    pub fn shift(&self, k: &MultiIndex) -> Result<TrigPoly> {
        check_dim(self.dim, k.dim())?;
        Ok(TrigPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(j, &c)| (j.add(k), c)).collect(),
        })
    }

    /// `h(k) -> h(-k)`; for real coefficients this is complex conjugation of the mask.
    pub fn reflect(&self) -> TrigPoly {
        TrigPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, &c)| (k.neg(), c)).collect(),
        }
    }

    /// The mask `w -> p(lambda w)`: the tap at `k` moves to `lambda k`.
    pub fn upsample_arg(&self, lambda: i64) -> Result<TrigPoly> {
        if lambda < 1 {
            return Err(Error::InvalidArgument(format!(
                "upsampling factor must be >= 1, got {lambda}"
            )));
        }
        Ok(TrigPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(k, &c)| (k.scale(lambda), c))
                .collect(),
        })
    }

    /// Polyphase component `tau_nu(w) = sum_k h(lambda k - nu) e^{-i k.w}`.
    ///
    /// The components over a complete residue system `Lambda` satisfy
    /// `p(w) = sum_nu tau_nu(lambda w) e^{i nu.w}`.
    pub fn polyphase(&self, nu: &MultiIndex, lambda: i64) -> Result<TrigPoly> {
        check_dim(self.dim, nu.dim())?;
        if lambda < 2 {
            return Err(Error::InvalidArgument(format!(
                "polyphase split needs lambda >= 2, got {lambda}"
            )));
        }
        let mut terms = BTreeMap::new();
        for (j, &c) in &self.terms {
            let t = j.add(nu);
            if t.as_slice().iter().all(|v| v.rem_euclid(lambda) == 0) {
                let k: Vec<i64> = t.as_slice().iter().map(|v| v.div_euclid(lambda)).collect();
                terms.insert(MultiIndex::from(k), c);
            }
        }
        Ok(TrigPoly {
            dim: self.dim,
            terms,
        })
    }

    /// Order of the root of `p` at `omega0`.
    ///
    /// Returns the smallest `r <= max_order` for which some mixed partial
    /// derivative of order `r` exceeds `tol` in magnitude, or `max_order + 1`
    /// when every derivative up to `max_order` vanishes.
    pub fn root_order_at(&self, omega0: &[f64], max_order: usize, tol: f64) -> Result<usize> {
        check_dim(self.dim, omega0.len())?;
        let phases: Vec<(Vec<f64>, Complex64)> = self
            .terms
            .iter()
            .map(|(k, &c)| {
                let kf = k.as_slice().iter().map(|&v| v as f64).collect();
                (kf, Complex64::from_polar(c, -k.dot(omega0)))
            })
            .collect();
        for order in 0..=max_order {
            for alpha in compositions(order, self.dim) {
                let d: Complex64 = phases
                    .iter()
                    .map(|(k, base)| {
                        // (-i k)^alpha = (-i)^|alpha| prod_j k_j^alpha_j
                        let mono: f64 = k
                            .iter()
                            .zip(&alpha)
                            .map(|(kj, &a)| kj.powi(a as i32))
                            .product();
                        base * mono
                    })
                    .sum::<Complex64>()
                    * minus_i_pow(order);
                if d.norm() > tol {
                    return Ok(order);
                }
            }
        }
        Ok(max_order + 1)
    }

    /// Root order at the origin.
    pub fn vanishing_moments(&self) -> usize {
        self.root_order_at(&vec![0.0; self.dim], DEFAULT_MAX_ORDER, DEFAULT_ROOT_TOL)
            .expect("origin has matching dimension")
    }

    /// Minimum root order over the aliasing frequencies `Gamma \ {0}`.
    pub fn accuracy(&self, lambda: i64) -> Result<usize> {
        let gamma = FrequencySet::new(self.dim, lambda)?;
        let mut acc = DEFAULT_MAX_ORDER + 1;
        for point in gamma.nonzero_points() {
            acc = acc.min(self.root_order_at(point, DEFAULT_MAX_ORDER, DEFAULT_ROOT_TOL)?);
        }
        Ok(acc)
    }

    /// Root order of `p - lambda^{n/2}` at the origin.
    pub fn flatness(&self, lambda: i64) -> Result<usize> {
        let target = lowpass_gain(self.dim, lambda);
        self.sub(&TrigPoly::constant(self.dim, target))
            .map(|d| d.vanishing_moments())
    }

    /// Root order of `|p|^2 - lambda^n` at the origin.
    pub fn root_order_c(&self, lambda: i64) -> Result<usize> {
        let target = lowpass_gain(self.dim, lambda).powi(2);
        let sq = self.multiply(&self.reflect())?;
        sq.sub(&TrigPoly::constant(self.dim, target))
            .map(|d| d.vanishing_moments())
    }
}

/// `lambda^{n/2}`, the value a lowpass mask takes at the origin.
pub fn lowpass_gain(dim: usize, lambda: i64) -> f64 {
    (lambda as f64).powf(dim as f64 / 2.0)
}

fn minus_i_pow(r: usize) -> Complex64 {
    match r % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// All `alpha` in `N^parts` with `|alpha| = total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// The aliasing frequencies `Gamma = {2 pi g / lambda : g in {0..lambda-1}^n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    lambda: i64,
    points: Vec<Vec<f64>>,
}

impl FrequencySet {
    pub fn new(dim: usize, lambda: i64) -> Result<Self> {
        if dim == 0 || lambda < 1 {
            return Err(Error::InvalidArgument(format!(
                "frequency set needs n >= 1 and lambda >= 1 (n={dim}, lambda={lambda})"
            )));
        }
        let points = digit_vectors(dim, lambda)
            .into_iter()
            .map(|g| {
                g.iter()
                    .map(|&v| 2.0 * PI * v as f64 / lambda as f64)
                    .collect()
            })
            .collect();
        Ok(FrequencySet { lambda, points })
    }

    pub fn lambda(&self) -> i64 {
        self.lambda
    }

    /// All points; the first one is the origin.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn nonzero_points(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.points.iter().skip(1)
    }
}

/// `{0..lambda-1}^n` in lexicographic order, starting with the zero vector.
pub fn digit_vectors(dim: usize, lambda: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..lambda).map(move |d| {
                    let mut v = prefix.clone();
                    v.push(d);
                    v
                })
            })
            .collect();
    }
    out
}
