use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::spectral::Orientation;
use crate::trigpoly::{digit_vectors, MultiIndex};

/// One prescribed direction `xi = eta - zeta` with `m` vanishing moments along it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionSpec {
    pub xi: MultiIndex,
    /// Initial point; only shifts the directional mask.
    pub zeta: MultiIndex,
    pub m: usize,
}

impl DirectionSpec {
    pub fn new(xi: impl Into<MultiIndex>, m: usize) -> Self {
        let xi = xi.into();
        let zeta = MultiIndex::zeros(xi.dim());
        DirectionSpec { xi, zeta, m }
    }

    pub fn with_zeta(mut self, zeta: impl Into<MultiIndex>) -> Self {
        self.zeta = zeta.into();
        self
    }

    /// Terminal point `eta = zeta + xi`.
    pub fn eta(&self) -> MultiIndex {
        self.zeta.add(&self.xi)
    }
}

/// Inputs of the construction: dimension, dilation, directions and the
/// coset representatives `Lambda`.
///
/// `coset_reps[l]` is paired with `directions[l]` for `l < N`; the remaining
/// `lambda^n - N` representatives feed the constant part of the lowpass mask.
#[derive(Debug, Clone, PartialEq)]
pub struct BankConfig {
    pub n: usize,
    pub lambda: i64,
    pub directions: Vec<DirectionSpec>,
    pub coset_reps: Vec<MultiIndex>,
    pub orientation: Orientation,
}

impl BankConfig {
    /// Config with greedily chosen coset representatives and max-phase factors.
    pub fn new(n: usize, lambda: i64, directions: Vec<DirectionSpec>) -> Result<Self> {
        check_basics(n, lambda, &directions)?;
        let coset_reps = default_coset_reps(n, lambda, &directions)?;
        let config = BankConfig {
            n,
            lambda,
            directions,
            coset_reps,
            orientation: Orientation::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_coset_reps(mut self, reps: Vec<MultiIndex>) -> Result<Self> {
        self.coset_reps = reps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// `lambda^n`, the number of cosets of `Z^n / lambda Z^n`.
    pub fn num_cosets(&self) -> usize {
        num_cosets(self.n, self.lambda)
    }

    pub fn validate(&self) -> Result<()> {
        check_basics(self.n, self.lambda, &self.directions)?;
        validate_coset_reps(self.n, self.lambda, &self.coset_reps)
    }
}

pub(crate) fn num_cosets(n: usize, lambda: i64) -> usize {
    (lambda as usize).pow(n as u32)
}

fn check_basics(n: usize, lambda: i64, directions: &[DirectionSpec]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension n must be >= 1".into()));
    }
    if lambda < 2 {
        return Err(Error::InvalidArgument(format!(
            "dilation lambda must be >= 2, got {lambda}"
        )));
    }
    if directions.is_empty() {
        return Err(Error::InvalidArgument("at least one direction is required".into()));
    }
    let cosets = num_cosets(n, lambda);
    if directions.len() > cosets {
        return Err(Error::TooManyDirections {
            directions: directions.len(),
            cosets,
        });
    }
    for (i, d) in directions.iter().enumerate() {
        if d.xi.dim() != n || d.zeta.dim() != n {
            return Err(Error::InvalidArgument(format!(
                "direction {i}: xi and zeta must have {n} entries"
            )));
        }
        if d.xi.is_zero() {
            return Err(Error::ZeroDirection { index: i });
        }
        if d.m == 0 {
            return Err(Error::InvalidArgument(format!(
                "direction {i}: vanishing moments must be >= 1"
            )));
        }
    }
    Ok(())
}

/// Checks that `reps` is a complete residue system of `Z^n / lambda Z^n`.
pub fn validate_coset_reps(n: usize, lambda: i64, reps: &[MultiIndex]) -> Result<()> {
    let cosets = num_cosets(n, lambda);
    if reps.len() != cosets {
        return Err(Error::InvalidCosets(format!(
            "expected {cosets} representatives, got {}",
            reps.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for (i, r) in reps.iter().enumerate() {
        if r.dim() != n {
            return Err(Error::InvalidCosets(format!(
                "representative {i} has {} entries, expected {n}",
                r.dim()
            )));
        }
        if !seen.insert(r.coset(lambda)) {
            return Err(Error::InvalidCosets(format!(
                "representative {i} {r:?} repeats the coset {:?}",
                r.coset(lambda)
            )));
        }
    }
    Ok(())
}

/// Greedy choice of `Lambda`.
///
/// Direction `l` takes `xi_l` when its coset is still free, then tries the
/// terminal point `eta_l` and the initial point `zeta_l` (when nonzero), and
/// otherwise takes the canonical representative in `{0..lambda-1}^n` of the
/// first free coset. Leftover cosets are filled with canonical representatives.
pub fn default_coset_reps(
    n: usize,
    lambda: i64,
    directions: &[DirectionSpec],
) -> Result<Vec<MultiIndex>> {
    let cosets = num_cosets(n, lambda);
    if directions.len() > cosets {
        return Err(Error::TooManyDirections {
            directions: directions.len(),
            cosets,
        });
    }
    let canonical: Vec<MultiIndex> = digit_vectors(n, lambda)
        .into_iter()
        .map(MultiIndex::from)
        .collect();
    let mut claimed = BTreeSet::new();
    let mut reps = Vec::with_capacity(cosets);

    for d in directions {
        let mut candidates = vec![d.xi.clone()];
        if !d.zeta.is_zero() {
            candidates.push(d.eta());
            candidates.push(d.zeta.clone());
        }
        let pick = candidates
            .into_iter()
            .find(|c| !claimed.contains(&c.coset(lambda)))
            .or_else(|| canonical.iter().find(|c| !claimed.contains(*c)).cloned())
            .expect("N <= lambda^n leaves a free coset");
        claimed.insert(pick.coset(lambda));
        reps.push(pick);
    }
    for c in &canonical {
        if !claimed.contains(c) {
            claimed.insert(c.clone());
            reps.push(c.clone());
        }
    }
    Ok(reps)
}
