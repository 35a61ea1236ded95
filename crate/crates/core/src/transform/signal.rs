use crate::error::{Error, Result};

/// Finite n-D real array with periodic indexing, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Signal {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::Shape(format!(
                "shape must be non-empty with positive sizes, got {shape:?}"
            )));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} holds {len} values but {} were given",
                data.len()
            )));
        }
        Ok(Signal { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape.to_vec(), vec![0.0; len])
    }

    /// Signal with `data[i] = f(multi_index(i))`.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut s = Self::zeros(shape)?;
        let mut idx = vec![0usize; shape.len()];
        for v in s.data.iter_mut() {
            *v = f(&idx);
            for a in (0..shape.len()).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(s)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Flat offset of the periodic extension at `k`.
    pub fn offset(&self, k: &[i64]) -> usize {
        let mut off = 0usize;
        for (&ki, &s) in k.iter().zip(&self.shape) {
            off = off * s + ki.rem_euclid(s as i64) as usize;
        }
        off
    }

    /// Value of the periodic extension at `k`.
    pub fn at(&self, k: &[i64]) -> f64 {
        self.data[self.offset(k)]
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Signal) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn rms_diff(&self, other: &Signal) -> Result<f64> {
        self.check_same_shape(other)?;
        let ss: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).powi(2)).sum();
        Ok((ss / self.len() as f64).sqrt())
    }

    pub fn add_assign(&mut self, other: &Signal) -> Result<()> {
        self.check_same_shape(other)?;
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub fn sub_assign(&mut self, other: &Signal) -> Result<()> {
        self.check_same_shape(other)?;
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a -= b);
        Ok(())
    }

    /// Cyclic translation: `y(k) = x(k - v)`.
    pub fn shifted(&self, v: &[i64]) -> Signal {
        let mut out = self.clone();
        let mut idx = vec![0i64; self.dim()];
        for o in out.data.iter_mut() {
            let src: Vec<i64> = idx.iter().zip(v).map(|(a, b)| a - b).collect();
            *o = self.at(&src);
            for a in (0..self.shape.len()).rev() {
                idx[a] += 1;
                if idx[a] < self.shape[a] as i64 {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }

    pub(crate) fn check_same_shape(&self, other: &Signal) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks_shape() {
        assert!(Signal::new(vec![2, 2], vec![0.0; 3]).is_err());
        assert!(Signal::new(vec![], vec![]).is_err());
        assert!(Signal::new(vec![2, 0], vec![]).is_err());
        let s = Signal::from_fn(&[2, 3], |k| (10 * k[0] + k[1]) as f64).unwrap();
        assert_eq!(s.data(), &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
    }

    #[test]
    fn periodic_indexing() {
        let s = Signal::from_fn(&[2, 3], |k| (10 * k[0] + k[1]) as f64).unwrap();
        assert_eq!(s.at(&[-1, -1]), 12.0);
        assert_eq!(s.at(&[2, 4]), 1.0);
        let t = s.shifted(&[0, 1]);
        assert_eq!(t.data(), &[2.0, 0.0, 1.0, 12.0, 10.0, 11.0]);
    }
}
