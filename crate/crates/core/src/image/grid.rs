use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major real raster. `(row, col)` indexing; `row < height`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
    /// Physical spacing between samples, when known.
    pub pitch: Option<T>,
}

impl<T: Real> ImageGrid<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::input("image dimensions must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::input(format!(
                "image data has {} samples, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("image samples must be finite"));
        }
        Ok(Self { width, height, data, pitch: None })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self { width, height, data: vec![value; width * height], pitch: None }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self { width, height, data, pitch: None }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn mean(&self) -> T {
        self.data.iter().copied().sum::<T>() / T::from_usize_lossy(self.data.len())
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        self.data.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::from_usize_lossy(self.data.len())
    }

    pub fn min_max(&self) -> (T, T) {
        self.data
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect(), pitch: self.pitch }
    }

    /// Valid-region 2D correlation with a small kernel (`kernel[i][j]` weights
    /// the pixel at offset `(i, j)` from the window corner).
    pub fn correlate_valid(&self, kernel: &[Vec<T>]) -> Vec<T> {
        let kh = kernel.len();
        let kw = kernel.first().map_or(0, Vec::len);
        if kh == 0 || kw == 0 || kh > self.height || kw > self.width {
            return Vec::new();
        }
        let mut out = Vec::with_capacity((self.height - kh + 1) * (self.width - kw + 1));
        for r in 0..=self.height - kh {
            for c in 0..=self.width - kw {
                let mut acc = T::zero();
                for (i, row) in kernel.iter().enumerate() {
                    for (j, &k) in row.iter().enumerate() {
                        acc += k * self[(r + i, c + j)];
                    }
                }
                out.push(acc);
            }
        }
        out
    }

    /// Horizontal differences `I(r, c+step) − I(r, c)`.
    pub fn horizontal_differences(&self, step: usize) -> Vec<T> {
        let mut out = Vec::new();
        for r in 0..self.height {
            for c in 0..self.width.saturating_sub(step) {
                out.push(self[(r, c + step)] - self[(r, c)]);
            }
        }
        out
    }
}

impl<T> Index<(usize, usize)> for ImageGrid<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.width + c]
    }
}

impl<T> IndexMut<(usize, usize)> for ImageGrid<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.width + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(ImageGrid::new(2, 2, vec![0.0f64; 3]).is_err());
        assert!(ImageGrid::new(1, 1, vec![f64::NAN]).is_err());
        assert!(ImageGrid::<f64>::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn correlation_and_differences() {
        let img = ImageGrid::from_fn(4, 3, |r, c| (r * 4 + c) as f64);
        assert_eq!(img.horizontal_differences(1), vec![1.0; 9]);
        let out = img.correlate_valid(&[vec![-1.0, 1.0]]);
        assert_eq!(out.len(), 9);
        assert!(out.iter().all(|&v| v == 1.0));
    }
}
