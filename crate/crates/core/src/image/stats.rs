use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::scalar::Real;

/// `E(x − x̄)⁴ / σ⁴` with population moments; 3 for a Gaussian.
pub fn kurtosis<T: Real>(samples: &[T]) -> Result<T> {
    if samples.len() < 4 {
        return Err(Error::input("kurtosis needs at least 4 samples"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|x| x.as_f64()).sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in samples {
        let d = x.as_f64() - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if !(m2 > 0.0) || m2 <= f64::EPSILON * f64::EPSILON * mean * mean {
        return Err(Error::ZeroVariance);
    }
    Ok(T::lit(m4 / (m2 * m2)))
}

/// Histogram peakedness at zero: mass of the bin `[−w/2, w/2]` divided by the
/// mean mass of its two neighbours, with `w = rel_width · σ`. About 1 for a
/// density smooth at the origin; large when many samples are exactly zero.
pub fn central_bin_ratio<T: Real>(samples: &[T], rel_width: f64) -> Result<f64> {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return Err(Error::input("no samples"));
    }
    let mean = samples.iter().map(|x| x.as_f64()).sum::<f64>() / n;
    let var = samples.iter().map(|x| (x.as_f64() - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let w = rel_width * var.sqrt();
    let (mut center, mut sides) = (0usize, 0usize);
    for x in samples {
        let k = (x.as_f64() / w + 0.5).floor();
        if k == 0.0 {
            center += 1;
        } else if k == 1.0 || k == -1.0 {
            sides += 1;
        }
    }
    if sides == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(center as f64 / (sides as f64 / 2.0))
}

/// Exact 2×2 block means; the result has half the width and height.
pub fn block_renormalize<T: Real>(image: &ImageGrid<T>) -> Result<ImageGrid<T>> {
    let (w, h) = (image.width(), image.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(Error::input(format!("block averaging needs even dimensions, got {w}x{h}")));
    }
    let quarter = T::lit(0.25);
    let mut out = ImageGrid::from_fn(w / 2, h / 2, |r, c| {
        let (r2, c2) = (2 * r, 2 * c);
        (image[(r2, c2)] + image[(r2, c2 + 1)] + image[(r2 + 1, c2)] + image[(r2 + 1, c2 + 1)]) * quarter
    });
    out.pitch = image.pitch.map(|p| p + p);
    Ok(out)
}

/// A named zero-mean 3×3 filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    pub name: &'static str,
    pub kernel: [[f64; 3]; 3],
}

impl Filter {
    /// Valid-region responses over an image.
    pub fn apply<T: Real>(&self, image: &ImageGrid<T>) -> Vec<T> {
        let k: Vec<Vec<T>> = self.kernel.iter().map(|r| r.iter().map(|&x| T::lit(x)).collect()).collect();
        image.correlate_valid(&k)
    }
}

/// Small bank of zero-mean 3×3 filters: first differences in four
/// directions, a discrete Laplacian, and a checkerboard.
pub fn filter_bank() -> Vec<Filter> {
    vec![
        Filter { name: "dx", kernel: [[0.0, 0.0, 0.0], [0.0, -1.0, 1.0], [0.0, 0.0, 0.0]] },
        Filter { name: "dy", kernel: [[0.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 1.0, 0.0]] },
        Filter { name: "diag", kernel: [[0.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]] },
        Filter { name: "antidiag", kernel: [[0.0, 0.0, 0.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]] },
        Filter { name: "laplacian", kernel: [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]] },
        Filter { name: "checker", kernel: [[1.0, -1.0, 1.0], [-1.0, 0.0, -1.0], [1.0, -1.0, 1.0]] },
    ]
}
