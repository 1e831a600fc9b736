use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::scalar::Real;

/// RMS log₁₀ residual above which a power-law fit is flagged as poor.
pub const HIGH_RESIDUAL: f64 = 0.5;

/// Radially averaged power spectrum with a power-law fit `P(f) ∝ f^{−λ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralFit {
    /// Bin centres in cycles per pixel, strictly increasing.
    pub frequencies: Vec<f64>,
    /// Mean periodogram power per bin.
    pub power: Vec<f64>,
    pub lambda: f64,
    /// RMS residual of the log₁₀-log₁₀ fit over the fitted bins.
    pub residual: f64,
    /// `[lo, hi]` frequency range used for the fit.
    pub fit_range: (f64, f64),
    pub high_residual: bool,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos()).collect()
}

/// Hann-windowed periodogram, averaged over rings of integer radius (in
/// units of the fundamental of the shorter side), with a least-squares fit
/// of log power against log frequency over the middle decade of radii.
pub fn power_spectrum_slope<T: Real>(image: &ImageGrid<T>) -> Result<SpectralFit> {
    let (w, h) = (image.width(), image.height());
    if w < 32 || h < 32 {
        return Err(Error::input("spectral fit needs at least 32x32 pixels"));
    }
    let mean = image.as_slice().iter().map(|x| x.as_f64()).sum::<f64>() / image.len() as f64;
    if image.as_slice().iter().all(|x| x.as_f64() == mean) {
        return Err(Error::ZeroVariance);
    }
    let (wx, wy) = (hann(w), hann(h));
    let mut buf: Vec<Complex<f64>> = (0..h)
        .flat_map(|r| {
            let wx = &wx;
            let wyr = wy[r];
            (0..w).map(move |c| Complex::new((image[(r, c)].as_f64() - mean) * wx[c] * wyr, 0.0))
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft_forward(w);
    for row in buf.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft_forward(h);
    let mut col = vec![Complex::new(0.0, 0.0); h];
    for c in 0..w {
        for r in 0..h {
            col[r] = buf[r * w + c];
        }
        col_fft.process(&mut col);
        for r in 0..h {
            buf[r * w + c] = col[r];
        }
    }

    let side = w.min(h) as f64;
    let max_radius = w.min(h) / 2;
    let mut sum = vec![0.0; max_radius + 1];
    let mut count = vec![0usize; max_radius + 1];
    for r in 0..h {
        let fy = if r <= h / 2 { r as f64 } else { r as f64 - h as f64 } / h as f64;
        for c in 0..w {
            let fx = if c <= w / 2 { c as f64 } else { c as f64 - w as f64 } / w as f64;
            let k = ((fx * fx + fy * fy).sqrt() * side).round() as usize;
            if (1..=max_radius).contains(&k) {
                sum[k] += buf[r * w + c].norm_sqr();
                count[k] += 1;
            }
        }
    }
    let frequencies: Vec<f64> = (1..=max_radius).map(|k| k as f64 / side).collect();
    let power: Vec<f64> = (1..=max_radius).map(|k| sum[k] / count[k].max(1) as f64).collect();

    // the decade centred (geometrically) on the available radius range
    let centre = (max_radius as f64).sqrt();
    let (lo, hi) = (centre / 10f64.sqrt(), centre * 10f64.sqrt());
    let floor = power.iter().cloned().fold(0.0, f64::max) * 1e-30;
    let pts: Vec<(f64, f64)> = (1..=max_radius)
        .filter(|&k| (k as f64) >= lo && (k as f64) <= hi)
        .map(|k| (frequencies[k - 1].log10(), power[k - 1].max(floor).log10()))
        .collect();
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let residual = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / m).sqrt();
    Ok(SpectralFit {
        frequencies,
        power,
        lambda: -slope,
        residual,
        fit_range: (lo / side, hi / side),
        high_residual: residual > HIGH_RESIDUAL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinusoid_is_flagged() {
        let img = ImageGrid::from_fn(64, 64, |r, c| (std::f64::consts::TAU * (5.0 * c as f64 + 3.0 * r as f64) / 64.0).sin());
        let fit = power_spectrum_slope(&img).unwrap();
        assert!(fit.high_residual, "residual {}", fit.residual);
        let peak = fit.power.iter().cloned().fold(0.0, f64::max);
        let k = fit.power.iter().position(|&p| p == peak).unwrap() + 1;
        assert_eq!(k, 6); // radius sqrt(25 + 9) ≈ 5.8
    }

    #[test]
    fn rejects_small_and_constant() {
        assert!(power_spectrum_slope(&ImageGrid::filled(16, 64, 1.0f64)).is_err());
        assert!(matches!(power_spectrum_slope(&ImageGrid::filled(64, 64, 1.0f64)), Err(Error::ZeroVariance)));
    }
}
