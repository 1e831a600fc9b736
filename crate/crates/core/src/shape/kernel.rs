use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Radial kernel `K(r)`, the Green's function of the metric operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `exp(−r²/2σ²)`.
    Gaussian { sigma: f64 },
    /// Matérn ν = 3/2: `(1 + r/τ)·exp(−r/τ)`, a closed-form stand-in for the
    /// Bessel-type Green's function of `(I − Δ)^m`.
    Matern { scale: f64 },
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let k = KernelSpec::Gaussian { sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let w = match *self {
            KernelSpec::Gaussian { sigma } => sigma,
            KernelSpec::Matern { scale } => scale,
        };
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::model("kernel width must be positive"));
        }
        Ok(())
    }

    /// `K(r)`.
    pub fn value<T: Real>(&self, r: T) -> T {
        match *self {
            KernelSpec::Gaussian { sigma } => (-(r * r) / T::lit(2.0 * sigma * sigma)).exp(),
            KernelSpec::Matern { scale } => {
                let s = r / T::lit(scale);
                (T::one() + s) * (-s).exp()
            }
        }
    }

    /// `K'(r)/r`, so that `∇_x K(‖x − y‖) = (K'(r)/r)·(x − y)`. Finite at 0.
    pub fn radial_factor<T: Real>(&self, r: T) -> T {
        match *self {
            KernelSpec::Gaussian { sigma } => -self.value(r) / T::lit(sigma * sigma),
            KernelSpec::Matern { scale } => -(-r / T::lit(scale)).exp() / T::lit(scale * scale),
        }
    }
}

/// `gauss:σ` or `matern:τ`.
impl FromStr for KernelSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (family, width) = s.split_once(':').ok_or_else(|| Error::input(format!("kernel '{s}' is not family:width")))?;
        let w: f64 = width.trim().parse().map_err(|_| Error::input(format!("bad kernel width '{width}'")))?;
        let k = match family.trim() {
            "gauss" | "gaussian" => KernelSpec::Gaussian { sigma: w },
            "matern" => KernelSpec::Matern { scale: w },
            other => return Err(Error::input(format!("unknown kernel family '{other}'"))),
        };
        k.validate()?;
        Ok(k)
    }
}
