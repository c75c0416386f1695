//! Conversion of η-approximate oracles into `(δ, L)`-inexact oracles.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleClass {
    /// Objective with `L`-Lipschitz gradient.
    Smooth { l: f64 },
    /// `M`-Lipschitz objective; `l_out` is any positive smoothness parameter the caller picks.
    Lipschitz { m: f64, l_out: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DevolderParams {
    pub delta: f64,
    pub l: f64,
}

pub fn devolder_params(eta: f64, class: OracleClass) -> Result<DevolderParams> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::BadArgs(format!("eta must be finite and >= 0, got {eta}")));
    }
    match class {
        OracleClass::Smooth { l } if l > 0.0 && l.is_finite() => Ok(DevolderParams { delta: 4.0 * eta, l }),
        OracleClass::Lipschitz { m, l_out } if m >= 0.0 && l_out > 0.0 && l_out.is_finite() => {
            Ok(DevolderParams {
                delta: 3.0 * eta + m * m / l_out,
                l: l_out,
            })
        }
        other => Err(Error::BadArgs(format!("invalid oracle class {other:?}"))),
    }
}
