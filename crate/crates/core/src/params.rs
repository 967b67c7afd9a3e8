use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model parameters `(d, alpha, mu, beta, s)`.
///
/// `d` is the u-diffusivity, `alpha = f'(0)` the KPP growth rate, `mu` the
/// linear Swift-Hohenberg coefficient, `beta` the coupling strength and `s`
/// the speed of the comoving frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub d: f64,
    pub alpha: f64,
    pub mu: f64,
    pub beta: f64,
    pub s: f64,
}

impl Params {
    pub fn new(d: f64, alpha: f64, mu: f64, beta: f64, s: f64) -> Result<Self> {
        let p = Params { d, alpha, mu, beta, s };
        p.validate()?;
        Ok(p)
    }

    /// Parameters in the frame of the linear spreading speed.
    pub fn critical(d: f64, alpha: f64, mu: f64, beta: f64) -> Result<Self> {
        if !(d > 0.0 && alpha > 0.0) {
            return Err(Error::Domain("d and alpha must be positive".into()));
        }
        Self::new(d, alpha, mu, beta, 2.0 * (d * alpha).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d", self.d),
            ("alpha", self.alpha),
            ("mu", self.mu),
            ("beta", self.beta),
            ("s", self.s),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} is not finite")));
            }
        }
        if self.d <= 0.0 {
            return Err(Error::Domain("d must be positive".into()));
        }
        if self.alpha <= 0.0 {
            return Err(Error::Domain("alpha must be positive".into()));
        }
        if self.s < 0.0 {
            return Err(Error::Domain("s must be nonnegative".into()));
        }
        Ok(())
    }

    /// Linear spreading speed `2 sqrt(d alpha)`.
    pub fn s_star(&self) -> f64 {
        2.0 * (self.d * self.alpha).sqrt()
    }

    /// Exponential rate `-s / (2d)` that centres the u-spectrum.
    pub fn eta_star(&self) -> f64 {
        -self.s / (2.0 * self.d)
    }

    pub fn with_s(&self, s: f64) -> Self {
        Params { s, ..*self }
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Params { mu, ..*self }
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Params { beta, ..*self }
    }

    /// Whether the frame speed equals `s_star` up to rounding.
    pub fn at_critical_speed(&self) -> bool {
        (self.s - self.s_star()).abs() <= 1e-12 * self.s_star().max(1.0)
    }

    pub(crate) fn require_critical(&self, what: &str) -> Result<()> {
        if self.at_critical_speed() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{what} requires s = s_star = {}, got s = {}",
                self.s_star(),
                self.s
            )))
        }
    }
}
