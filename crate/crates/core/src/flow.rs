//! Greenberg speed-density and flow-density model, used to reason about
//! stable-saturation flow and recommended densities.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("density {rho} veh/km outside model domain [{lo}, {hi}]")]
    DensityOutOfDomain { rho: f64, lo: f64, hi: f64 },
    #[error("peak density {rho_star:.2} veh/km falls outside model domain [{lo}, {hi}]")]
    PeakOutOfDomain { rho_star: f64, lo: f64, hi: f64 },
    #[error("invalid model parameters: {0}")]
    BadParams(String),
}

/// Logarithmic speed-density model u = c0 - c1 ln(rho), valid on
/// [rho_min, rho_max]. Defaults are the published fit to the combined
/// Lincoln tunnel / Merritt parkway data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenbergModel {
    pub c0_kph: f64,
    pub c1_kph: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl Default for GreenbergModel {
    fn default() -> Self {
        GreenbergModel {
            c0_kph: 125.75,
            c1_kph: 25.35,
            rho_min: 8.0,
            rho_max: 115.0,
        }
    }
}

impl GreenbergModel {
    pub fn new(c0_kph: f64, c1_kph: f64, rho_min: f64, rho_max: f64) -> Result<Self, FlowError> {
        if !(c0_kph > 0.0 && c1_kph > 0.0) {
            return Err(FlowError::BadParams("c0 and c1 must be positive".into()));
        }
        if !(rho_min > 0.0 && rho_min < rho_max) {
            return Err(FlowError::BadParams(
                "need 0 < rho_min < rho_max".into(),
            ));
        }
        Ok(GreenbergModel {
            c0_kph,
            c1_kph,
            rho_min,
            rho_max,
        })
    }

    fn check_domain(&self, rho: f64) -> Result<(), FlowError> {
        if !rho.is_finite() || rho < self.rho_min || rho > self.rho_max {
            return Err(FlowError::DensityOutOfDomain {
                rho,
                lo: self.rho_min,
                hi: self.rho_max,
            });
        }
        Ok(())
    }

    /// Vehicle speed [km/h] at density `rho` [veh/km].
    pub fn speed_at_density(&self, rho: f64) -> Result<f64, FlowError> {
        self.check_domain(rho)?;
        Ok(self.c0_kph - self.c1_kph * rho.ln())
    }

    /// Vehicle flow [veh/h/lane] at density `rho` [veh/km]: q = rho * u.
    pub fn flow_at_density(&self, rho: f64) -> Result<f64, FlowError> {
        Ok(rho * self.speed_at_density(rho)?)
    }

    /// Stationary point of the flow curve: rho* = exp((c0 - c1)/c1), and the
    /// flow there. Errors when rho* falls outside the model domain.
    pub fn peak_flow(&self) -> Result<(f64, f64), FlowError> {
        let rho_star = ((self.c0_kph - self.c1_kph) / self.c1_kph).exp();
        if rho_star < self.rho_min || rho_star > self.rho_max {
            return Err(FlowError::PeakOutOfDomain {
                rho_star,
                lo: self.rho_min,
                hi: self.rho_max,
            });
        }
        let q_star = self.flow_at_density(rho_star)?;
        Ok((rho_star, q_star))
    }
}
