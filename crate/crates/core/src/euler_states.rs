//! Polytropic and isothermal closures, uniform pseudo-potential states and the
//! incident shock.

use crate::error::{Error, Result};
use crate::math;

/// Thermodynamic inputs `(γ, ρ₀, ρ₁)`, with `γ = 1` selecting the isothermal law.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GasParameters {
    pub gamma: f64,
    pub rho0: f64,
    pub rho1: f64,
}

impl GasParameters {
    /// Validates `γ ≥ 1`, `ρ₀ > 0` and `ρ₁ > ρ₀`.
    pub fn new(gamma: f64, rho0: f64, rho1: f64) -> Result<Self> {
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter("gamma must be >= 1"));
        }
        if !(rho0 > 0.0) || !rho0.is_finite() {
            return Err(Error::InvalidParameter("rho0 must be positive"));
        }
        if !(rho1 > rho0) || !rho1.is_finite() {
            return Err(Error::InvalidShock);
        }
        Ok(Self { gamma, rho0, rho1 })
    }

    /// Builds parameters without the entropy check on `ρ₁`.
    pub fn unchecked(gamma: f64, rho0: f64, rho1: f64) -> Self {
        Self { gamma, rho0, rho1 }
    }

    pub fn is_isothermal(&self) -> bool {
        self.gamma == 1.0
    }

    /// Squared sound speed `c²(ρ) = ρ^{γ−1}`; identically 1 for the isothermal law.
    pub fn sound_speed_sq(&self, rho: f64) -> f64 {
        if self.is_isothermal() {
            1.0
        } else {
            math::powf(rho, self.gamma - 1.0)
        }
    }

    /// Inverse of the Bernoulli law in terms of `B = φ + |Dφ|²/2`.
    pub fn density_from_head(&self, head: f64) -> Result<f64> {
        if self.is_isothermal() {
            let rho = self.rho0 * math::exp(-head);
            if rho > 0.0 && rho.is_finite() {
                Ok(rho)
            } else {
                Err(Error::VacuumState)
            }
        } else {
            let gm1 = self.gamma - 1.0;
            let arg = math::powf(self.rho0, gm1) - gm1 * head;
            if !(arg > 0.0) {
                return Err(Error::VacuumState);
            }
            Ok(math::powf(arg, 1.0 / gm1))
        }
    }
}

/// Uniform state `φ(ξ,η) = −(ξ²+η²)/2 + uξ + vη + k` with density `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UniformState {
    pub u: f64,
    pub v: f64,
    pub k: f64,
    pub rho: f64,
}

impl UniformState {
    pub fn phi(&self, xi: f64, eta: f64) -> f64 {
        -0.5 * (xi * xi + eta * eta) + self.u * xi + self.v * eta + self.k
    }

    /// Pseudo-velocity `Dφ = (u − ξ, v − η)`.
    pub fn grad(&self, xi: f64, eta: f64) -> (f64, f64) {
        (self.u - xi, self.v - eta)
    }

    /// The constant `φ + |Dφ|²/2 = (u² + v²)/2 + k`.
    pub fn bernoulli_head(&self) -> f64 {
        0.5 * (self.u * self.u + self.v * self.v) + self.k
    }

    /// State (0): at rest with density `ρ₀`.
    pub fn state0(gas: &GasParameters) -> Self {
        Self { u: 0.0, v: 0.0, k: 0.0, rho: gas.rho0 }
    }

    /// State (1) behind the incident shock `ξ = ξ₀`.
    pub fn state1(gas: &GasParameters, xi0: f64, u1: f64) -> Self {
        Self { u: u1, v: 0.0, k: -u1 * xi0, rho: gas.rho1 }
    }
}

/// Density from the Bernoulli law given `|Dφ|²` and `φ`.
pub fn density_from_bernoulli(grad_sq: f64, phi: f64, gas: &GasParameters) -> Result<f64> {
    gas.density_from_head(phi + 0.5 * grad_sq)
}

/// Critical speed `c* = sqrt(2/(γ+1)·(ρ₀^{γ−1} − (γ−1)φ))`.
pub fn critical_speed(phi: f64, gas: &GasParameters) -> Result<f64> {
    if gas.is_isothermal() {
        return Ok(1.0);
    }
    let gm1 = gas.gamma - 1.0;
    let arg = math::powf(gas.rho0, gm1) - gm1 * phi;
    if arg < 0.0 {
        return Err(Error::VacuumState);
    }
    Ok(math::sqrt(2.0 / (gas.gamma + 1.0) * arg))
}

/// Strict ellipticity test `|Dφ| < c*(φ)`.
pub fn is_elliptic_at(grad: (f64, f64), phi: f64, gas: &GasParameters) -> Result<bool> {
    let cs = critical_speed(phi, gas)?;
    Ok(math::hypot(grad.0, grad.1) < cs)
}

/// Location `ξ₀` and downstream velocity `u₁` of the incident normal shock.
pub fn incident_shock(gas: &GasParameters) -> Result<(f64, f64)> {
    let (r0, r1) = (gas.rho0, gas.rho1);
    if !(r1 > r0) {
        return Err(Error::InvalidShock);
    }
    // ln(ρ₁/ρ₀) and ρ₁^{γ−1} − ρ₀^{γ−1} are formed without cancellation for weak shocks.
    let l = math::ln_1p((r1 - r0) / r0);
    let num = if gas.is_isothermal() {
        2.0 * l
    } else {
        let gm1 = gas.gamma - 1.0;
        2.0 * math::powf(r0, gm1) * math::exp_m1(gm1 * l) / gm1
    };
    let bracket = num / ((r1 - r0) * (r1 + r0));
    let xi0 = r1 * math::sqrt(bracket);
    let u1 = xi0 * (r1 - r0) / r1;
    Ok((xi0, u1))
}

/// Mass-flux jump `ρ_L Dφ_L·ν − ρ_R Dφ_R·ν` at a point, densities taken from Bernoulli.
pub fn rh_residual(
    left: &UniformState,
    right: &UniformState,
    point: (f64, f64),
    normal: (f64, f64),
    gas: &GasParameters,
) -> Result<f64> {
    let flux = |s: &UniformState| -> Result<f64> {
        let g = s.grad(point.0, point.1);
        let rho = density_from_bernoulli(g.0 * g.0 + g.1 * g.1, s.phi(point.0, point.1), gas)?;
        Ok(rho * (g.0 * normal.0 + g.1 * normal.1))
    };
    Ok(flux(left)? - flux(right)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn air() -> GasParameters {
        GasParameters::new(1.4, 1.0, 2.0).unwrap()
    }

    #[test]
    fn rest_state_density() {
        assert_eq!(density_from_bernoulli(0.0, 0.0, &air()).unwrap(), 1.0);
        let iso = GasParameters::new(1.0, 1.3, 2.0).unwrap();
        assert_eq!(density_from_bernoulli(0.0, 0.0, &iso).unwrap(), 1.3);
    }

    #[test]
    fn polytropic_density_value() {
        let rho = density_from_bernoulli(0.2, 0.1, &air()).unwrap();
        assert!((rho - 0.811_838_360_266_377).abs() < 1e-14, "{rho}");
    }

    #[test]
    fn vacuum_is_an_error() {
        assert_eq!(density_from_bernoulli(0.0, 3.0, &air()), Err(Error::VacuumState));
        assert_eq!(critical_speed(3.0, &air()), Err(Error::VacuumState));
    }

    #[test]
    fn critical_speed_values() {
        let c = critical_speed(0.0, &air()).unwrap();
        assert!((c - 0.912_870_929_175_276_9).abs() < 1e-14);
        let iso = GasParameters::new(1.0, 1.0, 2.0).unwrap();
        assert_eq!(critical_speed(-4.0, &iso).unwrap(), 1.0);
        assert!(critical_speed(1.0 / (1.4 - 1.0), &air()).unwrap() < 1e-7);
    }

    #[test]
    fn ellipticity_cases() {
        let g = air();
        assert!(is_elliptic_at((0.0, 0.0), 0.0, &g).unwrap());
        let c = critical_speed(0.0, &g).unwrap();
        assert!(!is_elliptic_at((c, 0.0), 0.0, &g).unwrap());
        assert!(!is_elliptic_at((1.0, 0.0), 0.0, &g).unwrap());
    }

    #[test]
    fn incident_shock_fixture() {
        let (xi0, u1) = incident_shock(&air()).unwrap();
        assert!((xi0 - 1.459_470_019_728_381).abs() < 1e-13);
        assert!((u1 - 0.729_735_009_864_190_7).abs() < 1e-13);
        assert!((2.0 * (u1 - xi0) + xi0).abs() < 1e-13);
    }

    #[test]
    fn weak_shock_limit() {
        let g = GasParameters::new(1.4, 1.0, 1.0 + 1e-9).unwrap();
        let (xi0, u1) = incident_shock(&g).unwrap();
        assert!((xi0 - 1.0).abs() < 1e-8);
        assert!(u1 < 1e-8);
    }

    #[test]
    fn entropy_violation_rejected() {
        assert_eq!(GasParameters::new(1.4, 1.0, 1.0), Err(Error::InvalidShock));
        let g = GasParameters::unchecked(1.4, 1.0, 0.5);
        assert_eq!(incident_shock(&g), Err(Error::InvalidShock));
    }

    #[test]
    fn incident_shock_balances_flux() {
        for &(gamma, r1) in &[(1.4, 2.0), (1.0, 2.0), (2.0, 5.0), (1.1, 1.01)] {
            let g = GasParameters::new(gamma, 1.0, r1).unwrap();
            let (xi0, u1) = incident_shock(&g).unwrap();
            let s0 = UniformState::state0(&g);
            let s1 = UniformState::state1(&g, xi0, u1);
            let res = rh_residual(&s0, &s1, (xi0, 0.7), (1.0, 0.0), &g).unwrap();
            assert!(res.abs() < 1e-12, "{gamma}: {res}");
            assert!((s0.phi(xi0, 3.0) - s1.phi(xi0, 3.0)).abs() < 1e-14);
            let rho1 = g.density_from_head(s1.bernoulli_head()).unwrap();
            assert!((rho1 - r1).abs() < 1e-12 * r1);
        }
    }

    #[test]
    fn identical_states_have_no_jump() {
        let g = air();
        let s = UniformState { u: 0.3, v: -0.2, k: 0.1, rho: 1.0 };
        assert_eq!(rh_residual(&s, &s, (0.4, 0.5), (0.6, 0.8), &g).unwrap(), 0.0);
    }
}
