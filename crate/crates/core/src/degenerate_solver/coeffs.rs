//! Coefficient closures `(a, b, O₁…O₅)`.

/// Lower-order terms at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OTerms {
    pub o1: f64,
    pub o2: f64,
    pub o3: f64,
    pub o4: f64,
    pub o5: f64,
}

/// Provider of the constants `a, b` and the small terms `O_k(x, y, ψ, ψ_x, ψ_y)`.
pub trait CoefficientModel {
    fn a(&self) -> f64;
    fn b(&self) -> f64;
    /// A-priori constant `N` with `|O₁| ≤ Nx²`, `|O_k| ≤ Nx`, when one is known.
    fn bound_n(&self) -> Option<f64>;
    fn o_terms(&self, x: f64, y: f64, psi: f64, psi_x: f64, psi_y: f64) -> OTerms;
    /// Short label written to metadata.
    fn name(&self) -> &'static str;
}

/// `O_k ≡ 0`: the model equation, with `a = 0` giving its linear counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelCoefficients {
    pub a: f64,
    pub b: f64,
}

impl CoefficientModel for ModelCoefficients {
    fn a(&self) -> f64 {
        self.a
    }
    fn b(&self) -> f64 {
        self.b
    }
    fn bound_n(&self) -> Option<f64> {
        Some(0.0)
    }
    fn o_terms(&self, _: f64, _: f64, _: f64, _: f64, _: f64) -> OTerms {
        OTerms::default()
    }
    fn name(&self) -> &'static str {
        if self.a == 0.0 {
            "linear"
        } else {
            "model"
        }
    }
}

/// Closure of `ψ = φ − φ₂` near the sonic arc of state (2): `a = γ+1`, `b = 1/c₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReflectionClosure {
    pub gamma: f64,
    pub c2: f64,
}

impl CoefficientModel for ReflectionClosure {
    fn a(&self) -> f64 {
        self.gamma + 1.0
    }
    fn b(&self) -> f64 {
        1.0 / self.c2
    }
    fn bound_n(&self) -> Option<f64> {
        None
    }
    fn o_terms(&self, x: f64, _y: f64, p: f64, px: f64, py: f64) -> OTerms {
        let (g, c2) = (self.gamma, self.c2);
        let r = c2 - x;
        let r2 = r * r;
        OTerms {
            o1: -x * x / c2 + (g + 1.0) / (2.0 * c2) * (2.0 * x - px) * px
                - (g - 1.0) / c2 * (p + py * py / (2.0 * r2)),
            o2: -2.0 / (c2 * r2) * (px + r) * py,
            o3: 1.0 / (c2 * r2)
                * (x * (2.0 * c2 - x)
                    - (g - 1.0) * (p + r * px + 0.5 * px * px)
                    - (g + 1.0) / (2.0 * r2) * py * py),
            o4: 1.0 / r * (x - (g - 1.0) / c2 * (p + r * px + 0.5 * px * px + py * py / (2.0 * r2))),
            o5: -1.0 / (c2 * r2 * r) * (px + 2.0 * c2 - 2.0 * x) * py,
        }
    }
    fn name(&self) -> &'static str {
        "reflection"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_terms_vanish_on_the_sonic_arc() {
        let c = ReflectionClosure { gamma: 1.4, c2: 1.3 };
        let o = c.o_terms(0.0, 0.2, 0.0, 0.0, 0.0);
        assert_eq!(o, OTerms::default());
        // Small terms scale like x² and x on the quadratic profile.
        let a = c.a();
        for &x in &[1e-2, 1e-3] {
            let o = c.o_terms(x, 0.0, x * x / (2.0 * a), x / a, 0.0);
            assert!(o.o1.abs() < 2.0 * x * x);
            assert!(o.o3.abs() < 4.0 * x && o.o4.abs() < 2.0 * x);
            assert_eq!(o.o2, 0.0);
        }
    }
}
