use crate::error::{Error, Result};
use crate::model::Psi;

/// Admissible `(f, b)` pairs: `b̲ ≤ b ≤ b̄` (or unbounded above) and `|f(x,t)| ≤ ψ(x)`.
#[derive(Clone, Debug)]
pub struct UncertaintyClass {
    pub b_lower: f64,
    pub b_upper: Option<f64>,
    pub psi: Psi,
    pub psi_monotone_even: bool,
}

impl UncertaintyClass {
    pub fn new(b_lower: f64, b_upper: Option<f64>, psi: Psi) -> Result<Self> {
        if !(b_lower > 0.0 && b_lower.is_finite()) {
            return Err(Error::invalid(format!("b_lower must be positive and finite, got {b_lower}")));
        }
        if let Some(hi) = b_upper {
            if !(hi >= b_lower && hi.is_finite()) {
                return Err(Error::invalid(format!(
                    "b_upper must be finite and >= b_lower ({b_lower}), got {hi}"
                )));
            }
        }
        let psi_monotone_even = psi.is_monotone_even();
        Ok(Self {
            b_lower,
            b_upper,
            psi,
            psi_monotone_even,
        })
    }

    /// Bounded gain class `b̲ ≤ b ≤ b̄`.
    pub fn bounded(b_lower: f64, b_upper: f64, psi: Psi) -> Result<Self> {
        Self::new(b_lower, Some(b_upper), psi)
    }

    pub fn b_upper_or_inf(&self) -> f64 {
        self.b_upper.unwrap_or(f64::INFINITY)
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.psi.eval(x)
    }

    pub fn with_psi(&self, psi: Psi) -> Self {
        Self {
            psi_monotone_even: psi.is_monotone_even(),
            psi,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_bounds() {
        assert!(UncertaintyClass::new(0.0, None, Psi::Abs).is_err());
        assert!(UncertaintyClass::new(-1.0, None, Psi::Abs).is_err());
        assert!(UncertaintyClass::bounded(1.0, 0.5, Psi::Abs).is_err());
        assert!(UncertaintyClass::bounded(1.0, 1.0, Psi::Abs).is_ok());
        let c = UncertaintyClass::new(1.0, None, Psi::SinAbs).unwrap();
        assert!(!c.psi_monotone_even);
        assert_eq!(c.b_upper_or_inf(), f64::INFINITY);
    }
}
