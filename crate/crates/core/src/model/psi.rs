use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Drift envelope `ψ : ℝ → ℝ≥0`, selected by name from a small registry.
#[derive(Clone)]
pub enum Psi {
    Zero,
    Abs,
    Square,
    Const(f64),
    /// `|sin x|·|x|`, a non-monotone envelope.
    SinAbs,
    /// `s·ψ(x)`, used for classes of the form `|f| ≤ d̄·ψ(x)`.
    Scaled(f64, Box<Psi>),
    Custom {
        name: String,
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        monotone_even: bool,
    },
}

impl Psi {
    /// Parse a registry name: `zero`, `abs`, `square`, `sinabs` or `const:<v>`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "zero" => Ok(Psi::Zero),
            "abs" => Ok(Psi::Abs),
            "square" => Ok(Psi::Square),
            "sinabs" => Ok(Psi::SinAbs),
            _ => {
                if let Some(v) = name.strip_prefix("const:") {
                    let v: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad constant in psi `{name}`")))?;
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(Error::invalid(format!("psi constant must be finite and >= 0, got {v}")));
                    }
                    Ok(Psi::Const(v))
                } else {
                    Err(Error::invalid(format!(
                        "unknown psi `{name}` (expected zero, abs, square, sinabs or const:<v>)"
                    )))
                }
            }
        }
    }

    pub fn custom(
        name: impl Into<String>,
        monotone_even: bool,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Psi::Custom {
            name: name.into(),
            eval: Arc::new(eval),
            monotone_even,
        }
    }

    pub fn scaled(self, s: f64) -> Self {
        Psi::Scaled(s, Box::new(self))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Psi::Zero => 0.0,
            Psi::Abs => x.abs(),
            Psi::Square => x * x,
            Psi::Const(v) => *v,
            Psi::SinAbs => x.sin().abs() * x.abs(),
            Psi::Scaled(s, inner) => s * inner.eval(x),
            Psi::Custom { eval, .. } => eval(x),
        }
    }

    /// True when `ψ(x) = ψ(|x|)` and `ψ` is nondecreasing in `|x|`.
    pub fn is_monotone_even(&self) -> bool {
        match self {
            Psi::Zero | Psi::Abs | Psi::Square | Psi::Const(_) => true,
            Psi::SinAbs => false,
            Psi::Scaled(s, inner) => *s >= 0.0 && inner.is_monotone_even(),
            Psi::Custom { monotone_even, .. } => *monotone_even,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Psi::Zero => "zero".into(),
            Psi::Abs => "abs".into(),
            Psi::Square => "square".into(),
            Psi::Const(v) => format!("const:{v}"),
            Psi::SinAbs => "sinabs".into(),
            Psi::Scaled(s, inner) => format!("{s}*{}", inner.name()),
            Psi::Custom { name, .. } => name.clone(),
        }
    }

    /// Closed form of `inf_{|s| ≥ ε} ψ(s)/|s|` where one is known.
    pub fn growth_floor_exact(&self, eps: f64) -> Option<f64> {
        match self {
            Psi::Zero | Psi::Const(_) | Psi::SinAbs => Some(0.0),
            Psi::Abs => Some(1.0),
            Psi::Square => Some(eps),
            Psi::Scaled(s, inner) => inner.growth_floor_exact(eps).map(|a| s * a),
            Psi::Custom { .. } => None,
        }
    }

    /// Closed form of the least `r` with `ψ(x)/|x| ≥ slope` for all `|x| ≥ r`.
    pub fn superlinear_threshold_exact(&self, slope: f64) -> Option<f64> {
        match self {
            Psi::Square => Some(slope),
            Psi::Scaled(s, inner) if *s > 0.0 => inner.superlinear_threshold_exact(slope / s),
            _ => None,
        }
    }
}

impl fmt::Debug for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Psi({})", self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_round_trip() {
        for name in ["zero", "abs", "square", "sinabs", "const:2.5"] {
            assert_eq!(Psi::parse(name).unwrap().name(), name);
        }
        assert!(Psi::parse("cube").is_err());
        assert!(Psi::parse("const:-1").is_err());
        assert!(Psi::parse("const:x").is_err());
    }

    #[test]
    fn scaled_envelope() {
        let p = Psi::Abs.scaled(60.0);
        assert_eq!(p.eval(-2.0), 120.0);
        assert!(p.is_monotone_even());
        assert_eq!(p.growth_floor_exact(1.0), Some(60.0));
    }

    #[test]
    fn square_threshold() {
        assert_eq!(Psi::Square.superlinear_threshold_exact(50.0), Some(50.0));
        assert_eq!(Psi::Square.scaled(2.0).superlinear_threshold_exact(50.0), Some(25.0));
        assert_eq!(Psi::Abs.superlinear_threshold_exact(50.0), None);
    }
}
