use crate::error::{Error, Result};
use crate::model::{Plant, Trajectory, UncertaintyClass};

/// Relative slack of the class-membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepMembership {
    pub k: usize,
    pub f_ok: bool,
    pub b_ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport {
    pub steps: Vec<StepMembership>,
    pub passed: bool,
}

impl MembershipReport {
    pub fn first_violation(&self) -> Option<&StepMembership> {
        self.steps.iter().find(|s| !(s.f_ok && s.b_ok))
    }
}

/// Check that every committed `(f_k, b_k)` of `traj` lies in `cls`:
/// `|f_k| ≤ ψ(x_k)(1+tol)` and `b̲(1−tol) ≤ b_k ≤ b̄(1+tol)`.
pub fn validate_membership(
    plant: &dyn Plant,
    cls: &UncertaintyClass,
    traj: &Trajectory,
) -> Result<MembershipReport> {
    if plant.id() != traj.plant_id {
        return Err(Error::IdentifierMismatch {
            plant: plant.id().to_string(),
            trajectory: traj.plant_id.clone(),
        });
    }
    let b_hi = cls.b_upper_or_inf() * (1.0 + MEMBERSHIP_TOL);
    let b_lo = cls.b_lower * (1.0 - MEMBERSHIP_TOL);
    let steps: Vec<StepMembership> = traj
        .steps
        .iter()
        .filter_map(|s| {
            s.hold.map(|h| StepMembership {
                k: s.k,
                f_ok: h.f.abs() <= cls.psi(s.x) * (1.0 + MEMBERSHIP_TOL),
                b_ok: b_lo <= h.b && h.b <= b_hi,
            })
        })
        .collect();
    let passed = steps.iter().all(|s| s.f_ok && s.b_ok);
    Ok(MembershipReport { steps, passed })
}
