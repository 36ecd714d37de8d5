//! Domain types shared by every module: drift envelopes, uncertainty
//! classes, plants, trajectories and the class-membership validator.

mod class;
mod membership;
mod plant;
mod psi;
mod trajectory;

pub use class::UncertaintyClass;
pub use membership::{validate_membership, MembershipReport, StepMembership, MEMBERSHIP_TOL};
pub use plant::{
    AffinePlant, BProfile, EnvelopeMode, EnvelopePlant, FnPlant, IntervalContext, Plant, Realization,
    StateFn, WorstCasePlant,
};
pub use psi::Psi;
pub use trajectory::{DensePoint, Events, Hold, Step, Trajectory};

pub use crate::control::{Controller, Sample};
pub use crate::schedules::SamplingSchedule;
