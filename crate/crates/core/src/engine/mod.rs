//! The SGD recursion and its learning-rate schedules.

mod matrix;
mod schedule;
pub(crate) mod trajectory;
mod vector;

pub use matrix::LearningRateMatrix;
pub use schedule::{
    random_orthogonal, schedule_eigen_bounds, validate_schedule, EigenBounds, Schedule, ScheduleFamily,
    ScheduleReport, Verdict,
};
pub use trajectory::{run_trajectory, run_trajectory_strided, StepRecord, Termination, Trajectory};
pub use vector::ParameterVector;
pub(crate) use vector::{dist, dot, norm as norm_of, norm_sq};

use crate::{Error, Result};

/// One step of the recursion: `θ − M·g`.
pub fn sgd_step(
    theta: &ParameterVector,
    m: &LearningRateMatrix,
    g: &ParameterVector,
) -> Result<ParameterVector> {
    let p = theta.dim();
    if m.dim() != p || g.dim() != p {
        return Err(Error::contract(format!(
            "sgd_step dimensions disagree: theta {p}, M {}, g {}",
            m.dim(),
            g.dim()
        )));
    }
    let mut out = vec![0.0; p];
    m.apply_into(g.as_slice(), &mut out);
    for (o, t) in out.iter_mut().zip(theta.as_slice()) {
        *o = t - *o;
    }
    Ok(ParameterVector::from_vec_unchecked(out))
}
