use crate::model::{CMatrix, ObservationBlock};

/// Least-squares channel estimate under unitary pilots: `Y·Xᴴ/√P_u`.
pub fn ls_estimate(observation: &ObservationBlock) -> CMatrix {
    observation.y_decorrelated.clone()
}
