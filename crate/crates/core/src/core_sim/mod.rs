//! Wavefunction of walker, coin and environment, and the walk step.

mod model;
mod state;
mod step;

pub use model::{
    gate_to_matrix, hadamard, plus_i_coin, Environment, Gate2, WalkModel, MAX_LOCAL_SITES,
    UNITARY_TOLERANCE,
};
pub use state::{PureState, LAYOUT, NORM_TOLERANCE};
pub use step::{step_local, step_nonlocal, Stepper};

use crate::error::Result;
use crate::linalg::ZERO;

/// `|s₀⟩ ⊗ |c₀⟩ ⊗ |ε₀⟩` for the model.
pub fn init_state(model: &WalkModel) -> Result<PureState> {
    model.validate()?;
    PureState::product(model.sites, model.initial_site, model.initial_coin, &model.initial_env)
}

/// Runs `steps` steps from [`init_state`], calling `observer` with the state
/// at every time `t = 0, 1, …, steps`. An observer error stops the run and is
/// returned unchanged.
pub fn evolve<F>(model: &WalkModel, steps: usize, mut observer: F) -> Result<PureState>
where
    F: FnMut(usize, &PureState) -> Result<()>,
{
    let mut state = init_state(model)?;
    let mut stepper = Stepper::for_model(model)?;
    let mut scratch = vec![ZERO; state.dim()];
    observer(0, &state)?;
    for t in 1..=steps {
        stepper.apply(state.amplitudes(), &mut scratch);
        std::mem::swap(state.amplitudes_mut(), &mut scratch);
        observer(t, &state)?;
    }
    Ok(state)
}
