//! Solvers that put the TV penalty inside the factorization objective.

mod mul;
mod palm;
mod spectral;

pub use mul::{
    default_eps_tv, mul1_cost, mul1_step, mul2_cost, mul2_step, run_mul, Mul1Params, Mul1State, Mul2Params,
    Mul2State, MulRun, MulSolver,
};
pub use palm::{
    grad_u, grad_v, grad_w, ipalm_run, lipschitz_u, lipschitz_v, lipschitz_w, palm_objective, palm_run,
    sgd_grad_u, sgd_grad_v, smooth_objective, spring_run, spring_step, FactorState, Inertia, MiniBatch,
    PalmParams, PalmRun,
};
pub use spectral::{exact_lambda_max, lambda_max, power_iteration, power_iteration_from, EigenMethod, LAMBDA_FLOOR};
