//! Ground-truth machinery for checking certificates and the theory behind them
//! on instances small enough to enumerate.

mod attack;
mod concentration;
mod gradcheck;
mod sweep;
mod synth;

pub use attack::{arrangement_candidates, exhaustive_attack, AttackBudget, DEFAULT_ATTACK_BUDGET};
pub use concentration::{concentration_mc_check, localization_eps_uniform, ConcentrationCheck};
pub use gradcheck::{gradient_check, GradientCheck, FD_ABS_TOL, FD_REL_TOL, FD_STEP};
pub use sweep::{
    brute_force_l0_distance, distance_sweep, random_instance, soundness_sweep, Instance,
    InstanceShape, SoundnessReport,
};
pub use synth::{synth_two_class, true_ball_model, SynthSpec};
