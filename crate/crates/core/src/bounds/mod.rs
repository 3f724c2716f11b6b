//! Nearest-neighbour decoding bounds and flatness-factor bounds for
//! construction-A ensembles.

mod flatness;
mod nn;

pub use flatness::{
    a_fl, b_fl, b_fl_full_rank, lg_flatness_taus, theorem_ff_check, FfCheck, FfRow,
    FlatnessBoundReport, AFL_DUAL_TOL,
};
pub use nn::{
    b_nn_upper, h_upper, inf_v_nn, ip_upper, lemma_vnn_convergence, ln_h_upper, v_nn,
    NNBoundReport, VnnGapRow,
};
