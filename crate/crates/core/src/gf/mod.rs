//! Linear algebra over `F_p`: generator matrices, codeword enumeration,
//! random-matrix ensembles, the rank law and collision statistics.

mod ensemble;
mod matrix;
mod pochhammer;

pub use ensemble::{
    sample_matrix, xi_stats, xi_stats_capped, EnsembleSpec, ExplicitEnsemble, XiStats,
};
pub(crate) use matrix::checked_power;
pub use matrix::{all_matrices, CodewordList, GeneratorMatrix, DEFAULT_ENUMERATION_CAP};
pub use pochhammer::{
    euler_phi, full_rank_bound_holds, full_rank_mass, ln_one_minus_xi_uniform, ln_rank_probability,
    pochhammer, rank_count, rank_distribution, xi_zero_uniform, xi_zero_uniform_exact,
};
