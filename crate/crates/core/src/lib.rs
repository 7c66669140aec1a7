//! Evaluation of the truncated theta sum `F_n(z, tau) = sum_{k=0}^n
//! exp(2 pi i (z k + tau k^2))` to within +-eps in polylog(n/eps)
//! arithmetic operations, via a Mordell-integral recursion, together with
//! the direct-summation oracle and instrumentation used to verify it.

pub mod direct;
pub mod erf;
pub mod fast;
pub mod error;
pub mod mordell;
pub mod precision;
pub mod small_tau;
pub mod tables;

pub use direct::{conj_symmetry_check, direct_sum, direct_sum_terms, normalize, NormalizedQuery, ThetaQuery};
pub use erf::{erf_rot, erf_rot_scaled, ErfConfig};
pub use error::{Error, Result};
pub use fast::{fast_eval, fast_eval_traced, fast_eval_with, op_counter, remainder_r, FastOptions, RecursionState, RemainderInput};
pub use mordell::{mordell_h, mordell_h_detailed, MordellEval};
pub use small_tau::{a_row_advance, small_tau_eval, SmallTauState};
pub use precision::{complex_exp_2pii, ops_count, PrecisionContext, XComplex, XReal};
