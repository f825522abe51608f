//! Finite-volume Anderson Hamiltonians
//! `H^(Λ) ψ(x) = sum_{|x'-x|=1, x' ∈ Λ} ψ(x') + λ ω(x) ψ(x)`
//! on boxes with deleted sites, their Green's functions, and direct numerical
//! checks of the resolvent identities behind the fractional moment bound.

mod disorder;
mod green;
mod hamiltonian;
mod identities;
mod region;
mod solver;

pub use disorder::{mix64, substream, uniform_variate, DisorderSample};
pub use green::{green, GreenEvaluation, GreenSolver, RESIDUAL_TOLERANCE};
pub use hamiltonian::Hamiltonian;
pub use identities::{
    verify_depleted_identity, verify_resolvent_expansion, verify_schur_diagonal, SchurCheck, SCHUR_TOLERANCE,
};
pub use region::Region;
pub use solver::BandLu;
