//! Discrete phase space for systems of `n` qudits of prime dimension `d`.
//!
//! The state space of `n` qudits has dimension `d^n`, and its natural
//! phase space is the `d^n × d^n` grid coordinatized by the Galois field
//! GF(d^n): points are pairs `(μ, ν)` of field elements. This crate
//! implements the full toolchain on that grid:
//!
//! * [`field`] — GF(d^n) arithmetic: polynomial-basis representation,
//!   discrete-log tables, trace and additive characters, dual and selfdual
//!   bases (Lidl & Niederreiter, *Finite Fields*, Cambridge, 1997).
//! * [`operators`] — generalized Pauli operators, the finite Fourier
//!   transform, phased displacement operators, parity, squeeze
//!   (scaling) operators, and the Harper Hamiltonian
//!   (Schwinger, Proc. Natl. Acad. Sci. 46, 570 (1960);
//!   Vourdas, Rep. Prog. Phys. 67, 267 (2004)).
//! * [`states`] — the Fourier-invariant reference state built from a
//!   Jacobi theta sum, displaced (coherent) and squeezed copies of it,
//!   and their tensor factorization over selfdual bases.
//! * [`quasidist`] — s-parametrized kernels and the P, Wigner, and Q
//!   quasidistribution functions, their inversion, marginals, and line
//!   sums (Wootters, Ann. Phys. 176, 1 (1987); Gibbons, Hoffman &
//!   Wootters, Phys. Rev. A 70, 062101 (2004)).
//! * [`io`] — versioned JSON and CSV export/import for states, operators,
//!   and grids.
//!
//! Shared conventions (documented on the items that pin them):
//!
//! * Field elements are little-endian coefficient vectors over the
//!   polynomial basis `{1, x, …, x^{n−1}}`; the canonical matrix index of
//!   a basis ket `|λ⟩` is the coefficient integer `Σ c_k d^k`.
//! * `U_ν |λ⟩ = |λ + ν⟩`, `V_μ |λ⟩ = χ(μλ) |λ⟩`, and
//!   `D(μ,ν) = φ(μ,ν) U_ν V_μ` with `φ = χ(2⁻¹ μν)` in odd
//!   characteristic and a per-factor power of `i` in characteristic 2.
//! * Quasidistribution grids are indexed `(μ, ν)` and carry *raw*
//!   normalization `Σ W = d^n · Tr ρ`.

pub mod field;
pub mod io;
pub mod operators;
pub mod quasidist;
pub mod states;

mod error;

pub use error::QpsError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, QpsError>;

pub use field::{
    make_field, make_field_capped, tuple_index_big_endian, Basis, BasisKind, FieldContext,
    FieldElement, SelfdualSearch, DEFAULT_SIZE_CAP,
};
pub use operators::{
    basis_change_operator, coordinate_permutation, displacement, factorize_displacement, fourier,
    generator_u, generator_v, harper_hamiltonian, kron_all, parity_from_displacements,
    parity_permutation, squeeze_operator, Operator, OperatorTags, PhasePoint, HERMITIAN_TOL,
    UNITARY_TOL,
};
pub use quasidist::{
    closed_form_cross_check, closed_form_reference_wigner, displacement_overlaps, kernel,
    line_sum, marginal, q_function, quasidist, reconstruct, Kernel, MarginalAxis, Normalization,
    QuasiDistGrid, SOrder, P_SINGULARITY_THRESHOLD, Q_FUNCTION_SCALE,
};
pub use states::{
    canonical_fiducial, circular_dispersion, coherent_state, multi_reference_state,
    qubit_reference, reference_state, squeeze_coefficient_map, squeezed_state, ReferenceState,
    StateVector, ThetaParams, STATE_NORM_TOL,
};
