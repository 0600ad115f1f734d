//! Executable entropy theory for finite-dimensional tracial algebras.
//!
//! The crate is organised around four areas:
//!
//! * [`tracial_algebra`]: entropy, rank and independent joins of
//!   multi-matrix algebras with a trace, the commuting-pair defect identity
//!   and the McMillan trace-band check.
//! * [`classical_smb`]: stationary Markov sources, exact and Monte-Carlo
//!   typical-set masses, partition-transfer harnesses and block entropies.
//! * [`binary_shift`]: the GF(2) commutation form of a binary shift, its
//!   rank sequence and the resulting structure algebras.
//! * [`mean_generator`]: entropy-defect sequences and the independence
//!   criterion, evaluated where the dynamical entropy is classical.
//!
//! All logarithms are natural.

pub mod binary_shift;
pub mod classical_smb;
mod error;
pub mod info;
pub mod mean_generator;
pub mod tracial_algebra;

pub use binary_shift::{
    equivalence_report, form_matrix, gf2_rank, structure_algebra, structure_sequence,
    CommutationSet, EquivalenceReport, Gf2Matrix, StructureRow,
};
pub use classical_smb::{
    atom_measures, block_entropy, block_entropy_brute_force, coarsen_transfer_report, entropy_rate,
    refine_transfer_report, stationary_distribution, typical_mass_exact, typical_mass_mc,
    BlockEntropy, Budget, MarkovSource, McEstimate, PartitionAtoms, TransferKind, TransferReport,
};
pub use error::{Error, Result};
pub use mean_generator::{
    independence_check, markov_defect_sequence, nested_defect_check, DefectRow, DefectSequence,
    IndependenceReport, NestedDefectReport, NestedDefectRow,
};
pub use tracial_algebra::{BandReport, CommutingPairModel, MultiMatrix, PairEntropies, Summand};
