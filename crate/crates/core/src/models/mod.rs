//! Operator models: sequence gallery and grammar, lattice spectra of the
//! circle and torus, Toeplitz indices, dense Hermitian matrices and
//! finite-dimensional spectral flow.

mod gallery;
mod lattice;
mod matrix;
mod model;
mod specflow;
mod toeplitz;

pub use gallery::{gallery, GalleryEntry};
pub use lattice::{
    circle_dirac_svals, dirac_residue_constant, laplacian_residue_constant, torus_laplacian_svals, torus_target,
    LATTICE_BUDGET,
};
pub use matrix::{
    eigh, hermitian_eigs, matrix_svals, random_hermitian, random_psd, random_unitary, triangular_eig_list,
    triangular_truncate, DenseMatrix, Eigh, MAX_DIM,
};
pub use model::{
    make_model, read_eigs_file, read_values_file, write_eigs_file, write_values_file, EigenData, EigsFile, Model,
    Provenance, Target, ValuesFile, DEFAULT_EIG_TERMS,
};
pub use specflow::{c_half, spectral_flow_crossings, spectral_flow_integral, spectral_flow_partition, HermitianPath};
pub use toeplitz::{bareiss_rank, lesch_pairing, toeplitz_dixmier_index, toeplitz_truncated_index, ToeplitzProblem};
