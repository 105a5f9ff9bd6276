//! Density-matrix simulation of the IQP encoding under depolarising noise
//! and the quantum kernels built from it.

mod circuit;
mod kernel;
mod noise;
mod pauli;
mod state;

pub use circuit::{iqp_encode, iqp_layer_unitary, CircuitConfig, Encoding, MAX_QUBITS};
pub use kernel::{
    cross_kernel, encode_all, kernel_element, kernel_from_states, kernel_matrix, KernelMatrix,
};
pub use noise::{
    apply_global_depolarizing, apply_kraus, apply_local_depolarizing,
    apply_local_depolarizing_all, embed_single_qubit, encode_with_global_per_layer,
    encode_with_noise, equivalent_global_p, local_kraus_operators, matched_global_layer_p,
    survival_probability, NoiseModel, NoiseSpec, LOCAL_P_MAX,
};
pub use pauli::{
    eta, exact_noisy_kernel_element, pauli_coefficients, pauli_string, MAX_EXACT_QUBITS,
};
pub use state::DensityMatrix;
