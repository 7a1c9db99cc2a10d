"""Learning-based quantum error mitigation from neighbor-circuit features."""

from .paulis import (
    LatticeGraph,
    Observable,
    PauliString,
    build_tfi,
    commutation_sign,
    group_commuting,
    pauli_multiply,
)
from .circuits import (
    AnsatzSpec,
    Circuit,
    Gate,
    bind_uniform,
    build_ansatz,
    gen_training_2design,
    gen_training_all_clifford,
    gen_training_mixed,
    haar_single_qubit_test_circuit,
    is_clifford,
)
from .noise import NoiseModel, NoisyCircuit, PauliChannel, amplify_channel, amplify_circuit, attach_noise
from .exact import check_rotation_2design, ideal_expectation, noisy_expectation
from .tableau import clifford_ideal_expectation, noisy_clifford_expectation
from .sampler import ShotPlan, sample_noisy_estimate
from .neighbors import (
    NeighborMap,
    NeighborSpec,
    cptp_map,
    enumerate_slots,
    random_subset_map,
    weight1_pauli_map,
    weightk_pauli_map,
    zne_map,
    zne_plus_pauli_map,
)
from .features import estimate_features
from .learning import (
    Dataset,
    Estimator,
    chebyshev_envelope,
    collect_dataset,
    empirical_training_size,
    evaluate_mse,
    fit_lasso,
    fit_ols,
    moments,
    plan_training_size,
    predict,
)
from .zne import extrapolate_exponential, extrapolate_linear, zne_mitigate

__version__ = "0.1.0"
