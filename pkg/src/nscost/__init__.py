"""SDP toolkit for bidirectional classical communication costs of bipartite
quantum channels under non-signalling assistance."""

from .channels import (
    BipartiteChannel,
    NsFlags,
    choi_from_unitary,
    classical_noiseless_choi,
    compose,
    depolarize_global,
    is_ns_a_to_b,
    is_ns_b_to_a,
    load_channel_spec,
    noisy_partial_swap,
    noisy_swap_alpha,
    ns_flags,
    partial_swap_unitary,
    random_ns_channel,
    swap_alpha_unitary,
    tensor_channels,
)
from .conic import ConicProblem, compile_problem, hermitian_to_real_embedding
from .costs import (
    CostReport,
    asymptotic_lower_bound,
    dmax_bidirectional,
    dmax_oneway,
    general_sim_error,
    hmin_bipartite,
    min_sim_error,
    one_shot_exact_cost,
    p2p_exact_cost,
    robustness,
    smooth_dmax,
)
from .solver import SolveReport, SolverConfig, solve
from .tensors import (
    HermitianOperator,
    MaxEntangledVector,
    SystemLayout,
    min_eigenvalue,
    partial_trace,
    permute_systems,
    tensor,
)

__version__ = "0.1.0"
