"""Antisymmetrized neural networks: exact permutation sums, frequency-domain norms and a
polynomial-time determinant evaluator."""

from antisym.activations import (
    ActivationSpec,
    evaluate,
    ft_density,
    ft_integral,
    get_activation,
    high_pass_eval,
    low_pass_eval,
    normalize_drelu,
    tail_sum,
)
from antisym.envelope import GaussianEnvelope, InducedScalarDistribution, envelope_ft, envelope_tail, make_rng, sample_envelope
from antisym.experiments import ExperimentConfig, ResultRow, read_csv, rows_to_csv, run, write_csv
from antisym.fast import QuadraturePlan, evaluate_network, evaluate_neuron, plan, rescaled_plan_for_smooth
from antisym.kernel import (
    DoubleIntegralConfig,
    detbound_check,
    eigbound_check,
    gram_matrix,
    highpass_isometry_check,
    kernel,
    kernel_2d,
    kernel_grad_bound,
    norm_sq_via_double_integral,
    product_kernel,
)
from antisym.network import NetworkParams, forward, init_deep_network, init_network, separation
from antisym.oracle import (
    brute_antisymmetrize,
    exp_norm_closed_form,
    expected_norm_over_outputs,
    mc_norm_sq,
    slater_exponential,
)
from antisym.permutations import CapacityError

__all__ = [
    "ActivationSpec", "CapacityError", "DoubleIntegralConfig", "ExperimentConfig", "GaussianEnvelope", "InducedScalarDistribution",
    "NetworkParams", "QuadraturePlan", "ResultRow", "brute_antisymmetrize", "detbound_check", "eigbound_check", "envelope_ft",
    "envelope_tail", "evaluate", "evaluate_network", "evaluate_neuron", "exp_norm_closed_form",
    "expected_norm_over_outputs", "forward", "ft_density", "ft_integral", "get_activation", "gram_matrix",
    "high_pass_eval", "highpass_isometry_check", "init_deep_network", "init_network", "kernel", "kernel_2d",
    "kernel_grad_bound", "low_pass_eval", "make_rng", "mc_norm_sq", "norm_sq_via_double_integral",
    "normalize_drelu", "plan", "product_kernel", "read_csv", "rows_to_csv", "run", "rescaled_plan_for_smooth", "sample_envelope", "separation",
    "slater_exponential", "tail_sum", "write_csv",
]
