"""Sparse GF(2) extractor families: samplers, verification oracles, and CLI.

Hot kernels run on a compiled Cython backend when available and fall back to
numpy otherwise; ``sparsext.kernels.BACKEND`` names the one in use.
"""

from .families import (ConstructBError, FamilyInstance, StrongFamilySpec,
                       WeakFamilySpec, construct_B, evaluate, sample_strong,
                       sample_weak, strong_bias, weak_bias)
from .gf2 import (BitVector, BudgetExceededError, Exceeds, Gf2Matrix,
                  left_kernel_basis, matvec, matvec_add,
                  min_weight_left_kernel, rank, sparsity_and_locality)
from .kernels import BACKEND
from .measure import (collision_probability, collision_sd_bound, family_error,
                      output_distribution, statistical_distance,
                      strong_error_bound, weak_error_bound)
from .sources import (ExplicitDistribution, SourceSampler, binary_entropy,
                      entropy_inverse_bounds, flat_source, min_entropy,
                      solve_bias, truncated_biased_table)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BitVector",
    "BudgetExceededError",
    "ConstructBError",
    "Exceeds",
    "ExplicitDistribution",
    "FamilyInstance",
    "Gf2Matrix",
    "SourceSampler",
    "StrongFamilySpec",
    "WeakFamilySpec",
    "__version__",
    "binary_entropy",
    "collision_probability",
    "collision_sd_bound",
    "construct_B",
    "entropy_inverse_bounds",
    "evaluate",
    "family_error",
    "flat_source",
    "left_kernel_basis",
    "matvec",
    "matvec_add",
    "min_entropy",
    "min_weight_left_kernel",
    "output_distribution",
    "rank",
    "sample_strong",
    "sample_weak",
    "solve_bias",
    "sparsity_and_locality",
    "statistical_distance",
    "strong_bias",
    "strong_error_bound",
    "truncated_biased_table",
    "weak_bias",
    "weak_error_bound",
]
