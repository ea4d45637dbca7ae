"""penetra: matrix-free black-box Jacobian eigenpairs and penetrative perturbations."""

from .attack import (
    AttackConfig,
    ChannelBroadcastAdapter,
    PerturbationResult,
    apply_perturbation,
    blend_modes,
    broadcast_adapter,
    default_delta,
    generate,
    penetration_check,
    uniform_baseline,
)
from .eigensolver import (
    DenseOperator,
    DiagonalOperator,
    EigConfig,
    EigPair,
    EigResult,
    dense_eig_reference,
    penetration_residual,
    solve_largest_magnitude,
)
from .errors import (
    Breakdown,
    DegenerateEigenvalue,
    DegenerateVector,
    FormatError,
    InvalidInput,
    InvalidShape,
    NumericalFault,
    OracleFault,
    OracleUnavailable,
    PenetraError,
    TooLarge,
    UnsupportedShape,
)
from .inputs import random_smooth_image
from .jvp import JvpOperator, fd_jacobian_dense
from .linalg import dot, l2_norm, normalize
from .metrics import MetricReport, dice, mean_variance, ssim, summarize
from .oracle import (
    CallableOracle,
    LinearOracle,
    LogisticOracle,
    Oracle,
    OracleInfo,
    QueryCounter,
    connect_external,
    make_linear_oracle,
    make_logistic_oracle,
    parse_oracle_spec,
    seeded_matrix,
    seeded_symmetric_matrix,
    wrap_callable,
)
from .rng import Rng, derive_seed
from .tensorio import read_tensor, write_tensor
from .toyseg import ToySegmenter, make_toy_segmenter

__version__ = "0.1.0"
