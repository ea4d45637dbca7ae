"""Matrix-free Jacobian-vector products by central differences.

One application of the operator costs exactly two oracle evaluations:

    J v ~= (f(x + eps v) - f(x - eps v)) / (2 eps)

The quotient has O(eps^2) truncation error on smooth oracles and is exact
(up to rounding) on affine ones.  No n x n storage is ever touched; the
explicit dense Jacobian below exists only as a small-n verification tool
and refuses to materialize anything above its guard.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput, InvalidShape, NumericalFault, TooLarge

DENSE_GUARD = 4096


class JvpOperator:
    """Implicit linear map v -> J v at a fixed base point.

    The operator is square: either the oracle itself maps n inputs to n
    outputs, or a channel-broadcast adapter (attack module) folds a
    multi-channel oracle down to one spatial grid.  Immutable after
    construction; safe to share.
    """

    def __init__(self, oracle, x_base, epsilon: float = 1e-4, adapter=None,
                 relative_epsilon: bool = False):
        if epsilon <= 0:
            raise InvalidInput(f"epsilon must be positive, got {epsilon}")
        x_base = np.asarray(x_base, dtype=np.float64)
        if x_base.shape != oracle.info.input_shape:
            raise InvalidShape(
                f"base point shape {x_base.shape} != oracle input "
                f"{oracle.info.input_shape}"
            )
        if adapter is None:
            n_in = int(np.prod(oracle.info.input_shape))
            n_out = int(np.prod(oracle.info.output_shape))
            if n_in != n_out:
                raise InvalidShape(
                    f"oracle maps {n_in} -> {n_out} values; a square operator "
                    "needs the channel-broadcast adapter"
                )
            self.n = n_in
        else:
            self.n = adapter.n
        self.oracle = oracle
        self.x_base = x_base.copy()
        self.adapter = adapter
        if relative_epsilon:
            epsilon = epsilon * (1.0 + float(np.max(np.abs(x_base))))
        self.epsilon = float(epsilon)

    @property
    def oracle_evals(self) -> int:
        return self.oracle.counter.total_evals

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Central-difference J v; exactly two oracle evaluations."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.n,):
            raise InvalidShape(f"direction shape {v.shape}, expected ({self.n},)")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("non-finite direction vector")
        eps = self.epsilon
        step = self.adapter.expand(v) if self.adapter else v.reshape(self.oracle.info.input_shape)
        f_plus = self.oracle.eval(self.x_base + eps * step)
        f_minus = self.oracle.eval(self.x_base - eps * step)
        diff = f_plus - f_minus
        out = (self.adapter.reduce(diff) if self.adapter else diff.ravel()) / (2.0 * eps)
        if not np.all(np.isfinite(out)):
            bad = np.flatnonzero(~np.isfinite(out))
            raise NumericalFault(
                f"non-finite JVP at {bad.size} indices (first: {bad[:8].tolist()})",
                details={"indices": bad, "f_plus": f_plus, "f_minus": f_minus},
            )
        return out

    # The eigensolver speaks matvec; keep apply as the public verb.
    matvec = apply


def fd_jacobian_dense(oracle, x_base, epsilon: float = 1e-4) -> np.ndarray:
    """Explicit [n_out, n_in] Jacobian, column i from (f(x+eps e_i) - f(x-eps e_i)) / (2 eps).

    Costs exactly 2 * n_in oracle evaluations; guarded to small problems.
    """
    if epsilon <= 0:
        raise InvalidInput(f"epsilon must be positive, got {epsilon}")
    x_base = np.asarray(x_base, dtype=np.float64)
    if x_base.shape != oracle.info.input_shape:
        raise InvalidShape(
            f"base point shape {x_base.shape} != oracle input {oracle.info.input_shape}"
        )
    n_in = int(np.prod(oracle.info.input_shape))
    n_out = int(np.prod(oracle.info.output_shape))
    if n_in > DENSE_GUARD:
        raise TooLarge(f"dense Jacobian with n_in={n_in} exceeds guard {DENSE_GUARD}")
    jac = np.empty((n_out, n_in), dtype=np.float64)
    flat_base = x_base.ravel()
    for i in range(n_in):
        e = np.zeros(n_in)
        e[i] = 1.0
        xp = (flat_base + epsilon * e).reshape(x_base.shape)
        xm = (flat_base - epsilon * e).reshape(x_base.shape)
        jac[:, i] = (oracle.eval(xp) - oracle.eval(xm)).ravel() / (2.0 * epsilon)
    return jac
