"""Penetrative-perturbation generation and application.

Pipeline: wrap the oracle in a finite-difference JVP operator at the base
image (through the channel-broadcast adapter when the oracle maps c input
channels to one output channel), extract the largest-magnitude eigenpairs,
scale the chosen unit eigenvector by delta, and superimpose.  Uniform
random noise of matched L2 magnitude provides the control condition.

A perturbation that is an eigenvector of the Jacobian reappears in the
output scaled by its eigenvalue instead of being attenuated:

    f(x + delta v_i) = f(x) + delta lambda_i v_i + O(delta^2)

``penetration_check`` measures how well that identity holds at a given
delta (it degrades under output saturation, which is expected and
reported rather than asserted).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateEigenvalue,
    InvalidInput,
    InvalidShape,
    UnsupportedShape,
)
from .eigensolver import EigConfig, EigResult, solve_largest_magnitude
from .jvp import JvpOperator
from .rng import Rng

DELTA_PER_DIM = 2e-3  # default delta = 2e-3 * n, n = h * w


@dataclass
class AttackConfig:
    epsilon: float = 1e-4
    delta: float | None = None  # None: auto, DELTA_PER_DIM * operator dim
    tol: float = 1e-12
    itmax: int = 100
    ncv: int | None = None
    k: int = 1
    mode_index: int = 1
    clamp: tuple[float, float] | None = None
    seed: int = 0
    solver_mode: str = "symmetric"

    def validate(self):
        if self.delta is not None and self.delta < 0:
            raise InvalidInput(f"delta must be >= 0, got {self.delta}")
        if not (1 <= self.mode_index <= self.k):
            raise InvalidInput(
                f"mode_index {self.mode_index} outside 1..k ({self.k})"
            )
        if self.clamp is not None and self.clamp[0] >= self.clamp[1]:
            raise InvalidInput(f"clamp range {self.clamp} is empty")


@dataclass
class PerturbationResult:
    eigenpairs: EigResult
    perturbation: np.ndarray  # unit vector in operator space (h*w or n)
    adversarial_input: np.ndarray
    oracle_evals_total: int
    delta: float
    mode_index: int
    broadcast_channels: int  # 1 when no adapter was needed


class ChannelBroadcastAdapter:
    """Folds a [c,h,w] -> [1,h,w] oracle into a square operator on R^(h*w).

    The single-channel direction is replicated verbatim onto every input
    channel (no 1/sqrt(c) rescaling), so a unit perturbation adds
    delta*sqrt(c) of L2 norm to the full input.
    """

    def __init__(self, oracle):
        info = oracle.info
        if len(info.input_shape) != 3 or len(info.output_shape) != 3:
            raise UnsupportedShape(
                f"adapter wants [c,h,w] -> [1,h,w], got {info.input_shape} -> "
                f"{info.output_shape}"
            )
        c, h, w = info.input_shape
        if info.output_shape != (1, h, w):
            raise UnsupportedShape(
                f"adapter needs a single output channel on the same grid; "
                f"oracle maps {info.input_shape} -> {info.output_shape}"
            )
        self.channels = c
        self.grid = (h, w)
        self.n = h * w

    def expand(self, v: np.ndarray) -> np.ndarray:
        """R^(h*w) direction -> [c,h,w] tensor, replicated across channels."""
        plane = np.asarray(v, dtype=np.float64).reshape(self.grid)
        return np.broadcast_to(plane, (self.channels, *self.grid)).copy()

    def reduce(self, out: np.ndarray) -> np.ndarray:
        """[1,h,w] oracle output -> flat R^(h*w)."""
        return np.asarray(out, dtype=np.float64).ravel()


def broadcast_adapter(oracle) -> ChannelBroadcastAdapter:
    return ChannelBroadcastAdapter(oracle)


def _square_or_adapted(oracle):
    """(adapter or None, operator dim) for this oracle's geometry."""
    n_in = int(np.prod(oracle.info.input_shape))
    n_out = int(np.prod(oracle.info.output_shape))
    if n_in == n_out:
        return None, n_in
    adapter = ChannelBroadcastAdapter(oracle)
    return adapter, adapter.n


def perturbation_to_input(v: np.ndarray, oracle) -> np.ndarray:
    """Operator-space unit vector -> input-shaped tensor (broadcast if needed)."""
    adapter, _ = _square_or_adapted(oracle)
    if adapter is not None:
        return adapter.expand(v)
    return np.asarray(v, dtype=np.float64).reshape(oracle.info.input_shape)


def apply_perturbation(x_base, v, delta, oracle, clamp=None) -> np.ndarray:
    """x_base + delta * broadcast(v), optionally clamped to [lo, hi]."""
    adv = np.asarray(x_base, dtype=np.float64) + delta * perturbation_to_input(v, oracle)
    if clamp is not None:
        adv = np.clip(adv, clamp[0], clamp[1])
    return adv


def default_delta(oracle) -> float:
    _, n = _square_or_adapted(oracle)
    return DELTA_PER_DIM * n


def generate(oracle, x_base, cfg: AttackConfig | None = None) -> PerturbationResult:
    """End-to-end: JVP operator, largest-magnitude eigensolve, superimpose.

    converged=False in the eigenpair result is recorded, not fatal.
    """
    cfg = cfg or AttackConfig()
    cfg.validate()
    x_base = np.asarray(x_base, dtype=np.float64)
    if x_base.shape != oracle.info.input_shape:
        raise InvalidShape(
            f"base input shape {x_base.shape} != oracle input {oracle.info.input_shape}"
        )
    adapter, n = _square_or_adapted(oracle)
    delta = cfg.delta if cfg.delta is not None else DELTA_PER_DIM * n
    evals_before = oracle.counter.total_evals

    op = JvpOperator(oracle, x_base, epsilon=cfg.epsilon, adapter=adapter)
    eig = solve_largest_magnitude(
        op,
        EigConfig(
            k=cfg.k,
            tol=cfg.tol,
            itmax=cfg.itmax,
            ncv=cfg.ncv,
            mode=cfg.solver_mode,
            seed=cfg.seed,
        ),
    )
    if len(eig.pairs) < cfg.mode_index:
        raise DegenerateEigenvalue(
            f"solver returned {len(eig.pairs)} usable pairs, "
            f"mode_index {cfg.mode_index} requested"
        )
    v = eig.pairs[cfg.mode_index - 1].vector
    step = adapter.expand(v) if adapter is not None else v.reshape(x_base.shape)
    adversarial = x_base + delta * step
    if cfg.clamp is not None:
        adversarial = np.clip(adversarial, cfg.clamp[0], cfg.clamp[1])
    return PerturbationResult(
        eigenpairs=eig,
        perturbation=v,
        adversarial_input=adversarial,
        oracle_evals_total=oracle.counter.total_evals - evals_before,
        delta=delta,
        mode_index=cfg.mode_index,
        broadcast_channels=adapter.channels if adapter is not None else 1,
    )


def blend_modes(eig: EigResult, coefficients, m: int) -> np.ndarray:
    """Linear combination sum_i a_i v_i of the first m eigenvectors.

    Not renormalized; the caller decides the scaling.
    """
    coeffs = list(coefficients)
    if len(coeffs) != m:
        raise InvalidShape(f"{len(coeffs)} coefficients for m={m} modes")
    if m < 1 or m > len(eig.pairs):
        raise InvalidShape(f"m={m} outside 1..{len(eig.pairs)} available modes")
    out = np.zeros_like(eig.pairs[0].vector)
    for a, pair in zip(coeffs, eig.pairs[:m]):
        out = out + float(a) * pair.vector
    return out


def uniform_baseline(x_base, magnitude: float, seed: int) -> np.ndarray:
    """x_base + uniform noise rescaled to exactly the given L2 magnitude."""
    if magnitude <= 0:
        raise InvalidInput(f"magnitude must be positive, got {magnitude}")
    x_base = np.asarray(x_base, dtype=np.float64)
    u = Rng(seed).uniform(x_base.size, -1.0, 1.0)
    u *= magnitude / np.sqrt(np.dot(u, u))
    return x_base + u.reshape(x_base.shape)


def penetration_check(oracle, x_base, lam: float, v: np.ndarray, delta: float):
    """How much of the predicted output shift delta*lam*v actually shows up.

    Returns (ratio, misalignment): ratio = ||f(x+delta B v) - f(x)|| / (delta |lam|),
    misalignment = 1 - |<d, v>| / ||d||.  Two oracle evaluations.
    """
    if lam == 0.0:
        raise DegenerateEigenvalue("penetration ratio undefined for lambda = 0")
    x_base = np.asarray(x_base, dtype=np.float64)
    adapter, n = _square_or_adapted(oracle)
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != n:
        raise InvalidShape(f"perturbation has {v.size} entries, operator dim is {n}")
    norm = float(np.sqrt(np.dot(v, v)))
    if abs(norm - 1.0) > 1e-8:
        raise InvalidInput(f"v must be unit length, got ||v|| = {norm}")
    step = adapter.expand(v) if adapter is not None else v.reshape(x_base.shape)
    f_adv = oracle.eval(x_base + delta * step)
    f_base = oracle.eval(x_base)
    d = (adapter.reduce(f_adv - f_base) if adapter is not None else (f_adv - f_base).ravel())
    dn = float(np.sqrt(np.dot(d, d)))
    ratio = dn / (abs(delta) * abs(lam))
    if dn == 0.0:
        return ratio, 1.0
    misalignment = 1.0 - abs(float(np.dot(d, v))) / dn
    return ratio, misalignment
