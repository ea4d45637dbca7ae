"""The black-box boundary: evaluatable functions with shape metadata and
query accounting.

Every oracle evaluation anywhere in the library goes through
``Oracle.eval``, which increments the handle's counter exactly once per
call that reaches the underlying function.  Query-efficiency claims are
counted here and nowhere else.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, InvalidShape
from .rng import Rng


@dataclass(frozen=True)
class OracleInfo:
    name: str
    input_shape: tuple[int, ...]
    output_shape: tuple[int, ...]
    deterministic: bool = True

    def __post_init__(self):
        for shape in (self.input_shape, self.output_shape):
            if not shape or any(d < 1 for d in shape):
                raise InvalidShape(f"oracle shape {shape} must be non-empty, dims >= 1")


class QueryCounter:
    """Monotone evaluation counter; increments are atomic."""

    def __init__(self):
        self._lock = threading.Lock()
        self._total = 0

    def increment(self) -> None:
        with self._lock:
            self._total += 1

    @property
    def total_evals(self) -> int:
        return self._total


class Oracle:
    """Base handle: shape checks, counting, then the concrete forward."""

    kind = "abstract"

    def __init__(self, info: OracleInfo):
        self.info = info
        self.counter = QueryCounter()

    def eval(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.info.input_shape:
            raise InvalidShape(
                f"{self.info.name}: input shape {x.shape}, expected {self.info.input_shape}"
            )
        if not np.all(np.isfinite(x)):
            raise InvalidInput(f"{self.info.name}: non-finite input")
        self.counter.increment()
        return self._forward(x)

    def _forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class LinearOracle(Oracle):
    """f(x) = A x + b with analytically known Jacobian A."""

    kind = "linear"

    def __init__(self, A: np.ndarray, b: np.ndarray | None = None, name: str = "linear"):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2:
            raise InvalidShape(f"A must be a matrix, got shape {A.shape}")
        n_out, n_in = A.shape
        if b is None:
            b = np.zeros(n_out)
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (n_out,):
            raise InvalidShape(f"bias shape {b.shape} does not match A rows {n_out}")
        self.A = A
        self.b = b
        super().__init__(OracleInfo(name, (n_in,), (n_out,)))

    def _forward(self, x):
        return self.A @ x + self.b


class LogisticOracle(LinearOracle):
    """f(x) = sigmoid(A x + b); analytic Jacobian diag(sigma'(Ax+b)) A."""

    kind = "logistic"

    def __init__(self, A, b=None, name="logistic"):
        super().__init__(A, b, name)

    def _forward(self, x):
        from . import _kernels

        return _kernels.sigmoid_map(self.A @ x + self.b)

    def analytic_jacobian(self, x: np.ndarray) -> np.ndarray:
        """diag(s (1 - s)) A at the given point, s = sigmoid(Ax+b)."""
        from . import _kernels

        s = _kernels.sigmoid_map(self.A @ np.asarray(x, dtype=np.float64) + self.b)
        return (s * (1.0 - s))[:, None] * self.A


class CallableOracle(Oracle):
    """Counting wrapper around an arbitrary function."""

    kind = "counting-wrapper"

    def __init__(self, fn, input_shape, output_shape, name="wrapped", deterministic=True):
        self._fn = fn
        super().__init__(
            OracleInfo(name, tuple(input_shape), tuple(output_shape), deterministic)
        )

    def _forward(self, x):
        out = np.asarray(self._fn(x), dtype=np.float64)
        if out.shape != self.info.output_shape:
            raise InvalidShape(
                f"{self.info.name}: wrapped fn returned shape {out.shape}, "
                f"declared {self.info.output_shape}"
            )
        return out


def make_linear_oracle(A, b=None, name="linear") -> LinearOracle:
    return LinearOracle(A, b, name)


def make_logistic_oracle(A, b=None, name="logistic") -> LogisticOracle:
    return LogisticOracle(A, b, name)


def wrap_callable(fn, input_shape, output_shape, name="wrapped", deterministic=True):
    return CallableOracle(fn, input_shape, output_shape, name, deterministic)


def seeded_matrix(n_out: int, n_in: int, seed: int, lo=-1.0, hi=1.0) -> np.ndarray:
    """Deterministic dense matrix, entries uniform in [lo, hi), row-major draw."""
    return Rng(seed).uniform(n_out * n_in, lo, hi).reshape(n_out, n_in)


def seeded_symmetric_matrix(n: int, seed: int, lo=-1.0, hi=1.0) -> np.ndarray:
    a = seeded_matrix(n, n, seed, lo, hi)
    return (a + a.T) / 2.0


def connect_external(spec: str, expect_input_shape=None, timeout: float = 30.0):
    """Open an external oracle from a "proc:..." or "tcp:host:port" spec."""
    from .wire import ProcOracle, TcpOracle

    if spec.startswith("proc:"):
        return ProcOracle(spec[5:], expect_input_shape=expect_input_shape, timeout=timeout)
    if spec.startswith("tcp:"):
        rest = spec[4:]
        host, _, port = rest.rpartition(":")
        if not host or not port.isdigit():
            raise InvalidInput(f"bad tcp oracle spec {spec!r} (want tcp:host:port)")
        return TcpOracle(host, int(port), expect_input_shape=expect_input_shape, timeout=timeout)
    raise InvalidInput(f"external oracle spec {spec!r} must start with proc: or tcp:")


def parse_oracle_spec(spec: str, expect_input_shape=None):
    """Build an oracle handle from a CLI-style spec string.

    Builtin grammar (comma-separated key=value pairs):
        builtin:linear:diag=5,2,1
        builtin:linear:seed=3,n=8[,sym=1]
        builtin:linear:file=A.ptnsr[,bias=b.ptnsr]
        builtin:logistic:<same parameters>
        builtin:toyseg:seed=7,h=32,w=32[,f32=1]
    External:
        proc:<command line>      tcp:<host>:<port>
    """
    if spec.startswith(("proc:", "tcp:")):
        return connect_external(spec, expect_input_shape=expect_input_shape)
    if not spec.startswith("builtin:"):
        raise InvalidInput(f"oracle spec {spec!r}: expected builtin:/proc:/tcp: prefix")
    rest = spec[len("builtin:") :]
    kind, _, params = rest.partition(":")
    kv = _parse_params(params)
    if kind in ("linear", "logistic"):
        A, b = _linear_parts(kv, spec)
        cls = LinearOracle if kind == "linear" else LogisticOracle
        return cls(A, b, name=spec)
    if kind == "toyseg":
        from .toyseg import ToySegmenter

        try:
            seed = int(kv.get("seed", "0"))
            h = int(kv["h"])
            w = int(kv["w"])
        except (KeyError, ValueError) as exc:
            raise InvalidInput(f"oracle spec {spec!r}: toyseg needs seed=,h=,w=") from exc
        return ToySegmenter(seed, h, w, wire32=kv.get("f32", "0") not in ("0", ""))
    raise InvalidInput(f"oracle spec {spec!r}: unknown builtin kind {kind!r}")


def _parse_params(params: str) -> dict:
    # Bare tokens continue the previous value, so diag=5,2,1 parses whole.
    out: dict[str, str] = {}
    last = None
    for tok in params.split(","):
        if "=" in tok:
            key, _, val = tok.partition("=")
            out[key.strip()] = val.strip()
            last = key.strip()
        elif last is not None and tok:
            out[last] += "," + tok.strip()
    return out


def _linear_parts(kv: dict, spec: str):
    from .tensorio import read_tensor

    if "diag" in kv:
        d = np.array([float(t) for t in kv["diag"].split(",") if t], dtype=np.float64)
        if d.size == 0:
            raise InvalidInput(f"oracle spec {spec!r}: empty diag")
        return np.diag(d), None
    if "file" in kv:
        A = read_tensor(kv["file"])
        if A.ndim != 2:
            raise InvalidShape(f"{kv['file']}: linear oracle wants a 2-D tensor")
        b = read_tensor(kv["bias"]).ravel() if "bias" in kv else None
        return A, b
    if "seed" in kv and "n" in kv:
        n = int(kv["n"])
        seed = int(kv["seed"])
        if kv.get("sym", "0") not in ("0", ""):
            return seeded_symmetric_matrix(n, seed), None
        return seeded_matrix(n, n, seed), None
    raise InvalidInput(f"oracle spec {spec!r}: need diag=, file=, or seed=+n=")
