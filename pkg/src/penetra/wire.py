"""Client side of the oracle wire protocol.

Newline-delimited JSON over stdio (``proc:``) or TCP (``tcp:``):

    -> {"op": "hello"}
    <- {"ok": true, "name": str, "input_shape": [...], "output_shape": [...]}
    -> {"op": "eval", "id": u64, "data": "<base64 little-endian f32, row-major>"}
    <- {"ok": true, "id": u64, "data": "<base64 f32, output_shape>"}
    -> {"op": "shutdown"}
    <- {"ok": true}

One JSON object per line; f32 little-endian payloads are bit-exact
normative.  At connect time the client probes the server with the same
input twice and records ``deterministic=False`` on the handle if the reply
bytes differ (finite differencing a noisy oracle is reported, not blocked).
"""

from __future__ import annotations

import base64
import json
import os
import select
import shlex
import socket
import subprocess
import time
from dataclasses import replace

import numpy as np

from .errors import InvalidShape, OracleFault, OracleUnavailable
from .oracle import Oracle, OracleInfo


def encode_f32(x: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(x, dtype="<f4").tobytes()).decode("ascii")


def decode_f32(data: str, shape) -> np.ndarray:
    try:
        raw = base64.b64decode(data, validate=True)
    except Exception as exc:
        raise OracleUnavailable(f"undecodable base64 payload: {exc}") from exc
    count = int(np.prod(shape))
    if len(raw) != 4 * count:
        raise OracleUnavailable(
            f"payload is {len(raw)} bytes, shape {tuple(shape)} wants {4 * count}"
        )
    return np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)


class _WireOracle(Oracle):
    """Shared handshake/eval logic; subclasses provide the byte transport."""

    def __init__(self, name_hint: str, expect_input_shape=None, timeout: float = 30.0):
        self._timeout = timeout
        self._next_id = 0
        hello = self._request({"op": "hello"}, timeout=min(timeout, 10.0))
        try:
            info = OracleInfo(
                name=str(hello.get("name", name_hint)),
                input_shape=tuple(int(d) for d in hello["input_shape"]),
                output_shape=tuple(int(d) for d in hello["output_shape"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise OracleUnavailable(f"malformed hello reply: {hello!r}") from exc
        if expect_input_shape is not None and info.input_shape != tuple(expect_input_shape):
            self._shutdown_quietly()
            raise InvalidShape(
                f"oracle reports input shape {info.input_shape}, "
                f"configuration wants {tuple(expect_input_shape)}"
            )
        super().__init__(info)
        self.info = replace(info, deterministic=self._probe_deterministic())

    # -- transport hooks -------------------------------------------------
    def _send_line(self, line: str) -> None:
        raise NotImplementedError

    def _recv_line(self, timeout: float) -> str:
        raise NotImplementedError

    def _close_transport(self) -> None:
        raise NotImplementedError

    # -- protocol --------------------------------------------------------
    def _request(self, obj: dict, timeout: float | None = None) -> dict:
        try:
            self._send_line(json.dumps(obj, separators=(",", ":")))
            line = self._recv_line(self._timeout if timeout is None else timeout)
        except OracleUnavailable:
            raise
        except OSError as exc:
            raise OracleUnavailable(f"oracle I/O failure: {exc}") from exc
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            raise OracleUnavailable(f"oracle replied with invalid JSON: {line!r}") from exc
        if not isinstance(reply, dict) or not reply.get("ok", False):
            err = reply.get("error", "oracle refused request") if isinstance(reply, dict) else reply
            raise OracleUnavailable(f"oracle error reply: {err}")
        return reply

    def _probe_deterministic(self) -> bool:
        probe = np.zeros(self.info.input_shape)
        a = self.eval(probe)
        b = self.eval(probe)
        return bool(np.array_equal(a, b))

    def _forward(self, x):
        self._next_id += 1
        rid = self._next_id
        reply = self._request({"op": "eval", "id": rid, "data": encode_f32(x)})
        if reply.get("id") != rid:
            raise OracleUnavailable(f"reply id {reply.get('id')} does not echo request {rid}")
        if "data" not in reply:
            raise OracleUnavailable("eval reply carries no data field")
        out = decode_f32(reply["data"], self.info.output_shape)
        if not np.all(np.isfinite(out)):
            raise OracleFault(f"{self.info.name}: non-finite values in oracle reply")
        return out

    def _shutdown_quietly(self):
        try:
            self._send_line(json.dumps({"op": "shutdown"}))
            self._recv_line(timeout=2.0)
        except Exception:
            pass
        self._close_transport()

    def close(self):
        self._shutdown_quietly()


class ProcOracle(_WireOracle):
    """Oracle server spawned as a child process, framed over stdio."""

    kind = "external-process"

    def __init__(self, command: str, expect_input_shape=None, timeout: float = 30.0):
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                bufsize=0,
            )
        except OSError as exc:
            raise OracleUnavailable(f"cannot spawn oracle process {command!r}: {exc}") from exc
        self._buf = b""
        super().__init__(f"proc:{command}", expect_input_shape, timeout)

    def _send_line(self, line):
        if self._proc.poll() is not None:
            raise OracleUnavailable("oracle process has exited")
        try:
            self._proc.stdin.write(line.encode("utf-8") + b"\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as exc:
            raise OracleUnavailable(f"oracle process pipe closed: {exc}") from exc

    def _recv_line(self, timeout):
        fd = self._proc.stdout.fileno()
        deadline = time.monotonic() + timeout
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise OracleUnavailable(f"oracle reply timed out after {timeout}s")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise OracleUnavailable(f"oracle reply timed out after {timeout}s")
            chunk = os.read(fd, 65536)
            if chunk == b"":
                raise OracleUnavailable("oracle process closed stdout")
            self._buf += chunk
        line, _, self._buf = self._buf.partition(b"\n")
        return line.decode("utf-8")

    def _close_transport(self):
        for stream in (self._proc.stdin, self._proc.stdout):
            try:
                stream.close()
            except Exception:
                pass
        try:
            self._proc.wait(timeout=3.0)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()


class TcpOracle(_WireOracle):
    """Oracle server reached over a TCP socket."""

    kind = "external-tcp"

    def __init__(self, host: str, port: int, expect_input_shape=None, timeout: float = 30.0):
        try:
            self._sock = socket.create_connection((host, port), timeout=min(timeout, 10.0))
        except OSError as exc:
            raise OracleUnavailable(f"cannot connect to {host}:{port}: {exc}") from exc
        self._file = self._sock.makefile("r", encoding="utf-8", newline="\n")
        super().__init__(f"tcp:{host}:{port}", expect_input_shape, timeout)

    def _send_line(self, line):
        self._sock.sendall((line + "\n").encode("utf-8"))

    def _recv_line(self, timeout):
        self._sock.settimeout(timeout)
        try:
            line = self._file.readline()
        except socket.timeout as exc:
            raise OracleUnavailable(f"oracle reply timed out after {timeout}s") from exc
        if line == "":
            raise OracleUnavailable("oracle closed the connection")
        return line.rstrip("\n")

    def _close_transport(self):
        for closer in (self._file.close, self._sock.close):
            try:
                closer()
            except Exception:
                pass
