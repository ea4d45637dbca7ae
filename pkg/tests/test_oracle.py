"""Builtin oracles: values, purity, and query accounting."""

import numpy as np
import pytest

from penetra import (
    InvalidInput,
    InvalidShape,
    JvpOperator,
    Rng,
    make_linear_oracle,
    make_logistic_oracle,
    make_toy_segmenter,
    parse_oracle_spec,
    seeded_matrix,
    wrap_callable,
)


class TestLinearOracle:
    def test_identity(self):
        o = make_linear_oracle(np.eye(4))
        x = np.array([1.0, 2.0, 3.0, 4.0])
        assert np.array_equal(o.eval(x), x)

    def test_diagonal(self):
        o = make_linear_oracle(np.diag([5.0, 2.0, 1.0]))
        assert np.array_equal(o.eval(np.ones(3)), [5.0, 2.0, 1.0])

    def test_constant_map(self):
        o = make_linear_oracle(np.zeros((1, 3)), np.array([7.0]))
        assert np.array_equal(o.eval(np.array([9.0, -1.0, 0.5])), [7.0])

    def test_matches_naive_matvec(self):
        A = seeded_matrix(8, 8, seed=70)
        o = make_linear_oracle(A)
        x = Rng(71).uniform(8, -1.0, 1.0)
        expected = np.array([sum(A[i, j] * x[j] for j in range(8)) for i in range(8)])
        assert np.allclose(o.eval(x), expected, rtol=1e-12, atol=0)

    def test_affinity(self):
        A = seeded_matrix(6, 6, seed=72)
        o = make_linear_oracle(A, Rng(73).uniform(6, -1.0, 1.0))
        x = Rng(74).uniform(6, -1.0, 1.0)
        y = Rng(75).uniform(6, -1.0, 1.0)
        lhs = o.eval(x + y) - o.eval(y)
        rhs = o.eval(x) - o.eval(np.zeros(6))
        assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)

    def test_shape_mismatch(self):
        o = make_linear_oracle(np.eye(4))
        with pytest.raises(InvalidShape):
            o.eval(np.zeros(5))

    def test_non_finite_input_rejected(self):
        o = make_linear_oracle(np.eye(2))
        with pytest.raises(InvalidInput):
            o.eval(np.array([1.0, np.nan]))

    def test_counter_counts_every_eval(self):
        o = make_linear_oracle(np.eye(3))
        for _ in range(5):
            o.eval(np.zeros(3))
        assert o.counter.total_evals == 5
        with pytest.raises(InvalidShape):
            o.eval(np.zeros(4))
        # the failed call never reached the oracle
        assert o.counter.total_evals == 5


class TestLogisticOracle:
    def test_sigma_zero_is_half(self):
        o = make_logistic_oracle(np.zeros((3, 3)))
        assert np.allclose(o.eval(np.ones(3)), 0.5, rtol=0, atol=0)

    def test_scalar_identity_at_zero(self):
        o = make_logistic_oracle(np.eye(1))
        assert o.eval(np.array([0.0]))[0] == 0.5

    def test_outputs_strictly_inside_unit_interval(self):
        o = make_logistic_oracle(seeded_matrix(5, 5, seed=80) * 10.0)
        y = o.eval(Rng(81).uniform(5, -5.0, 5.0))
        assert np.all(y > 0.0) and np.all(y < 1.0)

    def test_analytic_jacobian_vs_fd_jvp(self):
        A = seeded_matrix(8, 8, seed=82)
        o = make_logistic_oracle(A)
        x = Rng(83).uniform(8, -1.0, 1.0)
        jac = o.analytic_jacobian(x)
        v = Rng(84).uniform(8, -1.0, 1.0)
        v /= np.linalg.norm(v)
        # O(eps^2) truncation: two eps values, two orders of magnitude apart
        err = {}
        for eps in (1e-2, 1e-3):
            op = JvpOperator(o, x, epsilon=eps)
            err[eps] = np.linalg.norm(op.apply(v) - jac @ v)
        assert err[1e-3] / err[1e-2] == pytest.approx(0.01, rel=0.3)
        op = JvpOperator(o, x, epsilon=1e-4)
        rel = np.linalg.norm(op.apply(v) - jac @ v) / np.linalg.norm(jac @ v)
        assert rel < 1e-7


class TestToySegmenter:
    def test_deterministic(self):
        x = Rng(90).uniform(3 * 8 * 8, 0.0, 1.0).reshape(3, 8, 8)
        a = make_toy_segmenter(7, 8, 8).eval(x)
        b = make_toy_segmenter(7, 8, 8).eval(x)
        assert a.tobytes() == b.tobytes()

    def test_output_shape_and_range(self):
        o = make_toy_segmenter(3, 16, 12)
        y = o.eval(Rng(91).uniform(3 * 16 * 12, 0.0, 1.0).reshape(3, 16, 12))
        assert y.shape == (1, 16, 12)
        assert np.all(y > 0.0) and np.all(y < 1.0)

    def test_size_guard(self):
        with pytest.raises(InvalidInput):
            make_toy_segmenter(0, 4, 16)
        with pytest.raises(InvalidInput):
            make_toy_segmenter(0, 16, 65)

    def test_fd_jvp_scaling_linearity(self):
        from penetra.attack import ChannelBroadcastAdapter

        o = make_toy_segmenter(5, 16, 16)
        x = Rng(92).uniform(3 * 16 * 16, 0.0, 1.0).reshape(3, 16, 16)
        op = JvpOperator(o, x, adapter=ChannelBroadcastAdapter(o))
        v = Rng(93).uniform(256, -1.0, 1.0)
        v /= np.linalg.norm(v)
        jv = op.apply(v)
        j2v = op.apply(2.0 * v)
        assert np.linalg.norm(j2v - 2.0 * jv) <= 1e-6 * np.linalg.norm(jv)

    def test_wire32_mode_quantizes(self):
        o = make_toy_segmenter(7, 8, 8, wire32=True)
        x = Rng(94).uniform(3 * 8 * 8, 0.0, 1.0).reshape(3, 8, 8)
        y = o.eval(x)
        assert np.array_equal(y, y.astype(np.float32).astype(np.float64))


class TestCallableWrapper:
    def test_counts_and_shapes(self):
        o = wrap_callable(lambda x: x * 2.0, (4,), (4,), name="twice")
        assert np.array_equal(o.eval(np.ones(4)), 2.0 * np.ones(4))
        assert o.counter.total_evals == 1

    def test_declared_output_shape_enforced(self):
        o = wrap_callable(lambda x: np.zeros(3), (4,), (4,))
        with pytest.raises(InvalidShape):
            o.eval(np.ones(4))


class TestSpecParsing:
    def test_diag_spec(self):
        o = parse_oracle_spec("builtin:linear:diag=5,2,1")
        assert np.array_equal(o.eval(np.ones(3)), [5.0, 2.0, 1.0])

    def test_seeded_symmetric_spec(self):
        o = parse_oracle_spec("builtin:linear:seed=4,n=6,sym=1")
        assert np.allclose(o.A, o.A.T, rtol=0, atol=0)

    def test_toyseg_spec(self):
        o = parse_oracle_spec("builtin:toyseg:seed=7,h=8,w=8")
        assert o.info.input_shape == (3, 8, 8)

    def test_file_spec(self, tmp_path):
        from penetra import write_tensor

        A = seeded_matrix(3, 3, seed=50)
        write_tensor(tmp_path / "A.ptnsr", A)
        o = parse_oracle_spec(f"builtin:linear:file={tmp_path}/A.ptnsr")
        assert np.allclose(o.eval(np.ones(3)), A @ np.ones(3), rtol=0, atol=0)

    def test_bad_specs(self):
        for spec in ("builtin:linear:", "builtin:wat:x=1", "smtp:foo", "builtin:toyseg:seed=1"):
            with pytest.raises(InvalidInput):
                parse_oracle_spec(spec)
