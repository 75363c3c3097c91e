"""Kernel backend tests: dispatch, native/reference agreement, oracles.

The native extension is expected to be built in this environment, so its
absence is a failure rather than a skip.
"""
import os
import subprocess
import sys

import numpy as np
import pytest

from graspdec import _kernels, kernel_backend
from graspdec._kernels import backend_module


def has_native():
    try:
        backend_module("native")
        return True
    except ImportError:
        return False


class TestDispatch:
    def test_native_is_built_and_default(self):
        assert has_native()
        if os.environ.get("GRASPDEC_KERNELS", "") in ("", "native"):
            assert kernel_backend() == "native"

    def test_env_var_forces_reference(self):
        code = (
            "from graspdec import kernel_backend; print(kernel_backend())"
        )
        env = dict(os.environ, GRASPDEC_KERNELS="reference")
        proc = subprocess.run([sys.executable, "-c", code],
                              capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout.strip() == "reference"

    def test_env_var_forces_native(self):
        code = (
            "from graspdec import kernel_backend; print(kernel_backend())"
        )
        env = dict(os.environ, GRASPDEC_KERNELS="native")
        proc = subprocess.run([sys.executable, "-c", code],
                              capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout.strip() == "native"

    def test_unknown_backend_name(self):
        with pytest.raises(ValueError):
            backend_module("fortran")

    def test_backend_module_reference_always_available(self):
        mod = backend_module("reference")
        assert hasattr(mod, "sliding_rms")
        assert hasattr(mod, "mse_to_stack")
        assert hasattr(mod, "projected_power")


class TestSlidingRms:
    def test_against_naive_loop(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(1000)
        starts = np.arange(0, 1000 - 275 + 1, 25, dtype=np.intp)
        got = _kernels.sliding_rms(x, starts, 275)
        naive = np.array([
            np.sqrt(np.mean(x[s:s + 275] ** 2)) for s in starts
        ])
        np.testing.assert_allclose(got, naive, rtol=1e-12)

    def test_backends_agree(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(4096)
        starts = np.arange(0, 4096 - 512, 64, dtype=np.intp)
        ref = backend_module("reference").sliding_rms(x, starts, 512)
        nat = backend_module("native").sliding_rms(x, starts, 512)
        np.testing.assert_allclose(nat, ref, rtol=1e-12)

    def test_read_only_input_accepted(self):
        x = np.ones(100)
        x.setflags(write=False)
        starts = np.array([0, 50], dtype=np.intp)
        starts.setflags(write=False)
        got = _kernels.sliding_rms(x, starts, 50)
        np.testing.assert_allclose(got, [1.0, 1.0])

    def test_dtype_coercion(self):
        x = np.arange(10, dtype=np.int32)
        got = _kernels.sliding_rms(x, [0], 4)
        expected = np.sqrt((0 + 1 + 4 + 9) / 4)
        assert got[0] == pytest.approx(expected)

    def test_known_values(self):
        got = _kernels.sliding_rms(np.array([3.0, -3.0, 3.0, -3.0]),
                                   np.array([0, 2], dtype=np.intp), 2)
        np.testing.assert_allclose(got, [3.0, 3.0])


class TestMseToStack:
    def test_against_naive_loop(self):
        rng = np.random.default_rng(2)
        pattern = rng.integers(0, 2, size=(6, 30)).astype(np.float64)
        stack = rng.integers(0, 2, size=(50, 6, 30)).astype(np.float64)
        got = _kernels.mse_to_stack(pattern, stack)
        naive = np.array([np.mean((stack[i] - pattern) ** 2)
                          for i in range(50)])
        np.testing.assert_allclose(got, naive, rtol=1e-13)

    def test_backends_agree(self):
        rng = np.random.default_rng(3)
        pattern = rng.random((6, 30))
        stack = rng.random((40, 6, 30))
        ref = backend_module("reference").mse_to_stack(pattern, stack)
        nat = backend_module("native").mse_to_stack(pattern, stack)
        np.testing.assert_allclose(nat, ref, rtol=1e-12)

    def test_read_only_input_accepted(self):
        pattern = np.zeros((2, 3))
        stack = np.ones((4, 2, 3))
        pattern.setflags(write=False)
        stack.setflags(write=False)
        np.testing.assert_allclose(_kernels.mse_to_stack(pattern, stack),
                                   np.ones(4))

    def test_uint8_pattern_coerced(self):
        pattern = np.zeros((2, 2), dtype=np.uint8)
        stack = np.stack([np.eye(2)])
        got = _kernels.mse_to_stack(pattern, stack)
        np.testing.assert_allclose(got, [0.5])


class TestProjectedPower:
    def test_against_direct_formula(self):
        rng = np.random.default_rng(4)
        projection = rng.standard_normal((4, 8))
        covs = np.stack([
            np.cov(rng.standard_normal((8, 64))) for _ in range(10)
        ])
        got = _kernels.projected_power(projection, covs)
        naive = np.stack([
            np.diag(projection @ covs[s] @ projection.T) for s in range(10)
        ])
        np.testing.assert_allclose(got, naive, rtol=1e-11)

    def test_backends_agree(self):
        rng = np.random.default_rng(5)
        projection = rng.standard_normal((4, 20))
        base = rng.standard_normal((30, 20, 24))
        covs = np.einsum("sij,skj->sik", base, base) / 24
        ref = backend_module("reference").projected_power(projection, covs)
        nat = backend_module("native").projected_power(projection, covs)
        np.testing.assert_allclose(nat, ref, rtol=1e-11)

    def test_read_only_input_accepted(self):
        projection = np.eye(3)
        covs = np.stack([np.diag([1.0, 2.0, 3.0])])
        projection.setflags(write=False)
        covs.setflags(write=False)
        got = _kernels.projected_power(projection, covs)
        np.testing.assert_allclose(got, [[1.0, 2.0, 3.0]])

    def test_identity_projection_extracts_diagonal(self):
        rng = np.random.default_rng(6)
        a = rng.standard_normal((5, 5))
        cov = a @ a.T
        got = _kernels.projected_power(np.eye(5), cov[None])
        np.testing.assert_allclose(got[0], np.diag(cov), rtol=1e-12)

    def test_noncontiguous_input_coerced(self):
        rng = np.random.default_rng(7)
        projection = rng.standard_normal((4, 10))[:, ::2]  # stride trick
        covs = rng.standard_normal((3, 5, 5))
        covs = covs + covs.transpose(0, 2, 1)
        got = _kernels.projected_power(projection, covs)
        naive = np.einsum("fi,sij,fj->sf", np.ascontiguousarray(projection),
                          covs, np.ascontiguousarray(projection))
        np.testing.assert_allclose(got, naive, rtol=1e-11)
