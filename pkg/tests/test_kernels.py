"""Backend parity and direct kernel behavior.

Both backends are imported explicitly (not through the dispatch module)
so one pytest process can compare them side by side.
"""

from __future__ import annotations

import math
import subprocess
import sys

import numpy as np
import pytest

from labelshift.kernels import LINEAR, UNWEIGHTED, WEIGHT_CODES, ZIPF
from labelshift.kernels import _fallback

try:
    from labelshift.kernels import _fast
except ImportError:  # extension not built on this machine
    _fast = None

needs_ext = pytest.mark.skipif(_fast is None, reason="compiled kernels not built")

BACKENDS = [_fallback] + ([_fast] if _fast is not None else [])


def _random_case(rng, tie_prone: bool):
    n = int(rng.integers(1, 40))
    if tie_prone:
        # coarse grid forces exact duplicate similarities
        sims = rng.integers(0, 4, size=n).astype(np.float64) / 4.0
    else:
        sims = rng.uniform(0.0, 1.0, size=n)
    counts = rng.integers(1, 1000, size=n).astype(np.int64)
    k = int(rng.choice([1, 2, 7, 100, 1500, 10**6]))
    return sims, counts, k


class TestBackendParity:
    @needs_ext
    @pytest.mark.parametrize("weighting", [ZIPF, LINEAR, UNWEIGHTED])
    @pytest.mark.parametrize("tie_prone", [False, True])
    def test_weighted_topk_mean_agrees(self, weighting, tie_prone):
        rng = np.random.default_rng(99 + weighting)
        for _ in range(300):
            sims, counts, k = _random_case(rng, tie_prone)
            if weighting == LINEAR and k == 1:
                continue  # zero total weight, rejected by both
            slow = _fallback.weighted_topk_mean(sims, counts, k, weighting)
            fast = _fast.weighted_topk_mean(sims, counts, k, weighting)
            assert fast[1] == slow[1]
            assert fast[0] == pytest.approx(slow[0], abs=1e-12)

    @needs_ext
    def test_row_entropy_agrees(self):
        rng = np.random.default_rng(41)
        for temperature in (0.01, 0.5, 10.0):
            m = rng.uniform(0.0, 1.0, size=(50, 7))
            slow = _fallback.row_entropy(m, temperature)
            fast = _fast.row_entropy(m, temperature)
            np.testing.assert_allclose(fast, slow, atol=1e-12)

    @needs_ext
    def test_error_parity(self):
        for impl in (_fallback, _fast):
            with pytest.raises(ValueError):
                impl.weighted_topk_mean(np.array([]), np.array([], dtype=np.int64), 5, ZIPF)
            with pytest.raises(ValueError):
                impl.weighted_topk_mean(np.array([0.5]), np.array([0]), 5, ZIPF)
            with pytest.raises(ValueError):
                impl.weighted_topk_mean(np.array([0.5]), np.array([1, 2]), 5, ZIPF)
            with pytest.raises(ValueError):
                impl.weighted_topk_mean(np.array([0.5]), np.array([1]), 0, ZIPF)
            with pytest.raises(ValueError):
                impl.weighted_topk_mean(np.array([0.5]), np.array([1]), 5, 9)
            with pytest.raises(ValueError):
                impl.weighted_topk_mean(np.array([0.5]), np.array([2]), 1, LINEAR)
            with pytest.raises(ValueError):
                impl.row_entropy(np.array([1.0, 2.0]), 0.01)
            with pytest.raises(ValueError):
                impl.row_entropy(np.array([[1.0]]), 0.0)
            with pytest.raises(ValueError):
                impl.row_entropy(np.array([[np.nan]]), 0.01)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
class TestKernelSemantics:
    def test_single_run_truncation(self, impl):
        score, keff = impl.weighted_topk_mean(np.array([0.5]), np.array([3]), 1000, ZIPF)
        assert score == pytest.approx(0.5, abs=1e-15)
        assert keff == 3

    def test_truncates_at_k(self, impl):
        score, keff = impl.weighted_topk_mean(np.array([1.0]), np.array([2000]), 1000, ZIPF)
        assert score == pytest.approx(1.0, abs=1e-15)
        assert keff == 1000

    def test_zipf_two_runs_by_hand(self, impl):
        # ranks 1,2 at 0.8 and 3,4 at 0.4: (0.8*(1+1/2) + 0.4*(1/3+1/4)) / (1+1/2+1/3+1/4)
        score, keff = impl.weighted_topk_mean(
            np.array([0.8, 0.4]), np.array([2, 2]), 4, ZIPF
        )
        assert keff == 4
        assert score == pytest.approx(516.0 / 750.0, abs=1e-12)

    def test_linear_decay_ignores_rank_k(self, impl):
        # rank k carries weight 0, so the last mention cannot move the score
        base = impl.weighted_topk_mean(np.array([1.0, 0.0]), np.array([3, 1]), 4, LINEAR)
        alt = impl.weighted_topk_mean(np.array([1.0, 0.5]), np.array([3, 1]), 4, LINEAR)
        assert base[0] == pytest.approx(alt[0], abs=1e-15)
        assert base[0] == pytest.approx(1.0, abs=1e-15)

    def test_unweighted_is_plain_mean(self, impl):
        score, _ = impl.weighted_topk_mean(np.array([0.9, 0.1]), np.array([1, 1]), 10, UNWEIGHTED)
        assert score == pytest.approx(0.5, abs=1e-15)

    def test_entropy_uniform_row(self, impl):
        entropy = impl.row_entropy(np.full((1, 4), 0.37), 0.01)
        assert entropy[0] == pytest.approx(math.log(4), abs=1e-12)

    def test_entropy_peaked_row(self, impl):
        entropy = impl.row_entropy(np.array([[1.0, 0.0, 0.0]]), 0.01)
        assert 0.0 <= entropy[0] <= 1e-10

    def test_entropy_extreme_rows_stable(self, impl):
        m = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.0, 0.0]])
        with np.errstate(over="raise", invalid="raise"):
            entropy = impl.row_entropy(m, 0.01)
        assert np.isfinite(entropy).all()
        assert (entropy >= 0.0).all() and (entropy <= math.log(2)).all()

    def test_entropy_clamped_to_bounds(self, impl):
        rng = np.random.default_rng(13)
        entropy = impl.row_entropy(rng.uniform(size=(200, 5)), 0.01)
        assert (entropy >= 0.0).all()
        assert (entropy <= math.log(5)).all()


class TestBackendSelection:
    def _backend_for(self, env_value):
        code = "import labelshift.kernels as k; print(k.BACKEND)"
        return subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "LABELSHIFT_KERNELS": env_value},
        )

    def test_forced_python(self):
        result = self._backend_for("py")
        assert result.stdout.strip() == "python"

    @needs_ext
    def test_forced_compiled(self):
        result = self._backend_for("c")
        assert result.stdout.strip() == "c"

    def test_unknown_value_rejected(self):
        result = self._backend_for("vulkan")
        assert result.returncode != 0
        assert "LABELSHIFT_KERNELS" in result.stderr

    def test_default_picks_something(self):
        result = self._backend_for("")
        assert result.stdout.strip() in ("python", "c")
