import math

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from qhosvd.decomposition import full_modes, hard_threshold_core, qhosvd
from qhosvd.denoise import (
    SCHEDULE,
    DenoiseConfig,
    block_match,
    denoise,
    denoise_group,
    denoise_pass,
    denoise_quaternion,
    regularize,
    schedule_for_sigma,
    threshold,
)
from qhosvd.errors import ParameterError, ShapeError
from qhosvd.imaging import encode_rgb
from qhosvd.metrics import add_gaussian_noise, psnr, ssim
from qhosvd.quaternion import QuaternionTensor


def smooth_image(rng, h, w, blur=2.0):
    return gaussian_filter(rng.uniform(0, 255, (h, w, 3)), sigma=(blur, blur, 0))


def brute_distances(q, ref, w, window):
    """Exhaustive scan over the clamped window with explicit loops."""
    r, c = ref
    last_r, last_c = q.rows - w, q.cols - w
    def rng1(a, last):
        lo = min(max(a - window // 2, 0), max(last - window + 1, 0))
        return range(lo, min(lo + window - 1, last) + 1)
    out = []
    ref_patch = q.planes[:, r : r + w, c : c + w]
    for i in rng1(r, last_r):
        for j in rng1(c, last_c):
            d = float(np.sum((q.planes[:, i : i + w, j : j + w] - ref_patch) ** 2))
            out.append(((i, j), d))
    return out


class TestConfig:
    def test_threshold_example(self):
        tau = threshold(0.70, 10.0, 6, 70)
        assert tau == pytest.approx(0.70 * 10 * math.sqrt(2 * math.log(2520)), rel=1e-15)
        assert tau == pytest.approx(27.70, abs=5e-3)
        assert DenoiseConfig.for_sigma(10).threshold == tau

    @pytest.mark.parametrize("sigma", sorted(SCHEDULE))
    def test_schedule_rows(self, sigma):
        w, k, it, eta = SCHEDULE[sigma]
        cfg = DenoiseConfig.for_sigma(sigma)
        assert (cfg.patch_size, cfg.group_size, cfg.iterations, cfg.eta) == (w, k, it, eta)
        assert cfg.delta == 0.1 and cfg.search_window == 30 and cfg.ref_stride == 4

    def test_schedule_interpolation_and_clamping(self):
        mid = schedule_for_sigma(40.0)
        assert mid == {"patch_size": 8, "group_size": 105, "iterations": 17, "eta": pytest.approx(0.40)}
        assert schedule_for_sigma(5.0) == schedule_for_sigma(10.0)
        assert schedule_for_sigma(80.0) == schedule_for_sigma(50.0)

    def test_overrides(self):
        cfg = DenoiseConfig.for_sigma(20, group_size=10, eta=None, tau=0.0)
        assert cfg.group_size == 10 and cfg.eta == 0.55
        assert cfg.threshold == 0.0
        assert cfg.as_dict()["threshold"] == 0.0

    @pytest.mark.parametrize(
        "kw",
        [
            dict(sigma=-1.0),
            dict(sigma=300.0),
            dict(sigma=10, delta=0.0),
            dict(sigma=10, delta=1.0),
            dict(sigma=10, eta=0.0),
            dict(sigma=10, group_size=0),
            dict(sigma=10, patch_size=8, search_window=7),
            dict(sigma=10, tau=-1.0),
        ],
    )
    def test_validation(self, kw):
        with pytest.raises(ParameterError):
            DenoiseConfig(**kw)


class TestBlockMatch:
    def test_constant_image(self):
        q = encode_rgb(np.full((12, 12, 3), 90.0))
        cfg = DenoiseConfig(sigma=10, patch_size=3, group_size=5, search_window=10)
        g = block_match(q, (4, 4), cfg)
        assert g.member_anchors[0] == (4, 4)
        # remaining members: first candidates in row-major order within rows 0..9 of the window
        assert g.member_anchors[1:] == [(0, 0), (0, 1), (0, 2), (0, 3)]
        assert np.all(g.distances == 0)
        assert not g.padded

    def test_single_member(self, rng):
        q = encode_rgb(smooth_image(rng, 16, 16))
        g = block_match(q, (5, 7), DenoiseConfig(sigma=10, patch_size=4, group_size=1, search_window=8))
        assert g.member_anchors == [(5, 7)]
        assert g.tensor.shape == (4, 4, 1)
        assert np.array_equal(g.tensor.planes[..., 0], q.planes[:, 5:9, 7:11])

    def test_outlier_excluded_against_brute_force(self, rng):
        img = np.full((12, 12, 3), 100.0) + rng.normal(0, 1, (12, 12, 3))
        img[8:11, 8:11] = 250.0
        q = encode_rgb(img)
        cfg = DenoiseConfig(sigma=10, patch_size=3, group_size=20, search_window=12)
        g = block_match(q, (0, 0), cfg)
        ranked = sorted(brute_distances(q, (0, 0), 3, 12), key=lambda t: t[1])
        expected = [(0, 0)] + [a for a, _ in ranked if a != (0, 0)][:19]
        assert g.member_anchors == expected
        assert all(not (6 <= r <= 10 and 6 <= c <= 10) for r, c in g.member_anchors)
        assert np.all(np.diff(g.distances) >= 0) and g.distances[0] == 0

    def test_window_clamped_at_border(self, rng):
        q = encode_rgb(smooth_image(rng, 30, 30))
        cfg = DenoiseConfig(sigma=10, patch_size=4, group_size=400, search_window=10)
        g = block_match(q, (26, 0), cfg)
        rows = {r for r, _ in g.member_anchors}
        cols = {c for _, c in g.member_anchors}
        assert rows == set(range(17, 27)) and cols == set(range(0, 10))

    def test_padding(self, rng):
        q = encode_rgb(smooth_image(rng, 8, 8))
        cfg = DenoiseConfig(sigma=10, patch_size=6, group_size=20, search_window=6)
        g = block_match(q, (1, 1), cfg)
        assert g.padded
        assert len(g.member_anchors) == 20
        assert len(set(g.member_anchors)) == 9
        assert g.member_anchors[0] == (1, 1)

    def test_reference_outside(self, rng):
        q = encode_rgb(smooth_image(rng, 8, 8))
        with pytest.raises(ShapeError):
            block_match(q, (5, 0), DenoiseConfig(sigma=10, patch_size=4, group_size=2, search_window=4))


class TestGroup:
    def group(self, rng, k=8, w=5):
        q = encode_rgb(smooth_image(rng, 24, 24) + rng.normal(0, 10, (24, 24, 3)))
        return block_match(q, (6, 6), DenoiseConfig(sigma=10, patch_size=w, group_size=k, search_window=12))

    def test_zero_threshold(self, rng):
        g = self.group(rng)
        out = denoise_group(g, DenoiseConfig(sigma=10, patch_size=5, group_size=8, tau=0.0))
        assert np.max(np.abs(out.planes - g.tensor.planes)) <= 1e-10 * np.abs(g.tensor.planes).max()

    def test_rank_one_group(self, rng):
        # K copies of a rank-1 patch u v^T (pure quaternion u, real v): one nonzero core entry
        u = rng.uniform(0, 255, (4, 5))
        u[0] = 0
        patch = np.einsum("ai,j->aij", u, rng.uniform(0.2, 1.0, 5))
        stack = QuaternionTensor(np.repeat(patch[..., None], 6, axis=3))
        from qhosvd.denoise import SimilarGroup

        g = SimilarGroup(stack, [(0, 0)] * 6, np.zeros(6))
        core = qhosvd(stack).core.modulus()
        dominant = core.max()
        assert np.sort(core.ravel())[-2] <= 1e-10 * dominant
        cfg = DenoiseConfig(sigma=50, patch_size=5, group_size=6, tau=0.9 * dominant)
        out = denoise_group(g, cfg)
        assert np.max(np.abs(out.planes - stack.planes)) <= 1e-8

    def test_energy_does_not_grow(self, rng):
        for k in (4, 8, 16):
            g = self.group(rng, k=k)
            cfg = DenoiseConfig(sigma=20, patch_size=5, group_size=k)
            core = qhosvd(g.tensor, full_modes(3)).core
            assert hard_threshold_core(core, cfg.threshold).norm() <= core.norm()
            assert denoise_group(g, cfg).norm() <= g.tensor.norm() * (1 + 1e-12)


class TestPipeline:
    def test_zero_threshold_identity(self, rng):
        img = smooth_image(rng, 20, 23)
        cfg = DenoiseConfig(sigma=20, patch_size=4, group_size=6, iterations=1, search_window=8, tau=0.0)
        assert np.max(np.abs(denoise(img, cfg) - img)) <= 1e-8

    def test_zero_sigma_identity(self, rng):
        img = smooth_image(rng, 18, 18)
        cfg = DenoiseConfig(sigma=0.0, patch_size=4, group_size=6, iterations=2, search_window=8)
        assert np.max(np.abs(denoise(img, cfg) - img)) <= 1e-8

    def test_single_iteration_is_one_pass(self, rng):
        y = encode_rgb(smooth_image(rng, 20, 20) + rng.normal(0, 15, (20, 20, 3)))
        cfg = DenoiseConfig(sigma=15, patch_size=4, group_size=8, iterations=1, search_window=8)
        assert np.array_equal(denoise_quaternion(y, cfg).planes, denoise_pass(y, cfg).planes)

    def test_two_iterations_unrolled(self, rng):
        y = encode_rgb(smooth_image(rng, 20, 20) + rng.normal(0, 15, (20, 20, 3)))
        cfg = DenoiseConfig(sigma=15, patch_size=4, group_size=8, iterations=2, search_window=8, delta=0.3)
        x1 = denoise_pass(y, cfg)
        x2 = denoise_pass(regularize(y, x1, 0.3), cfg)
        assert np.array_equal(denoise_quaternion(y, cfg).planes, x2.planes)

    def test_regularization_fixed_point(self, rng):
        y = encode_rgb(smooth_image(rng, 6, 6))
        assert np.array_equal(regularize(y, y, 0.1).planes, y.planes)

    def test_progress_and_determinism(self, rng):
        noisy = add_gaussian_noise(smooth_image(rng, 24, 24), 20, 3)
        cfg = DenoiseConfig(sigma=20, patch_size=4, group_size=10, iterations=2, search_window=10)
        calls = []
        a = denoise(noisy, cfg, progress=lambda i, n: calls.append((i, n)))
        b = denoise(noisy, cfg, threads=3)
        assert calls == [(1, 2), (2, 2)]
        assert np.array_equal(a, b)

    def test_too_small(self, rng):
        with pytest.raises(ShapeError):
            denoise(smooth_image(rng, 5, 9), DenoiseConfig(sigma=10, patch_size=6))

    @pytest.mark.slow
    def test_gain_on_synthetic_image(self, rng):
        clean = smooth_image(rng, 64, 64, blur=3.0)
        clean = 40 + (clean - clean.min()) * (175 / np.ptp(clean))
        noisy = add_gaussian_noise(clean, 20, 11)
        out = denoise(noisy, DenoiseConfig.for_sigma(20))
        assert psnr(clean, out) >= psnr(clean, noisy) + 4.0
        assert ssim(clean, out) > ssim(clean, noisy)
