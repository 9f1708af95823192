"""Codebook training, the residual cascade, and the RVQM model file."""

import numpy as np
import pytest
from sklearn.base import clone

from lqrlab import (
    Codebook,
    ResidualQuantizer,
    RvqModel,
    kmeans,
    load_model,
    quantize,
    save_model,
    trace_from_stage_outputs,
    train_codebooks,
)
from lqrlab.exceptions import (
    BadMagic,
    DimensionMismatch,
    DimensionTooSmall,
    NonFiniteInput,
    TooFewVectors,
    TruncatedFile,
    VersionUnsupported,
)

from _oracles import brute_force_distortion


def _mixture(seed, m=120, d=3, n_centres=4, spread=0.25):
    rng = np.random.Generator(np.random.Philox(seed))
    centres = rng.uniform(-3, 3, size=(n_centres, d))
    labels = rng.integers(0, n_centres, size=m)
    return centres[labels] + spread * rng.standard_normal((m, d))


class TestKmeans:
    def test_two_vectors_exact_cover(self):
        points = np.array([[0.0, 1.0], [4.0, -2.0]])
        cb = kmeans(points, 2, seed=0)
        np.testing.assert_allclose(np.sort(cb.codewords, axis=0),
                                   np.sort(points, axis=0))
        assert cb.distortions[-1] == 0.0

    def test_single_codeword_is_mean(self, philox):
        points = philox(1).uniform(-1, 1, (40, 3))
        cb = kmeans(points, 1, seed=5)
        np.testing.assert_allclose(cb.codewords[0], points.mean(axis=0), rtol=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_two_cluster_line(self, seed):
        points = np.array([[0.0], [1.0], [10.0], [11.0]])
        cb = kmeans(points, 2, seed=seed, restarts=4)
        np.testing.assert_allclose(np.sort(cb.codewords[:, 0]), [0.5, 10.5])
        assert cb.distortions[-1] == pytest.approx(1.0, rel=1e-12)

    def test_too_few_vectors(self):
        with pytest.raises(TooFewVectors):
            kmeans(np.zeros((2, 2)), 3, seed=0)

    def test_nonfinite_rejected(self):
        points = np.array([[0.0, np.inf], [1.0, 2.0]])
        with pytest.raises(NonFiniteInput):
            kmeans(points, 1, seed=0)

    @pytest.mark.parametrize("seed", range(6))
    def test_distortion_history_nonincreasing(self, seed):
        cb = kmeans(_mixture(seed), 5, seed=seed)
        hist = np.array(cb.distortions)
        assert len(hist) >= 1
        drops = np.diff(hist)
        assert (drops <= 1e-12 * hist[:-1]).all()

    def test_deterministic(self):
        points = _mixture(9)
        a = kmeans(points, 4, seed=77)
        b = kmeans(points, 4, seed=77)
        np.testing.assert_array_equal(a.codewords, b.codewords)

    def test_restarts_never_hurt(self):
        points = _mixture(13, m=60)
        single = kmeans(points, 6, seed=3).distortions[-1]
        multi = kmeans(points, 6, seed=3, restarts=16).distortions[-1]
        assert multi <= single + 1e-12

    @pytest.mark.parametrize("seed", [100, 101, 102, 103, 104])
    def test_matches_live_brute_force_on_tiny_instances(self, seed):
        rng = np.random.Generator(np.random.Philox(seed))
        n = int(rng.integers(1, 4))
        points = rng.uniform(-1, 1, size=(int(rng.integers(max(n, 2), 9)), 2))
        optimum = brute_force_distortion(points, n)
        got = kmeans(points, n, seed=seed, restarts=16).distortions[-1]
        assert got == pytest.approx(optimum, rel=1e-9, abs=1e-9)

    def test_no_duplicate_codewords_on_spread_data(self):
        cb = kmeans(_mixture(21, m=80, n_centres=5), 5, seed=2)
        gram = np.square(cb.codewords[:, None] - cb.codewords[None, :]).sum(axis=2)
        off_diag = gram[~np.eye(5, dtype=bool)]
        assert (off_diag > 0).all()


class TestTrainCodebooks:
    def test_exact_cover_zeroes_first_stage(self):
        frames = np.array([[0.0, 0.0], [1.0, 3.0], [-2.0, 1.0]])
        model = train_codebooks(frames, n_stages=1, n_codewords=3, seed=0)
        trace = quantize(model, frames)
        assert trace.stage_sigma[1] == pytest.approx(0.0, abs=1e-20)

    def test_second_stage_reduces_sigma(self, philox):
        frames = philox(31).standard_normal((200, 4))
        model = train_codebooks(frames, n_stages=2, n_codewords=8, seed=1)
        trace = quantize(model, frames)
        assert trace.stage_sigma[2] <= trace.stage_sigma[1]

    def test_seed_change_keeps_distortion_close(self):
        frames = _mixture(55, m=300, d=4, n_centres=6)
        a = train_codebooks(frames, 1, 6, seed=10).stages[0].distortions[-1]
        b = train_codebooks(frames, 1, 6, seed=11).stages[0].distortions[-1]
        assert abs(a - b) <= 0.05 * max(a, b)

    def test_deterministic_model(self, philox):
        frames = philox(41).standard_normal((100, 3))
        a = train_codebooks(frames, 3, 4, seed=9)
        b = train_codebooks(frames, 3, 4, seed=9)
        for cb_a, cb_b in zip(a.stages, b.stages):
            np.testing.assert_array_equal(cb_a.codewords, cb_b.codewords)

    def test_zero_codeword_appended_and_norms_nonincreasing(self, philox):
        frames = philox(51).standard_normal((150, 4))
        model = train_codebooks(frames, 3, 8, seed=2, zero_codeword=True,
                                variance_mode="power")
        assert model.codebook_size == 9
        for cb in model.stages:
            np.testing.assert_array_equal(cb.codewords[-1], np.zeros(4))
        # guarantee holds on data the model never saw
        unseen = philox(52).standard_normal((60, 4))
        trace = quantize(model, unseen)
        norms = np.linalg.norm(trace.residuals, axis=2)
        assert (np.diff(norms, axis=0) <= 1e-12).all()

    def test_mixed_dims_rejected(self, philox):
        rng = philox(61)
        with pytest.raises(DimensionMismatch):
            train_codebooks([rng.standard_normal((10, 3)),
                             rng.standard_normal((10, 4))], 1, 2, seed=0)


class TestQuantize:
    def test_zero_codebook_passes_input_through(self, philox):
        model = RvqModel(stages=(Codebook(codewords=np.zeros((1, 2))),))
        frames = philox(71).standard_normal((5, 2))
        trace = quantize(model, frames)
        np.testing.assert_array_equal(trace.residuals[1], frames)
        assert (trace.codes == 0).all()

    def test_exact_codebook_zeroes_residual(self, philox):
        frames = philox(72).standard_normal((4, 3))
        model = RvqModel(stages=(Codebook(codewords=frames.copy()),))
        trace = quantize(model, frames)
        np.testing.assert_allclose(trace.residuals[1], 0.0, atol=1e-15)

    def test_nearest_neighbour_worked_example(self):
        model = RvqModel(stages=(Codebook(codewords=np.array([[0.0, 0.0], [1.0, 1.0]])),))
        trace = quantize(model, np.array([[0.6, 0.9]]))
        assert trace.codes[0, 0] == 1
        np.testing.assert_allclose(trace.residuals[1][0], [-0.4, -0.1], atol=1e-15)

    def test_tie_breaks_to_lowest_index(self):
        model = RvqModel(stages=(Codebook(codewords=np.array([[0.0, 0.0], [1.0, 1.0]])),))
        trace = quantize(model, np.array([[0.5, 0.5]]))
        assert trace.codes[0, 0] == 0

    def test_residual_identity(self, small_model, philox):
        frames = philox(81).standard_normal((30, small_model.dim))
        trace = quantize(small_model, frames)
        rebuilt = trace.stage_outputs.sum(axis=0) + trace.residuals[-1]
        np.testing.assert_allclose(rebuilt, frames, rtol=1e-6, atol=1e-12)

    def test_codes_in_range(self, small_model, philox):
        frames = philox(82).standard_normal((25, small_model.dim))
        trace = quantize(small_model, frames)
        assert trace.codes.min() >= 0
        assert trace.codes.max() < small_model.codebook_size
        assert trace.codes.shape == (small_model.n_stages, 25)

    def test_sigma_nonnegative_and_consistent(self, small_model, philox):
        frames = philox(83).standard_normal((20, small_model.dim))
        trace = quantize(small_model, frames)
        assert all(s >= 0 for s in trace.stage_sigma)
        recomputed = [float(r.var(axis=1).mean()) for r in trace.residuals]
        np.testing.assert_allclose(trace.stage_sigma, recomputed, rtol=1e-12)

    def test_dim_mismatch(self, small_model):
        with pytest.raises(DimensionMismatch):
            quantize(small_model, np.zeros((3, small_model.dim + 1)))

    def test_variance_mode_needs_two_dims(self):
        model = RvqModel(stages=(Codebook(codewords=np.array([[0.0]])),))
        with pytest.raises(DimensionTooSmall):
            quantize(model, np.array([[1.0], [2.0]]))
        power = RvqModel(stages=(Codebook(codewords=np.array([[0.0]])),),
                         variance_mode="power")
        trace = quantize(power, np.array([[1.0], [2.0]]))
        assert trace.stage_sigma[0] == pytest.approx(2.5)


class TestTraceFromStageOutputs:
    def test_agrees_with_native_quantization(self, small_model, philox):
        frames = philox(91).standard_normal((12, small_model.dim))
        native = quantize(small_model, frames)
        external = trace_from_stage_outputs(frames, list(native.stage_outputs),
                                            small_model.variance_mode)
        np.testing.assert_array_equal(external.residuals, native.residuals)
        np.testing.assert_allclose(external.stage_sigma, native.stage_sigma, rtol=1e-15)
        assert external.codes is None

    def test_shape_mismatch_rejected(self, philox):
        frames = philox(92).standard_normal((6, 3))
        with pytest.raises(DimensionMismatch):
            trace_from_stage_outputs(frames, [np.zeros((5, 3))])


class TestModelFile:
    def test_round_trip_bit_exact_for_f32_codewords(self, tmp_path, philox):
        codewords = [
            philox(95).standard_normal((8, 5)).astype(np.float32).astype(np.float64)
            for _ in range(3)
        ]
        model = RvqModel(stages=tuple(Codebook(codewords=c) for c in codewords),
                         variance_mode="power", zero_codeword=True)
        path = tmp_path / "m.rvqm"
        save_model(model, path)
        back = load_model(path)
        assert back.variance_mode == "power"
        assert back.zero_codeword is True
        for cb_a, cb_b in zip(back.stages, model.stages):
            np.testing.assert_array_equal(cb_a.codewords, cb_b.codewords)

    def test_save_load_save_is_byte_stable(self, tmp_path, small_model):
        p1 = tmp_path / "a.rvqm"
        p2 = tmp_path / "b.rvqm"
        save_model(small_model, p1)
        save_model(load_model(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_golden_file_size(self, tmp_path, philox):
        stages = tuple(
            Codebook(codewords=philox(96).standard_normal((256, 32)))
            for _ in range(3)
        )
        path = tmp_path / "g.rvqm"
        save_model(RvqModel(stages=stages), path)
        # 4 magic + 4 version + 4 stages + 4 dim + 4 size + 1 mode + 1 flag
        assert path.stat().st_size == 22 + 3 * 256 * 32 * 4

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.rvqm"
        path.write_bytes(b"XXXX" + b"\x00" * 30)
        with pytest.raises(BadMagic):
            load_model(path)

    def test_unsupported_version(self, tmp_path, small_model):
        path = tmp_path / "v.rvqm"
        save_model(small_model, path)
        blob = bytearray(path.read_bytes())
        blob[4] = 9
        path.write_bytes(bytes(blob))
        with pytest.raises(VersionUnsupported):
            load_model(path)

    def test_truncated(self, tmp_path, small_model):
        path = tmp_path / "t.rvqm"
        save_model(small_model, path)
        path.write_bytes(path.read_bytes()[:-10])
        with pytest.raises(TruncatedFile):
            load_model(path)


class TestResidualQuantizer:
    def test_fit_transform_reconstructs_partially(self, philox):
        frames = _mixture(123, m=200, d=4)
        rq = ResidualQuantizer(n_stages=3, codebook_size=8, random_state=0)
        approx = rq.fit(frames).transform(frames)
        err = np.square(frames - approx).mean()
        assert err < np.square(frames - frames.mean(axis=0)).mean()

    def test_predict_shape_and_range(self, philox):
        frames = _mixture(124, m=150, d=3)
        rq = ResidualQuantizer(n_stages=2, codebook_size=4, random_state=1).fit(frames)
        codes = rq.predict(frames)
        assert codes.shape == (150, 2)
        assert codes.min() >= 0 and codes.max() < 4

    def test_score_matches_report(self, philox):
        from lqrlab.lqr import lqr_report

        frames = _mixture(125, m=100, d=4)
        rq = ResidualQuantizer(n_stages=2, codebook_size=4, random_state=2).fit(frames)
        assert rq.score(frames) == lqr_report(rq.quantize_trace(frames)).mean_lqr

    def test_clone_and_params(self):
        rq = ResidualQuantizer(n_stages=5, codebook_size=32, zero_codeword=True)
        params = clone(rq).get_params()
        assert params["n_stages"] == 5
        assert params["codebook_size"] == 32
        assert params["zero_codeword"] is True

    def test_unfitted_raises(self):
        with pytest.raises(RuntimeError):
            ResidualQuantizer().transform(np.zeros((3, 2)))
