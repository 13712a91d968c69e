import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlls.analytics import discrete_weights, p_discretized, p_qlls
from qlls.errors import ConfigError, UndefinedEstimateError
from qlls.protocol import (
    Acquisition,
    AcquisitionRecord,
    RunConfig,
    acquire,
    convergence_sweep,
    estimate1,
    estimate1_all,
    estimate2,
    loglog_slope,
    measure_registers,
    plug_in_estimate,
    projector_classes,
    run_experiment,
    run_single,
    run_stream,
    validate,
)
from qlls.su2 import IDENTITY

SEED = 12345


def cfg(design, **kw):
    base = dict(n=2, N=50, M=1000, K=30, measure="flat", design=design, estimator="est1", master_seed=SEED)
    base.update(kw)
    return RunConfig(**base)


def records_from_bits(rows):
    return Acquisition.from_records(
        [AcquisitionRecord(0, 1, (0,) * len(b), tuple(b)) for b in rows], registers=len(rows[0])
    )


class TestConfig:
    def test_invalid_configs(self, clifford):
        with pytest.raises(ConfigError):
            cfg(clifford, M=0)
        with pytest.raises(ConfigError):
            cfg(clifford, n=3)
        with pytest.raises(ConfigError):
            cfg(clifford, measure="classical")
        with pytest.raises(ConfigError):
            cfg(clifford, estimator="est3")
        with pytest.raises(ConfigError):
            cfg(clifford, K=0)

    def test_sweep_requires_ascending(self, clifford):
        with pytest.raises(ConfigError):
            convergence_sweep(cfg(clifford), [1000, 100])


class TestAcquire:
    def test_shapes_and_ranges(self, clifford):
        c = cfg(clifford, M=500)
        acq = acquire(c, run_stream(SEED, 0, c.M))
        assert len(acq) == 500
        assert acq.a.shape == acq.bits.shape == (500, 3)
        assert acq.i.min() >= 1 and acq.i.max() <= 50
        assert acq.u_index.min() >= 0 and acq.u_index.max() < 24
        assert set(np.unique(acq.bits)) <= {0, 1}

    def test_empty_batch(self):
        acq = Acquisition.from_records([], registers=3)
        assert len(acq) == 0
        assert list(acq.records()) == []
        with pytest.raises(UndefinedEstimateError):
            estimate1(acq, 2, 1)

    def test_single_segment_label_frequency(self, clifford):
        c = cfg(clifford, N=1, M=20000)
        acq = acquire(c, run_stream(SEED, 0, c.M))
        assert np.all(acq.i == 1)
        freq = np.mean(acq.a == 0)
        sigma = math.sqrt(0.25 / acq.a.size)
        assert abs(freq - 0.5) < 3 * sigma

    def test_label_frequency_follows_w0(self, clifford):
        c = cfg(clifford, measure="bures", N=4, M=40000)
        acq = acquire(c, run_stream(SEED, 1, c.M))
        dw = discrete_weights("bures", 4)
        for seg in range(4):
            sel = acq.i == seg + 1
            assert abs(sel.mean() - dw.omega[seg]) < 4 * math.sqrt(dw.omega[seg] * (1 - dw.omega[seg]) / c.M)
            p0 = dw.w0[seg]
            n_lab = sel.sum() * 3
            assert abs(np.mean(acq.a[sel] == 0) - p0) < 4 * math.sqrt(p0 * (1 - p0) / n_lab) + 1e-12

    def test_identity_eigenstate_is_deterministic(self, clifford, rng):
        u = clifford.index_of(IDENTITY)
        bits = measure_registers(clifford, np.full(100, u), np.zeros((100, 3), dtype=np.uint8), rng)
        assert not bits.any()
        bits = measure_registers(clifford, np.full(100, u), np.ones((100, 3), dtype=np.uint8), rng)
        assert bits.all()

    def test_stream_determinism(self, clifford):
        c = cfg(clifford, M=300)
        a1 = acquire(c, run_stream(SEED, 3, c.M))
        a2 = acquire(c, run_stream(SEED, 3, c.M))
        a3 = acquire(c, run_stream(SEED, 4, c.M))
        assert a1.to_csv() == a2.to_csv()
        assert a1.to_csv() != a3.to_csv()

    def test_csv_round_trip(self, clifford):
        c = cfg(clifford, M=200)
        acq = acquire(c, run_stream(SEED, 0, c.M))
        text = acq.to_csv()
        assert text.splitlines()[0] == "u_index,i,a,bits"
        back = Acquisition.from_csv(text)
        for x, y in zip((acq.u_index, acq.i, acq.a, acq.bits), (back.u_index, back.i, back.a, back.bits)):
            np.testing.assert_array_equal(x, y)
        np.testing.assert_array_equal(estimate2(back, c), estimate2(acq, c))

    def test_sift_counts_sum_to_M(self, clifford):
        c = cfg(clifford, M=777)
        acq = acquire(c, run_stream(SEED, 0, c.M))
        heads = (acq.bits[:, :2] == 0).sum(axis=1)
        assert np.bincount(heads, minlength=3).sum() == 777


class TestEstimate1:
    def test_sift_example(self):
        acq = records_from_bits([(0, 1, 0), (1, 0, 1), (0, 0, 0), (1, 1, 1)])
        assert estimate1(acq, 2, 1) == pytest.approx(0.5)
        np.testing.assert_allclose(estimate1_all(acq, 2), [0.0, 0.5, 1.0])

    def test_all_heads(self):
        acq = records_from_bits([(0, 0, 0)] * 5)
        assert estimate1(acq, 2, 2) == 1.0

    def test_empty_sift(self):
        acq = records_from_bits([(0, 1, 0)])
        with pytest.raises(UndefinedEstimateError):
            estimate1(acq, 2, 2)
        assert math.isnan(estimate1_all(acq, 2)[2])

    def test_consistency_at_large_M(self, clifford):
        for measure in ("flat", "bures"):
            s = run_experiment(cfg(clifford, measure=measure, M=100_000, K=10), reference="discretized")
            for k, e in enumerate(s.entries):
                assert abs(e.bias) < 3 * e.standard_error, (measure, k, e)

    def test_duality_of_means(self, clifford):
        s = run_experiment(cfg(clifford, M=2000))
        e = s.entries
        se = math.hypot(e[0].standard_error, e[2].standard_error)
        assert abs(e[0].mean + e[2].mean - 1) < 3 * se
        assert abs(2 * e[1].mean - 1) < 3 * 2 * e[1].standard_error


class TestEstimate2:
    def test_projector_classes(self, clifford, icosahedral):
        labels, count = projector_classes(clifford)
        assert count == 6 and np.all(np.bincount(labels) == 4)
        labels, count = projector_classes(icosahedral)
        assert count == 30 and np.all(np.bincount(labels) == 2)

    def test_exact_plug_in_point(self, clifford, icosahedral):
        for measure, design, n in (("flat", clifford, 2), ("bures", clifford, 2), ("bures", icosahedral, 4)):
            dw = discrete_weights(measure, 50)
            labels, ncls = projector_classes(design)
            c = np.zeros(ncls)
            c[labels] = np.abs(design.elements[:, 0, 0]) ** 2
            q = dw.w0[:, None] * c[None, :] + (1 - dw.w0[:, None]) * (1 - c[None, :])
            got = plug_in_estimate(q, np.ones_like(q, dtype=bool), dw.omega, n)
            want = [p_discretized(measure, n, k, design, 50) for k in range(n + 1)]
            np.testing.assert_allclose(got, want, atol=1e-12)

    def test_exact_plug_in_from_records(self, clifford):
        # flat N=2: w0 = 1/4, 3/4 and |U00|^2 in {0, 1/2, 1}, so every q is a multiple of 1/4
        c = cfg(clifford, N=2)
        dw = discrete_weights("flat", 2)
        recs = []
        for seg in range(2):
            for u, U in enumerate(clifford.elements):
                cu = abs(U[0, 0]) ** 2
                heads = round(4 * (dw.w0[seg] * cu + (1 - dw.w0[seg]) * (1 - cu)))
                pooled = [0] * heads + [1] * (4 - heads)
                recs.append(AcquisitionRecord(u, seg + 1, (0, 0, 0), (pooled[0], pooled[1], 0)))
                recs.append(AcquisitionRecord(u, seg + 1, (0, 0, 0), (pooled[2], pooled[3], 1)))
        got = estimate2(Acquisition.from_records(recs, 3), c)
        want = [p_discretized("flat", 2, k, clifford, 2) for k in range(3)]
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_single_full_cell(self):
        out = plug_in_estimate(np.array([[1.0]]), np.array([[True]]), np.array([1.0]), 2)
        assert out[2] == 1.0

    def test_empty_cells_renormalized(self):
        q = np.array([[0.3, 0.9], [0.5, 0.5]])
        present = np.array([[True, False], [False, False]])
        out = plug_in_estimate(q, present, np.array([0.2, 0.8]), 1)
        np.testing.assert_allclose(out, [0.3 * 0.7 / 0.7, 0.09 / 0.3])

    def test_small_M_bias(self, clifford):
        s = run_experiment(cfg(clifford, M=10, estimator="est2"))
        e = s.entries[0]
        assert abs(e.bias) > 3 * e.standard_error

    def test_bias_decays_like_one_over_M(self, clifford):
        c = cfg(clifford, estimator="est2")
        s4, s5 = (run_experiment(replace(c, M=M), reference="discretized") for M in (10_000, 100_000))
        for k in (0, 2):
            assert abs(s5.entries[k].bias) < 0.2 * abs(s4.entries[k].bias)
        # the symmetric case carries no plug-in bias
        e = s4.entries[1]
        assert abs(e.bias) < 3 * e.standard_error


class TestValidate:
    def test_identical_values(self):
        e = validate([0.3] * 5, 0.3)
        assert e.mean == pytest.approx(0.3) and e.variance == pytest.approx(0.0, abs=1e-15)
        assert e.mse == pytest.approx(0.0, abs=1e-7)

    def test_hand_values(self):
        e = validate([0.4, 0.6], 0.5)
        assert e.mean == pytest.approx(0.5)
        assert e.variance == pytest.approx(0.01)
        assert e.mse == pytest.approx(0.1)

    def test_failed_runs_excluded(self):
        e = validate([0.4, math.nan, 0.6], 0.5)
        assert e.failed == 1 and e.succeeded == 2
        with pytest.raises(UndefinedEstimateError):
            validate([math.nan, math.nan], 0.5)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=40), st.floats(0, 1))
    @settings(max_examples=200, deadline=None)
    def test_mse_bounds(self, values, ref):
        e = validate(values, ref)
        assert e.variance >= 0
        assert e.mse >= abs(e.bias) - 1e-12
        assert e.mse >= math.sqrt(e.variance) - 1e-12


class TestExperiment:
    def test_parallel_determinism(self, clifford):
        c = cfg(clifford, M=500, K=8, estimator="est2")
        serial = run_experiment(c, workers=1)
        parallel = run_experiment(c, workers=4)
        assert serial.estimates.tobytes() == parallel.estimates.tobytes()
        assert serial.entries == parallel.entries
        np.testing.assert_array_equal(run_single(c, 5), serial.estimates[5])

    @pytest.mark.parametrize("measure, expected", [("flat", (0.40, 0.50, 0.60)), ("bures", (0.30, 0.50, 0.70))])
    def test_means_match_table(self, clifford, measure, expected):
        s = run_experiment(cfg(clifford, measure=measure))
        for e, v in zip(s.entries, expected):
            assert abs(e.mean - v) < 3 * e.standard_error
        np.testing.assert_allclose(s.column("reference"), [p_qlls(measure, 2, k) for k in range(3)])

    def test_est1_scaling(self, clifford):
        Ms = [100, 1000, 10_000]
        sweep = convergence_sweep(cfg(clifford), Ms)
        for k in range(3):
            slope = loglog_slope(Ms, [s.entries[k].mse for s in sweep])
            assert -0.65 <= slope <= -0.35, (k, slope)


def test_loglog_slope_exact():
    xs = np.array([1e2, 1e3, 1e4])
    assert loglog_slope(xs, 3 * xs**-0.5) == pytest.approx(-0.5)
