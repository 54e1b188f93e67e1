from math import sqrt

import numpy as np
import pytest

from realmoments.criteria import (
    TOL_CRIT,
    StateMoments,
    Verdict,
    build_hankel,
    ccnr_test,
    corollary1_test,
    first_moment_floor,
    make_verdict,
    parse_criteria,
    ppt_test,
    pt_moment_tests,
    run_all,
    thm1_r_moment_test,
    thm2_hankel_test,
    thm3_q_hankel_test,
)
from realmoments.moments import MomentVector, pt_moments, realignment_moments
from realmoments.reshape import BipartiteDims
from realmoments.states import (
    bell_state,
    maximally_mixed,
    product_state,
    random_density,
    random_separable,
    werner,
)

D22 = BipartiteDims(2, 2)


def werner_f(p):
    return (6 * p**3 + 1 - 9 * p**4 - 6 * p**2) / 16


def numpy_realign(rho, dA, dB):
    return rho.reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3).reshape(dA * dA, dB * dB)


class TestBuildHankel:
    def test_b_hat_one(self):
        r = realignment_moments(werner(0.6))
        h = build_hankel(r, "B_hat", 1)
        np.testing.assert_array_equal(h.entries, [[1, r[2]], [r[2], r[3]]])
        assert h.source_kind == "R"

    def test_h_one_from_pt_moments(self):
        p = pt_moments(werner(0.2))
        np.testing.assert_array_equal(build_hankel(p, "H", 1).entries, [[4, p[1]], [p[1], p[2]]])

    def test_hat_replaces_only_first_moment_positions(self):
        m = MomentVector("R", (4.0, 0.7, 0.7, 0.7, 0.7))  # r1 equals other moments on purpose
        h = build_hankel(m, "H", 2).entries
        hat = build_hankel(m, "H_hat", 2).entries
        expected = h.copy()
        expected[0, 1] = expected[1, 0] = 1.0
        np.testing.assert_array_equal(hat, expected)
        b_hat = build_hankel(m, "B_hat", 1).entries
        np.testing.assert_array_equal(b_hat, [[1.0, 0.7], [0.7, 0.7]])

    def test_hankel_structure(self):
        m = MomentVector("Q", tuple(float(k) for k in range(10)))
        h = build_hankel(m, "B", 3).entries
        for i in range(4):
            for j in range(4):
                assert h[i, j] == h[j, i] == i + j + 1

    def test_insufficient_moments(self):
        m = MomentVector("R", (4.0, 1.0, 0.5, 0.25))
        build_hankel(m, "B", 1)
        with pytest.raises(ValueError):
            build_hankel(m, "H", 2)
        with pytest.raises(ValueError):
            build_hankel(m, "B_hat", 2)


class TestThm1:
    @pytest.mark.parametrize("p", np.linspace(0, 1, 11))
    def test_werner_margin_closed_form(self, p):
        assert thm1_r_moment_test(werner(p)).margin == pytest.approx(werner_f(p), abs=1e-12)

    def test_werner_half_is_entangled(self):
        v = thm1_r_moment_test(werner(0.5))
        assert werner_f(0.5) == -0.01953125
        assert v.margin == pytest.approx(-0.01953125, abs=1e-10)
        assert v.verdict is Verdict.ENTANGLED

    def test_bell(self):
        v = thm1_r_moment_test(werner(1.0))
        assert v.entangled and v.margin == pytest.approx(-0.5, abs=1e-12)

    def test_maximally_mixed(self):
        v = thm1_r_moment_test(maximally_mixed(D22))
        assert not v.entangled and v.margin == pytest.approx(1 / 16)


class TestThm2:
    def test_bell_b1(self):
        v = {x.criterion_id: x for x in thm2_hankel_test(werner(1.0))}
        # eigenvalues of [[1, 1], [1, 1/2]]
        assert v["thm2_B1"].margin == pytest.approx((3 - sqrt(17)) / 4, abs=1e-12)
        assert v["thm2_B1"].entangled

    def test_index_ranges(self):
        ids = [v.criterion_id for v in thm2_hankel_test(random_density(BipartiteDims(3, 3), 0))]
        assert ids == ["thm2_H1", "thm2_H2", "thm2_H3", "thm2_H4", "thm2_B1", "thm2_B2", "thm2_B3", "thm2_B4"]
        ids = [v.criterion_id for v in thm2_hankel_test(random_density(BipartiteDims(2, 3), 0))]
        assert ids == ["thm2_H1", "thm2_H2", "thm2_H3", "thm2_B1", "thm2_B2"]

    def test_b1_agrees_with_thm1(self, small_ensemble):
        states = small_ensemble + [werner(p) for p in np.linspace(0, 1, 41)]
        for s in states:
            b1 = next(v for v in thm2_hankel_test(s) if v.criterion_id == "thm2_B1")
            assert b1.verdict == thm1_r_moment_test(s).verdict

    def test_literal_hatted_h2_fails_on_maximally_mixed(self):
        # why the H family uses the first-moment floor instead of the literal substitution
        v = next(v for v in thm2_hankel_test(maximally_mixed(D22)) if v.criterion_id == "thm2_H2")
        assert v.witness["hat_min_eig"] < -0.01
        assert not v.entangled

    def test_first_moment_floor_below_true_value(self, small_ensemble):
        for s in small_ensemble:
            r = realignment_moments(s)
            for k in range(1, s.d // 2 + 1):
                assert first_moment_floor(r, k) <= r[1] + 1e-12

    def test_floor_is_feasibility_boundary(self):
        r = realignment_moments(werner(0.8))
        t = first_moment_floor(r, 2)

        def min_eig(t1):
            v = np.array(r.values)
            h = np.array([[v[0], t1, v[2]], [t1, v[2], v[3]], [v[2], v[3], v[4]]])
            return np.linalg.eigvalsh(h).min()

        assert min_eig(t + 1e-6) >= -1e-12
        assert min_eig(t - 1e-3) < 0

    def test_bell_detected_by_h2(self):
        v = next(v for v in thm2_hankel_test(bell_state(0)) if v.criterion_id == "thm2_H2")
        assert v.entangled


class TestThm3:
    def test_random_states_psd(self):
        for seed in range(100):
            for d in thm3_q_hankel_test(random_density(BipartiteDims(2, 3), seed)):
                assert d.ok and d.value >= -1e-9

    def test_product_state(self):
        s = product_state(np.diag([0.9, 0.1]), np.diag([0.6, 0.4]))
        diags = thm3_q_hankel_test(s)
        assert all(d.ok for d in diags)
        h2 = next(d for d in diags if d.check_id == "thm3_H2")
        assert h2.value == pytest.approx(0.0, abs=1e-14)

    def test_bell_still_psd(self):
        assert all(d.ok for d in thm3_q_hankel_test(bell_state(0)))


class TestCorollary1:
    def test_product_state_margin_zero(self):
        v = corollary1_test(product_state(np.diag([0.9, 0.1]), np.eye(2) / 2))
        assert v.margin == pytest.approx(0.0, abs=1e-14)
        assert not v.entangled

    def test_bell_against_numpy_oracle(self):
        rho = bell_state(0).mat
        tau = np.linalg.svd(numpy_realign(rho - np.eye(4) / 4, 2, 2), compute_uv=False)
        q2, q3 = np.sum(tau**2), np.sum(tau**3)
        oracle = sqrt((1 - 0.5) * (1 - 0.5)) * q3 - q2**2
        assert oracle == pytest.approx(-3 / 8, abs=1e-14)
        v = corollary1_test(bell_state(0))
        assert v.entangled
        assert v.margin == pytest.approx(-3 / 8, abs=1e-12)
        assert v.witness["unrooted_margin"] == pytest.approx(-15 / 32, abs=1e-12)

    @pytest.mark.parametrize("p", np.linspace(0, 1, 21))
    def test_werner_closed_form(self, p):
        # q_k = 3 (p/2)^k and both purities 1/2
        assert corollary1_test(werner(p)).margin == pytest.approx(3 * p**3 * (1 - 3 * p) / 16, abs=1e-13)

    def test_unrooted_form_flags_separable_werner(self):
        # p = 0.3 is separable, yet the unrooted inequality is violated
        v = corollary1_test(werner(0.3))
        assert v.witness["unrooted_margin"] < -1e-4
        assert not v.entangled


class TestCcnr:
    @pytest.mark.parametrize("p", [0.0, 0.2, 0.33, 0.34, 0.6, 1.0])
    def test_werner(self, p):
        v = ccnr_test(werner(p))
        assert v.margin == pytest.approx(1 - (1 + 3 * p) / 2, abs=1e-13)
        assert v.entangled == (p > 1 / 3)

    def test_bell(self):
        assert ccnr_test(bell_state(0)).margin == pytest.approx(-1.0, abs=1e-12)

    def test_product(self):
        a, b = np.diag([0.8, 0.2]), np.diag([0.5, 0.3, 0.2])
        v = ccnr_test(product_state(a, b))
        assert 1 - v.margin == pytest.approx(sqrt(0.68 * 0.38), abs=1e-13)
        assert not v.entangled


class TestPpt:
    @pytest.mark.parametrize("p", [0.0, 0.25, 0.5, 1.0])
    def test_werner(self, p):
        v = ppt_test(werner(p))
        assert v.margin == pytest.approx((1 - 3 * p) / 4, abs=1e-13)

    def test_bell(self):
        assert ppt_test(bell_state(0)).margin == pytest.approx(-0.5, abs=1e-12)

    def test_separable(self):
        for seed in range(100):
            assert ppt_test(random_separable(BipartiteDims(2, 3), 2, seed)).margin >= -1e-9


class TestPtMoments:
    def test_bell(self):
        v = pt_moment_tests(bell_state(0))[0]
        assert v.criterion_id == "p3" and v.entangled
        assert v.margin == pytest.approx(-0.75, abs=1e-12)

    def test_maximally_mixed(self):
        for v in pt_moment_tests(maximally_mixed(D22)):
            assert v.margin == pytest.approx(0.0, abs=1e-15) and not v.entangled

    @pytest.mark.parametrize("p", np.linspace(0, 1, 11))
    def test_werner_p3_closed_form(self, p):
        margin = pt_moment_tests(werner(p))[0].margin
        assert margin == pytest.approx(3 * p**2 * (1 - 3 * p) * (1 + p) / 16, abs=1e-13)

    def test_b_family_uses_raw_first_moment(self):
        ids = [v.criterion_id for v in pt_moment_tests(random_density(BipartiteDims(3, 3), 2))]
        assert ids == ["p3", "pt_B1", "pt_B2", "pt_B3", "pt_B4"]


class TestRunAll:
    def test_bell_limit(self):
        report = run_all(werner(1.0))
        for cid in ("thm1", "thm2_B1", "ccnr", "ppt", "p3"):
            assert report.verdict(cid).entangled
        assert report.entangled
        assert set(report.moments) == {"R", "Q", "P"}
        assert report.moments["R"].K == 4

    def test_maximally_mixed(self):
        report = run_all(maximally_mixed(BipartiteDims(2, 3)))
        assert not report.entangled and report.diagnostics_ok

    def test_separable_never_flagged(self):
        for dims in (D22, BipartiteDims(2, 3)):
            for seed in range(150):
                assert not run_all(random_separable(dims, 1 + seed % 4, seed)).entangled

    def test_each_criterion_once(self):
        ids = [v.criterion_id for v in run_all(random_density(D22, 1)).verdicts]
        assert len(ids) == len(set(ids))

    def test_criteria_selection(self):
        ids = [v.criterion_id for v in run_all(werner(0.5), "ppt,thm1").verdicts]
        assert ids == ["thm1", "ppt"]

    def test_deterministic(self):
        s = random_density(BipartiteDims(3, 2), 4)
        assert run_all(s).to_dict() == run_all(s).to_dict()

    def test_accepts_precomputed_moments(self):
        s = random_density(D22, 8)
        ms = StateMoments.of(s)
        assert thm1_r_moment_test(ms) == thm1_r_moment_test(s)


def test_parse_criteria():
    assert parse_criteria("all") == parse_criteria(None)
    assert parse_criteria("ccnr, thm1") == ("thm1", "ccnr")
    with pytest.raises(ValueError):
        parse_criteria("thm9")


def test_verdict_margin_consistency(small_ensemble):
    for s in small_ensemble:
        for v in run_all(s).verdicts:
            assert v.entangled == (v.margin < -TOL_CRIT)
            if abs(v.margin) > 1e-6:
                assert make_verdict(v.criterion_id, v.margin, tol=0.0).verdict == v.verdict


def test_thm1_implies_ccnr(small_ensemble):
    states = small_ensemble + [werner(p) for p in np.linspace(0, 1, 41)]
    for s in states:
        report = run_all(s)
        if report.verdict("thm1").entangled:
            assert report.verdict("ccnr").entangled


def test_pt_moment_tests_relax_ppt(small_ensemble):
    for s in small_ensemble:
        report = run_all(s)
        if any(v.entangled for v in report.verdicts if v.criterion_id == "p3" or v.criterion_id.startswith("pt_")):
            assert report.verdict("ppt").entangled
