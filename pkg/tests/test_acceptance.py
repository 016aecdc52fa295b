"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with its runtime (run with `pytest tests/test_acceptance.py -s`).
"""

import math
import time
from contextlib import contextmanager

import numpy as np

from scatterlab.channel import Scenario, channel_from_mueller, scatter_singlet, scenario_mueller
from scatterlab.mueller import compose, depolarizer, diattenuator, retarder
from scatterlab.qstate import (
    PlanePoint,
    gw_fit,
    linear_entropy,
    mems,
    mems_tangle_at,
    singlet,
    tangle,
    werner,
    werner_tangle_at,
)
from scatterlab.sweep import curve_points
from scatterlab.tomography import clip_to_physical, mle_reconstruct, monte_carlo_errors, simulate_counts

from conftest import random_density_matrix


@contextmanager
def criterion(name, budget_s):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"[FAIL] {name} ({time.perf_counter() - start:.2f}s)")
        raise
    elapsed = time.perf_counter() - start
    verdict = "PASS" if elapsed < budget_s else "FAIL"
    print(f"[{verdict}] {name} ({elapsed:.2f}s, budget {budget_s:g}s)")
    assert elapsed < budget_s, f"{name}: runtime {elapsed:.2f}s over budget {budget_s}s"


def _sphere(rng):
    phi = rng.uniform(0, 2 * math.pi)
    cz = rng.uniform(-1, 1)
    sz = math.sqrt(1 - cz * cz)
    return np.array([sz * math.cos(phi), sz * math.sin(phi), cz])


def test_criterion_1_werner_curve_identity():
    with criterion("1 Werner-curve identity (101 points)", 1.0):
        for p in np.linspace(0.0, 1.0, 101):
            rho = werner(float(p))
            assert abs(linear_entropy(rho) - (1 - p * p)) <= 1e-9
            assert abs(tangle(rho) - max(0.0, (3 * p - 1) / 2) ** 2) <= 1e-9


def test_criterion_2_type_i_reproduces_werner():
    rng = np.random.default_rng(1001)
    with criterion("2 type I scattering = Werner states (1000 samples)", 5.0):
        for _ in range(1000):
            delta = rng.uniform(0.0, 1.0 - 1e-9)
            out = scatter_singlet(Scenario(kind="I", delta=delta))
            assert np.max(np.abs(out - werner(1.0 - delta))) <= 1e-9


def test_criterion_3_type_ii_on_curve_with_gw_fit():
    rng = np.random.default_rng(1002)
    with criterion("3 type II on Werner curve + GW fit (200 samples)", 120.0):
        for _ in range(200):
            sc = Scenario(
                kind="II",
                delta=rng.uniform(0.0, 0.95),
                retardance=rng.uniform(0, 2 * math.pi),
                axis=tuple(_sphere(rng)),
            )
            out = scatter_singlet(sc)
            t = tangle(out, validate=False)
            s_l = linear_entropy(out, validate=False)
            assert abs(t - werner_tangle_at(s_l)) <= 1e-9
            assert gw_fit(out).fidelity >= 1.0 - 1e-6


def test_criterion_4_type_iii_sub_werner_wedge():
    rng = np.random.default_rng(1003)
    with criterion("4 type III sub-Werner wedge (1000 samples)", 10.0):
        strictly_below = 0
        for _ in range(1000):
            sc = Scenario(
                kind="III",
                delta=rng.uniform(0.0, 0.95),
                d=tuple(rng.uniform(0.0, 0.95) * _sphere(rng)),
                tu=1.0,
            )
            out = scatter_singlet(sc)
            t = tangle(out, validate=False)
            bound = werner_tangle_at(linear_entropy(out, validate=False))
            assert t <= bound + 1e-9
            if bound - t > 1e-3:
                strictly_below += 1
        assert strictly_below >= 100


def test_criterion_5_decomposition_and_superoperator_consistency():
    rng = np.random.default_rng(1004)
    eye2 = np.eye(2)
    with criterion("5 Kraus reconstruction + superoperator oracle (200 matrices)", 10.0):
        for _ in range(200):
            m = compose(
                [
                    depolarizer(rng.uniform(0.0, 0.9)),
                    retarder(rng.uniform(0, 2 * math.pi), _sphere(rng)),
                    diattenuator(rng.uniform(0.0, 0.9) * _sphere(rng), rng.uniform(0.3, 1.0)),
                ]
            )
            ch = channel_from_mueller(m)
            assert np.max(np.abs(ch.kraus.reconstruct() - m)) <= 1e-9

            rho = random_density_matrix(rng)
            super_op = np.zeros((16, 16), dtype=complex)
            for w, t in zip(ch.kraus.weights, ch.kraus.jones):
                k = np.kron(t, eye2)
                super_op += w * np.kron(k, k.conj())
            direct = (super_op @ rho.reshape(16)).reshape(4, 4)
            tr = direct.trace().real
            if abs(tr - 1.0) > 1e-9:
                direct = direct / tr
            from scatterlab.channel import apply

            assert np.max(np.abs(apply(ch, rho) - direct)) <= 1e-9


def test_criterion_6_trace_preservation_flags():
    rng = np.random.default_rng(1005)
    eye2 = np.eye(2)
    with criterion("6 trace preservation by scenario type", 10.0):
        for _ in range(100):
            sc1 = Scenario(kind="I", delta=rng.uniform(0.0, 0.95))
            sc2 = Scenario(
                kind="II",
                delta=rng.uniform(0.0, 0.95),
                retardance=rng.uniform(0, 2 * math.pi),
                axis=tuple(_sphere(rng)),
            )
            for sc in (sc1, sc2):
                ch = channel_from_mueller(scenario_mueller(sc))
                assert np.max(np.abs(ch.kraus.completeness() - eye2)) <= 1e-9
                assert ch.trace_preserving
        for _ in range(100):
            mag = rng.uniform(1.1e-3, 0.95)
            sc = Scenario(kind="III", delta=rng.uniform(0.0, 0.95),
                          d=tuple(mag * _sphere(rng)), tu=1.0)
            ch = channel_from_mueller(scenario_mueller(sc))
            assert np.max(np.abs(ch.kraus.completeness() - eye2)) > 1e-9
            assert not ch.trace_preserving


def test_criterion_7_tomography_roundtrip():
    rng = np.random.default_rng(1006)
    with criterion("7 noiseless tomography round-trip (50 states)", 60.0):
        from scatterlab.qstate import fidelity

        for _ in range(50):
            rho = random_density_matrix(rng)
            rec = mle_reconstruct(simulate_counts(rho, 1e4))
            assert fidelity(rec.rho, rho) >= 0.9999


def test_criterion_8_monte_carlo_protocol():
    with criterion("8 Monte Carlo error protocol (1000 trials, seeded)", 300.0):
        counts = simulate_counts(singlet(), 1e4, noise="poisson", seed=2024)
        res1 = monte_carlo_errors(counts, trials=1000, seed=77)
        res2 = monte_carlo_errors(counts, trials=1000, seed=77)
        assert res1 == res2  # bit-for-bit reproducible
        for value in (res1.sigma_t, res1.sigma_sl, res1.t_av, res1.sl_av):
            assert math.isfinite(value)
        assert res1.sigma_t > 0
        assert res1.sigma_sl > 0
        clipped = clip_to_physical(
            PlanePoint(s_l=res1.sl_exp, t=res1.t_exp,
                       sigma_sl=res1.sigma_sl, sigma_t=res1.sigma_t)
        )
        assert clipped.t_hi <= mems_tangle_at(clipped.s_l) + 1e-12
        assert clipped.t_lo >= 0.0
        assert 0.0 <= clipped.sl_lo <= clipped.sl_hi <= 1.0
        assert res1.t_exp <= mems_tangle_at(clipped.sl_hi) + 1e-9


def test_criterion_9_mems_boundary():
    with criterion("9 MEMS boundary (101 points + corners)", 1.0):
        for c in np.linspace(0.0, 1.0, 101):
            assert abs(tangle(mems(float(c))) - c * c) <= 1e-9
        pts = curve_points("mems", 101)
        assert abs(pts[0][1] - 8 / 9) <= 1e-9 and abs(pts[0][2]) <= 1e-9
        assert abs(pts[-1][1]) <= 1e-9 and abs(pts[-1][2] - 1.0) <= 1e-9
