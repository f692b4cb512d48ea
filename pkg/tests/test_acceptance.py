"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
printed even without ``-s``.  Operating points are fixed in advance and every
Monte Carlo run uses its own seed.
"""

import itertools
import math
import time
from dataclasses import replace

import numpy as np
import pytest

import oracles
from polarcss import channels, css_ldpc, gf2, polar, sim
from polarcss.css_ldpc import Outcome, Side
from polarcss.sim import InnerSpec, SimConfig

# inner code used by every concatenated operating point: n_in = 24, k_in = 16
INNER = InnerSpec(half_len=12, row_weight=4, rows_kept=8, code_seed=0)


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}")
        assert ok, detail

    return emit


def test_criterion_01_bec_polarization_exact(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for m in (1, 2, 3, 4):
        for eps in (0.25, 0.5, 0.75):
            ref = oracles.sc_erasure_probabilities(2**m, eps)
            worst = max(worst, float(np.abs(polar.bhattacharyya_bec(m, eps) - ref).max()))
    dt = time.perf_counter() - t0
    verdict(1, "BEC polarization vs exhaustive SC oracle", worst <= 1e-12 and dt < 10, f"max |diff| = {worst:.2e}, {dt:.2f} s")


def test_criterion_02_mean_conservation(verdict):
    worst = 0.0
    for m in range(0, 21):
        for eps in (0.1, 0.3, 0.5, 0.7, 0.9):
            worst = max(worst, abs(float(polar.bhattacharyya_bec(m, eps).mean()) - eps))
    z = polar.bhattacharyya_bec(20, 0.5)
    good = float((z < 0.01).mean())
    ok = worst <= 1e-12 and abs(good - 0.45) <= 0.05
    verdict(2, "mean conservation and good-channel fraction", ok, f"max |mean - eps| = {worst:.2e}; fraction Z<0.01 at 2^20 = {good:.5f}")


def test_criterion_03_sc_union_bound(verdict):
    t0 = time.perf_counter()
    ch = channels.quantum_erasure(0.3)
    cfg = SimConfig(scheme="polar-only", channel=ch, trials=100_000, seed=3003, polar_n=64, polar_k=16, design_eps=0.3)
    res = sim.run(cfg)
    bler = float(1.0 - res.outcomes.side_x_ok.mean())
    bound = polar.construct(64, 16, 0.3).union_bound()
    p = min(bound, 1.0)
    sigma = math.sqrt(p * (1 - p) / cfg.trials)
    dt = time.perf_counter() - t0
    ok = bler <= bound + 3 * sigma and dt < 30
    verdict(3, "SC block error under the union bound", ok, f"BLER {bler:.5f} vs sum Z {bound:.5f} + 3 sigma {3 * sigma:.5f}, {dt:.1f} s")


def test_criterion_04_steane_exhaustive(verdict):
    t0 = time.perf_counter()
    code = css_ldpc.steane_code()
    bad = []
    for q, pauli in itertools.product(range(7), "XYZ"):
        e = {Side.X: np.zeros(7, np.uint8), Side.Z: np.zeros(7, np.uint8)}
        if pauli in "XY":
            e[Side.X][q] = 1
        if pauli in "ZY":
            e[Side.Z][q] = 1
        for side in Side:
            H = code.detecting(side)
            est = css_ldpc.decode_min_weight(H, css_ldpc.syndrome(H, e[side]))
            if css_ldpc.logical_failure(code, e[side], est, side) is not Outcome.SUCCESS:
                bad.append(f"{pauli}{q}/{side.value}")
    erasures = 0
    for side in Side:
        H = code.detecting(side)
        for size in (0, 1, 2):
            for E in itertools.combinations(range(7), size):
                for bits in itertools.product((0, 1), repeat=size):
                    e = np.zeros(7, np.uint8)
                    e[list(E)] = bits
                    est = css_ldpc.decode_erasure(H, css_ldpc.syndrome(H, e), E).x
                    erasures += 1
                    if css_ldpc.logical_failure(code, e, est, side) is not Outcome.SUCCESS:
                        bad.append(f"erasure {E}={bits}/{side.value}")
    dt = time.perf_counter() - t0
    verdict(4, "Steane single Paulis and erasures |E| <= 2", not bad and dt < 5, f"21 Paulis x 2 pipelines, {erasures} erasure cases, failures {bad[:3]}, {dt:.2f} s")


def test_criterion_05_css_orthogonality(verdict):
    failures = []
    for seed in range(100):
        code = css_ldpc.bicycle_construct(256, 8, 230, seed=seed)
        if not gf2.mat_mul(code.Hx, code.Hz.T).is_zero() or code.k_logical < 0:
            failures.append(seed)
    verdict(5, "100 seeded bicycle codes satisfy Hx Hz^T = 0", not failures, f"failing seeds {failures}")


@pytest.mark.parametrize("ch", [channels.quantum_erasure(0.35), channels.depolarizing(0.15)], ids=str)
def test_criterion_06_identity_inner_degeneration(verdict, ch):
    base = dict(channel=ch, trials=10_000, seed=6006, inner=InnerSpec.parse("identity:1"), blocks=64, outer_k_fraction=0.3)
    c = sim.run(SimConfig(scheme="concat", **base))
    p = sim.run(SimConfig(scheme="polar-only", **base))
    a, b = c.outcomes, p.outcomes
    fields = ("side_x_ok", "side_z_ok", "info_bit_errors_x", "info_bit_errors_z", "inner_converged_fraction", "inner_iterations", "op_count")
    diff = [f for f in fields if not np.array_equal(getattr(a, f), getattr(b, f))]
    verdict(6, f"identity inner equals polar-only trial for trial ({ch})", not diff, f"10^4 trials, {c.block_errors} block errors each, differing fields {diff}")


def test_criterion_07_ber_ordering(verdict):
    t0 = time.perf_counter()
    # outer 64 = 4 blocks x 16, k = 24 per side, physical 96, rate 0.25
    base = SimConfig(scheme="concat", channel=channels.quantum_erasure(0.4), trials=10_000, seed=7007, inner=INNER, blocks=4, outer_k_fraction=0.375)
    grid = [0.40, 0.35, 0.30, 0.25]
    curves = {c.scheme: c for c in sim.sweep(base, grid, ["concat", "polar-only"])}
    cc, pc = curves["concat"], curves["polar-only"]
    assert cc.points[0].result.rate_classical == pc.points[0].result.rate_classical == 0.25
    assert cc.points[0].result.n_physical == pc.points[0].result.n_physical == 96
    leq, separated, parts = 0, 0, []
    for a, b in zip(cc.points, pc.points):
        lo_c, hi_c = sim.ber_interval(a.result)
        lo_p, hi_p = sim.ber_interval(b.result)
        leq += a.result.ber <= b.result.ber
        separated += hi_c < lo_p
        parts.append(f"eps {a.param}: {a.result.ber:.2e} [{lo_c:.1e},{hi_c:.1e}] vs {b.result.ber:.2e} [{lo_p:.1e},{hi_p:.1e}]")
    dt = time.perf_counter() - t0
    ok = leq == 4 and separated >= 2 and dt < 600
    verdict(7, "concat BER <= polar-only BER at matched rate and length", ok, f"{leq}/4 ordered, {separated}/4 separated, {dt:.0f} s; " + "; ".join(parts))


def test_criterion_08_error_floor(verdict):
    grid = [0.42, 0.39, 0.36, 0.33, 0.30, 0.27, 0.24, 0.21]
    base = SimConfig(scheme="ldpc-only", channel=channels.quantum_erasure(0.42), trials=100_000, seed=8008, inner=INNER, blocks=2, outer_k_fraction=0.5)
    ldpc = sim.error_floor_metric(sim.sweep(base, grid)[0])
    cat = sim.error_floor_metric(sim.sweep(replace(base, scheme="concat"), grid)[0])
    # without an observable ldpc-only floor the check reduces to the
    # concatenated curve not flattening, with the ldpc-only slopes reported
    mode = "full" if ldpc.floor_detected else "downgraded, no ldpc-only floor at desk scale"
    ok = not cat.floor_detected
    verdict(8, f"error-floor elimination, {mode}", ok, f"ldpc-only {ldpc.summary()} || concat {cat.summary()}")


def test_criterion_09_complexity(verdict):
    t0 = time.perf_counter()
    ns = [2**8, 2**10, 2**12, 2**14]
    ch = channels.quantum_erasure(0.3)
    p = sim.complexity_probe(sim.polar_family(0.25, 0.3), ns, ch, seed=9009)
    c = sim.complexity_probe(sim.concat_family(INNER.build(), 0.5, 0.3), ns, ch, seed=9009)
    dt = time.perf_counter() - t0
    ok = p.exponent <= 1.25 and c.exponent <= 1.45 and dt < 300
    verdict(9, "decoder operation count near linear", ok, f"polar-only {p.exponent:.4f} (<= 1.25), concat {c.exponent:.4f} (<= 1.45), {dt:.0f} s")


def _growth_interval(short, long):
    lo1, hi1 = short.wilson_lo, short.wilson_hi
    lo2, hi2 = long.wilson_lo, long.wilson_hi
    g = math.log2(short.bler / long.bler) if long.bler > 0 and short.bler > 0 else math.nan
    g_lo = math.log2(lo1 / hi2) if lo1 > 0 else -math.inf
    g_hi = math.log2(hi1 / lo2) if lo2 > 0 else math.inf
    return g, g_lo, g_hi


def test_criterion_10_error_growth(verdict):
    eps = 0.40
    ch = channels.quantum_erasure(eps)
    res = {}
    for scheme in ("concat", "polar-only"):
        for blocks in (1, 4):  # physical length 24 -> 96, rate 0.25
            cfg = SimConfig(scheme=scheme, channel=ch, trials=20_000, seed=10010 + blocks, inner=INNER, blocks=blocks, outer_k_fraction=0.375)
            res[scheme, blocks] = sim.run(cfg)
    in_range = all(1e-4 <= r.bler <= 1e-1 for r in res.values())
    gc = _growth_interval(res["concat", 1], res["concat", 4])
    gp = _growth_interval(res["polar-only", 1], res["polar-only", 4])
    ok = in_range and gc[1] > gp[2]
    detail = (
        f"eps {eps}, n 24 -> 96; concat BLER {res['concat', 1].bler:.2e} -> {res['concat', 4].bler:.2e}, growth {gc[0]:.2f} [{gc[1]:.2f}, {gc[2]:.2f}]; "
        f"polar-only BLER {res['polar-only', 1].bler:.2e} -> {res['polar-only', 4].bler:.2e}, growth {gp[0]:.2f} [{gp[1]:.2f}, {gp[2]:.2f}]"
    )
    verdict(10, "concat log2(1/BLER) grows faster than polar-only", ok, detail)
