import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from polarcss import css_ldpc, gf2
from polarcss.css_ldpc import Outcome, Side
from polarcss.gf2 import BitMatrix

STEANE = css_ldpc.steane_code()


def unit(n, *idx):
    e = np.zeros(n, dtype=np.uint8)
    e[list(idx)] = 1
    return e


def test_steane_structure():
    assert gf2.mat_mul(STEANE.Hx, STEANE.Hz.T).is_zero()
    assert STEANE.k_logical == 1
    assert STEANE.n_in == 7


def test_css_rejects_non_orthogonal():
    with pytest.raises(ValueError):
        css_ldpc.CssCode(BitMatrix.from_rows(["10"]), BitMatrix.from_rows(["10"]))


def test_bicycle_small_example():
    C = css_ldpc.circulant([1, 1, 0, 0])
    H0 = np.concatenate([C, C.T], axis=1)
    assert not ((H0.astype(int) @ H0.T.astype(int)) % 2).any()
    code = css_ldpc.bicycle_construct(4, 2, 4, seed=0)
    assert code.Hx.rows == 4 and code.n_in == 8


@pytest.mark.parametrize("seed", range(100))
def test_bicycle_orthogonal_for_many_seeds(seed):
    code = css_ldpc.bicycle_construct(16, 4, 12, seed)
    assert gf2.mat_mul(code.Hx, code.Hz.T).is_zero()
    assert code.k_logical >= 0


def test_bicycle_parameter_checks():
    for args in [(8, 3, 8, 0), (8, 10, 8, 0), (8, 4, 9, 0), (0, 2, 0, 0)]:
        with pytest.raises(ValueError):
            css_ldpc.bicycle_construct(*args)


def test_deleted_rows_evenly_spaced():
    assert css_ldpc.deleted_rows(12, 8) == [0, 3, 6, 9]
    assert css_ldpc.deleted_rows(5, 5) == []
    for L in range(1, 30):
        for r in range(L + 1):
            d = css_ldpc.deleted_rows(L, r)
            assert len(d) == L - r == len(set(d))
            assert all(0 <= i < L for i in d)


def test_bicycle_is_reproducible():
    a = css_ldpc.bicycle_construct(20, 6, 15, seed=7)
    b = css_ldpc.bicycle_construct(20, 6, 15, seed=7)
    assert a.Hx == b.Hx


def test_syndrome_examples():
    assert not css_ldpc.syndrome(STEANE.Hz, np.zeros(7, np.uint8)).any()
    assert css_ldpc.syndrome(STEANE.Hz, unit(7, 2)).tolist() == [1, 1, 0]
    s = css_ldpc.syndrome(STEANE.Hz, unit(7, 1) ^ unit(7, 4))
    assert s.tolist() == (css_ldpc.syndrome(STEANE.Hz, unit(7, 1)) ^ css_ldpc.syndrome(STEANE.Hz, unit(7, 4))).tolist()
    with pytest.raises(ValueError):
        css_ldpc.syndrome(STEANE.Hz, [1, 0])


def test_decode_erasure_examples():
    assert not css_ldpc.decode_erasure(STEANE.Hz, [0, 0, 0], []).x.any()
    e = unit(7, 3)
    sol = css_ldpc.decode_erasure(STEANE.Hz, css_ldpc.syndrome(STEANE.Hz, e), [3])
    assert sol.x.tolist() == e.tolist()
    with pytest.raises(css_ldpc.DetectedFailure):
        css_ldpc.decode_erasure(STEANE.Hz, [1, 0, 0], [3])


def test_decode_erasure_full_support_logical_detected():
    outcomes = set()
    for v in range(128):
        e = np.array([(v >> i) & 1 for i in range(7)], dtype=np.uint8)
        est = css_ldpc.decode_erasure(STEANE.Hz, css_ldpc.syndrome(STEANE.Hz, e), range(7)).x
        out = css_ldpc.logical_failure(STEANE, e, est, Side.X)
        assert out in (Outcome.SUCCESS, Outcome.LOGICAL)
        outcomes.add(out)
    # with everything erased half of the errors differ from the estimate by a logical
    assert outcomes == {Outcome.SUCCESS, Outcome.LOGICAL}


@pytest.mark.parametrize("side", [Side.X, Side.Z])
def test_steane_erasures_up_to_two_exhaustive(side):
    H = STEANE.detecting(side)
    for size in (0, 1, 2):
        for E in itertools.combinations(range(7), size):
            for bits in itertools.product((0, 1), repeat=size):
                e = np.zeros(7, dtype=np.uint8)
                e[list(E)] = bits
                est = css_ldpc.decode_erasure(H, css_ldpc.syndrome(H, e), E).x
                assert css_ldpc.logical_failure(STEANE, e, est, side) is Outcome.SUCCESS


def test_steane_single_paulis_min_weight():
    for q in range(7):
        for pauli in "XYZ":
            ex = unit(7, q) if pauli in "XY" else np.zeros(7, np.uint8)
            ez = unit(7, q) if pauli in "ZY" else np.zeros(7, np.uint8)
            for side, e in ((Side.X, ex), (Side.Z, ez)):
                H = STEANE.detecting(side)
                est = css_ldpc.decode_min_weight(H, css_ldpc.syndrome(H, e))
                assert css_ldpc.logical_failure(STEANE, e, est, side) is Outcome.SUCCESS


def test_logical_failure_examples():
    e = unit(7, 0, 5)
    assert css_ldpc.logical_failure(STEANE, e, e, Side.X) is Outcome.SUCCESS
    assert css_ldpc.logical_failure(STEANE, STEANE.Hx.dense[0], np.zeros(7), Side.X) is Outcome.SUCCESS
    assert css_ldpc.logical_failure(STEANE, np.ones(7), np.zeros(7), Side.X) is Outcome.LOGICAL
    assert css_ldpc.logical_failure(STEANE, unit(7, 0), np.zeros(7), "Z") is Outcome.DETECTED


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 127), st.integers(0, 127), st.integers(0, 2), st.sampled_from([Side.X, Side.Z]))
def test_logical_failure_invariant_under_stabilizer_shift(a, b, row, side):
    e_true = np.array([(a >> i) & 1 for i in range(7)], dtype=np.uint8)
    e_hat = np.array([(b >> i) & 1 for i in range(7)], dtype=np.uint8)
    S = STEANE.stabilizers(side)
    shifted = e_true ^ S.dense[row]
    assert css_ldpc.logical_failure(STEANE, e_true, e_hat, side) is css_ldpc.logical_failure(STEANE, shifted, e_hat, side)


def test_bp_trivial():
    est, conv, it = css_ldpc.decode_bp(STEANE.Hz, [0, 0, 0], np.full(7, 10.0))
    assert not est.any() and conv and it == 1


def test_bp_single_errors_on_steane():
    llr = np.full(7, np.log(0.95 / 0.05))
    for q in range(7):
        e = unit(7, q)
        s = css_ldpc.syndrome(STEANE.Hz, e)
        est, conv, it = css_ldpc.decode_bp(STEANE.Hz, s, llr)
        ref = oracles.bp_reference(STEANE.Hz.dense, s, llr, 50)
        assert (est.tolist(), conv, it) == (ref[0].tolist(), ref[1], ref[2])
        assert conv
        if q < 6:
            assert est.tolist() == css_ldpc.decode_min_weight(STEANE.Hz, s).tolist()
    # the weight-3 column trips every check; the first flooding pass flips
    # its three neighbours too and the syndrome is already matched
    est, _, it = css_ldpc.decode_bp(STEANE.Hz, [1, 1, 1], llr)
    assert it == 1 and est.tolist() == [0, 0, 1, 0, 1, 1, 1]
    assert css_ldpc.logical_failure(STEANE, unit(7, 6), est, Side.X) is Outcome.LOGICAL


def test_bp_matches_reference_on_bicycle():
    code = css_ldpc.bicycle_construct(10, 4, 8, seed=2)
    rng = np.random.default_rng(12)
    prior = np.log(0.93 / 0.07) + rng.normal(0, 0.3, 20)
    for _ in range(15):
        e = (rng.random(20) < 0.07).astype(np.uint8)
        s = css_ldpc.syndrome(code.Hz, e)
        est, conv, it = css_ldpc.decode_bp(code.Hz, s, prior, max_iters=8)
        ref = oracles.bp_reference(code.Hz.dense, s, prior, 8)
        assert est.tolist() == ref[0].tolist() and conv == ref[1] and it == ref[2]


def test_bp_uninformative_priors_may_not_converge():
    code = css_ldpc.bicycle_construct(12, 4, 8, seed=0)
    s = css_ldpc.syndrome(code.Hz, unit(24, 1, 5, 9))
    _, conv, it = css_ldpc.decode_bp(code.Hz, s, np.zeros(24), max_iters=5)
    assert it <= 5
    assert isinstance(conv, bool)


def test_bp_converged_means_syndrome_matches():
    code = css_ldpc.bicycle_construct(32, 6, 24, seed=3)
    H = code.Hz
    rng = np.random.default_rng(2)
    e = (rng.random((400, 64)) < 0.04).astype(np.uint8)
    s = css_ldpc.syndrome_batch(H, e)
    est, conv, iters, ops = css_ldpc.decode_bp_batch(H, s, np.full(64, np.log(0.96 / 0.04)))
    assert conv.mean() > 0.5
    assert np.array_equal(css_ldpc.syndrome_batch(H, est[conv]), s[conv])
    edges = int(H.dense.sum())
    assert np.array_equal(ops, 2 * edges * iters)


def test_bp_batch_matches_single():
    code = css_ldpc.bicycle_construct(16, 4, 12, seed=1)
    rng = np.random.default_rng(8)
    e = (rng.random((30, 32)) < 0.05).astype(np.uint8)
    s = css_ldpc.syndrome_batch(code.Hz, e)
    prior = np.full(32, np.log(0.95 / 0.05))
    est, conv, iters, _ = css_ldpc.decode_bp_batch(code.Hz, s, prior)
    for b in range(30):
        e1, c1, i1 = css_ldpc.decode_bp(code.Hz, s[b], prior)
        assert np.array_equal(e1, est[b]) and c1 == conv[b] and i1 == iters[b]


def test_pipeline_view():
    pipe = css_ldpc.pipeline_view(STEANE, Side.X)
    assert pipe.k_in == 4 and pipe.H is STEANE.Hz
    assert gf2.mat_mul(pipe.H, pipe.G_sys.T).is_zero()
    assert np.array_equal(pipe.G_sys.dense[:, pipe.info_positions], np.eye(4, dtype=np.uint8))
    full = css_ldpc.CssCode(BitMatrix.identity(3), BitMatrix.zeros(0, 3))
    p0 = css_ldpc.pipeline_view(full, Side.Z)
    assert p0.k_in == 0 and p0.G_sys.rows == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 20), st.integers(0, 1000))
def test_pipeline_systematic_on_bicycle(L, seed):
    code = css_ldpc.bicycle_construct(L, 2, L // 2 + 1, seed)
    pipe = css_ldpc.pipeline_view(code, Side.Z)
    assert pipe.k_in == pipe.n_in - gf2.rank(pipe.H)
    data = np.random.default_rng(seed).integers(0, 2, (5, pipe.k_in))
    cw = pipe.encode_batch(data)
    assert not css_ldpc.syndrome_batch(pipe.H, cw).any()
    assert np.array_equal(cw[:, pipe.info_positions], data)


def test_identity_code():
    code = css_ldpc.identity_code(3)
    assert code.k_logical == 3
    assert css_ldpc.pipeline_view(code, Side.X).k_in == 3
