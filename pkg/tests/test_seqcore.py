import math
import threading
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recineq.certificate import Verdict
from recineq.seqcore import (
    Seq,
    check_convergence_rate,
    check_divergence_rate,
    constant_divergence_rate,
    exp_upper,
    find_metastable_witness,
    g_affine,
    g_constant,
    g_linear,
    harmonic_divergence_rate,
    monotonize_divergence_rate,
    parse_g,
    partial_sum,
)

harmonic = Seq(lambda i: F(1, i + 1), name="harmonic")


def test_partial_sum_examples():
    assert partial_sum(Seq.constant(1), 0, 4) == 5
    assert partial_sum(harmonic, 1, 2) == F(5, 6)
    assert partial_sum(harmonic, 3, 2) == 0


def test_float_backend_rejects_nonfinite():
    s = Seq(lambda i: math.inf if i == 3 else 1.0, backend="float")
    assert partial_sum(s, 0, 2) == 3.0
    with pytest.raises(FloatingPointError):
        partial_sum(s, 0, 5)


def test_exact_backend_rejects_floats():
    with pytest.raises(TypeError):
        Seq(lambda i: 0.5)(0)


def test_seq_is_deterministic_and_thread_safe():
    calls = []
    s = Seq(lambda i: calls.append(i) or F(i, 7))
    out = []
    ts = [threading.Thread(target=lambda: out.append(s.prefix(500))) for _ in range(8)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert len(set(out)) == 1
    assert out[0] == F(499 * 500, 14)
    assert s(3) is s(3)


@settings(max_examples=60)
@given(
    st.lists(st.fractions(min_value=0, max_value=10, max_denominator=50), min_size=1, max_size=40),
    st.data(),
)
def test_partial_sum_is_additive(vals, data):
    s = Seq.from_values(vals)
    m = data.draw(st.integers(0, len(vals) - 1))
    n = data.draw(st.integers(m, len(vals) - 1))
    k = data.draw(st.integers(m, n))
    assert partial_sum(s, m, n) == partial_sum(s, m, k) + partial_sum(s, k + 1, n)
    assert partial_sum(s, m, n) == sum(vals[m : n + 1])


def test_monotonize_examples():
    r = lambda n, x: max(0, 10 - n) + math.ceil(x)  # noqa: E731
    rt = monotonize_divergence_rate(r)
    assert rt(3, 1) == r(0, 1) == 11
    mono = lambda n, x: n + math.ceil(x)  # noqa: E731
    mt = monotonize_divergence_rate(mono)
    assert all(mt(n, F(x, 3)) == mono(n, F(x, 3)) for n in range(30) for x in range(1, 9))
    const = lambda n, x: 7  # noqa: E731
    assert all(monotonize_divergence_rate(const)(n, 1) == 7 for n in range(10))


@settings(max_examples=50)
@given(st.lists(st.integers(0, 40), min_size=5, max_size=30))
def test_monotonized_rate_is_monotone_and_stays_sound(offsets):
    # alpha == 1, r(n, x) = n + offset(n) + ceil(x) is sound but not monotone
    r = lambda n, x: n + offsets[n % len(offsets)] + math.ceil(x)  # noqa: E731
    rt = monotonize_divergence_rate(r)
    samples = [(n, F(x, 2)) for n in range(len(offsets)) for x in (1, 3, 8)]
    for n, x in samples:
        assert rt(n, x) >= r(n, x)
        if n:
            assert rt(n - 1, x) <= rt(n, x)
    assert check_divergence_rate(Seq.constant(1), rt, samples).passed


def test_exp_upper_is_tight_upper_bound():
    mpmath.mp.prec = 200
    for x in [F(1), F(5, 2), F(7, 8), F(1, 1000), F(40), F(123, 7)]:
        u = exp_upper(x)
        true = mpmath.exp(mpmath.mpf(x.numerator) / x.denominator)
        assert mpmath.mpf(u.numerator) / u.denominator >= true
        assert (mpmath.mpf(u.numerator) / u.denominator - true) / true < mpmath.mpf(2) ** -90


def test_harmonic_divergence_rate_examples():
    r = harmonic_divergence_rate()
    assert r(0, 1) == 3
    assert partial_sum(harmonic, 0, 3) == F(25, 12)
    assert r(0, F(5, 2)) == 13
    assert r(0, F(1, 10**9)) >= 1
    assert r(2, F(1)) <= r(5, F(1))


def test_harmonic_rate_passes_exact_sum_oracle():
    r = harmonic_divergence_rate()
    grid = [(n, F(k, 4)) for n in range(21) for k in range(1, 17)]
    cert = check_divergence_rate(harmonic, r, grid)
    assert cert.verdict is Verdict.CERTIFIED


def test_constant_divergence_rate_examples():
    r1 = constant_divergence_rate(1)
    assert r1(0, 5) == 5
    assert partial_sum(Seq.constant(1), 0, 5) == 6
    assert r1(10, F(1, 2)) == 11
    rq = constant_divergence_rate(F(1, 4))
    assert rq(0, 1) == 4
    assert partial_sum(Seq.constant(F(1, 4)), 0, 4) == F(5, 4)


def test_check_divergence_rate_detects_bounded_series():
    sq = Seq(lambda i: F(1, (i + 1) ** 2))
    cert = check_divergence_rate(sq, constant_divergence_rate(1), [(0, 2)])
    assert cert.verdict is Verdict.FAILED
    v = cert.check("sum-reaches-x").first_violation
    assert v["r"] == 2 and v["sum"] == 1 + F(1, 4) + F(1, 9)


def test_check_divergence_rate_detects_non_monotone():
    r = lambda n, x: 100 - n  # noqa: E731  (sound for alpha == 1 but decreasing)
    cert = check_divergence_rate(Seq.constant(1), r, [(0, 1), (5, 1)])
    assert cert.failed_checks == ["monotone-in-n"]


def test_check_convergence_rate_examples():
    phi = lambda e: math.ceil(1 / e)  # noqa: E731
    assert check_convergence_rate(harmonic, 0, phi, [F(1, 2), F(1, 10)], 100).passed
    assert check_convergence_rate(Seq.constant(0), 0, lambda e: 0, [F(1, 3)], 10).passed
    bad = check_convergence_rate(harmonic, 0, lambda e: 0, [F(1, 2)], 10)
    assert bad.verdict is Verdict.FAILED
    assert bad.check("rate-of-convergence").first_violation["n"] == 0


def test_check_convergence_rate_flags_horizon_separately():
    phi = lambda e: math.ceil(1 / e)  # noqa: E731
    cert = check_convergence_rate(harmonic, 0, phi, [F(1, 2), F(1, 1000)], 100)
    assert cert.verdict is Verdict.INCONCLUSIVE
    assert cert.check("within-horizon").first_violation["phi"] == 1000


def test_find_metastable_witness_examples():
    w = find_metastable_witness(harmonic, 0, F(1, 2), g_linear(0), 10**30, 1000)
    assert w.index == 1
    assert find_metastable_witness(Seq.constant(0), 0, F(1, 9), g_affine(3, 5), 10, 10).index == 0
    alt = Seq(lambda i: 1 - i % 2)
    miss = find_metastable_witness(alt, 0, F(1, 2), g_constant(1), 10**40, 500)
    assert not miss.found and miss.scanned == (0, 500)


@settings(max_examples=80)
@given(
    st.lists(st.fractions(min_value=0, max_value=2, max_denominator=8), min_size=30, max_size=60),
    st.fractions(min_value=F(1, 8), max_value=1, max_denominator=8),
)
def test_witness_with_zero_window_is_first_good_point(vals, eps):
    s = Seq.from_values(vals)
    cap = len(vals) - 1
    expected = next((n for n, v in enumerate(vals) if abs(v) <= eps), None)
    assert find_metastable_witness(s, 0, eps, g_constant(0), 10**9, cap).index == expected


@settings(max_examples=80)
@given(
    st.lists(st.integers(0, 3), min_size=20, max_size=50),
    st.integers(0, 4),
    st.integers(0, 2),
)
def test_witness_matches_linear_scan(vals, a, b):
    g = g_affine(a % 2, b)
    s = Seq.from_values(vals)
    cap = len(vals) - 1
    expected = None
    for n in range(cap + 1):
        if n + g(n) <= cap and all(vals[k] <= 1 for k in range(n, n + g(n) + 1)):
            expected = n
            break
    assert find_metastable_witness(s, 0, 1, g, 10**9, cap).index == expected


def test_parse_g_family():
    assert parse_g("const:3")(100) == 3
    assert parse_g("linear:2")(5) == 7
    assert parse_g("affine:3,1")(4) == 13
    for bad in ["const", "lin:2", "affine:1", "const:-1", "const:x", "linear:1,2"]:
        with pytest.raises(ValueError):
            parse_g(bad)


def test_checkers_are_pure():
    r = harmonic_divergence_rate()
    grid = [(n, F(1, 2)) for n in range(5)]
    a = check_divergence_rate(harmonic, r, grid).to_dict()
    b = check_divergence_rate(harmonic, r, grid).to_dict()
    assert a == b
