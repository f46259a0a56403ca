"""Exit criteria, each at its stated tolerance; see the summary section of the run."""

import math
import random
import time
from fractions import Fraction as F

import numpy as np
import pytest

from recineq.certificate import Verdict
from recineq.cli import main
from recineq.cli.scenarios import SCENARIOS
from recineq.descent import (
    CONDITION_NAMES,
    PowerLaw,
    accretive_rate,
    accretive_star_instance,
    certify_gradient_meta,
    check_tail_small,
    gradient_meta_bound,
    l1_box_setup,
    quadratic_setup,
    run_accretive_implicit,
    run_km,
    sabotage,
    sine_star_instance,
    wc_rate_sine,
)
from recineq.pathology import (
    HaltingTable,
    block_mu,
    block_padding,
    case2_counterexample,
    check_block_invariants,
    check_block_mu,
    decode,
    nu_zero,
    run_machine,
    specker,
    specker_rows,
    summability_bound,
)
from recineq.ratecalc import (
    StarInstance,
    case1_beta_meta,
    case1_window_certify,
    case2_rate,
    case2b_rate,
    check_modulus,
    find_case1_window,
    series_meta,
    series_meta_rate,
    star_check,
)
from recineq.seqcore import (
    FLOAT,
    Seq,
    check_convergence_rate,
    constant_divergence_rate,
    find_metastable_witness,
    g_affine,
    g_constant,
    g_linear,
    harmonic_divergence_rate,
    parse_g,
)


def acceptance(criterion, title):
    return pytest.mark.acceptance(criterion=criterion, title=title)


# ---------------------------------------------------------------------------


@acceptance(1, "sine rate: bound 256000 exact, zero violations on [256000, 266000], < 1 s")
def test_criterion_01_sine_rate():
    start = time.perf_counter()
    bound = wc_rate_sine(F(1, 10))
    traj = run_km(math.sin, Seq.constant(1.0, FLOAT), 1.0, 266000)
    cert = check_tail_small(traj, bound, 10000, 0.1, 0.0)
    elapsed = time.perf_counter() - start
    assert bound == 256000
    assert cert.passed, cert
    # independent recount on the stored iterates
    assert sum(abs(traj.x(n)) > 0.1 for n in range(bound, bound + 10001)) == 0
    assert elapsed < 1.0, elapsed


# ---------------------------------------------------------------------------


@acceptance(2, "projected subgradient metastability on l1-box-5, < 10 s")
def test_criterion_02_subgradient_meta():
    start = time.perf_counter()
    setup = l1_box_setup(0)
    assert (setup.consts.e, setup.consts.theta) == (F(49, 2), 4)
    r = harmonic_divergence_rate()
    for eps in (1, 2):
        for g in (g_constant(0), g_linear(0)):
            bound = gradient_meta_bound(F(49, 2), 4, r, eps, g)
            assert isinstance(bound, int)
            cert = certify_gradient_meta(setup, r, eps, g, 10**5)
            assert cert.verdict is Verdict.CERTIFIED, cert.failed_checks
            assert cert.bound == bound
            assert cert.witness is not None and cert.witness <= bound
            # independent scan of the window
            n = cert.witness
            assert all(setup.traj.f(k) <= eps for k in range(n, n + g(n) + 1))
    assert gradient_meta_bound(F(49, 2), 4, r, 1, g_linear(0)) > 10**20
    assert time.perf_counter() - start < 10.0


# ---------------------------------------------------------------------------

G_FAMILY = ["const:0", "const:1", "const:5", "linear:0", "linear:3", "affine:2,0", "affine:3,2"]


@acceptance(3, "series metastability rate vs brute force, 1000 instances")
def test_criterion_03_series_oracle():
    rng = random.Random(20231)
    failures = 0
    for _ in range(1000):
        den = rng.choice([1, 2, 3, 4, 7, 10])
        vals = [F(rng.randint(0, 9), den) if rng.random() < 0.8 else F(0) for _ in range(rng.randint(1, 40))]
        b = sum(vals) + F(rng.randint(0, 2), 3)
        if b == 0:
            b = F(1, 5)
        eps = F(rng.randint(1, 12), rng.choice([2, 4, 8]))
        g = parse_g(rng.choice(G_FAMILY))
        bound = series_meta_rate(b, eps, g)
        # the series is zero after the data, so every n >= len(vals) works
        ok = next(
            (n for n in range(len(vals) + 1) if sum(vals[n : n + g(n) + 1], F(0)) <= eps),
            None,
        )
        if ok is None or ok > bound:
            failures += 1
    assert failures == 0


# ---------------------------------------------------------------------------


def _regular_case1_instance(rng):
    """``beta`` with bounded drops and finite support, so ``sum alpha beta`` is known exactly."""
    a_min = F(1, rng.choice([2, 4]))
    pattern = [a_min * rng.randint(1, 3) for _ in range(rng.randint(1, 5))]
    theta = F(rng.randint(1, 4), rng.choice([1, 2]))
    alpha_v = [pattern[k % len(pattern)] for k in range(4000)]
    beta_v = [F(rng.randint(0, 12), 4)]
    for k in range(rng.randint(5, 150)):
        if rng.random() < 0.3:
            beta_v.append(beta_v[-1] + F(rng.randint(0, 8), 4))  # rises are unconstrained
        else:
            beta_v.append(max(F(0), beta_v[-1] - theta * alpha_v[k] * F(rng.randint(0, 4), 4)))
    while beta_v[-1] > 0:  # descend to zero at the maximal slope
        k = len(beta_v) - 1
        beta_v.append(max(F(0), beta_v[-1] - theta * alpha_v[k]))
    support = len(beta_v)
    beta_v += [F(0)] * (len(alpha_v) - support)
    alpha = Seq.from_values(alpha_v, name="alpha")
    beta = Seq.from_values(beta_v, name="beta")
    b = sum((alpha_v[i] * beta_v[i] for i in range(support)), F(0))
    return alpha, beta, theta, constant_divergence_rate(a_min), b, support


@acceptance(4, "Case I window theorem: 200 regular instances certify, 200 sabotaged are premise-failed")
def test_criterion_04_case1_window():
    rng = random.Random(4444)
    alarms = 0
    for _ in range(200):
        alpha, beta, theta, r, b, support = _regular_case1_instance(rng)
        for k in range(support - 1):
            assert beta(k) - beta(k + 1) <= theta * alpha(k)
        eps = F(rng.randint(1, 8), 8)
        g = rng.choice([g_constant(0), g_constant(4), g_linear(1), g_affine(2, 1)])
        cert = find_case1_window(alpha, beta, r, theta, eps, g, 2048)
        assert cert is not None and cert.verdict is Verdict.CERTIFIED
        N = cert.witness
        assert all(beta(n) <= eps for n in range(N, N + g(N) + 1))
        # every start position: premises holding must imply the conclusion
        for start in range(0, min(support + 3, 300), 3):
            c = case1_window_certify(alpha, beta, r, theta, start, start, eps, g)
            alarms += c.verdict is Verdict.SOUNDNESS_ALARM
            if c.verdict is Verdict.CERTIFIED:
                assert all(beta(n) <= eps for n in range(start, start + g(start) + 1))
        # the metastability rate itself, with the exact series bound b
        if b > 0:
            Phi = case1_beta_meta(series_meta(b), r, theta, eps, g)
            w = find_metastable_witness(beta, 0, eps, g, Phi, 4000 - 1)
            assert w.found and w.index <= Phi
    assert alarms == 0

    false_certs = 0
    for i in range(200):
        a = F(1, rng.choice([2, 4]))
        theta = F(rng.randint(1, 4))
        eps = F(rng.randint(1, 8), 8)
        N = rng.randint(0, 40)
        if i % 2 == 0:
            # a spike that drops faster than the regularity premise allows
            top = max(2 * eps, theta * a + eps)
            beta = Seq(lambda n, N=N, top=top: top if n == N else F(0))
        else:
            # a regular bump above eps: the tail-sum premise must fail instead
            top, th = 2 * eps, theta
            beta = Seq(lambda n, N=N, top=top, th=th, a=a: max(F(0), top - th * a * (n - N)) if n >= N else F(0))
        alpha = Seq.constant(a)
        cert = case1_window_certify(alpha, beta, constant_divergence_rate(a), theta, N, N, eps, g_constant(rng.randint(0, 3)))
        assert cert.verdict is Verdict.PREMISE_FAILED, cert.failed_checks
        false_certs += cert.verdict is Verdict.CERTIFIED
    assert false_certs == 0


# ---------------------------------------------------------------------------


def _block_instance(rng, horizon):
    kind = rng.choice(["constant", "periodic", "harmonic"])
    den = rng.choice([1, 2, 3, 5, 8])
    s_vals = [F(rng.randint(0, 12), den) for _ in range(horizon + 2)]
    s = Seq(lambda n: s_vals[n] if n < len(s_vals) else F(0), name="s")
    if kind == "constant":
        a = F(1, rng.choice([1, 2, 4, 8]))
        alpha = Seq.constant(a)
        abar = a
    elif kind == "periodic":
        q = rng.choice([4, 6, 10])
        alpha = Seq(lambda n: F(1 + (5 * n) % 4, q), name="alpha")
        abar = F(4, q)
    else:
        c0 = F(rng.randint(1, 4), 2)
        alpha = Seq(lambda n: c0 / (n % 50 + 1), name="alpha")
        abar = c0
    theta = F(rng.randint(1, 8), rng.choice([1, 2, 3]))
    return s, alpha, theta, max(s_vals), abar


@acceptance(5, "block construction: 100 instances, horizon 10^4, bit-exact")
def test_criterion_05_block():
    rng = random.Random(5555)
    H = 10**4
    for _ in range(100):
        s, alpha, theta, c, abar = _block_instance(rng, H)
        bc = block_padding(s, alpha, theta, H)
        inv = check_block_invariants(bc, H)
        assert inv.verdict is Verdict.CERTIFIED, inv.failed_checks
        B = bc.blocks_covering(H)
        assert all(bc.l(n + 1) > bc.l(n) >= n for n in range(B))
        assert all(bc.beta_at(bc.l(n)) == bc.s(n) for n in range(B))
        lhs, rhs = summability_bound(bc, H, c, abar)
        assert lhs <= rhs
        mu = block_mu(bc, lhs, nu_zero(), H)
        assert check_block_mu(bc, mu, H).passed


# ---------------------------------------------------------------------------


@acceptance(6, "Specker structure for n <= 2000 under encoding v1")
def test_criterion_06_specker():
    upto = 2000
    a = Seq(lambda n: F(1, (n + 1) ** 2))
    rows = specker_rows(a, upto, HaltingTable())
    values = {a(m): m for m in range(upto + 1)}
    for row in rows:
        assert row.value == 0 or (row.value in values and values[row.value] <= row.n)
        if row.value != 0:
            m = values[row.value]
            assert m == row.witness
            assert run_machine(decode(m), m, row.n).step == row.n
            assert all(run_machine(decode(k), k, row.n).step != row.n for k in range(m))
    # zero rows: no machine halts at exactly that step (fresh simulations)
    halting_at = {}
    for m in range(upto + 1):
        step = run_machine(decode(m), m, upto).step
        if step is not None and m <= step:
            halting_at.setdefault(step, m)
    assert [r.n for r in rows if r.value != 0] == sorted(halting_at)
    # budget extension
    assert specker_rows(a, 2 * upto, HaltingTable())[: upto + 1] == rows
    for n in list(range(0, 60)) + [804, 805, 812, 813, 1999, 2000]:
        assert specker(a, n, budget=n, table=HaltingTable()) == specker(a, n, budget=5 * n + 3, table=HaltingTable())


# ---------------------------------------------------------------------------


@acceptance(7, "Case II counterexamples on horizon 2000")
def test_criterion_07_counterexamples():
    H = 2000
    a_sq = Seq(lambda n: F(1, (n + 1) ** 2))
    inst_a = case2_counterexample("a", a_sq, H)
    assert star_check(inst_a, H).verdict is Verdict.CERTIFIED
    grid = [F(1), F(1, 2), F(1, 10), F(1, 100), F(1, 1000), F(1, 10**6)]
    assert check_modulus(inst_a, lambda e: e, grid, H).verdict is Verdict.CERTIFIED

    inst_b = case2_counterexample("b", Seq(lambda n: F(1, n + 1)), H)
    assert star_check(inst_b, H).verdict is Verdict.CERTIFIED
    ratio = Seq(lambda n: inst_b.gamma(n) / inst_b.alpha(n))
    cert = check_convergence_rate(ratio, 0, lambda e: math.ceil(2 / e), [F(1), F(1, 2), F(1, 10), F(1, 100), F(1, 999)], H)
    assert cert.verdict is Verdict.CERTIFIED


# ---------------------------------------------------------------------------

GRID = [F(1, 2), F(1, 4), F(1, 8), F(1, 16)]


def _window_ok(mu, start, tol, eps):
    return all(mu(n) <= eps + tol for n in range(start, start + 1001))


@acceptance(8, "Case II rates end-to-end on four instances, 4-point grids")
def test_criterion_08_case2_end_to_end():
    zero_rate = lambda e: 0  # noqa: E731

    # sine: alpha = 1, gamma = 0, omega(t) = t^3/16, c = alpha_bar = 1
    traj = run_km(math.sin, Seq.constant(1.0, FLOAT), 1.0, 0)
    sine = sine_star_instance(traj)
    for eps in [F(1), F(1, 2), F(1, 4), F(1, 5)]:
        Phi = case2_rate(constant_divergence_rate(1), zero_rate, lambda t: t**3 / 16, 1, 1, eps)
        assert _window_ok(sine.mu, Phi, 1e-9, float(eps))
    assert star_check(sine, 33001, 1e-12).passed

    # accretive scalar demo: modulus for mu_{n+1}, omega(eps) = eps^2/2
    sq = PowerLaw(1, 2)
    acc = run_accretive_implicit(sq, Seq.constant(1.0, FLOAT), 1.0, 0)
    inst = accretive_star_instance(acc, sq)
    for eps in GRID:
        Phi = accretive_rate(sq, 1, 1, 1, eps)
        assert Phi == case2b_rate(constant_divergence_rate(1), zero_rate, lambda e: e * e / 2, 1, eps)
        assert _window_ok(inst.mu, Phi, 1e-9, float(eps))
    assert star_check(inst, 1300, 1e-9).passed

    # exact: mu_{n+1} = mu_n / 2 + 1/(n+2)^2, alpha = 1/2, beta = mu, omega = id
    def mu_fn(n, cache={0: F(1)}):
        k = max(cache)
        while k < n:
            cache[k + 1] = cache[k] / 2 + F(1, (k + 2) ** 2)
            k += 1
        return cache[n]

    half = Seq.constant(F(1, 2))
    mu = Seq(mu_fn, name="mu")
    gamma = Seq(lambda n: F(1, (n + 2) ** 2))
    exact = StarInstance(mu, half, mu, gamma, c=F(1), alpha_bar=F(1, 2))

    def phi(e):  # gamma_n / alpha_n = 2/(n+2)^2 <= e from here on
        k = math.isqrt(math.ceil(2 / e))
        while k * k < 2 / e:
            k += 1
        return max(0, k - 2)

    ratio = Seq(lambda n: gamma(n) / half(n))
    assert check_convergence_rate(ratio, 0, phi, [F(1, k) for k in (1, 2, 7, 64, 1000)], 1500).passed
    assert check_modulus(exact, lambda e: e, GRID, 1500).passed
    assert star_check(exact, 1500).verdict is Verdict.CERTIFIED
    for eps in GRID:
        Phi = case2_rate(constant_divergence_rate(F(1, 2)), phi, lambda e: e, 1, F(1, 2), eps)
        assert _window_ok(mu, Phi, 0, eps)

    # exact, successor modulus: mu_{n+1} = mu_n / 2, beta_n = mu_{n+1}, alpha = 1
    geo = Seq(lambda n: F(1, 2**n))
    inst = StarInstance(geo, Seq.constant(1), Seq(lambda n: geo(n + 1)), Seq.constant(0), c=F(1))
    assert star_check(inst, 1200).passed
    assert check_modulus(inst, lambda e: e, GRID, 1200, variant="mu_succ").passed
    for eps in GRID:
        Phi = case2b_rate(constant_divergence_rate(1), zero_rate, lambda e: e, 1, eps)
        assert _window_ok(geo, Phi, 0, eps)


# ---------------------------------------------------------------------------


@acceptance(9, "abstract gradient conditions pass; each single sabotage detected")
@pytest.mark.parametrize("make", [quadratic_setup, l1_box_setup], ids=["quadratic", "l1-box"])
def test_criterion_09_abstract_conditions(make):
    setup = make(0)
    cert = setup.check(2000)
    assert cert.verdict is Verdict.CERTIFIED, cert.failed_checks
    assert [c.name for c in cert.checks] == list(CONDITION_NAMES)
    for cond in CONDITION_NAMES:
        bad = sabotage(setup, cond, 500).check(500)
        assert cond in bad.failed_checks, (cond, bad.failed_checks)
    if make is l1_box_setup:
        assert np.all(np.abs(setup.traj.x(2000)) <= 1 + 1e-12)


# ---------------------------------------------------------------------------


@acceptance(10, "every scenario report byte-identical across two runs")
def test_criterion_10_determinism(tmp_path):
    assert main(["run", "all", "--out", str(tmp_path / "a"), "--csv"]) == 0
    assert main(["run", "all", "--out", str(tmp_path / "b"), "--csv", "--jobs", "4"]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
    assert {f"{name}.json" for name in SCENARIOS} <= set(files)
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
