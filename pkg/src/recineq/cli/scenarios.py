"""The scenario registry: each scenario turns a config into certificates."""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from ..certificate import Certificate, Check, from_checks
from ..descent import (
    CONDITION_NAMES,
    PowerLaw,
    accretive_rate,
    accretive_star_instance,
    certify_gradient_meta,
    check_tail_small,
    l1_box_setup,
    quadratic_setup,
    run_accretive_implicit,
    run_km,
    sabotage,
    sine_star_instance,
    wc_rate_sine,
)
from ..pathology import (
    block_mu,
    block_padding,
    case2_counterexample,
    check_block_invariants,
    check_block_mu,
    nu_zero,
    specker_rows,
    summability_bound,
    tm_halts_in,
)
from ..pathology.counterexamples import UNBOUNDED_ALPHA_NOTE
from ..ratecalc import check_modulus, series_meta_rate, series_window_witness, star_check
from ..seqcore import FLOAT, Seq, check_convergence_rate, harmonic_divergence_rate, parse_g
from .config import ConfigError, ScenarioConfig

Sidecar = Callable[[], str]


@dataclass
class ScenarioResult:
    certificates: list[Certificate]
    sidecars: dict[str, Sidecar] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    run: Callable[[ScenarioConfig], ScenarioResult]
    defaults: dict
    backends: tuple[str, ...]

    def configure(self, cfg: ScenarioConfig) -> ScenarioConfig:
        cfg = cfg.with_defaults(backend=self.backends[0], **self.defaults)
        if cfg.backend not in self.backends:
            raise ConfigError(f"{self.name} supports backend {' or '.join(self.backends)}, not {cfg.backend}")
        return cfg


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


A_SQ = Seq(lambda n: Fraction(1, (n + 1) ** 2), name="1/(n+1)^2")
A_INV = Seq(lambda n: Fraction(1, n + 1), name="1/(n+1)")
ONE = Seq.constant(1.0, FLOAT)
SQUARE = PowerLaw(1, 2)


# ---------------------------------------------------------------------------


def run_sine_rate(cfg: ScenarioConfig) -> ScenarioResult:
    window, tol = cfg.horizon, float(cfg.tol)
    traj = run_km(math.sin, ONE, 1.0, 0)
    certs, top = [], 0
    for eps in cfg.eps:
        bound = wc_rate_sine(eps)
        closed = Check("closed-form")
        if bound != math.ceil(256 / eps**3):
            closed.fail({"eps": eps, "bound": bound})
        tail = check_tail_small(traj, bound, window, eps, tol)
        top = max(top, bound + window)
        certs.append(from_checks(f"sine-rate eps={eps}", [closed, tail], bound=bound))
    star = star_check(sine_star_instance(traj), top, tol)
    star.scenario = "sine-star"
    certs.append(star)
    return ScenarioResult(certs, {"trajectory": lambda: traj.to_csv(top)})


def run_subgradient_meta(cfg: ScenarioConfig) -> ScenarioResult:
    setup = l1_box_setup(0)
    r = harmonic_divergence_rate()
    certs = []
    for eps in cfg.eps:
        for gs in cfg.g:
            cert = certify_gradient_meta(setup, r, eps, parse_g(gs), cfg.scan_cap, float(cfg.tol))
            cert.scenario = f"l1-box-5 eps={eps} g={gs}"
            certs.append(cert)
    top = max([c.checks[0].checked_range[1] + 1 for c in certs] + [1])
    return ScenarioResult(certs, {"trajectory": lambda: setup.traj.to_csv(top)})


def random_block_instance(rng: random.Random, length: int = 3000):
    """Rational ``(s, alpha, theta, c, alpha_bar)`` with ``s`` periodic and ``alpha`` bounded."""
    den = rng.choice([2, 3, 4, 6])
    s_vals = [Fraction(rng.randint(1, 12), den) for _ in range(length)]
    a_den = rng.choice([4, 8, 10])
    shift = rng.randint(0, 4)
    s = Seq(lambda n: s_vals[n % length], name="s")
    alpha = Seq(lambda n: Fraction(1 + (7 * n + shift) % 5, a_den), name="alpha")
    theta = Fraction(rng.randint(1, 6), rng.choice([1, 2, 3]))
    return s, alpha, theta, max(s_vals), Fraction(5, a_den)


def run_block_invariants(cfg: ScenarioConfig) -> ScenarioResult:
    rng = random.Random(cfg.seed)
    certs, rows = [], []
    for i in range(cfg.count):
        s, alpha, theta, c, abar = random_block_instance(rng)
        bc = block_padding(s, alpha, theta, cfg.horizon)
        inv = check_block_invariants(bc, cfg.horizon)
        lhs, rhs = summability_bound(bc, cfg.horizon, c, abar)
        summ = Check("summability-bound", checked_range=(0, bc.l(bc.blocks_covering(cfg.horizon)) - 1))
        if lhs > rhs:
            summ.fail({"lhs": lhs, "rhs": rhs})
        mu = block_mu(bc, lhs, nu_zero(), cfg.horizon)
        certs.append(
            from_checks(
                f"block instance {i} theta={theta}",
                inv.checks + [summ] + check_block_mu(bc, mu, cfg.horizon).checks,
                bound=bc.blocks_covering(cfg.horizon),
            )
        )
        if i == 0:
            rows = [(k, str(bc.beta_at(k)), str(alpha(k))) for k in range(cfg.horizon + 1)]
    return ScenarioResult(certs, {"beta": lambda: _csv(["k", "beta", "alpha"], rows)})


def run_specker_dump(cfg: ScenarioConfig) -> ScenarioResult:
    upto = cfg.horizon
    rows = specker_rows(A_SQ, upto)
    in_range = Check("value-in-range", checked_range=(0, upto))
    resim = Check("resimulation", checked_range=(0, upto))
    stable = Check("budget-extension", checked_range=(0, upto))
    # independent pass: simulate every machine afresh, no cache
    first: dict[int, int] = {}
    for m in range(upto + 1):
        t = tm_halts_in(m, upto).step
        if t is not None and m <= t:
            first.setdefault(t, m)
    for row in rows:
        if row.witness < 0:
            if row.value != 0:
                in_range.fail({"n": row.n, "value": row.value})
        elif not (row.witness <= row.n and row.value == A_SQ(row.witness)):
            in_range.fail({"n": row.n, "value": row.value, "witness": row.witness})
        if first.get(row.n, -1) != row.witness:
            resim.fail({"n": row.n, "witness": row.witness, "resimulated": first.get(row.n)})
    longer = specker_rows(A_SQ, 2 * upto + 17)[: upto + 1]
    if longer != rows:
        k = next(i for i, (a, b) in enumerate(zip(rows, longer)) if a != b)
        stable.fail({"n": k})
    cert = from_checks("specker", [in_range, resim, stable])
    cert.notes.append(f"nonzero rows: {[(r.n, r.witness) for r in rows if r.witness >= 0]}")
    return ScenarioResult([cert], {"rows": lambda: _csv(["n", "value", "witness"], [(r.n, str(r.value), r.witness) for r in rows])})


def run_series_meta_oracle(cfg: ScenarioConfig) -> ScenarioResult:
    rng = random.Random(cfg.seed)
    chk = Check("window-found", checked_range=(0, cfg.count - 1))
    largest = 0
    for i in range(cfg.count):
        den = rng.choice([1, 2, 3, 5, 7])
        values = [Fraction(rng.randint(0, 10), den) for _ in range(rng.randint(1, 30))]
        b = sum(values) + Fraction(rng.randint(0, 3), 4) or Fraction(1, 4)
        eps, gs = rng.choice(cfg.eps), rng.choice(cfg.g)
        g = parse_g(gs)
        bound = series_meta_rate(b, eps, g)
        largest = max(largest, bound)
        if series_window_witness(values, eps, g, bound) is None:
            chk.fail({"instance": i, "values": values, "eps": eps, "g": gs, "bound": bound})
    cert = from_checks("series-meta-oracle", [chk], bound=largest)
    cert.notes.append(f"{cfg.count} random instances; bound is the largest rate seen")
    return ScenarioResult([cert])


def run_counterexample_a(cfg: ScenarioConfig) -> ScenarioResult:
    inst = case2_counterexample("a", A_SQ, cfg.horizon)
    star = star_check(inst, cfg.horizon)
    star.scenario = "counterexample-a star"
    mod = check_modulus(inst, lambda e: e, cfg.eps, cfg.horizon)
    mod.scenario = "counterexample-a modulus"
    return ScenarioResult([star, mod], {"mu": lambda: _csv(["n", "mu", "gamma"], [(n, str(inst.mu(n)), str(inst.gamma(n))) for n in range(cfg.horizon + 1)])})


def run_counterexample_b(cfg: ScenarioConfig) -> ScenarioResult:
    inst = case2_counterexample("b", A_INV, cfg.horizon)
    star = star_check(inst, cfg.horizon)
    star.scenario = "counterexample-b star"
    star.notes.append(UNBOUNDED_ALPHA_NOTE)
    ratio = Seq(lambda n: inst.gamma(n) / inst.alpha(n), name="gamma/alpha")
    rate = check_convergence_rate(ratio, 0, lambda e: math.ceil(2 / e), cfg.eps, cfg.horizon)
    rate.scenario = "counterexample-b gamma/alpha rate"
    return ScenarioResult([star, rate])


def run_accretive_rate(cfg: ScenarioConfig) -> ScenarioResult:
    traj = run_accretive_implicit(SQUARE, ONE, 1.0, 0)
    tol = float(cfg.tol)
    certs, top = [], 0
    for eps in cfg.eps:
        bound = accretive_rate(SQUARE, 1, 1, 1, eps)
        top = max(top, bound + cfg.horizon)
        certs.append(from_checks(f"accretive eps={eps}", [check_tail_small(traj, bound, cfg.horizon, eps, tol)], bound=bound))
    star = star_check(accretive_star_instance(traj, SQUARE), top, tol)
    star.scenario = "accretive-star"
    certs.append(star)
    return ScenarioResult(certs, {"trajectory": lambda: traj.to_csv(top)})


def run_abstract_conditions(cfg: ScenarioConfig) -> ScenarioResult:
    tol = float(cfg.tol)
    certs = []
    for name, make in (("l1-box-5", l1_box_setup), ("quadratic-2", quadratic_setup)):
        setup = make(0)
        cert = setup.check(cfg.horizon, tol)
        cert.scenario = f"{name} conditions"
        certs.append(cert)
        for cond in CONDITION_NAMES:
            bad = sabotage(setup, cond, cfg.horizon).check(cfg.horizon, tol)
            det = Check("violation-detected", checked_range=(0, cfg.horizon - 1))
            if cond not in bad.failed_checks:
                det.fail({"condition": cond, "failed": bad.failed_checks})
            certs.append(from_checks(f"{name} sabotage {cond}", [det]))
    return ScenarioResult(certs)


SCENARIOS: dict[str, Scenario] = {
    s.name: s
    for s in [
        Scenario("sine-rate", "rate for x -> sin x checked on a trajectory tail", run_sine_rate,
                 {"eps": (Fraction(1, 10),), "horizon": 10000, "tol": Fraction(0)}, (FLOAT,)),
        Scenario("subgradient-meta", "metastability bound for projected subgradient on l1-box-5", run_subgradient_meta,
                 {"eps": (Fraction(1), Fraction(2)), "g": ("const:0", "linear:0"), "scan_cap": 10**5,
                  "tol": Fraction(1, 10**9)}, (FLOAT,)),
        Scenario("block-invariants", "block padding of random rational data", run_block_invariants,
                 {"seed": 0, "count": 5, "horizon": 2000}, ("exact",)),
        Scenario("specker-dump", "Specker sequence rows with re-simulated witnesses", run_specker_dump,
                 {"horizon": 2000}, ("exact",)),
        Scenario("series-meta-oracle", "series metastability rate against brute force", run_series_meta_oracle,
                 {"seed": 0, "count": 1000, "eps": (Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2)),
                  "g": ("const:0", "const:3", "linear:0", "affine:2,1")}, ("exact",)),
        Scenario("counterexample-a", "Case II instance with modulus but no rate (variant a)", run_counterexample_a,
                 {"horizon": 2000, "eps": (Fraction(1), Fraction(1, 2), Fraction(1, 10), Fraction(1, 1000))}, ("exact",)),
        Scenario("counterexample-b", "Case II instance with gamma/alpha rate but no rate (variant b)", run_counterexample_b,
                 {"horizon": 2000, "eps": (Fraction(1, 2), Fraction(1, 10), Fraction(1, 50))}, ("exact",)),
        Scenario("accretive-rate", "implicit scheme for A(x) = x|x| against its rate", run_accretive_rate,
                 {"eps": (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)), "horizon": 1000,
                  "tol": Fraction(1, 10**9)}, (FLOAT,)),
        Scenario("abstract-conditions", "six gradient-method conditions plus one sabotage per condition",
                 run_abstract_conditions, {"horizon": 1500, "tol": Fraction(1, 10**9)}, (FLOAT,)),
    ]
}
