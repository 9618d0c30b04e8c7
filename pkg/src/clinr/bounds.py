"""Closed-form error-rate and overhead bounds, parameter defaults, t selection.

All bound evaluators return the mathematical expression unclamped (it may
exceed 1, in which case it is vacuous) together with a clamped companion.
``g(p, x) = 1 - (1-p)**x`` is the probability of at least one fault among x
independent fault locations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuit import Circuit
from .noise import NoiseModel


def g(p: float, x: int) -> float:
    """1 - (1-p)^x, stable for small p via log1p/expm1."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0 or p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    return -math.expm1(x * math.log1p(-p))


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class BoundReport:
    """Evaluated bounds plus an echo of the inputs."""

    p_log_bound: float  # unclamped; may exceed 1 (vacuous)
    p_log_bound_clamped: float
    omega_q: float
    omega_g_bound: float
    m0: int
    n: int
    s: int
    t: int
    r: int
    p: float
    s0: int

    def to_dict(self) -> dict:
        return {
            "p_log_bound": self.p_log_bound,
            "p_log_bound_clamped": self.p_log_bound_clamped,
            "omega_q": self.omega_q,
            "omega_g_bound": self.omega_g_bound,
            "m0": self.m0,
            "n": self.n,
            "s": self.s,
            "t": self.t,
            "r": self.r,
            "p": self.p,
            "s0": self.s0,
        }


def clinr_bound(n: int, s: int, t: int, r: int, p: float) -> BoundReport:
    """Per-sub-circuit accounting m0 = 3n + s0 + (2n+3)r with s0 = ceil(s/t).

    p_log <= t * (g(3n+s0) 2^-r + 2 g(2n+3) + g(5n)) / (1-p)^m0 and
    omega_g <= 10n/s0 + 2 m0 / (s0 (1-p)^m0); omega_q = 3 + 1/n.
    """
    if t < 1 or r < 1 or s < 1 or n < 1:
        raise ValueError("need n, s, t, r >= 1")
    s0 = ceil_div(s, t)
    m0 = 3 * n + s0 + (2 * n + 3) * r
    decay = (1.0 - p) ** m0
    if decay == 0.0:
        plog = math.inf
        omega_g = math.inf
    else:
        num = g(p, 3 * n + s0) * 2.0 ** (-r) + 2.0 * g(p, 2 * n + 3) + g(p, 5 * n)
        plog = t * num / decay
        omega_g = 10.0 * n / s0 + 2.0 * m0 / (s0 * decay)
    return BoundReport(
        p_log_bound=plog,
        p_log_bound_clamped=min(plog, 1.0),
        omega_q=3.0 + 1.0 / n,
        omega_g_bound=omega_g,
        m0=m0,
        n=n,
        s=s,
        t=t,
        r=r,
        p=p,
        s0=s0,
    )


def single_stage_bound(n: int, s: int, r: int, p: float) -> BoundReport:
    """The unsplit (t = 1) case with the tighter overhead 5n/s + m/(s (1-p)^m)."""
    report = clinr_bound(n, s, 1, r, p)
    decay = (1.0 - p) ** report.m0
    omega_g = math.inf if decay == 0.0 else 5.0 * n / s + report.m0 / (s * decay)
    return BoundReport(
        p_log_bound=report.p_log_bound,
        p_log_bound_clamped=report.p_log_bound_clamped,
        omega_q=report.omega_q,
        omega_g_bound=omega_g,
        m0=report.m0,
        n=n,
        s=s,
        t=1,
        r=r,
        p=p,
        s0=s,
    )


def cznr_bound(n: int, s: int, t: int, r: int, p: float) -> BoundReport:
    """CZ-sequence analogue: m0 = n + s0 + (n+3)r, omega_q = 2 + 1/n.

    p_log <= t * (g(n+s0) 2^-r + 2 g(n+3) + g(3n)) / (1-p)^m0 and
    omega_g <= 6n/s0 + 2 m0 / (s0 (1-p)^m0).
    """
    if t < 1 or r < 1 or s < 1 or n < 1:
        raise ValueError("need n, s, t, r >= 1")
    s0 = ceil_div(s, t)
    m0 = n + s0 + (n + 3) * r
    decay = (1.0 - p) ** m0
    if decay == 0.0:
        plog = math.inf
        omega_g = math.inf
    else:
        num = g(p, n + s0) * 2.0 ** (-r) + 2.0 * g(p, n + 3) + g(p, 3 * n)
        plog = t * num / decay
        omega_g = 6.0 * n / s0 + 2.0 * m0 / (s0 * decay)
    return BoundReport(
        p_log_bound=plog,
        p_log_bound_clamped=min(plog, 1.0),
        omega_q=2.0 + 1.0 / n,
        omega_g_bound=omega_g,
        m0=m0,
        n=n,
        s=s,
        t=t,
        r=r,
        p=p,
        s0=s0,
    )


def asymptotic_bound(n: int, s0: int, t: int, r: int, p: float) -> float:
    """Constant-free small-p expression (t s0 2^-r p + 9 t n p) / (1 - s0 p).

    This is the O-expression with its hidden constant dropped; it is a
    diagnostic for scaling studies, not a rigorous bound.
    """
    if s0 * p >= 1.0:
        raise ValueError("requires s0 * p < 1")
    return (t * s0 * 2.0 ** (-r) * p + 9.0 * t * n * p) / (1.0 - s0 * p)


def default_params(n: int, s: int, log_base: float = 2.0) -> tuple[int, int]:
    """(t, r) = (floor(sqrt(s/n)), floor(log_base(s/n))), clamped to >= 1."""
    if n < 1 or s < 1:
        raise ValueError("need n, s >= 1")
    ratio = s / n
    t = max(1, math.floor(math.sqrt(ratio)))
    r = max(1, math.floor(math.log(ratio, log_base))) if ratio > 1 else 1
    return t, r


def choose_t_for_budget(n: int, s: int, r: int, p: float, budget: float) -> int | None:
    """Smallest t >= 1 whose analytic omega_g bound fits the budget.

    Returns None (infeasible) when no t in 1..s works.  Note the analytic
    bound satisfies omega_g > 2 for every input (its 2 m0/s0 term exceeds 2),
    so budgets <= 2 are always infeasible; experiment drivers fall back to
    the realistic estimate in :func:`choose_t_by_estimate`.
    """
    if budget <= 1.0:
        raise ValueError("budget must exceed 1")
    for t in range(1, s + 1):
        if clinr_bound(n, s, t, r, p).omega_g_bound <= budget:
            return t
    return None


def two_qubit_fraction(circuit: Circuit) -> float:
    if circuit.size == 0:
        return 0.0
    return sum(o.is_two_qubit() for o in circuit.ops) / circuit.size


def estimate_omega_g(
    n: int,
    s: int,
    t: int,
    r: int,
    model: NoiseModel,
    frac_2q: float,
    strategy: str = "bell",
    kind: str = "clinr",
) -> float:
    """Deterministic estimate of the expected gate overhead of a real run.

    Unlike the worst-case analytic bound this uses the circuit's actual
    two-qubit fraction, the strategy's maximum check weight, and the
    per-class rates; idle noise and partial-check restarts are ignored.
    Restart probability is the exact no-fault complement over the attempt.
    """
    s0 = ceil_div(s, t)
    if kind == "clinr":
        w = (n + 1) if strategy == "bell" else 2 * n
        prep_2q, prep_1q = n, 2 * n
        finish = 5 * n
    else:
        w = n
        prep_2q, prep_1q = 0, n
        finish = 3 * n
    c_2q = round(s0 * frac_2q)
    c_1q = s0 - c_2q
    ok = (
        (1.0 - model.p2) ** (prep_2q + c_2q + r * w)
        * (1.0 - model.p1) ** (prep_1q + c_1q + 2 * r)
        * (1.0 - model.p_meas) ** r
    )
    attempt_ops = (prep_2q + prep_1q) + s0 + r * (w + 3)
    expected = t * (attempt_ops / ok + finish)
    return expected / s


def choose_t_by_estimate(
    n: int,
    s: int,
    r: int,
    model: NoiseModel,
    frac_2q: float,
    budget: float,
    strategy: str = "bell",
    kind: str = "clinr",
    t_max: int | None = None,
) -> int:
    """Smallest t whose estimated omega_g fits the budget; falls back to t=1.

    t=1 minimizes how often the stored input waits through resource
    preparation and how many times per-sub-circuit leak terms accrue, so it
    is the natural choice when no t meets the budget.
    """
    limit = min(s, t_max) if t_max else s
    for t in range(1, max(limit, 1) + 1):
        if estimate_omega_g(n, s, t, r, model, frac_2q, strategy, kind) <= budget:
            return t
    return 1
