"""Single-shot overflow bounds and asymptotic rate formulas.

Thresholds are passed as probabilities ``t_lambda = 2**-lambda`` and
``t_tau = 2**-tau``.  Both are rationals, so the cross terms
``2**(lambda - tau) = t_tau / t_lambda`` are always exact here.

Sets (over sequences of the given length):
    S_m(lambda) = {x^m : P(x^m) <= t_lambda}
    T_n(tau)    = {y^n : P(y^n) >= t_tau}
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .exactnum import ONE, Real, ratio
from .markov import SpectrumSummary


@dataclass(frozen=True)
class BoundQuery:
    m: int
    n: int
    lambda_threshold: Fraction
    tau_threshold: Fraction
    p_S: Fraction
    p_Sc: Fraction
    p_T: Fraction
    p_Tc: Fraction

    def __post_init__(self):
        for name in ("lambda_threshold", "tau_threshold"):
            t = getattr(self, name)
            if not 0 < t <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.p_S + self.p_Sc != 1:
            raise ValueError("P(S) + P(S^c) must equal 1")
        if self.p_T + self.p_Tc != 1:
            raise ValueError("P(T) + P(T^c) must equal 1")

    @property
    def cross_term(self) -> Fraction:
        """``2**(-tau + lambda)``."""
        return self.tau_threshold / self.lambda_threshold


def make_query(m, n, t_lambda, t_tau, coin_table: dict, target_table: dict) -> BoundQuery:
    """Build a query from the exact spectra ``{prob: mass}`` of ``X^m`` and ``Y^n``."""
    from .analysis import masses_from_table

    tl, tt = ratio(t_lambda), ratio(t_tau)
    p_S = masses_from_table(coin_table, tl)[0]
    p_T = masses_from_table(target_table, tt)[1]
    return BoundQuery(m, n, tl, tt, p_S, ONE - p_S, p_T, ONE - p_T)


def converse_bound(q: BoundQuery) -> tuple[Fraction, Fraction]:
    """Both lower bounds on ``Pr(T > m)``; they are equal by construction."""
    c = q.cross_term
    return q.p_Tc - q.p_S - c, q.p_Sc - q.p_T - c


def achievability_bound(q: BoundQuery) -> Fraction:
    """Upper bound on ``Pr(T > m)`` for the interval algorithm."""
    return q.p_Sc + q.p_Tc + 2 * q.lambda_threshold / q.tau_threshold


@dataclass(frozen=True)
class GridPoint:
    m: int
    t_lambda: Fraction
    t_tau: Fraction
    overflow: Fraction
    converse: tuple
    achievability: Fraction

    @property
    def identity_ok(self) -> bool:
        return self.converse[0] == self.converse[1]

    @property
    def passed(self) -> bool:
        return self.identity_ok and max(self.converse) <= self.overflow <= self.achievability


def bound_grid(coin, target, n: int, ms: Iterable[int], lambdas: Iterable, taus: Iterable) -> list[GridPoint]:
    """Check both bounds at every ``(m, t_lambda, t_tau)``."""
    from .analysis import exact_run, spectrum_table, target_cells

    ms = sorted(set(ms))
    lambdas = [ratio(x) for x in lambdas]
    taus = [ratio(x) for x in taus]
    run = exact_run(coin, target, n, max(ms))
    ttab: dict = {}
    for p in target_cells(target, n).law.values():
        ttab[p] = ttab.get(p, 0) + p
    out = []
    for m in ms:
        ctab = spectrum_table(coin, m) if m else {ONE: ONE}
        for tl in lambdas:
            for tt in taus:
                q = make_query(m, n, tl, tt, ctab, ttab)
                out.append(GridPoint(m, tl, tt, run.overflow[m], converse_bound(q), achievability_bound(q)))
    return out


def dyadic_grid(bits: Iterable[int]) -> list[Fraction]:
    return [Fraction(1, 2**b) for b in bits]


# --------------------------------------------------------------------------
# asymptotic rates


@dataclass(frozen=True)
class RatesReport:
    R_int_upper: Real  # sup-entropy(Y) / inf-entropy(X)
    R_lower: Real  # max of sup/sup and inf/inf
    L_int_upper: Real  # avg-entropy(Y) / inf-entropy(X)
    L_lower: Real  # avg-entropy(Y) / sup-entropy(X)
    coin_one_point: bool
    target_one_point: bool
    R_star: Optional[Real] = None  # set when the bounds meet
    L_star: Optional[Real] = None

    def to_dict(self) -> dict:
        def r(x):
            return None if x is None else {"value": x.value, "err": x.err}

        return {
            "R_int_upper": r(self.R_int_upper),
            "R_lower": r(self.R_lower),
            "L_int_upper": r(self.L_int_upper),
            "L_lower": r(self.L_lower),
            "coin_one_point": self.coin_one_point,
            "target_one_point": self.target_one_point,
            "R_star": r(self.R_star),
            "L_star": r(self.L_star),
        }


def _rmax(a: Real, b: Real) -> Real:
    return a if a.value >= b.value else b


def asymptotic_rates(coin: SpectrumSummary, target: SpectrumSummary) -> RatesReport:
    if coin.inf_entropy.lo <= 0:
        raise ValueError("coin spectrum touches zero")
    hx_sup, hx_inf = coin.sup_entropy, coin.inf_entropy
    hy_sup, hy_inf, hy_avg = target.sup_entropy, target.inf_entropy, target.avg_entropy
    R_up = hy_sup / hx_inf
    R_lo = _rmax(hy_sup / hx_sup, hy_inf / hx_inf)
    L_up = hy_avg / hx_inf
    L_lo = hy_avg / hx_sup
    c1, t1 = coin.one_point, target.one_point
    R_star = R_up if (c1 or t1) else None
    L_star = L_up if c1 else None
    return RatesReport(R_up, R_lo, L_up, L_lo, c1, t1, R_star, L_star)
