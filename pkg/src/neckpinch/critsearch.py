"""Bisection over the corseting parameter for the pinch threshold.

Classification is treated as monotone in lam: tight corsets (small lam)
pinch, loose ones relax to the round sphere.  Each midpoint run replaces
the matching bracket end; anything other than a clean supercritical or
subcritical verdict halts the search with the bracket it has.
"""

from dataclasses import dataclass, field, replace

from .classify import OutcomeKind
from .flow import FlowConfig, evolve

__all__ = ["BisectionIteration", "BisectionResult", "BracketError", "bisect"]


class BracketError(ValueError):
    """The bracket endpoints do not classify as supercritical / subcritical."""


@dataclass(frozen=True)
class BisectionIteration:
    lam: float
    kind: OutcomeKind
    t_final: float


@dataclass
class BisectionResult:
    """Bracketing record of the critical-lam search.

    lambda_lo always classifies supercritical and lambda_hi subcritical;
    the estimate is the bracket midpoint, uncertain by half the width.
    The estimate is resolution dependent, so report it together with
    n_total and dt_safety of the config that produced it.
    """

    lambda_lo: float
    lambda_hi: float
    n_total: int
    dt_safety: float
    iterations: list[BisectionIteration] = field(default_factory=list)
    halted_on: BisectionIteration | None = None

    @property
    def bracket_width(self) -> float:
        return self.lambda_hi - self.lambda_lo

    @property
    def lambda_crit_estimate(self) -> float:
        return 0.5 * (self.lambda_lo + self.lambda_hi)


def bisect(lo: float, hi: float, config: FlowConfig, width_tol: float,
           assume_bracket: bool = False) -> BisectionResult:
    """Shrink [lo, hi] around the critical lam until width <= width_tol.

    The endpoints are verified first (evolve(lo) must be supercritical and
    evolve(hi) subcritical) unless assume_bracket says the caller already
    knows.  Midpoints that come back undecided (or as a numerical failure)
    stop the search with the current bracket recorded in halted_on rather
    than guessing a side.  Every run is recorded; identical inputs give
    identical iteration logs.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got {lo} >= {hi}")
    if width_tol <= 0.0:
        raise ValueError("width_tol must be positive")
    result = BisectionResult(lambda_lo=lo, lambda_hi=hi,
                             n_total=config.n_total,
                             dt_safety=config.dt_safety)

    def run(lam: float) -> BisectionIteration:
        out = evolve(replace(config, lam=lam))
        it = BisectionIteration(lam=lam, kind=out.kind, t_final=out.t_final)
        result.iterations.append(it)
        return it

    if not assume_bracket:
        it_lo = run(lo)
        if it_lo.kind is not OutcomeKind.SUPERCRITICAL:
            raise BracketError(
                f"lower endpoint lam={lo} classified {it_lo.kind.value}, "
                "expected supercritical")
        it_hi = run(hi)
        if it_hi.kind is not OutcomeKind.SUBCRITICAL:
            raise BracketError(
                f"upper endpoint lam={hi} classified {it_hi.kind.value}, "
                "expected subcritical")

    while result.lambda_hi - result.lambda_lo > width_tol:
        mid = 0.5 * (result.lambda_lo + result.lambda_hi)
        it = run(mid)
        if it.kind is OutcomeKind.SUPERCRITICAL:
            result.lambda_lo = mid
        elif it.kind is OutcomeKind.SUBCRITICAL:
            result.lambda_hi = mid
        else:
            result.halted_on = it
            break
    return result
