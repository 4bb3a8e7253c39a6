"""
One-sided McNemar tests (H1: system A is correct more often than B) and
Benjamini-Hochberg adjustment.

Binomial tails are summed exactly over integers; no normal approximation.
"""
import math
from enum import Enum

from pydantic import BaseModel, ConfigDict
from scipy.special import comb
from statsmodels.stats.multitest import multipletests

from errors import OutOfRange, PreconditionFailed

EXACT_MAX_DISCORDANT = 25


class McNemarMethod(str, Enum):
    EXACT = "exact_binomial"
    MID_P = "mid_p"


class McNemarResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    n10: int
    n01: int
    method: McNemarMethod
    raw_p: float
    adj_p: float | None = None


def _check_counts(n10: int, n01: int):
    if n10 < 0 or n01 < 0:
        raise PreconditionFailed(f"discordant counts must be non-negative, got ({n10}, {n01})")


def _tail_from(k: int, n: int) -> int:
    """Σ_{i=k}^{n} C(n, i) as an exact integer."""
    return sum(comb(n, i, exact=True) for i in range(max(k, 0), n + 1))


def mcnemar_exact(n10: int, n01: int) -> float:
    """P(X ≥ n10) for X ~ Binomial(n10 + n01, 1/2); 1 when there are no discordant pairs."""
    _check_counts(n10, n01)
    n = n10 + n01
    if n == 0:
        return 1.0
    return _tail_from(n10, n) / 2 ** n


def mcnemar_midp(n10: int, n01: int) -> float:
    """P(X > n10) + ½·P(X = n10) for X ~ Binomial(n10 + n01, 1/2)."""
    _check_counts(n10, n01)
    n = n10 + n01
    if n == 0:
        return 1.0
    above = _tail_from(n10 + 1, n)
    return (2 * above + comb(n, n10, exact=True)) / 2 ** (n + 1)


def mcnemar(n10: int, n01: int) -> McNemarResult:
    """Exact test for at most 25 discordant pairs, mid-p above that."""
    if n10 + n01 <= EXACT_MAX_DISCORDANT:
        return McNemarResult(n10=n10, n01=n01, method=McNemarMethod.EXACT, raw_p=mcnemar_exact(n10, n01))
    return McNemarResult(n10=n10, n01=n01, method=McNemarMethod.MID_P, raw_p=mcnemar_midp(n10, n01))


def bh_adjust(p_values) -> list[float]:
    """Benjamini-Hochberg step-up adjustment, returned in input order."""
    p_values = [float(p) for p in p_values]
    for p in p_values:
        if math.isnan(p) or not 0.0 <= p <= 1.0:
            raise OutOfRange(f"p-value {p} outside [0, 1]")
    if not p_values:
        return []
    _, adjusted, _, _ = multipletests(p_values, method="fdr_bh")
    return [min(1.0, float(p)) for p in adjusted]


def compare_family(count_pairs) -> list[McNemarResult]:
    """Test every (n10, n01) pair and BH-adjust across the whole family."""
    results = [mcnemar(n10, n01) for n10, n01 in count_pairs]
    adjusted = bh_adjust([r.raw_p for r in results])
    return [r.model_copy(update={"adj_p": p}) for r, p in zip(results, adjusted)]
