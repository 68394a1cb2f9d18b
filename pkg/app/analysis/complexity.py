"""
Success-probability and cost model of the decomposition attack.

All large quantities are mpmath floats at the configured precision; the
cost-table rows reach 10^86 and are compared to three figures.
"""
import logging
from dataclasses import dataclass
from math import ceil, floor
from typing import List, Optional, Tuple

import mpmath

from app.config import config

logger = logging.getLogger(__name__)

TABLE3_NS = (100, 150, 200, 250, 300, 310, 350, 400, 409, 450, 500, 571)
VARIANTS = ("block", "default-f4")


def _mp():
    mpmath.mp.dps = config.get("analysis.precision", 30)
    return mpmath.mp


@dataclass(frozen=True)
class CostModel:
    omega: float = 3.0
    omega_sparse: float = 2.0
    variant: str = "block"

    def __post_init__(self):
        if not 2.376 <= self.omega <= 3:
            raise ValueError(f"omega must lie in [2.376, 3], got {self.omega}")
        if self.omega_sparse != 2:
            raise ValueError("the sparse exponent is fixed at 2")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")


# ---------------------------------------------------------------------------
# Success probability
# ---------------------------------------------------------------------------

def class_count(t: int, size_V: int):
    """|V|^t / t!, the approximate number of unordered t-tuples from V."""
    _mp()
    return mpmath.mpf(size_V) ** t / mpmath.factorial(t)


def success_probability(q: int, m: int, t: int, size_V: int):
    if t < 1 or size_V < 2:
        raise ValueError("need t >= 1 and |V| >= 2")
    if t > m:
        raise ValueError(f"t = {t} exceeds m = {m}")
    K = class_count(t, size_V)
    return 1 - mpmath.exp(-K / q)


def success_probability_exact(q: int, m: int, t: int, size_V: int):
    """1 - (1 - 1/q)^K, the form before the exponential approximation."""
    K = class_count(t, size_V)
    return 1 - (1 - mpmath.mpf(1) / q) ** K


def success_probability_small(q: int, m: int, t: int, size_V: int):
    """K/q, valid while it is small."""
    return class_count(t, size_V) / q


def relation_probability(n: int, m: int, k: int):
    """Chance that one random point decomposes over V: about 2^{mk-n}/m!."""
    _mp()
    return mpmath.mpf(2) ** (m * k - n) / mpmath.factorial(m)


def probability(n: int, m: int, t: int, k: int):
    """P(n, m, t, k) with q = 2^n and |V| = 2^k."""
    return success_probability(2 ** n, m, t, 2 ** k)


def truncate(value, digits: int = 4) -> float:
    """Cut (not round) to the given number of decimals."""
    scale = 10 ** digits
    return floor(float(value) * scale) / scale


# ---------------------------------------------------------------------------
# Stage costs
# ---------------------------------------------------------------------------

def stage_costs(n: int, m: int, model: CostModel = CostModel()) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """stage1 = m! 2^{n/m} n^{4 omega}, stage2 = 2^{omega' n/m}."""
    if not 2 <= m < n:
        raise ValueError(f"need 2 <= m < n, got m={m}, n={n}")
    _mp()
    stage1 = mpmath.factorial(m) * mpmath.mpf(2) ** (mpmath.mpf(n) / m) * mpmath.mpf(n) ** (4 * model.omega)
    if model.variant == "default-f4":
        stage1 *= mpmath.mpf(m - 1) ** (4 * model.omega)
    stage2 = mpmath.mpf(2) ** (model.omega_sparse * mpmath.mpf(n) / m)
    return stage1, stage2


def stage1_general(n: int, m: int, k: int, model: CostModel = CostModel()):
    """m!/2^{mk-n} * 2^k * n^{4 omega} for an explicit subspace dimension k."""
    _mp()
    cost = (mpmath.factorial(m) / mpmath.mpf(2) ** (m * k - n) * mpmath.mpf(2) ** k
            * mpmath.mpf(n) ** (4 * model.omega))
    if model.variant == "default-f4":
        cost *= mpmath.mpf(m - 1) ** (4 * model.omega)
    return cost


def stage2_general(k: int, model: CostModel = CostModel()):
    _mp()
    return mpmath.mpf(2) ** (k * model.omega_sparse)


def pollard_cost(n: int):
    _mp()
    return mpmath.mpf(2) ** (mpmath.mpf(n) / 2)


# ---------------------------------------------------------------------------
# Optimal m and asymptotics
# ---------------------------------------------------------------------------

def optimal_m(n: int, model: CostModel = CostModel()) -> int:
    """Integer argmin over m of m! 2^{n/m}; the n^{4 omega} factor does not depend on m."""
    if n < 12:
        raise ValueError("optimal m is tabulated from n = 12 upward")
    _mp()
    best, best_cost = None, None
    for m in range(2, n):
        cost = mpmath.factorial(m) * mpmath.mpf(2) ** (mpmath.mpf(n) / m)
        if best_cost is None or cost < best_cost:
            best, best_cost = m, cost
    return best


def asymptotic_optimal_m(n: int) -> float:
    """m ~ sqrt((2 ln 2) n / ln n)."""
    _mp()
    return float(mpmath.sqrt(2 * mpmath.log(2) * n / mpmath.log(n)))


def asymptotic_constant(p: int = 2) -> float:
    """c = 2 / sqrt(2 ln p); p > 2 is display-only."""
    _mp()
    return float(2 / mpmath.sqrt(2 * mpmath.log(p)))


def asymptotic_cost(n: int, p: int = 2):
    """p^{c sqrt(n ln n)}."""
    _mp()
    return mpmath.mpf(p) ** (asymptotic_constant(p) * mpmath.sqrt(n * mpmath.log(n)))


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

@dataclass
class CostRow:
    n: int
    pollard: mpmath.mpf
    m: int
    stage1: mpmath.mpf
    stage2: mpmath.mpf

    @property
    def beats_pollard(self) -> bool:
        return self.stage1 < self.pollard


def cost_row(n: int, model: CostModel = CostModel()) -> CostRow:
    # the default-F4 variant keeps the block model's m
    m = optimal_m(n, CostModel(model.omega, model.omega_sparse))
    stage1, stage2 = stage_costs(n, m, model)
    return CostRow(n, pollard_cost(n), m, stage1, stage2)


def table3(model: CostModel = CostModel(), ns=TABLE3_NS) -> List[CostRow]:
    return [cost_row(n, model) for n in ns]


def crossover(model: CostModel = CostModel(), lo: Optional[int] = None, hi: Optional[int] = None) -> Optional[int]:
    """Smallest n in [lo, hi] whose first-stage cost drops below 2^{n/2}."""
    lo = lo or config.get("analysis.scan_min_n", 100)
    hi = hi or config.get("analysis.scan_max_n", 700)
    for n in range(lo, hi + 1):
        if cost_row(n, model).beats_pollard:
            logger.info(f"crossover at n={n} for omega={model.omega} variant={model.variant}")
            return n
    return None


def format_sci(value, digits: int = 3) -> str:
    """Three significant figures, e.g. 7.49e+31."""
    return f"{float(value):.{digits - 1}e}"


def k_for(n: int, m: int) -> int:
    return ceil(n / m)


def expected_step_count(r: int) -> float:
    """Mean rho iterations before a collision, sqrt(pi r / 4)."""
    _mp()
    return float(mpmath.sqrt(mpmath.pi * r / 4))


def binomial_band(p: float, trials: int, sigmas: float = 3.0) -> Tuple[float, float]:
    """p +- sigmas * sqrt(p(1-p)/trials), clipped to [0, 1]."""
    _mp()
    width = sigmas * float(mpmath.sqrt(p * (1 - p) / trials))
    return max(0.0, p - width), min(1.0, p + width)
