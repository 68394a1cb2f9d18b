"""
Pollard rho in <P> with an additive walk and Brent cycle detection.
"""
import logging
import random
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass
from math import gcd
from typing import List, Optional, Sequence, Tuple

from app.arithmetic.curve import Point, SubgroupCtx
from app.config import config
from app.errors import BudgetExhausted, InvariantViolation

logger = logging.getLogger(__name__)


@dataclass
class WalkState:
    point: Point
    a: int
    b: int


@dataclass
class RhoResult:
    z: int
    steps: int
    restarts: int


def _partition(P: Point, partitions: int) -> int:
    if P.is_infinity:
        return 0
    return ((P.x.bits * 0x9E3779B97F4A7C15) >> 11) % partitions


class AdditiveWalk:
    """X -> X + R_j with R_j = a_j P + b_j Q, j chosen by a hash of X."""

    def __init__(self, sub: SubgroupCtx, rng: random.Random, partitions: int):
        self.sub = sub
        self.partitions = partitions
        curve = sub.curve
        self.offsets: List[Tuple[Point, int, int]] = []
        for _ in range(partitions):
            a, b = rng.randrange(sub.r), rng.randrange(sub.r)
            self.offsets.append((curve.add(curve.mul(a, sub.P), curve.mul(b, sub.Q)), a, b))

    def start(self, rng: random.Random) -> WalkState:
        a, b = rng.randrange(self.sub.r), rng.randrange(self.sub.r)
        return WalkState(self._combine(a, b), a, b)

    def _combine(self, a: int, b: int) -> Point:
        curve = self.sub.curve
        return curve.add(curve.mul(a, self.sub.P), curve.mul(b, self.sub.Q))

    def step(self, state: WalkState) -> WalkState:
        R, a, b = self.offsets[_partition(state.point, self.partitions)]
        r = self.sub.r
        return WalkState(self.sub.curve.add(state.point, R), (state.a + a) % r, (state.b + b) % r)

    def check(self, state: WalkState):
        if self._combine(state.a, state.b) != state.point:
            raise InvariantViolation(f"walk left aP + bQ at a={state.a} b={state.b}")


def rho_walk(sub: SubgroupCtx, rng: random.Random) -> RhoResult:
    partitions = config.get("pollard.partitions", 16)
    check_every = config.get("pollard.check_every", 1024)
    max_restarts = config.get("pollard.max_restarts", 64)
    r = sub.r
    steps = 0

    for restart in range(max_restarts):
        walk = AdditiveWalk(sub, rng, partitions)
        tortoise = walk.start(rng)
        hare = walk.step(tortoise)
        steps += 1
        power = lam = 1
        while hare.point != tortoise.point:
            if power == lam:
                tortoise = hare
                power *= 2
                lam = 0
            hare = walk.step(hare)
            lam += 1
            steps += 1
            if steps % check_every == 0:
                walk.check(hare)

        db = (tortoise.b - hare.b) % r
        if gcd(db, r) != 1:
            logger.debug(f"degenerate collision after {steps} steps; restarting")
            continue
        z = (hare.a - tortoise.a) * pow(db, -1, r) % r
        if sub.curve.mul(z, sub.P) != sub.Q:
            raise InvariantViolation(f"rho produced z = {z} with zP != Q")
        logger.debug(f"rho: z={z} after {steps} steps, {restart} restarts")
        return RhoResult(z, steps, restart)

    raise BudgetExhausted(f"rho gave only degenerate collisions in {max_restarts} walks")


def rho_solve(sub: SubgroupCtx, rng: random.Random) -> int:
    return rho_walk(sub, rng).z


def _seeded_walk(args) -> RhoResult:
    sub, seed = args
    return rho_walk(sub, random.Random(seed))


def rho_solve_parallel(sub: SubgroupCtx, seeds: Sequence[int], workers: Optional[int] = None) -> int:
    """Independent walks with distinct seeds; the first to finish wins."""
    workers = workers or config.get("experiment.workers", 1)
    if workers <= 1:
        return _seeded_walk((sub, seeds[0])).z
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending = {pool.submit(_seeded_walk, (sub, seed)) for seed in seeds}
        done, pending = wait(pending, return_when=FIRST_COMPLETED)
        for future in pending:
            future.cancel()
        return next(iter(done)).result().z
