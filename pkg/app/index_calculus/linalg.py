"""
Linear algebra on collected relations.

Kernel vectors are taken modulo the full group order N, since relations
hold in E(F_q) and not only in <P>. The order-2 column is scaled by N/2 so
that it vanishes mod N exactly when the H multiplicities cancel mod 2.
"""
import logging
import random
from dataclasses import dataclass
from math import gcd
from typing import List, Optional, Sequence, Tuple

from sympy import factorint
from sympy.ntheory.modular import crt

from app.arithmetic.curve import SubgroupCtx
from app.errors import DegenerateB, InvariantViolation, NoKernel
from app.index_calculus.decompose import FactorBase, Relation

logger = logging.getLogger(__name__)


@dataclass
class RelationMatrix:
    relations: List[Relation]
    width: int
    modulus: int

    @classmethod
    def build(cls, relations: Sequence[Relation], fb: FactorBase, N: int) -> "RelationMatrix":
        if N % 2:
            raise ValueError("group order of a curve with an order-2 point must be even")
        return cls(list(relations), fb.width, N)

    def rows(self) -> List[List[int]]:
        N = self.modulus
        h_col = self.width - 1
        out = []
        for rel in self.relations:
            row = [0] * self.width
            for i, c in rel.coeffs.items():
                row[i] = c % N
            row[h_col] = (rel.h2 % 2) * (N // 2)
            out.append(row)
        return out

    @property
    def scalars(self) -> List[Tuple[int, int]]:
        return [(rel.u, rel.v) for rel in self.relations]

    def apply(self, lam: Sequence[int]) -> List[int]:
        """lam^T * columns mod N."""
        N = self.modulus
        totals = [0] * self.width
        for coef, row in zip(lam, self.rows()):
            if coef:
                for j, value in enumerate(row):
                    totals[j] = (totals[j] + coef * value) % N
        return totals

    def dump(self) -> str:
        """Coordinate text format: header with the modulus, then `row col value`."""
        lines = [f"% modulus {self.modulus} rows {len(self.relations)} cols {self.width}"]
        for r, row in enumerate(self.rows()):
            for c, value in enumerate(row):
                if value:
                    lines.append(f"{r} {c} {value}")
        return "\n".join(lines) + "\n"


def _prune_singletons(rows: List[List[int]], alive: List[int], M: int) -> List[int]:
    """Drop rows that alone hit a column with a unit entry; they are in no kernel vector."""
    alive = list(alive)
    changed = True
    while changed:
        changed = False
        width = len(rows[0]) if rows else 0
        for c in range(width):
            hits = [i for i in alive if rows[i][c] % M]
            if len(hits) == 1 and gcd(rows[hits[0]][c], M) == 1:
                alive.remove(hits[0])
                changed = True
    return alive


def _split(M: int, g: int) -> Tuple[int, int]:
    """M = M1*M2 coprime, M1 made of the primes of g."""
    rest = M
    h = gcd(rest, g)
    while h > 1:
        rest //= h
        h = gcd(rest, h)
    return M // rest, rest


def _valuation(a: int, p: int) -> int:
    v = 0
    while a and a % p == 0:
        a //= p
        v += 1
    return v


def _eliminate(rows: List[List[int]], alive: List[int], M: int) -> List[List[int]]:
    """
    Left kernel of the alive rows mod M, as vectors over all row indices.
    Pivots must be units; a column without one either splits M or, for a
    prime power, pivots on the entry of least valuation.
    """
    n = len(rows)
    work = {i: [x % M for x in rows[i]] for i in alive}
    comb = {i: {i: 1} for i in alive}
    remaining = list(alive)
    width = len(rows[0]) if rows else 0
    prime_power = None

    for c in range(width):
        candidates = [i for i in remaining if work[i][c]]
        if not candidates:
            continue
        pivot = next((i for i in candidates if gcd(work[i][c], M) == 1), None)
        if pivot is None:
            g = gcd(work[candidates[0]][c], M)
            M1, M2 = _split(M, g)
            if M2 > 1:
                logger.debug(f"zero-divisor pivot exposes {M} = {M1} * {M2}")
                return _combine(_eliminate(rows, alive, M1), M1, _eliminate(rows, alive, M2), M2)
            if prime_power is None:
                factors = factorint(M)
                if len(factors) > 1:
                    p, e = next(iter(factors.items()))
                    M1 = p ** e
                    return _combine(_eliminate(rows, alive, M1), M1,
                                    _eliminate(rows, alive, M // M1), M // M1)
                prime_power = next(iter(factors))
            pivot = min(candidates, key=lambda i: _valuation(work[i][c], prime_power))
        remaining.remove(pivot)
        prow, pcomb = work[pivot], comb[pivot]
        a = prow[c]
        if gcd(a, M) == 1:
            inv = pow(a, -1, M)
            scale = lambda x: x * inv % M
        else:
            p_v = prime_power ** _valuation(a, prime_power)
            inv = pow(a // p_v, -1, M)
            scale = lambda x: (x // p_v) * inv % M
        for i in remaining:
            x = work[i][c]
            if not x:
                continue
            f = scale(x)
            work[i] = [(xi - f * pi) % M for xi, pi in zip(work[i], prow)]
            ci = comb[i]
            for j, v in pcomb.items():
                ci[j] = (ci.get(j, 0) - f * v) % M

    kernel = []
    for i in remaining:
        vec = [0] * n
        for j, v in comb[i].items():
            vec[j] = v % M
        if any(vec):
            kernel.append(vec)
    return kernel


def _combine(k1: List[List[int]], M1: int, k2: List[List[int]], M2: int) -> List[List[int]]:
    """
    Kernel mod M1*M2 from kernels mod each factor: paired vectors first, then
    every vector against zero on the other factor, so neither side is lost
    when the other has no kernel.
    """
    if not k1 and not k2:
        return []
    zero = [0] * len((k1 or k2)[0])
    lift = lambda a, b: [int(crt([M1, M2], [x, y])[0]) for x, y in zip(a, b)]
    out = [lift(a, b) for a, b in zip(k1, k2)]
    out.extend(lift(a, zero) for a in k1)
    out.extend(lift(zero, b) for b in k2)
    return [vec for vec in out if any(vec)]


def kernel_vectors(M: RelationMatrix) -> List[List[int]]:
    rows = M.rows()
    if not rows:
        raise NoKernel("no relations")
    alive = _prune_singletons(rows, list(range(len(rows))), M.modulus)
    logger.debug(f"structured pass kept {len(alive)} of {len(rows)} rows")
    kernel = [vec for vec in _eliminate(rows, alive, M.modulus) if not any(M.apply(vec))]
    if not kernel:
        raise NoKernel(f"no kernel vector among {len(rows)} relations of width {M.width}")
    logger.info(f"{len(kernel)} kernel vectors mod {M.modulus}")
    return kernel


def kernel_vector(M: RelationMatrix) -> List[int]:
    return kernel_vectors(M)[0]


def verify_identity(lam: Sequence[int], M: RelationMatrix, sub: SubgroupCtx, fb: FactorBase) -> bool:
    """sum_j lam_j (relation point sum) = infinity, with exact curve arithmetic."""
    curve = sub.curve
    N = M.modulus
    fb_coeffs = M.apply(lam)
    total = curve.sum(curve.mul(fb_coeffs[i], P) for i, P in enumerate(fb.points) if fb_coeffs[i])
    h2 = sum(c * rel.h2 for c, rel in zip(lam, M.relations)) % 2
    if h2:
        total = curve.add(total, fb.H)
    a = sum(c * rel.u for c, rel in zip(lam, M.relations)) % N
    b = sum(c * rel.v for c, rel in zip(lam, M.relations)) % N
    total = curve.add(total, curve.add(curve.mul(a, sub.P), curve.mul(b, sub.Q)))
    return total.is_infinity


def extract_log(lam: Sequence[int], M: RelationMatrix, r: int) -> int:
    """a + b*z = 0 mod r with a = sum lam_j u_j, b = sum lam_j v_j."""
    a = sum(c * u for c, (u, _) in zip(lam, M.scalars)) % r
    b = sum(c * v for c, (_, v) in zip(lam, M.scalars)) % r
    if b == 0:
        raise DegenerateB("b = 0 mod r; another kernel vector is needed")
    return (-a * pow(b, -1, r)) % r


def solve_log(sub: SubgroupCtx, fb: FactorBase, relations: Sequence[Relation],
              rng: Optional[random.Random] = None, attempts: int = 32) -> int:
    """Kernel vectors first, then random combinations of them, until b is invertible."""
    M = RelationMatrix.build(relations, fb, sub.N)
    kernel = kernel_vectors(M)
    rng = rng or random.Random(len(relations))
    candidates = list(kernel)
    for _ in range(attempts):
        if len(kernel) > 1:
            weights = [rng.randrange(M.modulus) for _ in kernel]
            candidates.append([sum(w * vec[j] for w, vec in zip(weights, kernel)) % M.modulus
                               for j in range(len(relations))])
    for lam in candidates:
        if not any(lam):
            continue
        if not verify_identity(lam, M, sub, fb):
            raise InvariantViolation("kernel vector fails the point identity")
        try:
            z = extract_log(lam, M, sub.r)
        except DegenerateB:
            logger.debug("degenerate b; trying the next kernel vector")
            continue
        if sub.curve.mul(z, sub.P) != sub.Q:
            raise InvariantViolation(f"z = {z} does not satisfy zP = Q")
        return z
    raise DegenerateB(f"every kernel vector gave b = 0 mod {sub.r}")
