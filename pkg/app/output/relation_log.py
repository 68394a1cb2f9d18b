"""
Relation log: one line per relation,

    u v t x-list h2 coeffs

with u, v and the x-coordinates in hex, x-list comma separated, and coeffs
as comma separated `index:coefficient` pairs (`-` when empty). Replaying a
log re-verifies every relation with curve arithmetic.
"""
import logging
from typing import Iterable, List

from app.arithmetic.curve import SubgroupCtx
from app.errors import ConfigError, InvariantViolation
from app.index_calculus.decompose import FactorBase, Relation, verify_relation

logger = logging.getLogger(__name__)


def format_relation(rel: Relation) -> str:
    xs = ",".join(f"{x:#x}" for x in rel.xs) or "-"
    coeffs = ",".join(f"{i}:{c}" for i, c in sorted(rel.coeffs.items())) or "-"
    return f"{rel.u:#x} {rel.v:#x} {rel.t} {xs} {rel.h2} {coeffs}"


def parse_relation(line: str) -> Relation:
    parts = line.split()
    if len(parts) != 6:
        raise ConfigError(f"relation line needs 6 fields, got {len(parts)}: {line!r}")
    u, v, t, xs, h2, coeffs = parts
    try:
        xs_t = tuple(int(x, 16) for x in xs.split(",")) if xs != "-" else ()
        coeff_map = {}
        if coeffs != "-":
            for pair in coeffs.split(","):
                i, c = pair.split(":")
                coeff_map[int(i)] = int(c)
        return Relation(coeff_map, int(h2), int(u, 16), int(v, 16), int(t), xs_t)
    except ValueError as exc:
        raise ConfigError(f"malformed relation line {line!r}: {exc}") from exc


def write_relation_log(relations: Iterable[Relation]) -> str:
    return "".join(format_relation(rel) + "\n" for rel in relations)


def read_relation_log(text: str, sub: SubgroupCtx, fb: FactorBase) -> List[Relation]:
    relations = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rel = parse_relation(line)
        if any(i >= len(fb) for i in rel.coeffs):
            raise ConfigError(f"line {lineno}: factor-base index out of range")
        if not verify_relation(sub, fb, rel):
            raise InvariantViolation(f"line {lineno}: relation does not close")
        relations.append(rel)
    logger.info(f"replayed {len(relations)} relations")
    return relations
