"""
Discrete-log instance files in `key = value` form. Keys: n, f, A, B, P.x,
P.y, Q.x, Q.y, r, N and an optional planted logarithm z; field elements
are written in hex.
"""
from pathlib import Path
from typing import Union

from app.arithmetic.curve import BinaryCurve, Point, SubgroupCtx
from app.arithmetic.field import BinaryFieldCtx, FieldElement
from app.errors import ConfigError
from app.input.config_file import parse_key_values

REQUIRED_KEYS = ("n", "f", "A", "B", "P.x", "P.y", "Q.x", "Q.y", "r", "N")


def format_instance(sub: SubgroupCtx) -> str:
    curve = sub.curve
    lines = [
        f"n = {curve.ctx.n}",
        f"f = {curve.ctx.f:#x}",
        f"A = {curve.A.bits:#x}",
        f"B = {curve.B.bits:#x}",
        f"P.x = {sub.P.x.bits:#x}",
        f"P.y = {sub.P.y.bits:#x}",
        f"Q.x = {sub.Q.x.bits:#x}",
        f"Q.y = {sub.Q.y.bits:#x}",
        f"r = {sub.r}",
        f"N = {sub.N}",
    ]
    if sub.z_true is not None:
        lines.append(f"z = {sub.z_true}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> SubgroupCtx:
    values = parse_key_values(text)
    missing = [key for key in REQUIRED_KEYS if key not in values]
    if missing:
        raise ConfigError(f"instance is missing {', '.join(missing)}")
    try:
        ints = {key: int(value, 0) for key, value in values.items()}
    except ValueError as exc:
        raise ConfigError(f"instance value is not an integer: {exc}") from exc

    ctx = BinaryFieldCtx(ints["n"], ints["f"])
    elem = lambda key: FieldElement(ctx, ints[key])
    curve = BinaryCurve(ctx, elem("A"), elem("B"))
    P = Point(elem("P.x"), elem("P.y"))
    Q = Point(elem("Q.x"), elem("Q.y"))
    for name, point in (("P", P), ("Q", Q)):
        if not curve.contains(point):
            raise ConfigError(f"{name} is not on the curve")
    if not curve.mul(ints["r"], P).is_infinity:
        raise ConfigError("r*P is not the point at infinity")
    return SubgroupCtx(curve=curve, P=P, r=ints["r"], N=ints["N"], Q=Q, z_true=ints.get("z"))


def save_instance(sub: SubgroupCtx, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_instance(sub), encoding="utf-8")
    return path


def load_instance(path: Union[str, Path]) -> SubgroupCtx:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"instance file not found: {path}")
    return parse_instance(path.read_text(encoding="utf-8"))
