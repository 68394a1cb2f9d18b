"""
End-of-run checks for `solve` and `experiment`.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from app.analysis.complexity import binomial_band
from app.arithmetic.curve import SubgroupCtx
from app.config import config
from app.index_calculus.decompose import FactorBase, Relation, verify_relation
from app.validation.base_validator import BaseValidator


@dataclass
class RunReport:
    sub: Optional[SubgroupCtx] = None
    fb: Optional[FactorBase] = None
    relations: List[Relation] = field(default_factory=list)
    z_index: Optional[int] = None
    z_rho: Optional[int] = None
    d_max: List[int] = field(default_factory=list)
    d_cap: int = 4
    cap_exceeded: int = 0
    successes: int = 0
    trials: int = 0
    probability: Optional[float] = None


class LogarithmValidator(BaseValidator):
    def applies(self, report: RunReport) -> bool:
        return report.sub is not None and report.z_index is not None

    def validate(self, report: RunReport) -> Dict:
        sub = report.sub
        ok = sub.curve.mul(report.z_index, sub.P) == sub.Q
        return self.result(ok, f"z = {report.z_index}: zP {'=' if ok else '!='} Q")


class RelationValidator(BaseValidator):
    def applies(self, report: RunReport) -> bool:
        return report.sub is not None and report.fb is not None and bool(report.relations)

    def validate(self, report: RunReport) -> Dict:
        bad = [i for i, rel in enumerate(report.relations) if not verify_relation(report.sub, report.fb, rel)]
        if bad:
            return self.result(False, f"{len(bad)} of {len(report.relations)} relations fail, first at row {bad[0]}")
        return self.result(True, f"all {len(report.relations)} relations close")


class PollardCrossValidator(BaseValidator):
    def applies(self, report: RunReport) -> bool:
        return report.z_index is not None and report.z_rho is not None

    def validate(self, report: RunReport) -> Dict:
        values = {"index calculus": report.z_index, "rho": report.z_rho}
        if report.sub is not None and report.sub.z_true is not None:
            values["planted"] = report.sub.z_true
        ok = len(set(values.values())) == 1
        return self.result(ok, ", ".join(f"{k}={v}" for k, v in values.items()))


class DegreeAuditValidator(BaseValidator):
    def applies(self, report: RunReport) -> bool:
        return bool(report.d_max) or report.cap_exceeded > 0

    def validate(self, report: RunReport) -> Dict:
        top = max(report.d_max, default=0)
        ok = top <= report.d_cap and report.cap_exceeded == 0
        return self.result(ok, f"d_max={top} over {len(report.d_max)} solves, cap={report.d_cap}, "
                               f"unresolved={report.cap_exceeded}")


class ProbabilityValidator(BaseValidator):
    exact = False

    def applies(self, report: RunReport) -> bool:
        return report.probability is not None and report.trials > 0

    def validate(self, report: RunReport) -> Dict:
        sigmas = config.get("validation.probability_sigma", 3)
        lo, hi = binomial_band(report.probability, report.trials, sigmas)
        rate = report.successes / report.trials
        ok = lo <= rate <= hi
        return self.result(ok, f"rate {rate:.2f} vs P={report.probability:.4f}, band [{lo:.3f}, {hi:.3f}]")
