from dataclasses import replace

import pytest

from app.algebra.descent import SubspaceV
from app.index_calculus.decompose import FactorBase, collect
from app.validation.base_validator import BaseValidator
from app.validation.pipeline_validators import (
    DegreeAuditValidator,
    LogarithmValidator,
    PollardCrossValidator,
    ProbabilityValidator,
    RelationValidator,
    RunReport,
)
from app.validation.validation_controller import ValidationController


@pytest.fixture(scope="module")
def solved_report(instance8):
    V = SubspaceV.low_degree(instance8.curve.ctx, 4)
    fb = FactorBase.build(instance8.curve, V)
    relations = collect(instance8, fb, 2, V, 5, seed=7).relations
    z = instance8.z_true
    return RunReport(sub=instance8, fb=fb, relations=relations, z_index=z, z_rho=z, d_max=[2, 3])


def test_base_validator_is_abstract():
    with pytest.raises(NotImplementedError):
        BaseValidator().validate(RunReport())


def test_all_checks_pass(solved_report):
    report = ValidationController().run_all(solved_report)
    assert report["overall_passed"]
    names = [row["validator"] for row in report["matrix"]]
    assert names == ["LogarithmValidator", "RelationValidator", "PollardCrossValidator", "DegreeAuditValidator"]


def test_wrong_logarithm(solved_report, instance8):
    bad = replace(solved_report, z_index=(instance8.z_true + 1) % instance8.r)
    assert not LogarithmValidator().validate(bad)["passed"]
    assert not PollardCrossValidator().validate(bad)["passed"]


def test_broken_relation(solved_report, instance8):
    rel = solved_report.relations[0]
    broken = replace(rel, v=(rel.v + 1) % instance8.r)
    result = RelationValidator().validate(replace(solved_report, relations=[broken] + solved_report.relations))
    assert not result["passed"]
    assert "first at row 0" in result["details"]


def test_degree_audit():
    assert DegreeAuditValidator().validate(RunReport(d_max=[3, 4], d_cap=4))["passed"]
    assert not DegreeAuditValidator().validate(RunReport(d_max=[3], d_cap=4, cap_exceeded=1))["passed"]
    assert not DegreeAuditValidator().applies(RunReport())


def test_probability_band():
    inside = RunReport(successes=40, trials=100, probability=0.3934)
    outside = RunReport(successes=90, trials=100, probability=0.3934)
    assert ProbabilityValidator().validate(inside)["passed"]
    assert not ProbabilityValidator().validate(outside)["passed"]


def test_strict_and_lenient_modes():
    report = RunReport(d_max=[2], successes=90, trials=100, probability=0.3934)
    assert not ValidationController(strict_mode=True).run_all(report)["overall_passed"]
    lenient = ValidationController(strict_mode=False).run_all(report)
    assert lenient["overall_passed"]
    assert not lenient["strict_mode"]


def test_skip_validators(solved_report):
    report = ValidationController(skip_validators=["PollardCrossValidator"]).run_all(solved_report)
    assert "PollardCrossValidator" not in [row["validator"] for row in report["matrix"]]
