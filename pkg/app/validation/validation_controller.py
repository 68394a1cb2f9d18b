from app.config import config
from app.validation.pipeline_validators import (
    DegreeAuditValidator,
    LogarithmValidator,
    PollardCrossValidator,
    ProbabilityValidator,
    RelationValidator,
    RunReport,
)


class ValidationController:
    def __init__(self, strict_mode=None, skip_validators=None):
        self.skip_validators = skip_validators or []

        # Get validation settings from config
        self.validation_config = config.get("validation", {})
        if strict_mode is None:
            strict_mode = self.validation_config.get("strict_mode", True)
        self.strict_mode = strict_mode

        self.validators = [
            LogarithmValidator(),
            RelationValidator(),
            PollardCrossValidator(),
            DegreeAuditValidator(),
            ProbabilityValidator(),
        ]

    def run_all(self, report: RunReport) -> dict:
        results = []
        matrix = []

        for validator in self.validators:
            if validator.name in self.skip_validators or not validator.applies(report):
                continue

            result = validator.validate(report)
            result["exact"] = validator.exact
            results.append(result)
            matrix.append({
                "validator": result["name"],
                "passed": result["passed"],
                "details": result["details"],
            })

        if self.strict_mode:
            overall_passed = all(r["passed"] for r in results)
        else:
            # statistical checks only warn outside strict mode
            overall_passed = all(r["passed"] for r in results if r["exact"])

        return {
            "overall_passed": overall_passed,
            "results": results,
            "matrix": matrix,
            "strict_mode": self.strict_mode,
        }
