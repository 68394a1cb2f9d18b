from typing import Dict


class BaseValidator:
    # exact checks always gate the run; statistical ones only in strict mode
    exact = True

    @property
    def name(self) -> str:
        return self.__class__.__name__

    def applies(self, report) -> bool:
        return True

    def validate(self, report) -> Dict:
        """
        Check one aspect of a finished run.
        Returns a dict with at least: { 'name': str, 'passed': bool, 'details': str }
        """
        raise NotImplementedError("Subclasses must implement the validate method.")

    def result(self, passed: bool, details: str) -> Dict:
        return {"name": self.name, "passed": bool(passed), "details": details}
