"""
What the pipeline does with failed trials: count and log every one, and
write systems the solver could not settle below the degree cap to JSON
files so the run can be audited afterwards.
"""
import json
import logging
from collections import Counter
from pathlib import Path
from typing import List, Optional, Union

from app.config import config

logger = logging.getLogger(__name__)

FAILURE_KINDS = ("cap-exceeded", "error")


def persist_counterexample(payload: dict, directory: Optional[Union[str, Path]] = None,
                           name: Optional[str] = None) -> Path:
    directory = Path(directory or config.get("experiment.counterexample_dir", "counterexamples"))
    directory.mkdir(parents=True, exist_ok=True)
    context = payload.get("context", {})
    name = name or "counterexample_" + "_".join(f"{k}{v}" for k, v in sorted(context.items())) + ".json"
    path = directory / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    logger.warning(f"counterexample written to {path}")
    return path


class TrialErrorHandler:
    """Callback for per-trial outcomes; anything with .index, .kind, .error and .counterexample."""

    def __init__(self, directory: Optional[Union[str, Path]] = None, persist: bool = True):
        self.directory = directory
        self.persist = persist
        self.counts: Counter = Counter()
        self.saved: List[Path] = []
        self.messages: List[str] = []

    def __call__(self, outcome):
        self.counts[outcome.kind] += 1
        if outcome.kind not in FAILURE_KINDS:
            return
        message = f"trial {outcome.index}: {outcome.kind}: {outcome.error}"
        self.messages.append(message)
        logger.warning(message)
        if outcome.counterexample is not None and self.persist:
            payload = dict(outcome.counterexample)
            payload.setdefault("context", {})["trial"] = outcome.index
            self.saved.append(persist_counterexample(payload, self.directory))

    @property
    def failures(self) -> int:
        return sum(self.counts[kind] for kind in FAILURE_KINDS)

    @property
    def cap_exceeded(self) -> int:
        return self.counts["cap-exceeded"]

    def summary_lines(self) -> List[str]:
        lines = [f"  {kind}: {count}" for kind, count in sorted(self.counts.items())]
        lines.extend(f"  counterexample: {path}" for path in self.saved)
        return lines
