from typing import Any, Dict, List, Optional

from .base import BaseModel
from .diagnostics import CheckReport


# ScenarioReport is the summary document written at the end of every run.
#
# exit_code is 0 or the family of the first failure; code and message carry
# that failure. constants holds the empirical values the run measured.
class ScenarioReport(BaseModel):
    name: str
    exit_code: int = 0
    code: Optional[str] = None
    message: str = ""
    checks: List[CheckReport] = []
    constants: Dict[str, float] = {}
    records: int = 0
    final_t: float = 0.0
    stopped_early: bool = False
    config: Dict[str, Any] = {}

    def failed_checks(self) -> List[CheckReport]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> Optional[CheckReport]:
        return next((c for c in self.checks if c.name == name), None)
