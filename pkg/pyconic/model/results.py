import math
import time
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from pyconic import __version__, logger
from pyconic.utils.logging_util import FileFormats, jsonable, store_artifact
from pyconic.variables import REPORT_NAME


class EpsilonReport(BaseModel):
    """
    Outcome of one eps entry: reference and ansatz mode masses at the final time, the masses predicted by the
    transfer, the errors per snapshot time and the timings of the stages.
    """
    epsilon: float
    times: List[float] = []
    l2_errors: List[float] = []
    sigma1_errors: List[float] = []
    reference_masses: Dict[str, float] = {}
    ansatz_masses: Dict[str, float] = {}
    predicted_masses: Dict[str, float] = {}
    metadata: Dict[str, Any] = {}
    timings: Dict[str, float] = {}
    flags: List[str] = []

    @property
    def final_error(self):
        return self.l2_errors[-1] if self.l2_errors else math.nan


class RunReport(BaseModel):
    """
    Summary written to report.json at the end of every command. Any entry in `flags` marks a failed run.
    """
    command: str
    kind: str
    version: str = __version__
    config: Dict[str, Any] = {}
    entries: List[EpsilonReport] = []
    crossing: Optional[Dict[str, Any]] = None
    summary: Dict[str, Any] = {}
    files: List[str] = []
    flags: List[str] = []
    timings: Dict[str, float] = {}
    started: float = Field(default_factory=time.time)

    @property
    def failed(self):
        return bool(self.flags) or any(entry.flags for entry in self.entries)

    def flag(self, name, message):
        logger.warning(message)
        if name not in self.flags:
            self.flags.append(name)

    def add_file(self, path):
        if path not in self.files:
            self.files.append(path)
        return path

    def metrics(self) -> Dict[str, float]:
        """
        Finite numbers of the summary.
        """
        out = {}
        for key, value in self.summary.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                continue
            if math.isfinite(value):
                out[key] = float(value)
        return out

    def write(self, folder):
        self.timings["total"] = time.time() - self.started
        path = store_artifact(folder, REPORT_NAME, jsonable(self.dict()), FileFormats.json)
        logger.info("Wrote report {}".format(path))
        return path
