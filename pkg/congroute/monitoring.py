# monitoring.py - Stage timings, resource snapshots and the invariant ledger for congroute
import logging
import time
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional

import psutil

from congroute.errors import InvariantViolation, RoutingError
from congroute.schemas import InvariantCheck, StageRecord

logger = logging.getLogger(__name__)


class StageMonitor:
    """Run-wide record of stages, invariant checks, retries and progress events"""

    def __init__(self, timings: bool = False):
        self.timings = timings
        self.stages: List[StageRecord] = []
        self.checks: List[InvariantCheck] = []
        self.retries: Dict[str, int] = {}
        self.events: List[Dict[str, Any]] = []
        self._process = psutil.Process() if timings else None

    def _rss_mb(self) -> Optional[float]:
        if self._process is None:
            return None
        try:
            return round(self._process.memory_info().rss / (1024**2), 2)
        except psutil.Error as e:
            logger.warning(f"Resource snapshot failed: {e}")
            return None

    @contextmanager
    def stage(self, name: str) -> Iterator[StageRecord]:
        """Log start/end of a stage; errors leaving the block get the stage tag"""
        logger.info(f"🚀 {name}")
        record = StageRecord(name=name, status="running")
        self.stages.append(record)
        started = time.perf_counter()
        try:
            yield record
        except RoutingError as e:
            record.status = "failed"
            logger.error(f"❌ {name}: {e.message}")
            raise e.with_stage(name)
        finally:
            if self.timings:
                record.seconds = round(time.perf_counter() - started, 6)
                record.rss_mb = self._rss_mb()
        record.status = "passed"
        logger.info(f"✅ {name}")

    def check(self, name: str, passed: bool, detail: str = "", stage: Optional[str] = None, hard: bool = True) -> bool:
        """Record an invariant; a failed hard check raises"""
        stage = stage or (self.stages[-1].name if self.stages else "run")
        self.checks.append(InvariantCheck(name=name, stage=stage, passed=bool(passed), detail=detail, hard=hard))
        if passed:
            return True
        if hard:
            raise InvariantViolation(f"{name} failed: {detail}", stage=stage)
        logger.warning(f"⚠️ {stage}: {name} failed (recorded only): {detail}")
        return False

    def retry(self, stage: str) -> int:
        self.retries[stage] = self.retries.get(stage, 0) + 1
        return self.retries[stage]

    def event(self, stage: str, **data: Any) -> None:
        self.events.append({"stage": stage, **data})
        logger.debug(f"{stage} event: {data}")

    @property
    def failed(self) -> List[InvariantCheck]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> Dict[str, Any]:
        return {
            "stages": len(self.stages),
            "checks": len(self.checks),
            "failed_checks": len(self.failed),
            "retries": dict(sorted(self.retries.items())),
        }


__all__ = ["StageMonitor"]
