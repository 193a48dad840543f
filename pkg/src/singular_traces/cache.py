"""
On-disk cache of trace tables. Files use the export format of the trace
command, so a cached table can also be passed around by hand.
"""

import re
from pathlib import Path
from typing import Optional, Union

from .exceptions import InvalidArgumentError
from .logging_config import get_logger
from .serialization import dump_json, load_json
from .traces import TraceTable

logger = get_logger(__name__)

_FILE_RE = re.compile(r"^(?P<form>.+)_p(?P<prec>\d+)_(?P<lo>-?\d+)_(?P<hi>-?\d+)\.json$")


def _sanitize(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", label).strip("-") or "form"


class TraceCache:
    """Trace tables keyed by (form, precision, index range)."""

    def __init__(self, cache_dir: Union[str, Path]):
        self.cache_dir = Path(cache_dir)

    def key(self, form: str, precision: int, lo: int, hi: int) -> str:
        return f"{_sanitize(form)}_p{precision}_{lo}_{hi}.json"

    def path(self, form: str, precision: int, lo: int, hi: int) -> Path:
        return self.cache_dir / self.key(form, precision, lo, hi)

    def _read(self, path: Path, form: str) -> Optional[TraceTable]:
        try:
            table = TraceTable.from_dict(load_json(path))
        except InvalidArgumentError as e:
            logger.warning("Ignoring unreadable cache file %s: %s", path, e)
            return None
        if table.form != form:
            logger.warning("Ignoring cache file %s: holds %s, not %s", path, table.form, form)
            return None
        return table

    def load(self, form: str, precision: int, lo: int, hi: int) -> Optional[TraceTable]:
        path = self.path(form, precision, lo, hi)
        logger.debug("Cache lookup %s", path)
        if not path.exists():
            return None
        table = self._read(path, form)
        if table is not None:
            logger.info("Cache hit for %s on %d..%d", form, lo, hi)
        return table

    def store(self, table: TraceTable, lo: int, hi: int) -> Path:
        path = self.path(table.form, table.precision, lo, hi)
        dump_json(table.to_dict(), path)
        logger.info("Cached trace table for %s at %s", table.form, path)
        return path

    def load_covering(
        self, form: str, precision: int, lo: int, hi: int
    ) -> Optional[TraceTable]:
        """Any cached table at this precision whose range contains lo..hi, restricted to it."""
        exact = self.load(form, precision, lo, hi)
        if exact is not None:
            return exact
        if not self.cache_dir.is_dir():
            return None
        prefix = _sanitize(form)
        for path in sorted(self.cache_dir.glob("*.json")):
            match = _FILE_RE.match(path.name)
            if not match or match.group("form") != prefix:
                continue
            if int(match.group("prec")) != precision:
                continue
            if int(match.group("lo")) > lo or int(match.group("hi")) < hi:
                continue
            table = self._read(path, form)
            if table is not None and table.covers(lo, hi):
                logger.info("Cache hit for %s on %d..%d via %s", form, lo, hi, path.name)
                return table.restricted(lo, hi)
        return None
