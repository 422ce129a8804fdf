import logging
import os
import threading

from cachetools import LRUCache

from vegcast.core import ForecastRecord, WeeklySeries
from vegcast.evaluate import read_records, write_records
from vegcast.gp import GPModel, load_model, save_model
from vegcast.ingest import read_regional_series, write_regional_series

from .stage_store import StageStore

logger = logging.getLogger(__name__)


class StageCache(StageStore):
    """
    On-disk cache of stage outputs keyed by content hash.

    Regional series maps are stored in the regional CSV format, forecast
    records as record CSV and fitted GP models as model JSON, one file per key.
    A small LRU cache in front of the files serves repeated reads within a run.
    """

    SERIES_SUFFIX = ".series.csv"
    RECORDS_SUFFIX = ".records.csv"
    MODEL_SUFFIX = ".gp.json"

    def __init__(self, path: str, maxsize: int = 64):
        super().__init__(path)
        self.cache = LRUCache(maxsize=maxsize)
        self.keys = set()
        self._keys_name = "keys.txt"
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()
        self.load()

    def load(self):
        try:
            with open(os.path.join(self.path, self._keys_name), "r", encoding="utf-8") as f:
                self.keys = set(f.read().splitlines())
        except FileNotFoundError:
            pass
        # drop keys whose files were removed by hand
        self.keys = {k for k in self.keys if self._existing_filename(k) is not None}

    def save(self):
        with open(os.path.join(self.path, self._keys_name), "w", encoding="utf-8") as f:
            f.write("\n".join(sorted(self.keys)))

    def get(self, key: str):
        with self._lock:
            return self._get(key)

    def _get(self, key: str):
        if key not in self.keys:
            self.misses += 1
            return None
        if key in self.cache:
            self.hits += 1
            return self.cache[key]

        filename = self._existing_filename(key)
        if filename is None:
            self.keys.discard(key)
            self.misses += 1
            return None
        if filename.endswith(self.SERIES_SUFFIX):
            value = read_regional_series(filename)
        elif filename.endswith(self.MODEL_SUFFIX):
            value = load_model(filename)
        else:
            value = read_records(filename)
        self.cache[key] = value
        self.hits += 1
        logger.debug("stage cache hit %s", key)
        return value

    def set(self, key: str, value):
        """
        Store a ``dict[str, WeeklySeries]``, a ``list[ForecastRecord]`` or a ``GPModel``.
        """
        if isinstance(value, dict) and all(isinstance(v, WeeklySeries) for v in value.values()):
            write_regional_series(value, self._filename(key, self.SERIES_SUFFIX))
        elif isinstance(value, list) and all(isinstance(v, ForecastRecord) for v in value):
            write_records(value, self._filename(key, self.RECORDS_SUFFIX))
        elif isinstance(value, GPModel):
            save_model(value, self._filename(key, self.MODEL_SUFFIX))
        else:
            raise TypeError(f"cannot cache a {type(value).__name__}")
        with self._lock:
            self.keys.add(key)
            self.cache[key] = value
            self.save()

    def delete(self, key: str):
        with self._lock:
            self.keys.discard(key)
            self.cache.pop(key, None)
            filename = self._existing_filename(key)
            if filename is not None:
                os.remove(filename)
            self.save()

    def _filename(self, key: str, suffix: str) -> str:
        return os.path.join(self.path, key + suffix)

    def _existing_filename(self, key: str) -> str | None:
        for suffix in (self.SERIES_SUFFIX, self.RECORDS_SUFFIX, self.MODEL_SUFFIX):
            filename = self._filename(key, suffix)
            if os.path.exists(filename):
                return filename
        return None

    def __len__(self):
        return len(self.keys)

    def __contains__(self, key: str) -> bool:
        return key in self.keys
