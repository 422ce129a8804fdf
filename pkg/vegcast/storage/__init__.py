from .stage_store import StageStore, content_key, fingerprint_files
from .stage_cache import StageCache
