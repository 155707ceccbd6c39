import threading

from pyconic import logger
from pyconic.utils.util import persistent_hash


def stage_key(stage, *parts):
    """
    Key of a pipeline stage: the stage name and a persistent hash of everything it depends on.
    """
    return stage, persistent_hash(tuple(parts))


class Cache:
    """
    Stage values by key, each computed once. Access is locked, so sweep workers running in threads can share one
    cache.
    """

    def __init__(self):
        self._cache = {}
        self._lock = threading.RLock()
        self._hits = 0

    @property
    def hits(self):
        return self._hits

    def get_or_add(self, key, fn):
        """
        Value stored at key, computed by fn() and stored on the first request. The lock is held while fn runs so
        that concurrent requests compute a stage once.
        """
        with self._lock:
            if key in self._cache:
                self._hits += 1
                logger.debug("Cache hit for stage {}".format(key[0] if isinstance(key, tuple) else key))
                return self._cache[key]
            value = fn()
            self._cache[key] = value
            return value

    def __len__(self):
        return len(self._cache)

    def __str__(self):
        out = str(super(Cache, self).__str__()) + "["
        out += ",".join([str(k) for k in self._cache])
        out += "]"
        return out
