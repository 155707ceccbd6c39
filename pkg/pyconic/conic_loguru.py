import sys

from loguru import logger as log

logger = log


class LoggerManager:
    """
    Class to manage loguru handlers for pyconic. Loguru doesn't give an api to query already existing handlers,
    therefore we keep a history ourselves. Worker pools (joblib) need the handlers out of the way while they run,
    so handlers can be removed temporarily and restored from that history afterwards.
    """

    def __init__(self):
        # remove preconfigured handler
        try:
            logger.remove(0)
        except ValueError as e:
            logger.debug(e)
        self._add_history = {}
        self._removed = {}
        self._aliases = {}

    def add_default_logger(self, level="INFO"):
        return self.add(sys.stdout, filter="pyconic", level=level, colorize=True)

    def add(self, *args, **kwargs):
        lid = logger.add(*args, **kwargs)
        self._add_history[lid] = (args, kwargs)
        return lid

    def temporary_remove(self):
        for lid in list(self._add_history):
            self._removed[lid] = self._add_history[lid]
            self.remove(lid)

    def add_loggers_from_history(self):
        for lid in list(self._removed):
            args, kwargs = self._removed.pop(lid)
            # callers keep the id they got from add
            self._aliases[lid] = self.add(*args, **kwargs)

    def remove(self, lid=None):
        if lid is not None:
            while lid in self._aliases:
                lid = self._aliases.pop(lid)
            try:
                logger.remove(lid)
            except ValueError:
                pass
            self._add_history.pop(lid, None)
        else:
            logger.remove()
            self._add_history = {}
            self._aliases = {}


logger_manager = LoggerManager()
