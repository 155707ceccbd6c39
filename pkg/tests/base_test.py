import os
import shutil
import tempfile
import unittest
from contextlib import contextmanager

import numpy as np


def mlflow_available(f):
    """
    Skip a test when the optional tracking backend isn't installed.
    """
    from pyconic.utils.util import is_package_available
    if not is_package_available("mlflow"):
        return unittest.skip("mlflow is not installed")(f)
    return f


class TempDir(object):
    """
    Output folder of a command run, removed on exit. With chdr the test runs inside of it.
    """

    def __init__(self, chdr=False, remove_on_exit=True):
        self._dir = None
        self._path = None
        self._chdr = chdr
        self._remove = remove_on_exit

    @property
    def path(self):
        return self._path

    def __enter__(self):
        self._path = os.path.abspath(tempfile.mkdtemp(prefix="pyconic-test-"))
        if self._chdr:
            self._dir = os.path.abspath(os.getcwd())
            os.chdir(self._path)
        return self

    def __exit__(self, tp, val, traceback):
        if self._chdr and self._dir:
            os.chdir(self._dir)
            self._dir = None
        if self._remove and os.path.exists(self._path):
            shutil.rmtree(self._path)


@contextmanager
def captured_messages(level="DEBUG"):
    """
    Collect the messages pyconic logs through loguru while the block runs.
    """
    from pyconic.conic_loguru import logger_manager
    messages = []
    lid = logger_manager.add(messages.append, format="{message}", level=level)
    try:
        yield messages
    finally:
        logger_manager.remove(lid)


class BaseTest(unittest.TestCase):

    def assertAllClose(self, actual, desired, atol=1e-12, rtol=0.0, msg=None):
        np.testing.assert_allclose(np.asarray(actual), np.asarray(desired), atol=atol, rtol=rtol,
                                   err_msg=msg or "")

    def assertLogged(self, messages, text):
        self.assertTrue(any(text in m for m in messages), "'{}' not in the log: {}".format(text, messages))
