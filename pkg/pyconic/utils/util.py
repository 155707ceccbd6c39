import functools
import hashlib
import operator
from typing import Tuple

import numpy as np

from pyconic import logger


def dict_merge(*dicts):
    """
    Simple merge of dicts. Nested dicts are merged, every other value is overwritten by the later dict.
    :param dicts:
    :return:
    """
    merged = {}
    for d in dicts:
        if isinstance(d, dict):
            for key, value in d.items():
                if isinstance(value, dict):
                    node = merged.setdefault(key, {})
                    merged[key] = dict_merge(node if isinstance(node, dict) else {}, value)
                else:
                    merged[key] = value
    return merged


def persistent_hash(to_hash, algorithm=hashlib.md5):
    """
    Produces a hash which is independant of the current runtime (No salt) unlike __hash__(). Arrays are hashed by
    their bytes, shape and dtype, tuples and lists element by element.
    :param to_hash:
    :param algorithm:
    :return:
    """

    def add_str(a, b):
        return operator.add(str(persistent_hash(a, algorithm)), str(persistent_hash(b, algorithm)))

    if isinstance(to_hash, (Tuple, list)):
        if len(to_hash) == 0:
            return persistent_hash("()", algorithm)
        if len(to_hash) == 1:
            return persistent_hash(add_str(to_hash[0], "()"), algorithm)
        return persistent_hash(functools.reduce(add_str, to_hash), algorithm)
    if isinstance(to_hash, dict):
        return persistent_hash(tuple((k, to_hash[k]) for k in sorted(to_hash, key=str)), algorithm)
    if isinstance(to_hash, np.ndarray):
        data = np.ascontiguousarray(to_hash).tobytes() + "{}{}".format(to_hash.shape, to_hash.dtype).encode("utf-8")
        return int(algorithm(data).hexdigest(), 16)
    if isinstance(to_hash, float):
        to_hash = repr(to_hash)
    return int(algorithm(str(to_hash).encode("utf-8")).hexdigest(), 16)


def is_package_available(name):
    """
    Check if given package is available.
    :param name: Name of the package
    :return:
    """
    import importlib.util
    try:
        spam_loader = importlib.util.find_spec(name)
    except (ImportError, ValueError) as e:
        logger.debug("Couldn't look up package {}: {}".format(name, e))
        spam_loader = None
    return spam_loader is not None


def find_package_version(name: str):
    try:
        import sys
        if name in sys.modules:
            base_package = sys.modules[name]
            if hasattr(base_package, "__version__"):
                return getattr(base_package, "__version__")
        from importlib.metadata import version
        return version(name)
    except Exception:
        logger.debug("Couldn't get version of package {}".format(name))
        return None
