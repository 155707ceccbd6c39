import json
import os
import threading
from enum import Enum
from pathlib import PurePath
from typing import Dict, List, Mapping, Sequence

import numpy as np
from pydantic import BaseModel

from pyconic import logger
from pyconic.exceptions import ConicValidationError

CSV_FLOAT_FORMAT = "%.17g"
BINARY_DTYPE = "<c16"

_path_locks: Dict[str, threading.Lock] = {}
_path_locks_guard = threading.Lock()


def path_lock(path) -> threading.Lock:
    """
    One lock per output path, writers to the same file are serialized.
    """
    key = os.path.abspath(str(path))
    with _path_locks_guard:
        return _path_locks.setdefault(key, threading.Lock())


def get_by_value_in_enum(value, enum):
    for k, v in enum.__members__.items():
        if v.value == value:
            return v
    return None


class FileFormats(Enum):
    csv = 'csv'
    json = 'json'
    bin = 'bin'
    text = 'txt'


def find_file_format(file_name):
    name_split = file_name.rsplit(".", 1)
    if len(name_split) == 2:
        return get_by_value_in_enum(name_split[1], FileFormats)
    return None


def jsonable(obj):
    """
    Plain python version of numpy values, enums, pydantic models and complex numbers ([re, im]).
    """
    if isinstance(obj, BaseModel):
        return jsonable(obj.dict())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, PurePath):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def csv_columns(rows: Sequence[Mapping[str, float]]) -> List[str]:
    columns = list(rows[0].keys())
    for row in rows[1:]:
        if list(row.keys()) != columns:
            raise ConicValidationError("CSV rows have to share their columns, got {} and {}.".format(
                columns, list(row.keys())))
    return columns


def write_csv(p, o):
    """
    Write rows (mappings column -> number) with a header row and 17 significant digits.
    """
    rows = list(o)
    if not rows:
        raise ConicValidationError("Nothing to write to {}.csv.".format(p))
    columns = csv_columns(rows)
    table = np.array([[float(row[c]) for c in columns] for row in rows], dtype=float)
    with path_lock(p + ".csv"):
        with open(p + ".csv", "w", newline="") as fd:
            np.savetxt(fd, table, fmt=CSV_FLOAT_FORMAT, delimiter=",", header=",".join(columns), comments="",
                       newline="\n")
            return fd.name


def write_json(p, o):
    with path_lock(p + ".json"):
        with open(p + ".json", "w") as fd:
            json.dump(jsonable(o), fd, sort_keys=True, indent=2)
            fd.write("\n")
            return fd.name


def write_text(p, o):
    with path_lock(p + ".txt"):
        with open(p + ".txt", "w") as fd:
            fd.write(str(o))
            return fd.name


def write_bin(p, o):
    """
    Dump the samples of a field or profile as little-endian float64 (re, im) pairs in row-major order, with the
    grid description in a json sidecar next to it.
    """
    values = np.ascontiguousarray(o.values, dtype=BINARY_DTYPE)
    with path_lock(p + ".bin"):
        with open(p + ".bin", "wb") as fd:
            fd.write(values.tobytes(order="C"))
            name = fd.name
    write_json(p, o.sidecar())
    return name


def read_csv(p) -> Dict[str, np.ndarray]:
    with open(p, "r") as fd:
        columns = fd.readline().strip().split(",")
    table = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
    return {c: table[:, i] for i, c in enumerate(columns)}


def read_json(p):
    try:
        with open(p, "r") as fd:
            return json.load(fd)
    except FileNotFoundError:
        return None


def read_text(p):
    with open(p, "r") as fd:
        return fd.read()


def read_bin(p):
    """
    :return: (values, sidecar) with values shaped (2, N, ..., N) for fields and (N, ..., N) for profiles
    """
    sidecar = read_json(p.rsplit(".", 1)[0] + ".json")
    if sidecar is None:
        raise ConicValidationError("Binary dump {} has no sidecar.".format(p))
    shape = (sidecar["N"],) * sidecar["dims"]
    if sidecar.get("components", 1) == 2:
        shape = (2,) + shape
    values = np.fromfile(p, dtype=BINARY_DTYPE).reshape(shape)
    return values.astype(complex), sidecar


writers = {
    FileFormats.csv: write_csv,
    FileFormats.json: write_json,
    FileFormats.bin: write_bin,
    FileFormats.text: write_text,
}

readers = {
    FileFormats.csv: read_csv,
    FileFormats.json: read_json,
    FileFormats.bin: read_bin,
    FileFormats.text: read_text,
}


def store_artifact(folder, file_name, obj, write_format: FileFormats):
    """
    Stores an artifact to the output folder.
    :param folder: Output folder, created if missing
    :param file_name: Name for the file without extension
    :param obj: Object in memory to store to disk
    :param write_format: Format to store the object in
    :return: Path to the stored artifact
    """
    if isinstance(write_format, str):
        if write_format not in FileFormats.__members__:
            raise ConicValidationError("Write format {} is not supported.".format(write_format))
        write_format = FileFormats[write_format]
    os.makedirs(folder, exist_ok=True)
    path = writers[write_format](os.path.join(folder, file_name), obj)
    logger.debug("Wrote {}".format(path))
    return path


def read_artifact(path, read_format: FileFormats = None):
    if read_format is None:
        read_format = find_file_format(path)
        if not read_format:
            raise ConicValidationError("Can't infer the format of {}.".format(path))
    return readers[read_format](path)
