import argparse
import ast
import configparser
import os
import re
from typing import Dict, Optional, Tuple

from pyconic import logger
from pyconic.exceptions import ConfigValidationError
from pyconic.variables import CLASSICAL, DEFAULT_OUT, LOG_LEVELS, LZ_SCATTER, PROFILE_TEST, SIMULATE, SWEEP

_SECTION = re.compile(r"^\s*\[([^\]]+)\]")
_KEY = re.compile(r"^\s*([^=:\s#;\[][^=:]*?)\s*[=:]")


def config_lines(path) -> Dict[Tuple[str, Optional[str]], int]:
    """
    Line numbers of the section headers (section, None) and keys (section, key) of an INI file.
    """
    lines = {}
    section = None
    with open(path, "r") as fd:
        for number, line in enumerate(fd, start=1):
            header = _SECTION.match(line)
            if header:
                section = header.group(1).strip()
                lines.setdefault((section, None), number)
                continue
            key = _KEY.match(line)
            if key and section is not None:
                lines.setdefault((section, key.group(1).strip().lower()), number)
    return lines


def parse_configfile(path):
    """
    Function that parses an experiment file. Every value is read as a python literal if possible and as a string
    otherwise.
    :param path: Path to the INI file
    :return: Dict section -> dict key -> value
    """
    if path is None or not os.path.isfile(path):
        raise ConfigValidationError("Config file {} not found.".format(path))
    config = configparser.ConfigParser(interpolation=None)
    try:
        config.read(path)
    except configparser.Error as e:
        raise ConfigValidationError("Can't read {}: {}".format(path, e), line=getattr(e, "lineno", None))

    parsed = {}
    for section in config.sections():
        values = {}
        for key in config[section]:
            try:
                values[key] = ast.literal_eval(config[section][key])
            except (ValueError, SyntaxError):
                values[key] = config[section][key]
                logger.warning("Parsing datatype of config entry {}.{} failed, taking as a string instead...".format(
                    section, key))
        parsed[section] = values
    return parsed


def eta2_grid(text) -> Tuple[float, float, float]:
    """
    argparse type of --eta2-grid: "start:stop:step".
    """
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("Expected start:stop:step, got {}".format(text))
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("Expected start <= stop and a positive step, got {}".format(text))
    return start, stop, step


def _common(sub, config_required=True):
    sub.add_argument("--config", required=config_required, default=None,
                     help="Path to the experiment file.")
    sub.add_argument("--out", default=None,
                     help="Output folder. Defaults to [run] out or ./{}.".format(DEFAULT_OUT))
    sub.add_argument("--threads", type=int, default=1,
                     help="Number of workers for the eps entries of a sweep.")
    sub.add_argument("--log-level", default="INFO", choices=LOG_LEVELS, type=str.upper,
                     help="Level of the console log.")
    return sub


parser = argparse.ArgumentParser(prog="pyconic",
                                 description="Semiclassical wave packets through conical intersections.")
subparsers = parser.add_subparsers(dest="command", metavar="command")
subparsers.required = True

_common(subparsers.add_parser(SIMULATE, help="Run the configured kind for the first eps of the list."))
_common(subparsers.add_parser(SWEEP, help="Run every eps of the list and fit the error against eps."))
_classical = _common(subparsers.add_parser(CLASSICAL, help="Classical trajectory with its crossing data."))
_classical.add_argument("--eigenframe", action="store_true",
                        help="Also write the parallel transported eigenvector along the trajectory.")
_lz = _common(subparsers.add_parser(LZ_SCATTER, help="Landau-Zener coefficients and oracle transitions."),
              config_required=False)
_lz.add_argument("--eta2-grid", type=eta2_grid, default=None,
                 help="Grid of eta2 values as start:stop:step, overriding the run section.")
_common(subparsers.add_parser(PROFILE_TEST, help="Checks of the singular profile evolution."))
