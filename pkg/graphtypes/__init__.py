"""
Discover node and edge types in property graph dumps

author: graphtypes developers
"""

import contextlib
import os
import re
import shutil
import sys
import tempfile
import warnings


__version__ = "0.1.0"

DEBUG = os.environ.get("GRAPHTYPES_DEBUG")
OUTPUT_ENV = "GRAPHTYPES_OUT"  # Env var holding the default output folder
TESTING = False  # Turned on by tests/conftest.py

HOME = os.path.expanduser("~")
RE_WHITESPACE = re.compile(r"\s+")
DEFAULT_WIDTH = 160


class UsageError(Exception):
    """Invalid invocation or input, reported to user without a stack trace"""


class InputError(UsageError):
    """Malformed or inconsistent input data, optionally located in a file"""

    def __init__(self, message, path=None, line=None):
        self.message = message
        self.path = path
        self.line = line
        UsageError.__init__(self, str(self))

    def __str__(self):
        if not self.path:
            return self.message
        location = "%s:%s" % (self.path, self.line) if self.line else self.path
        return "%s: %s" % (location, self.message)


def abort(message):
    raise UsageError(message)


def warn(message):
    """Warn about dubious (but usable) input"""
    warnings.warn(message, stacklevel=2)


def trace(message):
    """Debug output, shown with --debug or GRAPHTYPES_DEBUG=1"""
    if DEBUG:
        sys.stderr.write(":: %s\n" % message)
        sys.stderr.flush()


def _converted(convert, value, default):
    try:
        return convert(value)

    except (TypeError, ValueError):
        return default


def to_int(value, default=None):
    return _converted(int, value, default)


def to_float(value, default=None):
    return _converted(float, value, default)


def terminal_width():
    if sys.stdout.isatty():
        return shutil.get_terminal_size((DEFAULT_WIDTH, 24)).columns
    return DEFAULT_WIDTH


def stringify(value):
    """Deterministic one-line rendering of 'value' (sets and dicts sorted, floats compact)"""
    if isinstance(value, float):
        return "%g" % value
    if isinstance(value, dict):
        pairs = ("%s: %s" % (stringify(k), stringify(v)) for k, v in sorted(value.items()))
        return "{%s}" % ", ".join(pairs)
    if isinstance(value, (set, frozenset)):
        value = sorted(value)
    if isinstance(value, (list, tuple)):
        return "[%s]" % ", ".join(stringify(v) for v in value)
    return "%s" % value


def short(value, c=None):
    """
    :param value: Anything to show in a report or message
    :param int|None c: Max width (default: terminal width), negative: keep first -c chars
    :return str: 'value' on one line, ~ for home folder, truncated to fit 'c'
    """
    if not value:
        return "%s" % value
    width = terminal_width() if c is None else c
    text = RE_WHITESPACE.sub(" ", stringify(value).strip().replace(HOME, "~"))
    if not width or len(text) <= abs(width):
        return text
    if width < 0:
        return text[:-width] + "..."
    if isinstance(value, dict):
        count = "%s keys" % len(value)
    elif isinstance(value, (list, set, frozenset)):
        count = "%s items" % len(value)
    else:
        return text[:width - 3] + "..."
    room = width - len(count) - 5
    return "%s: %s..." % (count, text[:room]) if room > 0 else count


def listify(value, separator=None):
    """
    :param value: None, a collection, or text
    :param str|None separator: Separator of items in 'value' (default: whitespace)
    :return list: Non-empty stripped items
    """
    if value is None:
        return []
    if isinstance(value, list):
        return value
    if isinstance(value, (tuple, set, frozenset)):
        return list(value)
    text = "%s" % value
    if separator:
        text = text.replace("\n", separator)
    return [item.strip() for item in text.split(separator) if item.strip()]


def ensure_folder(path):
    if path:
        os.makedirs(path, exist_ok=True)
    return path


@contextlib.contextmanager
def temp_resource():
    """Run the 'with' body from within a fresh temp folder, deleted afterwards"""
    previous = os.getcwd()
    path = os.path.realpath(tempfile.mkdtemp())  # realpath: macOS temp folders are symlinked
    os.chdir(path)
    try:
        yield path

    finally:
        os.chdir(previous)
        shutil.rmtree(path, ignore_errors=True)
