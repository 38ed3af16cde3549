"""
Tunables of a run, and where their values came from (flag, config file, environment, adaptive estimate, default)
"""

import collections
import os

from graphtypes import abort, OUTPUT_ENV, short, stringify, to_float, to_int, trace
from graphtypes.content import batch_size_of, load_yaml
from graphtypes.extraction import DEFAULT_THETA
from graphtypes.featurize import DEFAULT_DIM
from graphtypes.lsh import DEFAULT_BUCKET_LENGTH, DEFAULT_MIN_JACCARD, DEFAULT_RADIUS, DEFAULT_TABLES, METHODS
from graphtypes.pipeline import DiscoveryConfig


EXPLICIT = "explicit"
ADAPTIVE = "adaptive"
DEFAULT = "default"
CONFIG_SECTION = "graphtypes"


def source_rank(source):
    """Precedence of 'source', lower wins"""
    if source == EXPLICIT:
        return 0
    if source.startswith("config:"):
        return 1
    if source.startswith("env:"):
        return 2
    if source == ADAPTIVE or source.startswith("%s:" % ADAPTIVE):
        return 3
    return 4


def _flag(value):
    if isinstance(value, bool):
        return value
    text = ("%s" % value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError("expecting a boolean")


def _optional(convert):
    def converted(value):
        if value is None or ("%s" % value).strip().lower() == "none":
            return None
        return convert(value)

    return converted


def _number(convert, minimum=None, maximum=None):
    def converted(value):
        result = convert(value)
        if result is None or isinstance(value, bool):
            raise ValueError("expecting a number")
        if minimum is not None and result < minimum or maximum is not None and result > maximum:
            raise ValueError("expecting a value in [%s, %s]" % (stringify(minimum), "inf" if maximum is None else stringify(maximum)))
        return result

    return converted


def _choice(choices):
    def converted(value):
        text = ("%s" % value).strip().lower()
        if text not in choices:
            raise ValueError("expecting one of: %s" % ", ".join(choices))
        return text

    return converted


def _positive_float(value):
    result = to_float(value)
    if result is None or result <= 0:
        raise ValueError("expecting a positive number")
    return result


def _batch_size(value):
    return batch_size_of(value)


class Tunable(object):
    """Declaration of a setting: name, default, conversion"""

    def __init__(self, name, default, convert, help, env=None):
        self.name = name
        self.default = default
        self.convert = convert
        self.help = help
        self.env = env

    def __repr__(self):
        return self.name

    @property
    def dest(self):
        return self.name.replace("-", "_")

    def converted(self, value, source):
        try:
            return self.convert(value)

        except ValueError as e:
            abort("Invalid value '%s' for %s (from %s): %s" % (value, self.name, source, e))


TUNABLES = collections.OrderedDict((t.name, t) for t in [
    Tunable("method", "elsh", _choice(METHODS), "Clustering method"),
    Tunable("theta", DEFAULT_THETA, _number(to_float, 0, 1), "Jaccard threshold for placing unlabeled types"),
    Tunable("dim", DEFAULT_DIM, _number(to_int, 2), "Label embedding dimension"),
    Tunable("seed", 42, _number(to_int, 0), "Seed of everything random"),
    Tunable("adaptive", True, _flag, "Estimate bucket length and tables from the data"),
    Tunable("bucket-length", DEFAULT_BUCKET_LENGTH, _positive_float, "ELSH bucket length"),
    Tunable("tables", DEFAULT_TABLES, _number(to_int, 1), "Number of hash tables"),
    Tunable("radius", DEFAULT_RADIUS, _optional(_number(to_float, 0)), "Max distance of joined ELSH collisions ('none': join all)"),
    Tunable("min-jaccard", DEFAULT_MIN_JACCARD, _optional(_number(to_float, 0, 1)), "Min Jaccard of joined MinHash collisions ('none': join all)"),
    Tunable("stratify", True, _flag, "Never join collisions across label sets"),
    Tunable("postprocess", True, _flag, "Compute constraints, datatypes and cardinalities"),
    Tunable("sample-datatypes", False, _flag, "Infer datatypes from a sample of the values"),
    Tunable("batch-size", "all", _batch_size, "Elements per batch ('all' for a single batch)"),
    Tunable("shuffle", False, _flag, "Shuffle elements (seeded) before splitting in batches"),
    Tunable("threads", 1, _number(to_int, 1), "Worker threads"),
    Tunable("out", ".", str, "Output folder", env=OUTPUT_ENV),
])


class DefinitionEntry(object):
    """One value seen for a setting, and where it came from"""

    def __init__(self, key, value, source):
        self.key = key
        self.value = value
        self.source = source

    def __repr__(self):
        return "%s=%s from %s" % (self.key, short(self.value), self.source)


class Definition(object):
    """All values seen for a setting, the one from the highest precedence source wins"""

    def __init__(self, key):
        self.key = key
        self.sources = []  # type: list[DefinitionEntry]

    def __repr__(self):
        return "%s=%s from %s" % (self.key, short(self.value), self.source)

    def __lt__(self, other):
        return self.key < other.key

    @property
    def value(self):
        if self.sources:
            return self.sources[0].value

    @property
    def source(self):
        if self.sources:
            return self.sources[0].source

    def add(self, value, source):
        """Record 'value' from 'source', keeping sources ordered by precedence"""
        entry = DefinitionEntry(self.key, value, source)
        rank = source_rank(source)
        position = 0
        while position < len(self.sources) and source_rank(self.sources[position].source) <= rank:
            position += 1
        self.sources.insert(position, entry)
        trace("[%s] %s=%s" % (source, self.key, short(value)))


def config_values(data, path):
    """
    :param dict data: Deserialized config file
    :param str path: Its path (for error messages)
    :return dict: Tunable name -> raw value
    """
    if data is None:
        return {}
    if isinstance(data, dict) and isinstance(data.get(CONFIG_SECTION), dict) and len(data) == 1:
        data = data[CONFIG_SECTION]
    if not isinstance(data, dict):
        abort("Config file %s must be a mapping" % short(path))
    result = {}
    for key, value in data.items():
        name = ("%s" % key).strip().replace("_", "-")
        if name not in TUNABLES:
            abort("Unknown setting '%s' in %s" % (key, short(path)))
        result[name] = value
    return result


class Settings(object):
    """Resolved tunables, with all values seen for each"""

    def __init__(self):
        self.definitions = collections.OrderedDict()  # type: dict[str, Definition]

    def __repr__(self):
        return "%s settings" % len(self.definitions)

    def value(self, key):
        definition = self.definitions.get(key)
        return definition and definition.value

    def source(self, key):
        definition = self.definitions.get(key)
        return definition and definition.source

    def add_definition(self, key, value, source):
        """Convert and record 'value' for tunable 'key', seen in 'source'"""
        tunable = TUNABLES[key]
        definition = self.definitions.get(key)
        if definition is None:
            definition = self.definitions[key] = Definition(key)
        definition.add(tunable.converted(value, source), source)

    @classmethod
    def resolved(cls, explicit=None, config_path=None, environ=None, defaults=None):
        """
        :param dict|None explicit: Tunable name -> value given on command line (None values are ignored)
        :param str|None config_path: Optional YAML config file
        :param dict|None environ: Environment (default: os.environ)
        :param dict|None defaults: Command-specific defaults
        :return Settings: Resolved settings
        """
        environ = os.environ if environ is None else environ
        settings = cls()
        for name, tunable in TUNABLES.items():
            default = tunable.default
            if defaults and name in defaults:
                default = defaults[name]
            settings.add_definition(name, default, DEFAULT)
            if tunable.env and environ.get(tunable.env):
                settings.add_definition(name, environ[tunable.env], "env:%s" % tunable.env)

        if config_path:
            for name, value in config_values(load_yaml(config_path), config_path).items():
                settings.add_definition(name, value, "config:%s" % short(config_path))

        for name, value in (explicit or {}).items():
            if value is not None:
                settings.add_definition(name, value, EXPLICIT)

        return settings

    def add_estimates(self, estimates):
        """Record adaptive estimates (kind -> AdaptiveEstimate), if adaptive mode is on"""
        if not self.value("adaptive"):
            return
        for kind in sorted(estimates):
            resolved = estimates[kind].resolved
            self.add_definition("bucket-length", resolved.bucket_length, "%s:%s" % (ADAPTIVE, kind))
            self.add_definition("tables", resolved.num_tables, "%s:%s" % (ADAPTIVE, kind))

    def overridden(self, key):
        """Value of 'key' if it was given by user (flag, config or env), None otherwise"""
        if source_rank(self.source(key)) <= 2:
            return self.value(key)

    def discovery_config(self):
        """
        :return DiscoveryConfig: Tunables of the discovery pipeline
        """
        return DiscoveryConfig(
            method=self.value("method"),
            theta=self.value("theta"),
            dim=self.value("dim"),
            seed=self.value("seed"),
            adaptive=self.value("adaptive"),
            bucket_length=self.overridden("bucket-length"),
            tables=self.overridden("tables"),
            radius=self.value("radius"),
            min_jaccard=self.value("min-jaccard"),
            stratify=self.value("stratify"),
            sample_datatypes=self.value("sample-datatypes"),
            threads=self.value("threads"),
        )

    def report(self):
        """
        :return list[str]: One line per setting, plus one line per overridden value
        """
        result = []
        definitions = list(self.definitions.values())
        if not definitions:
            return result
        longest_key = max(len(d.key) for d in definitions)
        longest_source = max(len(s.source) for d in definitions for s in d.sources)
        form = "%%%ss: (%%%ss) %%s" % (longest_key, -longest_source)
        for definition in definitions:
            for position, entry in enumerate(definition.sources):
                prefix = definition.key if not position else "\\_"
                result.append((form % (prefix, entry.source, stringify(entry.value))).rstrip())
        return result
