"""
Post-processing of a discovered schema: property constraints, datatypes and edge cardinalities
"""

import collections
import datetime
import math
import re

import numpy as np

from graphtypes import trace, warn
from graphtypes.featurize import SEED_MASK
from graphtypes.model import Cardinality, Constraint, Datatype, EDGE, NODE


SAMPLE_RATE = 0.1
SAMPLE_FLOOR = 1000

RE_INTEGER = re.compile(r"[+-]?\d+")
RE_FLOAT = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?\d+[eE][+-]?\d+")
RE_BOOLEAN = re.compile(r"true|false", re.IGNORECASE)
RE_ISO_DATE = re.compile(r"(\d{4})-(\d{2})-(\d{2})")
RE_DMY_DATE = re.compile(r"(\d{1,2})/(\d{1,2})/(\d{4})")
RE_DATETIME = re.compile(r"(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2})(?::(\d{2})(?:\.\d+)?)?(?:Z|[+-]\d{2}:\d{2})?")


def _is_date(year, month, day):
    try:
        datetime.date(int(year), int(month), int(day))
        return True

    except ValueError:
        return False


def datatype_of(value):
    """
    :param str value: Raw property value
    :return Datatype: Most specific datatype whose grammar accepts 'value'
    """
    if RE_INTEGER.fullmatch(value):
        return Datatype.INTEGER
    if RE_FLOAT.fullmatch(value):
        return Datatype.FLOAT
    if RE_BOOLEAN.fullmatch(value):
        return Datatype.BOOLEAN
    m = RE_ISO_DATE.fullmatch(value)
    if m and _is_date(*m.groups()):
        return Datatype.DATE
    m = RE_DMY_DATE.fullmatch(value)
    if m and _is_date(m.group(3), m.group(2), m.group(1)):
        return Datatype.DATE
    m = RE_DATETIME.fullmatch(value)
    if m and _is_date(*m.groups()[:3]):
        hour, minute, second = m.group(4), m.group(5), m.group(6) or "0"
        if int(hour) < 24 and int(minute) < 60 and int(second) < 60:
            return Datatype.DATETIME
    return Datatype.STRING


def infer_datatype(values):
    """Lattice join of the datatypes of all 'values' (STRING when there are none)"""
    result = None
    for value in values:
        result = datatype_of(value).join(result)
        if result == Datatype.STRING:
            break
    return result or Datatype.STRING


def sample_size(population):
    """Number of values examined in sampled mode: 10% of them, at least 1000 (or all if fewer)"""
    return min(population, max(int(math.ceil(SAMPLE_RATE * population)), SAMPLE_FLOOR))


class TypeStats(object):
    """Per type: instance count, per property occurrence count and observed values"""

    def __init__(self):
        self.instances = collections.Counter()
        self.occurrences = collections.defaultdict(collections.Counter)
        self.values = collections.defaultdict(collections.Counter)  # (type, key) -> value counts

    def __repr__(self):
        return "stats of %s types, %s instances" % (len(self.instances), sum(self.instances.values()))

    def __eq__(self, other):
        return (
            isinstance(other, TypeStats)
            and self.instances == other.instances
            and _non_empty(self.occurrences) == _non_empty(other.occurrences)
            and _non_empty(self.values) == _non_empty(other.values)
        )

    def __ne__(self, other):
        return not self == other

    def add(self, type_name, element):
        self.instances[type_name] += 1
        occurrences = self.occurrences[type_name]
        for key, value in element.properties.items():
            occurrences[key] += 1
            self.values[(type_name, key)][value] += 1

    @classmethod
    def of(cls, elements, assignment):
        """Statistics of 'elements', grouped by their type in 'assignment'"""
        result = cls()
        for element in elements:
            name = assignment.get(element.id)
            if name is not None:
                result.add(name, element)
        return result

    def merge(self, other):
        """Add all statistics of 'other' to this one"""
        self.instances.update(other.instances)
        for name, counts in other.occurrences.items():
            self.occurrences[name].update(counts)
        for key, counts in other.values.items():
            self.values[key].update(counts)
        return self

    def rename(self, renames):
        """Re-key statistics of renamed types, merging them into their new name"""
        for old, new in sorted(renames.items()):
            if old == new or old not in self.instances and old not in self.occurrences:
                continue
            self.instances[new] += self.instances.pop(old, 0)
            self.occurrences[new].update(self.occurrences.pop(old, {}))
            for type_name, key in [k for k in self.values if k[0] == old]:
                self.values[(new, key)].update(self.values.pop((old, key)))
        return self

    def instance_count(self, type_name):
        return self.instances.get(type_name, 0)

    def frequency(self, type_name, key):
        """Fraction of instances of 'type_name' carrying 'key'"""
        count = self.instance_count(type_name)
        if not count:
            return 0.0
        return self.occurrences.get(type_name, {}).get(key, 0) / float(count)

    def value_counts(self, type_name, key):
        return self.values.get((type_name, key)) or collections.Counter()


def _non_empty(mapping):
    return dict((k, v) for k, v in mapping.items() if v)


class DegreeStats(object):
    """Per edge type: distinct (source, target) node id pairs"""

    def __init__(self):
        self.pairs = collections.defaultdict(set)

    def __repr__(self):
        return "degrees of %s edge types" % len(self.pairs)

    def __eq__(self, other):
        return isinstance(other, DegreeStats) and _non_empty(self.pairs) == _non_empty(other.pairs)

    def __ne__(self, other):
        return not self == other

    def add(self, type_name, edge):
        self.pairs[type_name].add((edge.src, edge.tgt))

    @classmethod
    def of(cls, edges, assignment):
        result = cls()
        for edge in edges:
            name = assignment.get(edge.id)
            if name is not None:
                result.add(name, edge)
        return result

    def merge(self, other):
        for name, pairs in other.pairs.items():
            self.pairs[name].update(pairs)
        return self

    def rename(self, renames):
        for old, new in sorted(renames.items()):
            if old != new and old in self.pairs:
                self.pairs[new].update(self.pairs.pop(old))
        return self

    def max_degrees(self, type_name):
        """
        :return (int, int)|(None, None): Max distinct targets per source, max distinct sources per target
        """
        pairs = self.pairs.get(type_name)
        if not pairs:
            return None, None
        out_degree = collections.Counter(s for s, _ in pairs)
        in_degree = collections.Counter(t for _, t in pairs)
        return max(out_degree.values()), max(in_degree.values())


def cardinality_of(max_out, max_in):
    if not max_out or not max_in:
        return Cardinality.UNSET
    if max_out == 1 and max_in == 1:
        return Cardinality.ZERO_ONE
    if max_out == 1:
        return Cardinality.N_TO_ONE
    if max_in == 1:
        return Cardinality.ONE_TO_N
    return Cardinality.M_TO_N


def _with_properties(t, properties):
    return t.renamed(properties=properties)


def infer_property_constraints(schema, stats):
    """
    :param SchemaGraph schema: Schema to annotate
    :param TypeStats stats: Statistics of the instances of its types
    :return SchemaGraph: Copy of 'schema', MANDATORY for properties carried by every instance, OPTIONAL otherwise
    """
    result = schema.copy()
    for kind in (NODE, EDGE):
        types = result.types(kind)
        for name, t in list(types.items()):
            count = stats.instance_count(name)
            if not count and t.properties:
                warn("%s type %s has no instances, all its properties are considered optional" % (kind, name))
            properties = {}
            for key, spec in t.properties.items():
                mandatory = count and stats.occurrences.get(name, {}).get(key, 0) == count
                properties[key] = spec._replace(constraint=Constraint.MANDATORY if mandatory else Constraint.OPTIONAL)
            types[name] = _with_properties(t, properties)
    return result


def sampled_counts(counts, rng):
    """Seeded sample of the values in 'counts' (value -> multiplicity), as value -> sampled multiplicity"""
    distinct = sorted(counts)
    population = sum(counts.values())
    size = sample_size(population)
    if size >= population:
        return collections.Counter(counts)
    bounds = np.cumsum([counts[v] for v in distinct])
    picked = rng.choice(population, size=size, replace=False)
    positions = np.searchsorted(bounds, picked, side="right")
    return collections.Counter(distinct[i] for i in positions.tolist())


def infer_datatypes_sampled(schema, stats, sampled=False, seed=0):
    """
    :param SchemaGraph schema: Schema to annotate
    :param TypeStats stats: Observed values per type and property
    :param bool sampled: If True, examine only a seeded sample of the values of each property
    :param int seed: Seed used for sampling
    :return SchemaGraph: Copy of 'schema' with datatypes
    """
    rng = np.random.default_rng(int(seed) & SEED_MASK)
    result = schema.copy()
    for kind in (NODE, EDGE):
        types = result.types(kind)
        for name in sorted(types):
            t = types[name]
            properties = {}
            for key in sorted(t.properties):
                counts = stats.value_counts(name, key)
                values = sampled_counts(counts, rng) if sampled else counts
                properties[key] = t.properties[key]._replace(datatype=infer_datatype(values))
            types[name] = _with_properties(t, properties)
    return result


def apply_cardinalities(schema, degrees):
    """
    :param SchemaGraph schema: Schema to annotate
    :param DegreeStats degrees: Distinct endpoint pairs per edge type
    :return SchemaGraph: Copy of 'schema' with edge type cardinalities
    """
    result = schema.copy()
    for name, t in list(result.edge_types.items()):
        max_out, max_in = degrees.max_degrees(name)
        annotated = t.renamed()
        annotated.max_out = max_out
        annotated.max_in = max_in
        annotated.cardinality = cardinality_of(max_out, max_in)
        result.edge_types[name] = annotated
    return result


def compute_cardinalities(graph, schema):
    """
    :param PropertyGraph graph: Data the schema was discovered from
    :param SchemaGraph schema: Schema whose assignment maps edges to edge types
    :return SchemaGraph: Copy of 'schema' with edge type cardinalities
    """
    return apply_cardinalities(schema, DegreeStats.of(graph.edges.values(), schema.assignment or {}))


def postprocess(schema, type_stats, degrees, sampled=False, seed=0):
    """
    :param SchemaGraph schema: Discovered schema
    :param TypeStats type_stats: Statistics of instances per type
    :param DegreeStats degrees: Distinct endpoint pairs per edge type
    :param bool sampled: Infer datatypes from a sample of the values
    :param int seed: Seed used for sampling
    :return SchemaGraph: Annotated copy of 'schema', marked as post-processed
    """
    result = infer_property_constraints(schema, type_stats)
    result = infer_datatypes_sampled(result, type_stats, sampled=sampled, seed=seed)
    result = apply_cardinalities(result, degrees)
    result.postprocessed = True
    trace("post-processed %s" % result)
    return result


def postprocess_graph(graph, schema, sampled=False, seed=0):
    """Post-process 'schema' with statistics computed from 'graph' and the schema's assignment"""
    assignment = schema.assignment or {}
    type_stats = TypeStats.of(graph.elements(), assignment)
    return postprocess(schema, type_stats, DegreeStats.of(graph.edges.values(), assignment), sampled=sampled, seed=seed)

