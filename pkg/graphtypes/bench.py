"""
Evaluation harness: noise injection, synthetic graphs, majority-based F1, parameter sweeps
"""

import collections
import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from codetiming import Timer

from graphtypes import abort, InputError, listify, to_float, trace, UsageError
from graphtypes.constraints import datatype_of, infer_datatype, sampled_counts, TypeStats
from graphtypes.content import load_json, save_json
from graphtypes.featurize import SEED_MASK
from graphtypes.lsh import ELSH
from graphtypes.model import canonical_label_key, Datatype, Edge, EDGE, labels_of_key, Node, NODE, PropertyGraph
from graphtypes.pipeline import discover_graph, Discovery, DiscoveryConfig, StageTimer


DEFAULT_DROPS = (0, 10, 20, 30, 40)
DEFAULT_AVAILABILITIES = (0, 50, 100)
DEFAULT_GRID = "0,10,20,30,40:0,50,100"
HISTOGRAM_BINS = (0.05, 0.10, 0.20)
HISTOGRAM_LABELS = ("[0,0.05)", "[0.05,0.10)", "[0.10,0.20)", ">=0.20")
BENCHMARK_COLUMNS = ["dataset", "method", "noisePct", "labelAvail", "seed", "nodeF1", "edgeF1", "wallSeconds", "error"]
SWEEP_COLUMNS = ["alpha", "tables", "bucketLength", "nodeF1", "edgeF1", "adaptive"]
EPSILON = 1e-9


def _exact_count(fraction, total):
    return int(math.floor(fraction * total + EPSILON))


class NoiseProfile(object):
    """How much noise to inject: fraction of property instances dropped, fraction of elements keeping their labels"""

    def __init__(self, property_drop=0.0, label_availability=1.0, seed=0):
        if not 0 <= property_drop <= 1:
            abort("Property drop must be in [0, 1], got %s" % property_drop)
        if not 0 <= label_availability <= 1:
            abort("Label availability must be in [0, 1], got %s" % label_availability)
        self.property_drop = property_drop
        self.label_availability = label_availability
        self.seed = seed

    def __repr__(self):
        return "drop %g%%, labels %g%%, seed %s" % (100 * self.property_drop, 100 * self.label_availability, self.seed)


class GroundTruth(object):
    """True type (canonical label key before noise) of every element"""

    def __init__(self, nodes=None, edges=None):
        self.nodes = dict(nodes or {})
        self.edges = dict(edges or {})

    def __repr__(self):
        return "truth for %s nodes, %s edges" % (len(self.nodes), len(self.edges))

    def __eq__(self, other):
        return isinstance(other, GroundTruth) and self.nodes == other.nodes and self.edges == other.edges

    def __ne__(self, other):
        return not self == other

    @classmethod
    def of(cls, graph):
        """Truth of a clean graph: label key of each element"""
        return cls(
            dict((n.id, n.label_key) for n in graph.nodes.values()),
            dict((e.id, e.label_key) for e in graph.edges.values()),
        )

    def to_dict(self):
        return {"edges": self.edges, "nodes": self.nodes}

    def save(self, path):
        save_json(path, self.to_dict())

    @classmethod
    def load(cls, path):
        data = load_json(path)
        if not isinstance(data, dict) or not isinstance(data.get("nodes"), dict) or not isinstance(data.get("edges"), dict):
            raise InputError("expecting an object with 'nodes' and 'edges' mappings", path)
        return cls(data["nodes"], data["edges"])


def inject_noise(graph, profile):
    """
    :param PropertyGraph graph: Clean graph
    :param NoiseProfile profile: Noise to inject
    :return (PropertyGraph, GroundTruth): Noisy copy of 'graph' (same ids and endpoints), and truth before noise
    """
    truth = GroundTruth.of(graph)
    rng = np.random.default_rng(int(profile.seed) & SEED_MASK)
    elements = list(graph.elements())
    instances = [(i, key) for i, e in enumerate(elements) for key in sorted(e.properties)]
    dropped = set()
    count = _exact_count(profile.property_drop, len(instances))
    if count:
        dropped = set(instances[i] for i in rng.permutation(len(instances))[:count])

    cleared = set()
    for kind in (NODE, EDGE):
        positions = [i for i, e in enumerate(elements) if e.kind == kind]
        count = _exact_count(1 - profile.label_availability, len(positions))
        if count:
            cleared.update(positions[i] for i in rng.permutation(len(positions))[:count])

    noisy = PropertyGraph()
    for i, element in enumerate(elements):
        properties = dict((k, v) for k, v in element.properties.items() if (i, k) not in dropped)
        labels = () if i in cleared else element.labels
        changed = element.replaced(labels=labels, properties=properties)
        if changed.kind == NODE:
            noisy.add_node(changed)
        else:
            noisy.add_edge(changed, check=False)

    trace("injected %s: %s property instances dropped, %s elements unlabeled" % (profile, len(dropped), len(cleared)))
    return noisy, truth


def _generated_value(datatype, rng):
    if datatype == Datatype.INTEGER:
        return "%s" % rng.integers(0, 100000)
    if datatype == Datatype.FLOAT:
        return "%.3f" % (rng.random() * 1000)
    if datatype == Datatype.BOOLEAN:
        return "true" if rng.random() < 0.5 else "false"
    day = np.datetime64("1970-01-01") + int(rng.integers(0, 20000))
    if datatype == Datatype.DATE:
        return str(day)
    if datatype == Datatype.DATETIME:
        return "%sT%02d:%02d:%02d" % (day, rng.integers(0, 24), rng.integers(0, 60), rng.integers(0, 60))
    return "v%x" % rng.integers(0, 1 << 32)


def _property_specs(data, where):
    result = collections.OrderedDict()
    for key, spec in sorted((data or {}).items()):
        outliers = 0.0
        if isinstance(spec, dict):
            outliers = to_float(spec.get("outliers", 0), -1)
            spec = spec.get("datatype")
        try:
            datatype = Datatype((spec or "STRING").upper())

        except (AttributeError, ValueError):
            abort("Invalid datatype '%s' for property '%s' of %s" % (spec, key, where))

        if not 0 <= outliers <= 1:
            abort("Outlier fraction of property '%s' of %s must be in [0, 1]" % (key, where))
        result[key] = (datatype, outliers)
    return result


def _count_of(spec, where):
    count = spec.get("count")
    if not isinstance(count, int) or count < 0:
        abort("%s needs a non-negative integer 'count'" % where)
    return count


def _generated_properties(count, specs, rng):
    """One property dict per element, values following 'specs'"""
    result = [{} for _ in range(count)]
    for key, (datatype, outliers) in specs.items():
        values = [_generated_value(datatype, rng) for _ in range(count)]
        for i in rng.permutation(count)[:_exact_count(outliers, count)]:
            values[i] = "x%x" % rng.integers(0, 1 << 32)
        for properties, value in zip(result, values):
            properties[key] = value
    return result


def gen_synthetic(spec, seed=0):
    """
    :param dict spec: Node specs (label, count, properties) and edge specs (label, source, target, count, fanout, properties)
    :param int seed: Seed of ids and values
    :return (PropertyGraph, GroundTruth): Generated graph, and its truth
    """
    if not isinstance(spec, dict):
        abort("Synthetic graph specification must be a mapping with 'nodes' and 'edges'")
    rng = np.random.default_rng(int(seed) & SEED_MASK)
    graph = PropertyGraph()
    node_ids = {}
    next_id = int(rng.integers(0, 1 << 32))
    for position, node_spec in enumerate(spec.get("nodes") or []):
        where = "node spec #%s" % (position + 1)
        if not isinstance(node_spec, dict) or not node_spec.get("label"):
            abort("%s needs a 'label'" % where)
        key = canonical_label_key(labels_of_key(node_spec["label"]))
        if key in node_ids:
            abort("Node label '%s' is declared twice" % key)
        count = _count_of(node_spec, where)
        ids = []
        for properties in _generated_properties(count, _property_specs(node_spec.get("properties"), where), rng):
            node = Node("n%x" % next_id, labels=labels_of_key(key), properties=properties)
            next_id += 1
            graph.add_node(node)
            ids.append(node.id)
        node_ids[key] = ids

    next_id = int(rng.integers(0, 1 << 32))
    for position, edge_spec in enumerate(spec.get("edges") or []):
        where = "edge spec #%s" % (position + 1)
        if not isinstance(edge_spec, dict) or not edge_spec.get("label"):
            abort("%s needs a 'label'" % where)
        sources = node_ids.get(canonical_label_key(labels_of_key(edge_spec.get("source"))))
        targets = node_ids.get(canonical_label_key(labels_of_key(edge_spec.get("target"))))
        if not sources or not targets:
            abort("%s refers to undeclared (or empty) source/target node types" % where)
        count = _count_of(edge_spec, where)
        fanout = edge_spec.get("fanout", 1)
        if not isinstance(fanout, int) or fanout < 1 or fanout > len(targets):
            abort("%s: fanout must be between 1 and the number of targets (%s)" % (where, len(targets)))
        offsets = rng.integers(0, len(targets), len(sources))
        labels = labels_of_key(edge_spec["label"])
        all_properties = _generated_properties(count, _property_specs(edge_spec.get("properties"), where), rng)
        for i, properties in enumerate(all_properties):
            s = (i // fanout) % len(sources)
            t = (offsets[s] + i % fanout) % len(targets)
            graph.add_edge(Edge("e%x" % next_id, sources[s], targets[t], labels=labels, properties=properties))
            next_id += 1

    return graph, GroundTruth.of(graph)


class F1Report(object):
    """Majority-based F1 of one element kind"""

    def __init__(self, f1, accuracy, per_type):
        self.f1 = f1
        self.accuracy = accuracy
        self.per_type = per_type  # True type -> (precision, recall, f1)

    def __repr__(self):
        return "F1*=%.4f accuracy=%.4f" % (self.f1, self.accuracy)


def _f1(precision, recall):
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def majority_f1(assignment, truth):
    """
    :param dict assignment: Element id -> discovered type
    :param dict truth: Element id -> true type
    :return F1Report: Macro F1 over true types, each discovered type counting as its majority true type
    """
    if set(assignment) != set(truth):
        missing = sorted(set(truth) ^ set(assignment))
        abort("Discovered types and truth cover different elements: %s" % ", ".join(missing[:5]))
    if not truth:
        return F1Report(1.0, 1.0, {})

    contents = collections.defaultdict(collections.Counter)
    for element_id, discovered in assignment.items():
        contents[discovered][truth[element_id]] += 1
    totals = collections.Counter(truth.values())
    tp = collections.Counter()
    fp = collections.Counter()
    for counts in contents.values():
        majority = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[0][0]
        tp[majority] += counts[majority]
        fp[majority] += sum(counts.values()) - counts[majority]

    per_type = {}
    for t in sorted(totals):
        precision = tp[t] / float(tp[t] + fp[t]) if tp[t] + fp[t] else 0.0
        recall = tp[t] / float(totals[t])
        per_type[t] = (precision, recall, _f1(precision, recall))
    f1 = sum(v[2] for v in per_type.values()) / len(per_type)
    return F1Report(f1, sum(tp.values()) / float(len(truth)), per_type)


def datatype_sampling_error(population, sample):
    """
    :param population: All values of a property (list, or value -> count)
    :param sample: Values examined (list, or value -> count)
    :return float: Fraction of sampled values whose own datatype differs from the datatype of the whole population
    """
    population = collections.Counter(population)
    sample = collections.Counter(sample)
    size = sum(sample.values())
    if not size:
        abort("Can't compute sampling error of an empty sample")
    overall = infer_datatype(population)
    return sum(n for v, n in sample.items() if datatype_of(v) != overall) / float(size)


def error_histogram(errors):
    """Count of errors per bin"""
    result = collections.OrderedDict((label, 0) for label in HISTOGRAM_LABELS)
    for error in errors:
        position = int(np.searchsorted(HISTOGRAM_BINS, error, side="right"))
        result[HISTOGRAM_LABELS[position]] += 1
    return result


class EvalReport(object):
    """Outcome of discovering a schema on a graph with known truth"""

    def __init__(self, nodes, edges, datatype_errors=None, wall_times=None):
        self.nodes = nodes  # type: F1Report
        self.edges = edges  # type: F1Report
        self.datatype_errors = datatype_errors or {}
        self.wall_times = wall_times or {}

    def __repr__(self):
        return "nodes %s, edges %s" % (self.nodes, self.edges)

    @property
    def node_f1(self):
        return self.nodes.f1

    @property
    def edge_f1(self):
        return self.edges.f1

    def to_dict(self):
        def per_type(report):
            return dict((t, {"precision": p, "recall": r, "f1": f}) for t, (p, r, f) in report.per_type.items())

        return {
            "nodeF1": self.nodes.f1,
            "edgeF1": self.edges.f1,
            "nodeAccuracy": self.nodes.accuracy,
            "edgeAccuracy": self.edges.accuracy,
            "perType": {"nodes": per_type(self.nodes), "edges": per_type(self.edges)},
            "datatypeErrors": dict(("%s.%s" % k, v) for k, v in sorted(self.datatype_errors.items())),
            "datatypeErrorHistogram": error_histogram(self.datatype_errors.values()),
            "wallTimes": self.wall_times,
        }


def datatype_errors(graph, schema, seed=0):
    """
    :return dict: (type name, key) -> sampling error of the datatype of property 'key' of that type
    """
    rng = np.random.default_rng(int(seed) & SEED_MASK)
    stats = TypeStats.of(graph.elements(), schema.assignment or {})
    result = {}
    for name, key in sorted(stats.values):
        counts = stats.values[(name, key)]
        if counts:
            result[(name, key)] = datatype_sampling_error(counts, sampled_counts(counts, rng))
    return result


def evaluate(graph, truth, config=None):
    """
    :param PropertyGraph graph: Graph to discover a schema from
    :param GroundTruth truth: True type of each element
    :param DiscoveryConfig|None config: Tunables
    :return EvalReport: F1 of nodes and edges, datatype sampling errors, stage times
    """
    config = config or DiscoveryConfig()
    timer = StageTimer()
    schema = discover_graph(graph, config=config, timer=timer)
    assignment = schema.assignment
    nodes = majority_f1(dict((i, assignment[i]) for i in graph.nodes), truth.nodes)
    edges = majority_f1(dict((i, assignment[i]) for i in graph.edges), truth.edges)
    errors = datatype_errors(graph, schema, seed=config.seed)
    return EvalReport(nodes, edges, datatype_errors=errors, wall_times=dict(timer.stages))


def parse_grid(text):
    """
    :param str text: '<drops>:<availabilities>', percentages separated by commas
    :return (list[float], list[float]): Drop and availability fractions
    """
    drops, _, availabilities = (text or DEFAULT_GRID).partition(":")
    try:
        drops = [float(v) / 100 for v in listify(drops, separator=",")]
        availabilities = [float(v) / 100 for v in listify(availabilities or "100", separator=",")]

    except ValueError:
        abort("Invalid grid '%s', expecting '<drops>:<availabilities>' (percentages)" % text)

    if not drops or not availabilities:
        abort("Empty grid '%s'" % text)
    return drops, availabilities


def _percent(fraction):
    return "%g" % round(100 * fraction, 6)


def run_benchmark(graph, dataset="graph", drops=None, availabilities=None, methods=(ELSH,), seeds=(0,), config=None, threads=1):
    """
    :param PropertyGraph graph: Clean graph
    :param str dataset: Name of the dataset, reported in each row
    :param list drops: Property drop fractions
    :param list availabilities: Label availability fractions
    :param list methods: LSH methods to run
    :param list seeds: Seeds to run
    :param DiscoveryConfig|None config: Other tunables
    :param int threads: Grid cells run in parallel
    :return list[dict]: One row per cell, in grid order
    """
    config = config or DiscoveryConfig()
    drops = [d / 100.0 for d in DEFAULT_DROPS] if drops is None else drops
    availabilities = [a / 100.0 for a in DEFAULT_AVAILABILITIES] if availabilities is None else availabilities
    cells = [(m, d, a, s) for m in methods for s in seeds for d in drops for a in availabilities]
    if not cells:
        abort("Empty benchmark grid")

    def run_cell(cell):
        method, drop, availability, seed = cell
        row = collections.OrderedDict([
            ("dataset", dataset),
            ("method", method),
            ("noisePct", _percent(drop)),
            ("labelAvail", _percent(availability)),
            ("seed", seed),
        ])
        timer = Timer(logger=None)
        timer.start()
        try:
            noisy, truth = inject_noise(graph, NoiseProfile(drop, availability, seed))
            report = evaluate(noisy, truth, config.replaced(method=method, seed=seed, threads=1))
            row["nodeF1"] = "%.6f" % report.node_f1
            row["edgeF1"] = "%.6f" % report.edge_f1
            row["error"] = ""

        except Exception as e:
            if not isinstance(e, UsageError):
                logging.warning("%s cell %s failed: %s" % (dataset, cell, e))
            row["nodeF1"] = row["edgeF1"] = ""
            row["error"] = "%s" % e

        row["wallSeconds"] = "%.6f" % timer.stop()
        logging.info("%s" % ", ".join("%s=%s" % (k, row[k]) for k in BENCHMARK_COLUMNS if row.get(k) != ""))
        return row

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(run_cell, cells))
    return [run_cell(cell) for cell in cells]


def save_rows(path, rows, columns):
    with io.open(path, "wt", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def sweep(graph, truth, alphas, tables, config=None):
    """
    :param PropertyGraph graph: Graph to discover a schema from
    :param GroundTruth truth: True type of each element
    :param list[float] alphas: Bucket scales (bucket length = base bucket length * alpha)
    :param list[int] tables: Numbers of hash tables
    :param DiscoveryConfig|None config: Other tunables
    :return list[dict]: One row per (alpha, tables) cell, then the row of the adaptive choice
    """
    alphas = list(alphas or [])
    tables = list(tables or [])
    if not alphas or not tables:
        abort("Sweep grid is empty")
    config = (config or DiscoveryConfig()).replaced(method=ELSH, adaptive=True, bucket_length=None, tables=None, alpha=None)

    def run(cell_config):
        discovery = Discovery(config=cell_config)
        discovery.feed(graph.nodes.values(), graph.edges.values())
        return discovery

    def row(discovery, alpha, adaptive):
        assignment = discovery.schema.assignment
        params = discovery.params.get(NODE) or discovery.params.get(EDGE)
        return collections.OrderedDict([
            ("alpha", "%g" % alpha),
            ("tables", params.num_tables if params else ""),
            ("bucketLength", "%.6f" % params.bucket_length if params else ""),
            ("nodeF1", "%.6f" % majority_f1(dict((i, assignment[i]) for i in graph.nodes), truth.nodes).f1),
            ("edgeF1", "%.6f" % majority_f1(dict((i, assignment[i]) for i in graph.edges), truth.edges).f1),
            ("adaptive", "true" if adaptive else "false"),
        ])

    rows = [row(run(config.replaced(alpha=a, tables=t)), a, False) for a in alphas for t in tables]
    discovery = run(config)
    estimate = discovery.estimates.get(NODE) or discovery.estimates.get(EDGE)
    rows.append(row(discovery, estimate.alpha if estimate else 1.0, True))
    return rows


def graph_statistics(graph):
    """
    :param PropertyGraph graph: Graph to describe
    :return OrderedDict: Counts of elements, labels, label keys, property keys and patterns per kind
    """
    result = collections.OrderedDict()
    for kind, elements in ((NODE, list(graph.nodes.values())), (EDGE, list(graph.edges.values()))):
        labels = set(s for e in elements for s in e.labels)
        keys = set(k for e in elements for k in e.properties)
        patterns = set((e.label_key, frozenset(e.properties)) for e in elements)
        result["%ss" % kind] = len(elements)
        result["%s labels" % kind] = len(labels)
        result["%s label keys" % kind] = len(set(e.label_key for e in elements))
        result["%s property keys" % kind] = len(keys)
        result["%s patterns" % kind] = len(patterns)
        result["unlabeled %ss" % kind] = sum(1 for e in elements if not e.labels)
    return result
