"""
Reading and writing property graph dumps (JSONL, or a pair of CSV files)
"""

import collections
import csv
import io
import json
import os

import numpy as np
import yaml

from graphtypes import abort, InputError, to_int, trace, warn
from graphtypes.featurize import SEED_MASK
from graphtypes.model import Edge, EDGE, Node, NODE, PropertyGraph


JSONL = "jsonl"
CSV_PAIR = "csv"
FORMATS = (JSONL, CSV_PAIR)
ALL = "all"  # Batch size meaning "everything in one batch"

CSV_LABEL_SEPARATOR = ";"
NODE_CSV_HEADER = ["id", "labels"]
EDGE_CSV_HEADER = ["id", "label", "src", "tgt"]


def batch_size_of(value):
    """
    :param value: Positive integer, or 'all' (None also means 'all')
    :return int|str: Validated batch size
    """
    if value is None or ("%s" % value).strip().lower() == ALL:
        return ALL
    size = to_int(value)
    if size is None or size < 1:
        abort("Invalid batch size '%s', expecting a positive integer or '%s'" % (value, ALL))
    return size


def guessed_format(path):
    """Format implied by the extension of 'path'"""
    if path and os.path.splitext(path)[1].lower() == ".csv":
        return CSV_PAIR
    return JSONL


class GraphSource(object):
    """Where to read a graph from, and how to split it in batches"""

    def __init__(self, node_path, edge_path=None, format=None, batch_size=ALL, shuffle=False, seed=0):
        """
        :param str node_path: File with nodes (JSONL: nodes and edges, unless 'edge_path' is given)
        :param str|None edge_path: File with edges
        :param str|None format: One of FORMATS (default: deduced from 'node_path' extension)
        :param int|str batch_size: Elements per batch, or ALL
        :param bool shuffle: If True, permute elements (seeded) before splitting in batches
        :param int seed: Seed used for shuffling
        """
        self.format = format or guessed_format(node_path)
        if self.format not in FORMATS:
            abort("Unknown graph format '%s', expecting one of: %s" % (self.format, ", ".join(FORMATS)))
        if self.format == CSV_PAIR and not edge_path:
            abort("CSV input needs both a node file and an edge file")
        self.node_path = node_path
        self.edge_path = edge_path
        self.batch_size = batch_size_of(batch_size)
        self.shuffle = shuffle
        self.seed = seed

    def __repr__(self):
        paths = self.node_path if not self.edge_path else "%s + %s" % (self.node_path, self.edge_path)
        return "%s %s, batch size: %s" % (self.format, paths, self.batch_size)

    @property
    def paths(self):
        return [p for p in (self.node_path, self.edge_path) if p]


class Batch(object):
    """Slice of a graph stream, edges may refer to nodes of other batches"""

    def __init__(self, index, nodes=None, edges=None):
        self.index = index
        self.nodes = list(nodes or [])  # type: list[Node]
        self.edges = list(edges or [])  # type: list[Edge]

    def __repr__(self):
        return "batch %s: %s nodes, %s edges" % (self.index, len(self.nodes), len(self.edges))

    def __len__(self):
        return len(self.nodes) + len(self.edges)


def _opened(path, binary=False):
    try:
        if binary:
            return io.open(path, "rb")
        return io.open(path, "rt", encoding="utf-8")

    except IOError as e:
        raise InputError("can't read file (%s)" % e.strerror, path)


def _raw_value(value):
    if isinstance(value, str):
        return value
    return json.dumps(value, sort_keys=True)


def element_from_dict(data):
    """
    :param dict data: Deserialized JSONL line
    :return Node|Edge: Corresponding element
    """
    if not isinstance(data, dict):
        raise InputError("expecting a JSON object")
    kind = data.get("kind") or (EDGE if "src" in data else NODE)
    labels = data.get("labels") or []
    if isinstance(labels, str):
        labels = [labels]
    if not isinstance(labels, list):
        raise InputError("'labels' must be a list")
    properties = data.get("properties") or {}
    if not isinstance(properties, dict):
        raise InputError("'properties' must be an object")
    properties = dict((k, _raw_value(v)) for k, v in properties.items() if v is not None)
    if kind == NODE:
        return Node(data.get("id"), labels=labels, properties=properties)
    if kind == EDGE:
        return Edge(data.get("id"), data.get("src"), data.get("tgt"), labels=labels, properties=properties)
    raise InputError("unknown element kind '%s'" % kind)


def element_to_dict(element):
    """Canonical JSONL representation of 'element' (key order matters for golden files)"""
    result = collections.OrderedDict()
    result["kind"] = element.kind
    result["id"] = element.id
    result["labels"] = list(element.labels)
    if element.kind == EDGE:
        result["src"] = element.src
        result["tgt"] = element.tgt
    result["properties"] = collections.OrderedDict(sorted(element.properties.items()))
    return result


def _decoded_lines(path):
    """Lines of UTF-8 file 'path', undecodable ones reported with their line number"""
    with _opened(path, binary=True) as fh:
        for line_number, raw in enumerate(fh, 1):
            try:
                yield raw.decode("utf-8")

            except UnicodeDecodeError as e:
                raise InputError("invalid UTF-8 (%s)" % e.reason, path, line_number)


def _jsonl_elements(path):
    for line_number, line in enumerate(_decoded_lines(path), 1):
        line = line.strip()
        if not line:
            continue
        try:
            element = element_from_dict(json.loads(line))

        except ValueError as e:
            raise InputError("malformed JSON (%s)" % e, path, line_number)

        except InputError as e:
            raise InputError(e.message, path, line_number)

        yield element, path, line_number


def _csv_rows(path, expected_header):
    reader = csv.reader(_decoded_lines(path))
    header = next(reader, None)
    if header is None:
        return
    if header[:len(expected_header)] != expected_header:
        raise InputError("header must start with: %s" % ",".join(expected_header), path, 1)
    keys = header[len(expected_header):]
    for row in reader:
        if not row:
            continue
        if len(row) != len(header):
            raise InputError("expecting %s columns, found %s" % (len(header), len(row)), path, reader.line_num)
        properties = dict((k, v) for k, v in zip(keys, row[len(expected_header):]) if v != "")
        yield row[:len(expected_header)], properties, reader.line_num


def _csv_labels(text):
    return [s for s in text.split(CSV_LABEL_SEPARATOR) if s]


def _csv_elements(node_path, edge_path):
    for path, expected in ((node_path, NODE_CSV_HEADER), (edge_path, EDGE_CSV_HEADER)):
        for fixed, properties, line_number in _csv_rows(path, expected):
            try:
                if expected is NODE_CSV_HEADER:
                    element = Node(fixed[0], labels=_csv_labels(fixed[1]), properties=properties)
                else:
                    element = Edge(fixed[0], fixed[2], fixed[3], labels=_csv_labels(fixed[1]), properties=properties)

            except InputError as e:
                raise InputError(e.message, path, line_number)

            yield element, path, line_number


def read_elements(source):
    """
    :param GraphSource source: Source to read
    :return: Generator of (element, path, line number), in ingestion order
    """
    trace("reading %s" % source)
    if source.format == CSV_PAIR:
        for item in _csv_elements(source.node_path, source.edge_path):
            yield item
        return
    for path in source.paths:
        for item in _jsonl_elements(path):
            yield item


def load_graph(source):
    """
    :param GraphSource source: Source to read, all at once (dangling edges are an error)
    :return PropertyGraph: Loaded graph, ingestion order preserved
    """
    graph = PropertyGraph()
    positions = {}
    for element, path, line_number in read_elements(source):
        try:
            if element.kind == NODE:
                graph.add_node(element)
            else:
                graph.add_edge(element, check=False)
                positions[element.id] = (path, line_number)

        except InputError as e:
            raise InputError(e.message, path, line_number)

    for edge in graph.edges.values():
        for node_id in (edge.src, edge.tgt):
            if node_id not in graph.nodes:
                path, line_number = positions[edge.id]
                raise InputError("edge '%s' references unknown node '%s'" % (edge.id, node_id), path, line_number)

    trace("loaded %s" % graph)
    return graph


def stream_batches(source):
    """
    :param GraphSource source: Source to read
    :return: Generator of Batch, concatenation of which is the whole graph
    """
    if source.batch_size == ALL:
        graph = load_graph(source)
        if len(graph):
            yield Batch(0, graph.nodes.values(), graph.edges.values())
        return

    elements = _unique_elements(source)
    if source.shuffle:
        elements = list(elements)
        order = np.random.default_rng(int(source.seed or 0) & SEED_MASK).permutation(len(elements))
        elements = [elements[i] for i in order]

    index = 0
    batch = Batch(index)
    node_ids = set()
    referenced = set()
    for element in elements:
        if element.kind == NODE:
            batch.nodes.append(element)
            node_ids.add(element.id)
        else:
            batch.edges.append(element)
            referenced.add(element.src)
            referenced.add(element.tgt)
        if len(batch) >= source.batch_size:
            yield batch
            index += 1
            batch = Batch(index)

    if len(batch):
        yield batch

    missing = referenced - node_ids
    if missing:
        warn("%s node(s) referenced by edges never appeared in %s: %s" % (len(missing), source, ", ".join(sorted(missing)[:5])))


def _unique_elements(source):
    """Elements of 'source', verifying id uniqueness as they stream by"""
    seen = {}
    for element, path, line_number in read_elements(source):
        previous = seen.get(element.id)
        if previous is not None:
            if previous == element.kind:
                raise InputError("duplicate %s id '%s'" % (element.kind, element.id), path, line_number)
            raise InputError("id '%s' is used by both a node and an edge" % element.id, path, line_number)
        seen[element.id] = element.kind
        yield element


def write_graph(graph, path, edge_path=None, format=None):
    """
    :param PropertyGraph graph: Graph to save
    :param str path: Target file (nodes only if 'edge_path' is given)
    :param str|None edge_path: Optional separate file for edges (required for CSV)
    :param str|None format: One of FORMATS (default: deduced from 'path' extension)
    """
    format = format or guessed_format(path)
    if format == CSV_PAIR:
        if not edge_path:
            abort("CSV output needs both a node file and an edge file")
        _write_csv(path, NODE_CSV_HEADER, graph.nodes.values(), lambda n: [n.id, CSV_LABEL_SEPARATOR.join(n.labels)])
        _write_csv(edge_path, EDGE_CSV_HEADER, graph.edges.values(), lambda e: [e.id, CSV_LABEL_SEPARATOR.join(e.labels), e.src, e.tgt])
        return

    if edge_path:
        _write_jsonl(path, graph.nodes.values())
        _write_jsonl(edge_path, graph.edges.values())
    else:
        _write_jsonl(path, graph.elements())


def _write_jsonl(path, elements):
    with io.open(path, "wt", encoding="utf-8") as fh:
        for element in elements:
            fh.write("%s\n" % json.dumps(element_to_dict(element), ensure_ascii=False, separators=(",", ":")))


def _write_csv(path, fixed_header, elements, fixed_values):
    elements = list(elements)
    keys = sorted(set(k for e in elements for k in e.properties))
    with io.open(path, "wt", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fixed_header + keys)
        for element in elements:
            writer.writerow(fixed_values(element) + [element.properties.get(k, "") for k in keys])


def load_contents(path):
    """ Return contents of file with 'path', if it exists

    :param str path: Path to file
    :return str|None: Contents, if any
    """
    if path:
        try:
            with io.open(path, "rt", encoding="utf-8") as fh:
                return fh.read().strip()

        except IOError:
            return None


def load_yaml(path):
    """
    :param str path: YAML (or JSON) file to read
    :return: Deserialized contents
    """
    with _opened(path) as fh:
        try:
            return yaml.safe_load(fh)

        except UnicodeDecodeError as e:
            raise InputError("invalid UTF-8 (%s)" % e.reason, path)

        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise InputError("invalid YAML (%s)" % getattr(e, "problem", e), path, mark.line + 1 if mark else None)


def save_json(path, data):
    """Write 'data' as deterministic, human-readable JSON"""
    with io.open(path, "wt", encoding="utf-8") as fh:
        fh.write("%s\n" % json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False))


def load_json(path):
    with _opened(path) as fh:
        try:
            return json.load(fh)

        except ValueError as e:
            raise InputError("malformed JSON (%s)" % e, path)
