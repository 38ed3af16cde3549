"""
Discovery pipeline: featurize, cluster, extract and post-process, one batch at a time
"""

import collections
import contextlib
import io
import logging
import os

from codetiming import Timer

from graphtypes import ensure_folder, trace, warn
from graphtypes.constraints import DegreeStats, postprocess, TypeStats
from graphtypes.content import load_graph, save_json, stream_batches
from graphtypes.extraction import cluster_representative, DEFAULT_THETA, extract_types_with_renames, missing_from_schema
from graphtypes.featurize import DEFAULT_DIM, edge_tokens, EmbeddingTable, feature_matrix, node_tokens, PropertyIndex
from graphtypes.lsh import (
    DEFAULT_BUCKET_LENGTH,
    DEFAULT_MIN_JACCARD,
    DEFAULT_RADIUS,
    DEFAULT_TABLES,
    elsh_components,
    ELSH,
    estimate_params,
    LshParams,
    MIN_TABLES,
    minhash_components,
)
from graphtypes.model import EDGE, Node, NODE, PropertyGraph, SchemaGraph
from graphtypes.serialize import schema_to_json, write_schema


STAGES = ("load", "featurize", "cluster", "extract", "postprocess", "serialize")
TIMINGS_FILE = "timings.log"


class StageTimer(object):
    """Wall time per stage (aggregated over batches), and per batch"""

    def __init__(self):
        self.stages = collections.OrderedDict((s, 0.0) for s in STAGES)
        self.batches = []

    def __repr__(self):
        return ", ".join("%s: %.3fs" % (k, v) for k, v in self.stages.items())

    @contextlib.contextmanager
    def stage(self, name):
        timer = Timer(text="%s took {:.3f}s" % name, logger=logging.debug)
        timer.start()
        try:
            yield

        finally:
            self.stages[name] = self.stages.get(name, 0.0) + timer.stop()

    @property
    def total(self):
        return sum(self.stages.values())

    def lines(self):
        result = ["%s %.6f" % (k, v) for k, v in self.stages.items()]
        result.extend("batch%s %.6f" % (i, v) for i, v in enumerate(self.batches))
        return result

    def save(self, path):
        with io.open(path, "wt", encoding="utf-8") as fh:
            fh.write("%s\n" % "\n".join(self.lines()))


class DiscoveryConfig(object):
    """Tunables of a discovery run"""

    def __init__(self, method=ELSH, theta=DEFAULT_THETA, dim=DEFAULT_DIM, seed=42, adaptive=True, bucket_length=None,
                 tables=None, radius=DEFAULT_RADIUS, min_jaccard=DEFAULT_MIN_JACCARD, stratify=True, sample_datatypes=False, threads=1,
                 alpha=None):
        """
        :param str method: ELSH or MINHASH
        :param float theta: Jaccard threshold used when placing unlabeled types
        :param int dim: Label embedding dimension
        :param int seed: Seed of everything random
        :param bool adaptive: Estimate bucket length and number of tables from the data
        :param float|None bucket_length: Bucket length (overrides adaptive estimate)
        :param int|None tables: Number of hash tables (overrides adaptive estimate)
        :param float|None radius: ELSH collision verification radius
        :param float|None min_jaccard: MinHash collision verification threshold
        :param bool stratify: Never join collisions of elements with different label keys
        :param bool sample_datatypes: Infer datatypes from a sample of the values
        :param int threads: Worker threads
        :param float|None alpha: Bucket scale applied to the estimated base bucket length, instead of the one derived from label count
        """
        self.method = method
        self.theta = theta
        self.dim = dim
        self.seed = seed
        self.adaptive = adaptive
        self.bucket_length = bucket_length
        self.tables = tables
        self.radius = radius
        self.min_jaccard = min_jaccard
        self.stratify = stratify
        self.sample_datatypes = sample_datatypes
        self.threads = threads
        self.alpha = alpha

    def __repr__(self):
        return ", ".join("%s=%s" % (k, v) for k, v in sorted(self.__dict__.items()))

    def replaced(self, **kwargs):
        values = dict(self.__dict__)
        values.update(kwargs)
        return DiscoveryConfig(**values)


def _signature(element, graph):
    if element.kind == NODE:
        return element.label_key, frozenset(element.properties)
    return (
        element.label_key,
        frozenset(element.properties),
        graph.nodes[element.src].label_key,
        graph.nodes[element.tgt].label_key,
    )


class Discovery(object):
    """Evolving schema, fed with batches of nodes and edges"""

    def __init__(self, config=None, timer=None):
        self.config = config or DiscoveryConfig()
        self.timer = timer or StageTimer()
        self.schema = SchemaGraph(assignment={})
        self.embedding = EmbeddingTable(dim=self.config.dim, seed=self.config.seed)
        self.indices = {NODE: PropertyIndex(NODE), EDGE: PropertyIndex(EDGE)}
        self.node_labels = {}  # Node id -> labels, of all nodes seen so far
        self.type_stats = TypeStats()
        self.degrees = DegreeStats()
        self.pending = []  # Edges waiting for their endpoints to show up
        self.params = {}  # Kind -> LshParams used for the last batch
        self.estimates = {}  # Kind -> last AdaptiveEstimate
        self.batch_count = 0

    def __repr__(self):
        return "discovery after %s batches: %s" % (self.batch_count, self.schema)

    def lsh_params(self, kind, matrix, rows, elements):
        """Parameters for clustering 'elements' (feature rows given by 'matrix' and 'rows')"""
        config = self.config
        fallback = DEFAULT_BUCKET_LENGTH, DEFAULT_TABLES
        if config.adaptive:
            if len(elements) < 2:
                fallback = DEFAULT_BUCKET_LENGTH, MIN_TABLES
            else:
                labels = set(s for e in elements for s in e.labels)
                estimate = estimate_params(matrix, len(elements), len(labels), kind=kind, seed=config.seed, rows=rows, method=config.method)
                self.estimates[kind] = estimate
                fallback = estimate.resolved.bucket_length, estimate.resolved.num_tables
                if config.alpha is not None and estimate.b_base > 0:
                    fallback = estimate.b_base * config.alpha, fallback[1]
        return LshParams(
            method=config.method,
            bucket_length=config.bucket_length if config.bucket_length is not None else fallback[0],
            num_tables=config.tables if config.tables is not None else fallback[1],
            seed=config.seed,
            radius=config.radius,
            min_jaccard=config.min_jaccard,
        )

    def cluster(self, kind, elements, graph):
        """
        :param str kind: NODE or EDGE
        :param list elements: Elements of 'kind' to cluster
        :param PropertyGraph graph: Graph resolving edge endpoints
        :return list[list[str]]: Clusters of element ids
        """
        if not elements:
            return []
        with self.timer.stage("featurize"):
            patterns = collections.OrderedDict()
            rows = [patterns.setdefault(_signature(e, graph), len(patterns)) for e in elements]
            representatives = [None] * len(patterns)
            for element, row in zip(elements, rows):
                if representatives[row] is None:
                    representatives[row] = element
            index = self.indices[kind]
            index.extend(k for e in representatives for k in e.properties)
            self.embedding.extend(k for signature in patterns for k in signature if isinstance(k, str))
            matrix = feature_matrix(representatives, index, self.embedding, graph=graph)

        with self.timer.stage("cluster"):
            params = self.lsh_params(kind, matrix, rows, elements)
            self.params[kind] = params
            strata = [e.label_key for e in representatives] if self.config.stratify else None
            if params.method == ELSH:
                components = elsh_components(matrix, params, strata=strata)
            else:
                tokens = [node_tokens(e) if kind == NODE else edge_tokens(e, graph) for e in representatives]
                components = minhash_components(tokens, params, strata=strata, threads=self.config.threads)

            clusters = collections.OrderedDict()
            for element, row in zip(elements, rows):
                clusters.setdefault(components[row], []).append(element.id)
            trace("%s %s-s -> %s patterns -> %s clusters with %s" % (len(elements), kind, len(patterns), len(clusters), params))
            return list(clusters.values())

    def _ready_edges(self, nodes, edges, final):
        """Edges of this batch (and deferred ones) whose endpoints are known"""
        known = self.node_labels
        batch_ids = set(n.id for n in nodes)
        ready = []
        waiting = []
        for edge in self.pending + list(edges):
            if final or all(i in known or i in batch_ids for i in (edge.src, edge.tgt)):
                ready.append(edge)
            else:
                waiting.append(edge)
        self.pending = waiting
        return ready

    def feed(self, nodes, edges, final=False):
        """
        :param list[Node] nodes: Nodes of this batch
        :param list[Edge] edges: Edges of this batch
        :param bool final: If True, edges with still unknown endpoints are typed anyway (endpoint type UNKNOWN)
        :return SchemaGraph: Evolving schema (not post-processed)
        """
        nodes = list(nodes)
        edges = self._ready_edges(nodes, edges, final)
        for node in nodes:
            self.node_labels[node.id] = node.labels

        graph = PropertyGraph(nodes)
        unresolved = 0
        for edge in edges:
            for node_id in (edge.src, edge.tgt):
                if node_id not in graph.nodes:
                    labels = self.node_labels.get(node_id)
                    if labels is None:
                        unresolved += 1
                    graph.add_node(Node(node_id, labels=labels))
            graph.add_edge(edge)

        if unresolved:
            warn("%s edge endpoint(s) never showed up, their type is UNKNOWN" % unresolved)

        clusters = self.cluster(NODE, nodes, graph) + self.cluster(EDGE, edges, graph)
        with self.timer.stage("extract"):
            candidates = [cluster_representative(c, graph) for c in clusters]
            self.schema, renames = extract_types_with_renames(candidates, existing=self.schema, theta=self.config.theta)
            self.type_stats.rename(renames)
            self.degrees.rename(renames)
            assignment = self.schema.assignment
            self.type_stats.merge(TypeStats.of(nodes + edges, assignment))
            self.degrees.merge(DegreeStats.of(edges, assignment))
            graph.nodes = collections.OrderedDict((n.id, n) for n in nodes)
            missing = missing_from_schema(graph, self.schema)
            if missing:
                warn("schema misses: %s" % ", ".join(missing))

        self.batch_count += 1
        logging.info("batch %s: %s nodes, %s edges (%s deferred) -> %s" % (self.batch_count - 1, len(nodes), len(edges), len(self.pending), self.schema))
        return self.schema

    def finish(self):
        """Type edges still waiting for their endpoints"""
        if self.pending:
            self.feed([], [], final=True)
        return self.schema

    def result(self, postprocessed=True):
        """
        :param bool postprocessed: If True, compute constraints, datatypes and cardinalities
        :return SchemaGraph: Current schema
        """
        if not postprocessed:
            return self.schema.copy()
        with self.timer.stage("postprocess"):
            return postprocess(self.schema, self.type_stats, self.degrees, sampled=self.config.sample_datatypes, seed=self.config.seed)


def discover_graph(graph, config=None, postprocessed=True, timer=None):
    """
    :param PropertyGraph graph: Whole graph
    :param DiscoveryConfig|None config: Tunables
    :param bool postprocessed: Post-process the resulting schema
    :param StageTimer|None timer: Optional timer to record stage times into
    :return SchemaGraph: Discovered schema (with assignment of every element)
    """
    discovery = Discovery(config=config, timer=timer)
    discovery.feed(graph.nodes.values(), graph.edges.values())
    return discovery.result(postprocessed=postprocessed)


def _save_timings(timer, out):
    path = os.path.join(out, TIMINGS_FILE)
    timer.save(path)
    logging.info("timings: %s" % timer)
    return path


def run_discover(source, config, out, postprocessed=True):
    """
    :param GraphSource source: Where to read the graph from
    :param DiscoveryConfig config: Tunables
    :param str out: Output folder
    :param bool postprocessed: Post-process the schema (required for STRICT output)
    :return (SchemaGraph, list[str]): Discovered schema, and written files
    """
    ensure_folder(out)
    timer = StageTimer()
    with timer.stage("load"):
        graph = load_graph(source)
    logging.info("loaded %s" % graph)
    schema = discover_graph(graph, config=config, postprocessed=postprocessed, timer=timer)
    with timer.stage("serialize"):
        paths = write_schema(schema, out)
    paths.append(_save_timings(timer, out))
    return schema, paths


def run_incremental(source, config, out, postprocess_batches=False):
    """
    :param GraphSource source: Where to read the graph from (with batch size)
    :param DiscoveryConfig config: Tunables
    :param str out: Output folder
    :param bool postprocess_batches: Post-process every batch snapshot (the final schema always is)
    :return (list[SchemaGraph], SchemaGraph, list[str]): Snapshot after each batch, final schema, and written files
    """
    ensure_folder(out)
    timer = StageTimer()
    discovery = Discovery(config=config, timer=timer)
    snapshots = []
    paths = []
    batches = stream_batches(source)
    while True:
        batch_timer = Timer(logger=None)
        batch_timer.start()
        with timer.stage("load"):
            batch = next(batches, None)
        if batch is None:
            break
        discovery.feed(batch.nodes, batch.edges)
        snapshot = discovery.result(postprocessed=postprocess_batches)
        with timer.stage("serialize"):
            path = os.path.join(out, "schema.batch%s.json" % batch.index)
            save_json(path, schema_to_json(snapshot))
        snapshots.append(snapshot)
        paths.append(path)
        timer.batches.append(batch_timer.stop())

    batch_timer = Timer(logger=None)
    batch_timer.start()
    pending = len(discovery.pending)
    discovery.finish()
    schema = discovery.result(postprocessed=True)
    with timer.stage("serialize"):
        paths.extend(write_schema(schema, out))
    if pending:
        timer.batches.append(batch_timer.stop())
    paths.append(_save_timings(timer, out))
    return snapshots, schema, paths
