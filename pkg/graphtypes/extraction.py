"""
Turn clusters into types, and unify types into an evolving schema
"""

import collections

from graphtypes import abort, InputError, to_int, trace
from graphtypes.lsh import UnionFind
from graphtypes.model import (
    ABSTRACT_EDGE_PREFIX,
    ABSTRACT_PREFIX,
    canonical_label_key,
    EDGE,
    EdgePattern,
    EdgeType,
    NODE,
    NodePattern,
    NodeType,
    SchemaGraph,
    UNKNOWN,
)


DEFAULT_THETA = 0.9


class CandidateType(object):
    """Representative pattern of a cluster, with the ids of its members"""

    def __init__(self, representative, members, endpoint_ids=None, endpoint_types=None, origin=None):
        """
        :param NodePattern|EdgePattern representative: Union of labels and keys (and endpoint labels) of members
        :param members: Element ids
        :param endpoint_ids: (source id, target id) of member edges
        :param endpoint_types: (source type, target type) names, for candidates coming from another schema
        :param str|None origin: Name of the type this candidate was made from, if any
        """
        self.representative = representative
        self.members = sorted(members)
        self.endpoint_ids = frozenset(endpoint_ids or ())
        self.endpoint_types = frozenset(endpoint_types or ())
        self.origin = origin

    def __repr__(self):
        return "%s x%s" % (self.representative, len(self.members))

    @property
    def kind(self):
        return EDGE if isinstance(self.representative, EdgePattern) else NODE

    @property
    def labels(self):
        return self.representative.labels

    @property
    def keys(self):
        return self.representative.keys

    @property
    def labeled(self):
        return bool(self.representative.labels)

    @property
    def label_key(self):
        return canonical_label_key(self.representative.labels)


def cluster_representative(cluster, graph):
    """
    :param cluster: Ids of elements of the same kind
    :param PropertyGraph graph: Graph holding the elements (and edge endpoints)
    :return CandidateType: Union of labels and keys of the members
    """
    members = sorted(cluster or ())
    if not members:
        raise InputError("can't summarize an empty cluster")
    if all(m in graph.nodes for m in members):
        labels, keys = set(), set()
        for m in members:
            node = graph.nodes[m]
            labels.update(node.labels)
            keys.update(node.properties)
        return CandidateType(NodePattern(labels, keys), members)

    if not all(m in graph.edges for m in members):
        raise InputError("cluster mixes nodes and edges, or refers to unknown elements: %s" % ", ".join(members[:5]))
    labels, keys, sources, targets, endpoint_ids = set(), set(), set(), set(), set()
    for m in members:
        edge = graph.edges[m]
        src, tgt = graph.endpoint_labels(edge)
        labels.update(edge.labels)
        keys.update(edge.properties)
        sources.update(src)
        targets.update(tgt)
        endpoint_ids.add((edge.src, edge.tgt))
    return CandidateType(EdgePattern(labels, keys, (sources, targets)), members, endpoint_ids=endpoint_ids)


def jaccard(a, b):
    """Jaccard similarity of two key sets, 1.0 for two empty sets"""
    a = set(a)
    b = set(b)
    union = len(a | b)
    if not union:
        return 1.0
    return len(a & b) / float(union)


def abstract_index(name, kind):
    """Number of an ABSTRACT type name, None for other names"""
    prefix = ABSTRACT_PREFIX if kind == NODE else ABSTRACT_EDGE_PREFIX
    if name and name.startswith(prefix):
        return to_int(name[len(prefix):])


def endpoint_tokens(endpoints):
    return set(["src:%s" % s for s, _ in endpoints] + ["tgt:%s" % t for _, t in endpoints])


class _Draft(object):
    """Type being built: accumulates labels, keys and endpoints"""

    def __init__(self, kind, name=None, labels=None, keys=None, endpoints=None):
        self.kind = kind
        self.name = name
        self.labels = set(labels or ())
        self.keys = set(keys or ())
        self.endpoints = set(endpoints or ())

    def absorb(self, other):
        self.labels.update(other.labels)
        self.keys.update(other.keys)
        self.endpoints.update(other.endpoints)

    @property
    def tokens(self):
        if self.kind == NODE:
            return self.keys
        return self.keys | endpoint_tokens(self.endpoints)

    def schema_type(self):
        if self.kind == NODE:
            return NodeType(self.name, labels=self.labels, properties=self.keys)
        return EdgeType(self.name, labels=self.labels, properties=self.keys, endpoints=self.endpoints)


class _Entry(object):
    """Unlabeled candidate, or existing ABSTRACT type, waiting to be placed"""

    def __init__(self, draft, members=None, origin=None, existing=None):
        self.draft = draft
        self.members = members or []
        self.origin = origin
        self.existing = existing

    def sort_key(self):
        return sorted(self.draft.tokens), self.existing or "", self.members[:1]


class _Unification(object):
    """Outcome of placing candidates of one kind into existing types"""

    def __init__(self, kind):
        self.kind = kind
        self.types = {}  # type: dict[str, _Draft]
        self.members = {}  # Element id -> type name
        self.renames = {}  # Old ABSTRACT name -> new name
        self.origins = {}  # Candidate origin -> type name

    def settle(self, entry, name):
        for m in entry.members:
            self.members[m] = name
        if entry.existing and entry.existing != name:
            self.renames[entry.existing] = name
        if entry.origin:
            self.origins[entry.origin] = name


def _best_labeled(labeled, tokens, theta):
    best = None
    best_score = None
    for name in sorted(labeled):
        score = jaccard(tokens, labeled[name].tokens)
        if score >= theta and (best_score is None or score > best_score):
            best, best_score = name, score
    return best


def _unify(kind, existing_types, candidates, theta, endpoints_of, renamed_endpoint):
    result = _Unification(kind)
    labeled = {}
    entries = []
    passthrough = []
    indices = [-1]
    for t in sorted(existing_types.values()):
        endpoints = set((renamed_endpoint(s), renamed_endpoint(d)) for s, d in getattr(t, "endpoints", ()))
        draft = _Draft(kind, t.name, t.labels, t.keys, endpoints)
        if t.name == UNKNOWN:
            passthrough.append(draft)
        elif t.labels:
            labeled[t.name] = draft
        else:
            index = abstract_index(t.name, kind)
            if index is not None:
                indices.append(index)
            entries.append(_Entry(draft, existing=t.name))

    for c in candidates:
        draft = _Draft(kind, None, c.labels, c.keys, endpoints_of(c))
        if c.labeled:
            key = c.label_key
            target = labeled.get(key)
            if target is None:
                target = labeled[key] = _Draft(kind, key)
            target.absorb(draft)
            result.settle(_Entry(draft, c.members, c.origin), key)
        else:
            entries.append(_Entry(draft, c.members, c.origin))

    entries.sort(key=_Entry.sort_key)
    remaining = []
    for entry in entries:
        best = _best_labeled(labeled, entry.draft.tokens, theta)
        if best is None:
            remaining.append(entry)
        else:
            labeled[best].absorb(entry.draft)
            result.settle(entry, best)

    uf = UnionFind(len(remaining))
    for i, x in enumerate(remaining):
        for j in range(i + 1, len(remaining)):
            if jaccard(x.draft.tokens, remaining[j].draft.tokens) >= theta:
                uf.union(i, j)

    groups = collections.OrderedDict()
    for entry, component in zip(remaining, uf.components()):
        groups.setdefault(component, []).append(entry)

    prefix = ABSTRACT_PREFIX if kind == NODE else ABSTRACT_EDGE_PREFIX
    next_index = max(indices) + 1
    for group in groups.values():
        names = sorted((abstract_index(e.existing, kind), e.existing) for e in group if e.existing)
        if names:
            name = names[0][1]
        else:
            name = "%s%s" % (prefix, next_index)
            next_index += 1
        draft = _Draft(kind, name)
        for entry in group:
            draft.absorb(entry.draft)
            result.settle(entry, name)
        result.types[name] = draft

    result.types.update(labeled)
    for draft in passthrough:
        result.types[draft.name] = draft
    return result


def _check_theta(theta):
    if theta is None or not 0 <= theta <= 1:
        abort("Theta must be in [0, 1], got %s" % theta)


def extract_types_with_renames(candidates, existing=None, theta=DEFAULT_THETA):
    """
    :param list[CandidateType] candidates: Candidates of this run (nodes and edges)
    :param SchemaGraph|None existing: Schema to extend
    :param float theta: Jaccard threshold for placing unlabeled candidates
    :return (SchemaGraph, dict): Unified schema (with assignment), and ABSTRACT renames that took place
    """
    _check_theta(theta)
    existing = existing or SchemaGraph()
    candidates = list(candidates)
    node_candidates = [c for c in candidates if c.kind == NODE]
    edge_candidates = [c for c in candidates if c.kind == EDGE]

    nodes = _unify(NODE, existing.node_types, node_candidates, theta, lambda c: (), lambda name: name)
    old_assignment = dict((i, nodes.renames.get(n, n)) for i, n in (existing.assignment or {}).items())

    def resolved(node_id):
        return nodes.members.get(node_id) or old_assignment.get(node_id) or UNKNOWN

    def endpoints_of(candidate):
        pairs = set((resolved(s), resolved(t)) for s, t in candidate.endpoint_ids)
        pairs.update((nodes.origins.get(s, s), nodes.origins.get(t, t)) for s, t in candidate.endpoint_types)
        return pairs

    edges = _unify(EDGE, existing.edge_types, edge_candidates, theta, endpoints_of, lambda name: nodes.renames.get(name, name))

    node_types = [d.schema_type() for d in nodes.types.values()]
    edge_types = [d.schema_type() for d in edges.types.values()]
    if UNKNOWN not in nodes.types and any(UNKNOWN in pair for t in edge_types for pair in t.endpoints):
        node_types.append(NodeType(UNKNOWN))

    assignment = dict((i, edges.renames.get(n, n)) for i, n in old_assignment.items())
    assignment.update(nodes.members)
    assignment.update(edges.members)
    renames = dict(nodes.renames)
    renames.update(edges.renames)
    schema = SchemaGraph(sorted(node_types), sorted(edge_types), assignment=assignment)
    trace("extracted %s from %s candidates (renames: %s)" % (schema, len(candidates), renames or "none"))
    return schema, renames


def extract_types(candidates, existing=None, theta=DEFAULT_THETA):
    """
    :param list[CandidateType] candidates: Candidates of this run (nodes and edges)
    :param SchemaGraph|None existing: Schema to extend
    :param float theta: Jaccard threshold for placing unlabeled candidates
    :return SchemaGraph: Unified schema, its 'assignment' maps every element seen so far to its type
    """
    return extract_types_with_renames(candidates, existing=existing, theta=theta)[0]


def merge_node_types(t1, t2):
    """Union of labels and keys (name follows the merged labels, or stays t1's for abstract types)"""
    labels = t1.labels | t2.labels
    name = canonical_label_key(labels) if labels else t1.name
    return NodeType(name, labels=labels, properties=t1.keys | t2.keys)


def merge_edge_types(t1, t2):
    """Union of labels, keys and endpoints"""
    labels = t1.labels | t2.labels
    name = canonical_label_key(labels) if labels else t1.name
    return EdgeType(name, labels=labels, properties=t1.keys | t2.keys, endpoints=t1.endpoints | t2.endpoints)


def _candidates_of(schema):
    members = collections.defaultdict(list)
    for element_id, name in (schema.assignment or {}).items():
        members[name].append(element_id)
    for t in schema.node_types.values():
        if t.name != UNKNOWN:
            yield CandidateType(NodePattern(t.labels, t.keys), members[t.name], origin=t.name)
    for t in schema.edge_types.values():
        pattern = EdgePattern(t.labels, t.keys)
        yield CandidateType(pattern, members[t.name], endpoint_types=t.endpoints, origin=t.name)


def merge_schemas(s1, s2, theta=DEFAULT_THETA):
    """
    :param SchemaGraph s1: Schema to extend
    :param SchemaGraph s2: Schema whose types are merged into 's1'
    :param float theta: Jaccard threshold for placing unlabeled types
    :return SchemaGraph: Least general schema covering both
    """
    return extract_types(list(_candidates_of(s2)), existing=s1, theta=theta)


def _covers(t1, t2):
    return t1.labels <= t2.labels and t1.keys <= t2.keys


def _labeled_endpoints(t):
    return set(p for p in t.endpoints if all(n != UNKNOWN and abstract_index(n, NODE) is None for n in p))


def schema_contains(s1, s2):
    """
    :param SchemaGraph s1: Earlier schema
    :param SchemaGraph s2: Later schema
    :return bool: True if every type of 's1' is covered by a type of 's2' (same name, or absorbing ABSTRACT lineage)
    """
    for kind in (NODE, EDGE):
        later = s2.types(kind)
        for t1 in s1.types(kind).values():
            t2 = later.get(t1.name)
            if t2 is not None and _covers(t1, t2):
                if kind == EDGE and not _labeled_endpoints(t1) <= t2.endpoints:
                    return False
                continue
            if t1.labels or not any(_covers(t1, t) for t in later.values()):
                return False
    return True


def missing_from_schema(graph, schema):
    """
    :param PropertyGraph graph: Data the schema was discovered from
    :param SchemaGraph schema: Discovered schema
    :return list[str]: Labels and property keys of 'graph' that no type of 'schema' carries
    """
    result = []
    for kind, elements in ((NODE, graph.nodes.values()), (EDGE, graph.edges.values())):
        labels = set()
        keys = set()
        for element in elements:
            labels.update(element.labels)
            keys.update(element.properties)
        result.extend("%s label %s" % (kind, s) for s in sorted(labels - schema.labels(kind)))
        result.extend("%s key %s" % (kind, k) for k in sorted(keys - schema.keys(kind)))
    return result
