"""
Model of property graphs, their patterns, and the schema discovered from them
"""

import collections
import enum

from graphtypes import InputError, short


NODE = "node"
EDGE = "edge"
KINDS = (NODE, EDGE)

LABEL_SEPARATOR = "&"  # Multi-label elements are keyed by their sorted labels joined with this
ABSTRACT_PREFIX = "ABSTRACT_"
ABSTRACT_EDGE_PREFIX = "ABSTRACT_EDGE_"
UNKNOWN = "UNKNOWN"  # Node type standing for endpoints that could not be resolved


def canonical_label_key(labels):
    """
    :param labels: Label strings (any iterable, possibly empty or None)
    :return str: Labels sorted lexicographically and joined by '&', empty string for no labels
    """
    if not labels:
        return ""
    return LABEL_SEPARATOR.join(sorted(set(labels)))


def labels_of_key(key):
    """Inverse of canonical_label_key()"""
    if not key:
        return frozenset()
    return frozenset(key.split(LABEL_SEPARATOR))


def _checked_id(value, what):
    if value is None or value == "":
        raise InputError("%s without an id" % what)
    return value if isinstance(value, str) else "%s" % value


class Element(object):
    """Common part of nodes and edges: opaque id, sorted label set, raw string properties"""

    kind = None  # type: str

    def __init__(self, id, labels=None, properties=None):
        """
        :param str id: Opaque identifier
        :param labels: Label strings, duplicates are dropped
        :param dict properties: Property key -> raw string value
        """
        self.id = _checked_id(id, self.kind)
        labels = list(labels or ())
        for label in labels:
            if not isinstance(label, str):
                raise InputError("%s '%s' has a non-string label %s" % (self.kind, self.id, repr(label)))
        labels = set(labels)
        if "" in labels:
            raise InputError("%s '%s' has an empty label" % (self.kind, self.id))
        self.labels = tuple(sorted(labels))
        self.properties = {}
        for key, value in (properties or {}).items():
            if not key or not isinstance(key, str):
                raise InputError("%s '%s' has an invalid property key %s" % (self.kind, self.id, repr(key)))
            self.properties[key] = value if isinstance(value, str) else "%s" % value

    def __repr__(self):
        return "%s %s %s %s" % (self.kind, self.id, self.label_key or "-", short(sorted(self.properties), c=60))

    def __eq__(self, other):
        return (
            isinstance(other, Element)
            and self.kind == other.kind
            and self.id == other.id
            and self.labels == other.labels
            and self.properties == other.properties
        )

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.kind, self.id))

    @property
    def label_key(self):
        return LABEL_SEPARATOR.join(self.labels)

    @property
    def keys(self):
        return frozenset(self.properties)


class Node(Element):

    kind = NODE

    def replaced(self, labels=None, properties=None):
        """Copy of this node, with 'labels' and/or 'properties' replaced"""
        return Node(
            self.id,
            labels=self.labels if labels is None else labels,
            properties=self.properties if properties is None else properties,
        )


class Edge(Element):

    kind = EDGE

    def __init__(self, id, src, tgt, labels=None, properties=None):
        """
        :param str id: Opaque identifier
        :param str src: Id of source node
        :param str tgt: Id of target node
        :param labels: Label strings
        :param dict properties: Property key -> raw string value
        """
        Element.__init__(self, id, labels=labels, properties=properties)
        self.src = _checked_id(src, "source of edge '%s'" % self.id)
        self.tgt = _checked_id(tgt, "target of edge '%s'" % self.id)

    def __repr__(self):
        return "%s %s->%s" % (Element.__repr__(self), self.src, self.tgt)

    def __eq__(self, other):
        return Element.__eq__(self, other) and self.src == other.src and self.tgt == other.tgt

    def __hash__(self):
        return Element.__hash__(self)

    def replaced(self, labels=None, properties=None):
        """Copy of this edge, with 'labels' and/or 'properties' replaced"""
        return Edge(
            self.id,
            self.src,
            self.tgt,
            labels=self.labels if labels is None else labels,
            properties=self.properties if properties is None else properties,
        )


class PropertyGraph(object):
    """Nodes and edges keyed by id, in ingestion order"""

    def __init__(self, nodes=None, edges=None):
        self.nodes = collections.OrderedDict()  # type: dict[str, Node]
        self.edges = collections.OrderedDict()  # type: dict[str, Edge]
        for node in nodes or ():
            self.add_node(node)
        for edge in edges or ():
            self.add_edge(edge)

    def __repr__(self):
        return "%s nodes, %s edges" % (len(self.nodes), len(self.edges))

    def __len__(self):
        return len(self.nodes) + len(self.edges)

    def __eq__(self, other):
        return (
            isinstance(other, PropertyGraph)
            and list(self.nodes.values()) == list(other.nodes.values())
            and list(self.edges.values()) == list(other.edges.values())
        )

    def __ne__(self, other):
        return not self == other

    def elements(self):
        """All nodes, then all edges"""
        for node in self.nodes.values():
            yield node
        for edge in self.edges.values():
            yield edge

    def add_node(self, node):
        if node.id in self.nodes:
            raise InputError("duplicate node id '%s'" % node.id)
        if node.id in self.edges:
            raise InputError("id '%s' is used by both a node and an edge" % node.id)
        self.nodes[node.id] = node

    def add_edge(self, edge, check=True):
        """
        :param Edge edge: Edge to add
        :param bool check: If False, endpoint existence is left for a later validate()
        """
        if edge.id in self.edges:
            raise InputError("duplicate edge id '%s'" % edge.id)
        if edge.id in self.nodes:
            raise InputError("id '%s' is used by both a node and an edge" % edge.id)
        if check:
            self._check_endpoints(edge)
        self.edges[edge.id] = edge

    def _check_endpoints(self, edge):
        for node_id in (edge.src, edge.tgt):
            if node_id not in self.nodes:
                raise InputError("edge '%s' references unknown node '%s'" % (edge.id, node_id))

    def validate(self):
        """Verify that every edge endpoint resolves to a node"""
        for edge in self.edges.values():
            self._check_endpoints(edge)

    def endpoint_labels(self, edge):
        """
        :param Edge edge: Edge to examine
        :return (tuple, tuple): Labels of source and target nodes
        """
        self._check_endpoints(edge)
        return self.nodes[edge.src].labels, self.nodes[edge.tgt].labels

    def label_keys(self):
        """Canonical label keys of all elements"""
        return set(e.label_key for e in self.elements())


class NodePattern(object):
    """(labels, property keys) signature of a node"""

    def __init__(self, labels=None, keys=None):
        self.labels = frozenset(labels or ())
        self.keys = frozenset(keys or ())

    def __repr__(self):
        return self.canonical()

    def __eq__(self, other):
        return isinstance(other, NodePattern) and self.labels == other.labels and self.keys == other.keys

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.labels, self.keys))

    def __lt__(self, other):
        return self.canonical() < other.canonical()

    def canonical(self):
        return "%s{%s}" % (canonical_label_key(self.labels), ",".join(sorted(self.keys)))


class EdgePattern(NodePattern):
    """(labels, property keys, (source labels, target labels)) signature of an edge"""

    def __init__(self, labels=None, keys=None, endpoints=None):
        NodePattern.__init__(self, labels=labels, keys=keys)
        src, tgt = endpoints or ((), ())
        self.endpoints = (frozenset(src), frozenset(tgt))

    def __eq__(self, other):
        return isinstance(other, EdgePattern) and NodePattern.__eq__(self, other) and self.endpoints == other.endpoints

    def __hash__(self):
        return hash((self.labels, self.keys, self.endpoints))

    def canonical(self):
        return "%s(%s->%s)" % (
            NodePattern.canonical(self),
            canonical_label_key(self.endpoints[0]),
            canonical_label_key(self.endpoints[1]),
        )


def node_pattern_of(node):
    """
    :param Node node: Node to examine
    :return NodePattern: Its labels and property keys
    """
    return NodePattern(node.labels, node.properties)


def edge_pattern_of(edge, graph):
    """
    :param Edge edge: Edge to examine
    :param PropertyGraph graph: Graph where 'edge' endpoints are defined
    :return EdgePattern: Its labels, property keys, and endpoint label sets
    """
    return EdgePattern(edge.labels, edge.properties, graph.endpoint_labels(edge))


class Datatype(enum.Enum):
    """Property datatypes, forming a join semi-lattice with STRING on top"""

    INTEGER = "INTEGER"
    FLOAT = "FLOAT"
    BOOLEAN = "BOOLEAN"
    DATE = "DATE"
    DATETIME = "DATETIME"
    STRING = "STRING"

    def __repr__(self):
        return self.value

    def __str__(self):
        return self.value

    def ancestors(self):
        """This datatype followed by every datatype above it"""
        result = [self]
        parent = _DATATYPE_PARENTS.get(self)
        while parent is not None:
            result.append(parent)
            parent = _DATATYPE_PARENTS.get(parent)
        return result

    def leq(self, other):
        """Is this datatype at or below 'other' in the lattice?"""
        return other in self.ancestors()

    def join(self, other):
        """Most specific datatype accepting values of both self and 'other'"""
        if other is None:
            return self
        above = other.ancestors()
        for candidate in self.ancestors():
            if candidate in above:
                return candidate
        return Datatype.STRING  # pragma: no cover, STRING is above everything


_DATATYPE_PARENTS = {
    Datatype.INTEGER: Datatype.FLOAT,
    Datatype.FLOAT: Datatype.STRING,
    Datatype.BOOLEAN: Datatype.STRING,
    Datatype.DATE: Datatype.DATETIME,
    Datatype.DATETIME: Datatype.STRING,
}


class Constraint(enum.Enum):

    MANDATORY = "MANDATORY"
    OPTIONAL = "OPTIONAL"

    def __str__(self):
        return self.value


class Cardinality(enum.Enum):
    """Multiplicity class of an edge type, value is its display notation"""

    ZERO_ONE = "0:1"
    N_TO_ONE = "N:1"
    ONE_TO_N = "0:N"
    M_TO_N = "M:N"
    UNSET = ""

    def __str__(self):
        return self.name

    @property
    def notation(self):
        return self.value


# Annotations of one property of a type, both None until post-processing
PropertySpec = collections.namedtuple("PropertySpec", "datatype constraint")
PropertySpec.__new__.__defaults__ = (None, None)


def _property_map(properties):
    if isinstance(properties, dict):
        return dict((k, v if isinstance(v, PropertySpec) else PropertySpec()) for k, v in properties.items())
    return dict((k, PropertySpec()) for k in properties or ())


class SchemaType(object):
    """Common part of node and edge types"""

    kind = None  # type: str

    def __init__(self, name, labels=None, properties=None):
        """
        :param str name: Unique name of this type (within its kind)
        :param labels: Label strings
        :param properties: Property keys, or dict key -> PropertySpec
        """
        self.name = name
        self.labels = frozenset(labels or ())
        self.properties = _property_map(properties)  # type: dict[str, PropertySpec]

    def __repr__(self):
        return "%s %s %s" % (self.kind, self.name, short(sorted(self.properties), c=60))

    def __eq__(self, other):
        return (
            isinstance(other, SchemaType)
            and self.kind == other.kind
            and self.name == other.name
            and self.labels == other.labels
            and self.properties == other.properties
        )

    def __ne__(self, other):
        return not self == other

    def __lt__(self, other):
        return self.name < other.name

    def __hash__(self):
        return hash((self.kind, self.name))

    @property
    def abstract(self):
        return not self.labels

    @property
    def label_key(self):
        return canonical_label_key(self.labels)

    @property
    def keys(self):
        return frozenset(self.properties)

    def mandatory_keys(self):
        return sorted(k for k, v in self.properties.items() if v.constraint == Constraint.MANDATORY)


class NodeType(SchemaType):

    kind = NODE

    def renamed(self, name=None, labels=None, properties=None):
        return NodeType(
            self.name if name is None else name,
            labels=self.labels if labels is None else labels,
            properties=self.properties if properties is None else properties,
        )


class EdgeType(SchemaType):

    kind = EDGE

    def __init__(self, name, labels=None, properties=None, endpoints=None, cardinality=Cardinality.UNSET, max_out=None, max_in=None):
        """
        :param str name: Unique name of this edge type
        :param labels: Label strings
        :param properties: Property keys, or dict key -> PropertySpec
        :param endpoints: (source node type name, target node type name) pairs
        :param Cardinality cardinality: Multiplicity class, UNSET until post-processing
        :param int|None max_out: Max distinct targets per source
        :param int|None max_in: Max distinct sources per target
        """
        SchemaType.__init__(self, name, labels=labels, properties=properties)
        self.endpoints = frozenset(tuple(pair) for pair in endpoints or ())
        self.cardinality = cardinality
        self.max_out = max_out
        self.max_in = max_in

    def __eq__(self, other):
        return (
            SchemaType.__eq__(self, other)
            and self.endpoints == other.endpoints
            and self.cardinality == other.cardinality
            and self.max_out == other.max_out
            and self.max_in == other.max_in
        )

    def __hash__(self):
        return SchemaType.__hash__(self)

    def renamed(self, name=None, labels=None, properties=None, endpoints=None):
        return EdgeType(
            self.name if name is None else name,
            labels=self.labels if labels is None else labels,
            properties=self.properties if properties is None else properties,
            endpoints=self.endpoints if endpoints is None else endpoints,
            cardinality=self.cardinality,
            max_out=self.max_out,
            max_in=self.max_in,
        )


class SchemaGraph(object):
    """Node types, edge types (with their endpoints), and optionally which element went where"""

    def __init__(self, node_types=None, edge_types=None, assignment=None, postprocessed=False):
        """
        :param node_types: NodeType-s (iterable or dict by name)
        :param edge_types: EdgeType-s (iterable or dict by name)
        :param dict|None assignment: Element id -> type name
        :param bool postprocessed: Have constraints, datatypes and cardinalities been computed?
        """
        self.node_types = collections.OrderedDict()  # type: dict[str, NodeType]
        self.edge_types = collections.OrderedDict()  # type: dict[str, EdgeType]
        for t in _values(node_types):
            self.node_types[t.name] = t
        for t in _values(edge_types):
            self.edge_types[t.name] = t
        self.assignment = assignment
        self.postprocessed = postprocessed

    def __repr__(self):
        return "%s node types, %s edge types" % (len(self.node_types), len(self.edge_types))

    def __eq__(self, other):
        return (
            isinstance(other, SchemaGraph)
            and self.node_types == other.node_types
            and self.edge_types == other.edge_types
            and self.postprocessed == other.postprocessed
        )

    def __ne__(self, other):
        return not self == other

    @property
    def is_empty(self):
        return not self.node_types and not self.edge_types

    def types(self, kind):
        return self.node_types if kind == NODE else self.edge_types

    def copy(self, assignment=True):
        """Shallow copy (types are treated as values and never mutated in place)"""
        return SchemaGraph(
            self.node_types.values(),
            self.edge_types.values(),
            assignment=dict(self.assignment) if assignment and self.assignment is not None else None,
            postprocessed=self.postprocessed,
        )

    def validate(self):
        """Verify that every edge type endpoint names a node type"""
        for edge_type in self.edge_types.values():
            for pair in edge_type.endpoints:
                for name in pair:
                    if name not in self.node_types:
                        raise InputError("edge type '%s' refers to unknown node type '%s'" % (edge_type.name, name))

    def labels(self, kind):
        result = set()
        for t in self.types(kind).values():
            result.update(t.labels)
        return result

    def keys(self, kind):
        result = set()
        for t in self.types(kind).values():
            result.update(t.keys)
        return result


def _values(container):
    if not container:
        return []
    if isinstance(container, dict):
        return list(container.values())
    return list(container)
