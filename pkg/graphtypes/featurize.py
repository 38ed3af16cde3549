"""
Numeric representation of nodes and edges: label embeddings followed by property presence bits
"""

import numpy as np
from datasketch.hashfunc import sha1_hash64

from graphtypes import abort, InputError
from graphtypes.model import EDGE, KINDS, NODE


DEFAULT_DIM = 5
SEED_MASK = (1 << 64) - 1


def key_seed(key, seed):
    """Seed of the vector of label 'key' in a table seeded with 'seed'"""
    return (int(seed) ^ sha1_hash64(key.encode("utf-8"))) & SEED_MASK


class EmbeddingTable(object):
    """Canonical label key -> point on the unit sphere, empty key -> zero vector"""

    def __init__(self, dim=DEFAULT_DIM, seed=0, keys=None):
        if dim < 2:
            abort("Embedding dimension must be at least 2, got %s" % dim)
        self.dim = dim
        self.seed = seed
        self.vectors = {}  # type: dict[str, np.ndarray]
        self.extend(keys)

    def __repr__(self):
        return "embedding d=%s, %s keys" % (self.dim, len(self.vectors))

    def __len__(self):
        return len(self.vectors)

    def __contains__(self, key):
        return key in self.vectors

    def __eq__(self, other):
        return (
            isinstance(other, EmbeddingTable)
            and self.dim == other.dim
            and sorted(self.vectors) == sorted(other.vectors)
            and all(np.array_equal(v, other.vectors[k]) for k, v in self.vectors.items())
        )

    def __ne__(self, other):
        return not self == other

    def __getitem__(self, key):
        vector = self.vectors.get(key)
        if vector is None:
            vector = self._generated(key)
            self.vectors[key] = vector
        return vector

    def extend(self, keys):
        """Add vectors for the keys not seen yet"""
        for key in sorted(set(keys or ())):
            if key not in self.vectors:
                self.vectors[key] = self._generated(key)

    def _generated(self, key):
        if not key:
            return np.zeros(self.dim)
        rng = np.random.default_rng(key_seed(key, self.seed))
        vector = rng.standard_normal(self.dim)
        norm = np.linalg.norm(vector)
        while norm == 0:  # pragma: no cover
            vector = rng.standard_normal(self.dim)
            norm = np.linalg.norm(vector)
        return vector / norm


def build_embedding_table(label_keys, dim=DEFAULT_DIM, seed=0):
    """
    :param label_keys: Canonical label keys to embed
    :param int dim: Embedding dimension
    :param int seed: Seed, same seed and keys always give the same table
    :return EmbeddingTable: Corresponding table
    """
    return EmbeddingTable(dim=dim, seed=seed, keys=label_keys)


class PropertyIndex(object):
    """Append-only ordering of property keys, one per element kind"""

    def __init__(self, role, keys=None):
        if role not in KINDS:
            abort("Invalid property index role '%s'" % role)
        self.role = role
        self.keys = []  # type: list[str]
        self.positions = {}  # type: dict[str, int]
        self.extend(keys)

    def __repr__(self):
        return "%s keys: %s" % (self.role, ", ".join(self.keys))

    def __len__(self):
        return len(self.keys)

    def __iter__(self):
        return iter(self.keys)

    def __getitem__(self, position):
        return self.keys[position]

    def __contains__(self, key):
        return key in self.positions

    def extend(self, keys):
        """Append keys not indexed yet, in sorted order"""
        for key in sorted(set(keys or ()) - set(self.positions)):
            self.positions[key] = len(self.keys)
            self.keys.append(key)

    def position(self, key):
        position = self.positions.get(key)
        if position is None:
            raise InputError("property '%s' is not in the %s property index" % (key, self.role))
        return position


class FeatureVector(object):
    """Feature vector of one element"""

    def __init__(self, owner, kind, values):
        self.owner = owner
        self.kind = kind
        self.values = values  # type: np.ndarray

    def __repr__(self):
        return "%s %s %s" % (self.kind, self.owner, np.array2string(self.values, precision=3))

    def __len__(self):
        return len(self.values)


def _checked_role(idx, kind):
    if idx.role != kind:
        abort("Can't featurize %s-s with a %s property index" % (kind, idx.role))


def node_label_keys(node, graph=None):
    return (node.label_key,)


def edge_label_keys(edge, graph):
    """Label keys of 'edge', its source and its target (endpoints must be in 'graph')"""
    for node_id in (edge.src, edge.tgt):
        if node_id not in graph.nodes:
            raise InputError("edge '%s' references unknown node '%s'" % (edge.id, node_id))
    return edge.label_key, graph.nodes[edge.src].label_key, graph.nodes[edge.tgt].label_key


def feature_matrix(elements, idx, emb, graph=None):
    """
    :param list elements: Nodes, or edges (all of the same kind as 'idx.role')
    :param PropertyIndex idx: Property index covering all property keys of 'elements'
    :param EmbeddingTable emb: Label embedding
    :param PropertyGraph|None graph: Graph resolving edge endpoints (edges only)
    :return np.ndarray: One row per element: embedding blocks, then presence bits
    """
    blocks = 1 if idx.role == NODE else 3
    label_keys = node_label_keys if idx.role == NODE else edge_label_keys
    width = blocks * emb.dim
    matrix = np.zeros((len(elements), width + len(idx)))
    for row, element in enumerate(elements):
        if element.kind != idx.role:
            abort("Can't featurize %s '%s' with a %s property index" % (element.kind, element.id, idx.role))
        for block, key in enumerate(label_keys(element, graph)):
            matrix[row, block * emb.dim:(block + 1) * emb.dim] = emb[key]
        for key in element.properties:
            matrix[row, width + idx.position(key)] = 1.0
    return matrix


def node_vector(node, idx, emb):
    """Embedding of the node's label key, then one presence bit per indexed node property"""
    _checked_role(idx, NODE)
    return FeatureVector(node.id, NODE, feature_matrix([node], idx, emb)[0])


def edge_vector(edge, graph, idx, emb):
    """Embeddings of edge, source and target label keys, then one presence bit per indexed edge property"""
    _checked_role(idx, EDGE)
    return FeatureVector(edge.id, EDGE, feature_matrix([edge], idx, emb, graph=graph)[0])


def node_tokens(node):
    """MinHash tokens of a node: its labels and property keys"""
    return frozenset(["label:%s" % s for s in node.labels] + ["key:%s" % k for k in node.properties])


def edge_tokens(edge, graph):
    """MinHash tokens of an edge: labels, property keys, and endpoint label keys"""
    _, src, tgt = edge_label_keys(edge, graph)
    tokens = ["label:%s" % s for s in edge.labels] + ["key:%s" % k for k in edge.properties]
    return frozenset(tokens + ["src:%s" % src, "tgt:%s" % tgt])
