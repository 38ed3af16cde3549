"""
Clustering of feature vectors (Euclidean LSH) or token sets (MinHash), with adaptive parameters
"""

import collections
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from datasketch import MinHash

from graphtypes import abort, InputError, trace
from graphtypes.featurize import SEED_MASK
from graphtypes.model import NODE


ELSH = "elsh"
MINHASH = "minhash"
METHODS = (ELSH, MINHASH)

DEFAULT_BUCKET_LENGTH = 1.0
DEFAULT_TABLES = 10
DEFAULT_RADIUS = None  # Bare OR rule: any collision joins
DEFAULT_MIN_JACCARD = None
MIN_TABLES = 1
MAX_TABLES = 64
SAMPLE_FLOOR = 10000  # Elements sampled for estimation, at least (or everything, if fewer)
PAIR_BUDGET = 100000  # Max pairs used to estimate the mean distance


class LshParams(object):
    """Hashing parameters, plus the tolerance used to verify colliding pairs"""

    def __init__(self, method=ELSH, bucket_length=DEFAULT_BUCKET_LENGTH, num_tables=DEFAULT_TABLES, seed=0,
                 radius=DEFAULT_RADIUS, min_jaccard=DEFAULT_MIN_JACCARD):
        """
        :param str method: ELSH or MINHASH
        :param float bucket_length: Bucket length 'b' of projections (ELSH only)
        :param int num_tables: Number of hash tables 'T' (hash functions for MinHash)
        :param int seed: Seed of random projections / permutations
        :param float|None radius: Max distance of joined ELSH pairs (None: join all collisions)
        :param float|None min_jaccard: Min Jaccard of joined MinHash pairs (None: join all collisions)
        """
        if method not in METHODS:
            abort("Unknown LSH method '%s', expecting one of: %s" % (method, ", ".join(METHODS)))
        if bucket_length is None or not bucket_length > 0:
            abort("Bucket length must be positive, got %s" % bucket_length)
        if num_tables is None or int(num_tables) != num_tables or num_tables < 1:
            abort("Number of tables must be a positive integer, got %s" % num_tables)
        if radius is not None and radius < 0:
            abort("Radius can't be negative, got %s" % radius)
        if min_jaccard is not None and not 0 <= min_jaccard <= 1:
            abort("Min Jaccard must be in [0, 1], got %s" % min_jaccard)
        self.method = method
        self.bucket_length = float(bucket_length)
        self.num_tables = int(num_tables)
        self.seed = seed
        self.radius = radius
        self.min_jaccard = min_jaccard

    def __repr__(self):
        if self.method == MINHASH:
            return "minhash T=%s seed=%s min-jaccard=%s" % (self.num_tables, self.seed, self.min_jaccard)
        return "elsh b=%g T=%s seed=%s radius=%s" % (self.bucket_length, self.num_tables, self.seed, self.radius)

    def __eq__(self, other):
        return isinstance(other, LshParams) and self.__dict__ == other.__dict__

    def __ne__(self, other):
        return not self == other

    def replaced(self, **kwargs):
        values = dict(self.__dict__)
        values.update(kwargs)
        return LshParams(**values)


class AdaptiveEstimate(object):
    """Parameters estimated from a sample of the data"""

    def __init__(self, mu, alpha, distinct_labels, element_count, resolved):
        self.mu = mu
        self.b_base = 1.2 * mu
        self.alpha = alpha
        self.distinct_labels = distinct_labels
        self.element_count = element_count
        self.resolved = resolved  # type: LshParams

    def __repr__(self):
        return "mu=%g b_base=%g alpha=%s L=%s N=%s -> %s" % (
            self.mu, self.b_base, self.alpha, self.distinct_labels, self.element_count, self.resolved
        )


class Clustering(object):
    """Partition of element ids"""

    def __init__(self, clusters, kind=NODE):
        self.clusters = [list(c) for c in clusters]  # type: list[list[str]]
        self.kind = kind

    def __repr__(self):
        return "%s %s clusters" % (len(self.clusters), self.kind)

    def __len__(self):
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    @classmethod
    def from_components(cls, ids, components, kind=NODE):
        """Clusters from one component number per id, in order of first appearance"""
        grouped = collections.OrderedDict()
        for element_id, component in zip(ids, components):
            grouped.setdefault(component, []).append(element_id)
        return cls(grouped.values(), kind=kind)

    def assignment(self):
        """Element id -> cluster position"""
        return dict((i, n) for n, cluster in enumerate(self.clusters) for i in cluster)

    def as_sets(self):
        return set(frozenset(c) for c in self.clusters)


class UnionFind(object):
    """Disjoint sets over 0..n-1, with path compression and union by rank"""

    def __init__(self, size):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        root_x = self.find(x)
        root_y = self.find(y)
        if root_x == root_y:
            return False
        if self.rank[root_x] < self.rank[root_y]:
            root_x, root_y = root_y, root_x
        self.parent[root_y] = root_x
        if self.rank[root_x] == self.rank[root_y]:
            self.rank[root_x] += 1
        return True

    def components(self):
        """Component number per element, numbered in order of first appearance"""
        numbers = {}
        return [numbers.setdefault(self.find(x), len(numbers)) for x in range(len(self.parent))]


def alpha_for(distinct_labels):
    """Bucket scale: few labels call for tighter buckets"""
    if distinct_labels <= 3:
        return 0.8
    if distinct_labels <= 10:
        return 1.0
    return 1.5


def _rounded(value):
    return int(math.floor(value + 0.5))


def estimate_params(vectors, total_count, distinct_labels, kind=NODE, seed=0, rows=None, method=ELSH):
    """
    :param np.ndarray vectors: Feature matrix (one row per element, or per distinct pattern with 'rows')
    :param int total_count: Number of elements of this kind in the graph (N or E)
    :param int distinct_labels: Number of distinct labels of this kind (L)
    :param str kind: NODE or EDGE
    :param int seed: Seed used to sample elements and pairs
    :param rows: Optional element -> row of 'vectors' mapping
    :param str method: Method of the resolved parameters
    :return AdaptiveEstimate: Estimated mean distance, and resolved parameters
    """
    vectors = np.asarray(vectors, dtype=float)
    count = len(rows) if rows is not None else len(vectors)
    if count < 2:
        abort("Need at least 2 %s vectors to estimate LSH parameters, got %s" % (kind, count))

    rng = np.random.default_rng(seed & SEED_MASK)
    size = min(count, max(int(math.ceil(0.01 * total_count)), SAMPLE_FLOOR))
    picked = np.arange(count) if size >= count else rng.choice(count, size=size, replace=False)
    if rows is not None:
        picked = np.asarray(rows)[picked]
    sample = vectors[picked]

    if size * (size - 1) // 2 <= PAIR_BUDGET:
        left, right = np.triu_indices(size, k=1)
    else:
        left = rng.integers(0, size, PAIR_BUDGET)
        right = rng.integers(0, size - 1, PAIR_BUDGET)
        right = right + (right >= left)

    mu = float(np.mean(np.linalg.norm(sample[left] - sample[right], axis=1)))
    alpha = alpha_for(distinct_labels)
    b_base = 1.2 * mu
    if b_base <= 0:
        resolved = LshParams(method=method, bucket_length=DEFAULT_BUCKET_LENGTH, num_tables=MIN_TABLES, seed=seed)
    else:
        floor, ceiling = (5, 25) if kind == NODE else (3, 20)
        scale = max(floor, alpha * min(ceiling, math.log10(max(total_count, 1))))
        tables = min(MAX_TABLES, max(MIN_TABLES, _rounded(b_base * scale)))
        resolved = LshParams(method=method, bucket_length=b_base * alpha, num_tables=tables, seed=seed)

    estimate = AdaptiveEstimate(mu, alpha, distinct_labels, total_count, resolved)
    trace("adaptive %s estimate over %s sampled: %s" % (kind, size, estimate))
    return estimate


def _stratum_codes(strata, count):
    if strata is None:
        return np.zeros(count, dtype=np.int64)
    if len(strata) != count:
        abort("Expecting %s strata, got %s" % (count, len(strata)))
    codes = {}
    return np.array([codes.setdefault(s, len(codes)) for s in strata], dtype=np.int64)


def _vectors_of(vectors):
    """(ids, matrix) of a list of FeatureVector-s, or of a bare matrix"""
    if isinstance(vectors, np.ndarray):
        return list(range(len(vectors))), vectors.astype(float)
    vectors = list(vectors)
    lengths = set(len(v) for v in vectors)
    if len(lengths) > 1:
        raise InputError("feature vectors have mixed lengths: %s" % ", ".join(str(n) for n in sorted(lengths)))
    ids = [v.owner for v in vectors]
    if not vectors:
        return ids, np.zeros((0, 0))
    return ids, np.vstack([v.values for v in vectors]).astype(float)


def elsh_components(matrix, params, strata=None):
    """
    :param np.ndarray matrix: One feature vector per row
    :param LshParams params: Bucket length, tables, seed, verification radius
    :param strata: Optional stratum per row, pairs of different strata are never joined
    :return list[int]: Component number per row
    """
    count = len(matrix)
    if not count:
        return []
    codes = _stratum_codes(strata, count)
    keyed = np.column_stack([codes.astype(float), matrix])
    distinct, inverse = np.unique(keyed, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    distinct_codes = distinct[:, 0]
    points = distinct[:, 1:]

    uf = UnionFind(len(distinct))
    for table in range(params.num_tables):
        rng = np.random.default_rng([params.seed & SEED_MASK, table])
        projection = rng.standard_normal(points.shape[1])
        offset = rng.uniform(0, params.bucket_length)
        hashes = np.floor((points @ projection + offset) / params.bucket_length).astype(np.int64)
        _join_colliding(uf, hashes, distinct_codes, lambda members: _close_pairs(points, members, params.radius))

    components = uf.components()
    return _renumbered([components[i] for i in inverse])


def _renumbered(components):
    numbers = {}
    return [numbers.setdefault(c, len(numbers)) for c in components]


def _join_colliding(uf, hashes, codes, verified_pairs):
    """Join rows sharing a hash value (and stratum) when the pair passes verification"""
    buckets = collections.defaultdict(list)
    for row, value in enumerate(hashes):
        buckets[(codes[row], value)].append(row)
    for key in sorted(buckets):
        members = buckets[key]
        if len(members) < 2:
            continue
        for x, y in verified_pairs(members):
            uf.union(x, y)


def _close_pairs(points, members, radius):
    if radius is None:
        return [(members[0], m) for m in members[1:]]
    block = points[members]
    result = []
    for i in range(len(members) - 1):
        distances = np.linalg.norm(block[i + 1:] - block[i], axis=1)
        result.extend((members[i], members[i + 1 + j]) for j in np.nonzero(distances <= radius)[0])
    return result


def elsh_cluster(vectors, params, strata=None, kind=NODE):
    """
    :param vectors: List of FeatureVector (or matrix, ids are then row numbers)
    :param LshParams params: ELSH parameters
    :param strata: Optional stratum per vector
    :param str kind: NODE or EDGE
    :return Clustering: Connected components of verified collisions in any table
    """
    ids, matrix = _vectors_of(vectors)
    return Clustering.from_components(ids, elsh_components(matrix, params, strata=strata), kind=kind)


def jaccard_of(a, b):
    union = len(a | b)
    return 1.0 if not union else len(a & b) / float(union)


def minhash_signatures(token_sets, num_tables, seed, threads=1):
    """
    :param list token_sets: Non-empty token sets
    :param int num_tables: Number of hash functions
    :param int seed: Seed of the permutations
    :param int threads: Worker threads
    :return list[np.ndarray]: MinHash values, one array per token set
    """
    template = MinHash(num_perm=num_tables, seed=seed & 0xFFFFFFFF)

    def signature(tokens):
        m = MinHash(num_perm=num_tables, seed=template.seed, permutations=template.permutations)
        for token in sorted(tokens):
            m.update(token.encode("utf-8"))
        return m.hashvalues

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(signature, token_sets))
    return [signature(tokens) for tokens in token_sets]


def minhash_components(token_sets, params, strata=None, threads=1):
    """
    :param list token_sets: One token set per element
    :param LshParams params: Number of hash functions, seed, verification threshold
    :param strata: Optional stratum per element
    :param int threads: Worker threads used for signatures
    :return list[int]: Component number per element (all empty token sets form one component)
    """
    count = len(token_sets)
    codes = _stratum_codes(strata, count)
    distinct = collections.OrderedDict()
    empty = "empty"
    keys = []
    for tokens, code in zip(token_sets, codes):
        tokens = frozenset(tokens)
        key = empty if not tokens else (int(code), tokens)
        keys.append(key)
        distinct.setdefault(key, len(distinct))

    hashed = [k for k in distinct if k is not empty]
    uf = UnionFind(len(distinct))
    if hashed:
        signatures = np.vstack(minhash_signatures([k[1] for k in hashed], params.num_tables, params.seed, threads=threads))
        rows = [distinct[k] for k in hashed]
        hashed_codes = [k[0] for k in hashed]

        def verified_pairs(members):
            if params.min_jaccard is None:
                return [(rows[members[0]], rows[m]) for m in members[1:]]
            result = []
            for i, x in enumerate(members):
                for y in members[i + 1:]:
                    if jaccard_of(hashed[x][1], hashed[y][1]) >= params.min_jaccard:
                        result.append((rows[x], rows[y]))
            return result

        for table in range(params.num_tables):
            _join_colliding(uf, signatures[:, table], hashed_codes, verified_pairs)

    components = uf.components()
    return _renumbered([components[distinct[k]] for k in keys])


def minhash_cluster(token_sets, num_tables, seed, ids=None, strata=None, min_jaccard=DEFAULT_MIN_JACCARD, threads=1, kind=NODE):
    """
    :param list token_sets: One token set per element
    :param int num_tables: Number of hash functions (T)
    :param int seed: Seed of the hash functions
    :param list|None ids: Element ids (default: positions)
    :param strata: Optional stratum per element
    :param float|None min_jaccard: Min Jaccard of joined pairs (None: join all collisions)
    :param int threads: Worker threads used for signatures
    :param str kind: NODE or EDGE
    :return Clustering: Connected components of verified collisions in any hash function
    """
    token_sets = list(token_sets)
    params = LshParams(method=MINHASH, num_tables=num_tables, seed=seed, min_jaccard=min_jaccard)
    ids = list(range(len(token_sets))) if ids is None else list(ids)
    return Clustering.from_components(ids, minhash_components(token_sets, params, strata=strata, threads=threads), kind=kind)
