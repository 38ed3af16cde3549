import collections

import numpy as np
import pytest

from graphtypes.constraints import (
    apply_cardinalities,
    cardinality_of,
    compute_cardinalities,
    datatype_of,
    DegreeStats,
    infer_datatype,
    infer_datatypes_sampled,
    infer_property_constraints,
    postprocess_graph,
    sample_size,
    sampled_counts,
    TypeStats,
)
from graphtypes.extraction import cluster_representative, extract_types
from graphtypes.model import Cardinality, Constraint, Datatype, Edge, EdgeType, NodeType, PropertySpec, SchemaGraph

from . import conftest


def social_schema(graph):
    clusters = [["bob", "john", "alice"], ["post1", "post2"], ["org"], ["place"], ["k1", "k2"], ["l1", "l2"], ["w1"], ["li1", "li2"]]
    return extract_types([cluster_representative(c, graph) for c in clusters])


@pytest.mark.parametrize("value, expected", [
    ("42", Datatype.INTEGER),
    ("-7", Datatype.INTEGER),
    ("3.14", Datatype.FLOAT),
    ("1e5", Datatype.FLOAT),
    (".5", Datatype.FLOAT),
    ("true", Datatype.BOOLEAN),
    ("FALSE", Datatype.BOOLEAN),
    ("1990-05-14", Datatype.DATE),
    ("14/05/1990", Datatype.DATE),
    ("2019-02-30", Datatype.STRING),
    ("2020-01-01T10:30:00Z", Datatype.DATETIME),
    ("2020-01-01 10:30", Datatype.DATETIME),
    ("2020-01-01T25:30", Datatype.STRING),
    ("", Datatype.STRING),
    ("hello", Datatype.STRING),
])
def test_datatype_of(value, expected):
    assert datatype_of(value) == expected


def test_infer_datatype():
    assert infer_datatype([]) == Datatype.STRING
    assert infer_datatype(["1", "2"]) == Datatype.INTEGER
    assert infer_datatype(["1", "2.5"]) == Datatype.FLOAT
    assert infer_datatype(["2020-01-01", "2020-01-01T10:00"]) == Datatype.DATETIME
    assert infer_datatype(["1", "true"]) == Datatype.STRING


def test_sampling():
    assert sample_size(10) == 10
    assert sample_size(5000) == 1000
    assert sample_size(20000) == 2000

    rng = np.random.default_rng(0)
    counts = collections.Counter({"1": 2, "2": 3})
    assert sampled_counts(counts, rng) == counts

    # Sampling may miss a rare value, yielding a narrower datatype
    big = collections.Counter({"1": 3000, "2": 2999, "x": 1})
    sample = sampled_counts(big, np.random.default_rng(1))
    assert sum(sample.values()) == 1000
    assert set(sample) <= {"1", "2", "x"}
    assert infer_datatype(collections.Counter({"1": 1, "2": 1})) == Datatype.INTEGER


def test_type_stats(social_graph):
    schema = social_schema(social_graph)
    stats = TypeStats.of(social_graph.elements(), schema.assignment)
    assert stats.instance_count("Person") == 3
    assert stats.frequency("Post", "content") == 0.5
    assert stats.frequency("Robot", "name") == 0.0
    assert stats.value_counts("Person", "gender") == {"male": 2, "female": 1}

    half = TypeStats.of(list(social_graph.elements())[:7], schema.assignment)
    rest = TypeStats.of(list(social_graph.elements())[7:], schema.assignment)
    assert half.merge(rest) == stats

    renamed = TypeStats.of(social_graph.elements(), dict(schema.assignment, place="ABSTRACT_0"))
    renamed.rename({"ABSTRACT_0": "Place"})
    assert renamed == stats


def test_constraints(social_graph):
    schema = social_schema(social_graph)
    stats = TypeStats.of(social_graph.elements(), schema.assignment)
    annotated = infer_property_constraints(schema, stats)
    person = annotated.node_types["Person"]
    assert person.mandatory_keys() == ["bday", "gender", "name"]
    post = annotated.node_types["Post"]
    assert post.properties["content"] == PropertySpec(None, Constraint.OPTIONAL)
    assert annotated.edge_types["KNOWS"].properties["since"].constraint == Constraint.OPTIONAL
    assert annotated.edge_types["WORKS_AT"].mandatory_keys() == ["from"]

    # Original schema untouched
    assert schema.node_types["Person"].properties["name"] == PropertySpec()

    lonely = SchemaGraph([NodeType("Ghost", labels=["Ghost"], properties=["boo"])])
    with conftest.capture_output() as logged:
        annotated = infer_property_constraints(lonely, TypeStats())
    assert annotated.node_types["Ghost"].properties["boo"].constraint == Constraint.OPTIONAL
    assert "node type Ghost has no instances" in logged


def test_datatypes(social_graph):
    schema = social_schema(social_graph)
    stats = TypeStats.of(social_graph.elements(), schema.assignment)
    typed = infer_datatypes_sampled(schema, stats)
    assert typed.node_types["Person"].properties["bday"].datatype == Datatype.DATE
    assert typed.node_types["Person"].properties["name"].datatype == Datatype.STRING
    assert typed.edge_types["KNOWS"].properties["since"].datatype == Datatype.INTEGER
    assert typed.edge_types["LOCATED_IN"].properties["from"].datatype == Datatype.INTEGER

    assert infer_datatypes_sampled(schema, stats, sampled=True, seed=3) == typed


def test_cardinalities(social_graph):
    assert cardinality_of(None, None) == Cardinality.UNSET
    assert cardinality_of(1, 1) == Cardinality.ZERO_ONE
    assert cardinality_of(1, 4) == Cardinality.N_TO_ONE
    assert cardinality_of(4, 1) == Cardinality.ONE_TO_N
    assert cardinality_of(2, 3) == Cardinality.M_TO_N

    schema = compute_cardinalities(social_graph, social_schema(social_graph))
    knows = schema.edge_types["KNOWS"]
    assert (knows.max_out, knows.max_in) == (2, 1)
    assert knows.cardinality == Cardinality.ONE_TO_N
    assert schema.edge_types["LIKES"].cardinality == Cardinality.ZERO_ONE
    assert schema.edge_types["LOCATED_IN"].cardinality == Cardinality.N_TO_ONE

    # Same pair repeated counts once
    degrees = DegreeStats()
    degrees.add("R", Edge("e1", "a", "b"))
    degrees.add("R", Edge("e2", "a", "b"))
    degrees.add("R", Edge("e3", "a", "c"))
    degrees.add("R", Edge("e4", "d", "c"))
    assert degrees.max_degrees("R") == (2, 2)
    assert degrees.max_degrees("S") == (None, None)
    merged = DegreeStats().merge(degrees).rename({"R": "T"})
    assert merged.max_degrees("T") == (2, 2)

    bare = apply_cardinalities(SchemaGraph([], [EdgeType("S", labels=["S"])]), degrees)
    assert bare.edge_types["S"].cardinality == Cardinality.UNSET


def test_postprocess(social_graph):
    schema = postprocess_graph(social_graph, social_schema(social_graph))
    assert schema.postprocessed
    person = schema.node_types["Person"]
    assert person.properties["bday"] == PropertySpec(Datatype.DATE, Constraint.MANDATORY)
    assert schema.edge_types["WORKS_AT"].cardinality == Cardinality.ZERO_ONE

    graph = conftest.small_graph([("n", ["Thing"], {"v": "1"})])
    typed = postprocess_graph(graph, extract_types([cluster_representative(["n"], graph)]))
    assert typed.node_types["Thing"].properties["v"] == PropertySpec(Datatype.INTEGER, Constraint.MANDATORY)
