import pytest

from graphtypes import InputError
from graphtypes.model import (
    canonical_label_key,
    Cardinality,
    Datatype,
    Edge,
    edge_pattern_of,
    EdgePattern,
    EdgeType,
    labels_of_key,
    Node,
    node_pattern_of,
    NodePattern,
    NodeType,
    PropertyGraph,
    SchemaGraph,
)


def test_label_keys():
    assert canonical_label_key(None) == ""
    assert canonical_label_key([]) == ""
    assert canonical_label_key(["Person"]) == "Person"
    assert canonical_label_key(["Student", "Person", "Student"]) == "Person&Student"
    assert labels_of_key("") == frozenset()
    assert labels_of_key("Person&Student") == {"Person", "Student"}


def test_elements():
    bob = Node("bob", labels=["Person", "Person"], properties={"name": "Bob", "age": 12})
    assert bob.labels == ("Person",)
    assert bob.properties == {"name": "Bob", "age": "12"}
    assert bob.label_key == "Person"
    assert bob.keys == {"name", "age"}
    assert str(bob) == "node bob Person [age, name]"

    alice = Node("alice")
    assert alice.label_key == ""
    assert str(alice) == "node alice - []"

    assert bob.replaced(labels=()) == Node("bob", properties={"name": "Bob", "age": "12"})
    assert bob != alice

    knows = Edge("k1", "bob", "alice", labels=["KNOWS"])
    assert str(knows) == "edge k1 KNOWS [] bob->alice"
    assert knows.replaced(properties={"since": "2015"}).properties == {"since": "2015"}
    assert knows != Edge("k1", "alice", "bob", labels=["KNOWS"])

    with pytest.raises(InputError):
        Node("")

    with pytest.raises(InputError):
        Node("x", labels=[""])

    with pytest.raises(InputError) as e:
        Node("x", labels=["Person", 7])
    assert str(e.value) == "node 'x' has a non-string label 7"

    with pytest.raises(InputError):
        Node("x", properties={"": "empty key"})

    with pytest.raises(InputError):
        Edge("e", None, "x")


def test_graph():
    graph = PropertyGraph([Node("a"), Node("b")])
    graph.add_edge(Edge("e", "a", "b"))
    assert len(graph) == 3
    assert str(graph) == "2 nodes, 1 edges"
    assert [e.id for e in graph.elements()] == ["a", "b", "e"]

    with pytest.raises(InputError) as e:
        graph.add_node(Node("a"))
    assert "duplicate node id 'a'" in str(e.value)

    with pytest.raises(InputError) as e:
        graph.add_node(Node("e"))
    assert "used by both a node and an edge" in str(e.value)

    with pytest.raises(InputError) as e:
        graph.add_edge(Edge("f", "a", "zz"))
    assert "references unknown node 'zz'" in str(e.value)

    graph.add_edge(Edge("f", "a", "zz"), check=False)
    with pytest.raises(InputError):
        graph.validate()


def test_patterns(social_graph):
    bob = social_graph.nodes["bob"]
    alice = social_graph.nodes["alice"]
    john = social_graph.nodes["john"]
    assert node_pattern_of(bob) == NodePattern({"Person"}, {"name", "gender", "bday"})
    assert node_pattern_of(bob) == node_pattern_of(john)
    assert node_pattern_of(alice) == NodePattern((), {"name", "gender", "bday"})
    assert node_pattern_of(bob).canonical() == "Person{bday,gender,name}"
    assert node_pattern_of(bob) < node_pattern_of(alice)

    works = edge_pattern_of(social_graph.edges["w1"], social_graph)
    assert works == EdgePattern({"WORKS_AT"}, {"from"}, ({"Person"}, {"Org."}))
    assert works.canonical() == "WORKS_AT{from}(Person->Org.)"

    knows = edge_pattern_of(social_graph.edges["k2"], social_graph)
    assert knows.canonical() == "KNOWS{}(->Person)"
    assert len(set([works, knows, edge_pattern_of(social_graph.edges["w1"], social_graph)])) == 2


def test_datatype_lattice():
    assert Datatype.INTEGER.join(Datatype.INTEGER) == Datatype.INTEGER
    assert Datatype.INTEGER.join(Datatype.FLOAT) == Datatype.FLOAT
    assert Datatype.FLOAT.join(Datatype.INTEGER) == Datatype.FLOAT
    assert Datatype.DATE.join(Datatype.DATETIME) == Datatype.DATETIME
    assert Datatype.INTEGER.join(Datatype.BOOLEAN) == Datatype.STRING
    assert Datatype.DATE.join(Datatype.FLOAT) == Datatype.STRING
    assert Datatype.BOOLEAN.join(None) == Datatype.BOOLEAN
    assert Datatype.INTEGER.leq(Datatype.STRING)
    assert Datatype.INTEGER.leq(Datatype.FLOAT)
    assert not Datatype.FLOAT.leq(Datatype.INTEGER)
    assert not Datatype.BOOLEAN.leq(Datatype.DATE)
    assert str(Datatype.DATE) == "DATE"


def test_cardinality():
    assert Cardinality.ZERO_ONE.notation == "0:1"
    assert Cardinality.N_TO_ONE.notation == "N:1"
    assert Cardinality.ONE_TO_N.notation == "0:N"
    assert Cardinality.M_TO_N.notation == "M:N"
    assert Cardinality.UNSET.notation == ""
    assert str(Cardinality.M_TO_N) == "M_TO_N"


def test_schema():
    person = NodeType("Person", labels=["Person"], properties=["name"])
    abstract = NodeType("ABSTRACT_0", properties=["x"])
    assert not person.abstract
    assert abstract.abstract
    assert person.renamed(properties=["name", "age"]).keys == {"name", "age"}

    knows = EdgeType("KNOWS", labels=["KNOWS"], endpoints=[("Person", "Person")])
    schema = SchemaGraph([person, abstract], [knows])
    assert str(schema) == "2 node types, 1 edge types"
    assert not schema.is_empty
    assert SchemaGraph().is_empty
    assert schema.labels("node") == {"Person"}
    assert schema.keys("node") == {"name", "x"}
    schema.validate()

    copy = schema.copy()
    assert copy == schema
    copy.edge_types["KNOWS"] = knows.renamed(endpoints=[("Person", "Robot")])
    assert copy != schema
    with pytest.raises(InputError) as e:
        copy.validate()
    assert "unknown node type 'Robot'" in str(e.value)
