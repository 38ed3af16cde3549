import io
import os

import pytest

from graphtypes import UsageError
from graphtypes.constraints import postprocess_graph
from graphtypes.extraction import cluster_representative, extract_types
from graphtypes.model import Cardinality, Constraint, Datatype, EDGE, EdgeType, NODE, NodeType, PropertySpec, SchemaGraph
from graphtypes.serialize import (
    emit_pg_schema,
    emit_xsd,
    load_schema,
    LOOSE,
    quoted_name,
    schema_from_json,
    schema_to_json,
    STRICT,
    type_id,
    type_ids,
    write_schema,
)

from . import pgschema_grammar


SOCIAL_STRICT = """
CREATE GRAPH TYPE DiscoveredGraph STRICT {
  (OrgType : Org. { name STRING, url STRING }),
  (PersonType : Person { bday DATE, gender STRING, name STRING }),
  (PlaceType : Place { name STRING }),
  (PostType : Post { OPTIONAL content STRING, OPTIONAL imgFile STRING }),
  (:PersonType)-[KNOWSType : KNOWS { OPTIONAL since INTEGER }]->(:PersonType) /* 0:N */,
  (:PersonType)-[LIKESType : LIKES]->(:PostType) /* 0:1 */,
  (:OrgType | PersonType)-[LOCATED_INType : LOCATED_IN { OPTIONAL from INTEGER }]->(:PlaceType) /* N:1 */,
  (:PersonType)-[WORKS_ATType : WORKS_AT { from INTEGER }]->(:OrgType) /* 0:1 */
}
"""


def social_schema(graph, postprocessed=True):
    clusters = [["bob", "john", "alice"], ["post1", "post2"], ["org"], ["place"], ["k1", "k2"], ["l1", "l2"], ["w1"], ["li1", "li2"]]
    schema = extract_types([cluster_representative(c, graph) for c in clusters])
    if postprocessed:
        schema = postprocess_graph(graph, schema)
    return schema


def test_names():
    assert type_id("Person") == "PersonType"
    assert type_id("Org.") == "OrgType"
    assert type_id("Person&Student") == "Person_StudentType"
    assert type_id("ABSTRACT_0") == "ABSTRACT_0Type"
    assert quoted_name("Org.") == "Org."
    assert quoted_name("first name") == "`first name`"
    assert quoted_name("a`b") == "`a``b`"
    assert quoted_name("2nd") == "`2nd`"


def test_unique_ids():
    nodes = [NodeType(name, labels=[name]) for name in ("Org.", "Org", "人", "地")]
    edges = [
        EdgeType("R", labels=["R"], endpoints=[("Org.", "人")]),
        EdgeType("Org", labels=["Org"], endpoints=[("Org", "地")]),
    ]
    schema = SchemaGraph(nodes, edges)
    ids = type_ids(schema)
    assert len(set(ids.values())) == 6
    assert ids[(NODE, "Org")] == "OrgType"
    assert ids[(NODE, "Org.")] == "OrgType_2"
    assert ids[(EDGE, "Org")] == "OrgType_3"
    assert ids[(NODE, "地")] == "u5730Type"

    text = emit_pg_schema(schema)
    assert "(:OrgType_2)-[RType : R]->(:u4ebaType)" in text
    assert "(:OrgType)-[OrgType_3 : Org]->(:u5730Type)" in text
    parsed = pgschema_grammar.parse(text)
    assert sorted(parsed.nodes) == ["OrgType", "OrgType_2", "u4ebaType", "u5730Type"]
    assert parsed.nodes["u4ebaType"]["labels"] == ["`人`"]


def test_social_strict(social_graph):
    text = emit_pg_schema(social_schema(social_graph), STRICT)
    assert text == SOCIAL_STRICT.lstrip()

    parsed = pgschema_grammar.parse(text)
    assert parsed.mode == STRICT
    assert sorted(parsed.nodes) == ["OrgType", "PersonType", "PlaceType", "PostType"]
    assert parsed.edges["LOCATED_INType"]["sources"] == ["OrgType", "PersonType"]
    assert parsed.edges["KNOWSType"]["cardinality"] == "0:N"


def test_social_loose(social_graph):
    schema = social_schema(social_graph, postprocessed=False)
    text = emit_pg_schema(schema)
    parsed = pgschema_grammar.parse(text)
    assert parsed.mode == LOOSE
    assert parsed.nodes["PostType"]["properties"] == ["content", "imgFile"]
    assert "/*" not in text
    assert "(PersonType : Person { bday, gender, name })," in text

    # Loose rendering of a post-processed schema omits annotations
    assert emit_pg_schema(social_schema(social_graph), LOOSE) == text

    with pytest.raises(UsageError):
        emit_pg_schema(schema, STRICT)

    with pytest.raises(UsageError):
        emit_pg_schema(schema, "SLOPPY")


def test_abstract_and_quoting():
    schema = SchemaGraph(
        [
            NodeType("ABSTRACT_0", properties={"first name": PropertySpec(Datatype.STRING, Constraint.MANDATORY)}),
            NodeType("Person&Student", labels=["Person", "Student"]),
        ],
        [
            EdgeType("ABSTRACT_EDGE_0", endpoints=[("ABSTRACT_0", "Person&Student")], cardinality=Cardinality.M_TO_N),
        ],
        postprocessed=True,
    )
    text = emit_pg_schema(schema, STRICT)
    assert text.splitlines() == [
        "CREATE GRAPH TYPE DiscoveredGraph STRICT {",
        "  ABSTRACT (ABSTRACT_0Type { `first name` STRING }),",
        "  (Person_StudentType : Person & Student),",
        "  ABSTRACT (:ABSTRACT_0Type)-[ABSTRACT_EDGE_0Type]->(:Person_StudentType) /* M:N */",
        "}",
    ]
    parsed = pgschema_grammar.parse(text)
    assert parsed.nodes["ABSTRACT_0Type"]["abstract"]
    assert parsed.nodes["Person_StudentType"]["labels"] == ["Person", "Student"]

    empty = emit_pg_schema(SchemaGraph(postprocessed=True), STRICT)
    assert empty == "CREATE GRAPH TYPE DiscoveredGraph STRICT { }\n"
    assert not pgschema_grammar.parse(empty).nodes


def test_grammar_rejects():
    with pytest.raises(ValueError):
        pgschema_grammar.parse("")

    with pytest.raises(ValueError):
        pgschema_grammar.parse("CREATE GRAPH TYPE G LOOSE {\n  (AType : A),\n  (BType : B)\n")

    with pytest.raises(ValueError):
        pgschema_grammar.parse("CREATE GRAPH TYPE G LOOSE {\n  (:AType)-[RType : R]->(:BType)\n}")

    with pytest.raises(ValueError):
        pgschema_grammar.parse("CREATE GRAPH TYPE G LOOSE {\n  (AType : A)\n  (BType : B)\n}")


def test_xsd(social_graph):
    text = emit_xsd(social_schema(social_graph))
    lines = text.splitlines()
    assert lines[0] == '<?xml version="1.0" encoding="UTF-8"?>'
    assert lines[-1] == "</xs:schema>"
    assert '  <xs:complexType name="Person">' in lines
    assert '      <xs:element name="bday" type="xs:date"/>' in lines
    assert '      <xs:element name="content" type="xs:string" minOccurs="0"/>' in lines
    assert "      <xs:documentation>endpoints: Person-&gt;Person; cardinality: 0:N</xs:documentation>" in lines
    assert lines.count('    <xs:attribute name="source" type="xs:string" use="required"/>') == 4

    bare = emit_xsd(SchemaGraph([NodeType("Thing", labels=["Thing"])], [EdgeType("R", labels=["R"])]))
    assert "    <xs:sequence/>" in bare
    assert "<xs:documentation>endpoints: none</xs:documentation>" in bare


def test_json(social_graph):
    schema = social_schema(social_graph)
    data = schema_to_json(schema)
    assert data["postprocessed"]
    assert [t["name"] for t in data["nodeTypes"]] == ["Org.", "Person", "Place", "Post"]
    located = data["edgeTypes"][2]
    assert located["endpoints"] == [["Org.", "Place"], ["Person", "Place"]]
    assert located["cardinality"] == "N_TO_ONE"
    assert (located["maxOut"], located["maxIn"]) == (1, 2)
    assert located["properties"] == {"from": {"constraint": "OPTIONAL", "datatype": "INTEGER"}}
    assert schema_from_json(data) == schema

    loose = schema_to_json(social_schema(social_graph, postprocessed=False))
    assert loose["nodeTypes"][0]["properties"]["url"] == {"constraint": None, "datatype": None}

    with pytest.raises(UsageError):
        schema_from_json({"nodeTypes": [{"labels": []}], "edgeTypes": []})

    with pytest.raises(UsageError):
        schema_from_json({"nodeTypes": []})


def test_write(workspace, social_graph):
    schema = social_schema(social_graph)
    paths = write_schema(schema, "out")
    assert [os.path.basename(p) for p in paths] == ["schema.loose.pgs", "schema.strict.pgs", "schema.xsd", "schema.json"]
    with io.open(os.path.join("out", "schema.strict.pgs")) as fh:
        assert fh.read() == SOCIAL_STRICT.lstrip()
    assert load_schema(paths[-1]) == schema

    paths = write_schema(social_schema(social_graph, postprocessed=False), "loose", prefix="batch")
    assert sorted(os.listdir("loose")) == ["batch.json", "batch.loose.pgs", "batch.xsd"]
