"""
Render a schema as PG-Schema text (LOOSE or STRICT), XSD, or JSON
"""

import os
import re
from xml.sax.saxutils import escape, quoteattr

from graphtypes import abort, ensure_folder, trace
from graphtypes.content import load_json, save_json
from graphtypes.model import Cardinality, Constraint, Datatype, EDGE, EdgeType, NODE, NodeType, PropertySpec, SchemaGraph


LOOSE = "LOOSE"
STRICT = "STRICT"
MODES = (LOOSE, STRICT)
GRAPH_NAME = "DiscoveredGraph"

RE_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")
RE_ID_CHAR = re.compile(r"[A-Za-z0-9_]")

XSD_TYPES = {
    Datatype.INTEGER: "xs:integer",
    Datatype.FLOAT: "xs:double",
    Datatype.BOOLEAN: "xs:boolean",
    Datatype.DATE: "xs:date",
    Datatype.DATETIME: "xs:dateTime",
    Datatype.STRING: "xs:string",
}


def _id_part(c):
    if c == "&":
        return "_"
    if ord(c) > 127:
        return "u%04x" % ord(c)
    return c if RE_ID_CHAR.match(c) else ""


def type_id(name):
    """Identifier of type 'name' in PG-Schema text (ASCII punctuation dropped, other characters escaped)"""
    return "%sType" % "".join(_id_part(c) for c in name)


def type_ids(schema):
    """
    :param SchemaGraph schema: Schema to render
    :return dict: (kind, type name) -> identifier, unique within 'schema' (colliding ones get a _2, _3... suffix)
    """
    result = {}
    taken = set()
    for kind in (NODE, EDGE):
        for name in sorted(schema.types(kind)):
            base = candidate = type_id(name)
            count = 1
            while candidate in taken:
                count += 1
                candidate = "%s_%s" % (base, count)
            taken.add(candidate)
            result[(kind, name)] = candidate
    return result


def quoted_name(text):
    """Label or key, in backticks unless it is a plain identifier"""
    if RE_IDENTIFIER.fullmatch(text):
        return text
    return "`%s`" % text.replace("`", "``")


def _property_text(key, spec, mode):
    if mode == LOOSE:
        return quoted_name(key)
    optional = "OPTIONAL " if spec.constraint != Constraint.MANDATORY else ""
    return "%s%s %s" % (optional, quoted_name(key), spec.datatype or Datatype.STRING)


def _properties_block(t, mode):
    if not t.properties:
        return ""
    return " { %s }" % ", ".join(_property_text(k, t.properties[k], mode) for k in sorted(t.properties))


def _labels_part(t):
    if not t.labels:
        return ""
    return " : %s" % " & ".join(quoted_name(s) for s in sorted(t.labels))


def _node_line(t, mode, ids):
    if t.abstract:
        return "ABSTRACT (%s%s)" % (ids[(NODE, t.name)], _properties_block(t, mode))
    return "(%s%s%s)" % (ids[(NODE, t.name)], _labels_part(t), _properties_block(t, mode))


def _endpoint_part(names, ids):
    if not names:
        return "()"
    return "(:%s)" % " | ".join(sorted(set(ids.get((NODE, n)) or type_id(n) for n in names)))


def _edge_line(t, mode, ids):
    line = "%s-[%s%s%s]->%s" % (
        _endpoint_part([s for s, _ in t.endpoints], ids),
        ids[(EDGE, t.name)],
        _labels_part(t),
        _properties_block(t, mode),
        _endpoint_part([d for _, d in t.endpoints], ids),
    )
    if t.abstract:
        line = "ABSTRACT %s" % line
    if mode == STRICT and t.cardinality != Cardinality.UNSET:
        line += " /* %s */" % t.cardinality.notation
    return line


def emit_pg_schema(schema, mode=LOOSE):
    """
    :param SchemaGraph schema: Schema to render
    :param str mode: LOOSE (labels and keys) or STRICT (plus constraints, datatypes and cardinalities)
    :return str: PG-Schema graph type declaration
    """
    if mode not in MODES:
        abort("Unknown PG-Schema mode '%s', expecting one of: %s" % (mode, ", ".join(MODES)))
    if mode == STRICT and not schema.postprocessed:
        abort("STRICT PG-Schema needs a post-processed schema")
    header = "CREATE GRAPH TYPE %s %s {" % (GRAPH_NAME, mode)
    ids = type_ids(schema)
    lines = [_node_line(schema.node_types[n], mode, ids) for n in sorted(schema.node_types)]
    lines.extend(_edge_line(schema.edge_types[n], mode, ids) for n in sorted(schema.edge_types))
    if not lines:
        return "%s }\n" % header
    return "%s\n%s\n}\n" % (header, ",\n".join("  %s" % line for line in lines))


def _xsd_elements(t):
    result = []
    if not t.properties:
        result.append("    <xs:sequence/>")
        return result
    result.append("    <xs:sequence>")
    for key in sorted(t.properties):
        spec = t.properties[key]
        optional = ' minOccurs="0"' if spec.constraint == Constraint.OPTIONAL else ""
        result.append("      <xs:element name=%s type=\"%s\"%s/>" % (quoteattr(key), XSD_TYPES[spec.datatype or Datatype.STRING], optional))
    result.append("    </xs:sequence>")
    return result


def emit_xsd(schema):
    """
    :param SchemaGraph schema: Schema to render
    :return str: XML schema with one complex type per node type, then per edge type
    """
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', '<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">']
    for name in sorted(schema.node_types):
        lines.append("  <xs:complexType name=%s>" % quoteattr(name))
        lines.extend(_xsd_elements(schema.node_types[name]))
        lines.append("  </xs:complexType>")

    for name in sorted(schema.edge_types):
        t = schema.edge_types[name]
        endpoints = ", ".join("%s->%s" % pair for pair in sorted(t.endpoints))
        documentation = "endpoints: %s" % (endpoints or "none")
        if t.cardinality != Cardinality.UNSET:
            documentation += "; cardinality: %s" % t.cardinality.notation
        lines.append("  <xs:complexType name=%s>" % quoteattr(name))
        lines.append("    <xs:annotation>")
        lines.append("      <xs:documentation>%s</xs:documentation>" % escape(documentation))
        lines.append("    </xs:annotation>")
        lines.extend(_xsd_elements(t))
        lines.append('    <xs:attribute name="source" type="xs:string" use="required"/>')
        lines.append('    <xs:attribute name="target" type="xs:string" use="required"/>')
        lines.append("  </xs:complexType>")

    lines.append("</xs:schema>")
    return "%s\n" % "\n".join(lines)


def _properties_json(t):
    return dict(
        (k, {"constraint": v.constraint and v.constraint.value, "datatype": v.datatype and v.datatype.value})
        for k, v in t.properties.items()
    )


def schema_to_json(schema):
    """
    :param SchemaGraph schema: Schema to dump
    :return dict: JSON-compatible representation, lists sorted
    """
    node_types = []
    for name in sorted(schema.node_types):
        t = schema.node_types[name]
        node_types.append({"name": name, "labels": sorted(t.labels), "properties": _properties_json(t)})
    edge_types = []
    for name in sorted(schema.edge_types):
        t = schema.edge_types[name]
        edge_types.append({
            "name": name,
            "labels": sorted(t.labels),
            "properties": _properties_json(t),
            "endpoints": [list(pair) for pair in sorted(t.endpoints)],
            "cardinality": t.cardinality.name,
            "maxOut": t.max_out,
            "maxIn": t.max_in,
        })
    return {"edgeTypes": edge_types, "nodeTypes": node_types, "postprocessed": bool(schema.postprocessed)}


def _properties_from_json(data):
    result = {}
    for key, spec in (data or {}).items():
        constraint = spec.get("constraint")
        datatype = spec.get("datatype")
        result[key] = PropertySpec(Datatype(datatype) if datatype else None, Constraint(constraint) if constraint else None)
    return result


def schema_from_json(data):
    """Inverse of schema_to_json()"""
    try:
        node_types = [NodeType(t["name"], labels=t.get("labels"), properties=_properties_from_json(t.get("properties"))) for t in data["nodeTypes"]]
        edge_types = [
            EdgeType(
                t["name"],
                labels=t.get("labels"),
                properties=_properties_from_json(t.get("properties")),
                endpoints=t.get("endpoints"),
                cardinality=Cardinality[t.get("cardinality") or "UNSET"],
                max_out=t.get("maxOut"),
                max_in=t.get("maxIn"),
            )
            for t in data["edgeTypes"]
        ]

    except (KeyError, TypeError, ValueError) as e:
        abort("Invalid schema JSON: %s" % e)

    return SchemaGraph(node_types, edge_types, postprocessed=bool(data.get("postprocessed")))


def load_schema(path):
    return schema_from_json(load_json(path))


def write_schema(schema, out_dir, prefix="schema"):
    """
    :param SchemaGraph schema: Schema to save
    :param str out_dir: Folder where to write files
    :param str prefix: Prefix of file names
    :return list[str]: Paths of written files (STRICT text only when 'schema' is post-processed)
    """
    ensure_folder(out_dir)
    outputs = [("%s.loose.pgs" % prefix, lambda: emit_pg_schema(schema, LOOSE))]
    if schema.postprocessed:
        outputs.append(("%s.strict.pgs" % prefix, lambda: emit_pg_schema(schema, STRICT)))
    outputs.append(("%s.xsd" % prefix, lambda: emit_xsd(schema)))
    paths = []
    for name, render in outputs:
        path = os.path.join(out_dir, name)
        with open(path, "wt", encoding="utf-8") as fh:
            fh.write(render())
        paths.append(path)

    path = os.path.join(out_dir, "%s.json" % prefix)
    save_json(path, schema_to_json(schema))
    paths.append(path)
    trace("wrote %s" % ", ".join(paths))
    return paths
