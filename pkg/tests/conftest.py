import contextlib
import io
import os
import sys

import pytest
from mock import patch

import graphtypes
from graphtypes.content import GraphSource, load_graph
from graphtypes.model import Edge, Node, PropertyGraph


TESTS = os.path.abspath(os.path.dirname(__file__))
PROJECT_DIR = os.path.dirname(TESTS)
SOCIAL = os.path.join(TESTS, "scenarios", "social", "graph.jsonl")

graphtypes.TESTING = True
os.environ["PYTHONDONTWRITEBYTECODE"] = "1"
os.environ.pop(graphtypes.OUTPUT_ENV, None)
sys.dont_write_bytecode = True


def relative_path(full_path):
    """'full_path' relative to project folder"""
    return os.path.relpath(full_path, PROJECT_DIR)


@pytest.fixture
def social_graph():
    """The running example: persons (one unlabeled), posts, an organization and a place"""
    return load_graph(GraphSource(SOCIAL))


@pytest.fixture
def workspace():
    """Run test from within a temp folder"""
    with graphtypes.temp_resource() as temp:
        yield temp


def small_graph(nodes, edges=()):
    """
    :param nodes: (id, labels, properties) tuples
    :param edges: (id, src, tgt, labels, properties) tuples
    :return PropertyGraph: Corresponding graph
    """
    graph = PropertyGraph()
    for node_id, labels, properties in nodes:
        graph.add_node(Node(node_id, labels=labels, properties=properties))
    for edge_id, src, tgt, labels, properties in edges:
        graph.add_edge(Edge(edge_id, src, tgt, labels=labels, properties=properties))
    return graph


class capture_output:
    """
    Grab stdout, stderr and warnings (as 'WARNING: ...' lines) while in the 'with' block,
    captured text stays available afterwards:

    with capture_output() as logged:
        ...
    assert "some message" in logged
    """

    def __init__(self):
        self.buffer = io.StringIO()
        self.stack = contextlib.ExitStack()

    def __repr__(self):
        return self.buffer.getvalue().rstrip()

    def __contains__(self, item):
        return item is not None and item in str(self)

    def __enter__(self):
        self.stack.enter_context(contextlib.redirect_stdout(self.buffer))
        self.stack.enter_context(contextlib.redirect_stderr(self.buffer))
        self.stack.enter_context(patch("warnings.warn", side_effect=self.warned))
        return self

    def __exit__(self, *args):
        self.stack.close()

    def warned(self, message, *_, **__):
        self.buffer.write("WARNING: %s\n" % graphtypes.short(message, -60))


def cleaned_output(text):
    """'text' without blank lines nor trailing spaces, current folder shown as <target>"""
    here = os.getcwd()
    lines = (line.rstrip().replace(here, "<target>") for line in text.splitlines())
    return "\n".join(line for line in lines if line)


def run_cli(*args):
    """
    :return (int, str): Exit code and cleaned output of 'graphtypes <args>', ran in-process
    """
    from graphtypes.commands import main

    debug = graphtypes.DEBUG
    try:
        with capture_output() as logged:
            code = main(list(args))
        return code, cleaned_output(str(logged))

    finally:
        graphtypes.DEBUG = debug
