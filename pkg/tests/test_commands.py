import io
import json
import os

from mock import patch

from graphtypes.bench import gen_synthetic, inject_noise, NoiseProfile
from graphtypes.commands import COMMANDS
from graphtypes.content import GraphSource, load_graph

from . import conftest
from .conftest import run_cli
from .test_bench import SYNTHETIC


def synthetic_files(folder="synth", seed="3"):
    with io.open("spec.json", "wt") as fh:
        json.dump(SYNTHETIC, fh)
    return run_cli("gen-synthetic", "spec.json", "--out", folder, "--seed", seed)


def test_command_names():
    assert list(COMMANDS) == ["discover", "incremental", "inject-noise", "gen-synthetic", "evaluate", "sweep", "explain", "stats"]
    assert COMMANDS["inject-noise"].help == "Drop properties and labels from a clean graph, keeping the truth aside"


def test_usage_errors(workspace):
    assert run_cli() == (1, "error: no command given, see --help")
    assert run_cli("discover") == (1, "error: graphtypes discover: the following arguments are required: input")

    code, output = run_cli("inject-noise", conftest.SOCIAL, "--drop", "120")
    assert code == 1
    assert "--drop must be a percentage between 0 and 100, got '120'" in output

    code, output = run_cli("evaluate", conftest.SOCIAL, "--method", "elsh,bogus")
    assert code == 1
    assert "Unknown method 'bogus'" in output

    code, output = run_cli("evaluate", conftest.SOCIAL, "--seeds", "1,x")
    assert (code, output) == (1, "error: Invalid --seeds '1,x'")


def test_internal_error(workspace):
    with patch("graphtypes.commands.load_graph", side_effect=RuntimeError("boom")):
        assert run_cli("stats", conftest.SOCIAL) == (2, "internal error: boom")


def test_bad_input_files(workspace):
    with io.open("latin.jsonl", "wb") as fh:
        fh.write(b'{"id": "a"}\n{"id": "b", "labels": ["Caf\xe9"]}\n')
    code, output = run_cli("discover", "latin.jsonl")
    assert code == 1
    assert output.startswith("error: latin.jsonl:2: invalid UTF-8")

    with io.open("labels.jsonl", "wt") as fh:
        fh.write('{"id": "a", "labels": [1, 2]}\n')
    assert run_cli("stats", "labels.jsonl") == (1, "error: labels.jsonl:1: node 'a' has a non-string label 1")

    with io.open("edges.csv", "wt") as fh:
        fh.write("id,label,src,tgt\n")
    with io.open("nodes.csv", "wb") as fh:
        fh.write(b"id,labels\nx,Caf\xe9\n")
    code, output = run_cli("stats", "nodes.csv", "--edges", "edges.csv")
    assert code == 1
    assert output.startswith("error: nodes.csv:2: invalid UTF-8")


def test_negative_seed(workspace):
    code, output = run_cli("discover", conftest.SOCIAL, "--seed", "-1")
    assert code == 1
    assert "expecting a value in [0, inf]" in output


def test_debug():
    code, output = run_cli("stats", conftest.SOCIAL, "--debug")
    assert code == 0
    assert ":: loaded 7 nodes, 7 edges" in output
    assert "nodes: 7" in output


def test_gen_synthetic(workspace):
    assert synthetic_files() == (0, "generated 8 nodes, 6 edges\nwrote graph.jsonl, truth.json")
    graph, truth = gen_synthetic(SYNTHETIC, seed=3)
    assert load_graph(GraphSource(os.path.join("synth", "graph.jsonl"))) == graph
    with io.open(os.path.join("synth", "truth.json")) as fh:
        assert json.load(fh) == truth.to_dict()

    code, output = run_cli("gen-synthetic", "missing.yml")
    assert code == 1
    assert "missing.yml: can't read file" in output


def test_inject_noise(workspace):
    code, output = run_cli("inject-noise", conftest.SOCIAL, "--drop", "30", "--labels", "50", "--seed", "4", "--out", "noisy")
    assert code == 0
    assert output == "injected drop 30%, labels 50%, seed 4 into 7 nodes, 7 edges\nwrote graph.jsonl, truth.json"
    social = load_graph(GraphSource(conftest.SOCIAL))
    expected, _ = inject_noise(social, NoiseProfile(0.3, 0.5, seed=4))
    assert load_graph(GraphSource(os.path.join("noisy", "graph.jsonl"))) == expected


def test_evaluate(workspace):
    synthetic_files()
    code, output = run_cli("evaluate", "synth/graph.jsonl", "--truth", "synth/truth.json", "--out", "eval")
    assert code == 0
    assert output == "nodeF1: 1.000000\nedgeF1: 1.000000\nwrote report.json"
    with io.open(os.path.join("eval", "report.json")) as fh:
        report = json.load(fh)
    assert report["nodeAccuracy"] == 1.0
    assert sorted(report["perType"]["edges"]) == ["WORKS_AT"]

    code, output = run_cli("evaluate", "synth/graph.jsonl", "--grid", "0:100", "--method", "elsh,minhash", "--seeds", "1,2", "--out", "bench")
    assert code == 0
    assert output == "4 benchmark runs, 0 failed\nwrote benchmark.csv"
    with io.open(os.path.join("bench", "benchmark.csv")) as fh:
        lines = fh.read().splitlines()
    assert len(lines) == 5
    assert [line.split(",")[:5] for line in lines[1:]] == [
        ["graph", "elsh", "0", "100", "1"],
        ["graph", "elsh", "0", "100", "2"],
        ["graph", "minhash", "0", "100", "1"],
        ["graph", "minhash", "0", "100", "2"],
    ]


def test_sweep(workspace):
    synthetic_files()
    code, output = run_cli("sweep", "synth/graph.jsonl", "--truth", "synth/truth.json", "--alphas", "1", "--tables-grid", "1,5", "--out", "sw")
    assert code == 0
    assert output == "3 sweep runs, best nodeF1: 1.000000\nwrote sweep.csv"
    with io.open(os.path.join("sw", "sweep.csv")) as fh:
        assert fh.readline().strip() == "alpha,tables,bucketLength,nodeF1,edgeF1,adaptive"

    code, output = run_cli("sweep", "synth/graph.jsonl", "--truth", "synth/truth.json", "--alphas", "x")
    assert (code, output) == (1, "error: Invalid --alphas 'x'")

    code, output = run_cli("sweep", "synth/graph.jsonl")
    assert code == 1
    assert "the following arguments are required: --truth" in output


def test_output_folder(workspace):
    with patch.dict(os.environ, {"GRAPHTYPES_OUT": "from-env"}):
        code, output = run_cli("discover", conftest.SOCIAL, "--no-postprocess")
        assert code == 0
        assert output.endswith("wrote schema.loose.pgs, schema.xsd, schema.json, timings.log")
        assert sorted(os.listdir("from-env")) == ["schema.json", "schema.loose.pgs", "schema.xsd", "timings.log"]

        code, output = run_cli("explain", conftest.SOCIAL, "--no-adaptive", "--out", "flag")
        assert "out: (explicit          ) flag" in output
        assert "\\_: (env:GRAPHTYPES_OUT) from-env" in output


def test_explain_adaptive(workspace):
    code, output = run_cli("explain", conftest.SOCIAL)
    assert code == 0
    lines = output.splitlines()
    assert lines[5].startswith("   bucket-length: (adaptive:edge")
    assert lines[6].startswith("              \\_: (adaptive:node")
    assert lines[7] == "              \\_: (default      ) 1"

    # Explicit values win over estimates
    code, output = run_cli("explain", conftest.SOCIAL, "--tables", "7")
    assert "          tables: (explicit     ) 7" in output.splitlines()
