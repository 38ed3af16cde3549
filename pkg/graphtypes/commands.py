"""
Command line interface: one subcommand per pipeline
"""

import argparse
import collections
import logging
import os
import sys
import traceback

import graphtypes
from graphtypes import abort, ensure_folder, listify, to_float, to_int, UsageError
from graphtypes.bench import (
    BENCHMARK_COLUMNS,
    DEFAULT_GRID,
    evaluate,
    gen_synthetic,
    graph_statistics,
    GroundTruth,
    inject_noise,
    NoiseProfile,
    parse_grid,
    run_benchmark,
    save_rows,
    sweep,
    SWEEP_COLUMNS,
)
from graphtypes.content import FORMATS, GraphSource, load_graph, load_yaml, save_json, write_graph
from graphtypes.lsh import METHODS
from graphtypes.pipeline import Discovery, run_discover, run_incremental
from graphtypes.serialize import emit_pg_schema, LOOSE, STRICT
from graphtypes.settings import Settings, TUNABLES


COMMANDS = collections.OrderedDict()
LOG_FORMAT = "%(asctime)s %(levelname)s %(message)s"


def SubCommand(cls):
    """Decorator registering a subcommand, named after its class"""
    name = cls.__name__.replace("Command", "")
    name = "".join("-%s" % c.lower() if c.isupper() else c for c in name).strip("-")
    cls.name = name
    COMMANDS[name] = cls()
    return cls


class ArgumentParser(argparse.ArgumentParser):
    """Report invocation errors as UsageError"""

    def error(self, message):
        abort("%s: %s" % (self.prog, message))


def _add_input(parser):
    parser.add_argument("input", help="Graph file (JSONL, or node CSV with --edges)")
    parser.add_argument("--edges", help="Separate edge file (required for CSV input)")
    parser.add_argument("--format", choices=FORMATS, help="Input format (default: from file extension)")


def _add_tunable(parser, name, **kwargs):
    tunable = TUNABLES[name]
    parser.add_argument("--%s" % name, dest=tunable.dest, default=None, help=tunable.help, **kwargs)


def _add_switch(parser, name):
    tunable = TUNABLES[name]
    parser.add_argument("--%s" % name, dest=tunable.dest, action="store_const", const=True, default=None, help=tunable.help)
    parser.add_argument("--no-%s" % name, dest=tunable.dest, action="store_const", const=False, help="Turn off --%s" % name)


def _add_common(parser):
    parser.add_argument("--config", help="YAML file with settings (flags take precedence)")
    parser.add_argument("--debug", action="store_true", help="Show debug output")
    _add_tunable(parser, "seed", metavar="N")
    _add_tunable(parser, "out", metavar="FOLDER")


def _add_pipeline(parser):
    _add_tunable(parser, "method", metavar="|".join(METHODS))
    _add_tunable(parser, "theta", metavar="J")
    _add_tunable(parser, "dim", metavar="D")
    _add_switch(parser, "adaptive")
    _add_tunable(parser, "bucket-length", metavar="B")
    _add_tunable(parser, "tables", metavar="T")
    _add_tunable(parser, "radius", metavar="R")
    _add_tunable(parser, "min-jaccard", metavar="J")
    _add_switch(parser, "stratify")
    _add_switch(parser, "postprocess")
    _add_switch(parser, "sample-datatypes")
    _add_tunable(parser, "threads", metavar="N")


def resolved_settings(args, defaults=None, skipped=None):
    """
    :param argparse.Namespace args: Parsed command line
    :param dict|None defaults: Command-specific defaults
    :param set|None skipped: Tunables the command interprets itself
    :return Settings: Settings resolved from flags, --config file, environment and defaults
    """
    explicit = collections.OrderedDict()
    for name, tunable in TUNABLES.items():
        if not skipped or name not in skipped:
            explicit[name] = getattr(args, tunable.dest, None)
    return Settings.resolved(explicit=explicit, config_path=getattr(args, "config", None), defaults=defaults)


def graph_source(args, settings):
    return GraphSource(
        args.input,
        edge_path=args.edges,
        format=args.format,
        batch_size=settings.value("batch-size"),
        shuffle=settings.value("shuffle"),
        seed=settings.value("seed"),
    )


def _relative_paths(paths, folder):
    return ", ".join(os.path.relpath(p, folder) for p in paths)


class Command(object):
    """Base of all subcommands"""

    name = None  # type: str

    @property
    def help(self):
        return self.__class__.__doc__.strip()

    def arguments(self, parser):
        """Add command-specific arguments to 'parser'"""

    def run(self, args):
        """Execute command with parsed 'args'"""


@SubCommand
class DiscoverCommand(Command):
    """Discover the schema of a graph"""

    def arguments(self, parser):
        _add_input(parser)
        _add_common(parser)
        _add_pipeline(parser)

    def run(self, args):
        settings = resolved_settings(args)
        postprocessed = settings.value("postprocess")
        out = settings.value("out")
        schema, paths = run_discover(graph_source(args, settings), settings.discovery_config(), out, postprocessed=postprocessed)
        print(emit_pg_schema(schema, STRICT if postprocessed else LOOSE).rstrip())
        print("wrote %s" % _relative_paths(paths, out))


@SubCommand
class IncrementalCommand(Command):
    """Discover the schema of a graph batch by batch"""

    def arguments(self, parser):
        _add_input(parser)
        _add_common(parser)
        _add_pipeline(parser)
        _add_tunable(parser, "batch-size", metavar="N")
        _add_switch(parser, "shuffle")

    def run(self, args):
        settings = resolved_settings(args, defaults={"postprocess": False})
        out = settings.value("out")
        config = settings.discovery_config()
        snapshots, schema, paths = run_incremental(graph_source(args, settings), config, out, postprocess_batches=settings.value("postprocess"))
        for i, snapshot in enumerate(snapshots):
            print("batch %s: %s node types, %s edge types" % (i, len(snapshot.node_types), len(snapshot.edge_types)))
        print(emit_pg_schema(schema, STRICT).rstrip())
        print("wrote %s" % _relative_paths(paths, out))


def _percentage(value, name):
    fraction = to_float(value)
    if fraction is None or not 0 <= fraction <= 100:
        abort("--%s must be a percentage between 0 and 100, got '%s'" % (name, value))
    return fraction / 100.0


@SubCommand
class InjectNoiseCommand(Command):
    """Drop properties and labels from a clean graph, keeping the truth aside"""

    def arguments(self, parser):
        _add_input(parser)
        _add_common(parser)
        parser.add_argument("--drop", default="0", metavar="PCT", help="Percentage of property instances to drop")
        parser.add_argument("--labels", default="100", metavar="PCT", help="Percentage of elements keeping their labels")

    def run(self, args):
        settings = resolved_settings(args)
        profile = NoiseProfile(_percentage(args.drop, "drop"), _percentage(args.labels, "labels"), seed=settings.value("seed"))
        graph = load_graph(graph_source(args, settings))
        noisy, truth = inject_noise(graph, profile)
        out = ensure_folder(settings.value("out"))
        write_graph(noisy, os.path.join(out, "graph.jsonl"))
        truth.save(os.path.join(out, "truth.json"))
        print("injected %s into %s" % (profile, noisy))
        print("wrote graph.jsonl, truth.json")


@SubCommand
class GenSyntheticCommand(Command):
    """Generate a graph from a YAML specification of its types"""

    def arguments(self, parser):
        parser.add_argument("spec", help="YAML (or JSON) specification of node and edge types")
        _add_common(parser)

    def run(self, args):
        settings = resolved_settings(args)
        graph, truth = gen_synthetic(load_yaml(args.spec), seed=settings.value("seed"))
        out = ensure_folder(settings.value("out"))
        write_graph(graph, os.path.join(out, "graph.jsonl"))
        truth.save(os.path.join(out, "truth.json"))
        print("generated %s" % graph)
        print("wrote graph.jsonl, truth.json")


def _methods(args):
    result = [m.lower() for m in listify(args.method, separator=",")]
    for method in result:
        if method not in METHODS:
            abort("Unknown method '%s', expecting one of: %s" % (method, ", ".join(METHODS)))
    return result


@SubCommand
class EvaluateCommand(Command):
    """Score discovered types against the truth (or run the noise benchmark grid)"""

    def arguments(self, parser):
        _add_input(parser)
        _add_common(parser)
        _add_pipeline(parser)
        parser.add_argument("--truth", help="Truth file written by inject-noise or gen-synthetic")
        parser.add_argument("--grid", default=DEFAULT_GRID, help="Benchmark grid '<drops>:<label availabilities>', in percent")
        parser.add_argument("--seeds", default=None, help="Comma separated benchmark seeds (default: --seed)")

    def run(self, args):
        methods = _methods(args)
        settings = resolved_settings(args, skipped={"method"})
        config = settings.discovery_config()
        out = ensure_folder(settings.value("out"))
        graph = load_graph(graph_source(args, settings))
        if args.truth:
            if methods:
                config = config.replaced(method=methods[0])
            report = evaluate(graph, GroundTruth.load(args.truth), config)
            save_json(os.path.join(out, "report.json"), report.to_dict())
            print("nodeF1: %.6f" % report.node_f1)
            print("edgeF1: %.6f" % report.edge_f1)
            print("wrote report.json")
            return

        drops, availabilities = parse_grid(args.grid)
        seeds = [to_int(s) for s in listify(args.seeds, separator=",")] if args.seeds else [config.seed]
        if None in seeds:
            abort("Invalid --seeds '%s'" % args.seeds)
        dataset = os.path.splitext(os.path.basename(args.input))[0]
        rows = run_benchmark(
            graph,
            dataset=dataset,
            drops=drops,
            availabilities=availabilities,
            methods=methods or [config.method],
            seeds=seeds,
            config=config,
            threads=config.threads,
        )
        save_rows(os.path.join(out, "benchmark.csv"), rows, BENCHMARK_COLUMNS)
        failed = sum(1 for row in rows if row.get("error"))
        print("%s benchmark runs, %s failed" % (len(rows), failed))
        print("wrote benchmark.csv")


def _numbers(text, convert, name):
    result = [convert(v) for v in listify(text, separator=",")]
    if None in result:
        abort("Invalid --%s '%s'" % (name, text))
    return result


@SubCommand
class SweepCommand(Command):
    """Score ELSH over a grid of bucket scales and table counts"""

    def arguments(self, parser):
        _add_input(parser)
        _add_common(parser)
        _add_pipeline(parser)
        parser.add_argument("--truth", required=True, help="Truth file written by inject-noise or gen-synthetic")
        parser.add_argument("--alphas", default="0.5,0.8,1.0,1.5,2.0", help="Comma separated bucket scales")
        parser.add_argument("--tables-grid", default="1,5,10,20", help="Comma separated numbers of hash tables")

    def run(self, args):
        settings = resolved_settings(args)
        alphas = _numbers(args.alphas, to_float, "alphas")
        tables = _numbers(args.tables_grid, to_int, "tables-grid")
        graph = load_graph(graph_source(args, settings))
        rows = sweep(graph, GroundTruth.load(args.truth), alphas, tables, config=settings.discovery_config())
        out = ensure_folder(settings.value("out"))
        save_rows(os.path.join(out, "sweep.csv"), rows, SWEEP_COLUMNS)
        best = max(float(row["nodeF1"]) for row in rows)
        print("%s sweep runs, best nodeF1: %.6f" % (len(rows), best))
        print("wrote sweep.csv")


@SubCommand
class ExplainCommand(Command):
    """Show resolved settings, and where their values came from"""

    def arguments(self, parser):
        _add_input(parser)
        _add_common(parser)
        _add_pipeline(parser)

    def run(self, args):
        settings = resolved_settings(args)
        if settings.value("adaptive"):
            graph = load_graph(graph_source(args, settings))
            discovery = Discovery(config=settings.discovery_config())
            discovery.feed(graph.nodes.values(), graph.edges.values())
            settings.add_estimates(discovery.estimates)
        for line in settings.report():
            print(line)


@SubCommand
class StatsCommand(Command):
    """Show counts of elements, labels, keys and patterns of a graph"""

    def arguments(self, parser):
        _add_input(parser)
        parser.add_argument("--debug", action="store_true", help="Show debug output")

    def run(self, args):
        graph = load_graph(GraphSource(args.input, edge_path=args.edges, format=args.format))
        for key, value in graph_statistics(graph).items():
            print("%s: %s" % (key, value))


def parser():
    result = ArgumentParser(prog="graphtypes", description="Discover node and edge types in property graph dumps")
    result.add_argument("--version", action="version", version=graphtypes.__version__)
    subparsers = result.add_subparsers(dest="command", metavar="command")
    for name, command in COMMANDS.items():
        command.arguments(subparsers.add_parser(name, help=command.help, description=command.help))
    return result


def main(argv=None):
    """
    :param list|None argv: Command line arguments (default: sys.argv[1:])
    :return int: Exit code: 0 on success, 1 on invalid usage or input, 2 on internal error
    """
    try:
        args = parser().parse_args(argv)
        if not args.command:
            abort("no command given, see --help")

        if args.debug:
            graphtypes.DEBUG = True

        if not graphtypes.TESTING:
            logging.basicConfig(level=logging.DEBUG if graphtypes.DEBUG else logging.INFO, format=LOG_FORMAT)
            logging.captureWarnings(True)

        COMMANDS[args.command].run(args)
        return 0

    except UsageError as e:
        sys.stderr.write("error: %s\n" % e)
        return 1

    except Exception as e:
        if graphtypes.DEBUG:
            traceback.print_exc()
        sys.stderr.write("internal error: %s\n" % e)
        return 2
