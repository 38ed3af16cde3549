"""
Replay tests/scenarios/*/.commands, or refresh their expected.txt (tox -e refreshscenarios)
"""

import argparse
import io
import logging
import os
import shlex
import shutil

from mock import patch

import graphtypes
from graphtypes.content import load_contents

if __name__ == "__main__":
    import conftest
else:
    from . import conftest


SCENARIOS = os.path.join(conftest.TESTS, "scenarios")
COMMANDS_FILE = ".commands"
EXPECTED_FILE = "expected.txt"


def scenario_paths():
    """Project-relative paths of folders holding a .commands file"""
    return [
        conftest.relative_path(os.path.join(SCENARIOS, name))
        for name in sorted(os.listdir(SCENARIOS))
        if os.path.isfile(os.path.join(SCENARIOS, name, COMMANDS_FILE))
    ]


class Scenario:
    """Folder with input files, a .commands file, and the expected combined output of those commands"""

    def __init__(self, relative_path):
        self.name = relative_path
        self.folder = os.path.join(conftest.PROJECT_DIR, relative_path)
        lines = (load_contents(os.path.join(self.folder, COMMANDS_FILE)) or "").splitlines()
        self.commands = [line.strip() for line in lines if line.strip() and not line.strip().startswith("#")]

    def __repr__(self):
        return self.name

    @property
    def expected_path(self):
        return os.path.join(self.folder, EXPECTED_FILE)

    def expected(self):
        return load_contents(self.expected_path)

    @staticmethod
    def transcript(command):
        code, output = conftest.run_cli(*shlex.split(command))
        lines = [":: graphtypes %s" % command]
        if output:
            lines.append(output)
        if code:
            lines.append("exit code: %s" % code)
        return "\n".join(lines)

    def replay(self):
        """Combined transcript of all commands, ran from a temp copy of the inputs, with a neutral environment"""
        environ = dict(os.environ)
        for name in ("GRAPHTYPES_DEBUG", graphtypes.OUTPUT_ENV):
            environ.pop(name, None)
        with graphtypes.temp_resource() as temp:
            for name in os.listdir(self.folder):
                if name not in (COMMANDS_FILE, EXPECTED_FILE):
                    shutil.copy(os.path.join(self.folder, name), temp)
            with patch.dict(os.environ, environ, clear=True):
                return "\n\n".join(self.transcript(c) for c in self.commands)

    def refresh(self, dryrun=False):
        output = self.replay()
        if dryrun:
            print(output)
            return
        logging.info("Refreshing %s" % self.expected_path)
        with io.open(self.expected_path, "wt", encoding="utf-8") as fh:
            fh.write("%s\n" % output)


def main():
    parser = argparse.ArgumentParser(description="Refresh tests/scenarios/*/expected.txt")
    parser.add_argument("--debug", action="store_true", help="Show debug info")
    parser.add_argument("--dryrun", "-n", action="store_true", help="Print output, leave expected.txt as is")
    parser.add_argument("scenario", nargs="*", help="Scenarios to refresh (default: all)")
    args = parser.parse_args()
    logging.basicConfig(format="%(asctime)s %(levelname)s %(message)s", level=logging.DEBUG if args.debug else logging.INFO)
    os.chdir(conftest.PROJECT_DIR)
    for path in args.scenario or scenario_paths():
        Scenario(path).refresh(dryrun=args.dryrun)


if __name__ == "__main__":
    main()
