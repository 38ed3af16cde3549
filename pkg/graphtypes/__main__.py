import sys

from graphtypes.commands import main


if __name__ == "__main__":
    sys.exit(main())
