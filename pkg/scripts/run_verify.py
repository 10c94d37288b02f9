"""Run the oracle-equivalence suite, optionally with the extended checks.

    python scripts/run_verify.py --seeds 0-499 --extended
"""

import sys

from evprofile import cli

if __name__ == "__main__":
    sys.exit(cli.main(["verify", *sys.argv[1:]]))
