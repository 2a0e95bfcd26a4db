#!/usr/bin/env python3
"""Recompute the pinned long-run acoustic-energy average.

The reference average that every relative error in the test suite and the
CLI reports is measured against lives in tests/fixtures/reference_eac.json.
This script recomputes it by brute-force integration using exactly the
parameters recorded in the fixture, prints both values, and exits nonzero
if they disagree beyond double-precision accumulation noise. Run with
--write to update the fixture in place (for example after changing the
model or the integrator on purpose).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from thermoesn import ModelParams, simulate, time_average

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "reference_eac.json"
RTOL = 1e-12


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--write", action="store_true",
                        help="update the fixture with the recomputed value")
    parser.add_argument("--fixture", type=Path, default=FIXTURE,
                        help=f"fixture path (default: {FIXTURE})")
    args = parser.parse_args(argv)

    spec = json.loads(args.fixture.read_text())
    params = ModelParams(**spec["model"])
    series, folds = simulate(params, spec["dt"], duration=spec["duration"],
                             transient=spec["transient"])
    value = time_average(series)
    stored = spec["reference_average"]
    print(f"recomputed reference average: {value!r}")
    print(f"stored fixture value:         {stored!r}")
    print(f"heat-release fold events:     {folds}")

    if args.write:
        spec["reference_average"] = value
        args.fixture.write_text(json.dumps(spec, indent=2) + "\n")
        print(f"updated {args.fixture}")
        return 0
    if abs(value - stored) > RTOL * abs(stored):
        print("MISMATCH: fixture is stale; rerun with --write if intended",
              file=sys.stderr)
        return 1
    print("fixture is up to date")
    return 0


if __name__ == "__main__":
    sys.exit(main())
