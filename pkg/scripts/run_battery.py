"""Run every bundled scenario through the CLI and tabulate exit codes and verdicts."""

import argparse
import json
import sys
import tempfile
import time
from pathlib import Path

from boundary_comparison import cli


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", help="report directory (default: a temporary directory)")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    out = Path(args.out or tempfile.mkdtemp(prefix="battery-"))
    rows = []
    for name in sorted(cli.bundled_scenarios()):
        start = time.perf_counter()
        code = cli.main(["--scenario", name, "--out", str(out), "--format", "both", "--threads", str(args.threads)])
        elapsed = time.perf_counter() - start
        verdict = "-"
        report = out / f"{name}.json"
        if report.exists():
            verdict = json.loads(report.read_text()).get("rigidity", {}).get("kind", "-")
        rows.append((name, code, verdict, elapsed))
    print(f"\n{'scenario':22s} {'exit':>4s}  {'rigidity':26s} {'seconds':>8s}")
    for name, code, verdict, elapsed in rows:
        print(f"{name:22s} {code:4d}  {verdict:26s} {elapsed:8.2f}")
    print(f"reports in {out}")
    return max(code for _, code, _, _ in rows)


if __name__ == "__main__":
    sys.exit(main())
