#!/usr/bin/env python3
"""Run every golden configuration twice and verify byte-level determinism.

Writes per-config reports and curve CSVs under --out-dir (default
out/golden) and prints one verdict line per check. Exits nonzero if any
check FAILs or the two passes disagree byte-for-byte.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import becomp.cli as cli
from becomp.reports import canonical_json

CONFIG_DIR = Path(__file__).parent / "configs"


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", default="out/golden")
    args = parser.parse_args()
    out_root = Path(args.out_dir)

    t0 = time.perf_counter()
    failures = 0
    payloads = []
    for attempt in range(2):
        batch = {}
        for path in sorted(CONFIG_DIR.glob("golden_*.json")):
            cfg = cli.parse_config(json.loads(path.read_text()))
            csv_dir = None
            if attempt == 0:
                csv_dir = out_root / path.stem / "curves"
                csv_dir.mkdir(parents=True, exist_ok=True)
            reports, code = cli.run_config(cfg, csv_dir=csv_dir)
            failures += code
            batch[path.name] = cli.reports_payload(reports, include_runtime=False)
            if attempt == 0:
                report_path = out_root / path.stem / "reports.json"
                report_path.write_text(
                    canonical_json(cli.reports_payload(reports)) + "\n")
                for rep in reports:
                    print(f"{path.stem:<28} {rep.check_name:<16} {rep.verdict:<8} "
                          f"slack={rep.worst_slack:+.3e}")
        payloads.append(canonical_json(batch))

    deterministic = payloads[0] == payloads[1]
    elapsed = time.perf_counter() - t0
    print(f"\ntwo full passes in {elapsed:.1f}s; "
          f"byte-identical payloads: {deterministic}")
    return 0 if (failures == 0 and deterministic) else 1


if __name__ == "__main__":
    sys.exit(main())
