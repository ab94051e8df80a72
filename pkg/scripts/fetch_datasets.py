#!/usr/bin/env python3
"""Download the public SNAP collaboration networks the acceptance suite uses.

Usage:
    python scripts/fetch_datasets.py [DEST_DIR]

DEST_DIR defaults to ./data. Point LAMCC_DATA_DIR at the same directory
when running the suite. Needs outbound network access; the two
dataset-gated acceptance tests skip when these files are absent.
"""

import gzip
import sys
import urllib.request
from pathlib import Path

DATASETS = {
    "ca-GrQc.txt": "https://snap.stanford.edu/data/ca-GrQc.txt.gz",
    "ca-HepTh.txt": "https://snap.stanford.edu/data/ca-HepTh.txt.gz",
    "ca-HepPh.txt": "https://snap.stanford.edu/data/ca-HepPh.txt.gz",
}


def main() -> int:
    dest = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    dest.mkdir(parents=True, exist_ok=True)
    failures = 0
    for name, url in DATASETS.items():
        target = dest / name
        if target.exists():
            print(f"{name}: already present")
            continue
        print(f"{name}: fetching {url}")
        try:
            with urllib.request.urlopen(url, timeout=120) as resp:
                raw = resp.read()
            target.write_bytes(gzip.decompress(raw))
            print(f"{name}: wrote {target} ({target.stat().st_size} bytes)")
        except Exception as e:  # noqa: BLE001 - report and continue
            failures += 1
            print(f"{name}: FAILED ({e})", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
