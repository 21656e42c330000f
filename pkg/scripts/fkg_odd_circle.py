"""Search for log-supermodularity violations of the stationary law on odd circles.

Findings are persisted to runs/fkg/circle<N>/exact.json with a manifest.

    python3 scripts/fkg_odd_circle.py --sizes 5 7 9 11
"""

import argparse
import json
from pathlib import Path

from neighborhood_attack.cli import run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[5, 7, 9, 11])
    ap.add_argument("--limit", type=int, default=25)
    args = ap.parse_args()

    for n in args.sizes:
        out = Path(f"runs/fkg/circle{n}")
        out.mkdir(parents=True, exist_ok=True)
        cfg = out / "config.json"
        cfg.write_text(json.dumps({"family": {"kind": "circle", "n": n},
                                   "fkg": True, "fkg_limit": args.limit}))
        if run(["exact", "--config", str(cfg), "--out", str(out)]) != 0:
            print(f"circle {n}: failed")
            continue
        fkg = json.loads((out / "exact.json").read_text())["fkg"]
        wit = fkg.get("odd_circle_witness")
        print(f"circle {n}: {fkg['n_violations']} violating pairs of {fkg['pairs_checked']}"
              + (f"; witness violates={wit['violates']}" if wit else ""))


if __name__ == "__main__":
    main()
