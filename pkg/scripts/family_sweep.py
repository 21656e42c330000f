"""Bound sweeps for every graph family, written through the CLI into runs/sweeps/<family>/.

    python3 scripts/family_sweep.py
"""

import json
import sys
from pathlib import Path

from neighborhood_attack.cli import run

SWEEPS = {
    "circle": {"family": {"kind": "circle"}, "sizes": [10 ** k for k in range(2, 9)]},
    "circulant": {"family": {"kind": "circulant", "offsets": [1, 2, 3]},
                  "sizes": [10 ** k for k in range(2, 7)]},
    "hypercube": {"family": {"kind": "hypercube"}, "sizes": list(range(3, 31))},
    "complete": {"family": {"kind": "complete"}, "sizes": [2 ** k for k in range(2, 12)]},
    "complete_bipartite": {"family": {"kind": "complete_bipartite"},
                           "sizes": [2 ** k for k in range(1, 11)]},
    # small instances: exact variance plus a short simulation per size
    "circle_exact": {"family": {"kind": "circle"}, "sizes": list(range(4, 15)),
                     "exact": True, "simulate": True, "chain": {"samples": 20_000}},
}


def main():
    root = Path("runs/sweeps")
    status = 0
    for name, cfg in SWEEPS.items():
        out = root / name
        out.mkdir(parents=True, exist_ok=True)
        path = out / "config.json"
        path.write_text(json.dumps(cfg, indent=2))
        code = run(["sweep", "--config", str(path), "--out", str(out)])
        print(f"{name}: exit {code} -> {out / 'sweep.csv'}")
        status = status or code
    sys.exit(status)


if __name__ == "__main__":
    main()
