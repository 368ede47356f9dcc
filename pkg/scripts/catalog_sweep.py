"""Run the invariant suite over every family and its conjugate; print a table and write a JSON summary."""

import argparse
import json
import time
from pathlib import Path

from isozmc import weierstrass as ws
from isozmc.verify import default_grid, run_invariant_suite

FAMILIES = [ws.plane(), ws.trivial_enneper(), ws.catenoid(), ws.enneper_type(2), ws.bonnet_type(1, 1),
            ws.deform_tanh(1), ws.deform_polar(), ws.helicoid(), ws.thomsen_type(1, 1)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=41, help="grid points per direction")
    ap.add_argument("--out", default="catalog_sweep.json")
    args = ap.parse_args()
    rows = []
    for F in FAMILIES:
        variants = [F] if F.conjugated else [F, ws.conjugate(F)]
        for G in variants:
            g = default_grid(G)
            g = type(g)(g.u_min, g.u_max, g.v_min, g.v_max, args.n, args.n)
            t = time.perf_counter()
            R = run_invariant_suite(G, grid=g)
            dt = time.perf_counter() - t
            worst = max(R.records, key=lambda r: r.max_residual / r.tolerance)
            print(f"{G.label():40s} {'PASS' if R.passed else 'FAIL'}  {len(R.records):2d} checks  "
                  f"tightest {worst.name} {worst.max_residual:.1e}/{worst.tolerance:.0e}  {dt:.2f}s")
            rows.append({"family": G.label(), "pass": R.passed, "failures": R.failures(),
                         "checks": {r.name: r.max_residual for r in R.records}})
    Path(args.out).write_text(json.dumps(rows, indent=2) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
