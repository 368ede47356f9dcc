"""Write OBJ frames for the three deformation paths and print the limit convergence tables."""

import argparse
import json
from pathlib import Path

from isozmc import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="frames")
    ap.add_argument("--n", type=int, default=33, help="grid points per direction")
    args = ap.parse_args()
    for kind in ("polar", "tanh", "bonnet_alpha"):
        d = Path(args.out) / kind
        rc = cli.main(["deform", "--kind", kind, "--nu", str(args.n), "--nv", str(args.n), "--out", str(d)])
        if rc:
            raise SystemExit(rc)
        conv = json.loads((d / "convergence.json").read_text())["convergence"]
        for end, table in conv.items():
            print(f"  {kind} -> {end}")
            for row in table["rows"]:
                print(f"    param {row['param']:.4f}  dev_h {row['dev_h']:.3e}  dev_eta {row['dev_eta']:.3e}")
            if table["ratios_h"]:
                print("    successive ratios (h):", " ".join(f"{q:.3f}" for q in table["ratios_h"]))


if __name__ == "__main__":
    main()
