"""Run both solvers on every builtin scenario and emit their output trees.

Usage: python3 scripts/run_all_scenarios.py [--out OUT] [--n N] [--cells J] [--t-end T]
"""

import argparse

from nlftl import builtin_names, builtin_scenario, run_compare
from nlftl.scenarios import ScenarioConfig, emit_compare


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out", help="output root directory")
    ap.add_argument("--n", type=int, default=300, help="particle cell count")
    ap.add_argument("--cells", type=int, default=1200, help="finite-volume cell count")
    ap.add_argument("--t-end", type=float, default=1.0, dest="t_end", help="final time")
    args = ap.parse_args()

    for name in builtin_names():
        data = builtin_scenario(name).to_dict()
        data.update(n_cells=args.n, fv_cells=args.cells, t_end=args.t_end, output_times=None, out_dir=args.out)
        result = run_compare(ScenarioConfig.from_dict(data))
        d = emit_compare(result)
        t, l1, w1 = result.rows[-1]
        drift = result.godunov.fv.masses[-1] - result.godunov.fv.masses[0]
        print(f"{name:16s} t={t:g}  l1={l1:.4e}  w1={w1:.4e}  fv_mass_drift={drift:+.2e}  -> {d}")


if __name__ == "__main__":
    main()
