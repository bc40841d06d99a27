"""Particle-count refinement against a fine finite-volume reference.

Prints the L1 error at t_end for each particle count and the ratio between
successive errors, then emits convergence.csv under the output root.

Usage: python3 scripts/convergence_study.py [--scenario NAME] [--n-list 75,150,300,600]
"""

import argparse

from nlftl import builtin_scenario, run_convergence
from nlftl.scenarios import ScenarioConfig, emit_convergence


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="single-step")
    ap.add_argument("--n-list", default="75,150,300,600", help="comma-separated particle counts")
    ap.add_argument("--j-ref", type=int, default=None, help="reference cell count (default 4*max)")
    ap.add_argument("--t-end", type=float, default=1.0, dest="t_end")
    ap.add_argument("--out", default="out")
    args = ap.parse_args()

    data = builtin_scenario(args.scenario).to_dict()
    data.update(t_end=args.t_end, output_times=None, out_dir=args.out)
    config = ScenarioConfig.from_dict(data)
    n_list = tuple(int(v) for v in args.n_list.split(","))

    result = run_convergence(config, n_list, args.j_ref)
    print(f"scenario={args.scenario}  t_end={args.t_end:g}  reference J={result.j_ref}")
    for k, n in enumerate(result.n_list):
        ratio = f"  e_N/e_2N={result.ratios[k]:.3f}" if k < len(result.ratios) else ""
        print(f"  N={n:5d}  l1={result.errors[k]:.6e}{ratio}")
    print(f"-> {emit_convergence(result)}")


if __name__ == "__main__":
    main()
