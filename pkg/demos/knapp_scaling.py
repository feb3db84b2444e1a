"""Sweep Knapp caps through the maximal and L^2_{x,t} norms and fit the exponents.

Run: python demos/knapp_scaling.py [--scales 8,16,32]
"""

import argparse

from maxwave.explab import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scales", default="8,16,32")
    ap.add_argument("--dt", type=float, default=0.25)
    args = ap.parse_args()
    scales = tuple(int(s) for s in args.scales.split(","))
    for eid in ("maximal-knapp", "l2xt-knapp", "tinycap-sharp"):
        run = run_experiment(ExperimentConfig(eid, scales, dt=args.dt))
        print(f"{eid}: reference exponent {run.reference.exponent}")
        for r in run.records:
            print(f"  scale {r.scale:4d}  ratio {r.ratio:.4f}")
        print(f"  fitted exponent {run.alpha:.3f}  residual {run.residual:.4f}  "
              f"{'PASS' if run.passed else 'FAIL'}")


if __name__ == "__main__":
    main()
