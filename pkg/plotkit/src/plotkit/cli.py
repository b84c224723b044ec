"""Figure rendering command.

    render --figure trajectories --in out/od-clf-cbf-qp.csv out/pd-sat.csv --out fig2.svg
    render --figure pareto --in out/pareto.csv out/tunings.csv out/pareto_meta.json --out fig1.svg
    render --figure decay --in out/od-clf-cbf-qp.csv out/od-clf-qp.csv --out fig3.svg
    render --figure montecarlo --in out/mc_seed*.csv --out fig4.svg
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURES, HW_MAX_DEFAULT, U_MAX_DEFAULT, FigureSpec, render
from .schemas import SchemaError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="render", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--figure", required=True, choices=sorted(FIGURES))
    p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="PATH")
    p.add_argument("--out", required=True)
    p.add_argument("--component", type=int, default=3, choices=(1, 2, 3),
                   help="vector component to plot (default: 3)")
    p.add_argument("--u-max", type=float, default=U_MAX_DEFAULT,
                   help="torque constraint line level")
    p.add_argument("--hw-max", type=float, default=HW_MAX_DEFAULT,
                   help="momentum constraint line level")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(figure=args.figure, inputs=args.inputs, output=args.out,
                      component=args.component, u_max=args.u_max, hw_max=args.hw_max)
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
