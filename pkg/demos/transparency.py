"""Run the subsonic and supersonic transparency scenarios and print their metrics.

    python demos/transparency.py [nodes]

With the default 1024 nodes this takes a few seconds.  The bead should move
inertially with a normal force close to zero in both cases.
"""

import sys

from masslet import diagnostics as dg
from masslet import scenarios as sc
from masslet.analytic import debroglie_quantities
from masslet.solver import run


def main(n: int = 1024) -> None:
    for build in (sc.bradyon_fig2, sc.tachyon_fig3):
        s = build(n, output_stride=max(1, n // 64))
        out = run(s.config, s.init, s.reference)
        dq = debroglie_quantities(s.reference)
        res = dg.transparency_residual(out)
        dE, dP = dg.relative_drift(out)
        print(f"{s.name}: n={n}, L={s.config.grid.L:g}, steps={s.config.n_steps}")
        print(f"  lambda_phase={dq.lambda_phase:.6g}  lambda_group={dq.lambda_group:.6g}")
        print(f"  max|N|/(m wp^2 A)   {res.max_abs_N_normalized:.3e}")
        print(f"  trajectory error    {dg.trajectory_error(out) / dq.lambda_group:.3e} lambda_group")
        print(f"  phase-lock error    {dg.phase_lock_error(out):.3e} rad")
        print(f"  energy / momentum   {dE:.3e} / {dP:.3e}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 1024)
