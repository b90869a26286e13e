"""Denoising while links drop: plain taps versus failure-aware taps.

Each communication round runs on a fresh random subgraph in which every edge
survives independently with probability p. A smooth field corrupted by white
noise is filtered toward the clean field, once with plain least-squares taps
and once with taps re-optimized against the link-failure penalty. Both
designs see the same inputs, failure draws, and dither streams per trial, so
the gap column is a paired comparison.
"""

import argparse

import numpy as np

from gfquant.analysis import nse
from gfquant.design import (
    DesignConstraints,
    fir_quantization_aware_design,
    fir_robust_res_design,
)
from gfquant.experiments import fir_round_ranges
from gfquant.filters import draw_res_sequence, fir_apply_tv_quantized
from gfquant.graphs import build_shift, eigendecompose, igft, random_geometric, res_model
from gfquant.quantization import DitheredQuantizer, StepsizeSchedule


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=50)
    ap.add_argument("--order", type=int, default=10)
    ap.add_argument("--chi", type=int, default=15, help="per-message bit cap")
    ap.add_argument("--gamma", type=float, default=1.0, help="penalty weight")
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    g = random_geometric(args.nodes, 150.0, 50.0, seed=args.seed)
    S = build_shift(g, "scaled-laplacian")
    dec = eigendecompose(S)
    w = 0.25
    target = lambda lam: 1.0 / (1.0 + w * lam)  # noqa: E731
    rng0 = np.random.default_rng([args.seed, 101])
    profile = np.exp(-4.0 * dec.eigvals / dec.lambda_max)
    z = igft(dec, profile * rng0.normal(size=g.n))
    z = z * np.sqrt(g.n) / np.linalg.norm(z)
    x_scale = float(np.sqrt(g.n * 1.2))
    sched = StepsizeSchedule.geometric(2.0 * x_scale / 2**4, 0.5, max_bits=args.chi)

    dc_ls = DesignConstraints(lambda_grid=dec.eigvals, schedule=sched)
    c_ls = fir_quantization_aware_design(target, args.order, dc_ls).coefficients

    print(f"noisy input NSE {0.2 * g.n / float(z @ z):.3f} before filtering")
    print(f"{'p':>5} {'LS taps NSE':>14} {'robust taps NSE':>16} {'gap':>7}")
    for p in (0.6, 0.8, 0.9, 0.95, 1.0):
        m = res_model(g, "scaled-laplacian", p)
        dc_rob = DesignConstraints(
            lambda_grid=dec.eigvals, schedule=sched, gamma=args.gamma
        )
        c_rob = fir_robust_res_design(c_ls, S, m, dc_rob).coefficients
        rng = np.random.default_rng([args.seed, int(p * 100)])
        errs = {"ls": [], "robust": []}
        for _ in range(args.trials):
            x = z + rng.normal(0.0, np.sqrt(0.2), size=g.n)
            shifts = draw_res_sequence(m, args.order, rng)
            qseed = int(rng.integers(2**32))
            ranges = fir_round_ranges(S, x, args.order)
            for name, c in (("ls", c_ls), ("robust", c_rob)):
                q = DitheredQuantizer(sched, range_policy=ranges, seed=qseed)
                run = fir_apply_tv_quantized(shifts, c, x, q)
                errs[name].append(nse(run.output, z))
        ls_mean = float(np.mean(errs["ls"]))
        rob_mean = float(np.mean(errs["robust"]))
        print(f"{p:>5.2f} {ls_mean:>14.3e} {rob_mean:>16.3e} "
              f"{100.0 * (ls_mean - rob_mean) / ls_mean:>6.1f}%")


if __name__ == "__main__":
    main()
