"""Cut [0, N^2] into time blocks and check that each block's piece carries the wave near the origin.

Run: python demos/time_blocks.py [--N 8]
"""

import argparse

from maxwave.generators import random_annulus
from maxwave.localization import build_time_blocks, domination_check, time_block_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    N = args.N
    f = random_annulus(args.seed, time_block_grid(N), extent=N / 2, ring=True)
    dec = build_time_blocks(f, N)
    print(f"N = {N}: {len(dec.blocks)} blocks, tiles [0, N^2]: {dec.tiles()}")
    print(f"sum ||f_j||^2 / ||f||^2 = {dec.orthogonality_constant:.3f}")
    print(f"worst truncation loss   = {dec.max_truncation_loss:.2e}")
    probe = {1, N // 2, N}
    print(f"domination defect       = {domination_check(dec, blocks=probe).defect:.2e}")
    narrow = build_time_blocks(f, N, plateau=2 * N)
    print(f"  with half the plateau = {domination_check(narrow, blocks=probe).defect:.2e}")


if __name__ == "__main__":
    main()
