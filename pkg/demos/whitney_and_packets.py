"""Whitney pair family on the annulus and a wave-packet decomposition of strip data.

Run: python demos/whitney_and_packets.py
"""

import numpy as np

from maxwave.generators import StripPair, random_annulus, strip_data
from maxwave.grid import GridSpec
from maxwave.wavepacket import decompose, overlap_norm_check, reconstruction_error, wavepacket_grid
from maxwave.whitney import WhitneyPartition, partner_counts, product_identity


def whitney():
    for j in range(0, -5, -1):
        print(f"scale {j:2d}: at most {max(partner_counts(j).values())} partners per cube")
    grid = GridSpec(64.0, 32)
    rep = product_identity(random_annulus(0, grid), 0.7, WhitneyPartition(grid))
    print(f"product identity error {rep.relative_error:.1e}, "
          f"close-pair remainder {rep.remainder_pair_mass_fraction:.3f} of the pair mass")


def packets(R=64):
    g = wavepacket_grid(R)
    f, _ = strip_data(StripPair(), g, seed=0)
    dec = decompose(f, R, "S1")
    err = reconstruction_error(f, dec, [R / 2, 3 * R / 4, R])
    print(f"R = {R}: {len(dec.tubes)} tubes, {len(dec.significant())} significant")
    print(f"reconstruction error {max(err.values()):.1e}")
    print(f"coefficient constant {dec.coefficient_constant(f.norm()):.3f}")
    print(f"overlap ratio at t = R: {overlap_norm_check(dec, R):.3f}")
    top = dec.tubes[int(np.argmax(dec.coefficients))]
    print(f"largest packet starts at {top.x} with velocity {top.v}")


if __name__ == "__main__":
    whitney()
    packets()
