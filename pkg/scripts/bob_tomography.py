"""Spread and 1-sigma coverage of Bob's basis estimate as K grows."""
import argparse

import numpy as np

from qdcsim.harness import REFERENCE_AXIS
from qdcsim.rng import rng_stream
from qdcsim.tomography import bob_determine_basis, standard_error


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=1000)
    ap.add_argument("--K", type=int, nargs="+", default=[101, 401, 1604])
    args = ap.parse_args()
    truth = np.asarray(REFERENCE_AXIS)
    print("K      bound    std_x    std_y    std_z    cover_x  cover_y  cover_z")
    for k in args.K:
        means = np.array([bob_determine_basis(truth, k, rng_stream(s, f"bob-{k}")).mean for s in range(args.seeds)])
        se = standard_error(k)
        std = means.std(axis=0, ddof=1)
        cover = (np.abs(means - truth) <= se).mean(axis=0)
        print(f"{k:<6} {se:.4f}   " + "   ".join(f"{v:.4f}" for v in std) + "   " + "   ".join(f"{v:.3f}" for v in cover))


if __name__ == "__main__":
    main()
