"""How often a guessing eavesdropper stays on the true walk for j basis changes."""
import argparse

from qdcsim.adversary import WalkGuesser, eve_guess_walk
from qdcsim.protocol import TurnBitSource


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20000)
    ap.add_argument("--changes", type=int, default=10)
    args = ap.parse_args()
    survived = [0] * (args.changes + 1)
    for seed in range(args.seeds):
        truth = TurnBitSource(seed)
        eve = WalkGuesser(seed)
        for j in range(1, args.changes + 1):
            eve_guess_walk(eve, truth.next_bit())
            if not eve.record.guess_matches[-1]:
                break
            survived[j] += 1
    print("changes  fraction   2^-j")
    for j in range(1, args.changes + 1):
        print(f"{j:<8} {survived[j] / args.seeds:.5f}    {2.0 ** -j:.5f}")


if __name__ == "__main__":
    main()
