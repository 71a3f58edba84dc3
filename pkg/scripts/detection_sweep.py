"""Abort probability within three monitoring windows against a fixed-axis eavesdropper."""
import argparse

from qdcsim.harness import ExperimentSpec, run_experiment


def caught(mismatch, seeds, window, period):
    spec = ExperimentSpec.from_dict({
        "name": "sweep", "scenario": "attack_session", "seeds": list(range(seeds)),
        "session": {"monitoring_window": window, "basis_change_period": period},
        "strategy": {"kind": "fixed_axis", "mismatch": mismatch},
        "message": {"packages": 3 * window},
    })
    rows = run_experiment(spec).rows
    hits = sum(1 for r in rows if r["aborted"] and r["packages_to_abort"] <= 3 * window)
    return hits / seeds, sum(r["eve_bit_accuracy"] for r in rows) / seeds


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=300)
    ap.add_argument("--window", type=int, default=50)
    ap.add_argument("--mismatch", type=float, nargs="+", default=[0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0])
    args = ap.parse_args()
    print("mismatch  caught(walk)  caught(static)  eve_accuracy(static)")
    for arc in args.mismatch:
        walking, _ = caught(arc, args.seeds, args.window, 16)
        static, acc = caught(arc, args.seeds, args.window, 0)
        print(f"{arc:<9.3f} {walking:<13.3f} {static:<15.3f} {acc:.3f}")


if __name__ == "__main__":
    main()
