"""Simulated packages per second for clean sessions, with and without transcripts."""
import argparse
import time

from qdcsim.protocol import Session, SessionConfig, random_payloads
from qdcsim.rng import rng_stream


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--packages", type=int, default=10**4)
    ap.add_argument("--length", type=int, default=6, choices=(4, 6))
    args = ap.parse_args()
    cfg = SessionConfig(package_length=args.length)
    payloads = random_payloads(cfg.scheme, args.packages, rng_stream(0, "throughput"))
    for record in (False, True):
        start = time.perf_counter()
        Session(cfg, 0, record=record).run(payloads)
        dt = time.perf_counter() - start
        print(f"record={record!s:<5}  {args.packages / dt:,.0f} packages/s")


if __name__ == "__main__":
    main()
