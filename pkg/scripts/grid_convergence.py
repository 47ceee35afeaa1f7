"""How the extracted figures of merit move as the sweep grid is refined.

    python3 scripts/grid_convergence.py [--stages 3]
"""
import argparse

from mbpf.circuit import LISTED_CELL, sweep
from mbpf.metrics import compute_metrics
from mbpf.twoport import FrequencyGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--stages", type=int, default=3)
    args = ap.parse_args()
    cell = LISTED_CELL.with_(swap_inductors=True)
    ref = compute_metrics(sweep(cell, FrequencyGrid(0.3e9, 1.2e9, 64001), args.stages))
    print(f"{'points':>7} {'step kHz':>9} {'d f0 Hz':>10} {'d bw Hz':>10} {'d att_lo dB':>12} {'d att_hi dB':>12}")
    for pts in (251, 501, 1001, 2001, 4001, 8001, 16001):
        m = compute_metrics(sweep(cell, FrequencyGrid(0.3e9, 1.2e9, pts), args.stages))
        step = 0.9e9 / (pts - 1)
        print(f"{pts:>7} {step / 1e3:>9.1f} {m.f0_hz - ref.f0_hz:>10.1f} {m.bw3db_hz - ref.bw3db_hz:>10.1f} "
              f"{m.att_db_at_08fcl - ref.att_db_at_08fcl:>12.4f} {m.att_db_at_12fcu - ref.att_db_at_12fcu:>12.4f}")


if __name__ == "__main__":
    main()
