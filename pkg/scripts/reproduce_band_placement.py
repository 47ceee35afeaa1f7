"""Band placement of the listed element values under both inductor readings.

Prints closed-form and numeric Bloch edges, the shunt-arm transmission zero,
and the swept figures of merit for 1 to 4 cascaded cells.

    python3 scripts/reproduce_band_placement.py [--points 4001]
"""
import argparse

from mbpf.circuit import LISTED_CELL, sweep
from mbpf.dispersion import closed_form_cutoffs, consistency_report
from mbpf.errors import BandNotBracketedError
from mbpf.metrics import compute_metrics, format_metrics_table
from mbpf.twoport import FrequencyGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=4001)
    args = ap.parse_args()

    for label, cell in (("as labeled", LISTED_CELL), ("swapped", LISTED_CELL.with_(swap_inductors=True))):
        print(f"== {label}: tank {cell.tank_inductance_henry * 1e9:g} nH, series {cell.series_inductance_henry * 1e9:g} nH")
        for series in (True, False):
            p = cell.with_(include_series_inductor=series)
            print(f"-- series inductor {'kept' if series else 'dropped'}")
            print(consistency_report(p).to_text())

        cf = closed_form_cutoffs(cell)
        grid = FrequencyGrid(0.4 * cf.f_cl_hz, 1.6 * cf.f_cu_hz, args.points)
        rows = []
        for n in range(1, 5):
            try:
                rows.append((f"{n} cell(s)", compute_metrics(sweep(cell, grid, n))))
            except BandNotBracketedError as exc:
                print(f"{n} cell(s): {exc}")
        if rows:
            print(format_metrics_table(rows))
        print()


if __name__ == "__main__":
    main()
