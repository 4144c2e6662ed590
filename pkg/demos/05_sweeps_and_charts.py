"""Run miniature sweeps through the harness and render the CSVs as charts.

This is the same path the CLI drives (`ris-beamsel sweep-elements` etc.),
shrunk to finish in about two minutes. Chart rendering shells out to the
`render` tool from the companion ris-beamsel-plots package if installed.

Run:  python3 demos/05_sweeps_and_charts.py   (writes demos/output/*)
"""

import dataclasses
import shutil
import subprocess
from pathlib import Path

from ris_beamsel.harness import default_config, run_rate_vs_distance, run_rate_vs_elements

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

cfg = default_config(11)
cfg = dataclasses.replace(
    cfg,
    n_train=6_000,
    element_counts=(45, 65),
    distances_m=(10.0, 30.0, 50.0),
    sweep_realizations=150,
    training=dataclasses.replace(cfg.training, max_epochs=5, batch_size=500),
)

print("rate vs element count (trains one small model per point) ...")
for row in run_rate_vs_elements(cfg, out_dir):
    n, mode, es, dnn, rnd = row
    print(f"  N={n:<3} {mode:<9}  ES {es:5.2f}  DNN {dnn:5.2f}  random {rnd:5.2f}  bps/Hz")

print("\nrate vs receiver distance (model fixed at the training distance) ...")
for row in run_rate_vs_distance(cfg, out_dir):
    d, mode, es, dnn, rnd, ratio = row
    print(f"  d_r={d:<4g} {mode:<9}  ES {es:5.2f}  DNN {dnn:5.2f} ({100 * ratio:.1f}%)  random {rnd:5.2f}")

render = shutil.which("render")
if render:
    for kind, csv_name, output in (
        ("rate_vs_elements", "sweep_elements.csv", "elements.png"),
        ("rate_vs_distance", "sweep_distance.csv", "distance.png"),
    ):
        subprocess.run(
            [render, "--kind", kind, "--in", str(out_dir / csv_name), "--out", str(out_dir / output)],
            check=True,
        )
        print(f"rendered {out_dir / output}")
else:
    print("\n(render tool not on PATH; install the plots package to draw the charts)")
