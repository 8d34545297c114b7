"""Outcome landscape when agents are behaviorally (near-)homogeneous.

Sweeps the low-diversity corner (all sigmas in {0, 0.1}) and scatters the
two outcome measures against each other: mean cross-group cultural
distance (CD) on x, mean shortest path length (SPL) on y.  Runs either
assimilate (low CD) or keep the two cultures distinct (high CD); the
scatter shows how path length co-varies with that split.

Run:  python demos/02_homogeneous_baseline.py
"""

import statistics
from pathlib import Path

from fragnet import SimConfig, SweepSpec, run_sweep, persist_results
from fragnet.svgplot import scatter_svg

OUT_DIR = Path(__file__).parent / "output"
OUT_DIR.mkdir(exist_ok=True)

spec = SweepSpec(
    sigma_values=(0.0, 0.1),
    runs_per_cell=10,
    base_config=SimConfig(),
    master_seed=42,
    parallelism=2,
)
print(f"running {spec.total_runs} low-diversity runs ...")
table = run_sweep(spec)

persist_results(table, OUT_DIR / "baseline_results.csv")
svg = scatter_svg(table.rows, color_by="sigma_d", trend="cubic",
                  title="homogeneous baseline: CD vs SPL")
(OUT_DIR / "baseline_scatter.svg").write_text(svg)

defined = [r for r in table.rows if r.spl is not None]
assimilated = [r for r in defined if r.cd <= 1.5]
diverse = [r for r in defined if r.cd > 1.5]
print(f"\n{len(table.rows)} runs, {len(defined)} with a connected final network")
print(f"assimilated (CD <= 1.5): {len(assimilated):3d} runs, "
      f"mean SPL {statistics.mean(r.spl for r in assimilated):.3f}")
print(f"culturally split (CD > 1.5): {len(diverse):3d} runs, "
      f"mean SPL {statistics.mean(r.spl for r in diverse):.3f}")
print(f"\nwrote {OUT_DIR}/baseline_results.csv and baseline_scatter.svg")
