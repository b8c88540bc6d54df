"""
Running the named experiments from Python
=========================================

Everything the command line does is available as functions.  A report is a
list of rows (case, quantity, computed, reference, rel_err, pass) and is a
pure function of its configuration, seed included.
"""

import tempfile
from pathlib import Path

from sobolev_geodesics.experiments import list_experiments, run_named

for name, desc in list_experiments():
    print(f"{name:22s} {desc}")

# %%
out = Path(tempfile.mkdtemp()) / "blocks"
rep = run_named("blocks", out=str(out), h=[3.0], grid=128, pairs=5, seed=7)
print(f"\n{len(rep.rows)} rows, passed={rep.passed}; files: {sorted(p.name for p in out.iterdir())}")
for r in rep.rows[:6]:
    print(f"  {r.case} | {r.quantity} | {r.computed:.5g} vs {r.reference}")

# The same thing from a shell:
#   sobolev-geodesics run blocks --grid 128 --seed 7 --out reports/blocks
