# Run the full pipeline on the shipped synthetic mini-corpus and walk the
# output files it produces.

import csv
import json
import tempfile
from pathlib import Path

from aidisrupt import cli

REPO = Path(__file__).resolve().parent.parent
CONFIG = REPO / "data" / "minicorpus" / "config.ini"

out = Path(tempfile.mkdtemp(prefix="aidisrupt-demo-"))
code = cli.main(["--config", str(CONFIG), "--out", str(out), "run-all"])
assert code == 0
print(f"\npipeline wrote {len(list(out.iterdir()))} files to {out}\n")

classify = json.loads((out / "classify.json").read_text())
print("patent classes:", classify["patent_class_counts"])
print("task labels:   ", classify["task_label_counts"])
print(f"quartile cutoffs: q25={classify['q25']:.3f} q75={classify['q75']:.3f}")
print(f"impact threshold: {classify['impact_threshold']:.3f}")

meta = json.loads((out / "network_meta.json").read_text())
print(
    f"\nnot-impacted task network: cutoff={meta['percentile_cutoff']:.3f} "
    f"modularity={meta['modularity']:.3f} communities={meta['n_communities']}"
)

print("\nstrongest z-scores:")
with (out / "zscores.csv").open() as fh:
    rows = list(csv.DictReader(fh))
rows.sort(key=lambda r: -abs(float(r["z"])))
for r in rows[:6]:
    print(
        f"  {r['group']:24s} {r['characteristic']}={r['value']}: "
        f"observed={float(r['observed']):.3f} z={float(r['z']):+.2f}"
    )

corr = json.loads((out / "correlations.json").read_text())
for cls in ("disruptive", "consolidating"):
    c = corr[cls]
    print(
        f"\nvacancy correlation ({cls}): r={c['r']:.3f} p={c['p_value']:.3f} "
        f"n={c['n']} excluded={c['excluded']}"
    )

agreement = json.loads((out / "agreement.json").read_text())
print("\nmodel-vs-crowd agreement rates:", agreement["agreement"])
