"""Generate the synthetic multimodal benchmark and look inside.

Each class plants one text centroid and one image centroid. A fifth of the
hyponyms are confusers: their text copies one class while their image (and
true parent) belongs to another, so text-only scoring mislabels exactly them.
"""

import tempfile
from pathlib import Path

import numpy as np

from vte import SynthConfig, generate, write_dataset

config = SynthConfig(seed=7)
data = generate(config)

print("taxonomy nodes:", len(data.taxonomy.nodes), "edges:", len(data.taxonomy.edges))
print("training positives:", len(data.positives))
print("eval candidates:", len(data.eval_candidates),
      "positives:", sum(1 for c in data.eval_candidates if c.label == 1))
print("confusers:", len(data.confusers))

# a confuser looks like its text class but lives under its image class
name = sorted(data.confusers)[0]
gold = {p.hypo: p.hyper for p in data.positives}[name]
print(f"\nexample confuser {name!r}: gold parent {gold!r}")
text_vec = data.table.text[name]
for cls in range(config.num_hypernyms):
    centroid = data.text_centroids[cls]
    cos = text_vec @ centroid / (np.linalg.norm(text_vec) * np.linalg.norm(centroid))
    marker = " <- text matches here" if cos > 0.9 else ""
    print(f"  cos(text, class{cls:02d} centroid) = {cos:+.3f}{marker}")

# nearest image centroid identifies the true class
img = data.table.images[name]
dists = np.linalg.norm(data.image_centroids - img, axis=1)
print("nearest image centroid: class%02d" % int(np.argmin(dists)))

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "dataset"
    write_dataset(data, out)
    print("\nfiles written:", sorted(p.name for p in out.iterdir()))
    print("eval.tsv head:")
    for line in (out / "eval.tsv").read_text().splitlines()[:3]:
        print(" ", line)
