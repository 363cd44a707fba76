"""End to end: train on synthetic data, evaluate, and grow the taxonomy.

Uses a faster learning rate than the benchmark defaults so the run takes a
few seconds. The confuser comparison at the end is the point of the whole
method: text-only scoring falls for lexically similar wrong parents, the
fused model does not.
"""

import numpy as np

from vte import (
    SynthConfig,
    Taxonomy,
    evaluate,
    expand,
    generate,
    score_pair,
    train,
)
from vte.expansion import Candidate
from vte.synth import default_train_config, strip_images

config = SynthConfig(seed=1)
data = generate(config)
tconfig = default_train_config(config, lr=2e-3, epochs=100, batch_size=8)

model, log = train(tconfig, data.taxonomy, data.table, data.positives)
print(f"loss: {log[0]['total']:.3f} (epoch 0) -> {log[-1]['total']:.3f} (epoch {len(log)-1})")

records = [score_pair(model, c.hyper, c.hypo, data.table, c.image_key, c.label)
           for c in data.eval_candidates]
print("eval metrics:", evaluate(records).as_percentages())

trap_rows = data.trap_subset()
print("confuser subset:", evaluate([records[i] for i in trap_rows]).as_percentages())

# the text-only ablation trains on the same pairs with every image withheld
table_t, pos_t, cands_t = strip_images(data)
model_t, _ = train(tconfig, data.taxonomy, table_t, pos_t)
records_t = [score_pair(model_t, c.hyper, c.hypo, table_t, c.image_key, c.label)
             for c in cands_t]
print("text-only confuser subset:",
      evaluate([records_t[i] for i in trap_rows]).as_percentages())

# top-down bootstrapping expansion: start from the bare class level and let
# accepted hyponyms immediately serve as parents for deeper candidates
base = Taxonomy()
for cls in sorted(data.taxonomy.children("root")):
    base.add_edge("root", cls)
candidates = [Candidate(p.hyper, p.hypo, p.image_key) for p in data.positives]
result = expand(model, base, candidates, data.table)
gold_edges = {(p.hyper, p.hypo) for p in data.positives}
accepted = set(result.accepted)
print(f"\nexpansion accepted {len(accepted)} of {len(candidates)} candidates; "
      f"{len(accepted & gold_edges)} are gold edges")
print("expanded taxonomy depth:", len(result.taxonomy.level_order_levels()))
