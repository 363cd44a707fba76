"""Watch the EMA codebook organize itself around planted image clusters."""

import numpy as np

from vte import AssignmentBatch, assign, ema_update, init_prototypes
from vte.prototypes import assign_batch

rng = np.random.default_rng(0)

# three well-separated clusters of raw features
centroids = np.array([[4.0, 0.0], [-3.0, 3.0], [0.0, -5.0]])
features = np.vstack([c + 0.3 * rng.standard_normal((40, 2)) for c in centroids])

table = init_prototypes(k=8, e=2, rng=rng, ema_alpha=0.99)
print("initial rows (all near the origin):")
print(np.round(table.rows, 3))

for step in range(400):
    batch_rows = rng.choice(len(features), size=16, replace=False)
    feats = features[batch_rows]
    ema_update(table, AssignmentBatch(features=feats,
                                      indices=assign_batch(table, feats)))

print("\nafter 400 EMA steps, the active rows sit on the cluster means:")
indices = assign_batch(table, features)
for idx in sorted(set(indices.tolist())):
    members = features[indices == idx]
    print(f"prototype {idx}: {len(members):3d} members, row {np.round(table.rows[idx], 2)}, "
          f"cluster mean {np.round(members.mean(axis=0), 2)}")

# rows that never win an assignment keep their initialization (never decayed)
dead = sorted(set(range(table.k)) - set(indices.tolist()))
print("dead prototypes (untouched):", dead)

# nearest-prototype assignment is exact and tie-stable
idx, row = assign(table, np.array([3.9, 0.1]))
print("query (3.9, 0.1) ->", idx, np.round(row, 2))
