"""Build a small taxonomy, query its structure, and round-trip it as TSV."""

import tempfile
from pathlib import Path

from vte import Taxonomy, load_edges, save_edges

tax = Taxonomy()
for hyper, hypo in [
    ("Food", "Fruit"), ("Food", "Meat"), ("Drink", "Juice"),
    ("Fruit", "Apple"), ("Fruit", "Nashi"), ("Juice", "Apple Juice"),
]:
    tax.add_edge(hyper, hypo)

print("nodes:", sorted(tax.nodes))
print("roots:", sorted(tax.roots))
print("children of Food:", sorted(tax.children("Food")))
print("siblings of Fruit:", sorted(tax.siblings("Fruit")))
print("ancestors of Apple:", sorted(tax.ancestors("Apple")))
print("descendants of Food:", sorted(tax.descendants("Food")))

# level order: parents always appear in an earlier level than their children
for depth, level in enumerate(tax.level_order_levels()):
    print(f"level {depth}: {level}")

# a term may gain a second parent later (it's a DAG, not a strict tree)
tax.add_edge("Drink", "Apple Juice")
print("parents of Apple Juice:", sorted(tax.parents("Apple Juice")))

# cycles are rejected outright
try:
    tax.add_edge("Apple", "Food")
except Exception as err:
    print("rejected:", err)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "edges.tsv"
    save_edges(tax, path)
    print("TSV round-trip equal:", load_edges(path).edges == tax.edges)
    print(path.read_text().splitlines()[:3])
