"""Closed-form loss values and the finite-difference gradient harness.

Every backward rule in the package is hand-derived; this script reproduces
the textbook sanity values and then checks the whole model's gradients
against central differences.
"""

import math

import numpy as np

from vte import bce_loss, hpc_loss, info_nce, proto_loss, run_grad_check

# equal logits make every contrastive loss ln(N)
anchor, positive = np.ones(4), np.zeros(4)
print("info_nce, 1 equal negative:   ", info_nce(anchor, positive, np.zeros((1, 4)), 0.1),
      "= ln 2 =", math.log(2))
print("info_nce, 127 equal negatives:", info_nce(anchor, positive, np.zeros((127, 4)), 0.1),
      "= ln 128 =", math.log(128))

# a well-separated positive drives the loss toward zero
a = np.array([1.0, 0.0])
print("separated pair:", info_nce(a, a, -a[None, :], 0.1), "~ exp(-20)")

# shared prototype: negatives equal the positive, ln N at any temperature
v = np.random.default_rng(0).standard_normal((5, 3))
p = np.tile([1.0, 2.0, 2.0], (5, 1))
print("proto loss, shared prototype:", proto_loss(v, p, 0.37)[0], "= ln 5 =", math.log(5))

# uncertainty scales shrink logits toward uniform
z = np.random.default_rng(1).standard_normal((4, 3))
tiny = np.full(4, 1e-8)
print("hpc at vanishing certainty:  ", hpc_loss(z, tiny, z, tiny)[0], "= ln 4 =", math.log(4))

print("bce at logit 0:", bce_loss(0.0, 1), "= ln 2")
print("bce, confident and right:", bce_loss(40.0, 1))
print("bce, confident and wrong:", bce_loss(40.0, 0))

# the full-model check: analytic gradients vs central differences per tensor
print("\nfull-model gradient check (seed 0):")
for name, err in run_grad_check(seed=0).items():
    print(f"  {name:18s} max rel err {err:.2e}")
