"""Admissibility: entropy, ball masses and separable support.

A metric triple is admissible when, for every epsilon, finitely many
epsilon-balls cover all but epsilon of the mass.  Three equivalent
criteria are computed side by side, including on spaces with zero-mass
outliers far from everything.
"""

import numpy as np

import metrepair as mr

circle = mr.generate(mr.InstanceSpec("circle", 64))
for eps in (0.05, 0.1, 0.2):
    g = mr.epsilon_entropy_greedy(circle.kernel, circle.space, eps)
    e = mr.epsilon_entropy_exact(circle.kernel, circle.space, eps, size_limit=64)
    print(f"eps={eps}: greedy {g.count} balls, exact {e.count}, covered {e.covered_mass:.3f}")

# Zero-mass outliers: ball masses vanish there, and the support drops them.
inst = mr.generate(mr.InstanceSpec("embedding", 24, outliers=3, outlier_distance=4.0), seed=1)
profile = mr.ball_mass_profile(inst.kernel, inst.space, [0.1, 0.3])
print("\nnull points with an empty ball:", profile.null_points)
check = mr.lemma1_crosscheck(inst.kernel, inst.space, [0.3, 0.1])
print("cross-check passed:", check.passed, "| core masses", check.core_mass)

# A positive-mass point outside its own small balls breaks the equivalence.
v = np.ones((4, 4))
np.fill_diagonal(v, 0)
v[2, 2] = 0.9
bad = mr.lemma1_crosscheck(mr.Kernel(v), mr.PointSpace.uniform(4), [0.5])
print("\nnonzero diagonal:", bad.statements, "discrepancies:", bad.discrepancies)
