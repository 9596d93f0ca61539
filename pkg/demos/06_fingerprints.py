"""Comparing metric triples through random distance matrices.

Sampling k points by mass and recording their k x k distance matrix
gives a distribution that characterizes the space.  Two empirical
fingerprints are compared by the largest ECDF gap.
"""

import metrepair as mr

circle = mr.generate(mr.InstanceSpec("circle", 64))
dyadic = mr.generate(mr.InstanceSpec("dyadic_ultrametric", 64))

print(mr.sample_distance_matrix(circle.kernel, circle.space, 4, seed=3).round(3))

same = mr.fingerprint_compare(circle.kernel, circle.space, circle.kernel, circle.space,
                              k=4, trials=2000, seed_a=0, seed_b=1)
diff = mr.fingerprint_compare(circle.kernel, circle.space, dyadic.kernel, dyadic.space,
                              k=4, trials=2000, seed_a=0, seed_b=1)
print(f"circle vs itself {same:.4f}; circle vs dyadic ultrametric {diff:.4f}")
