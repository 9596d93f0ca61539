"""Repairing an almost-metric by window averaging.

The circle is cut into N equal cells.  Averaging the kernel over a
forward w x w window of cells turns any semimetric into a semimetric,
and it dilutes a few corrupted rows by a factor of about r/w.
"""

import math

import metrepair as mr

M = 5.0
print(f"{'N':>5} {'w':>3} {'defect before':>14} {'defect after':>13} {'bound':>7}")
for n in (64, 128, 256):
    w = 2 ** math.floor(math.log2(math.sqrt(n)) + 0.5)
    rows = (n // 4, n // 4 + n // 8)
    inst = mr.generate(mr.InstanceSpec("circle", n, corruption=mr.Corruption("rows", rows, value=M)))
    out = mr.limsup_correct(inst.kernel, inst.space, mr.CorrectionParams((w, 2 * w)))
    before = mr.triangle_defect_scan(inst.kernel, inst.space).max_defect
    after = mr.triangle_defect_scan(out, inst.space).max_defect
    print(f"{n:5d} {w:3d} {before:14.4f} {after:13.4f} {3 * (M + 0.5) * len(rows) / w:7.3f}")

# How far the repaired kernel sits from the averaged clean kernel.
inst = mr.generate(mr.InstanceSpec("circle", 64, corruption=mr.Corruption("rows", (5,), value=100)))
out = mr.limsup_correct(inst.kernel, inst.space, mr.CorrectionParams((8,), tail_mode="finest"))
clean = mr.window_average(inst.clean, inst.space, 8)
err = abs(out.values - clean.values)
hit = [(5 - a) % 64 < 8 for a in range(64)]
one = max(err[x, y] for x in range(64) for y in range(64) if x != y and hit[x] != hit[y])
both = max(err[x, y] for x in range(64) for y in range(64) if x != y and hit[x] and hit[y])
none = max(err[x, y] for x in range(64) for y in range(64) if x != y and not (hit[x] or hit[y]))
print(f"\nrow 5 set to 100, w=8: one window holds the row -> {one:.3f} (bound 12.56); "
      f"both windows -> {both:.3f}; neither -> {none}")

# Infinite distances: collapse everything outside a good set S1 onto a base point.
k = mr.Kernel([[0, 1, 2, float("inf")], [1, 0, 1, 7], [2, 1, 0, 9],
               [float("inf"), 7, 9, 0]])
patched = mr.patch_from_basepoint(k, mr.PatchSpec((0, 1, 2), 0))
print("\npatched kernel:\n", patched.values)

# Reweighting so that distances to the base point become summable.
renorm = mr.renormalize_measure(mr.PointSpace.uniform(4), k, 0)
print("renormalized masses", renorm.space.masses.round(4), "infinite:", renorm.infinite_points)
