"""The two-point hard instance behind the alpha < 1 lower bound.

Run: python3 demos/04_lower_bound.py
"""

import math

from renyi_qsvt.hardness import hardness_grid, lower_bound_instance

inst = lower_bound_instance(50, 0.5, 0.1)
print(f"n=50 alpha=0.5 eps=0.1: delta={inst.delta:.3e}  entropy gap={inst.entropy_gap:.3f}")
print(f"   Hellinger distance {inst.hellinger:.4f}, sqrt(delta) {math.sqrt(inst.delta):.4f}")
print(f"   queries needed ~ {inst.lb_queries:.1f} (order of growth), 1/d_H = {inst.lb_queries_hellinger:.1f}")

print("\nGrid (None where n is too small for the construction):")
for n, a, e, ins in hardness_grid():
    tag = "skip" if ins is None else f"d_H/sqrt(delta)={ins.hellinger / math.sqrt(ins.delta):.3f}"
    print(f"   n={n:3d} alpha={a} eps={e}: {tag}")
