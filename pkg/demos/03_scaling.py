"""How the modeled query cost grows with n.

Run: python3 demos/03_scaling.py

Each fit is compared against the target exponent. The full fit includes the
polylog factors of the stage polynomials and can come out steeper than the target;
the core term alone tracks it.
"""

from renyi_qsvt.bench import scaling_study

ns = [16, 32, 64, 128, 256, 512, 1024]
for pipeline, alpha in [("large_alpha", 2.0), ("small_alpha", 0.75)]:
    res = scaling_study(pipeline, alpha, 0.25, ns, trials=1, seed=0)
    print(f"{pipeline:<12s} alpha={alpha}: slope {res.slope:.3f} (core {res.core_slope:.3f}), "
          f"target {res.target:.3f}, within tolerance: {res.within}")
    for n, q in zip(res.n_list, res.mean_modeled):
        print(f"   n={n:5d}  modeled queries {q:.3e}")
