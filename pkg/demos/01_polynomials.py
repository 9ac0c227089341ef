"""Building and checking the polynomials that drive the singular value transforms.

Run: python3 demos/01_polynomials.py
"""

import numpy as np

from renyi_qsvt.poly import approx_bounded_power, approx_neg_power, approx_rectangle

# A rectangle: close to 1 inside |x| < t - delta', close to 0 beyond t + delta'.
rect = approx_rectangle(0.05, 1e-3, 0.5)
print(f"rectangle  degree={rect.degree:4d}  certified={rect.certified}")
xs = np.array([0.0, 0.3, 0.44, 0.56, 0.8, 1.0])
for x, y in zip(xs, rect(xs)):
    print(f"   P({x:.2f}) = {y: .6f}")

# The negative power (delta^c / 2) x^{-c}, odd so that it acts on singular values.
neg = approx_neg_power(0.5, 0.1, 1e-4, parity="odd")
x = np.linspace(0.1, 1.0, 5)
err = np.max(np.abs(neg(x) - 0.5 * (0.1 / x) ** 0.5))
print(f"negative power  degree={neg.degree}  max error on [delta, 1] = {err:.2e}")

# The bounded power tracks a scaled x^c on [nu, beta] and stays small below nu.
bp = approx_bounded_power(1.5, 1.0, 0.1, 1e-3)
print(f"bounded power   degree={bp.degree}  certified={bp.certified}")
for entry in bp.cert.entries:
    print(f"   {entry.description:<40s} passed={entry.passed}")
