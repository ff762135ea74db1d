"""Classical spectral flow for finite Hermitian paths.

Outside the essential spectrum, the flow of eigenvalues of H0 + r V
through a level lambda is the difference of counting functions at the
endpoints.  This is the integer the boundary-value machinery generalizes;
here it is computed directly and checked against dense eigenvalue
tracking.
"""

import numpy as np

from laplab import perturb

rng = np.random.default_rng(5)

print("=== a single level pushed through lambda = 0.5 ===")
flow = perturb.spectral_flow_finite(np.array([[0.0]]), np.array([[1.0]]), 0.5, 0.0, 1.0)
print(f"H0 = [0], V = [1], r: 0 -> 1: flow = {flow:+d}")

print()
print("=== two levels moving together: counts can balance ===")
h0 = np.diag([-1.0, 1.0])
flow = perturb.spectral_flow_finite(h0, np.eye(2), 0.5, 0.0, 1.0)
print(f"H0 = diag(-1, 1), V = I, r: 0 -> 1: flow = {flow:+d} "
      "(one eigenvalue below 0.5 at both ends)")
flow = perturb.spectral_flow_finite(h0, np.eye(2), 0.5, 0.0, 2.0)
print(f"same path continued to r = 2:       flow = {flow:+d}")

print()
print("=== random 6x6 path, cross-checked by dense tracking ===")
n = 6
a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
h0 = 0.5 * (a + a.conj().T)
b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
v = 0.5 * (b + b.conj().T)
lam, r_from, r_to = 0.3, -1.5, 1.5

flow = perturb.spectral_flow_finite(h0, v, lam, r_from, r_to)
rs = np.linspace(r_from, r_to, 801)
branches = np.array([np.linalg.eigvalsh(h0 + r * v) for r in rs])
signs = np.sign(branches - lam)
tracked = sum(int(round(np.diff(signs[:, i]).sum() / 2.0)) for i in range(n))
print(f"counting-function flow: {flow:+d}")
print(f"tracked crossings:      {tracked:+d}")

crossings = [
    (rs[k], i)
    for i in range(n)
    for k in range(len(rs) - 1)
    if signs[k, i] != signs[k + 1, i]
]
print("individual crossings (coupling, branch):")
for r, i in crossings:
    print(f"  r ~ {r:+.3f}, branch {i}")
