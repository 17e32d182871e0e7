"""Independent reference values frozen into the unit tests (mpmath / numpy)."""
import mpmath as mp
import numpy as np

mp.mp.dps = 30

# bump normalization: phi(t) = c (t-1)^2 (4-t)^2 on [1,4], int phi dt/t = 1
I = mp.quad(lambda t: (t - 1) ** 2 * (4 - t) ** 2 / t, [1, 4])
c = 1 / I
print("bump_c", mp.nstr(c, 17))

# lambda-tilde on the unit-density line, rho = 1: int_{1/4}^{1} 2r phi(1/r) dr/r = 2 int_1^4 phi(t)/t^2 dt
lt = 2 * mp.quad(lambda t: c * (t - 1) ** 2 * (4 - t) ** 2 / t**2, [1, 4])
print("lambda_tilde_line_rho1", mp.nstr(lt, 17))

# arc length of r(t) = 1 + A0 (t/pi)^3 sin(pi^2/t) over (t_min, pi), split at the zeros pi/k
A0, tmin = mp.mpf("0.01"), mp.mpf("0.001")
def r(t):
    return 1 + A0 * (t / mp.pi) ** 3 * mp.sin(mp.pi**2 / t)
def rd(t):
    return A0 * (3 * t**2 / mp.pi**3 * mp.sin(mp.pi**2 / t) - (t / mp.pi) ** 3 * mp.cos(mp.pi**2 / t) * mp.pi**2 / t**2)
mp.mp.dps = 20
cuts = [tmin] + sorted(mp.pi / k for k in range(1, 5000) if mp.pi / k > tmin)
L = mp.fsum(mp.quad(lambda t: mp.sqrt(r(t) ** 2 + rd(t) ** 2), [a, b]) for a, b in zip(cuts[:-1], cuts[1:]))
print("x2_arc_length_tmin_1e-3", mp.nstr(L, 15))

# Hilbert-type matrix a_kp = 1/|p-k|, zero for |p-k| <= 1
for N in (3, 8, 64, 512):
    k = np.arange(1, N + 1)
    D = np.abs(k[:, None] - k[None, :]).astype(float)
    A = np.where(D >= 2, 1.0 / np.maximum(D, 1), 0.0)
    print("hilbert", N, repr(np.linalg.svd(A, compute_uv=False)[0]))
