"""Independent reference computations used by the tests.

None of these share code paths with the package: the cosmology oracle
integrates in redshift with a fixed-step Simpson rule (the package uses
adaptive quadrature in the scale factor), the light-cone oracle samples
sphere surfaces, and so on.
"""

import math

import numpy as np

C_KM_S = 299792.458


def inv_hubble_z(z, h0, om, orad, ol):
    zp1 = 1.0 + z
    ok = 1.0 - om - ol - orad
    return 1.0 / ((h0 / C_KM_S) * np.sqrt(orad * zp1**4 + om * zp1**3 + ok * zp1**2 + ol))


def simpson_comoving(z, h0=67.3, om=0.315, orad=9.2e-5, ol=None, steps=1_000_000):
    """Composite Simpson in z on a log(1+z) grid, `steps` intervals."""
    if ol is None:
        ol = 1.0 - om - orad
    if z == 0:
        return 0.0
    # substitute u = ln(1+z): dz = (1+z) du keeps the integrand smooth at high z
    u = np.linspace(0.0, math.log1p(z), steps + 1)
    zz = np.expm1(u)
    y = inv_hubble_z(zz, h0, om, orad, ol) * (1.0 + zz)
    hstep = u[1] - u[0]
    return hstep / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def sphere_points(n, rng):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def balls_intersect_bruteforce(c1, r1, c2, r2, n=10_000, rng=None):
    """Sample both boundary spheres; intersect if any sample of one lies inside the other
    or one ball holds the other's centre."""
    rng = rng or np.random.default_rng(0)
    c1, c2 = np.asarray(c1, float), np.asarray(c2, float)
    p1 = c1 + r1 * sphere_points(n, rng)
    p2 = c2 + r2 * sphere_points(n, rng)
    if np.linalg.norm(c1 - c2) <= max(r1, r2):
        return True
    return bool(np.any(np.linalg.norm(p1 - c2, axis=1) <= r2) or np.any(np.linalg.norm(p2 - c1, axis=1) <= r1))


def great_circle_deg(ra1, dec1, ra2, dec2):
    """Plain spherical law of cosines; fine away from 0 and 180 degrees."""
    r = math.radians
    c = math.sin(r(dec1)) * math.sin(r(dec2)) + math.cos(r(dec1)) * math.cos(r(dec2)) * math.cos(r(ra1 - ra2))
    return math.degrees(math.acos(max(-1.0, min(1.0, c))))


def simpson_conformal_time(z, h0=67.3, om=0.315, orad=9.2e-5, ol=None, steps=1_000_000):
    """Fixed-step Simpson in the scale factor from a = 0 to 1/(1+z)."""
    if ol is None:
        ol = 1.0 - om - orad
    ok = 1.0 - om - ol - orad
    a = np.linspace(0.0, 1.0 / (1.0 + z), steps + 1)
    y = 1.0 / ((h0 / C_KM_S) * np.sqrt(orad + om * a + ok * a**2 + ol * a**4))
    hstep = a[1] - a[0]
    return hstep / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())
