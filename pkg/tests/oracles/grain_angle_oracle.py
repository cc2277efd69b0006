"""Brute-force oracle for the grain-droplet analytical contact angle.

Independent of the package: samples points on the sphere-sphere
intersection circle, builds both unit normals analytically, and averages
the per-point arccos. Run directly; the printed values are frozen into
tests/test_volume.py and tests/test_acceptance.py.

Geometry: grain sphere (radius r_g) centered at the origin, droplet
sphere (radius r_d) centered at (0, 0, D). The contact circle lies in the
plane z = y_g at radius rho, with y_g = (D^2 + r_g^2 - r_d^2) / (2 D).
At a circle point p the fluid-fluid normal points out of the droplet,
n_ff = (p - c_d) / r_d, and the fluid-solid normal points into the grain,
n_fs = -p / r_g.
"""

import math

import numpy as np

N_SAMPLES = 10_000


def oracle_angle(r_g: float, r_d: float, D: float) -> tuple[float, float]:
    """Mean and std (degrees) of the sampled per-point contact angle."""
    y_g = (D * D + r_g * r_g - r_d * r_d) / (2.0 * D)
    rho = math.sqrt(r_g * r_g - y_g * y_g)
    phi = np.linspace(0.0, 2.0 * np.pi, N_SAMPLES, endpoint=False)
    p = np.stack([rho * np.cos(phi), rho * np.sin(phi),
                  np.full_like(phi, y_g)], axis=1)
    c_d = np.array([0.0, 0.0, D])
    n_ff = (p - c_d) / r_d
    n_fs = -p / r_g
    dots = np.clip(np.einsum("ij,ij->i", n_ff, n_fs), -1.0, 1.0)
    theta = np.degrees(np.arccos(dots))
    return float(theta.mean()), float(theta.std())


def closed_form(r_g: float, r_d: float, D: float) -> float:
    return math.degrees(math.acos((D * D - r_g * r_g - r_d * r_d)
                                  / (2.0 * r_g * r_d)))


def separation(r_g: float, r_d: float, theta_deg: float) -> float:
    return math.sqrt(r_g * r_g + r_d * r_d
                     + 2.0 * r_g * r_d * math.cos(math.radians(theta_deg)))


if __name__ == "__main__":
    r_g, r_d = 40.0, 20.0

    mean, std = oracle_angle(r_g, r_d, 48.0)
    print(f"D=48: oracle mean = {mean!r} deg, std = {std:.3e}")
    print(f"D=48: closed form = {closed_form(r_g, r_d, 48.0)!r} deg")

    for target in (45.0, 79.05, 120.0):
        D = separation(r_g, r_d, target)
        mean, _ = oracle_angle(r_g, r_d, D)
        print(f"theta={target}: D = {D!r}, oracle mean = {mean!r} deg")

    # right-angle and tangency limits
    D90 = math.sqrt(r_g * r_g + r_d * r_d)
    print(f"D^2 = r_g^2 + r_d^2: oracle mean = {oracle_angle(r_g, r_d, D90)[0]!r}")
    print(f"near tangency D = 59.999: closed form = {closed_form(r_g, r_d, 59.999)!r}")
