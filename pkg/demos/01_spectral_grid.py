# Spectral grids on the square torus
# ==================================
#
# Everything in this package lives on a uniform grid over the torus
# [0,1)^{2n} with coordinates ordered (x1, y1, ..., xn, yn).  Derivatives
# are exact FFT derivatives, so any band limited field is differentiated
# to machine precision.  This demo builds a grid, takes Wirtinger
# derivatives of a plane wave, and checks the quadrature rule.

import numpy as np

from chern_extremal import (
    GridSpec,
    ScalarField,
    integrate,
    norm,
    partial_z,
    partial_zbar,
    random_band_limited,
)

spec = GridSpec(n=2, N=16)
print("grid:", spec.n, "complex dimensions,", spec.N, "points per axis,",
      spec.npts, "points total")

# broadcastable coordinate arrays; add a zero field to get full shape
x1 = spec.x(1) + np.zeros(spec.shape)
y1 = spec.y(1) + np.zeros(spec.shape)

# d/dz of sin(2 pi x1) is pi cos(2 pi x1): the x-part contributes the
# cosine, the y-part nothing
u = ScalarField(spec, np.sin(2 * np.pi * x1))
du = partial_z(u, 1)
exact = np.pi * np.cos(2 * np.pi * x1)
print("plane wave d/dz error: %.3e" % np.max(np.abs(du.values - exact)))

# the conjugate derivative of a real field is the conjugate of d/dz
dbar = partial_zbar(u, 1)
print("conjugation check:     %.3e" % np.max(np.abs(dbar.values - np.conj(du.values))))

# quadrature: mean of cos^2 over one period is 1/2
sq = ScalarField(spec, np.cos(2 * np.pi * x1) ** 2)
print("mean of cos^2:         %.15f" % integrate(sq))

# reproducible random fields with an exact sup norm and zero mean
r = random_band_limited(spec, seed=7, max_mode=3, amplitude=0.25)
unit = ScalarField(spec, np.ones(spec.shape))
print("random field: sup %.3f  mean %.1e  norm %.4f"
      % (np.max(np.abs(r.values)), integrate(r), norm(r, unit)))
