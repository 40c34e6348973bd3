"""Round trip of one Laguerre-Gaussian mode.

We render LG(l=4, p=7) on a 256 x 256 detector with 50 um pixels, decompose
it with the waist fixed at the rendering waist, and look at where the power
lands.  A matched basis should put essentially everything into (4, 7).
"""

import numpy as np

from lgdecomp import DecomposeParams, DetectorSpec, decompose, fidelity, reconstruct
from lgdecomp.fixtures import render_image

spec = DetectorSpec(256, 256, 50e-6)
w0 = 775e-6
img = render_image({(4, 7): 1.0}, w0, spec)

spectrum = decompose(img, spec, DecomposeParams(forced_w0=w0))
print(f"fitted {spectrum.mode_count} coefficients, l_max={spectrum.l_max}")

# the five strongest modes, by share of the total coefficient power
entries = sorted(spectrum.entries(), key=lambda e: -abs(e[1]) ** 2)[:5]
total = spectrum.power()
for (l, p), a in entries:
    print(f"  LG({l:+d},{p}) share {abs(a) ** 2 / total:.3e}")

rec = reconstruct(spectrum)
print(f"intensity fidelity of the reconstruction: {fidelity(rec, img):.7f}")

# the residual sits at the edge of the polar grid and at the spline level
res = np.abs(np.abs(rec) ** 2 - np.abs(img) ** 2)
print(f"largest intensity residual relative to the peak: {res.max() / (np.abs(img) ** 2).max():.2e}")
