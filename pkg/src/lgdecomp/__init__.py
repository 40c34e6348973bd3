"""Laguerre-Gaussian mode decomposition of optical images.

Typical use::

    from lgdecomp import DetectorSpec, decompose, reconstruct, fidelity
    spec = DetectorSpec(256, 256, 50e-6)
    spectrum = decompose(image, spec)
    score = fidelity(reconstruct(spectrum), image)
"""

from .azimuthal import (AzimuthalSpectrum, azimuthal_decompose, azimuthal_recompose,
                        retained_fraction, truncation_l)
from .filtering import BandClippedWarning, BandSpec, band_filter_spectrum, denoise, l_power_spectrum
from .lg_basis import (DegenerateModeError, EffectiveArea, ModeIndex, OrderBoundsError,
                       RootBracketingError, effective_area, eval_field, eval_radial, laguerre,
                       radial_basis, radial_nodes)
from .pipeline import (DecomposeParams, DecompositionError, LGSpectrum, analyze_waist,
                       decompose, fidelity, reconstruct, residual_map)
from .polar_grid import DetectorSpec, PolarImage, from_polar, to_polar
from .radial_fit import (RadialSamples, SubspaceCoefficients, decomposition_accuracy,
                         fit_radial, integral_project)
from .waist import (InfeasibleSubspaceError, SubspaceWidths, UndefinedWidthsError,
                    WaistReport, select_waist, subspace_widths, truncation_p)

__version__ = "0.1.0"
