"""Limited-data weighted Radon transform toolkit.

Forward/backprojection with smooth weights, Fourier-multiplier filters,
hard and smooth angular cutoffs, and a sampled wavefront-set calculus that
predicts visible singularities and straight-line artifacts of limited-angle
reconstructions, checks filter ellipticity, and cross-validates against a
structure-tensor singularity detector.
"""

__version__ = "0.1.0"
