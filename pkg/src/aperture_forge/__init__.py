"""Coded-aperture pattern design, depth from defocus, and defocus deblurring.

Subpackages and modules:

* ``imaging``    -- image container, DFTs, PSF synthesis, blur, priors, optics
* ``radiometry`` -- photon/read-noise model of a capture
* ``metrics``    -- Wiener deconvolution and the R / D / D_r pattern scores
* ``search``     -- NSGA-II multi-objective search over binary masks
* ``quality``    -- no-reference quality measures and their fixed aggregate
* ``depth``      -- blur-scale estimation and graph-cut depth labeling
* ``deconv``     -- Wiener and sparse-gradient-prior image restoration
* ``scenes``     -- bundled procedural corpus and synthetic scenes
* ``fileio``     -- PGM, pattern, PSF-bank, and prior file formats
* ``maxflow``    -- min-cut solver (compiled core with pure-Python fallback)
* ``cli``        -- the ``aperture-forge`` command-line interface
"""

__version__ = "0.1.0"
