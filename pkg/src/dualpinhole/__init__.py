"""Wave-optics simulation of dual-pinhole interference probed by a wire grid.

Modules
-------
field        sampled fields, flux, apodization, coherent/decoherent sums
analytic     closed-form fringe model, J1, wire losses, V / K / eta
propagation  scalar diffraction engine and the imaging pipeline
experiment   control / decoherent / coherent runs and the verdict
wavepacket   2D Schroedinger packet against a reflecting obstacle
photons      photon-arrival sampling and source discrimination
cli          command-line front end
"""

__version__ = "0.1.0"
