"""Where the light goes at the wire plane.

Both pinholes open give a fringe pattern under an Airy envelope. Wires sit on
the dark fringes. We compare how much of each source they intercept.
"""

import numpy as np

from dualpinhole import analytic as an
from dualpinhole import experiment as ex
from dualpinhole.config import SetupConfig
from dualpinhole.propagation import wire_grid

config = SetupConfig()
model = an.FringeModel(config.u, config.s)
print(f"fringe spacing u = {config.u * 1e3:.3f} mm, Airy radius s = {config.s * 1e3:.3f} mm")
print(f"about {model.fringe_count:.1f} fringes fit inside the envelope")

grid = wire_grid(config)
print("wire centres (mm):", np.round(np.asarray(grid.centers) * 1e3, 3))

# the coherent pattern is exactly dark on every wire centre
for c in grid.centers:
    print(f"  I_coherent({c * 1e3:+.2f} mm) = {an.coherent_irradiance(c, model):.2e}")

losses = ex.analytic_losses(config)
r_tilde = 100 * losses["delta_tilde_2"] / losses["phi_c"]
r = 100 * losses["delta_2"] / losses["phi_c"]
print(f"decoherent light blocked: {r_tilde:.3f} %")
print(f"coherent light blocked:   {r:.4f} %")
print(f"contrast eta = {an.eta(r_tilde, r):.4f}")

# moving the wires onto the bright fringes flips the picture
bright = ex.full_report(config.replace(wire_offset_m=config.u / 2))
print(f"wires on bright fringes: R = {bright.r_pct:.2f} %, eta = {bright.eta:.3f}")
