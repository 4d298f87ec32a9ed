"""Dots on a screen, one at a time.

Draw photon positions from the coherent and the decoherent pattern and ask
how many dots it takes to tell the two sources apart.
"""

import numpy as np

from dualpinhole import photons as ph
from dualpinhole.config import SetupConfig

config = SetupConfig()
coherent, decoherent = ph.source_profiles(config)
single = ph.single_photon_accuracy(coherent, decoherent)
print("single-dot accuracy:", ", ".join(f"{k} {v:.3f}" for k, v in single.items()))
print(f"information per dot (KL): {ph.kl_divergence(coherent, decoherent):.3f} nats")

table = ph.buildup_study(config, counts=(1, 3, 10, 30, 300), trials=500, seed=config.seed)
for src, acc in table.accuracy.items():
    print(f"{src:10s}", "  ".join(f"N={n}: {a:.3f}" for n, a in acc.items()))

# a coarse histogram of 3000 coherent dots shows the fringes emerging
dots = ph.sample(coherent, 3000, seed=7).positions
counts, edges = np.histogram(dots, bins=40, range=(-config.s / 2, config.s / 2))
for c, lo in zip(counts, edges):
    print(f"{lo * 1e3:+6.2f} mm " + "#" * int(60 * c / counts.max()))
