"""Energy relations on the host surface for a lossless and a lossy host.

For each host the script lists every verification with its two pipeline
values and residual. With a lossless host the surface identity closes to
rounding. With a lossy host only the complete balance (``host_green``) closes:
the short form leaves a residual that does not shrink with the excluded ball.

Run with ``python3 demos/host_identities.py``.
"""
import numpy as np

from clusterflux import (ClusterModel, HostSphere, Medium, PointScatterer, PointSource,
                         assemble, verify_host_surface)

omega = 2.0
members = (PointScatterer([1.7, 0.2, 0.0], 0.4 + 0.2j),
           PointScatterer([-0.3, -1.8, 0.5], -0.3 + 0.25j))
hosts = {"lossless": Medium(1.5, 0.8),
         "lossy (omega gamma delta = 0.3)": Medium(1.5, 0.8, 0.3 / (omega * 0.8))}

for label, medium in hosts.items():
    model = ClusterModel(HostSphere(np.zeros(3), 1.0, medium), Medium(1.0, 1.0),
                         PointSource([0.2, -0.1, 0.3], 1.0 - 0.4j), members, omega)
    print(f"host {label}")
    for r in verify_host_surface(assemble(model)):
        kind = "exploratory" if r.exploratory else "gating"
        print(f"  {r.name:<24} {r.status:<12} relative residual {r.relative_residual:9.2e}"
              f"  ({kind})")
