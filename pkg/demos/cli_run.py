"""Drive the command-line front end on a small scene.

Writes a scene file to a temporary directory, runs the ``run`` subcommand
with a report, two verifications and a short bounds suite, and prints the
written files and the exit status. These 20 clusters respect every bound, so
the run exits 0; larger suites such as ``bounds:1000`` find clusters that
violate the stated removal bounds and exit 1.

Run with ``python3 demos/cli_run.py``.
"""
import json
import tempfile
from pathlib import Path

from clusterflux.cli import main

scene = {
    "schema_version": 1,
    "media": {"water": {"rho_kg_m3": 1.0, "gamma_per_pa": 1.0},
              "gel": {"rho_kg_m3": 1.4, "gamma_per_pa": 0.7}},
    "exterior": "water",
    "host": {"radius_m": 1.0, "medium": "gel"},
    "source": {"position_m": [0.2, -0.1, 0.3], "amplitude": {"re": 1.0, "im": -0.4}},
    # f = s/(1 - i k0 s) with s = 0.3, k0 = 2: a scatterer that neither absorbs
    # nor generates power, as the overall cross-section identity assumes
    "scatterers": [{"position_m": [1.7, 0.2, 0.0], "f": {"re": 0.3 / 1.36, "im": 0.18 / 1.36}}],
    "omega_rad_s": 2.0,
    "numerics": {"mode": "self_consistent"},
    "tasks": ["report", "verify:oscs", "verify:decomposition", "bounds:20"],
}

with tempfile.TemporaryDirectory() as tmp:
    cfg = Path(tmp) / "scene.json"
    cfg.write_text(json.dumps(scene, indent=2))
    out = Path(tmp) / "out"
    status = main(["--quiet", "run", str(cfg), "--out", str(out)])
    print(f"exit status {status}")
    for path in sorted(out.iterdir()):
        print(f"  {path.name}")
    print((out / "cross_sections.csv").read_text())
    report = json.loads((out / "report.json").read_text())
    for v in report["verifications"]:
        print(f"  {v['name']:<16} {v['status']}")
