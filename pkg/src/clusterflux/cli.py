"""Command-line front end: scene configuration in, JSON and CSV reports out.

Usage::

    clusterflux run scene.json --out results/
    clusterflux verify scene.json --name oscs
    clusterflux sweep scene.json --param omega --from 2 --to 0.02 --points 5

The configuration is JSON with SI units spelled out in the field names and
complex numbers written as ``{"re": ..., "im": ...}``. The schema is described
by :data:`DEFAULTS` and in the README. All state comes from the configuration
file and the command-line flags; no environment variables are read.

Exit status is 0 when every enabled non-exploratory check passes, 1 when one
fails, 2 for a configuration error (the message names the offending line) and
3 when a series or self-consistent solve does not converge.
"""
from __future__ import annotations

import argparse
import copy
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .cluster import (FIXED, HOST_ATTRIBUTION, PER_SOURCE_ATTRIBUTION, SELF_CONSISTENT,
                      ClusterModel, FoldyDivergenceError, HostSolveError, assemble)
from .crosssec import (cross_section_report, interaction_cs, point_source_pattern,
                       primary_interaction_cs_closed, scs)
from .fields import PointScatterer, PointSource
from .host_sphere import ConditioningError, HostSphere, NotConvergedError
from .media import DomainError, Medium
from .quadrature import QuadratureError, sphere_grid
from .theorems import (HostQuadrature, VerificationResult, bounds_suite, flux_preflight,
                       low_frequency_sweep, verify_flux_limit, verify_host_surface,
                       verify_oscs, verify_pointlike_overall)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3

VERIFICATIONS = ("decomposition", "closed_form", "flux_preflight", "flux_limit",
                 "host_surface", "oscs", "power_balance")

DEFAULT_TOLERANCES = {
    "decomposition": 1e-10,
    "closed_form": 1e-10,
    "flux_preflight": 1e-8,
    "flux_limit": 1e-4,
    "host_surface": 1e-5,
    "oscs": 1e-6,
    "power_balance": 1e-5,
    "sweep": 1e-6,
}

DEFAULT_NUMERICS = {
    "L_trunc": None,
    "L_max": 120,
    "grid": {"n_theta": None, "n_phi": None},
    "flux_k0_radii": [100.0, 200.0, 400.0],
    "preflight_k0_radii": [20.0, 40.0],
    "eps_factor": 1e-3,
    "n_radial": 48,
    "seed": 0,
    "mode": FIXED,
    "attribution": HOST_ATTRIBUTION,
    "sweep_convention": "a",
    "tolerances": DEFAULT_TOLERANCES,
}

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "media": {},
    "exterior": None,
    "host": {"center_m": [0.0, 0.0, 0.0], "radius_m": None, "medium": None},
    "source": {"position_m": [0.0, 0.0, 0.0], "amplitude": {"re": 1.0, "im": 0.0}},
    "scatterers": [],
    "omega_rad_s": None,
    "sweep": None,
    "numerics": DEFAULT_NUMERICS,
    "tasks": ["report"],
}

_MEDIUM_KEYS = {"rho_kg_m3", "gamma_per_pa", "delta_pa_s"}
_SWEEP_KEYS = {"param", "from_rad_s", "to_rad_s", "points"}


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is the 1-based line of the offending entry."""

    def __init__(self, message, path=(), line=None):
        self.path = tuple(path)
        self.line = line
        super().__init__(message)

    def render(self, filename="<config>") -> str:
        where = f"{filename}:{self.line}" if self.line else filename
        key = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in self.path)
        key = key.lstrip(".")
        return f"{where}: {key + ': ' if key else ''}{self}"


class NonConvergence(RuntimeError):
    """A numerical solve failed to converge during the named task."""

    def __init__(self, task, cause):
        self.task = task
        super().__init__(f"{task}: {cause}")


# -- parsing ----------------------------------------------------------------

_WS = " \t\r\n"


def _line_map(text: str) -> dict:
    """Map every JSON path in ``text`` to the line on which its value starts."""
    decoder = json.JSONDecoder()
    lines = {}

    def skip(i):
        while i < len(text) and text[i] in _WS:
            i += 1
        return i

    def value(i, path):
        i = skip(i)
        lines[path] = text.count("\n", 0, i) + 1
        ch = text[i]
        if ch == "{":
            i = skip(i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = decoder.raw_decode(text, skip(i))
                i = skip(i) + 1  # colon
                i = skip(value(i, path + (key,)))
                if text[i] == "}":
                    return i + 1
                i += 1  # comma
        if ch == "[":
            i = skip(i + 1)
            if text[i] == "]":
                return i + 1
            n = 0
            while True:
                i = skip(value(i, path + (n,)))
                n += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        _, end = decoder.raw_decode(text, i)
        return end

    value(0, ())
    return lines


def _merge(defaults, given):
    if isinstance(defaults, dict) and isinstance(given, dict):
        out = copy.deepcopy(defaults)
        for k, v in given.items():
            out[k] = _merge(defaults.get(k), v) if k in defaults else v
        return out
    return copy.deepcopy(given)


class _Validator:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, path, message):
        path = tuple(path)
        line = None
        for n in range(len(path), -1, -1):
            if path[:n] in self.lines:
                line = self.lines[path[:n]]
                break
        raise ConfigError(message, path, line)

    def keys(self, obj, path, allowed):
        if not isinstance(obj, dict):
            self.fail(path, "expected an object")
        for k in obj:
            if k not in allowed:
                self.fail(path + (k,), f"unknown key {k!r}")

    def number(self, obj, path, positive=False, nonneg=False, allow_none=False):
        if obj is None and allow_none:
            return None
        if isinstance(obj, bool) or not isinstance(obj, (int, float)) or not math.isfinite(obj):
            self.fail(path, "expected a finite number")
        if positive and not obj > 0:
            self.fail(path, "must be positive")
        if nonneg and obj < 0:
            self.fail(path, "must be non-negative")
        return float(obj)

    def integer(self, obj, path, minimum=0, allow_none=False):
        if obj is None and allow_none:
            return None
        if isinstance(obj, bool) or not isinstance(obj, int) or obj < minimum:
            self.fail(path, f"expected an integer >= {minimum}")
        return int(obj)

    def vector(self, obj, path):
        if not isinstance(obj, list) or len(obj) != 3:
            self.fail(path, "expected a list of three coordinates")
        return np.array([self.number(x, path + (i,)) for i, x in enumerate(obj)])

    def complex(self, obj, path):
        if not isinstance(obj, dict):
            self.fail(path, "expected a complex number {\"re\": x, \"im\": y}")
        self.keys(obj, path, {"re", "im"})
        return complex(self.number(obj.get("re", 0.0), path + ("re",)),
                       self.number(obj.get("im", 0.0), path + ("im",)))

    def choice(self, obj, path, options):
        if obj not in options:
            self.fail(path, f"expected one of {', '.join(map(repr, options))}")
        return obj


class Scene:
    """Validated configuration: the cluster model plus numerics and tasks."""

    def __init__(self, effective: dict, model: ClusterModel, lines: dict):
        self.effective = effective
        self.model = model
        self.lines = lines
        self.numerics = effective["numerics"]
        self.tol = self.numerics["tolerances"]
        self.tasks = list(effective["tasks"])

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(_canonical(self.effective).encode()).hexdigest()

    def task_line(self, index):
        return self.lines.get(("tasks", index))

    def assemble(self, model=None):
        num = self.numerics
        grid = None
        g = num["grid"]
        if g["n_theta"] is not None:
            grid = sphere_grid(g["n_theta"], g["n_phi"])
        return assemble(model or self.model, L=num["L_trunc"], grid=grid, mode=num["mode"],
                        attribution=num["attribution"], L_max=num["L_max"])

    def host_quadrature(self):
        return HostQuadrature(eps_factor=self.numerics["eps_factor"],
                              n_radial=self.numerics["n_radial"])


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _parse_task(task, path, v):
    if not isinstance(task, str):
        v.fail(path, "task must be a string")
    if task in ("report", "sweep"):
        return task, None
    kind, _, arg = task.partition(":")
    if kind == "verify":
        if arg != "all" and arg not in VERIFICATIONS:
            v.fail(path, f"unknown verification {arg!r}; expected 'all' or one of "
                         + ", ".join(VERIFICATIONS))
        return kind, arg
    if kind == "bounds":
        if not arg.isdigit() or int(arg) < 1:
            v.fail(path, "bounds task needs a positive trial count, e.g. 'bounds:1000'")
        return kind, int(arg)
    v.fail(path, f"unknown task {task!r}")


def load_scene(text: str) -> Scene:
    """Parse and validate configuration text.

    Raises
    ------
    ConfigError
        With the line of the offending entry.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", (), exc.lineno) from None
    lines = _line_map(text)
    v = _Validator(lines)
    v.keys(raw, (), set(DEFAULTS))
    if raw.get("schema_version") != SCHEMA_VERSION:
        v.fail(("schema_version",), f"schema_version must be {SCHEMA_VERSION}")
    cfg = _merge(DEFAULTS, raw)

    media = {}
    if not isinstance(cfg["media"], dict) or not cfg["media"]:
        v.fail(("media",), "expected a non-empty object of named media")
    for name, m in cfg["media"].items():
        p = ("media", name)
        v.keys(m, p, _MEDIUM_KEYS)
        for key in ("rho_kg_m3", "gamma_per_pa"):
            if key not in m:
                v.fail(p, f"missing {key!r}")
        m.setdefault("delta_pa_s", 0.0)
        try:
            media[name] = Medium(v.number(m["rho_kg_m3"], p + ("rho_kg_m3",), positive=True),
                                 v.number(m["gamma_per_pa"], p + ("gamma_per_pa",),
                                          positive=True),
                                 v.number(m["delta_pa_s"], p + ("delta_pa_s",), nonneg=True))
        except DomainError as exc:
            v.fail(p, str(exc))

    def medium(ref, path):
        if ref not in media:
            v.fail(path, f"unknown medium {ref!r}")
        return media[ref]

    exterior = medium(cfg["exterior"], ("exterior",))
    h = cfg["host"]
    v.keys(h, ("host",), set(DEFAULTS["host"]))
    host = HostSphere(v.vector(h["center_m"], ("host", "center_m")),
                      v.number(h["radius_m"], ("host", "radius_m"), positive=True),
                      medium(h["medium"], ("host", "medium")))
    s = cfg["source"]
    v.keys(s, ("source",), set(DEFAULTS["source"]))
    source = PointSource(v.vector(s["position_m"], ("source", "position_m")),
                         v.complex(s["amplitude"], ("source", "amplitude")))

    if not isinstance(cfg["scatterers"], list):
        v.fail(("scatterers",), "expected a list")
    scat = []
    for i, sc in enumerate(cfg["scatterers"]):
        p = ("scatterers", i)
        v.keys(sc, p, {"position_m", "strength", "f"})
        if "position_m" not in sc:
            v.fail(p, "missing 'position_m'")
        sc.setdefault("strength", {"re": 0.0, "im": 0.0})
        sc.setdefault("f", None)
        f = None if sc["f"] is None else v.complex(sc["f"], p + ("f",))
        scat.append(PointScatterer(v.vector(sc["position_m"], p + ("position_m",)),
                                   v.complex(sc["strength"], p + ("strength",)), f))

    omega = v.number(cfg["omega_rad_s"], ("omega_rad_s",), positive=True)

    num = cfg["numerics"]
    np_ = ("numerics",)
    v.keys(num, np_, set(DEFAULT_NUMERICS))
    v.integer(num["L_trunc"], np_ + ("L_trunc",), 1, allow_none=True)
    v.integer(num["L_max"], np_ + ("L_max",), 1)
    v.keys(num["grid"], np_ + ("grid",), {"n_theta", "n_phi"})
    nt = v.integer(num["grid"].get("n_theta"), np_ + ("grid", "n_theta"), 2, allow_none=True)
    nph = v.integer(num["grid"].get("n_phi"), np_ + ("grid", "n_phi"), 1, allow_none=True)
    if (nt is None) != (nph is None):
        v.fail(np_ + ("grid",), "give both n_theta and n_phi, or neither")
    for key in ("flux_k0_radii", "preflight_k0_radii"):
        radii = num[key]
        if not isinstance(radii, list) or len(radii) < 2:
            v.fail(np_ + (key,), "expected a list of at least two radii")
        vals = [v.number(x, np_ + (key, j), positive=True) for j, x in enumerate(radii)]
        if sorted(set(vals)) != vals:
            v.fail(np_ + (key,), "radii must be strictly increasing")
    v.number(num["eps_factor"], np_ + ("eps_factor",), positive=True)
    if not num["eps_factor"] < 1:
        v.fail(np_ + ("eps_factor",), "must be below 1")
    v.integer(num["n_radial"], np_ + ("n_radial",), 2)
    v.integer(num["seed"], np_ + ("seed",), 0)
    v.choice(num["mode"], np_ + ("mode",), (FIXED, SELF_CONSISTENT))
    v.choice(num["attribution"], np_ + ("attribution",),
             (HOST_ATTRIBUTION, PER_SOURCE_ATTRIBUTION))
    v.choice(num["sweep_convention"], np_ + ("sweep_convention",), ("a", "b"))
    v.keys(num["tolerances"], np_ + ("tolerances",), set(DEFAULT_TOLERANCES))
    for key, tol in num["tolerances"].items():
        v.number(tol, np_ + ("tolerances", key), positive=True)
    if num["mode"] == SELF_CONSISTENT:
        for i, sc in enumerate(scat):
            if sc.monopole_coefficient is None:
                v.fail(("scatterers", i), "self-consistent mode needs 'f' on every scatterer")

    if cfg["sweep"] is not None:
        sw = cfg["sweep"]
        v.keys(sw, ("sweep",), _SWEEP_KEYS)
        for key in _SWEEP_KEYS:
            if key not in sw:
                v.fail(("sweep",), f"missing {key!r}")
        v.choice(sw["param"], ("sweep", "param"), ("omega",))
        v.number(sw["from_rad_s"], ("sweep", "from_rad_s"), positive=True)
        v.number(sw["to_rad_s"], ("sweep", "to_rad_s"), positive=True)
        v.integer(sw["points"], ("sweep", "points"), 2)

    if not isinstance(cfg["tasks"], list) or not cfg["tasks"]:
        v.fail(("tasks",), "expected a non-empty list of tasks")
    for i, t in enumerate(cfg["tasks"]):
        kind, _ = _parse_task(t, ("tasks", i), v)
        if kind == "sweep" and cfg["sweep"] is None:
            v.fail(("tasks", i), "the sweep task needs a 'sweep' block")

    try:
        model = ClusterModel(host, exterior, source, tuple(scat), omega)
    except DomainError as exc:
        msg = str(exc)
        path = ("source", "position_m") if "source" in msg else ("scatterers",)
        if msg.startswith("scatterer"):
            idx = [int(t) for t in msg.replace(",", " ").split() if t.isdigit()]
            path = ("scatterers", idx[-1], "position_m") if idx else path
        elif "exterior" in msg:
            path = ("exterior",)
        v.fail(path, msg)
    return Scene(cfg, model, lines)


# -- tasks ------------------------------------------------------------------

_CONVERGENCE_ERRORS = (NotConvergedError, HostSolveError, FoldyDivergenceError,
                       ConditioningError, QuadratureError)


def _run_verification(scene: Scene, af, name: str) -> list:
    tol = scene.tol
    num = scene.numerics
    model = af.model
    if name == "decomposition":
        pats = af.patterns()
        rep = cross_section_report(pats)
        rhs = rep.sigma_direct + interaction_cs(pats, double_sum=True) if af.N > 1 \
            else rep.sigma_direct
        return [VerificationResult("decomposition", rep.sigma, rhs, tol["decomposition"])]
    if name == "closed_form":
        if len(model.scatterers) < 2:
            return [VerificationResult("closed_form", 0.0, 0.0, tol["closed_form"],
                                       exploratory=True,
                                       notes={"reason": "fewer than two point scatterers"})]
        k0 = af.exterior_dm.k.real
        pats = [point_source_pattern(s.amplitude, s.position, af.grid, k0)
                for s in af.point_sources]
        quad = interaction_cs(pats)
        closed = primary_interaction_cs_closed(af.strengths, model.positions, k0)
        return [VerificationResult("closed_form", quad, closed, tol["closed_form"],
                                   scale=max(abs(closed), sum(scs(p) for p in pats)))]
    if name == "flux_preflight":
        return [flux_preflight(af, tuple(num["preflight_k0_radii"]), tol["flux_preflight"])]
    if name == "flux_limit":
        return [verify_flux_limit(af, tuple(num["flux_k0_radii"]), tol["flux_limit"])]
    if name == "host_surface":
        return verify_host_surface(af, tol["host_surface"], scene.host_quadrature())
    if name == "oscs":
        return [verify_oscs(af, tol["oscs"])]
    if name == "power_balance":
        return verify_pointlike_overall(af, tol["power_balance"])
    raise DomainError(f"unknown verification {name!r}")


def _applicable(scene: Scene, name: str) -> bool:
    if name in ("oscs", "power_balance"):
        return scene.model.host.medium.lossless
    return True


def sweep_omegas(start: float, stop: float, points: int) -> np.ndarray:
    """Geometric frequency grid from ``start`` to ``stop`` inclusive."""
    return np.geomspace(start, stop, points)


def _sweep(scene: Scene, omegas, progress) -> tuple:
    """Per-frequency cross sections, and the low-frequency trend when applicable."""
    rows = []
    for w in omegas:
        progress(f"sweep: omega = {w:.6g} rad/s")
        af = scene.assemble(scene.model.with_omega(w))
        rep = cross_section_report(af.patterns())
        rows.append({"omega_rad_s": float(w), "L": af.L, "sigma": rep.sigma,
                     "sigma_c": rep.sigma_c, "R_c": rep.R_c})
    trend = None
    om = np.sort(np.asarray(omegas, dtype=float))[::-1]
    if len(om) >= 4 and om[0] / om[-1] >= 100 * (1 - 1e-12) and scene.model.N > 1:
        num = scene.numerics
        kw = {"L": num["L_trunc"], "mode": num["mode"], "attribution": num["attribution"],
              "L_max": num["L_max"]}
        trend = low_frequency_sweep(scene.model, om, num["sweep_convention"],
                                    scene.tol["sweep"], assemble_kwargs=kw)
    return rows, trend


# -- output -----------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else _fmt(c) for c in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def cross_sections_csv(report) -> str:
    """One row per member (index, sigma_j, R_j), then a summary row (sigma, sigma_c, R_c)."""
    rows = [["member", j, s, r, None, None, None]
            for j, (s, r) in enumerate(zip(report.sigma_j, report.ratios))]
    rows.append(["summary", None, None, None, report.sigma, report.sigma_c, report.R_c])
    return _csv(["row", "index", "sigma_j_m2", "R_j", "sigma_m2", "sigma_c_m2", "R_c"], rows)


class RunOutcome:
    """Everything produced by one invocation, before it is written out."""

    def __init__(self):
        self.report = {}
        self.files = {}
        self.results = []
        self.gating_failed = []

    def add_results(self, results):
        for r in results:
            self.results.append(r)
            if not r.exploratory and not r.passed:
                self.gating_failed.append(r.name)

    @property
    def exit_code(self):
        return EXIT_FAILED if self.gating_failed else EXIT_OK


def execute(scene: Scene, tasks=None, sweep_override=None, progress=lambda s: None
            ) -> RunOutcome:
    """Run the configured tasks and collect the report and CSV files.

    Raises
    ------
    NonConvergence
        Naming the task during which a solve failed to converge.
    ConfigError
        When a task does not apply to the scene (for example a lossless-only
        verification on a lossy host).
    """
    tasks = scene.tasks if tasks is None else tasks
    out = RunOutcome()
    current = "assemble"
    try:
        progress("assembling cluster")
        af = scene.assemble()
        rep = cross_section_report(af.patterns())
        out.files["cross_sections.csv"] = cross_sections_csv(rep)
        trunc = [["host_source", af.source_solution.L, af.source_solution.tail]]
        trunc += [[f"wave_{n}", w.L, w.tail] for n, w in enumerate(af.wave_solutions)]
        out.files["convergence_truncation.csv"] = _csv(["solve", "L", "tail"], trunc)
        out.report.update({
            "model": {"N": af.N, "omega_rad_s": scene.model.omega, "L_used": af.L,
                      "band_limit": af.band_limit,
                      "grid": {"n_theta": af.grid.n_theta, "n_phi": af.grid.n_phi,
                               "size": af.grid.size},
                      "k0_per_m": af.exterior_dm.k, "k_host_per_m": af.host_dm.k,
                      "zeta0": af.exterior_dm.zeta, "zeta_host": af.host_dm.zeta,
                      "strengths": af.strengths, "foldy": {
                          "mode": af.foldy.mode, "iterations": af.foldy.iterations,
                          "direct_solve": af.foldy.direct_solve}},
            "cross_sections": rep.as_dict(),
        })
        for i, (kind, arg) in enumerate(_parse_task(t, ("tasks", i), _Validator({}))
                                        for i, t in enumerate(tasks)):
            if kind == "report":
                continue
            if kind == "verify":
                names = VERIFICATIONS if arg == "all" else (arg,)
                for name in names:
                    if not _applicable(scene, name):
                        if arg == "all":
                            continue
                        raise ConfigError(f"verification {name!r} requires a lossless host",
                                          ("tasks", i), scene.task_line(i))
                    current = f"verify:{name}"
                    progress(current)
                    out.add_results(_run_verification(scene, af, name))
                    if name == "flux_limit" and out.results[-1].table:
                        rows = [[r["k0R"], r["zeta0_flux"]["re"], r["zeta0_flux"]["im"],
                                 r["residual"]] for r in out.results[-1].table]
                        out.files["convergence_flux_limit.csv"] = _csv(
                            ["k0R", "zeta0_flux_re", "zeta0_flux_im", "residual"], rows)
            elif kind == "bounds":
                current = f"bounds:{arg}"
                progress(current)
                suite = bounds_suite(arg, scene.numerics["seed"])
                gating = ("rc_upper", "rc_upper_min", "rc_lower_max", "n_bounds", "removal",
                          "removal_smallest", "removal_largest", "ratio_bound")
                bad = [k for k in gating if suite["violations"][k]]
                eq_ok = all(c["equality_rmax"] and c["equality_all"] and c["equality_rc"]
                            for c in suite["identical_pattern_cases"])
                fired = suite["violations"]["equality_fired"]
                suite["verdict"] = {"violated": bad, "equality_diagnostics_exact":
                                    bool(eq_ok and fired == 0),
                                    "status": "PASS" if not bad and eq_ok and fired == 0
                                    else "FAIL"}
                out.files["bounds_verdict.json"] = json.dumps(
                    _jsonable(suite), sort_keys=True, indent=2) + "\n"
                out.report.setdefault("bounds", []).append(suite)
                if suite["verdict"]["status"] != "PASS":
                    out.gating_failed.append(current)
            elif kind == "sweep":
                current = "sweep"
                sw = sweep_override or scene.effective["sweep"]
                omegas = sweep_omegas(sw["from_rad_s"], sw["to_rad_s"], sw["points"])
                rows, trend = _sweep(scene, omegas, progress)
                out.files["sweep_cross_sections.csv"] = _csv(
                    ["omega_rad_s", "L", "sigma_m2", "sigma_c_m2", "R_c"],
                    [[r["omega_rad_s"], r["L"], r["sigma"], r["sigma_c"], r["R_c"]]
                     for r in rows])
                out.report["sweep"] = {"rows": rows}
                if trend is not None:
                    out.add_results([trend])
                    out.files["convergence_sweep.csv"] = _csv(
                        ["omega_rad_s", "sigma_c_over_zeta0", "flux_a_re", "flux_a_im",
                         "flux_b_re", "flux_b_im", "residual_a", "residual_b"],
                        [[r["omega_rad_s"], r["sigma_c_over_zeta0"], r["flux_a"]["re"],
                          r["flux_a"]["im"], r["flux_b"]["re"], r["flux_b"]["im"],
                          r["residual_a"], r["residual_b"]] for r in trend.table])
    except _CONVERGENCE_ERRORS as exc:
        raise NonConvergence(current, exc) from exc
    out.report["verifications"] = [r.as_dict() for r in out.results]
    out.report["failed"] = list(out.gating_failed)
    return out


def _write(scene: Scene, outcome: RunOutcome, outdir: Path, config_name: str):
    outdir.mkdir(parents=True, exist_ok=True)
    report = {"schema_version": SCHEMA_VERSION,
              "generated_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
              "config_file": config_name, "config_sha256": scene.config_hash,
              "effective_config": scene.effective, "exit_status": outcome.exit_code}
    report.update(outcome.report)
    for name, content in sorted(outcome.files.items()):
        with open(outdir / name, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(content)
    with open(outdir / "report.json", "w", newline="\n", encoding="utf-8") as fh:
        json.dump(_jsonable(report), fh, sort_keys=True, indent=2)
        fh.write("\n")


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clusterflux",
                                     description="Cross sections and energy identities of "
                                                 "a host sphere with point scatterers.")
    parser.add_argument("--quiet", action="store_true", help="suppress progress messages")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run the tasks listed in the configuration")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output directory")
    p = sub.add_parser("verify", help="run one verification")
    p.add_argument("config")
    p.add_argument("--name", required=True, choices=VERIFICATIONS + ("all",))
    p.add_argument("--out", help="output directory (default: print results to stdout)")
    p = sub.add_parser("sweep", help="sweep a parameter over a geometric grid")
    p.add_argument("config")
    p.add_argument("--param", required=True, choices=("omega",))
    p.add_argument("--from", dest="start", required=True, type=float)
    p.add_argument("--to", dest="stop", required=True, type=float)
    p.add_argument("--points", required=True, type=int)
    p.add_argument("--out", help="output directory (default: print the table to stdout)")
    for sp in sub.choices.values():
        sp.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="suppress progress messages")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    quiet = getattr(args, "quiet", False)
    progress = (lambda s: None) if quiet else (lambda s: print(s, file=sys.stderr))
    path = Path(args.config)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"{path}: cannot read configuration: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        scene = load_scene(text)
        tasks, override = None, None
        if args.command == "verify":
            tasks = [f"verify:{args.name}"]
        elif args.command == "sweep":
            if args.start <= 0 or args.stop <= 0 or args.points < 2:
                raise ConfigError("sweep needs positive --from/--to and --points >= 2")
            tasks = ["sweep"]
            override = {"param": args.param, "from_rad_s": args.start,
                        "to_rad_s": args.stop, "points": args.points}
            scene.effective["sweep"] = override
        outcome = execute(scene, tasks, override, progress)
    except ConfigError as exc:
        print(exc.render(str(path)), file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"not converged during {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    if args.command == "run" or getattr(args, "out", None):
        _write(scene, outcome, Path(args.out), path.name)
    elif args.command == "verify":
        print(json.dumps(_jsonable(outcome.report["verifications"]), indent=2, sort_keys=True))
    else:
        sys.stdout.write(outcome.files.get("convergence_sweep.csv")
                         or outcome.files["sweep_cross_sections.csv"])
    for r in outcome.results:
        tag = " (exploratory)" if r.exploratory else ""
        progress(f"{r.status:12s} {r.name}{tag}: relative residual {r.relative_residual:.3e}")
    if outcome.gating_failed:
        progress("failed: " + ", ".join(outcome.gating_failed))
    return outcome.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
