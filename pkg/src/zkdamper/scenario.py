"""Scenario configs: flat-sectioned key = value files driving the CLI.

Sections: [domain], [equation], [delay], [feedback], [time], [init],
[certificate], [output].  A commented example lives in configs/example_mu.cfg.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .certificate import (
    InfeasibleError,
    MuCertInputs,
    PhysicalParams,
    StabilityCertificate,
    ZkCertInputs,
    certify_mu,
    certify_zk,
)
from .delay import DelayLine
from .fields import CoefficientSpec, Grid2D, ScalarField, build_coefficient, read_field
from .operators import Feedback, feedback_ab, feedback_mu
from .stepper import SchemeConfig, SimulationSetup


class ConfigError(ValueError):
    """Malformed or incomplete scenario configuration."""


def _get(cfg, section, key, cast, default=None):
    if not cfg.has_section(section) and default is None:
        raise ConfigError(f"missing section [{section}]")
    if not cfg.has_option(section, key):
        if default is None:
            raise ConfigError(f"missing key {key!r} in [{section}]")
        return default
    raw = cfg.get(section, key)
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for [{section}] {key} = {raw!r}: {exc}") from exc


def coefficient_from_config(cfg, grid: Grid2D, prefix: str) -> tuple[ScalarField, CoefficientSpec]:
    spec = CoefficientSpec(
        x0=_get(cfg, "feedback", f"{prefix}_x0", float, 0.0),
        x1=_get(cfg, "feedback", f"{prefix}_x1", float, grid.L),
        y0=_get(cfg, "feedback", f"{prefix}_y0", float, 0.0),
        y1=_get(cfg, "feedback", f"{prefix}_y1", float, grid.L),
        amplitude=_get(cfg, "feedback", f"{prefix}_amplitude", float, 0.0),
        floor=_get(cfg, "feedback", f"{prefix}_floor", float, 0.0),
        ramp=_get(cfg, "feedback", f"{prefix}_ramp", float, 0.0),
    )
    if spec.amplitude == 0.0:
        return ScalarField.zeros(grid), spec
    return build_coefficient(grid, spec), spec


@dataclass
class Scenario:
    params: PhysicalParams
    grid: Grid2D
    n_rho: int
    scheme: SchemeConfig
    feedback: Feedback
    energy_mode: str
    energy_weight: ScalarField
    damping: ScalarField
    xi: float
    zeta0: ScalarField
    history_mode: str
    history_file: str | None
    csv_path: str | None
    summary_path: str | None
    certificate_path: str | None
    snapshot_dir: str | None
    attach_certificate: bool
    certificate: StabilityCertificate | None
    floor_on: str
    seed: int
    meta: dict = dc_field(default_factory=dict)

    def make_history(self) -> DelayLine:
        if self.history_mode == "frozen":
            return DelayLine.frozen(self.zeta0, self.n_rho, self.params.h)
        if self.history_mode == "file":
            if not self.history_file:
                raise ConfigError("history = file requires history_file")
            snaps = read_history_file(self.history_file, self.grid, self.n_rho)
            return DelayLine.from_snapshots(snaps, self.params.h)
        raise ConfigError(f"unknown history mode {self.history_mode!r}")

    def build_setup(self) -> SimulationSetup:
        cert = self.certificate if self.attach_certificate else None
        return SimulationSetup(
            grid=self.grid,
            params=self.params,
            feedback=self.feedback,
            n_rho=self.n_rho,
            scheme=self.scheme,
            zeta0=self.zeta0,
            line0=self.make_history(),
            energy_mode=self.energy_mode,
            energy_weight=self.energy_weight,
            xi=self.xi,
            certificate=cert,
            damping=self.damping,
        )


def read_history_file(path: str, grid: Grid2D, n_rho: int) -> list[ScalarField]:
    """History file: n_rho+1 field blocks in the field I/O format, oldest first."""
    snaps = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    rows_per_block = grid.nx + 2 + 1
    if len(lines) < rows_per_block * (n_rho + 1):
        raise ConfigError(
            f"history file {path} holds fewer than {n_rho + 1} snapshots"
        )
    for k in range(n_rho + 1):
        block = lines[k * rows_per_block : (k + 1) * rows_per_block]
        header = block[0].split()
        if int(header[0]) != grid.nx or int(header[1]) != grid.ny:
            raise ConfigError(f"history snapshot {k} grid mismatch in {path}")
        values = np.array([[float(v) for v in row.split()] for row in block[1:]])
        snaps.append(ScalarField(grid, values))
    return snaps


def initial_field(cfg, grid: Grid2D) -> ScalarField:
    kind = _get(cfg, "init", "kind", str, "gaussian").strip().lower()
    amp = _get(cfg, "init", "amplitude", float, 0.01)
    if kind == "gaussian":
        cx = _get(cfg, "init", "center_x", float, grid.L / 2.0)
        cy = _get(cfg, "init", "center_y", float, grid.L / 2.0)
        width = _get(cfg, "init", "width", float, grid.L / 8.0)
        f = ScalarField.from_function(
            grid,
            lambda X, Y: amp * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * width**2)),
        )
    elif kind == "sine":
        kx = _get(cfg, "init", "kx", int, 1)
        ky = _get(cfg, "init", "ky", int, 1)
        f = ScalarField.from_function(
            grid,
            lambda X, Y: amp * np.sin(kx * np.pi * X / grid.L) * np.sin(ky * np.pi * Y / grid.L),
        )
    elif kind == "file":
        path = _get(cfg, "init", "file", str)
        f = read_field(path, grid)
    else:
        raise ConfigError(f"unknown init kind {kind!r}")
    return f.enforce_zero_trace()


def load_config(path: str | Path) -> configparser.ConfigParser:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cfg.read(p)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    return cfg


def params_from_config(cfg) -> tuple[PhysicalParams, Grid2D, int]:
    L = _get(cfg, "domain", "L", float, 1.0)
    nx = _get(cfg, "domain", "nx", int, 32)
    ny = _get(cfg, "domain", "ny", int, nx)
    alpha = _get(cfg, "equation", "alpha", float, 1.0)
    gamma = _get(cfg, "equation", "gamma", float, 1.0)
    h = _get(cfg, "delay", "h", float, 1.0)
    n_rho = _get(cfg, "delay", "n_rho", int, 8)
    try:
        params = PhysicalParams(alpha=alpha, gamma=gamma, L=L, h=h)
        grid = Grid2D(L, nx, ny)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return params, grid, n_rho


def certificate_from_config(cfg, params: PhysicalParams) -> StabilityCertificate:
    family = _get(cfg, "certificate", "family", str, "zk").strip().lower()
    if family == "zk":
        inputs = ZkCertInputs(
            xi=_get(cfg, "certificate", "xi", float),
            mu=_get(cfg, "certificate", "mu", float, 0.5),
            eps=_get(cfg, "certificate", "eps", float, 0.1),
            b_inf=_get(cfg, "certificate", "b_inf", float, 0.0),
            eta_choice=_get(cfg, "certificate", "eta_choice", float, 0.5),
        )
        return certify_zk(params, inputs)
    if family == "mu":
        inputs = MuCertInputs(
            mu1=_get(cfg, "feedback", "mu1", float),
            mu2=_get(cfg, "feedback", "mu2", float),
            xi=_get(cfg, "feedback", "xi", float),
            gn_C=_get(cfg, "certificate", "gn_c", float, 1.0),
            r=_get(cfg, "certificate", "r", float, 0.1),
        )
        return certify_mu(params, inputs)
    raise ConfigError(f"unknown certificate family {family!r}")


def scenario_from_config(cfg, seed: int = 0) -> Scenario:
    params, grid, n_rho = params_from_config(cfg)
    mode = _get(cfg, "feedback", "mode", str, "mu").strip().lower()
    xi = _get(cfg, "feedback", "xi", float, 1.0)
    a_field, a_spec = coefficient_from_config(cfg, grid, "a")

    if mode == "mu":
        mu1 = _get(cfg, "feedback", "mu1", float)
        mu2 = _get(cfg, "feedback", "mu2", float)
        try:
            fb = feedback_mu(a_field, mu1, mu2, xi)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        energy_mode = "mu"
        energy_weight = a_field
        damping = a_field
    elif mode == "ab":
        b_field, _ = coefficient_from_config(cfg, grid, "b")
        fb = feedback_ab(a_field, b_field, xi, augmented=False)
        energy_mode = _get(cfg, "feedback", "energy_mode", str, "zk").strip().lower()
        if energy_mode not in ("zk", "perturbed"):
            raise ConfigError(f"ab mode pairs with zk or perturbed energy, got {energy_mode!r}")
        energy_weight = b_field
        damping = a_field
    else:
        raise ConfigError(f"unknown feedback mode {mode!r}")

    scheme = SchemeConfig(
        dt=_get(cfg, "time", "dt", float),
        t_end=_get(cfg, "time", "t_end", float),
        solver_tol=_get(cfg, "time", "solver_tol", float, 1e-10),
        record_stride=_get(cfg, "time", "record_stride", int, 1),
        snapshot_stride=_get(cfg, "time", "snapshot_stride", int, 0),
        nonlinear=_get(cfg, "time", "nonlinear", bool, True),
        flux_form=_get(cfg, "time", "flux_form", str, "conservative").strip().lower(),
        envelope_tol=_get(cfg, "time", "envelope_tol", float, 1.05),
    )

    attach = cfg.has_section("certificate") and _get(cfg, "certificate", "attach", bool, True)
    cert = None
    if cfg.has_section("certificate"):
        try:
            cert = certificate_from_config(cfg, params)
        except InfeasibleError as exc:
            cert = StabilityCertificate(system="?", xi=xi, feasible=False,
                                        diagnostics={"reason": str(exc)})
    if attach and cert is not None and not cert.feasible:
        raise ConfigError(
            f"attached certificate is infeasible: {cert.diagnostics.get('reason')}"
        )

    zeta0 = initial_field(cfg, grid)
    return Scenario(
        params=params,
        grid=grid,
        n_rho=n_rho,
        scheme=scheme,
        feedback=fb,
        energy_mode=energy_mode,
        energy_weight=energy_weight,
        damping=damping,
        xi=xi,
        zeta0=zeta0,
        history_mode=_get(cfg, "delay", "history", str, "frozen").strip().lower(),
        history_file=_get(cfg, "delay", "history_file", str, "") or None,
        csv_path=_get(cfg, "output", "csv", str, "") or None,
        summary_path=_get(cfg, "output", "summary", str, "") or None,
        certificate_path=_get(cfg, "output", "certificate", str, "") or None,
        snapshot_dir=_get(cfg, "output", "snapshot_dir", str, "") or None,
        attach_certificate=attach,
        certificate=cert,
        floor_on=_get(cfg, "feedback", "floor_on", str, "a").strip().lower(),
        seed=seed,
        meta={"a_spec": a_spec},
    )
