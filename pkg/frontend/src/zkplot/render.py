"""Render energy-decay figures from simulator CSV + JSON summary files.

The CSV header must match the simulator schema exactly; the summary is only
read for the certified envelope constants and the fitted rate.  Output is
vector (SVG) by default so figures diff cleanly in review; the energy and
envelope curves carry stable SVG ids ("energy-curve", "envelope-curve") that
downstream golden checks key on.  Inputs are never modified and the output
file is replaced atomically.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

EXPECTED_HEADER = (
    "t,E_total,E_state,E_delay,V_lyap,V1,V2,flux_x0,flux_y0,linf_state"
)


class SchemaError(ValueError):
    """CSV header or shape does not match the simulator schema."""


@dataclass
class PlotJob:
    csv_path: str
    summary_path: str
    out_path: str
    log_scale: bool = True
    components: tuple[str, ...] = ("E_total",)
    extra: dict = field(default_factory=dict)


def load_csv(path: str) -> dict[str, np.ndarray]:
    text = Path(path).read_text().splitlines()
    if not text:
        raise SchemaError(f"{path} is empty")
    header = text[0].strip()
    if header != EXPECTED_HEADER:
        got = header.split(",")
        expected = EXPECTED_HEADER.split(",")
        for i, name in enumerate(expected):
            if i >= len(got) or got[i] != name:
                found = got[i] if i < len(got) else "<missing>"
                raise SchemaError(
                    f"column {i + 1} is {found!r}, expected {name!r}"
                )
        raise SchemaError(f"unexpected trailing columns: {got[len(expected):]}")
    rows = [line for line in text[1:] if line.strip()]
    if not rows:
        raise SchemaError(f"{path} has a header but no data rows")
    data = np.array([[float(v) for v in line.split(",")] for line in rows])
    if data.shape[1] != len(EXPECTED_HEADER.split(",")):
        raise SchemaError(f"row width {data.shape[1]} does not match the header")
    return {name: data[:, i] for i, name in enumerate(EXPECTED_HEADER.split(","))}


def load_summary(path: str) -> dict:
    return json.loads(Path(path).read_text())


def render_decay(job: PlotJob) -> str:
    """Write the decay figure and return the output path."""
    data = load_csv(job.csv_path)
    summary = load_summary(job.summary_path)
    t = data["t"]

    fig, ax = plt.subplots(figsize=(7.0, 4.4))
    for name in job.components:
        if name not in data:
            raise SchemaError(f"unknown component {name!r}")
        (line,) = ax.plot(t, data[name], lw=1.6, label=name)
        if name == "E_total":
            line.set_gid("energy-curve")

    theta = summary.get("theta_cert")
    kappa = summary.get("kappa_cert")
    if theta is not None and kappa is not None:
        e0 = data["E_total"][0]
        envelope = kappa * e0 * np.exp(-2.0 * theta * t)
        (env_line,) = ax.plot(
            t, envelope, "k--", lw=1.2,
            label=rf"envelope $\kappa E(0) e^{{-2\theta t}}$, $\theta$={theta:.4g}",
        )
        env_line.set_gid("envelope-curve")

    rate = summary.get("rate_fit")
    if rate is not None:
        ax.annotate(
            f"fitted rate = {rate:.4g}",
            xy=(0.98, 0.95), xycoords="axes fraction",
            ha="right", va="top", fontsize=9,
        ).set_gid("rate-annotation")

    if job.log_scale:
        positive = data["E_total"][data["E_total"] > 0]
        if positive.size:
            ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.legend(loc="lower left", fontsize=8)
    status = summary.get("status", "?")
    ax.set_title(f"energy decay ({status})", fontsize=10)
    fig.tight_layout()

    out = Path(job.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fmt = out.suffix.lstrip(".").lower() or "svg"
    fd, tmp_name = tempfile.mkstemp(
        prefix=out.stem + ".", suffix=f".tmp.{fmt}", dir=out.parent
    )
    os.close(fd)
    try:
        fig.savefig(tmp_name, format=fmt)
        os.replace(tmp_name, out)
    finally:
        plt.close(fig)
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
    return str(out)
