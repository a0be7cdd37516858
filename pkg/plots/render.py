#!/usr/bin/env python3
"""Render the standard figures from normkam CSV/JSON artifacts.

Usage: render.py <kind> <input> <output.svg>

Kinds and their input schemas (CSV with header row):

  residual-decay       decay.csv      columns: step, s, d [, schedule_d]
                       log-log decay step plot d_{n+1} vs d_n with the
                       fitted slope annotated and the 4/3 reference line.
  twist-fit            twist.csv      columns: lambda, varsigma_advance,
                       gamma0_analytic, gamma1_analytic [, phase]
                       advance vs 1/lambda scatter, least-squares line,
                       analytic twist line dashed.
  rotation-staircase   twist.csv (derives rotation = advance / 2 pi) or
                       rotation.csv with columns: lambda, rotation
  poincare-section     twist.csv      columns: lambda, r_return, t_return
                       section scatter (t_return, r_return) per lambda.

Rendering is pure: the same input bytes produce the same SVG bytes (fixed
style, salted glyph ids, no timestamps).  Each figure carries the run
manifest hash (or, missing a manifest, the input file hash) as a corner
caption.  Missing columns raise SchemaMismatch naming the column; inputs
with no data rows raise EmptyInput.
"""

import csv
import hashlib
import math
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

KINDS = ("residual-decay", "twist-fit", "rotation-staircase", "poincare-section")


class SchemaMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


def read_csv(path, required):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaMismatch(f"input {path!r} is missing column {col!r}")
        rows = [row for row in reader]
    if not rows:
        raise EmptyInput(f"input {path!r} has no data rows")
    return {col: np.array([float(r[col]) for r in rows]) for col in header
            if col and all(r[col] not in ("", None) for r in rows)}


def provenance(path):
    manifest = path + ".manifest.json"
    target = manifest if os.path.exists(manifest) else path
    digest = hashlib.sha256(open(target, "rb").read()).hexdigest()[:12]
    label = "manifest" if target == manifest else "input"
    return f"{label} {digest}"


def new_figure():
    plt.rcParams.update({
        "svg.hashsalt": "normkam-plots",
        "figure.dpi": 100,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
    })
    return plt.subplots(figsize=(6.0, 4.2))


def finish(fig, ax, title, caption, out_path):
    ax.set_title(title)
    fig.text(0.992, 0.008, caption, ha="right", va="bottom", fontsize=6,
             color="0.35", family="monospace")
    fig.tight_layout(rect=(0, 0.02, 1, 1))
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_residual_decay(data, caption, out_path):
    d = data["d"]
    if np.count_nonzero(d > 0) < 2:
        raise EmptyInput("need at least two positive residual norms")
    pos = d[d > 0]
    x, y = np.log10(pos[:-1]), np.log10(pos[1:])
    fig, ax = new_figure()
    ax.plot(x, y, "o", color="tab:blue", label="measured $d_{n+1}$ vs $d_n$")
    if x.size >= 2:
        slope, intercept = np.polyfit(x, y, 1)
        xs = np.linspace(x.min(), x.max(), 2)
        ax.plot(xs, slope * xs + intercept, "-", color="tab:blue", lw=1,
                label=f"fit slope {slope:.2f}")
        ax.plot(xs, (4.0 / 3.0) * xs + intercept, "--", color="tab:gray", lw=1,
                label="reference slope 4/3")
    ax.set_xlabel(r"$\log_{10} d_n$")
    ax.set_ylabel(r"$\log_{10} d_{n+1}$")
    ax.legend(loc="best")
    finish(fig, ax, "residual decay per normalization step", caption, out_path)


def render_twist_fit(data, caption, out_path):
    inv = 1.0 / data["lambda"]
    adv = data["varsigma_advance"]
    g0 = data["gamma0_analytic"][0]
    g1 = data["gamma1_analytic"][0]
    fig, ax = new_figure()
    ax.plot(inv, adv, ".", ms=4, color="tab:blue", label="section returns")
    slope, intercept = np.polyfit(inv, adv, 1)
    xs = np.linspace(0.0, inv.max() * 1.05, 2)
    ax.plot(xs, slope * xs + intercept, "-", color="tab:blue", lw=1,
            label=rf"fit $\hat\gamma_1$ = {slope:.3f}")
    ax.plot(xs, g0 + g1 * xs, "--", color="tab:red", lw=1,
            label=rf"analytic $\gamma_1$ = {g1:.3f}")
    ax.set_xlabel(r"$1/\lambda$")
    ax.set_ylabel("advance per return")
    ax.legend(loc="best")
    finish(fig, ax, "twist-coefficient regression", caption, out_path)


def render_rotation_staircase(data, caption, out_path):
    lam = data["lambda"]
    if "rotation" in data:
        rot = data["rotation"]
    else:
        rot = data["varsigma_advance"] / (2.0 * math.pi)
    order = np.argsort(lam, kind="stable")
    lam_sorted = lam[order]
    rot_sorted = rot[order]
    uniq = np.unique(lam_sorted)
    mean_rot = np.array([rot_sorted[lam_sorted == v].mean() for v in uniq])
    fig, ax = new_figure()
    ax.step(uniq, mean_rot, where="mid", color="tab:blue", lw=1.2)
    ax.plot(uniq, mean_rot, ".", ms=5, color="tab:blue")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("rotation number")
    finish(fig, ax, "rotation number vs radius", caption, out_path)


def render_poincare_section(data, caption, out_path):
    t_ret = data["t_return"]
    r_ret = data["r_return"]
    lam = data["lambda"]
    fig, ax = new_figure()
    sc = ax.scatter(t_ret, r_ret, c=lam, s=12, cmap="viridis")
    fig.colorbar(sc, ax=ax, label=r"$\lambda$")
    ax.set_xlabel(r"$t$ at section (mod $2\pi$)")
    ax.set_ylabel(r"$r$ at section")
    finish(fig, ax, "Poincare section returns", caption, out_path)


REQUIRED = {
    "residual-decay": ("step", "d"),
    "twist-fit": ("lambda", "varsigma_advance", "gamma0_analytic", "gamma1_analytic"),
    "poincare-section": ("lambda", "r_return", "t_return"),
}

RENDERERS = {
    "residual-decay": render_residual_decay,
    "twist-fit": render_twist_fit,
    "rotation-staircase": render_rotation_staircase,
    "poincare-section": render_poincare_section,
}


def render(kind, input_path, output_path):
    if kind not in KINDS:
        raise SchemaMismatch(f"unknown figure kind {kind!r}; choose from {KINDS}")
    if kind == "rotation-staircase":
        # two accepted schemas: rotation.csv or twist.csv
        with open(input_path, newline="") as fh:
            header = (csv.DictReader(fh).fieldnames) or []
        required = ("lambda", "rotation") if "rotation" in header else \
                   ("lambda", "varsigma_advance")
    else:
        required = REQUIRED[kind]
    data = read_csv(input_path, required)
    RENDERERS[kind](data, provenance(input_path), output_path)
    return output_path


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    if len(argv) != 3:
        sys.stderr.write(__doc__)
        return 1
    kind, inp, out = argv
    try:
        render(kind, inp, out)
    except (SchemaMismatch, EmptyInput, OSError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
