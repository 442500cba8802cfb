#!/usr/bin/env python3
"""Turn harness CSV outputs into publication-style figures.

Usage:
    render.py --kind <hat_t|diagrams|fov_overlay|surface|workprec>
              --in <csv...> --out <png> [--labels <name...>]

The renderer consumes only the documented CSV schemas and performs no
numerical work beyond axis transforms (negation of diagram boundaries in
overlays, log scales).  Schema mismatches exit nonzero.

Input schemas per kind:
    hat_t        one CSV:  y,p,hat_t
    diagrams     one CSV per curve:  theta,re_mu,im_mu,residual
    fov_overlay  first CSV theta,re,im; remaining CSVs diagram boundaries
    surface      one CSV:  t,u_0,...,u_{d-1}   (trajectory)
    workprec     one CSV:  method,k,error,wall_time,n_solves,
                           n_factorizations,observed_order
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("hat_t", "diagrams", "fov_overlay", "surface", "workprec")


class SchemaError(Exception):
    pass


@dataclass
class FigureRecipe:
    kind: str
    inputs: list
    output: str
    labels: list = field(default_factory=list)
    dpi: int = 150


def read_csv(path, required_columns):
    with open(path) as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: empty CSV")
    header = [h.strip() for h in rows[0]]
    for col in required_columns:
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r} (have {header})")
    body = rows[1:]
    if not body:
        raise SchemaError(f"{path}: no data rows")
    return header, body


def numeric_columns(header, body, names):
    idx = [header.index(n) for n in names]
    try:
        return [np.array([float(row[i]) for row in body]) for i in idx]
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"non-numeric or ragged data: {exc}") from exc


def label_for(recipe, i, default):
    return recipe.labels[i] if i < len(recipe.labels) else default


def build_hat_t(recipe, ax):
    header, body = read_csv(recipe.inputs[0], ("y", "p", "hat_t"))
    y, p, val = numeric_columns(header, body, ("y", "p", "hat_t"))
    for pi in sorted(set(p)):
        mask = p == pi
        ax.semilogx(-y[mask], val[mask], label=f"order {int(pi)}")
    ax.set_xlabel("-y")
    ax.set_ylabel("y T(y)")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    return np.concatenate([-y, val])


def _read_boundary(path):
    header, body = read_csv(path, ("theta", "re_mu", "im_mu"))
    theta, re, im = numeric_columns(header, body, ("theta", "re_mu", "im_mu"))
    order = np.argsort(theta, kind="stable")
    return re[order], im[order]


def build_diagrams(recipe, ax):
    pts = []
    for i, path in enumerate(recipe.inputs):
        re, im = _read_boundary(path)
        ax.plot(re, im, ".", markersize=2, label=label_for(recipe, i, path))
        pts.append(re)
        pts.append(im)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)
    return np.concatenate(pts)


def build_fov_overlay(recipe, ax):
    if len(recipe.inputs) < 2:
        raise SchemaError("fov_overlay needs one FOV CSV plus diagram CSVs")
    header, body = read_csv(recipe.inputs[0], ("theta", "re", "im"))
    theta, re, im = numeric_columns(header, body, ("theta", "re", "im"))
    closed_re = np.append(re, re[0])
    closed_im = np.append(im, im[0])
    ax.plot(closed_re, closed_im, "-", lw=2, color="k",
            label=label_for(recipe, 0, "field of values"))
    pts = [re, im]
    for i, path in enumerate(recipe.inputs[1:], start=1):
        bre, bim = _read_boundary(path)
        # overlay draws the negated diagram on the same axes
        ax.plot(-bre, -bim, ".", markersize=2, label=label_for(recipe, i, path))
        pts.append(-bre)
        pts.append(-bim)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)
    return np.concatenate(pts)


def build_surface(recipe, ax):
    header, body = read_csv(recipe.inputs[0], ("t",))
    state_cols = [h for h in header if h.startswith("u_")]
    if not state_cols:
        raise SchemaError("trajectory CSV has no state columns")
    cols = numeric_columns(header, body, ["t"] + state_cols)
    t = cols[0]
    U = np.stack(cols[1:], axis=1)
    mesh = ax.pcolormesh(np.arange(U.shape[1]), t, U, shading="nearest")
    ax.figure.colorbar(mesh, ax=ax)
    ax.set_xlabel("space index")
    ax.set_ylabel("t")
    return np.concatenate([t, np.arange(U.shape[1]).astype(float)])


def build_workprec(recipe, ax):
    header, body = read_csv(recipe.inputs[0], ("method", "k", "error", "wall_time"))
    midx = header.index("method")
    methods = []
    for row in body:
        if row[midx] not in methods:
            methods.append(row[midx])
    k, err, wt = numeric_columns(header, body, ("k", "error", "wall_time"))
    names = np.array([row[midx] for row in body])
    for m in methods:
        mask = names == m
        ax.loglog(wt[mask], err[mask], "o-", label=m)
    ax.set_xlabel("wall time [s]")
    ax.set_ylabel("relative error")
    ax.legend(fontsize=7)
    ax.grid(True, which="both", alpha=0.3)
    return np.concatenate([wt, err])


_BUILDERS = {
    "hat_t": build_hat_t,
    "diagrams": build_diagrams,
    "fov_overlay": build_fov_overlay,
    "surface": build_surface,
    "workprec": build_workprec,
}


def build_figure(recipe):
    """Build the matplotlib figure for a recipe; returns (fig, ax)."""
    if recipe.kind not in _BUILDERS:
        raise SchemaError(f"unknown kind {recipe.kind!r}; known: {KINDS}")
    if not recipe.inputs:
        raise SchemaError("no input CSVs")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    _BUILDERS[recipe.kind](recipe, ax)
    fig.tight_layout()
    return fig, ax


def render(recipe):
    """Render a recipe to its output image; returns the output path."""
    fig, _ = build_figure(recipe)
    fig.savefig(recipe.output, dpi=recipe.dpi)
    plt.close(fig)
    return recipe.output


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--labels", nargs="*", default=[])
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    recipe = FigureRecipe(
        kind=args.kind, inputs=args.inputs, output=args.out,
        labels=args.labels, dpi=args.dpi,
    )
    try:
        render(recipe)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
