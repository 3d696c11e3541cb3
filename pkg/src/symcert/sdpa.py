"""Dump/load of compiled conic problems in SDPA sparse format (.dat-s).

Our standard form  min <c, x>  s.t.  <A_i, x> = b_i, x in S^n_+ x R^p_+  is the
SDPA *dual* problem  max <F0, Y>  s.t.  <F_i, Y> = c_i  with F0 = -c, F_i = A_i
and c_i = b_i. Block 1 is the PSD block (size n), block 2 the diagonal LP block
(written with negative size -p). Only the upper triangle is stored.

A comment line "* value_scale <s>" records the factor applied to the
objective when reporting (0.5 for problems compiled from Hermitian data).
See docs/formats.md.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .conic import ConicProblem, StandardForm, compile_problem

ZERO_TOL = 0.0


def _blocks(sf: StandardForm) -> list[int]:
    out = []
    if sf.n:
        out.append(sf.n)
    if sf.p:
        out.append(-sf.p)
    return out


def _entries(mat_no: int, psd: np.ndarray, lp: np.ndarray, sf: StandardForm):
    blk = 1
    if sf.n:
        iu, ju = np.triu_indices(sf.n)
        vals = psd[iu, ju]
        for i, j, v in zip(iu, ju, vals):
            if v != ZERO_TOL:
                yield f"{mat_no} {blk} {i + 1} {j + 1} {float(v)!r}"
        blk += 1
    if sf.p:
        for i, v in enumerate(lp):
            if v != ZERO_TOL:
                yield f"{mat_no} {blk} {i + 1} {i + 1} {float(v)!r}"


def write_sdpa(problem: ConicProblem | StandardForm, path) -> Path:
    sf = compile_problem(problem) if isinstance(problem, ConicProblem) else problem
    path = Path(path)
    lines = [
        '"symcert conic problem (SDPA sparse; our primal is the SDPA dual)',
        f"* value_scale {float(sf.scale)!r}",
        str(sf.m),
        str(len(_blocks(sf))),
        " ".join(str(b) for b in _blocks(sf)),
        " ".join(repr(float(v)) for v in sf.b) if sf.m else "",
    ]
    lines.extend(_entries(0, -sf.c_psd, -sf.c_lp, sf))
    for i in range(sf.m):
        lines.extend(_entries(i + 1, sf.A_psd[i], sf.A_lp[i], sf))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_sdpa(path) -> StandardForm:
    scale = 1.0
    body = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line[0] in '"*':
            parts = line.lstrip('"*').split()
            if len(parts) == 2 and parts[0] == "value_scale":
                scale = float(parts[1])
            continue
        body.append(line.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " "))

    m = int(body[0].split()[0])
    nblocks = int(body[1].split()[0])
    sizes = [int(float(t)) for t in body[2].split()[:nblocks]]
    n = next((s for s in sizes if s > 0), 0)
    p = next((-s for s in sizes if s < 0), 0)
    if sum(1 for s in sizes if s > 0) > 1 or sum(1 for s in sizes if s < 0) > 1:
        raise ValueError("only one PSD block and one LP block are supported")
    b = np.array([float(t) for t in body[3].split()[:m]]) if m else np.zeros(0)
    psd_index = next((k + 1 for k, s in enumerate(sizes) if s > 0), None)
    lp_index = next((k + 1 for k, s in enumerate(sizes) if s < 0), None)

    F_psd = np.zeros((m + 1, n, n))
    F_lp = np.zeros((m + 1, p))
    for line in body[4:]:
        t = line.split()
        k, blk, i, j, v = int(t[0]), int(t[1]), int(t[2]) - 1, int(t[3]) - 1, float(t[4])
        if blk == psd_index:
            F_psd[k, i, j] = v
            F_psd[k, j, i] = v
        elif blk == lp_index:
            if i != j:
                raise ValueError("off-diagonal entry in LP block")
            F_lp[k, i] = v
        else:
            raise ValueError(f"unknown block {blk}")
    return StandardForm(-F_psd[0], -F_lp[0], F_psd[1:], F_lp[1:], b, scale=scale)
