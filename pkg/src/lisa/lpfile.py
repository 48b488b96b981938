"""Writer for the CPLEX-style LP text format.

Numbers are written with ``repr`` so a file read back by an external solver
carries exactly the same coefficients.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import TYPE_CHECKING, TextIO

import numpy as np

from lisa.lp import EQ, StandardFormLP

if TYPE_CHECKING:
    from lisa.milp import MilpProblem

_BAD = re.compile(r"[^A-Za-z0-9_.]")
_TERMS_PER_LINE = 6


def _names(raw, prefix: str, n: int) -> list[str]:
    if raw is None:
        return [f"{prefix}{i}" for i in range(n)]
    out, seen = [], set()
    for i, name in enumerate(raw):
        s = _BAD.sub("_", str(name))
        if not s or s[0].isdigit() or s[0] in ".eE":
            s = f"{prefix}_{s}"
        if s in seen:
            s = f"{s}_{i}"
        seen.add(s)
        out.append(s)
    return out


def _num(v: float) -> str:
    if v == np.inf:
        return "+inf"
    if v == -np.inf:
        return "-inf"
    return repr(float(v))


def _linear(coefs, names) -> list[str]:
    terms = []
    for j, v in coefs:
        sign = "-" if v < 0 else "+"
        terms.append(f"{sign} {_num(abs(v))} {names[j]}")
    return terms


def _emit(out: TextIO, head: str, terms: list[str], tail: str = ""):
    line = f" {head}"
    chunks = [terms[i : i + _TERMS_PER_LINE] for i in range(0, len(terms), _TERMS_PER_LINE)] or [[]]
    for k, chunk in enumerate(chunks):
        body = " ".join(chunk)
        if k == 0:
            out.write(f"{line} {body}".rstrip())
        else:
            out.write(f"\n   {body}")
    out.write(f" {tail}\n" if tail else "\n")


def write_lp(
    path: str | Path,
    lp: StandardFormLP,
    binaries=(),
    sos2=(),
    use_names: bool = True,
):
    cn = _names(lp.col_names if use_names else None, "x", lp.n_cols)
    rn = _names(lp.row_names if use_names else None, "c", lp.n_rows)
    csr = lp.A.tocsr()
    with open(path, "w", encoding="utf-8") as out:
        out.write("\\ written by lisa\n")
        out.write("Minimize\n")
        obj = _linear([(j, v) for j, v in enumerate(lp.c) if v != 0.0], cn)
        if lp.offset != 0.0:
            obj.append(f"{'-' if lp.offset < 0 else '+'} {_num(abs(lp.offset))}")
        if not obj:
            obj = [f"+ 0.0 {cn[0]}"] if lp.n_cols else []
        _emit(out, "obj:", obj)
        out.write("Subject To\n")
        for i in range(lp.n_rows):
            lo, hi = csr.indptr[i], csr.indptr[i + 1]
            terms = _linear(zip(csr.indices[lo:hi], csr.data[lo:hi]), cn)
            if not terms:
                terms = [f"+ 0.0 {cn[0]}"]
            op = "=" if lp.senses[i] == EQ else "<="
            _emit(out, f"{rn[i]}:", terms, f"{op} {_num(lp.b[i])}")
        out.write("Bounds\n")
        for j in range(lp.n_cols):
            lo, hi = lp.lb[j], lp.ub[j]
            if lo == 0.0 and hi == np.inf:
                continue
            if lo == -np.inf and hi == np.inf:
                out.write(f" {cn[j]} free\n")
            elif lo == hi:
                out.write(f" {cn[j]} = {_num(lo)}\n")
            else:
                out.write(f" {_num(lo)} <= {cn[j]} <= {_num(hi)}\n")
        if len(binaries):
            out.write("Binaries\n")
            for j in binaries:
                out.write(f" {cn[j]}\n")
        if len(sos2):
            out.write("SOS\n")
            for g, group in enumerate(sos2):
                members = " ".join(f"{cn[j]}:{k + 1}" for k, j in enumerate(group))
                out.write(f" s{g}: S2:: {members}\n")
        out.write("End\n")


def write_milp(path: str | Path, problem: "MilpProblem", use_names: bool = True):
    write_lp(path, problem.lp, problem.binaries, problem.sos2, use_names)
