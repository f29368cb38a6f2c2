"""Command-line front end.

    unitri info --d 5 --p 2
    unitri series --d 6 --p 3
    unitri ideals classify --d 5 --p 2
    unitri ideals make partition 3 2 --d 5 --p 2 --out n32.txt
    unitri ideals verify n32.txt
    unitri aut make flip --d 5 --p 2 --out flip.txt
    unitri aut verify flip.txt --policy exhaustive
    unitri aut random --len 6 --seed 7 --d 5 --p 3 --out phi.txt
    unitri aut decompose phi.txt

Reports are tab-separated with a '#' header block.  Exit status is 0 when
every verdict is positive, 1 when one is negative and 2 on usage or parse
errors.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import autgrp as ag
from . import decomp as dc
from . import ideals as idl
from . import ntcore as nt
from .errors import UnitriError
from .gf import field_make

DEFAULT_SEED = 0xC0FFEE


class Report:
    def __init__(self, command: str, field=None, d=None, policy="-", seed=None):
        self.head = [("command", command)]
        if field is not None:
            self.head.append(("field", field.header()))
        if d is not None:
            self.head.append(("d", str(d)))
        self.head += [("policy", policy), ("seed", "-" if seed is None else str(seed))]
        self.rows = []
        self.ok = True

    def row(self, *cols):
        self.rows.append("\t".join(str(c) for c in cols))

    def verdict(self, good: bool):
        self.ok = self.ok and bool(good)
        return "yes" if good else "no"

    def text(self) -> str:
        return "".join(f"# {k}\t{v}\n" for k, v in self.head) + "".join(r + "\n" for r in self.rows)


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _read(path):
    with open(path) as fh:
        return fh.read()


def _emit(args, rep: Report) -> int:
    _write(getattr(args, "report", None), rep.text())
    return 0 if rep.ok else 1


def _ints(text):
    return [int(x, 0) for x in text.split(",") if x.strip()] if text else []


# -- commands -------------------------------------------------------------------------------


def cmd_info(args) -> int:
    f = field_make(args.p, args.k)
    d = args.d
    rep = Report("info", f, d)
    m = d * (d - 1) // 2
    rep.row("order", f.q**m)
    rep.row("entries", m)
    rep.row("gamma_dims", ",".join(str(s.dim) for s in nt.gamma_chain(d, f)))
    for i in range(1, d):
        for b in f.basis():
            rep.row("generator", f"{b}e({i + 1},{i})")
    return _emit(args, rep)


def cmd_series(args) -> int:
    f = field_make(args.p, args.k)
    d = args.d
    rep = Report("series", f, d)
    lower = nt.lower_central_series(d, f)
    upper = nt.upper_central_series(d, f)[::-1]
    gamma = nt.gamma_chain(d, f)
    rep.row("k", "dim_gamma", "lower", "upper")
    n = max(len(lower), len(upper), len(gamma))
    pad = lambda s: s + [None] * (n - len(s))
    for k, (lo, up, ga) in enumerate(zip(pad(lower), pad(upper), pad(gamma)), start=1):
        dim = "-" if ga is None else ga.dim
        rep.row(k, dim, rep.verdict(lo is not None and lo == ga), rep.verdict(up is not None and up == ga))
    rep.row("identical", rep.verdict(rep.ok))
    return _emit(args, rep)


def _ideal_checks(s):
    return {
        "abelian": idl.is_abelian(s),
        "lie_ideal": idl.is_lie_ideal(s),
        "lemma1": idl.lemma1_suite(s).ok,
        "correspondence": idl.correspondence_check(s),
    }


def cmd_ideals_classify(args) -> int:
    f = field_make(args.p, args.k)
    rep = Report("ideals classify", f, args.d)
    fams = tuple(x.strip() for x in args.families.split(",")) if args.families else None
    if fams and "mab3" in fams and f.p != 2:
        rep.row("note", "mab3 skipped: WrongCharacteristic (occurs only in characteristic 2)")
        fams = tuple(x for x in fams if x != "mab3")
    descs = idl.mab_enumerate(args.d, f, families=fams)
    rep.row("tag", "dim", "abelian", "lie_ideal", "maximal")
    for s in descs:
        rep.row(s.tag_str(), s.dim, "yes" if idl.is_abelian(s) else "no",
                "yes" if idl.is_lie_ideal(s) else "no", "yes" if s.maximal else "no")
    return _emit(args, rep)


def cmd_ideals_make(args) -> int:
    f = field_make(args.p, args.k)
    build = {"partition": idl.partition, "mab2": idl.mab2, "mab3": idl.mab3,
             "gamma": idl.gamma_ideal}[args.shape]
    s = build(*args.params, args.d, f)
    _write(args.out, idl.format_ideal(s))
    return 0


def cmd_ideals_verify(args) -> int:
    s = idl.parse_ideal(_read(args.file))
    rep = Report("ideals verify", s.field, s.d)
    rep.row("tag", s.tag_str())
    for name, good in _ideal_checks(s).items():
        rep.row(name, rep.verdict(good))
    rep.row("maximal", rep.verdict(idl.maximality_oracle(s)))
    return _emit(args, rep)


def _make_aut(args, f):
    d, fam = args.d, args.family
    if fam == "flip":
        return ag.make_flip(d, f)
    if fam == "identity":
        return ag.identity(d, f)
    if fam == "diag":
        return ag.make_diag(_ints(args.diag) or [1] * d, f)
    if fam == "field":
        return ag.make_field(d, f, args.j)
    if fam == "inner":
        return ag.make_inner(nt.NtMat(d, f, _ints(args.g) or None))
    if fam == "central":
        flat = _ints(args.lam) or [0] * ((d - 1) * f.k)
        if len(flat) != (d - 1) * f.k:
            raise argparse.ArgumentTypeError(f"--lam needs {(d - 1) * f.k} values")
        return ag.make_central(d, f, [flat[i * f.k:(i + 1) * f.k] for i in range(d - 1)])
    if fam == "extremal-odd":
        return ag.make_extremal_odd(d, f, args.a1, args.a2)
    if fam == "extremal-even":
        return ag.make_extremal_even(d, f, args.a1, args.a2)
    if fam == "extremal-even-shape":
        return ag.extremal_even_shape(d, f, args.a1, args.a2)
    raise argparse.ArgumentTypeError(f"unknown family {fam}")


def cmd_aut_make(args) -> int:
    f = field_make(args.p, args.k)
    phi = _make_aut(args, f)
    _write(args.out, ag.format_aut(phi))
    return 0


def _policy(args):
    if args.policy == "sampled":
        return ag.sampled(args.samples, args.seed)
    return args.policy


def _fmt_mat(a):
    return ";".join(" ".join(str(a[i, j]) for j in range(1, i)) for i in range(2, a.d + 1))


def cmd_aut_verify(args) -> int:
    phi = ag.parse_aut(_read(args.file))
    policy = _policy(args)
    r = ag.verify(phi, policy)
    rep = Report("aut verify", phi.field, phi.d, policy, r.seed)
    rep.row("verdict", "passed" if r.passed else "failed")
    rep.verdict(r.passed)
    for name, val in r.checks.items():
        rep.row(name, val if not isinstance(val, bool) else ("yes" if val else "no"))
    if not r.passed:
        rep.row("reason", r.reason)
        if r.witness is not None:
            rep.row("witness_a", _fmt_mat(r.witness[0]))
            rep.row("witness_b", _fmt_mat(r.witness[1]))
    return _emit(args, rep)


def cmd_aut_compose(args) -> int:
    maps = [ag.parse_aut(_read(p)) for p in args.files]
    out = maps[0]
    for m in maps[1:]:
        out = ag.compose(out, m)
    _write(args.out, ag.format_aut(out))
    return 0


def cmd_aut_decompose(args) -> int:
    phi = ag.parse_aut(_read(args.file))
    rep = Report("aut decompose", phi.field, phi.d, "relations")
    try:
        w = dc.decompose(phi)
    except UnitriError as exc:
        if not isinstance(exc, dc.NotAnAutomorphism):
            raise
        rep.row("stage", exc.stage)
        rep.row("error", str(exc))
        rep.row("recomposition", rep.verdict(False))
        return _emit(args, rep)
    _write(args.out, dc.format_word(w))
    for k, v in w.diagnostics.items():
        rep.row(k, rep.verdict(v))
    rep.row("recomposition", "equal" if w.diagnostics["recomposed"] else "differ")
    return _emit(args, rep)


def cmd_aut_random(args) -> int:
    f = field_make(args.p, args.k)
    rng = np.random.default_rng(args.seed)
    elems = dc.random_word(rng, args.d, f, args.len)
    phi = dc.eval_elems(elems, args.d, f)
    _write(args.out, ag.format_aut(phi))
    rep = Report("aut random", f, args.d, "-", args.seed)
    rep.row("n", "family", "params")
    for n, e in enumerate(elems):
        params = [(_fmt_mat(x) if isinstance(x, nt.NtMat) else x) for x in e.params]
        rep.row(n, e.kind, " ".join(str(x) for x in params) or "-")
    if args.word_out or args.out:
        _write(args.word_out, rep.text())
    return 0


# -- parser -----------------------------------------------------------------------------------


def _group_args(p, d_default=5):
    p.add_argument("--d", type=int, default=d_default, help="matrix size")
    p.add_argument("--p", type=int, default=2, help="field characteristic")
    p.add_argument("--k", type=int, default=1, help="field degree")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="unitri", description="Unitriangular groups over finite fields.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="group order, Gamma dimensions, generators")
    _group_args(p)
    p.add_argument("--report", default=None)
    p.set_defaults(fn=cmd_info)

    p = sub.add_parser("series", help="compare lower, upper central series and the Gamma chain")
    _group_args(p)
    p.add_argument("--report", default=None)
    p.set_defaults(fn=cmd_series)

    ideals = sub.add_parser("ideals", help="maximal abelian ideals").add_subparsers(dest="sub", required=True)
    p = ideals.add_parser("classify")
    _group_args(p)
    p.add_argument("--families", default=None, help="comma list from partition,mab2,mab3")
    p.add_argument("--report", default=None)
    p.set_defaults(fn=cmd_ideals_classify)
    p = ideals.add_parser("make")
    p.add_argument("shape", choices=["partition", "mab2", "mab3", "gamma"])
    p.add_argument("params", type=int, nargs="+")
    _group_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_ideals_make)
    p = ideals.add_parser("verify")
    p.add_argument("file")
    p.add_argument("--report", default=None)
    p.set_defaults(fn=cmd_ideals_verify)

    aut = sub.add_parser("aut", help="automorphisms").add_subparsers(dest="sub", required=True)
    p = aut.add_parser("make")
    p.add_argument("family", choices=["identity", "flip", "diag", "field", "inner", "central",
                                      "extremal-odd", "extremal-even", "extremal-even-shape"])
    _group_args(p)
    p.add_argument("--diag", default=None, help="comma list d_1..d_d")
    p.add_argument("--j", type=int, default=0, help="Frobenius exponent")
    p.add_argument("--g", default=None, help="packed entries of the conjugator")
    p.add_argument("--lam", default=None, help="Lam_i(b_t), i then t ascending")
    p.add_argument("--a1", type=int, default=1)
    p.add_argument("--a2", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_aut_make)
    p = aut.add_parser("verify")
    p.add_argument("file")
    p.add_argument("--policy", choices=["relations", "exhaustive", "sampled"], default="relations")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
    p.add_argument("--report", default=None)
    p.set_defaults(fn=cmd_aut_verify)
    p = aut.add_parser("compose", help="apply the files left to right")
    p.add_argument("files", nargs="+")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_aut_compose)
    p = aut.add_parser("decompose")
    p.add_argument("file")
    p.add_argument("--out", default=None, help="word file (default: stdout)")
    p.add_argument("--report", default=None)
    p.set_defaults(fn=cmd_aut_decompose)
    p = aut.add_parser("random")
    _group_args(p)
    p.add_argument("--len", type=int, default=6)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
    p.add_argument("--out", default=None)
    p.add_argument("--word-out", default=None, help="listing of the generated word (default: stdout when --out is set)")
    p.set_defaults(fn=cmd_aut_random)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if hasattr(args, "d") and args.d < 2:
        ap.error("--d must be at least 2")
    try:
        return args.fn(args)
    except (UnitriError, OSError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"unitri: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
