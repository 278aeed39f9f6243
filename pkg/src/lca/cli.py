"""Declarative front end: load definitions from a config file, run checks
and constructions, emit deterministic text and JSON reports.

Config format (line oriented, # comments, blank lines ignored):

    [params]
    Delta
    alpha

    [algebra Vir]
    generators L
    L L : L = 2*lam + del

    [module M over Vir]
    generators m
    L m : m = Delta*lam + del + alpha

    [iop F : W ; M , N]
    m mp : w = 1

Sections must declare their generators before assignments; objects must be
declared before they are referenced.  Missing pair assignments default to 0.

Exit codes: 0 all checks pass, 1 mathematical failure (residual or closure),
2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from importlib import resources

from .algebra import LieConformalAlgebra, StructureError, check_algebra
from .chom import chom_action, dual_module, to_functional
from .intertwining import IntertwiningOperator, check_iop
from .modules import ConformalModule, check_module
from .poly import ParseError, Poly, PolyError, VarTable, parse_poly
from .tensor_first import RewritingBudgetError, TensorConstruction, TruncationTable, induced_module
from .tensor_second import cross_check, tensor_second


class ConfigError(ValueError):
    def __init__(self, path: str, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


@dataclass
class Workspace:
    vt: VarTable
    algebras: dict[str, LieConformalAlgebra] = field(default_factory=dict)
    modules: dict[str, ConformalModule] = field(default_factory=dict)
    iops: dict[str, IntertwiningOperator] = field(default_factory=dict)


_SECTION_RE = re.compile(r"\[\s*(.*?)\s*\]\Z")
_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_ALGEBRA_RE = re.compile(rf"algebra\s+({_IDENT})\Z")
_MODULE_RE = re.compile(rf"module\s+({_IDENT})\s+over\s+({_IDENT})\Z")
_IOP_RE = re.compile(rf"iop\s+({_IDENT})\s*:\s*({_IDENT})\s*;\s*({_IDENT})\s*,\s*({_IDENT})\Z")
_ASSIGN_RE = re.compile(rf"({_IDENT})\s+({_IDENT})\s*:\s*({_IDENT})\s*=\s*(.*)\Z")


def load(path: str) -> Workspace:
    """Parse a config file into a workspace; every error carries file:line."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    params: list[str] = []
    section: tuple | None = None  # ("params",) | ("algebra", name) | ("module", name, alg) | ("iop", ...)
    sec_gens: list[str] | None = None
    sec_rows: list[tuple[int, str, str, str, str]] = []
    pending: list[tuple] = []
    names_seen: set[str] = set()

    def flush(lineno: int) -> None:
        nonlocal section, sec_gens, sec_rows
        if section is None:
            return
        kind = section[0]
        if kind in ("algebra", "module") and sec_gens is None:
            raise ConfigError(path, section[-1], "section needs a 'generators' line before assignments")
        if kind != "params":
            pending.append((section, sec_gens if sec_gens is not None else [], list(sec_rows)))
        section = None
        sec_gens = None
        sec_rows = []

    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            flush(lineno)
            head = m.group(1)
            if head == "params":
                section = ("params",)
                continue
            ma = _ALGEBRA_RE.match(head)
            if ma:
                section = ("algebra", ma.group(1), lineno)
                continue
            mm = _MODULE_RE.match(head)
            if mm:
                section = ("module", mm.group(1), mm.group(2), lineno)
                continue
            mi = _IOP_RE.match(head)
            if mi:
                section = ("iop", mi.group(1), mi.group(2), mi.group(3), mi.group(4), lineno)
                continue
            raise ConfigError(path, lineno, f"unrecognized section header [{head}]")
        if section is None:
            raise ConfigError(path, lineno, "content outside any section")
        if section[0] == "params":
            for p in line.split():
                if not re.match(rf"{_IDENT}\Z", p):
                    raise ConfigError(path, lineno, f"invalid parameter name {p!r}")
                params.append(p)
            continue
        if line.startswith("generators"):
            if section[0] == "iop":
                raise ConfigError(path, lineno, "iop sections take their generators from the modules")
            if sec_gens is not None:
                raise ConfigError(path, lineno, "duplicate generators line")
            sec_gens = line.split()[1:]
            if not sec_gens:
                raise ConfigError(path, lineno, "empty generator list")
            continue
        ma = _ASSIGN_RE.match(line)
        if not ma:
            raise ConfigError(path, lineno, f"expected 'g h : k = expression', got {line!r}")
        sec_rows.append((lineno, *ma.groups()))
    flush(len(lines) + 1)

    try:
        vt = VarTable(params)
    except PolyError as exc:
        raise ConfigError(path, 1, str(exc)) from exc
    ws = Workspace(vt)

    def parse_at(lineno: int, text: str) -> Poly:
        try:
            return parse_poly(text, vt)
        except ParseError as exc:
            raise ConfigError(path, lineno, str(exc)) from exc

    for sec, gens, rows in pending:
        kind = sec[0]
        name = sec[1]
        lineno = sec[-1]
        if (kind, name) in names_seen:
            raise ConfigError(path, lineno, f"duplicate {kind} name {name!r}")
        names_seen.add((kind, name))
        try:
            if kind == "algebra":
                table = {}
                for ln, g1, g2, g3, expr in rows:
                    table.setdefault((g1, g2), {})[g3] = parse_at(ln, expr)
                ws.algebras[name] = LieConformalAlgebra(name, vt, gens, table)
            elif kind == "module":
                alg_name = sec[2]
                if alg_name not in ws.algebras:
                    raise ConfigError(path, lineno, f"unknown algebra {alg_name!r}")
                table = {}
                for ln, g1, g2, g3, expr in rows:
                    table.setdefault((g1, g2), {})[g3] = parse_at(ln, expr)
                ws.modules[name] = ConformalModule(name, ws.algebras[alg_name], gens, table)
            else:
                w_name, m_name, n_name = sec[2], sec[3], sec[4]
                for ref in (w_name, m_name, n_name):
                    if ref not in ws.modules:
                        raise ConfigError(path, lineno, f"unknown module {ref!r}")
                table = {}
                for ln, g1, g2, g3, expr in rows:
                    table.setdefault((g1, g2), {})[g3] = parse_at(ln, expr)
                ws.iops[name] = IntertwiningOperator(
                    name, ws.modules[w_name], ws.modules[m_name], ws.modules[n_name], table
                )
        except StructureError as exc:
            raise ConfigError(path, lineno, str(exc)) from exc
    return ws


def bundled_config(name: str = "virasoro") -> str:
    """Path to a bundled example config (shipped with the package)."""
    return str(resources.files("lca").joinpath(f"data/{name}.lca"))


# -- presentations -------------------------------------------------------------

def module_presentation(M: ConformalModule) -> dict:
    action = {}
    for a, ga in enumerate(M.algebra.gens):
        row = {}
        for j, gj in enumerate(M.gens):
            row[gj] = {M.gens[k]: str(M.table[a][j][k]) for k in range(M.rank) if not M.table[a][j][k].is_zero}
        action[ga] = row
    return {
        "name": M.name,
        "algebra": M.algebra.name,
        "generators": list(M.gens),
        "action": action,
    }


def module_from_presentation(data: dict, algebra: LieConformalAlgebra) -> ConformalModule:
    table = {}
    for ga, row in data["action"].items():
        for gj, targets in row.items():
            table[(ga, gj)] = {gk: parse_poly(expr, algebra.vt) for gk, expr in targets.items()}
    return ConformalModule(data["name"], algebra, data["generators"], table)


def iop_presentation(I: IntertwiningOperator) -> dict:
    table = {}
    for i, um in enumerate(I.m.gens):
        row = {}
        for j, vn in enumerate(I.n.gens):
            row[vn] = {I.w.gens[k]: str(I.table[i][j][k]) for k in range(I.w.rank) if not I.table[i][j][k].is_zero}
        table[um] = row
    return {
        "name": I.name,
        "type": {"w": I.w.name, "m": I.m.name, "n": I.n.name},
        "table": table,
    }


# -- commands ------------------------------------------------------------------

def _parse_trunc(option: str, M: ConformalModule, N: ConformalModule) -> TruncationTable:
    if option.startswith("uniform:"):
        return TruncationTable.uniform(M, N, int(option.split(":", 1)[1]))
    with open(option, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    default = int(data.pop("default", 1))
    levels: dict[tuple[str, str], int] = {}
    for i in range(M.rank):
        for j in range(N.rank):
            levels[(M.gens[i], N.gens[j])] = default
    for key, level in data.items():
        gu, gv = [part.strip() for part in key.split(",")]
        levels[(gu, gv)] = int(level)
    return TruncationTable(M, N, levels)


def _construction_json(res: TensorConstruction, algebra_name: str) -> dict:
    out: dict = {"ok": res.ok, "report": res.report.to_dict()}
    if res.module is not None:
        out["module"] = module_presentation(res.module)
    if res.operator is not None:
        out["operator"] = iop_presentation(res.operator)
    cand = getattr(res, "candidate", None)
    if cand is not None:
        out["candidate"] = {
            "generators": list(cand.gen_names),
            "certificate": {
                f"{ga}.{name}": [str(fp) for fp in row] for (ga, name), row in cand.certificate.items()
            },
            "side_conditions": list(cand.side_conditions),
        }
        if cand.module is not None:
            out["candidate"]["module"] = module_presentation(cand.module)
    return out


def _emit(text_lines: list[str], json_obj: dict | None, json_path: str | None, out) -> None:
    for line in text_lines:
        print(line, file=out)
    if json_path and json_obj is not None:
        payload = json.dumps(json_obj, indent=2) + "\n"
        if json_path == "-":
            out.write(payload)
        else:
            with open(json_path, "w", encoding="utf-8") as fh:
                fh.write(payload)


def run(ws: Workspace, args, out) -> int:
    """Execute one command against a loaded workspace; returns the exit code."""
    cmd = args.command
    if cmd == "check-algebra":
        A = ws.algebras.get(args.name)
        if A is None:
            raise StructureError(f"unknown algebra {args.name!r}")
        report = check_algebra(A)
        _emit([report.summary()], report.to_dict(), args.json, out)
        return 0 if report.passed else 1
    if cmd == "check-module":
        M = ws.modules.get(args.name)
        if M is None:
            raise StructureError(f"unknown module {args.name!r}")
        report = check_module(M)
        _emit([report.summary()], report.to_dict(), args.json, out)
        return 0 if report.passed else 1
    if cmd == "check-iop":
        I = ws.iops.get(args.name)
        if I is None:
            raise StructureError(f"unknown operator {args.name!r}")
        report = check_iop(I)
        _emit([report.summary()], report.to_dict(), args.json, out)
        return 0 if report.passed else 1
    if cmd == "dual":
        M = ws.modules.get(args.name)
        if M is None:
            raise StructureError(f"unknown module {args.name!r}")
        D = dual_module(M)
        lines = [f"dual of {M.name}: rank {D.rank}"]
        for a, ga in enumerate(M.algebra.gens):
            for j, gj in enumerate(D.gens):
                for k, gk in enumerate(D.gens):
                    p = D.table[a][j][k]
                    if not p.is_zero:
                        lines.append(f"  {ga} . {gj} = ({p})*{gk}")
        _emit(lines, module_presentation(D), args.json, out)
        return 0
    if cmd == "chom-act":
        A_elt = None
        for A in ws.algebras.values():
            if args.gen in A.gens:
                A_elt = A.gen(args.gen)
                break
        if A_elt is None:
            raise StructureError(f"unknown algebra generator {args.gen!r}")
        M = ws.modules.get(args.module)
        if M is None:
            raise StructureError(f"unknown module {args.module!r}")
        D = dual_module(M)
        lines = [f"Chom action of {args.gen} on the dual functionals of {M.name}:"]
        payload = {}
        for k in range(D.rank):
            f = to_functional(D.gen_at(k))
            res = chom_action(A_elt, f, "lam")
            for j in range(M.rank):
                label = f"({args.gen}_lam {D.gens[k]})_mu({M.gens[j]})"
                lines.append(f"  {label} = {res.matrix[0][j]}")
                payload[label] = str(res.matrix[0][j])
        _emit(lines, payload, args.json, out)
        return 0
    if cmd == "tensor":
        M = ws.modules.get(args.left)
        N = ws.modules.get(args.right)
        if M is None or N is None:
            missing = args.left if M is None else args.right
            raise StructureError(f"unknown module {missing!r}")
        trunc = _parse_trunc(args.trunc, M, N)
        lines: list[str] = []
        payload: dict = {"command": "tensor", "left": M.name, "right": N.name, "method": args.method}
        status = 0
        results: dict[str, TensorConstruction] = {}
        if args.method in ("first", "both"):
            res = induced_module(M, N, trunc)
            results["first"] = res
            payload["first"] = _construction_json(res, M.algebra.name)
            lines.append(res.report.summary())
            if res.module is not None:
                lines.extend(_module_lines(res.module))
            status = max(status, 0 if res.ok else 1)
        if args.method in ("second", "both"):
            res = tensor_second(M, N)
            results["second"] = res
            payload["second"] = _construction_json(res, M.algebra.name)
            lines.append(res.report.summary())
            if res.module is not None:
                lines.extend(_module_lines(res.module))
            status = max(status, 0 if res.ok else 1)
        if args.method == "both":
            cc = cross_check(M, N, trunc)
            payload["cross_check"] = cc.to_dict()
            lines.append(cc.summary())
            status = max(status, 0 if cc.passed else 1)
        _emit(lines, payload, args.json, out)
        return status
    if cmd == "report":
        lines = []
        payload: dict = {"algebras": {}, "modules": {}, "iops": {}}
        status = 0
        for name, A in ws.algebras.items():
            rep = check_algebra(A)
            payload["algebras"][name] = rep.to_dict()
            lines.append(rep.summary())
            status = max(status, 0 if rep.passed else 1)
        for name, M in ws.modules.items():
            rep = check_module(M)
            payload["modules"][name] = {"report": rep.to_dict(), "presentation": module_presentation(M)}
            lines.append(rep.summary())
            status = max(status, 0 if rep.passed else 1)
        for name, I in ws.iops.items():
            rep = check_iop(I)
            payload["iops"][name] = {"report": rep.to_dict(), "presentation": iop_presentation(I)}
            lines.append(rep.summary())
            status = max(status, 0 if rep.passed else 1)
        _emit(lines, payload, args.json, out)
        return status
    raise StructureError(f"unknown command {cmd!r}")


def _module_lines(M: ConformalModule) -> list[str]:
    lines = [f"  module {M.name}: rank {M.rank}"]
    for a, ga in enumerate(M.algebra.gens):
        for j in range(M.rank):
            for k in range(M.rank):
                p = M.table[a][j][k]
                if not p.is_zero:
                    lines.append(f"    {ga} . {M.gens[j]} = ({p})*{M.gens[k]}")
    return lines


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lca",
        description="Exact checks and constructions for finite Lie conformal algebras.",
    )
    parser.add_argument("config", help="path to a definitions file")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("check-algebra", "verify skew-commutativity and Jacobi for an algebra"),
        ("check-module", "verify the module axioms"),
        ("check-iop", "verify the intertwining-operator Jacobi identity"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("name")
        p.add_argument("--json", default=None)

    p = sub.add_parser("dual", help="print the conformal dual of a module")
    p.add_argument("name")
    p.add_argument("--json", default=None)

    p = sub.add_parser("chom-act", help="Chom action of a generator on a module's dual functionals")
    p.add_argument("gen")
    p.add_argument("module")
    p.add_argument("--json", default=None)

    p = sub.add_parser("tensor", help="construct the tensor product of two modules")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--method", choices=("first", "second", "both"), default="both")
    p.add_argument("--trunc", default="uniform:1",
                   help="uniform:<k> or a JSON file of per-pair levels")
    p.add_argument("--json", default=None)

    p = sub.add_parser("report", help="run every check in the workspace")
    p.add_argument("--json", default=None)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        ws = load(args.config)
        return run(ws, args, out)
    except (OSError, ValueError, RewritingBudgetError) as exc:
        # covers config/parse errors, unknown names, bad options, budget overruns
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
