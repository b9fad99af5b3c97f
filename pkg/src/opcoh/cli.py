"""Command-line front end.

    opcoh basis ass 4
    opcoh pimatrix lie 4 --out results
    opcoh graph lie 4 --dual --orient --dot
    opcoh words ass 4 --labels associator
    opcoh check-all
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from . import graphs as G
from . import trees as T
from . import words as W
from .checks import run_all
from .coherence import InternalInconsistency, coherence_constraints
from .duality import NotQuadratic, duality_report
from .linalg import SparseMatrix
from .presentation import Presentation, PresentationError, formula_module_dim, load, parse_presentation

ARITY_CAP = 7


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    source: str = ""
    arity: int | None = None
    out: Path | None = None
    force: bool = False
    mode: str | None = None
    aliases: bool = True
    flags: dict = field(default_factory=dict)


# -- helpers -----------------------------------------------------------------

def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(cfg: RunConfig) -> Presentation:
    p = load(cfg.source)
    if cfg.mode and cfg.mode != p.mode:
        text = p.to_text().replace(f"mode {p.mode}", f"mode {cfg.mode}", 1)
        p = parse_presentation(text)
    return p


def _arity(cfg: RunConfig, default: int | None = None) -> int:
    n = cfg.arity if cfg.arity is not None else default
    if n is None:
        raise UsageError(f"{cfg.command} needs an arity")
    if n < 1:
        raise UsageError("arity must be positive")
    if n > ARITY_CAP and not cfg.force:
        raise UsageError(f"arity {n} exceeds the cap {ARITY_CAP}; pass --force to go ahead")
    return n


def header(p: Presentation, n: int | None) -> str:
    ar = f" | arity {n}" if n is not None else ""
    return f"# opcoh {__version__} | {p.name} | sha256 {p.digest()}{ar}\n"


def _emit(cfg: RunConfig, name: str, text: str, out) -> None:
    if cfg.out is None:
        out.write(text)
    else:
        path = cfg.out / name
        write_atomic(path, text)
        out.write(f"wrote {path}\n")


# -- commands ----------------------------------------------------------------

def cmd_basis(cfg: RunConfig, out) -> int:
    p = _load(cfg)
    n = _arity(cfg)
    trees = p.tree_basis(n)
    mods = p.module_basis(n) if n >= p.relation_arity else []
    lines = [header(p, n).rstrip("\n")]
    lines.append(f"free operad, arity {n}: {len(trees)} trees")
    frames = [p.alias_frame(k, n) if cfg.aliases else None for k in ("tree", "module")]
    tree_alias, mod_alias = ({t: lab for lab, (t, _) in (f or {}).items()} for f in frames)
    for t in trees:
        lines.append(f"  {T.encode(t)}" + (f"  [{tree_alias[t]}]" if t in tree_alias else ""))
    lines.append(f"free module, arity {n}: {len(mods)} monomials")
    for m in mods:
        lines.append(f"  {T.encode(m)}" + (f"  [{mod_alias[m]}]" if m in mod_alias else ""))
    if n == 4 and p.is_quadratic():
        ft, fm = formula_module_dim(p)
        verdict = "agree" if (ft, fm) == (len(trees), len(mods)) else "DISAGREE"
        lines.append(f"closed formulas: {ft} trees, {fm} monomials ({verdict})")
    _emit(cfg, f"{p.name}-basis-{n}.txt", "\n".join(lines) + "\n", out)
    if cfg.out is not None:
        write_atomic(cfg.out / f"{p.name}.pres", p.to_text())
    return 0


def cmd_pimatrix(cfg: RunConfig, out) -> int:
    p = _load(cfg)
    n = _arity(cfg)
    m = G.labeled_matrix(p, n, cfg.aliases)
    _emit(cfg, f"{p.name}-pi-{n}.csv", m.to_csv(), out)
    return 0


def cmd_coherence(cfg: RunConfig, out) -> int:
    p = _load(cfg)
    n = _arity(cfg)
    rep = coherence_constraints(p, n)
    if cfg.flags.get("json"):
        _emit(cfg, f"{p.name}-coherence-{n}.json", rep.to_json() + "\n", out)
    elif cfg.flags.get("csv"):
        rows = p.module_basis(n)
        idx = {T.encode(r): i for i, r in enumerate(rows)}
        entries = {(k, idx[lab]): c for k, combo in enumerate(rep.constraints) for lab, c in combo}
        m = SparseMatrix(len(rep.constraints), len(rows), entries,
                         tuple(f"C{k + 1}" for k in range(len(rep.constraints))),
                         tuple(T.encode(r) for r in rows))
        _emit(cfg, f"{p.name}-coherence-{n}.csv", m.to_csv(), out)
    else:
        _emit(cfg, f"{p.name}-coherence-{n}.txt", header(p, n) + rep.to_text(), out)
    return 0


def _graph_summary(g: G.TelAGraph) -> list[str]:
    h = G.h1_dims(g)
    return [
        f"{g.kind} Tel-A-graph: {len(g.vertices)} vertices, {len(g.edges)} edges, "
        f"{len(g.components())} components",
        f"degrees {sorted(set(g.degrees()))}, girth {G.girth(g)}",
        f"cycle rank {G.cycle_rank(g)} = {len(g.edges)} - {len(g.vertices)} + {len(g.components())}",
        f"H1 rank over Q {h.rank_q}, over Z {h.rank_z}, torsion-free {h.torsion_free}",
    ]


def cmd_graph(cfg: RunConfig, out) -> int:
    p = _load(cfg)
    n = _arity(cfg)
    bg = G.bipartite(G.labeled_matrix(p, n, cfg.aliases))
    cls = G.classify(bg)
    lines = [header(p, n).rstrip("\n"),
             f"bipartite graph: {len(bg.tree_vertices)} tree vertices, "
             f"{len(bg.relation_vertices)} relation vertices, {len(bg.edges)} edges",
             f"classification: {cls}"]
    kind = G.DUAL if cfg.flags.get("dual") else G.GRAPHLIKE
    admissible = cls == "both" or (kind, cls) in ((G.GRAPHLIKE, "graphlike"), (G.DUAL, "dual_graphlike"))
    dot = None
    if not admissible:
        if cfg.flags.get("dual"):
            raise G.WrongKind(f"relations are {cls}, not dual graphlike")
        lines.append("no Tel-A-graph of this kind; the bipartite graph is exported")
        dot = G.bipartite_dot(bg, f"{p.name}-{n}")
    else:
        g = G.tel_a(bg, kind)
        if cfg.flags.get("orient"):
            g = G.orient(g)
        lines += _graph_summary(g)
        if g.oriented:
            lines.append("flipped vertices: " + (", ".join(G.flipped(g)) or "none"))
            if kind == G.DUAL:
                for k, vec in enumerate(G.component_sums(g), 1):
                    terms = [(g.vertices[i], c) for i, c in enumerate(vec) if c]
                    lines.append(f"component sum {k}: {T.format_combination(terms)}")
            else:
                cert = G.coherence_certificate(p, n)
                lines += cert.to_text().rstrip("\n").splitlines()
        dot = G.to_dot(g, f"{p.name}-{n}-{kind}")
    text = "\n".join(lines) + "\n"
    # on stdout --dot replaces the summary so the stream stays valid DOT
    if not cfg.flags.get("dot") or cfg.out is not None:
        _emit(cfg, f"{p.name}-graph-{n}.txt", text, out)
    if cfg.flags.get("dot"):
        _emit(cfg, f"{p.name}-graph-{n}.dot", "// " + header(p, n)[2:] + dot, out)
    return 0


def cmd_koszul(cfg: RunConfig, out) -> int:
    p = _load(cfg)
    n = _arity(cfg, 4)
    _emit(cfg, f"{p.name}-koszul.txt", header(p, n) + duality_report(p, n), out)
    return 0


def cmd_words(cfg: RunConfig, out) -> int:
    p = _load(cfg)
    n = _arity(cfg)
    bg = G.bipartite(G.labeled_matrix(p, n, cfg.aliases))
    g = G.orient(G.tel_a(bg, G.DUAL))
    source = cfg.flags.get("labels") or "derived"
    if source == "derived":
        entries = W.derived_entries(p, n)
    else:
        entries = W.load_entries(source, p.name)
    dg = W.decorate(g, W.transfer_labels(g, entries))
    eqs = W.derive_equations(dg)
    lines = [header(p, n).rstrip("\n"), f"labels: {source}",
             f"dual graph: {len(g.vertices)} vertices, {len(g.edges)} edges, cycle rank {G.cycle_rank(g)}",
             f"{len(eqs)} equations"]
    text = "\n".join(lines) + "\n" + W.equations_text(eqs, g)
    _emit(cfg, f"{p.name}-words-{n}.txt", text, out)
    return 0


def cmd_check_all(cfg: RunConfig, out) -> int:
    results = run_all()
    text = "".join(r.line() + "\n" for r in results)
    _emit(cfg, "check-all.txt", f"# opcoh {__version__}\n" + text, out)
    return 0 if all(r.ok for r in results) else 1


COMMANDS = {
    "basis": cmd_basis,
    "pimatrix": cmd_pimatrix,
    "coherence": cmd_coherence,
    "graph": cmd_graph,
    "koszul": cmd_koszul,
    "words": cmd_words,
    "check-all": cmd_check_all,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="opcoh", description="Coherence computations for operad presentations.")
    ap.add_argument("--version", action="version", version=f"opcoh {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, arity_required=True):
        sp.add_argument("presentation", help="builtin name or path to a presentation file")
        sp.add_argument("arity", type=int, nargs=None if arity_required else "?")
        sp.add_argument("--out", type=Path, help="write files into this directory instead of stdout")
        sp.add_argument("--force", action="store_true", help=f"allow arities above {ARITY_CAP}")
        sp.add_argument("--mode", choices=T.MODES, help="override the presentation's mode")
        sp.add_argument("--no-aliases", action="store_true", help="label by canonical monomials only")

    common(sub.add_parser("basis", help="list tree and module bases"))
    common(sub.add_parser("pimatrix", help="write the matrix of pi as CSV"))
    sp = sub.add_parser("coherence", help="kernel, obvious relations and constraints")
    common(sp)
    fmt = sp.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true", help="constraint vectors as a CSV matrix")
    sp = sub.add_parser("graph", help="bipartite graph, Tel-A-graph, orientation")
    common(sp)
    sp.add_argument("--dual", action="store_true", help="build the dual Tel-A-graph")
    sp.add_argument("--orient", action="store_true")
    sp.add_argument("--dot", action="store_true", help="emit DOT (only DOT on stdout, both files with --out)")
    common(sub.add_parser("koszul", help="quadratic dual and series checks"), arity_required=False)
    sp = sub.add_parser("words", help="word equations around cycles of the dual graph")
    common(sp)
    sp.add_argument("--labels", help="'derived' (default), a builtin labels name, or a file")
    sp = sub.add_parser("check-all", help="run the reference checks on the builtins")
    sp.add_argument("--out", type=Path)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        source=getattr(args, "presentation", ""),
        arity=getattr(args, "arity", None),
        out=args.out,
        force=getattr(args, "force", False),
        mode=getattr(args, "mode", None),
        aliases=not getattr(args, "no_aliases", False),
        flags={k: v for k, v in vars(args).items() if k in ("json", "csv", "dual", "orient", "dot", "labels")},
    )
    try:
        return COMMANDS[cfg.command](cfg, out)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (PresentationError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (G.WrongKind, G.NotPlusMinusOne, G.NoConsistentOrientation, NotQuadratic,
            W.MissingLabel, InternalInconsistency, G.InternalInconsistency, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
