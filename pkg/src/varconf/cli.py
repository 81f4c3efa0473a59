"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 input format error,
3 infeasible (unsatisfiable feature model), 4 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from varconf import __version__, backend
from varconf.cit import (FormatError, array_csv, generate_pairwise, import_array,
                         score_array)
from varconf.extract import (ExtractError, ManifestError, PCMap, dump_manifest,
                             enabled_pcs, extract, load_manifest)
from varconf.formula import FormulaSyntaxError, UnsupportedExpression, to_text
from varconf.fuzz import DEFAULT_RNG_SEED, TYPES, Fuzzer, fuzz
from varconf.generate import (ConfigFormatError, InfeasibleResidual, config_json,
                              config_text, maximal, maximal_iterative,
                              maximal_variants, parse_config)
from varconf.metrics import (ABSOLUTE_COST, LCU_COST, NoConfigurableUnits, ccu,
                             kl_free_costs, load_line_costs, weigh)
from varconf.solver import HardUnsat, SoftConstraint, to_wcnf

log = logging.getLogger("varconf")

EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_INFEASIBLE = 3
EXIT_MISMATCH = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_metric(spec: str, pcmap: PCMap, sources=None):
    if spec == "lcu":
        return LCU_COST
    if spec == "absolute":
        return ABSOLUTE_COST
    if spec.startswith("free:") or spec == "free":
        k = spec.partition(":")[2] or "1"
        if not k.isdigit() or int(k) < 1:
            raise UsageError(f"bad metric {spec!r}: k must be a positive integer")
        files = sources or pcmap.files or sorted({u.file for e in pcmap.entries for u in e.units})
        return kl_free_costs(files, int(k))
    if spec.startswith("costs:"):
        path = spec.partition(":")[2]
        try:
            return load_line_costs(path)
        except (ValueError, json.JSONDecodeError) as exc:
            raise ConfigFormatError(f"{path}: {exc}") from exc
    raise UsageError(f"unknown metric {spec!r} (lcu | absolute | free:k | costs:<path>)")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _emit(args, name: str, text: str) -> None:
    """Write ``text`` to ``args.out/name`` or stdout."""
    if args.out is None:
        sys.stdout.write(text)
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)


def _pc_texts(pcmap, idx):
    return [to_text(pcmap.entries[i].pc) for i in sorted(idx)]


def _result_doc(pcmap, res, step):
    names = pcmap.vars.names
    return {
        "config": config_json(names, res.configuration),
        "score": res.score,
        "step": step,
        "enabled": _pc_texts(pcmap, res.enabled),
        "unsatisfied": _pc_texts(pcmap, res.unsatisfied),
    }


# -- subcommands ---------------------------------------------------------------

def cmd_extract(args) -> int:
    srcs = [Path(p) for p in args.sources]
    for p in srcs:
        if not p.exists():
            raise UsageError(f"{p}: no such file or directory")
    pcmap = extract(args.sources, args.fm)
    if not pcmap.entries:
        log.warning("no configurable code found")
    print(f"{len(pcmap.entries)} presence conditions, {pcmap.total_units} code units",
          file=sys.stderr)
    text = dump_manifest(pcmap)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _load(args):
    pcmap = load_manifest(args.manifest)
    return pcmap, parse_metric(args.metric, pcmap, args.sources)


def cmd_max(args) -> int:
    pcmap, c = _load(args)
    res = maximal(pcmap, c)
    if args.out is not None:
        _emit(args, "max.config", config_text(pcmap.vars.names, res.configuration))
    _emit(args, "max.json", _dump(_result_doc(pcmap, res, 1)))
    return 0


def cmd_maxi(args) -> int:
    pcmap, c = _load(args)
    cover = maximal_iterative(pcmap, c)
    docs = [_result_doc(pcmap, r, k) for k, r in enumerate(cover, 1)]
    confs = [r.configuration for r in cover]
    summary = {
        "configs": len(docs),
        "pcs_per_config": [len(r.enabled) for r in cover],
        "scores": [r.score for r in cover],
        "nonzero_pcs": len(weigh(pcmap, c).nonzero()),
        "cumulative_ccu": float(ccu(pcmap, confs)) if pcmap.total_units else None,
    }
    if args.out is None:
        sys.stdout.write(_dump({"summary": summary, "configs": docs}))
        return 0
    for k, (r, doc) in enumerate(zip(cover, docs), 1):
        _emit(args, f"config_{k}.config", config_text(pcmap.vars.names, r.configuration))
        _emit(args, f"config_{k}.json", _dump(doc))
    _emit(args, "summary.json", _dump(summary))
    return 0


def cmd_maxv(args) -> int:
    pcmap, c = _load(args)
    cover = maximal_iterative(pcmap, c)
    variants = maximal_variants(pcmap, cover)
    weights = weigh(pcmap, c).weights
    names = pcmap.vars.names
    docs = []
    for k, v in enumerate(variants, 1):
        docs.append({
            "config": config_json(names, v.witness),
            "score": sum(weights[i] for i in v.pcs),
            "step": k,
            "source": v.source + 1,
            "pcs": _pc_texts(pcmap, v.pcs),
        })
        if args.out is not None:
            _emit(args, f"variant_{k}.config", config_text(names, v.witness))
    _emit(args, "variants.json", _dump(docs))
    return 0


def cmd_fuzz(args) -> int:
    pcmap, c = _load(args)
    fz = Fuzzer(pcmap, args.type, c, args.lcu_count_unique,
                unconstrained=args.unconstrained)
    seeds = None
    if args.seed_config:
        seeds = [fz.bits_for(parse_config(Path(p).read_text(), pcmap.vars.names, args.lenient))
                 for p in args.seed_config]
    results = fuzz(pcmap, args.type, c, seeds, args.cycles, args.top, args.rng_seed,
                   afl_windows=args.afl_windows, fuzzer=fz)
    names = pcmap.vars.names
    docs = [{"config": config_json(names, r.configuration), "score": r.score,
             "step": r.step} for r in results]
    _emit(args, "fuzz.json", _dump(docs))
    return 0


def cmd_cit_generate(args) -> int:
    pcmap = load_manifest(args.manifest)
    names = pcmap.vars.names
    if len(names) < args.t:
        raise UsageError(f"need at least {args.t} variables, manifest has {len(names)}")
    arr = generate_pairwise(names, args.t, args.rng_seed)
    text = array_csv(arr)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_cit_score(args) -> int:
    pcmap, c = _load(args)
    arr = import_array(args.array, pcmap.vars.names)
    sc = score_array(arr, pcmap, c)
    names = pcmap.vars.names
    doc = {
        "best": {"score": sc.best_score, "step": sc.best_step},
        "fm_violations": sc.fm_violations,
        "rows": [{"config": config_json(names, arr.rows[k]), "score": s, "step": k + 1}
                 for k, s in sc.rows],
    }
    _emit(args, "cit_scores.json", _dump(doc))
    return 0


def cmd_report(args) -> int:
    pcmap, c = _load(args)
    names = pcmap.vars.names
    weights = weigh(pcmap, c).weights
    confs, rows = [], []
    for p in args.configs:
        unknown: list = []
        a = parse_config(Path(p).read_text(), names, args.lenient, unknown)
        for name in unknown:
            log.warning("%s: ignoring unknown variable %s", p, name)
        confs.append(a)
        on = enabled_pcs(pcmap, a)
        total = len(pcmap.entries)
        rows.append({
            "config": str(p),
            "enabled_pcs": len(on),
            "pc_coverage": round(100.0 * len(on) / total, 2) if total else None,
            "ccu": round(100.0 * float(ccu(pcmap, [a])), 2) if pcmap.total_units else None,
            "score": sum(weights[i] for i in on),
            "cumulative_ccu": round(100.0 * float(ccu(pcmap, confs)), 2)
            if pcmap.total_units else None,
        })
    _emit(args, "report.json", _dump({"total_pcs": len(pcmap.entries),
                                      "total_units": pcmap.total_units,
                                      "configs": rows}))
    return 0


def cmd_verify(args) -> int:
    from varconf import oracle
    from varconf.extract import scan_file
    from varconf.formula import VarTable, semantically_equal

    pcmap, c = _load(args)
    weights = weigh(pcmap, c).weights
    checks = []
    n = len(pcmap.vars)
    if n <= oracle.MAX_BRUTE_VARS:
        res = maximal(pcmap, c)
        idx = [i for i, w in enumerate(weights) if w > 0]
        best, _ = oracle.brute_maxsat(
            [pcmap.feature_model], [(pcmap.entries[i].pc, weights[i]) for i in idx], n)
        checks.append({"check": "maxsat", "solver": res.score, "brute_force": best,
                       "ok": res.score == best})
    else:
        checks.append({"check": "maxsat", "skipped": f"{n} variables > {oracle.MAX_BRUTE_VARS}"})
    try:
        exact = oracle.brute_min_cover(pcmap, c)
    except oracle.TooLarge as exc:
        checks.append({"check": "min_cover", "skipped": str(exc)})
    else:
        greedy = len(maximal_iterative(pcmap, c))
        checks.append({"check": "min_cover", "greedy": greedy, "minimum": exact,
                       "ok": greedy >= exact})
    for src in args.source or []:
        vars = VarTable()
        got = {}
        for inst in scan_file(src, vars):
            for line in inst.unit.lines:
                got[line] = inst.pc
        ref = oracle.reference_pc_walk(Path(src), vars)
        bad = [ln for ln, pc in got.items() if not semantically_equal(pc, ref[ln])]
        checks.append({"check": "extract", "file": str(src), "lines": len(got),
                       "mismatches": bad, "ok": not bad})
    ok = all(ch.get("ok", True) for ch in checks)
    sys.stdout.write(_dump({"ok": ok, "checks": checks}))
    return 0 if ok else EXIT_MISMATCH


def cmd_wcnf(args) -> int:
    pcmap, c = _load(args)
    weights = weigh(pcmap, c).weights
    soft = [SoftConstraint(e.pc, w) for e, w in zip(pcmap.entries, weights) if w > 0]
    _emit(args, "instance.wcnf", to_wcnf([pcmap.feature_model], soft, len(pcmap.vars)))
    return 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="varconf", description="Presence-condition extraction and "
                "metric-guided configuration generation.")
    p.add_argument("--version", action="version",
                   version=f"%(prog)s {__version__} ({backend.BACKEND} SAT core)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def manifest_cmd(name, help, func, metric=True, out=True):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("manifest", help="PC manifest JSON written by 'extract'")
        if metric:
            sp.add_argument("--metric", default="lcu",
                            help="lcu | absolute | free:k | costs:<path> (default lcu)")
            sp.add_argument("--sources", nargs="+",
                            help="sources for call-graph metrics (default: manifest files)")
        if out:
            sp.add_argument("-o", "--out", help="output directory (default: stdout)")
        sp.set_defaults(func=func)
        return sp

    sp = sub.add_parser("extract", help="scan sources into a PC manifest")
    sp.add_argument("sources", nargs="+", help="source files or directories")
    sp.add_argument("--fm", help="feature model: one formula per line")
    sp.add_argument("-o", "--output", help="manifest path (default: stdout)")
    sp.set_defaults(func=cmd_extract)

    manifest_cmd("max", "maximal configuration", cmd_max)
    manifest_cmd("maxi", "greedy cover of all nonzero-weight PCs", cmd_maxi)
    manifest_cmd("maxv", "variants of the greedy cover", cmd_maxv)
    manifest_cmd("wcnf", "export the maximal-configuration instance as WCNF", cmd_wcnf)

    sp = manifest_cmd("fuzz", "metric-guided configuration fuzzing", cmd_fuzz)
    sp.add_argument("--type", choices=TYPES, default="pcf")
    sp.add_argument("--cycles", type=int, help="default 25 (pcf/spcf) or 5 (cvf)")
    sp.add_argument("--top", type=int, default=10)
    sp.add_argument("--seed-config", action="append", help="seed configuration (repeatable)")
    sp.add_argument("--rng-seed", type=int, default=DEFAULT_RNG_SEED)
    sp.add_argument("--afl-windows", action="store_true",
                    help="flip windows of 1, 2 and 4 bits at every offset")
    sp.add_argument("--lcu-count-unique", action="store_true",
                    help="LCU score counts enabled PCs instead of their code units")
    sp.add_argument("--unconstrained", action="store_true",
                    help="pcf/spcf: leave unselected PCs free instead of negating them")
    sp.add_argument("--lenient", action="store_true")

    sp = manifest_cmd("report", "coverage of given configurations", cmd_report)
    sp.add_argument("configs", nargs="+", help=".config or JSON configurations")
    sp.add_argument("--lenient", action="store_true",
                    help="warn about and ignore unknown variables")

    sp = manifest_cmd("verify", "cross-check against brute-force oracles", cmd_verify, out=False)
    sp.add_argument("--source", action="append", help="also check extraction of this file")

    cit = sub.add_parser("cit", help="combinatorial interaction testing")
    cit_sub = cit.add_subparsers(dest="cit_command", required=True, parser_class=_Parser)
    sp = cit_sub.add_parser("generate", help="greedy t-way covering array as CSV")
    sp.add_argument("manifest")
    sp.add_argument("--t", type=int, choices=(2, 3), default=2)
    sp.add_argument("--rng-seed", type=int, default=0)
    sp.add_argument("-o", "--output", help="CSV path (default: stdout)")
    sp.set_defaults(func=cmd_cit_generate)
    sp = cit_sub.add_parser("score", help="score the rows of a covering array")
    sp.add_argument("manifest")
    sp.add_argument("--array", required=True, help="CSV covering array")
    sp.add_argument("--metric", default="lcu")
    sp.add_argument("--sources", nargs="+")
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_cit_score)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    for attr in ("cycles", "top"):
        val = getattr(args, attr, None)
        if val is not None and val < 1:
            print(f"varconf: --{attr} must be >= 1", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"varconf: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HardUnsat, InfeasibleResidual) as exc:
        print(f"varconf: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ExtractError, ManifestError, ConfigFormatError, FormatError,
            FormulaSyntaxError, UnsupportedExpression, NoConfigurableUnits) as exc:
        print(f"varconf: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"varconf: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
