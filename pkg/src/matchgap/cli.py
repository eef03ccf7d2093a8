"""Command-line interface.

Subcommands: ``generate``, ``verify``, ``emd``, ``experiment``, ``analyze``.
Exit codes: 0 ok, 1 a checked property failed, 2 usage or input error.
Primary outputs are byte-identical across reruns; run metadata such as
timestamps goes to a ``run.meta.json`` sidecar.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analysis import discovery_stats, histogram_csv
from .construction import InvalidParams, build_instance
from .emd import verify_reduction
from .estimators import ESTIMATORS, EstimatorSpec, distinguishing_experiment
from .matching import certify_gap
from .oracle import Model, Transcript, query_budget_for
from .params import PRESETS, ParamSet, UnknownPreset, build_params, errors, load_params
from .sampler import SimpleGraph, project_simple, sample_real

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _seed(value: str) -> int:
    if value == "random":
        return int.from_bytes(os.urandom(4), "little")
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer or 'random'") from None


_OVERRIDABLE = {"delta", "L", "r", "zeta", "xi", "gamma", "N1", "d", "sigma", "sparse_degree", "tau"}


def _apply_overrides(p: ParamSet, items: list[str]) -> ParamSet:
    kw = dict(
        delta=p.delta, L=p.L, r=p.r, zeta=p.zeta, xi=p.xi, gamma=p.gamma, N1=p.N1,
        d=p.d, sigma=p.sigma, sparse_degree=p.sparse_degree, tau=p.tau, name=p.name + "*",
    )
    for item in items:
        key, _, val = item.partition("=")
        if key not in _OVERRIDABLE:
            raise UsageError(f"cannot override {key!r}; choose from {sorted(_OVERRIDABLE)}")
        if key in ("zeta", "xi", "gamma"):
            kw[key] = Fraction(val)
        elif key in ("L", "r", "N1"):
            kw[key] = int(val)
        elif key in ("d", "sigma"):
            kw[key] = tuple(float(x) for x in val.split(","))
        else:
            kw[key] = float(val)
    try:
        return build_params(**kw)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid parameters: {exc}") from None


def _params(args) -> ParamSet:
    src = args.params or args.preset
    if src is None:
        raise UsageError("give --preset or --params")
    try:
        p = load_params(src)
    except UnknownPreset as exc:
        raise UsageError(str(exc)) from None
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read parameters from {src}: {exc}") from None
    if getattr(args, "set", None):
        p = _apply_overrides(p, args.set)
    errs = errors(p)
    if errs:
        raise UsageError("parameter violations:\n" + "\n".join(f"  {v.code}: {v.message}" for v in errs))
    return p


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _sidecar(out: Path | None, args, extra: dict | None = None) -> None:
    if out is None:
        return
    meta = {"version": __version__, "command": args.command, "argv": sys.argv[1:], "time": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
    meta.update(extra or {})
    _write(out / "run.meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _instance_doc(inst) -> dict:
    doc = inst.header()
    labels = {"part": inst.part.tolist()}
    for lvl in range(1, inst.params.L + 1):
        names = [c.name for c in inst.tables[lvl - 1].codes]
        codes = inst.code_of[lvl - 1]
        labels[f"level{lvl}"] = {
            "inst": inst.inst_of[lvl - 1].tolist(),
            "set": [names[c] if c >= 0 else "" for c in codes.tolist()],
            "slot": inst.slot_of[lvl - 1].tolist(),
        }
    doc["labels"] = labels
    return doc


def _load_instance(directory: Path):
    try:
        doc = json.loads((directory / "instance.json").read_text())
        edges = SimpleGraph.from_csv((directory / "edges.csv").read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read instance from {directory}: {exc}") from None
    if doc.get("schema") != "instance-v1":
        raise UsageError(f"schema mismatch: expected instance-v1, got {doc.get('schema')!r}")
    p = ParamSet.from_dict(doc["params"])
    inst = build_instance(p, doc["case"], doc["seed"])
    if doc.get("labels") != _instance_doc(inst)["labels"]:
        raise UsageError("labels in instance.json do not match the regenerated instance")
    if edges.n != p.n:
        raise UsageError(f"edges.csv has n={edges.n}, instance has n={p.n}")
    return inst, edges


def _instance_from_args(args):
    if args.instance:
        return _load_instance(Path(args.instance))
    if args.case is None:
        raise UsageError("give --instance DIR or --preset/--params with --case")
    p = _params(args)
    inst = build_instance(p, args.case, args.seed)
    return inst, project_simple(sample_real(inst))


def cmd_generate(args) -> int:
    p = _params(args)
    inst = build_instance(p, args.case, args.seed)
    g = sample_real(inst)
    out = Path(args.out)
    _write(out / "instance.json", json.dumps(_instance_doc(inst), sort_keys=True) + "\n")
    _write(out / "edges.csv", project_simple(g).to_csv(inst.seed, inst.case_hash()))
    if args.multigraph:
        _write(out / "multigraph.csv", g.to_csv(inst.case_hash()))
    _sidecar(out, args, {"seed": args.seed})
    _emit({"out": str(out), "n": p.n, "edges": len(g), "case": inst.case_name, "seed": args.seed})
    return EXIT_OK


def cmd_verify(args) -> int:
    inst, g = _instance_from_args(args)
    rep = certify_gap(inst, g)
    _emit(rep.to_dict())
    return EXIT_OK if rep.holds else EXIT_FAIL


def cmd_emd(args) -> int:
    inst, g = _instance_from_args(args)
    if inst.params.tau:
        raise UsageError("the reduction needs equal sides; padding is not supported")
    rep = verify_reduction(g, inst.part)
    _emit(rep.to_dict())
    return EXIT_OK if rep.holds else EXIT_FAIL


def cmd_experiment(args) -> int:
    p = _params(args)
    if args.estimator not in ESTIMATORS:
        raise UsageError(f"unknown estimator {args.estimator!r}; choose from {sorted(ESTIMATORS)}")
    budget = query_budget_for(p.n, p.delta) if args.budget == "auto" else int(args.budget)
    extra = json.loads(args.estimator_params) if args.estimator_params else {}
    spec = EstimatorSpec(args.estimator, budget, extra)
    rep, transcripts = distinguishing_experiment(
        p, spec, args.trials, args.seed, model=args.model, jobs=args.jobs,
        keep_transcripts=args.out is not None and args.save_transcripts,
    )
    if args.out:
        out = Path(args.out)
        _write(out / "report.json", rep.to_json() + "\n")
        _write(out / "trials.csv", rep.records_csv())
        for k, t in enumerate(transcripts):
            _write(out / "transcripts" / f"trial_{k:05d}.jsonl", t.to_jsonl())
        _sidecar(out, args, {"seed": args.seed})
    _emit(rep.to_dict())
    return EXIT_OK


def cmd_analyze(args) -> int:
    p = _params(args)
    try:
        t = Transcript.from_jsonl(Path(args.transcript).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read transcript {args.transcript}: {exc}") from None
    if t.n != p.n:
        raise UsageError(f"transcript has n={t.n}, parameters give n={p.n}")
    stats = discovery_stats(t, p, seed=args.seed)
    if args.out:
        out = Path(args.out)
        _write(out / "indegree.csv", histogram_csv(stats["indegree_histogram"], "indegree"))
        _write(out / "shallow_sizes.csv", histogram_csv(stats["shallow_size_histogram"], "size"))
        _sidecar(out, args)
    _emit(stats)
    return EXIT_OK


def _common(sp: argparse.ArgumentParser, case: bool = False) -> None:
    sp.add_argument("--preset", choices=sorted(PRESETS), help="named desk preset")
    sp.add_argument("--params", help="params-v1 JSON file")
    sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a preset field")
    sp.add_argument("--seed", type=_seed, default=0)
    if case:
        sp.add_argument("--case", type=str.upper, choices=["YES", "NO"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="matchgap", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("generate", help="build an instance and sample its graph")
    _common(sp, case=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--multigraph", action="store_true", help="also write real-edge multiplicities")
    sp.set_defaults(func=cmd_generate)

    for name, func, hlp in (
        ("verify", cmd_verify, "check the matching gap of an instance"),
        ("emd", cmd_emd, "check the EMD/matching identity on an instance"),
    ):
        sp = sub.add_parser(name, help=hlp)
        _common(sp, case=True)
        sp.add_argument("--instance", help="directory written by generate")
        sp.set_defaults(func=func)

    sp = sub.add_parser("experiment", help="run a distinguishing experiment")
    _common(sp)
    sp.add_argument("--estimator", default="random-pair")
    sp.add_argument("--estimator-params", help="JSON object passed to the estimator")
    sp.add_argument("--budget", default="auto", help="query budget, or 'auto' for n^(2-delta)")
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--model", choices=[m.value for m in Model], default=Model.STRENGTHENED.value)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out")
    sp.add_argument("--save-transcripts", action="store_true")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("analyze", help="discovery statistics of a transcript")
    _common(sp)
    sp.add_argument("--transcript", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_analyze)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidParams) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
