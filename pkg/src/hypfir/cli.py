"""Command-line front end.

Every verb builds a :class:`Scenario` and hands it to :func:`run_scenario`;
scenario files (``hypfir run FILE``) use the same keys in ``key = value``
lines.  Reports print a human section followed by a ``---json---`` line and
a JSON document that depends only on the scenario (no timings).

Exit codes: 0 success, 1 error, 2 inconclusive (bounded-search statuses).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .audit import audit_lemmas, random_ge_product
from .bass import StarFailure, ZModuleSpec, bass_descent
from .reduction import (
    HypothesisNotMet,
    ReductionError,
    TransformationLog,
    ge_factor,
    ideal_basis,
    reduce_step,
    submodule_basis,
)
from .ring import ElementParseError, format_element, format_vector, parse_element, parse_vector
from .scalars import ZZ, DomainError, parse_domain
from .spaces import (
    CayleyBallOracle,
    OutOfDomainError,
    check_hypothesis,
    four_point_scan,
    min_displacement,
    parse_oracle,
)

OK, ERROR, INCONCLUSIVE = 0, 1, 2

TASKS = (
    "reduce", "ideal-basis", "submodule-basis", "ge-factor", "bass-descent",
    "check-hypothesis", "delta", "displacement", "audit-lemmas", "replay",
)
_SCALAR_KEYS = {"task": str, "oracle": str, "domain": str, "rmax": int, "seed": int, "trials": int}


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    task: str
    oracle: str = "tree:2"
    domain: str = "q"
    rmax: int = 6
    seed: int = 0
    unsafe: bool = False
    trials: int = 100
    inputs: dict = field(default_factory=dict)

    def get(self, key, default=None):
        vals = self.inputs.get(key)
        return vals[-1] if vals else default

    def echo(self) -> dict:
        return {"task": self.task, "oracle": self.oracle, "domain": self.domain, "rmax": self.rmax,
                "seed": self.seed, "unsafe": self.unsafe, "trials": self.trials,
                "inputs": {k: list(v) for k, v in sorted(self.inputs.items())}}

    @classmethod
    def from_text(cls, text: str) -> "Scenario":
        vals: dict = {}
        inputs: dict = {}
        for no, raw in enumerate(text.splitlines(), 1):
            ln = raw.strip()
            if not ln or ln.startswith("#"):
                continue
            if "=" not in ln:
                raise ScenarioError(f"line {no}: expected key = value")
            key, value = (s.strip() for s in ln.split("=", 1))
            key = key.replace("-", "_")
            if key in _SCALAR_KEYS:
                try:
                    vals[key] = _SCALAR_KEYS[key](value)
                except ValueError:
                    raise ScenarioError(f"line {no}: bad value for {key}: {value!r}") from None
            elif key == "unsafe":
                vals[key] = value.lower() in ("1", "true", "yes")
            else:
                inputs.setdefault(key, []).append(value)
        if "task" not in vals:
            raise ScenarioError("scenario has no task")
        return cls(inputs=inputs, **vals)

    def to_text(self) -> str:
        lines = [f"task = {self.task}", f"oracle = {self.oracle}", f"domain = {self.domain}",
                 f"rmax = {self.rmax}", f"seed = {self.seed}", f"unsafe = {str(self.unsafe).lower()}",
                 f"trials = {self.trials}"]
        for k, vs in sorted(self.inputs.items()):
            lines.extend(f"{k} = {v}" for v in vs)
        return "\n".join(lines) + "\n"


@dataclass
class Report:
    scenario: Scenario
    outputs: dict
    human: list
    exit_code: int
    elapsed: float = 0.0

    def document(self) -> dict:
        return {"scenario": self.scenario.echo(), "exit_code": self.exit_code, "outputs": self.outputs}

    def json(self) -> str:
        return json.dumps(self.document(), indent=2, sort_keys=True, default=_json_default)

    def render(self) -> str:
        head = [f"task: {self.scenario.task}", *self.human, f"elapsed: {self.elapsed:.3f}s"]
        return "\n".join(head) + "\n---json---\n" + self.json() + "\n"


def _json_default(x):
    if isinstance(x, Fraction):
        return str(x)
    if x == float("-inf"):
        return "-inf"
    raise TypeError(f"cannot serialize {type(x).__name__}")


# ---------------------------------------------------------------------------
# task handlers: (scenario, oracle, domain) -> (outputs, human lines, exit code)


def _need(sc: Scenario, key: str) -> list:
    vals = sc.inputs.get(key)
    if not vals:
        raise ScenarioError(f"task {sc.task} needs at least one '{key}' input")
    return vals


def _elements(texts, dom, rank):
    return [parse_element(t, dom, rank) for t in texts]


def _vectors(texts, dom, rank):
    out = []
    for t in texts:
        t = t.strip()
        out.append(parse_vector(t, dom, rank) if t.startswith("(") else (parse_element(t, dom, rank),))
    return out


def _task_reduce(sc, oracle, dom):
    xis = _elements(_need(sc, "xi"), dom, oracle.rank)
    alphas = _elements(_need(sc, "alpha"), dom, oracle.rank)
    step = reduce_step(xis, alphas, oracle, unsafe=sc.unsafe)
    out = step.as_dict()
    out["ops"] = TransformationLog(len(xis), dom, list(step.ops)).to_text().splitlines()
    out["diagnostics"] = list(step.diagnostics)
    human = [f"kind: {step.kind}", f"result: {format_element(step.result)}",
             f"diam: {out['diam_before']} -> {out['diam_after']}"]
    return out, human, OK


def _basis_output(res, items, fmt):
    out = res.as_dict()
    replayed = res.log.replay_inverse(res.transformed)
    out["replay_reproduces_input"] = list(replayed) == list(items)
    human = [f"status: {res.status}", f"basis ({len(res.basis)}):"]
    human += [f"  {fmt(b)}" for b in res.basis]
    human.append(f"replay reproduces input: {out['replay_reproduces_input']}")
    return out, human, OK if res.status.conclusive else INCONCLUSIVE


def _task_ideal(sc, oracle, dom):
    gens = _elements(_need(sc, "generator"), dom, oracle.rank)
    res = ideal_basis(gens, oracle, sc.rmax, unsafe=sc.unsafe)
    return _basis_output(res, gens, format_element)


def _task_submodule(sc, oracle, dom):
    vecs = _vectors(_need(sc, "vector"), dom, oracle.rank)
    res = submodule_basis(vecs, oracle, sc.rmax, unsafe=sc.unsafe)
    return _basis_output(res, vecs, format_vector)


def _task_ge(sc, oracle, dom):
    instances = []
    if "row" in sc.inputs:
        X = _vectors(sc.inputs["row"], dom, oracle.rank)
        A = _vectors(_need(sc, "inverse_row"), dom, oracle.rank)
        instances.append((X, A))
    else:
        factors = int(sc.get("random", 4))
        size = int(sc.get("size", 2))
        count = int(sc.get("count", 1))
        for t in range(count):
            rng = random.Random(f"{sc.seed}:{t}:ge-factor")
            k = rng.randint(1, factors)
            n = rng.randint(1, size)
            X, A, _ = random_ge_product(rng, dom, oracle.rank, n, k)
            instances.append((X, A))
    results = []
    ok = 0
    for X, A in instances:
        log = ge_factor(X, A, oracle, unsafe=sc.unsafe)
        verified = [tuple(r) for r in log.product()] == [tuple(r) for r in X]
        ok += verified
        results.append({"size": len(X), "X": [format_vector(r) for r in X], "ops": len(log),
                        "log": log.to_text().splitlines(), "verified": verified})
    human = [f"instances: {len(results)}", f"verified: {ok}/{len(results)}"]
    if len(results) == 1:
        human += ["log:"] + [f"  {ln}" for ln in results[0]["log"]]
    return {"instances": results, "verified": ok}, human, OK if ok == len(results) else ERROR


def _task_bass(sc, oracle, dom):
    vecs = _vectors(_need(sc, "vector") if "vector" in sc.inputs else _need(sc, "generator"), ZZ, oracle.rank)
    m = len(vecs[0])
    M = ZModuleSpec(m, vecs)
    try:
        res = bass_descent(M, oracle, sc.rmax, unsafe=sc.unsafe)
    except StarFailure as exc:
        out = {"status": "STAR_FAILURE", "p": exc.p, "witness": format_vector(exc.witness), "radius": exc.radius}
        return out, [f"condition (star) fails: p = {exc.p}, witness {format_vector(exc.witness)}"], ERROR
    out = res.as_dict()
    human = [f"status: {res.status} (k = {res.k})", f"independence: {res.independence}", "basis:"]
    human += [f"  {format_vector(b)}" for b in res.basis]
    return out, human, OK if res.status == "VERIFIED" else INCONCLUSIVE


def _task_hypothesis(sc, oracle, dom):
    n = int(sc.get("n", 1))
    rep = check_hypothesis(oracle, n)
    human = [f"n = {n}, delta = {rep.delta}, displacement >= {rep.displacement_lower_bound}",
             f"threshold (2n+11)^2 delta = {rep.threshold}", f"satisfied: {rep.satisfied}"]
    return rep.as_dict(), human, OK


def _task_delta(sc, oracle, dom):
    out = {"oracle": getattr(oracle, "spec", repr(oracle)), "delta": str(oracle.delta)}
    if isinstance(oracle, CayleyBallOracle):
        scan = four_point_scan(oracle, oracle.scan_points(), oracle.delta_bases)
        out["witness"] = [oracle.format_point(p) for p in scan.witness] if scan.witness else None
        out["points"] = len(oracle.scan_points())
        out["caveats"] = oracle.caveats
    return out, [f"delta = {oracle.delta}"], OK


def _task_displacement(sc, oracle, dom):
    radius = int(sc.get("radius", 1))
    d = min_displacement(oracle, radius)
    exact = not isinstance(oracle, CayleyBallOracle)
    out = {"radius": radius, "displacement": str(d), "exact": exact}
    return out, [f"minimal displacement over the {radius}-ball: {d}" + ("" if exact else " (upper bound)")], OK


def _task_audit(sc, oracle, dom):
    if sc.trials < 1:
        raise ScenarioError("trials must be >= 1")
    only = sc.inputs.get("only")
    rep = audit_lemmas(oracle, sc.trials, sc.seed, only=only)
    human = [f"{'invariant':22s} {'pass':>6s} {'fail':>5s} {'vacuous':>8s} {'inconcl':>8s}"]
    for t in rep.tallies:
        c = t.counts
        line = f"{t.name:22s} {c['pass']:6d} {c['fail']:5d} {c['vacuous']:8d} {c['inconclusive']:8d}"
        if t.discrepancies:
            line += f"  ({t.discrepancies} would fail with the four-point constant)"
        human.append(line)
    human.append(f"failures: {rep.failures}")
    return rep.as_dict(), human, OK if rep.failures == 0 else ERROR


def _task_replay(sc, oracle, dom):
    src = _need(sc, "log")[-1]
    path = Path(src)
    text = path.read_text() if path.exists() else src.replace("\\n", "\n")
    log = TransformationLog.from_text(text, rank=oracle.rank)
    items_text = _need(sc, "item")
    vector = any(t.strip().startswith("(") for t in items_text)
    items = _vectors(items_text, log.domain, oracle.rank) if vector else _elements(items_text, log.domain, oracle.rank)
    inverse = str(sc.get("inverse", "false")).lower() in ("1", "true", "yes")
    out_items = log.replay_inverse(items) if inverse else log.replay(items)
    fmt = format_vector if vector else format_element
    out = {"inverse": inverse, "ops": len(log), "items": [fmt(x) for x in out_items]}
    return out, [f"  {fmt(x)}" for x in out_items], OK


HANDLERS = {
    "reduce": _task_reduce,
    "ideal-basis": _task_ideal,
    "submodule-basis": _task_submodule,
    "ge-factor": _task_ge,
    "bass-descent": _task_bass,
    "check-hypothesis": _task_hypothesis,
    "delta": _task_delta,
    "displacement": _task_displacement,
    "audit-lemmas": _task_audit,
    "replay": _task_replay,
}

_ORACLES: dict = {}


def _oracle(spec: str):
    if spec not in _ORACLES:
        _ORACLES[spec] = parse_oracle(spec)
    return _ORACLES[spec]


def run_scenario(sc: Scenario) -> Report:
    t0 = time.perf_counter()
    try:
        handler = HANDLERS.get(sc.task)
        if handler is None:
            raise ScenarioError(f"unknown task {sc.task!r}; expected one of {', '.join(TASKS)}")
        oracle = _oracle(sc.oracle)
        dom = parse_domain(sc.domain)
        outputs, human, code = handler(sc, oracle, dom)
    except HypothesisNotMet as exc:
        outputs = {"error": "hypothesis-not-met", "message": str(exc),
                   "diagnostics": list(getattr(exc, "diagnostics", []) or [])}
        human, code = [f"error: {exc}"], ERROR
    except (ScenarioError, ElementParseError, DomainError, ReductionError, OutOfDomainError,
            ValueError, OSError) as exc:
        outputs = {"error": type(exc).__name__, "message": str(exc)}
        human, code = [f"error: {exc}"], ERROR
    return Report(sc, outputs, human, code, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# argument parsing


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--oracle", default="tree:2", help="tree:<rank> or cayley:<rank>:<extra>:<radius>")
    common.add_argument("--domain", default="q", help="q, z or fp:<p>")
    common.add_argument("--rmax", type=int, default=6, help="kernel search radius bound")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--unsafe", action="store_true", help="run even when the displacement hypothesis fails")
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--json-only", action="store_true", help="print only the JSON document")

    p = argparse.ArgumentParser(prog="hypfir", description="Euclidean reductions in group rings of free groups.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("reduce", parents=[common], help="one reduction step on a relation")
    s.add_argument("--xi", nargs="+", required=True)
    s.add_argument("--alpha", nargs="+", required=True)

    s = sub.add_parser("ideal-basis", parents=[common], help="free basis of a left ideal")
    s.add_argument("generator", nargs="+")

    s = sub.add_parser("submodule-basis", parents=[common], help="free basis of a submodule")
    s.add_argument("vector", nargs="+", help="vectors written (e; e; ...)")

    s = sub.add_parser("ge-factor", parents=[common], help="factor an invertible matrix")
    s.add_argument("--row", nargs="*", help="rows of X as vectors")
    s.add_argument("--inverse-row", nargs="*", help="rows of the inverse A with AX = 1")
    s.add_argument("--random", type=int, help="build X from at most this many random factors")
    s.add_argument("--size", type=int, default=2, help="largest matrix size for --random")
    s.add_argument("--count", type=int, default=1, help="number of random instances")

    s = sub.add_parser("bass-descent", parents=[common], help="free basis of an integral submodule")
    s.add_argument("vector", nargs="+")

    s = sub.add_parser("check-hypothesis", parents=[common], help="displacement hypothesis report")
    s.add_argument("--n", type=int, default=1)

    sub.add_parser("delta", parents=[common], help="hyperbolicity constant of the oracle")

    s = sub.add_parser("displacement", parents=[common], help="minimal displacement over a group ball")
    s.add_argument("--radius", type=int, default=1)

    s = sub.add_parser("audit-lemmas", parents=[common], help="randomized invariant audit")
    s.add_argument("--only", nargs="*", help="restrict to these invariants")

    s = sub.add_parser("replay", parents=[common], help="replay a transformation log")
    s.add_argument("--log", required=True, help="log file (or inline text with \\n separators)")
    s.add_argument("--inverse", action="store_true")
    s.add_argument("item", nargs="+")

    s = sub.add_parser("run", parents=[common], help="run a key = value scenario file")
    s.add_argument("file")
    return p


def scenario_from_args(args) -> Scenario:
    sc = Scenario(args.verb, args.oracle, args.domain, args.rmax, args.seed, args.unsafe, args.trials)
    v = args.verb
    inputs: dict = {}
    if v == "reduce":
        inputs = {"xi": args.xi, "alpha": args.alpha}
    elif v == "ideal-basis":
        inputs = {"generator": args.generator}
    elif v in ("submodule-basis", "bass-descent"):
        inputs = {"vector": args.vector}
    elif v == "ge-factor":
        if args.row:
            inputs = {"row": args.row, "inverse_row": args.inverse_row or []}
        else:
            inputs = {"random": [str(args.random or 4)], "size": [str(args.size)], "count": [str(args.count)]}
    elif v == "check-hypothesis":
        inputs = {"n": [str(args.n)]}
    elif v == "displacement":
        inputs = {"radius": [str(args.radius)]}
    elif v == "audit-lemmas":
        if args.only:
            inputs = {"only": args.only}
    elif v == "replay":
        inputs = {"log": [args.log], "item": args.item, "inverse": [str(args.inverse).lower()]}
    sc.inputs = inputs
    return sc


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.verb == "run":
        try:
            sc = Scenario.from_text(Path(args.file).read_text())
        except (OSError, ScenarioError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return ERROR
    else:
        sc = scenario_from_args(args)
    rep = run_scenario(sc)
    sys.stdout.write(rep.json() + "\n" if args.json_only else rep.render())
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
