"""Command-line driver: instance generation, experiments, verification,
oracle queries and oracle-call accounting.

All randomness flows from --seed; outputs are CSV or plain-text files whose
bytes are reproducible for a fixed seed (the wall-time column excepted).

Exit status: 0 success, 1 check failure, 2 usage/config error, 3 instance
over the exhaustive-computation caps.
"""

from __future__ import annotations

import csv
import math
import random
import re
import statistics
import sys
import time

import click

from . import __version__
from .core import sample_realization
from .errors import AdasubError, InstanceTooLarge, ParseError, ValidationError
from .evaluation import exact_policy_value, expected_utility
from .instances import generate_coverage, load_instance, save_instance
from .oracle import optimal_value
from .policies import (
    PartitionConstraint,
    adaptive_greedy,
    adaptive_stochastic_greedy,
    empty_policy,
    generalized_asg,
    locally_greedy,
    random_policy,
    run_policy,
    sample_budget,
)
from .verify import (
    check_adaptive_monotone,
    check_adaptive_submodular,
    check_fully_adaptive_submodular,
)

EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_TOO_LARGE = 3


def _fmt(x) -> str:
    if isinstance(x, float):
        return "%.12g" % x
    return "" if x is None else str(x)


def _fail(code: int, message: str):
    click.echo("error: %s" % message, err=True)
    sys.exit(code)


def _load(path):
    try:
        return load_instance(path)
    except (ParseError, ValidationError, OSError) as exc:
        _fail(EXIT_USAGE, str(exc))


_POLICY_RE = re.compile(r"^([a-z_]+)\s*(?:\((.*)\))?$")


def parse_policy(text: str, instance=None):
    """Parse a policy descriptor such as 'asg(k=2,eps=0.1)' or 'local(order=1:0)'."""
    m = _POLICY_RE.match(text.strip())
    if not m:
        raise ValidationError("cannot parse policy descriptor %r" % text)
    name, argstr = m.group(1), m.group(2) or ""
    kv = {}
    for part in filter(None, (p.strip() for p in argstr.split(","))):
        if "=" not in part:
            raise ValidationError("bad argument %r in policy %r" % (part, text))
        key, val = part.split("=", 1)
        kv[key.strip()] = val.strip()

    def order_arg():
        return [int(x) for x in kv["order"].split(":")] if "order" in kv else None

    try:
        if name == "empty":
            return empty_policy()
        if name in ("greedy", "lazy"):
            return adaptive_greedy(int(kv["k"]), variant=name if name == "lazy" else "naive")
        if name == "asg":
            return adaptive_stochastic_greedy(int(kv["k"]), float(kv["eps"]))
        if name == "random":
            return random_policy(int(kv["k"]))
        if name in ("local", "gasg"):
            if instance is None or not isinstance(instance.constraint, PartitionConstraint):
                raise ValidationError(
                    "policy %r needs an instance with a partition constraint" % name)
            groups = instance.constraint.groups
            limits = instance.constraint.remaining
            if name == "local":
                return locally_greedy(groups, limits, order_arg())
            return generalized_asg(groups, limits, float(kv["eps"]), order_arg())
    except KeyError as exc:
        raise ValidationError("policy %r is missing argument %s" % (text, exc))
    raise ValidationError("unknown policy %r" % name)


@click.group()
@click.version_option(version=__version__, prog_name="adasub")
def main():
    """Adaptive submodular maximization: policies, oracle, checkers."""


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--m", type=int, default=2, show_default=True)
@click.option("--universe", type=int, default=8, show_default=True)
@click.option("--density", type=float, default=0.3, show_default=True)
@click.option("--wmin", type=float, default=0.5, show_default=True)
@click.option("--wmax", type=float, default=1.5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--k", type=int, default=None, help="Cardinality budget.")
@click.option("--groups", default=None,
              help="Partition groups, e.g. '0,1;2,3' (overrides --k).")
@click.option("--limits", default=None, help="Per-group budgets, e.g. '1,1'.")
@click.option("--out", type=click.Path(), required=True)
def gen(n, m, universe, density, wmin, wmax, seed, k, groups, limits, out):
    """Generate a random stochastic-coverage instance file."""
    try:
        group_lists = limit_list = None
        if groups is not None:
            group_lists = [[int(x) for x in g.split(",")] for g in groups.split(";")]
            if limits is None:
                raise ValidationError("--groups requires --limits")
            limit_list = [int(x) for x in limits.split(",")]
        inst = generate_coverage(n, m, universe, density, (wmin, wmax), seed,
                                 k=k, groups=group_lists, limits=limit_list)
        save_instance(inst, out)
    except AdasubError as exc:
        _fail(EXIT_USAGE, str(exc))
    click.echo("wrote %s" % out)


RUN_COLUMNS = ["policy", "params", "f_avg", "stderr", "delta_evals", "f_evals",
               "ratio", "wall_time_s"]


@main.command()
@click.option("--instance", "instance_path", type=click.Path(exists=True), required=True)
@click.option("--policy", "policy_specs", multiple=True,
              help="Policy descriptor; repeatable.")
@click.option("--seed", type=int, required=True)
@click.option("--mode", type=click.Choice(["exact", "mc"]), default="exact",
              show_default=True)
@click.option("--samples", type=int, default=10_000, show_default=True)
@click.option("--replicates", type=int, default=200, show_default=True,
              help="Internal-randomness replicates for randomized policies in exact mode.")
@click.option("--out", type=click.Path(), required=True)
def run(instance_path, policy_specs, seed, mode, samples, replicates, out):
    """Evaluate policies on an instance; one CSV row per policy plus the oracle."""
    inst = _load(instance_path)
    try:
        policies = [parse_policy(p, inst) for p in policy_specs]
    except ValidationError as exc:
        _fail(EXIT_USAGE, str(exc))
    try:
        opt = optimal_value(inst.utility(), inst.prior, inst.constraint).value
    except InstanceTooLarge:
        opt = None
    rows = []
    for spec, pi in zip(policy_specs, policies):
        f = inst.utility()
        t0 = time.perf_counter()
        if mode == "exact":
            if pi.randomized:
                cache = {}
                vals = [exact_policy_value(pi, f, inst.prior, seed="%s:%d" % (seed, r),
                                           delta_cache=cache)
                        for r in range(replicates)]
                favg = statistics.fmean(vals)
                se = statistics.stdev(vals) / math.sqrt(len(vals)) if len(vals) > 1 else 0.0
            else:
                favg = exact_policy_value(pi, f, inst.prior, seed=seed, delta_cache={})
                se = 0.0
        else:
            favg, se = expected_utility(f, inst.prior, pi, mode="mc",
                                        samples=samples, seed=seed)
        wall = time.perf_counter() - t0
        ratio = favg / opt if opt else None
        rows.append([pi.name, ";".join("%s=%s" % kv for kv in sorted(pi.params().items())),
                     favg, se, f.delta_counter, f.f_counter, ratio, wall])
    if opt is not None and rows:
        rows.append(["oracle", "", opt, 0.0, None, None, 1.0, None])
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    click.echo("wrote %s" % out)


@main.command()
@click.option("--instance", "instance_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None)
def oracle(instance_path, out):
    """Exhaustive optimal-policy value for a small instance."""
    inst = _load(instance_path)
    try:
        res = optimal_value(inst.utility(), inst.prior, inst.constraint)
    except InstanceTooLarge as exc:
        _fail(EXIT_TOO_LARGE, str(exc))
    lines = ["value %s" % _fmt(res.value),
             "optimal_first_actions %s" % ",".join(map(str, res.optimal_first_actions)),
             "nodes_expanded %d" % res.nodes_expanded,
             "cache_hits %d" % res.cache_hits]
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    click.echo(text, nl=False)


CHECKS = {
    "monotone": lambda f, prior: check_adaptive_monotone(f, prior),
    "submodular": lambda f, prior: check_adaptive_submodular(f, prior),
    "fully": lambda f, prior: check_fully_adaptive_submodular(f, prior),
}


@main.command()
@click.option("--instance", "instance_path", type=click.Path(exists=True), required=True)
@click.option("--checks", default="monotone,submodular", show_default=True,
              help="Comma-separated subset of monotone,submodular,fully.")
@click.option("--out", type=click.Path(), default=None)
def verify(instance_path, checks, out):
    """Run definitional checkers; nonzero exit on any violation."""
    inst = _load(instance_path)
    names = [c.strip() for c in checks.split(",") if c.strip()]
    unknown = [c for c in names if c not in CHECKS]
    if unknown:
        _fail(EXIT_USAGE, "unknown checks: %s" % ",".join(unknown))
    reports = []
    try:
        for name in names:
            reports.append(CHECKS[name](inst.utility(), inst.prior))
    except InstanceTooLarge as exc:
        _fail(EXIT_TOO_LARGE, str(exc))
    text = "\n".join(r.format() for r in reports) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    click.echo(text, nl=False)
    if not all(r.passed for r in reports):
        sys.exit(EXIT_CHECK_FAILED)


BENCH_COLUMNS = ["policy", "n", "budget", "epsilon", "delta_measured",
                 "delta_cap", "naive_evals"]


def _bench_caps(pi, n, k, eps, constraint):
    if pi.name == "asg":
        return k * sample_budget(n, n, k, eps), n * k
    if pi.name in ("greedy", "lazy"):
        return sum(n - r for r in range(min(k, n))), n * k
    sizes = [len(g) for g in constraint.groups]
    limits = list(constraint.remaining)
    if pi.name == "gasg":
        cap = sum(d * sample_budget(len(g), len(g), d, eps)
                  for g, d in zip(constraint.groups, limits))
    else:
        cap = sum(sum(s - j for j in range(min(d, s)))
                  for s, d in zip(sizes, limits))
    return cap, sum(limits) * n


@main.command()
@click.option("--policy", "policy_name",
              type=click.Choice(["asg", "greedy", "lazy", "local", "gasg"]),
              required=True)
@click.option("--n", "ns", type=int, multiple=True)
@click.option("--k", "ks", type=int, multiple=True)
@click.option("--eps", "eps_list", type=float, multiple=True)
@click.option("--instance", "instance_path", type=click.Path(exists=True), default=None,
              help="Partition instance for local/gasg benches.")
@click.option("--m", type=int, default=2, show_default=True)
@click.option("--universe", type=int, default=16, show_default=True)
@click.option("--density", type=float, default=0.2, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
def bench(policy_name, ns, ks, eps_list, instance_path, m, universe, density, seed, out):
    """Measure oracle-call counts per rollout against the theoretical caps."""
    rows = []
    try:
        if policy_name in ("local", "gasg"):
            if instance_path is None:
                raise ValidationError("--instance is required for %s" % policy_name)
            inst = _load(instance_path)
            if not isinstance(inst.constraint, PartitionConstraint):
                raise ValidationError("instance constraint must be a partition")
            eps_grid = list(eps_list) if policy_name == "gasg" else [None]
            for eps in eps_grid:
                spec = "local" if eps is None else "gasg(eps=%s)" % eps
                pi = parse_policy(spec, inst)
                f = inst.utility()
                phi = sample_realization(inst.prior, random.Random("bench|%s" % seed))
                run_policy(pi, f, inst.prior, phi, seed="bench|%s" % seed)
                cap, naive = _bench_caps(pi, inst.n, None, eps, inst.constraint)
                rows.append([pi.name, inst.n, sum(inst.constraint.remaining), eps,
                             f.delta_counter, cap, naive])
        else:
            if not ns or not ks:
                raise ValidationError("--n and --k are required for %s" % policy_name)
            eps_grid = list(eps_list) if policy_name == "asg" else [None]
            for n in ns:
                inst = generate_coverage(n, m, universe, density, seed=seed)
                for k in ks:
                    for eps in eps_grid:
                        if policy_name == "asg":
                            pi = adaptive_stochastic_greedy(k, eps)
                        else:
                            pi = adaptive_greedy(k, variant=policy_name if policy_name == "lazy" else "naive")
                        f = inst.utility()
                        phi = sample_realization(
                            inst.prior, random.Random("bench|%s|%d|%d" % (seed, n, k)))
                        run_policy(pi, f, inst.prior, phi,
                                   seed="bench|%s|%d|%d" % (seed, n, k))
                        cap, naive = _bench_caps(pi, n, k, eps, None)
                        rows.append([pi.name, n, k, eps, f.delta_counter, cap, naive])
    except AdasubError as exc:
        _fail(EXIT_USAGE, str(exc))
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCH_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    click.echo("wrote %s" % out)


if __name__ == "__main__":
    main()
