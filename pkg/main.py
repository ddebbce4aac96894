import sys
import os
import json
import logging
import argparse

# allow running from project root
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.config import load_config
from src.dataset import load_csv
from src.errors import ConfigError, EvaluatorFailure, EvoterError
from src.experiment import (ENV_DOMAINS, build_table, domain_schema, evaluate_rules,
                            persist, run_dir, run_esp, run_evolve, simulate)
from src.grammar import load_rules, render, render_condition
from src.rules import MODES
from src.schema import load_schema
from src.simplify import (DEFAULT_BUDGET, diff_summary, feature_usage,
                          load_vocabulary, render_plain, simplify)

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def print_table(label, header, rows):
    print(f"\n{'='*70}")
    print(label)
    print(f"{'='*70}")
    line = f"  {header[0]:<22}"
    for h in header[1:]:
        line += f" {h:>12}"
    print(line)
    print(f"  {'-'*22}" + f" {'-'*12}" * (len(header) - 1))
    for row in rows:
        line = f"  {row[0]:<22}"
        for v in row[1:]:
            line += f" {v:>12}"
        print(line)


def print_run(label, result, report):
    rows = [("generations", str(result.generations_run))]
    champion = result.champion
    if champion is not None:
        rows.append(("champion fitness", ", ".join(f"{v:.4f}" for v in champion.fitness)))
        rows.append(("champion rules", str(len(champion.genome))))
        rows.append(("champion conditions", str(champion.genome.num_conditions)))
    rows.append(("archive size", str(len(result.archive))))
    flat = dict(report)
    flat.update(flat.pop("esp", {}) or {})
    for key in sorted(flat):
        value = flat[key]
        if isinstance(value, float):
            rows.append((key, f"{value:.4f}"))
        elif isinstance(value, (bool, int, str)):
            rows.append((key, str(value)))
    print_table(label, ("metric", "value"), rows)


def load_run_config(args):
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
        config.evolution.seed = args.seed
    if args.workers is not None:
        config.evolution.workers = args.workers
    if args.generations is not None:
        config.evolution.generations = args.generations
    if args.out is not None:
        config.output_dir = args.out
    try:
        config.evolution.validate()
    except EvoterError as exc:
        raise ConfigError(str(exc), key="evolution") from None
    return config


def rules_schema(args):
    if getattr(args, "schema", None):
        return load_schema(args.schema)
    if getattr(args, "config", None):
        config = load_config(args.config)
        schema = domain_schema(config)
        if config.domain in ENV_DOMAINS:
            return schema
        # rules read the table as evolved: derived or normalized ranges
        return build_table(config, schema).schema
    raise ConfigError("pass --schema or --config to read rule files", key="schema")


def _run(args, runner, label):
    config = load_run_config(args)
    path = run_dir(config)
    try:
        result, report = runner(config, path)
    except EvaluatorFailure as exc:
        if exc.partial is not None:
            persist(path, config, exc.partial, {"error": str(exc)})
        raise
    print_run(label, result, report)
    print(f"\nRun saved to {path}/")
    return 0


def cmd_evolve(args):
    return _run(args, run_evolve, "Evolution")


def cmd_esp(args):
    def runner(config, path):
        return run_esp(config, path, predictor_path=args.predictor)
    return _run(args, runner, "Surrogate-assisted evolution")


def cmd_simplify(args):
    schema = rules_schema(args)
    rs = load_rules(args.rules, schema)
    modes = tuple(args.modes.split(",")) if args.modes else MODES
    corpus = None
    if args.corpus:
        corpus = list(load_csv(args.corpus, schema).frames())
    out = simplify(rs, schema, args.budget, modes=modes, corpus=corpus)
    text = render(out)
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    diff = diff_summary(rs, out)
    sys.stderr.write((diff + "\n") if diff else "no changes\n")
    if args.usage:
        for name, rules in feature_usage(out).items():
            sys.stderr.write(f"{name}: rules {', '.join(map(str, rules))}\n")
    return 0


def cmd_eval(args):
    config = load_config(args.config)
    schema = rules_schema(args)
    rs = load_rules(args.rules, schema)
    fitness, counts = evaluate_rules(config, rs)
    rows = []
    for i, rule in enumerate(rs.rules):
        body = " & ".join(render_condition(c) for c in rule.conditions)
        rows.append((f"rule {i + 1}", str(counts.rules[i]), body[:60]))
    rows.append(("default", str(counts.default), rs.default_action.name))
    kind = "mean reward" if config.domain in ENV_DOMAINS else config.scoring.kind
    print_table(f"{os.path.basename(args.rules)}: {kind} {fitness:.4f}",
                ("rule", "applied", "body"), rows)
    return 0


def cmd_render(args):
    schema = rules_schema(args)
    rs = load_rules(args.rules, schema)
    vocabulary = load_vocabulary(args.vocabulary) if args.vocabulary else {}
    sys.stdout.write(render_plain(rs, vocabulary, schema))
    return 0


def cmd_simulate(args):
    config = load_config(args.config)
    if config.domain not in ENV_DOMAINS:
        raise ConfigError(f"cannot simulate domain {config.domain}", key="domain")
    schema = rules_schema(args)
    rs = load_rules(args.rules, schema)
    records = simulate(config, rs, args.seed if args.seed is not None else config.seed)
    lines = [json.dumps(r, sort_keys=True) for r in records]
    if args.output:
        with open(args.output, "w") as f:
            f.write("\n".join(lines) + "\n")
    else:
        print("\n".join(lines))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(description="Rule-set evolution")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command")

    def run_flags(p):
        p.add_argument("--config", required=True, help="Experiment config (JSON/YAML)")
        p.add_argument("--seed", type=int, default=None, help="Override the run seed")
        p.add_argument("--workers", type=int, default=None,
                       help="Parallel evaluation width")
        p.add_argument("--out", default=None, help="Output directory for runs")
        p.add_argument("--generations", type=int, default=None)

    ev = subparsers.add_parser("evolve", help="Evolve against a dataset or simulator")
    run_flags(ev)

    esp = subparsers.add_parser("esp", help="Evolve against a fitted surrogate")
    run_flags(esp)
    esp.add_argument("--predictor", default=None,
                     help="Saved predictor JSON; skips collection and fitting")

    simp = subparsers.add_parser("simplify", help="Remove redundant rules/conditions")
    simp.add_argument("rules")
    simp.add_argument("--schema", default=None)
    simp.add_argument("--config", default=None)
    simp.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                      help="Random frames used to verify equivalence")
    simp.add_argument("--modes", default=None,
                      help=f"Comma-separated modes (default: all). Options: {','.join(MODES)}")
    simp.add_argument("--corpus", default=None,
                      help="CSV of frames; rules that never fire on it are dropped")
    simp.add_argument("--usage", action="store_true", help="Print feature usage")
    simp.add_argument("-o", "--output", default=None)

    ev2 = subparsers.add_parser("eval", help="Score a rule file")
    ev2.add_argument("rules")
    ev2.add_argument("--config", required=True)
    ev2.add_argument("--schema", default=None)

    ren = subparsers.add_parser("render", help="Plain-text rendering of a rule file")
    ren.add_argument("rules")
    ren.add_argument("--schema", default=None)
    ren.add_argument("--config", default=None)
    ren.add_argument("--vocabulary", default=None)

    sim = subparsers.add_parser("simulate", help="Dump a per-frame episode trace")
    sim.add_argument("rules")
    sim.add_argument("--config", required=True)
    sim.add_argument("--schema", default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("-o", "--output", default=None)
    return parser


COMMANDS = {
    "evolve": cmd_evolve,
    "esp": cmd_esp,
    "simplify": cmd_simplify,
    "eval": cmd_eval,
    "render": cmd_render,
    "simulate": cmd_simulate,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if args.command is None:
        parser.print_help()
        return 0
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EvoterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
