"""Command-line front end: encode, mu, search, attack, campaign, verify."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

from . import md4
from .attack import get_pipeline, run_campaign, verify_preimage
from .attack import attack as run_attack
from .encoder import encode_template, substitute_hash, write_template
from .errors import AdapterError, ParameterError, ParseError, VerificationError
from .relaxation import active_steps, build_constraint_family, lambda_from_text
from .solver import make_adapter
from .tabu import (Md4PointEvaluator, SearchConfig, load_log, run_search,
                   summarize)

log = logging.getLogger("md4relax")

DEFAULTS = {
    "k": 39,
    "K": 0,
    "backend": "pysat",
    "solver": "minisat22",
    "solver_path": None,
    "screen_time_limit": 5.0,
    "search_time_limit": None,
    "attack_time_limit": 60.0,
    "campaign_time_limit": 600.0,
    "seed": 0,
    "window": [256, 320],
    "workers": 1,
    "runs_dir": "runs",
}


def parse_hash(text: str) -> bytes:
    key = text.strip().lower()
    if key == "zeros":
        return bytes(16)
    if key == "ones":
        return b"\xff" * 16
    return md4.digest_from_hex(key)


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = dict(DEFAULTS)
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise ParseError(f"cannot read config {path}: {exc}") from None
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise ParseError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(data)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return cfg


def run_dir(cfg: dict, command: str, explicit: str | None = None) -> Path:
    if explicit:
        d = Path(explicit)
    else:
        digest = hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()[:8]
        d = Path(cfg["runs_dir"]) / f"{time.strftime('%Y%m%d-%H%M%S')}-{command}-{digest}"
    d.mkdir(parents=True, exist_ok=True)
    (d / "config.json").write_text(json.dumps(cfg, indent=1, sort_keys=True, default=str) + "\n")
    return d


def _adapter(cfg):
    return make_adapter(cfg["backend"], cfg["solver"], cfg["solver_path"])


# --- subcommands -------------------------------------------------------------

def cmd_encode(args, cfg) -> int:
    k = cfg["k"]
    template, varmap = encode_template(k)
    if args.relax:
        _, _, varmap, template = build_constraint_family(template, varmap, cfg["K"])
    if args.hash:
        template = substitute_hash(template, varmap, parse_hash(args.hash))
    side = write_template(template, varmap, args.out)
    print(f"wrote {args.out} ({template.num_vars} vars, {template.num_clauses} clauses) and {side}")
    return 0


def cmd_mu(args, cfg) -> int:
    pipe = get_pipeline(cfg["k"], cfg["K"])
    lam = lambda_from_text(args.lam, pipe.q)
    res = pipe.objective(parse_hash(args.hash)).evaluate(lam)
    print(res.mu)
    if res.conflict:
        print("UP conflict: point is screened out", file=sys.stderr)
    return 0


def cmd_search(args, cfg) -> int:
    pipe = get_pipeline(cfg["k"], cfg["K"])
    chi = parse_hash(args.hash)
    start = args.start if args.start == "random" else lambda_from_text(args.start, pipe.q)
    window = tuple(cfg["window"])
    conf = SearchConfig(start_point=start, screen_time_limit=cfg["screen_time_limit"] or None,
                        total_time_limit=cfg["search_time_limit"], seed=cfg["seed"],
                        window=window, max_evaluations=args.max_evals, workers=cfg["workers"])
    out = run_dir(cfg, "search", args.out_dir)
    cache = {}
    if args.resume:
        cache, _ = load_log(args.resume)
        log.info("replaying %d logged evaluations", len(cache))
    evaluator = Md4PointEvaluator(pipe.objective(chi), pipe.cnf_for(chi),
                                  _adapter(cfg) if conf.screen_time_limit else None,
                                  conf.screen_time_limit)
    events = []
    result = run_search(evaluator, pipe.q, conf, log_file=out / "search.jsonl",
                        cache=cache, on_event=events.append)
    summary = summarize(result, window)
    summary["hash"] = chi.hex()
    (out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    from .plotting import plot_search
    plot_search(events, out / "search.png", window)
    print(f"best {summary['best_lambda']} mu={summary['mu_best']} "
          f"after {summary['evaluations']} evaluations ({summary['stop_reason']})")
    print(f"records {len(summary['records'])} ({100 * summary['record_fraction']:.2f}%), "
          f"shortlist {len(summary['shortlist'])} ({100 * summary['shortlist_fraction']:.2f}%)")
    for s in summary["shortlist"]:
        print(f"  {s}")
    print(f"run directory: {out}")
    return 0


def cmd_attack(args, cfg) -> int:
    pipe = get_pipeline(cfg["k"], cfg["K"])
    chi = parse_hash(args.hash)
    lam = lambda_from_text(args.lam, pipe.q)
    limit = args.time_limit or cfg["attack_time_limit"]
    res = run_attack(chi, lam, limit, _adapter(cfg), cfg["k"], cfg["K"])
    out = run_dir(cfg, "attack", args.out_dir)
    (out / "attack.json").write_text(json.dumps(res.to_json(), indent=1) + "\n")
    print(f"{res.verdict.value}  {res.wall_time:.1f}s  lambda={lam} steps={active_steps(lam)}")
    print(res.note)
    if res.preimage is not None:
        print(f"preimage {res.preimage.hex()}")
    print(f"run directory: {out}")
    return 0


def cmd_campaign(args, cfg) -> int:
    pipe = get_pipeline(cfg["k"], cfg["K"])
    lam = lambda_from_text(args.lam, pipe.q)
    limit = args.time_limit or cfg["campaign_time_limit"]
    out = run_dir(cfg, "campaign", args.out_dir)

    def progress(r):
        print(f"  {r.chi.hex()}  {r.verdict.value:7s} {r.wall_time:8.1f}s", flush=True)

    rep = run_campaign(args.n, lam, cfg["seed"], limit, cfg["k"], cfg["K"], cfg["workers"],
                       cfg["backend"], cfg["solver"], cfg["solver_path"], progress=progress)
    data = rep.to_json()
    (out / "campaign.json").write_text(json.dumps(data, indent=1) + "\n")
    with open(out / "campaign.tsv", "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t")
        w.writerow(["index", "chi", "verdict", "wall_time", "verified", "preimage"])
        for i, r in enumerate(data["results"]):
            w.writerow([i, r["chi"], r["verdict"], r["wall_time"], r["verified"], r["preimage"] or ""])
    table = rep.summary_table(args.lam)
    (out / "summary.txt").write_text(table + "\n")
    from .plotting import plot_campaign
    plot_campaign(data["results"], out / "campaign.png", f"MD4-{cfg['k']}, lambda={lam}")
    print(table)
    print(f"run directory: {out}")
    return 0


def cmd_verify(args, cfg) -> int:
    chi = parse_hash(args.hash)
    block = md4.block_from_hex(args.preimage)
    steps = active_steps(lambda_from_text(args.lam, cfg["k"] - 8)) if args.lam else ()
    ok = verify_preimage(block, chi, cfg["k"], steps, cfg["K"])
    print("match" if ok else "mismatch")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="md4relax", description=__doc__)
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--k", type=int, help="number of MD4 steps (default 39)")
    p.add_argument("--K", dest="K_const", type=lambda s: int(s, 0), help="constraint constant (default 0)")
    p.add_argument("--backend", choices=["pysat", "subprocess"])
    p.add_argument("--solver", help="python-sat solver name (default minisat22)")
    p.add_argument("--solver-path", help="DIMACS solver binary for the subprocess backend")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("encode", help="write the template CNF and its variable map")
    s.add_argument("out")
    s.add_argument("--relax", action="store_true", help="include the gated relaxation family")
    s.add_argument("--hash", help="also substitute this hash value")
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("mu", help="print mu(lambda) for a hash value")
    s.add_argument("--hash", default="zeros")
    s.add_argument("--lambda", dest="lam", required=True)
    s.set_defaults(func=cmd_mu)

    s = sub.add_parser("search", help="tabu search for relaxation sets")
    s.add_argument("--hash", default="zeros")
    s.add_argument("--start", default="random")
    s.add_argument("--screen-limit", dest="screen_time_limit", type=float)
    s.add_argument("--time-limit", dest="search_time_limit", type=float)
    s.add_argument("--max-evals", type=int)
    s.add_argument("--window", nargs=2, type=int)
    s.add_argument("--resume", help="search.jsonl of an earlier run to replay")
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("attack", help="solve one preimage instance")
    s.add_argument("--hash", required=True)
    s.add_argument("--lambda", dest="lam", required=True)
    s.add_argument("--time-limit", type=float)
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("campaign", help="attack n seeded random hash values")
    s.add_argument("--n", type=int, default=500)
    s.add_argument("--lambda", dest="lam", required=True)
    s.add_argument("--time-limit", type=float)
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_campaign)

    s = sub.add_parser("verify", help="check md4_k(preimage) against a hash value")
    s.add_argument("--hash", required=True)
    s.add_argument("--preimage", required=True)
    s.add_argument("--lambda", dest="lam", help="also check chaining values at its active steps")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    overrides = {
        "k": args.k, "K": args.K_const, "backend": args.backend, "solver": args.solver,
        "solver_path": args.solver_path, "seed": args.seed, "workers": args.workers,
        "screen_time_limit": getattr(args, "screen_time_limit", None),
        "search_time_limit": getattr(args, "search_time_limit", None),
        "window": getattr(args, "window", None),
    }
    try:
        cfg = load_config(args.config, overrides)
        return args.func(args, cfg)
    except (ParameterError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AdapterError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
