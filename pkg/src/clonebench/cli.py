"""Command-line harness: ``clonebench run-game | optimize | verify``.

Experiments are described by an INI file::

    [experiment]
    name = bb84-trivial
    kind = game            ; or moe
    game = bb84
    lambda = 1
    params = n=2, oracle_seed=3
    strategy = trivial-B   ; trivial-C, token-to-B, token-to-C, measure-and-split:01, file:path.json
    mode = exact           ; or sampled (then trials and seed are required)
    trials = 1000
    seed = 7

    [seesaw]
    starts = 20
    max_iters = 50
    tol = 1e-9
    dims = 2, 2

    [output]
    path = report.json
    format = json

Exit codes: 0 success, 1 a checked bound failed, 2 configuration error,
3 the run exceeds the exact-enumeration budget or the dimension guard.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from . import adversaries as adv
from . import bounds, suites
from .games import BudgetError, ExperimentConfig, GAME_CATALOG, make_game, run_cloning_experiment
from .qcore import DimensionError

log = logging.getLogger("clonebench")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3
CSV_COLUMNS = ("name", "lambda", "value", "stderr", "bound", "bound_source", "pass")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    name: str
    kind: str = "game"
    game: str = "bb84"
    lam: int = 1
    params: dict = field(default_factory=dict)
    strategy: str = "trivial-B"
    mode: str = "exact"
    trials: int | None = None
    seed: int | None = None
    out: str | None = None
    fmt: str = "json"
    starts: int = 20
    max_iters: int = 50
    tol: float = 1e-9
    dims: tuple | None = None

    def echo(self) -> dict:
        d = dict(self.__dict__)
        d["lambda"] = d.pop("lam")
        d["format"] = d.pop("fmt")
        d["dims"] = list(self.dims) if self.dims else None
        return d


def _int(section, key, default=None, minimum=None):
    raw = section.get(key)
    if raw is None or raw.strip() == "":
        return default
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None
    if minimum is not None and v < minimum:
        raise ConfigError(f"{key} must be at least {minimum}")
    return v


def _params(text: str) -> dict:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in item:
            raise ConfigError(f"game parameter {item!r} is not key=value")
        k, v = (s.strip() for s in item.split("=", 1))
        out[k] = v
    return out


def load_config(path: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from None
    if not cp.has_section("experiment"):
        raise ConfigError("config needs an [experiment] section")
    ex = cp["experiment"]
    kind = ex.get("kind", "game").strip()
    if kind not in ("game", "moe"):
        raise ConfigError(f"kind must be game or moe, got {kind!r}")
    game = ex.get("game", "bb84-cd" if kind == "moe" else "bb84").strip()
    if game not in GAME_CATALOG:
        raise ConfigError(f"unknown game {game!r}")
    if kind == "moe" and game != "bb84-cd":
        raise ConfigError("moe experiments use the bb84-cd game")
    mode = ex.get("mode", "exact").strip()
    if mode not in ("exact", "sampled"):
        raise ConfigError(f"mode must be exact or sampled, got {mode!r}")
    trials = _int(ex, "trials", minimum=1)
    if mode == "exact" and trials is not None:
        raise ConfigError("exact mode takes no trials field")
    if mode == "sampled" and trials is None:
        raise ConfigError("sampled mode needs trials")
    if kind == "moe" and mode != "exact":
        raise ConfigError("moe experiments are exact only")
    cfg = RunConfig(
        name=ex.get("name", Path(path).stem).strip(),
        kind=kind,
        game=game,
        lam=_int(ex, "lambda", 1, minimum=1),
        params=_params(ex.get("params", "")),
        strategy=ex.get("strategy", "trivial-B").strip(),
        mode=mode,
        trials=trials,
        seed=_int(ex, "seed", minimum=0),
    )
    if cp.has_section("output"):
        o = cp["output"]
        cfg.out = o.get("path") or None
        cfg.fmt = o.get("format", "json").strip()
        if cfg.fmt not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {cfg.fmt!r}")
    if cp.has_section("seesaw"):
        s = cp["seesaw"]
        cfg.starts = _int(s, "starts", 20, minimum=1)
        cfg.max_iters = _int(s, "max_iters", 50, minimum=0)
        try:
            cfg.tol = float(s.get("tol", "1e-9"))
        except ValueError:
            raise ConfigError("tol must be a number") from None
        if s.get("dims"):
            try:
                cfg.dims = tuple(int(x) for x in s["dims"].split(","))
            except ValueError:
                raise ConfigError("dims must be comma-separated integers") from None
            want = 3 if kind == "moe" else 2
            if len(cfg.dims) != want or min(cfg.dims) < 1:
                raise ConfigError(f"dims needs {want} positive entries")
    return cfg


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def _build_game(cfg: RunConfig):
    try:
        return make_game(cfg.game, cfg.lam, **cfg.params)
    except DimensionError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"cannot build game: {e}") from None


def _build_strategy(cfg: RunConfig, game):
    s = cfg.strategy
    if s.startswith("file:"):
        try:
            return adv.loads_strategy(Path(s[5:]).read_text(encoding="utf-8"))
        except (OSError, ValueError, KeyError) as e:
            raise ConfigError(f"cannot load strategy file: {e}") from None
    if s.startswith("measure-and-split:"):
        try:
            return adv.measure_and_split(game, s.split(":", 1)[1])
        except ValueError as e:
            raise ConfigError(str(e)) from None
    # "trivial-X" names the party that guesses; "token-to-X" names the party holding the token
    table = {"trivial-B": ("C", "best"), "trivial-C": ("B", "best"), "token-to-B": ("B", "best"),
             "token-to-C": ("C", "best"), "trivial-B-blind": ("C", "blind"), "trivial-C-blind": ("B", "blind")}
    if s not in table:
        raise ConfigError(f"unknown strategy {s!r}")
    side, guess = table[s]
    try:
        return adv.trivial_strategy(game, side, guess)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _as_moe(strat, lam):
    if isinstance(strat, adv.MoEStrategy):
        return strat
    return adv.cloning_to_moe(strat, lam)


def _write_atomic(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=str(target.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt_num(x):
    return "" if x is None else repr(float(x))


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report["records"]:
        w.writerow([r["name"], "" if r["lambda"] is None else r["lambda"], _fmt_num(r["value"]), _fmt_num(r["stderr"]),
                    _fmt_num(r["bound"]), r["bound_source"] or "", "" if r["pass"] is None else str(r["pass"]).lower()])
    return buf.getvalue()


def make_report(command: str, config: dict, records: list, info: dict | None = None) -> dict:
    checked = [r for r in records if r["pass"] is not None]
    passed = sum(1 for r in checked if r["pass"])
    return {
        "tool": "clonebench",
        "version": __version__,
        "command": command,
        "config": config,
        "records": records,
        "summary": {"records": len(records), "checked": len(checked), "passed": passed,
                    "failed": len(checked) - passed, "ok": passed == len(checked)},
        "info": info or {},
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def emit(report: dict, out: str | None, fmt: str) -> None:
    text = render(report, fmt)
    if out:
        _write_atomic(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_run_game(cfg: RunConfig) -> tuple[dict, int]:
    game = _build_game(cfg)
    strat = _build_strategy(cfg, game)
    records = []
    if cfg.kind == "moe":
        moe = _as_moe(strat, cfg.lam)
        v = adv.evaluate_moe_exact(cfg.lam, moe)
        records.append(suites.record(cfg.name, cfg.lam, v, bounds.moe_cd_bound(cfg.lam), suites.SRC_MOE))
    else:
        if isinstance(strat, adv.MoEStrategy):
            raise ConfigError("an entanglement-game strategy cannot play the cloning experiment")
        if cfg.mode == "sampled" and cfg.seed is None:
            raise ConfigError("sampled mode needs a seed")
        try:
            ex = ExperimentConfig(game, mode=cfg.mode, trials=cfg.trials, seed=cfg.seed)
            out = run_cloning_experiment(ex, strat)
        except DimensionError:
            raise
        except ValueError as e:
            raise ConfigError(f"strategy does not fit the game: {e}") from None
        records.append(suites.record(cfg.name, cfg.lam, out.win_probability, stderr=out.stderr))
        records.append(suites.record(f"{cfg.name}/B-accept", cfg.lam, out.b_accept))
        records.append(suites.record(f"{cfg.name}/C-accept", cfg.lam, out.c_accept))
    rep = make_report("run-game", cfg.echo(), records)
    return rep, EXIT_OK if rep["summary"]["ok"] else EXIT_FAIL


def cmd_optimize(cfg: RunConfig) -> tuple[dict, int, str]:
    from .seesaw import MoEObjective, multistart

    seed = 0 if cfg.seed is None else cfg.seed
    if cfg.kind == "moe":
        objective = MoEObjective(cfg.lam)
        bound, source = bounds.moe_cd_bound(cfg.lam), suites.SRC_MOE
    else:
        objective = ExperimentConfig(_build_game(cfg))
        bound, source = None, None
    best, runs = multistart(objective, cfg.starts, seed, dims=cfg.dims, max_iters=cfg.max_iters, tol=cfg.tol)
    records = [suites.record(cfg.name, cfg.lam, best.value, bound, source)]
    for i, r in enumerate(runs):
        records.append(suites.record(f"{cfg.name}/start{i}", cfg.lam, r.value, bound, source))
    info = {"monotone": all(r.monotone for r in runs), "converged": sum(r.converged for r in runs),
            "best_trace": best.trace}
    rep = make_report("optimize", cfg.echo(), records, info)
    return rep, EXIT_OK if rep["summary"]["ok"] else EXIT_FAIL, adv.dumps_strategy(best.strategy)


def cmd_verify(suite: str, seed: int) -> tuple[dict, int, list]:
    if suite != "all" and suite not in suites.SUITES:
        raise ConfigError(f"unknown suite {suite!r}; known: all, {', '.join(suites.SUITES)}")
    results = suites.run_suite(suite, seed)
    records = [r for res in results for r in res.records]
    failures = [f for res in results for f in res.failures]
    info = {res.name: {"passed": res.counts[0], "checked": res.counts[1], **res.info} for res in results}
    rep = make_report("verify", {"suite": suite, "seed": seed}, records, info)
    return rep, EXIT_OK if rep["summary"]["ok"] else EXIT_FAIL, failures


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clonebench", description="Exact simulation of quantum cloning games.")
    p.add_argument("--version", action="version", version=f"clonebench {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_config):
        sp.add_argument("--config", required=need_config, help="INI experiment description")
        sp.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        sp.add_argument("--out", default=None, help="report path (stdout if omitted)")
        sp.add_argument("--format", choices=("json", "csv"), default=None)

    common(sub.add_parser("run-game", help="evaluate one strategy"), True)
    common(sub.add_parser("optimize", help="multi-start see-saw search"), True)
    v = sub.add_parser("verify", help="run a seeded property suite")
    v.add_argument("suite", help=f"one of: all, {', '.join(suites.SUITES)}")
    common(v, False)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.seed is not None and args.seed < 0:
        print("error: seed must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "verify":
            seed = 0 if args.seed is None else args.seed
            rep, code, failures = cmd_verify(args.suite, seed)
            out, fmt = args.out, args.format or "json"
            if failures and out:
                _write_atomic(out + ".repro.json", json.dumps({"suite": args.suite, "seed": seed, "failures": failures},
                                                              sort_keys=True, indent=2) + "\n")
        else:
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg.seed = args.seed
            out, fmt = args.out or cfg.out, args.format or cfg.fmt
            if args.command == "run-game":
                rep, code = cmd_run_game(cfg)
            else:
                rep, code, strat_text = cmd_optimize(cfg)
                if out:
                    _write_atomic(out + ".strategy.json", strat_text + "\n")
                else:
                    rep["strategy"] = json.loads(strat_text)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetError, DimensionError) as e:
        print(f"budget error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    emit(rep, out, fmt)
    s = rep["summary"]
    print(f"{rep['command']}: {s['passed']}/{s['checked']} checked records pass", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
