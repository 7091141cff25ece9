"""Batch driver: ``dqec roundtrip | sweep | syndrome-table``.

Settings come from an optional JSON file and are overridden by flags. Exit
status is 0 on success, 1 when a check fails and 2 for usage or config errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .channels import ALL_PATTERNS, ChannelConfig, apply_error_pattern
from .dqpu import transcript_stats
from .errors import BadProbability, ConfigError, DQECError, InsufficientData
from .protocol import (
    CODE_LABELS,
    CodeBasis,
    LogicalQubitSpec,
    StabilizerPair,
    correction_from_syndrome,
    run_roundtrip,
    stabilizer_eigenvalues,
)
from .qcore import ATOL

DEFAULT_GRID = tuple(round(0.05 * k, 2) for k in range(13))
FIDELITY_TOL = 1e-9


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:step:stop`` (inclusive) or a comma list."""
    try:
        if ":" in text:
            start, step, stop = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ConfigError("grid step must be positive")
            n = int(round((stop - start) / step)) + 1
            return tuple(round(start + k * step, 12) for k in range(max(n, 0)))
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad p grid {text!r}: {exc}") from exc


@dataclass(frozen=True)
class SweepConfig:
    p_grid: tuple[float, ...] = DEFAULT_GRID
    trials: int = 10_000
    mode: str = "syndrome_correct"

    def __post_init__(self):
        if not self.p_grid:
            raise ConfigError("p grid is empty")
        if any(not (0.0 <= p <= 1.0) for p in self.p_grid):
            raise ConfigError("p grid must lie in [0, 1]")
        if not isinstance(self.trials, int) or isinstance(self.trials, bool) or self.trials < 1:
            raise ConfigError("trials must be an integer >= 1")
        if self.mode not in analysis.MODES:
            raise ConfigError(f"mode must be one of {analysis.MODES}")


@dataclass(frozen=True)
class RunConfig:
    seed: int
    basis: CodeBasis = CodeBasis.BITFLIP
    channel: ChannelConfig | None = None
    sweep: SweepConfig = field(default_factory=SweepConfig)
    specs: int = 5
    outputs: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {"seed", "basis", "channel", "sweep", "specs", "outputs"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "seed" not in d:
            raise ConfigError("seed is required")
        seed = d["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        try:
            basis = CodeBasis(d.get("basis", "bitflip"))
        except ValueError as exc:
            raise ConfigError(f"unknown basis {d.get('basis')!r}") from exc
        channel = ChannelConfig.from_dict(d["channel"]) if d.get("channel") is not None else None
        sw = d.get("sweep", {})
        if not isinstance(sw, dict) or set(sw) - {"p_grid", "trials", "mode"}:
            raise ConfigError("sweep must be an object with p_grid, trials, mode")
        grid = sw.get("p_grid", DEFAULT_GRID)
        if isinstance(grid, str):
            grid = parse_grid(grid)
        try:
            grid = tuple(float(p) for p in grid)
        except (TypeError, ValueError) as exc:
            raise ConfigError("p_grid must be a list of numbers") from exc
        sweep = SweepConfig(grid, sw.get("trials", 10_000), sw.get("mode", "syndrome_correct"))
        specs = d.get("specs", 5)
        if not isinstance(specs, int) or isinstance(specs, bool) or specs < 1:
            raise ConfigError("specs must be an integer >= 1")
        outputs = d.get("outputs", {})
        if not isinstance(outputs, dict) or set(outputs) - {"csv", "json"}:
            raise ConfigError("outputs may only name 'csv' and 'json' paths")
        return cls(seed, basis, channel, sweep, specs, dict(outputs))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "basis": self.basis.value,
            "channel": None if self.channel is None else self.channel.to_dict(),
            "sweep": {"p_grid": list(self.sweep.p_grid), "trials": self.sweep.trials, "mode": self.sweep.mode},
            "specs": self.specs,
            "outputs": dict(self.outputs),
        }

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _patterns(basis: CodeBasis):
    return [analysis.pattern_for_basis(p, basis) for p in ALL_PATTERNS]


def cmd_roundtrip(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    rng = np.random.default_rng(cfg.seed)
    specs = [LogicalQubitSpec.random(rng) for _ in range(cfg.specs)]
    ok = True
    rows = []
    print(f"roundtrip basis={cfg.basis.value} specs={cfg.specs} seed={cfg.seed}", file=out)
    print(f"{'pattern':<8} {'syndrome':<9} {'min F':>12} {'max F':>12}", file=out)
    for pattern in _patterns(cfg.basis):
        results = [run_roundtrip(s, pattern, cfg.basis, rng=rng) for s in specs]
        fids = [r.fidelity for r in results]
        syndromes = sorted({r.syndrome.bits for r in results})
        if pattern.weight <= 1 and min(fids) < 1 - FIDELITY_TOL:
            ok = False
        rows.append({"pattern": str(pattern), "syndrome": syndromes, "fidelities": fids})
        print(f"{str(pattern):<8} {','.join(syndromes):<9} {min(fids):>12.9f} {max(fids):>12.9f}", file=out)
    if "json" in cfg.outputs:
        with open(cfg.outputs["json"], "w", encoding="ascii") as fh:
            json.dump({"config": cfg.to_dict(), "rows": rows}, fh, indent=2, sort_keys=True)
    print("single-error recovery: " + ("PASS" if ok else "FAIL"), file=out)
    return 0 if ok else 1


def cmd_sweep(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    channel = cfg.channel
    if channel is not None and not channel.is_pauli:
        raise ConfigError(f"sweep needs a Pauli channel, got {channel.model}")
    records = analysis.monte_carlo_sweep(
        cfg.sweep.p_grid, cfg.sweep.trials, cfg.basis, cfg.sweep.mode, seed=cfg.seed, channel=channel
    )
    text = analysis.sweep_csv(records)
    if "csv" in cfg.outputs:
        with open(cfg.outputs["csv"], "w", newline="", encoding="ascii") as fh:
            fh.write(text)
    else:
        out.write(text)
    try:
        crossover = analysis.threshold_check(records)
        print(f"crossover estimate: p = {crossover:.4g} (theory 0.5)", file=out)
    except InsufficientData as exc:
        print(f"crossover estimate: unavailable ({exc})", file=out)
    ok = all(abs(r.mean_fidelity - r.theoretical) <= 4 * r.std_error + ATOL for r in records)
    # the polynomial only describes flips of the type the basis protects against
    matched = channel is None or channel.model == cfg.basis.value
    return 0 if ok or not matched else 1


def _probability_label(k: int) -> str:
    parts = {0: "", 1: "p", 2: "p^2", 3: "p^3"}[k], {0: "", 1: "(1-p)", 2: "(1-p)^2", 3: "(1-p)^3"}[3 - k]
    return "".join(parts)


def cmd_syndrome_table(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    rng = np.random.default_rng(cfg.seed)
    spec = LogicalQubitSpec.random(rng)
    pair = StabilizerPair.for_basis(cfg.basis)
    print(f"syndrome table basis={cfg.basis.value} stabilizers={pair.s1},{pair.s2}", file=out)
    print(f"{'pattern':<8} {'prob':<10} {'syndrome':<9} {'eigen':<8} {'correction':<11} note", file=out)
    seen: dict[str, str] = {}
    last = None
    for pattern in _patterns(cfg.basis):
        r = run_roundtrip(spec, pattern, cfg.basis, rng=rng)
        noisy = apply_error_pattern(spec.code_word(cfg.basis), pattern, CODE_LABELS)
        e1, e2 = stabilizer_eigenvalues(noisy, pair)
        corr = correction_from_syndrome(r.syndrome, cfg.basis)
        note = ""
        if pattern.weight >= 2:
            twin = seen.get(r.syndrome.bits)
            note = f"aliased with {twin}" if twin else "undetected"
        else:
            seen[r.syndrome.bits] = str(pattern)
        prob = _probability_label(pattern.weight)
        eig = f"({'+' if e1 > 0 else '-'},{'+' if e2 > 0 else '-'})"
        print(f"{str(pattern):<8} {prob:<10} {r.syndrome.bits:<9} {eig:<8} {str(corr) if corr else '-':<11} {note}", file=out)
        last = r
    stats = transcript_stats(last.network)
    enc, dec = stats["encode"], stats["decode"]
    print("resources (encode/decode):", file=out)
    print(f"  EPR pairs        {enc.epr_pairs}/{dec.epr_pairs}", file=out)
    print(f"  measured qubits  {enc.measured_qubits}/{dec.measured_qubits}", file=out)
    print(f"  measurements     {enc.measurements}/{dec.measurements}", file=out)
    print(f"  gates            {enc.gates}/{dec.gates}", file=out)
    return 0


COMMANDS = {"roundtrip": cmd_roundtrip, "sweep": cmd_sweep, "syndrome-table": cmd_syndrome_table}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dqec", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--basis", choices=[b.value for b in CodeBasis])
    ap.add_argument("--p-grid", help="start:step:stop or comma list")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--mode", choices=analysis.MODES)
    ap.add_argument("--specs", type=int, help="random logical states per pattern (roundtrip)")
    ap.add_argument("--out", help="output path (CSV for sweep, JSON for roundtrip)")
    return ap


def load_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    data = dict(data)
    sweep = dict(data.get("sweep") or {})
    if args.seed is not None:
        data["seed"] = args.seed
    if args.basis is not None:
        data["basis"] = args.basis
    if args.specs is not None:
        data["specs"] = args.specs
    if args.p_grid is not None:
        sweep["p_grid"] = list(parse_grid(args.p_grid))
    if args.trials is not None:
        sweep["trials"] = args.trials
    if args.mode is not None:
        sweep["mode"] = args.mode
    if sweep:
        data["sweep"] = sweep
    if args.out is not None:
        key = "csv" if args.command == "sweep" else "json"
        data["outputs"] = {**(data.get("outputs") or {}), key: args.out}
    return RunConfig.from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, BadProbability) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DQECError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
