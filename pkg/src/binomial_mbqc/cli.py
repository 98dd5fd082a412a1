"""Command-line harness: ``binomial-mbqc <command> [--config FILE] [--key value ...]``.

Commands: prep, cz-tomo, cluster, povm, teleport, kl-check. Settings come from
a flat ``key = value`` file and are overridden by flags of the same name
(``--betas 0.99,0.999``). Each command writes a CSV table (``#`` metadata
header carrying the config hash, tolerances and a one-line JSON summary)
and, when ``--output`` is given, a JSON summary file next to it.

Exit codes: 0 ok, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import sys
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__

COMMANDS = ("prep", "cz-tomo", "cluster", "povm", "teleport", "kl-check")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

TOLERANCES = {
    "prep": "reference F2 +-0.03; success_prob in [0.15, 0.30]",
    "cz-tomo": "delta +-0.03 of reference; psi1psi2 fidelity +-0.02; beta=1 delta < 1e-9",
    "cluster": "stabilizers > 0.9 at beta=0.999; beta=1 exactly 1 (1e-9)",
    "povm": "fidelity +-0.005; success_prob +-0.02",
    "teleport": "fidelity +-0.02 of reference; beta=1 exactly 1 (1e-9)",
    "kl-check": "residuals < 1e-10",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    betas: tuple[float, ...] = (0.99, 0.999)
    cutoff: int = 6
    prep_cutoff: int = 16
    targets: tuple[str, ...] = ("plus", "T1", "T2", "H", "A")
    output: str | None = None
    seed: int = 0
    amplitude: str = "linear"
    loss: str = "coherent"
    strategy: str = "star-optimized"
    graph: str | None = None
    states: tuple[str, ...] = ("3-chain", "5-star")
    t: float = float(np.pi / 3)
    vertex: int | None = None
    code: str = "N1S1"
    errors: tuple[str, ...] = ()

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown command {self.command!r}")
        for b in self.betas:
            if not 0 < b <= 1:
                raise ConfigError(f"betas: value {b} outside (0, 1]")
        if self.cutoff < 5:
            raise ConfigError(f"cutoff: need at least 5, got {self.cutoff}")
        if self.amplitude not in ("sqrt", "linear"):
            raise ConfigError(f"amplitude: unknown convention {self.amplitude!r}")
        if self.loss not in ("coherent", "which_path"):
            raise ConfigError(f"loss: unknown structure {self.loss!r}")
        if self.strategy not in ("per-edge", "star-optimized"):
            raise ConfigError(f"strategy: unknown strategy {self.strategy!r}")

    def digest(self) -> str:
        d = dataclasses.asdict(self)
        d.pop("output")
        blob = json.dumps(d, sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _tuple_of(conv):
    def parse(text: str):
        return tuple(conv(x.strip()) for x in text.split(",") if x.strip())

    return parse


def _optional(conv):
    def parse(text: str):
        return None if text.strip().lower() in ("", "none") else conv(text)

    return parse


PARSERS: dict[str, Callable[[str], object]] = {
    "betas": _tuple_of(float),
    "cutoff": int,
    "prep_cutoff": int,
    "targets": _tuple_of(str),
    "output": _optional(str),
    "seed": int,
    "amplitude": str,
    "loss": str,
    "strategy": str,
    "graph": _optional(str),
    "states": _tuple_of(str),
    "t": float,
    "vertex": _optional(int),
    "code": str,
    "errors": _tuple_of(str),
}
ALIASES = {"beta": "betas", "target": "targets"}


def parse_config_text(text: str) -> dict[str, object]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out.update(_convert(key, value))
    return out


def _convert(key: str, value: str) -> dict[str, object]:
    key = key.replace("-", "_")
    key = ALIASES.get(key, key)
    if key not in PARSERS:
        raise ConfigError(f"{key}: unknown configuration key")
    try:
        return {key: PARSERS[key](value)}
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {value!r} ({exc})") from None


def build_config(argv: list[str]) -> RunConfig:
    parser = argparse.ArgumentParser(prog="binomial-mbqc", add_help=True)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=None, help="flat key = value file")
    parser.add_argument("--version", action="version", version=__version__)
    ns, rest = parser.parse_known_args(argv)
    values: dict[str, object] = {}
    if ns.config:
        try:
            text = Path(ns.config).read_text()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {ns.config} ({exc.strerror})") from None
        values.update(parse_config_text(text))
    i = 0
    while i < len(rest):
        tok = rest[i]
        if not tok.startswith("--"):
            raise ConfigError(f"{tok}: unexpected argument")
        if "=" in tok:
            key, value = tok[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(rest):
                raise ConfigError(f"{tok[2:]}: missing value")
            key, value = tok[2:], rest[i + 1]
            i += 2
        values.update(_convert(key, value))
    try:
        return RunConfig(command=ns.command, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# formatting


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if v == 0:
            return "0"
        return f"{v:.6g}"
    return str(x)


def _round(obj):
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.6g}")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *row) -> None:
        self.rows.append(list(row))

    def to_csv(self, meta: dict[str, str]) -> str:
        buf = io.StringIO()
        for k, v in meta.items():
            buf.write(f"# {k}: {v}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(fmt(x) for x in row) + "\n")
        return buf.getvalue()


def _model(cfg: RunConfig, beta: float):
    from .cavity import CavityModel

    return CavityModel(beta_eff=beta, amplitude=cfg.amplitude, loss=cfg.loss)


# ---------------------------------------------------------------------------
# commands


def cmd_prep(cfg: RunConfig):
    from .prep import PrepConfig, get_target, prepare

    pc = PrepConfig(cutoff=cfg.prep_cutoff)
    table = Table(["name", "beta", "F1", "F2", "success_prob", "alpha", "r", "beta_rot", "zeta"])
    summary = []
    for beta in cfg.betas:
        for name in cfg.targets:
            try:
                target = get_target(name)
            except KeyError as exc:
                raise ConfigError(f"targets: {exc.args[0]}") from None
            res = prepare(target, _model(cfg, beta), pc)
            table.add(name, beta, res.fidelity_first, res.fidelity, res.success_prob, res.alpha, res.r, res.beta_rot, res.zeta)
            summary.append({"name": name, "beta": beta, "F2": res.fidelity, "success_prob": res.success_prob})
    return table, {"rows": summary}


def cmd_cz_tomo(cfg: RunConfig):
    from .codes import loss_code
    from .gates import PAULI_LABELS, gate_fidelity_example, process_map

    code = loss_code(cfg.cutoff)
    table = Table(["beta", "row"] + list(PAULI_LABELS))
    summary = []
    for beta in cfg.betas:
        model = _model(cfg, beta)
        pm = process_map(model, code)
        for label, row in zip(PAULI_LABELS, pm.matrix):
            table.add(beta, label, *row)
        summary.append(
            {
                "beta": beta,
                "delta": pm.delta,
                "fidelity_psi1_psi2": gate_fidelity_example(model, code),
                "max_leakage": max(pm.leakage),
            }
        )
    return table, {"rows": summary}


def _load_graph(cfg: RunConfig):
    from .cluster import parse_graph, star_graph

    if cfg.graph is None:
        return star_graph(5)
    try:
        return parse_graph(Path(cfg.graph).read_text())
    except OSError as exc:
        raise ConfigError(f"graph: cannot read {cfg.graph} ({exc.strerror})") from None
    except ValueError as exc:
        raise ConfigError(f"graph: {exc}") from None


def cmd_cluster(cfg: RunConfig):
    from .cluster import build_cluster, stabilizer_expectations
    from .codes import loss_code

    graph = _load_graph(cfg)
    code = loss_code(cfg.cutoff)
    strategy = cfg.strategy if graph.star_center() is not None else "per-edge"
    table = Table(["beta", "strategy", "vertex", "stabilizer"])
    summary = []
    for beta in cfg.betas:
        state = build_cluster(graph, _model(cfg, beta), strategy, code)
        rep = stabilizer_expectations(state, graph, code)
        for v, val in sorted(rep.values.items()):
            table.add(beta, strategy, v, val)
        summary.append({"beta": beta, "strategy": strategy, "stabilizers": rep.values, "minimum": rep.minimum})
    return table, {"rows": summary}


def cmd_povm(cfg: RunConfig):
    from .cluster import chain_graph, ideal_cluster, star_graph
    from .codes import loss_code
    from .povm import ancilla_state, measure_xy
    from .prep import PrepConfig

    code = loss_code(cfg.cutoff)
    graphs = {"3-chain": (chain_graph(3), 1), "5-star": (star_graph(5), 0)}
    for s in cfg.states:
        if s not in graphs:
            raise ConfigError(f"states: unknown state {s!r}")
    table = Table(["state", "beta", "t", "vertex", "fidelity", "success_prob"])
    summary = []
    for beta in cfg.betas:
        anc = ancilla_state(cfg.t, _model(cfg, beta), PrepConfig(cutoff=cfg.prep_cutoff))
        for s in cfg.states:
            graph, default_vertex = graphs[s]
            vertex = default_vertex if cfg.vertex is None else cfg.vertex
            if not 0 <= vertex < len(graph.vertices):
                raise ConfigError(f"vertex: {vertex} outside the {s} register")
            out = measure_xy(ideal_cluster(graph, code), vertex, cfg.t, ancilla=anc)
            table.add(s, beta, cfg.t, vertex, out.fidelity, out.success_prob)
            summary.append({"state": s, "beta": beta, "fidelity": out.fidelity, "success_prob": out.success_prob})
    return table, {"rows": summary}


def cmd_teleport(cfg: RunConfig):
    from .cluster import teleportation_test
    from .codes import loss_code

    code = loss_code(cfg.cutoff)
    table = Table(["beta", "strategy", "fidelity", "detected_probability"])
    summary = []
    for beta in cfg.betas:
        res = teleportation_test(_model(cfg, beta), cfg.strategy, code)
        table.add(beta, cfg.strategy, res.fidelity, res.detected_probability)
        summary.append({"beta": beta, "fidelity": res.fidelity})
    return table, {"rows": summary}


CODES = {"N1S1": (1, 1), "N2S1": (2, 1), "N1S0": (1, 0)}
DEFAULT_ERRORS = {"N1S1": ("I", "a"), "N2S1": ("I", "a", "n"), "N1S0": ("I",)}


def cmd_kl_check(cfg: RunConfig):
    from .codes import error_operators, kl_check, make_code

    if cfg.code not in CODES:
        raise ConfigError(f"code: unknown code {cfg.code!r} (choose from {', '.join(CODES)})")
    N, S = CODES[cfg.code]
    cutoff = max(cfg.cutoff, (N + 1) * (S + 1) + 2)
    code = make_code(N, S, cutoff)
    names = cfg.errors or DEFAULT_ERRORS[cfg.code]
    try:
        ops = error_operators(cutoff, names)
    except ValueError as exc:
        raise ConfigError(f"errors: {exc}") from None
    rep = kl_check(code, ops)
    table = Table(["E_k", "E_l", "alpha_re", "alpha_im", "off_logical", "diagonal_mismatch"])
    for k, lk in enumerate(rep.labels):
        for l, ll in enumerate(rep.labels):
            a = rep.alpha[k, l]
            table.add(lk, ll, a.real, a.imag, rep.off_logical[k, l], rep.diagonal_mismatch[k, l])
    return table, {"code": cfg.code, "errors": list(names), "max_residual": rep.max_residual, "passes": rep.passes()}


HANDLERS = {
    "prep": cmd_prep,
    "cz-tomo": cmd_cz_tomo,
    "cluster": cmd_cluster,
    "povm": cmd_povm,
    "teleport": cmd_teleport,
    "kl-check": cmd_kl_check,
}


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    np.random.seed(cfg.seed)  # nothing is sampled; pinned for reproducibility of future hooks
    table, summary = HANDLERS[cfg.command](cfg)
    meta = {
        "command": cfg.command,
        "version": __version__,
        "config_hash": cfg.digest(),
        "seed": str(cfg.seed),
        "loss_model": f"amplitude={cfg.amplitude} loss={cfg.loss}",
        "tolerance": TOLERANCES[cfg.command],
    }
    doc = {"meta": dict(meta), "summary": _round(summary)}
    meta["summary"] = json.dumps(doc["summary"], sort_keys=True)
    csv_text = table.to_csv(meta)
    if cfg.output:
        out = Path(cfg.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(csv_text)
        out.with_suffix(".json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        stdout.write(csv_text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = build_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        traceback.print_exc(file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
