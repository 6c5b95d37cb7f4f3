"""Command-line front end.

    qeraser weak-value --n x --alpha 0.25pi
    qeraser figure2 --out results/
    qeraser figure3 --noiseless
    qeraser montecarlo --counts 10000 --trials 1000
    qeraser fit-purity --theta 0.297pi --purity 0.836 --counts 100000
    qeraser verify --trials 1000

Angles take an optional ``pi`` suffix (``0.297pi``); grids are
``start:stop:num`` (inclusive) or comma-separated lists.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, bloch, experiment, protocol, qmath, values, verification
from .errors import EraserError, OrthogonalPostselectionError, UndefinedArgumentError

# -- parsing helpers ----------------------------------------------------------------


def parse_angle(text: str) -> float:
    s = text.strip().lower().replace(" ", "")
    if s.endswith("pi"):
        coef = s[:-2]
        if coef in ("", "+"):
            return math.pi
        if coef == "-":
            return -math.pi
        return float(coef.rstrip("*")) * math.pi
    return float(s)


def parse_grid(text: str) -> tuple:
    s = text.strip()
    if ":" in s:
        start, stop, num = s.split(":")
        return tuple(float(x) for x in np.linspace(parse_angle(start), parse_angle(stop), int(num)))
    return tuple(parse_angle(x) for x in s.split(",") if x.strip())


def parse_vector(text: str) -> np.ndarray:
    s = text.strip().lower()
    if s in qmath.AXES:
        return np.array(qmath.AXES[s])
    if s.startswith("-") and s[1:] in qmath.AXES:
        return -np.array(qmath.AXES[s[1:]])
    return qmath.normalize([float(x) for x in s.split(",")])


_SPEC_PARSERS = {
    "preset": str.strip,
    "theta": parse_grid,
    "purity": lambda s: tuple(float(x) for x in s.split(",")),
    "alpha_grid": parse_grid,
    "counts_per_setting": int,
    "seed": int,
    "xi_grid": parse_grid,
    "baseline_theta": parse_angle,
    "baseline_purity": float,
    "noiseless": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


def read_config(path) -> dict:
    """Flat ``key = value`` file; keys are ScenarioSpec field names, '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SPEC_PARSERS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _SPEC_PARSERS[key](value)
    return out


# -- output -------------------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    spec: dict
    spec_digest: str
    seed: int
    output_paths: list = field(default_factory=list)
    output_digests: dict = field(default_factory=dict)
    tool_version: str = __version__

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _digest(d: dict) -> str:
    return hashlib.sha256(json.dumps(d, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _emit(command, spec_dict, seed, out_dir: Path, tables) -> RunManifest:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(command, spec_dict, _digest(spec_dict), seed)
    for name, columns, rows in tables:
        path = out_dir / f"{name}.csv"
        write_csv(path, columns, rows)
        manifest.output_paths.append(path.name)
        manifest.output_digests[path.name] = sha256_file(path)
    manifest.write(out_dir / f"{command}_manifest.json")
    return manifest


# -- commands -----------------------------------------------------------------------


def _weak_value_rows(args):
    psi_i_dir = parse_vector(args.initial)
    if args.alpha is not None:
        alpha = parse_angle(args.alpha)
        psi_f = protocol.postselection_state(alpha)
        f_dir = qmath.bloch_from_state(psi_f)
    else:
        f_dir = parse_vector(args.final)
        psi_f = qmath.state_from_bloch(f_dir)
    psi_i = qmath.state_from_bloch(psi_i_dir)
    g = parse_angle(args.g)
    if args.observable:
        entries = [complex(x.replace(" ", "")) for x in args.observable.split(",")]
        if len(entries) != 4:
            raise ValueError("--observable takes four comma-separated entries (row-major 2x2)")
        O = np.array(entries).reshape(2, 2)
        generator, n = O, None
    else:
        n = parse_vector(args.n)
        O = qmath.pauli_along(n)
        generator = 0.5 * O
    wv = values.weak_value(O, psi_i, psi_f)
    mv = values.modular_value(generator, g, psi_i, psi_f)
    rows = [("weak_value", wv), ("modular_value", mv)]
    if n is not None:
        try:
            geo = bloch.weak_argument_geometric(psi_i_dir, n, f_dir)
        except UndefinedArgumentError:
            geo = None
        rows.append(("geometric_arg", geo))
    return rows


def cmd_weak_value(args) -> int:
    try:
        rows = _weak_value_rows(args)
    except OrthogonalPostselectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print("quantity,re,im,modulus,arg_rad")
    for name, v in rows:
        if name == "geometric_arg":
            print(f"{name},,,,{'undefined' if v is None else fmt(v)}")
        else:
            print(f"{name},{fmt(v.re)},{fmt(v.im)},{fmt(v.modulus)},{fmt(v.argument)}")
    return 0


def _scenario(args, preset: str) -> experiment.ScenarioSpec:
    spec = experiment.ScenarioSpec.figure2() if preset == "figure2" else experiment.ScenarioSpec.figure3()
    overrides = read_config(args.config) if args.config else {}
    if args.theta is not None:
        overrides["theta"] = parse_grid(args.theta)
    if args.purity is not None:
        overrides["purity"] = tuple(float(x) for x in args.purity.split(","))
    if args.alpha is not None:
        overrides["alpha_grid"] = parse_grid(args.alpha)
    if args.counts is not None:
        overrides["counts_per_setting"] = args.counts
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.noiseless:
        overrides["noiseless"] = True
    d = spec.to_dict()
    d.update(overrides)
    return experiment.ScenarioSpec(**d)


def cmd_figure(args) -> int:
    spec = _scenario(args, args.command)
    runner = experiment.run_figure2 if args.command == "figure2" else experiment.run_figure3
    tables = runner(spec)
    manifest = _emit(args.command, spec.to_dict(), spec.seed, Path(args.out), tables)
    for p in manifest.output_paths:
        print(Path(args.out) / p)
    return 0


def cmd_montecarlo(args) -> int:
    seed = experiment.DEFAULT_SEED if args.seed is None else args.seed
    N = args.counts or 10_000
    trials = args.trials or 1000
    if args.theta is not None:
        theta = parse_angle(args.theta)
        P = float(args.purity) if args.purity is not None else 1.0
        alpha = parse_angle(args.alpha) if args.alpha is not None else 0.25 * math.pi
        V = protocol.interference_scan(protocol.cnot_config(theta, P, alpha)).visibility
    else:
        V = args.visibility
    records = experiment.montecarlo_records(V, N, trials, seed)
    v_hat = np.array([experiment.raw_visibility(r) for r in records])
    rows = [(k, r.n13, r.n23, v) for k, (r, v) in enumerate(zip(records, v_hat))]
    spec = {"visibility": V, "counts": N, "trials": trials, "seed": seed}
    _emit("montecarlo", spec, seed, Path(args.out), [("montecarlo", ("run", "n13", "n23", "V_hat"), rows)])
    sigma = experiment.estimator_std(V, N)
    print(f"V={fmt(V)} N={N} trials={trials}")
    print(f"mean(V_hat)={fmt(v_hat.mean())} std(V_hat)={fmt(v_hat.std(ddof=1))}")
    print(f"sigma_V={fmt(sigma)} SNR={fmt(experiment.snr(V, N))}")
    return 0


def _read_measurements(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        item = [float(row["alpha_rad"]), float(row["V_hat"])]
        if row.get("N"):
            item.append(float(row["N"]))
        out.append(tuple(item))
    return out


def cmd_fit_purity(args) -> int:
    theta = parse_angle(args.theta) if args.theta is not None else experiment.FIGURE_STRENGTHS[1][0]
    seed = experiment.DEFAULT_SEED if args.seed is None else args.seed
    if args.data:
        data = _read_measurements(args.data)
    else:
        truth = float(args.purity) if args.purity is not None else experiment.FIGURE_STRENGTHS[1][1]
        alphas = parse_grid(args.alpha) if args.alpha is not None else parse_grid("0.05pi:0.45pi:9")
        data = experiment.synthetic_visibilities(theta, truth, alphas, args.counts or 100_000, seed)
    fit = experiment.fit_purity(theta, data, lambda a: abs(math.tan(a)))
    print(f"purity={fmt(fit.purity)} chi2={fmt(fit.chi2)} points={len(data)}")
    if fit.warning:
        print(f"warning: {fit.warning}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    results = verification.run_all(trials=args.trials or 1000, seed=args.seed or 0)
    ok = True
    for res in results:
        if res.passed:
            print(f"PASS {res.name} ({res.trials} trials)")
        else:
            ok = False
            print(f"FAIL {res.name}: {json.dumps(res.counterexample, sort_keys=True)}")
    print("all suites passed" if ok else "verification failed")
    return 0 if ok else 1


# -- entry point ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (fixed default when omitted)")
    common.add_argument("--out", default="out", help="output directory for CSV files and manifest")
    common.add_argument("--counts", type=int, default=None, help="events per setting")
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--theta", default=None, help="measurement strength(s), e.g. 0.297pi")
    common.add_argument("--purity", default=None, help="meter purity (comma list for several strengths)")
    common.add_argument("--alpha", default=None, help="post-selection angle or grid")
    common.add_argument("--config", default=None, help="key = value override file")

    parser = argparse.ArgumentParser(prog="qeraser", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    wv = sub.add_parser("weak-value", parents=[common], help="weak and modular values of a qubit observable")
    wv.add_argument("--n", default="x", help="observable axis (x, y, z or nx,ny,nz)")
    wv.add_argument("--observable", default=None, help="explicit Hermitian entries a,b,c,d")
    wv.add_argument("--initial", default="z", help="pre-selected Bloch direction")
    wv.add_argument("--final", default="x", help="post-selected Bloch direction (ignored with --alpha)")
    wv.add_argument("--g", default="pi", help="coupling strength")
    wv.set_defaults(func=cmd_weak_value)

    for name in ("figure2", "figure3"):
        p = sub.add_parser(name, parents=[common], help=f"reproduce the {name} curves as CSV")
        p.add_argument("--noiseless", action="store_true", help="exact probabilities instead of sampled counts")
        p.set_defaults(func=cmd_figure)

    mc = sub.add_parser("montecarlo", parents=[common], help="visibility estimator statistics")
    mc.add_argument("--visibility", type=float, default=0.6)
    mc.set_defaults(func=cmd_montecarlo)

    fp = sub.add_parser("fit-purity", parents=[common], help="chi-square purity fit")
    fp.add_argument("--data", default=None, help="CSV with alpha_rad,V_hat[,N] columns")
    fp.set_defaults(func=cmd_fit_purity)

    vf = sub.add_parser("verify", parents=[common], help="run the oracle-equivalence suites")
    vf.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (EraserError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
