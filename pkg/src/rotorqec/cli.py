"""Command-line front end.

Every subcommand reads an optional TOML file (``--config``) whose keys match
:class:`RunConfig`; command-line flags override file values. Exit codes: 0 on
success, 1 when a check fails, 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
FAMILIES = ("ideal", "cat", "binomial", "contrived")
SCHEMES = ("direct", "teleport")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    family: str = "ideal"
    N: int = 2
    k0: int | None = None  # None: 3 for the direct scheme, 1 for teleportation, 0 otherwise
    M: int = 12
    alpha: float = 2.0
    K: int = 4
    dim: int | None = None
    pad: int | None = None
    tol: float | None = None
    seed: int = 0
    trials: int = 100
    scheme: str = "direct"
    prior: str = "symmetric"
    gamma: float = 0.0
    sigma: float = 0.0
    gates: list = field(default_factory=list)
    Ns: list = field(default_factory=lambda: [1, 2, 3, 4])
    tradeoff_M: int = 14
    alphas: list = field(default_factory=list)
    contrived: bool = False
    out_dir: str = "rotorqec-out"

    def validate(self) -> "RunConfig":
        from .gates import KINDS
        from .qec import PRIOR_ALIASES, PRIOR_KINDS

        def need(cond, name, msg):
            if not cond:
                raise ConfigError(f"{name}: {msg} (got {getattr(self, name)!r})")

        need(self.family in FAMILIES, "family", f"must be one of {FAMILIES}")
        need(isinstance(self.N, int) and self.N >= 1, "N", "must be a positive integer")
        need(self.k0 is None or (isinstance(self.k0, int) and self.k0 >= 0), "k0", "must be a non-negative integer")
        need(isinstance(self.M, int) and self.M >= 2, "M", "must be an integer >= 2")
        need(self.alpha > 0, "alpha", "must be positive")
        need(isinstance(self.K, int) and self.K >= 1, "K", "must be a positive integer")
        need(self.dim is None or (isinstance(self.dim, int) and self.dim >= 2), "dim", "must be an integer >= 2")
        need(self.pad is None or (isinstance(self.pad, int) and self.pad >= 0), "pad", "must be a non-negative integer")
        need(self.tol is None or self.tol > 0, "tol", "must be positive")
        need(isinstance(self.seed, int) and self.seed >= 0, "seed", "must be a non-negative integer")
        need(isinstance(self.trials, int) and self.trials >= 0, "trials", "must be a non-negative integer")
        need(self.scheme in SCHEMES, "scheme", f"must be one of {SCHEMES}")
        need(self.prior in PRIOR_ALIASES or self.prior in PRIOR_KINDS, "prior", f"must be one of {tuple(PRIOR_ALIASES)}")
        need(self.gamma >= 0, "gamma", "must be non-negative")
        need(self.sigma >= 0, "sigma", "must be non-negative")
        need(all(g in KINDS for g in self.gates), "gates", f"entries must be gate kinds {KINDS}")
        need(self.Ns and all(isinstance(n, int) and n >= 1 for n in self.Ns), "Ns", "must list positive integers")
        need(isinstance(self.tradeoff_M, int) and self.tradeoff_M >= 2, "tradeoff_M", "must be an integer >= 2")
        need(all(a > 0 for a in self.alphas), "alphas", "must list positive amplitudes")
        return self


_FIELD_TYPES = {
    "family": str, "N": int, "k0": int, "M": int, "alpha": float, "K": int, "dim": int, "pad": int, "tol": float,
    "seed": int, "trials": int, "scheme": str, "prior": str, "gamma": float, "sigma": float, "gates": list,
    "Ns": list, "tradeoff_M": int, "alphas": list, "contrived": bool, "out_dir": str,
}


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    out = {}
    for key, val in raw.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{key}: unknown config key; expected one of {sorted(_FIELD_TYPES)}")
        typ = _FIELD_TYPES[key]
        if typ is float and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        if typ is int and isinstance(val, bool) or not isinstance(val, typ):
            raise ConfigError(f"{key}: expected {typ.__name__}, got {type(val).__name__} {val!r}")
        out[key] = val
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values = load_config(args.config) if args.config else {}
    for name in _FIELD_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return RunConfig(**values).validate()


# --- helpers ------------------------------------------------------------------

def make_config_code(cfg: RunConfig, k0: int, headroom: int = 0, min_dim: int = 0):
    from .codes import (
        make_binomial_profile,
        make_cat_profile,
        make_code,
        make_contrived_profile,
        make_ideal_profile,
        required_dim,
    )

    if cfg.family == "ideal":
        prof = make_ideal_profile(cfg.N, cfg.M)
    elif cfg.family == "binomial":
        prof = make_binomial_profile(cfg.N, cfg.K)
    elif cfg.family == "contrived":
        prof = make_contrived_profile(cfg.N)
    else:
        prof = make_cat_profile(cfg.N, cfg.alpha, cfg.dim or 120, k0)
    need = max(required_dim(prof.N, len(prof), k0, headroom), min_dim)
    dim = cfg.dim if cfg.dim is not None else need
    if dim < need:
        raise ConfigError(f"dim: {cfg.family} code with k0={k0} needs at least {need} levels (got {dim})")
    return make_code(prof, dim=dim, k0=k0)


def _out(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.out_dir) / name


# --- subcommands --------------------------------------------------------------

def cmd_verify_propagation(cfg: RunConfig) -> int:
    from .gates import PROPAGATION_KINDS
    from .propagation import propagation_sweep, write_sweep_csv

    kinds = [g for g in PROPAGATION_KINDS if not cfg.gates or g in cfg.gates]
    if not kinds:
        raise ConfigError(f"gates: none of {cfg.gates} has a propagation rule")
    tol = cfg.tol if cfg.tol is not None else 1e-9
    rows = propagation_sweep(kinds, d=cfg.dim or 48, pad=cfg.pad)
    path = write_sweep_csv(rows, _out(cfg, "propagation.csv"))
    worst = {}
    for r in rows:
        worst[r.gate] = max(worst.get(r.gate, 0.0), r.residual)
    for g, v in worst.items():
        print(f"{'PASS' if v < tol else 'FAIL'} {g:<18} max residual {v:.3e}")
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK if all(v < tol for v in worst.values()) else EXIT_FAIL


def cmd_simulate(cfg: RunConfig) -> int:
    from .qec import ChannelPrior, monte_carlo, write_monte_carlo

    k0 = cfg.k0 if cfg.k0 is not None else (3 if cfg.scheme == "direct" else 1)
    if cfg.scheme == "direct" and k0 != 3:
        raise ConfigError(f"k0: the direct scheme needs k0 = 3 (got {k0})")
    if cfg.scheme == "teleport" and k0 != 1:
        raise ConfigError(f"k0: the teleportation scheme needs k0 = 1 (got {k0})")
    # leave room for gains of a few standard deviations
    headroom = 2 * cfg.N + int(math.ceil(cfg.gamma + 4 * math.sqrt(cfg.gamma)))
    code = make_config_code(cfg, k0, headroom=headroom, min_dim=24 if cfg.scheme == "teleport" else 0)
    prior = ChannelPrior(cfg.prior, cfg.gamma, cfg.sigma)
    res = monte_carlo(code, prior, cfg.scheme, cfg.trials, cfg.seed)
    paths = write_monte_carlo(res, _out(cfg, "montecarlo.csv"), _out(cfg, "montecarlo.json"))
    s = res.summary
    if s["trials"]:
        print(f"{cfg.scheme} scheme, {s['trials']} trials: mean fidelity {s['mean_fidelity']:.6f}, "
              f"logical error rate {s['logical_error_rate']:.4f}")
    else:
        print(f"{cfg.scheme} scheme, no trials")
    print("wrote " + ", ".join(map(str, paths)))
    return EXIT_OK


def cmd_distance(cfg: RunConfig) -> int:
    from .codes import make_cat_profile, make_code
    from .distance import contrived_code_check, detectability_grid, tradeoff_row, verify_tradeoff, write_grid_csv, write_tradeoff
    from .io import write_json

    tol = cfg.tol if cfg.tol is not None else 1e-8
    rows = verify_tradeoff(cfg.Ns, cfg.tradeoff_M, tol=tol)
    ok = all(r.d_n == r.N and r.d_theta_over_pi == Fraction(1, r.N) for r in rows)
    for a in cfg.alphas:
        code = make_code(make_cat_profile(cfg.N, a, cfg.dim or 120))
        rows.append(tradeoff_row(code, tol=tol))
    for r in rows:
        print(f"{r.code:<28} N={r.N} d_n={r.d_n} d_theta={r.d_theta:.6f} product={r.product:.12f} "
              f"phase_deviation={r.phase_deviation:.3e}")
    paths = write_tradeoff(rows, _out(cfg, "tradeoff.csv"), _out(cfg, "tradeoff.json"))
    code = make_config_code(cfg, cfg.k0 or 0)
    grid = detectability_grid(code, tol=tol)
    paths.append(write_grid_csv(grid, _out(cfg, "detectability.csv")))
    if cfg.contrived:
        rep = contrived_code_check(cfg.N)
        for line in rep.lines():
            print(line)
        paths.append(write_json(_out(cfg, "contrived.json"), dataclasses.asdict(rep)))
    print("wrote " + ", ".join(map(str, paths)))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_gate_check(cfg: RunConfig) -> int:
    from .gates import KINDS, GateSpec, verify_logical_action
    from .io import write_csv

    code = make_config_code(cfg, cfg.k0 or 0)
    table = []
    for kind in cfg.gates or KINDS:
        n_modes = {"CROT": 2, "CCROT": 3}.get(kind, 1)
        if code.dim**n_modes > 10**6:
            print(f"skip {kind}: {n_modes} modes of dimension {code.dim} exceed the memory guard")
            continue
        extra = {"ell": 2} if kind in ("Rl", "RlPrime") else {"phi": 0.7} if kind == "P" else {}
        spec = GateSpec(kind, (cfg.N,) * n_modes, **extra)
        act = verify_logical_action(spec, code)
        table.append((kind, act.deviation, act.leakage, act.isometry_defect))
        print(f"{kind:<8} deviation {act.deviation:.3e} leakage {act.leakage:.3e} isometry {act.isometry_defect:.3e}")
    path = write_csv(_out(cfg, "gates.csv"), "gates", ("gate", "deviation", "leakage", "isometry_defect"), table)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_appendix_b(cfg: RunConfig) -> int:
    import numpy as np

    from .gates import GateSpec, appendixB_polynomial, gate_diagonal
    from .io import write_csv

    tol = cfg.tol if cfg.tol is not None else 1e-10
    table, ok = [], True
    for ell in range(4):
        poly = appendixB_polynomial(ell)
        diag = gate_diagonal(GateSpec("RlPrime", (cfg.N,), ell=ell), 8 * cfg.N)
        ph = diag[np.arange(8) * cfg.N]
        want = np.where(np.arange(8) % 2 == 0, 1.0, np.exp(1j * np.pi / 2**ell))
        err = float(np.max(np.abs(ph - want)))
        ok &= err < tol
        coeffs = " ".join(str(c) for c in poly.gate_coefficients)
        table.append((ell, " ".join(str(c) for c in poly.coefficients), coeffs, err))
        print(f"{'PASS' if err < tol else 'FAIL'} ell={ell} gate coefficients [{coeffs}] max phase error {err:.2e}")
    path = write_csv(_out(cfg, "appendix_b.csv"), "appendix-b", ("ell", "f_prime", "gate_coefficients", "max_phase_error"), table)
    print(f"wrote {path}")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "verify-propagation": cmd_verify_propagation,
    "simulate": cmd_simulate,
    "distance": cmd_distance,
    "gate-check": cmd_gate_check,
    "appendix-b": cmd_appendix_b,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with RunConfig keys")
    common.add_argument("--seed", type=int)
    common.add_argument("--dim", type=int, help="truncation dimension")
    common.add_argument("--pad", type=int, help="safe-subspace pad")
    common.add_argument("--tol", type=float, help="pass/fail tolerance")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--gate", dest="gates", action="append", help="restrict to a gate kind (repeatable)")
    common.add_argument("--scheme", choices=SCHEMES)
    common.add_argument("--prior", choices=("gain", "loss", "symmetric", "any"))
    common.add_argument("--trials", type=int)
    common.add_argument("--family", choices=FAMILIES)
    common.add_argument("--N", type=int, dest="N", help="code order")
    common.add_argument("--M", type=int, dest="M", help="grid points of the ideal code")
    common.add_argument("--gamma", type=float, help="mean shift count per trial")
    common.add_argument("--sigma", type=float, help="rotation noise width")
    common.add_argument("--contrived", action="store_true", default=None, help="append the contrived-code report")

    parser = argparse.ArgumentParser(prog="rotorqec", description="Rotation-code error propagation and correction.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
