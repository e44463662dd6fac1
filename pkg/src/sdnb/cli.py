"""Command-line front end: ``sdnb verify|sweep|dwork|fgl|galois``.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 for
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import basis
from .errors import ConfigError, SdnbError
from .padic import PadicScalar, is_odd_prime, to_text

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
Q_CEILING = 2401


@dataclass
class RunConfig:
    p: int
    d: int
    n: tuple | None
    precision: int
    guard: int
    terms: int | None
    degree: int | None
    fmt: str
    out: str | None
    parallel: int
    seed: int
    samples: int

    def validate(self) -> None:
        if not is_odd_prime(self.p):
            raise ConfigError(f"p must be an odd prime, got {self.p}")
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if self.p**self.d > Q_CEILING:
            raise ConfigError(f"p^d = {self.p ** self.d} exceeds the ceiling {Q_CEILING}")
        if self.precision < 8:
            raise ConfigError("precision must be at least 8 digits")
        if self.guard < 0:
            raise ConfigError("guard must be non-negative")
        if self.n is not None:
            if len(self.n) != self.d:
                raise ConfigError(f"exponent vector needs {self.d} entries, got {len(self.n)}")
            if any(not 0 <= c < self.p for c in self.n):
                raise ConfigError(f"exponents must lie in 0..{self.p - 1}")

    def params(self) -> dict:
        return {
            "p": self.p,
            "d": self.d,
            "n": list(self.n) if self.n is not None else None,
            "precision": self.precision,
            "guard": self.guard,
            "seed": self.seed,
        }


def _parse_vector(text: str) -> tuple:
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise ConfigError(f"bad exponent vector {text!r}") from None


def _default_precision() -> int:
    env = os.environ.get("SDNB_PRECISION")
    if env is None:
        return basis.DEFAULT_PRECISION
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"SDNB_PRECISION must be an integer, got {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdnb",
        description="Verify self-dual integral normal bases of weakly ramified degree-p extensions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, need_n=False):
        sp.add_argument("--p", type=int, required=True, help="odd prime")
        sp.add_argument("--d", type=int, default=1, help="degree of K over Q_p")
        if need_n:
            sp.add_argument("--n", type=str, default=None, help="exponent vector, e.g. 1,0")
        sp.add_argument("--precision", type=int, default=None, help="working digits W")
        sp.add_argument("--guard", type=int, default=basis.DEFAULT_GUARD, help="guard digits g")
        sp.add_argument("--format", choices=["json", "text"], default="json")
        sp.add_argument("--out", type=str, default=None, help="write the report here")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("verify", help="run every check for one exponent vector")
    common(sp, need_n=True)
    sp.add_argument("--samples", type=int, default=100, help="random samples per oracle check")

    sp = sub.add_parser("sweep", help="verify every projective exponent class")
    common(sp)
    sp.add_argument("--parallel", type=int, default=1)
    sp.add_argument("--samples", type=int, default=100)

    sp = sub.add_parser("dwork", help="dump Dwork series coefficients")
    common(sp)
    sp.add_argument("--terms", type=int, default=50)

    sp = sub.add_parser("fgl", help="dump the formal group law")
    common(sp)
    sp.add_argument("--degree", type=int, default=None, help="truncation degree (default q+1)")

    sp = sub.add_parser("galois", help="dump the automorphism table")
    common(sp, need_n=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    n = getattr(args, "n", None)
    cfg = RunConfig(
        p=args.p,
        d=args.d,
        n=_parse_vector(n) if n else None,
        precision=args.precision if args.precision is not None else _default_precision(),
        guard=args.guard,
        terms=getattr(args, "terms", None),
        degree=getattr(args, "degree", None),
        fmt=args.format,
        out=args.out,
        parallel=getattr(args, "parallel", 1),
        seed=args.seed,
        samples=getattr(args, "samples", 100),
    )
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# output

def _flatten(obj, prefix: str = "") -> list[str]:
    if isinstance(obj, dict):
        out = []
        for k, v in obj.items():
            out.extend(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
        return out
    if isinstance(obj, list) and obj and any(isinstance(v, (dict, list)) for v in obj):
        out = []
        for i, v in enumerate(obj):
            out.extend(_flatten(v, f"{prefix}[{i}]"))
        return out
    return [f"{prefix} = {json.dumps(obj)}"]


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2)
    return "\n".join(_flatten(doc))


def emit(doc: dict, cfg: RunConfig) -> None:
    text = render(doc, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands

def _verify_one(p, d, n, precision, guard, seed, samples) -> dict:
    return basis.verify(p, d, n, precision, guard, seed, samples).to_dict()


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.n is None:
        raise ConfigError("verify needs --n")
    if all(c % cfg.p == 0 for c in cfg.n):
        raise ConfigError("ZeroExponentVector: exponent vector is zero mod p")
    doc = _verify_one(cfg.p, cfg.d, cfg.n, cfg.precision, cfg.guard, cfg.seed, cfg.samples)
    emit(doc, cfg)
    return EXIT_OK if all(c["pass"] for c in doc["checks"]) else EXIT_FAIL


def cmd_sweep(cfg: RunConfig) -> int:
    classes = basis.projective_exponents(cfg.p, cfg.d)
    jobs = [(cfg.p, cfg.d, n, cfg.precision, cfg.guard, cfg.seed, cfg.samples) for n in classes]
    if cfg.parallel > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallel) as pool:
            reports = list(pool.map(_verify_one, *zip(*jobs)))
    else:
        reports = [_verify_one(*j) for j in jobs]
    ok = all(all(c["pass"] for c in r["checks"]) for r in reports)
    params = cfg.params()
    params.pop("n")
    doc = {"params": params, "classes": len(classes), "pass": ok, "reports": reports}
    emit(doc, cfg)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_dwork(cfg: RunConfig) -> int:
    from .fields import build_kprime, build_unramified
    from .series import dump, dwork_series

    if cfg.terms is None or cfg.terms < 1:
        raise ConfigError("--terms must be >= 1")
    K = build_unramified(cfg.p, cfg.d, cfg.precision + cfg.guard)
    Kp = build_kprime(K)
    s = dwork_series(Kp, cfg.terms - 1)
    integral = all(c.s == 0 for c in s.coeffs)
    params = cfg.params()
    params.pop("n")
    doc = {
        "params": params,
        "terms": len(s.coeffs),
        "all_integral": integral,
        "coefficients": dump(s),
    }
    emit(doc, cfg)
    return EXIT_OK if integral else EXIT_FAIL


def cmd_fgl(cfg: RunConfig) -> int:
    from .fields import build_unramified
    from .lubin_tate import (
        different_from_filtration,
        formal_group,
        quotient_filtration,
        ramification_breaks,
        single_jump_filtration,
    )

    p, d = cfg.p, cfg.d
    q = p**d
    D = cfg.degree if cfg.degree is not None else q + 1
    if D < 1:
        raise ConfigError("--degree must be >= 1")
    F = formal_group(p, d, D, cfg.precision + cfg.guard)
    params = cfg.params()
    params.pop("n")
    params["degree"] = D
    doc = {
        "params": params,
        "coefficient_precision": F.prec,
        "coefficients": [
            [i, j, to_text(PadicScalar.from_int(p, F.prec, c))] for i, j, c in F.nonzero_terms()
        ],
        "axioms": F.axioms,
    }
    ok = all(F.axioms.values())
    if D >= q:
        resid = F.closed_form_residual()
        match = resid >= cfg.precision - basis.ACCEPT_SLACK
        doc["closed_form_match"] = match
        doc["closed_form_residual"] = resid
        K = build_unramified(p, d, F.prec)
        filt, _ = ramification_breaks(F, K)
        doc["filtration"] = filt.to_dict()
        doc["different"] = {
            "Gal(K_p2/K_p1)": different_from_filtration(filt),
            "N/K_p1": different_from_filtration(quotient_filtration(filt, p)),
            "tame": different_from_filtration(single_jump_filtration(q - 1, 0)),
            "M/K": different_from_filtration(single_jump_filtration(p, 1)),
        }
        ok = ok and match
    else:
        doc["closed_form_match"] = None
    emit(doc, cfg)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_galois(cfg: RunConfig) -> int:
    from . import galois as gal

    n = cfg.n if cfg.n is not None else (1,) + (0,) * (cfg.d - 1)
    if all(c % cfg.p == 0 for c in n):
        raise ConfigError("ZeroExponentVector: exponent vector is zero mod p")
    tower = basis.build_tower(cfg.p, cfg.d, n, cfg.precision, cfg.guard)
    table = tower.table
    params = cfg.params()
    params["n"] = list(n)
    doc = {
        "params": params,
        "order": len(table.autos),
        "delta_size": len(gal.identify_delta(table)),
        "G_size": len(gal.identify_G(table)),
    }
    doc.update(table.to_dict())
    emit(doc, cfg)
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "dwork": cmd_dwork,
    "fgl": cmd_fgl,
    "galois": cmd_galois,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SdnbError as exc:
        print(f"verification error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
