"""Command-line front end.

Settings come from an INI file (``--config``) and are overridden by flags of
the same name, e.g. ``[state] T_C = 0.9`` or ``--T-C 0.9``. Every subcommand
writes CSV with a header row, comma delimiters and 9 significant digits.

Exit status: 0 on success, 1 on invalid input, 2 when an internal
consistency check fails.
"""

import argparse
import configparser
import csv
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .catalysis import M_MAX, CatalysisParams, lambda_from_variance, moments
from .channel import ProtocolParams, key_rate
from .errors import CatQKDError, CutoffError, DomainError, IntegrityError, NoDistanceError
from .optimize import OptDomain, max_distance, optimize_all, optimize_fixed_variance

__all__ = ["ConfigError", "RunConfig", "KEYS", "load_config", "build_parser", "main"]

_NONE = object()

# key -> (section, type, default, help); every key is also a flag ``--key``
KEYS = {
    "V": ("state", float, None, "modulation variance (alternative to lambda)"),
    "lambda": ("state", float, None, "squeezing parameter tanh(r)"),
    "d": ("state", float, 0.0, "displacement"),
    "T_C": ("state", float, 1.0, "catalysis beam-splitter transmissivity"),
    "m": ("state", int, 0, "number of catalysing photons"),
    "m_max": ("state", int, M_MAX, "largest accepted m"),
    "L_BC": ("protocol", float, 0.0, "Bob-relay distance in km"),
    "gamma": ("protocol", float, 0.2, "fibre loss in dB/km"),
    "eps_A": ("protocol", float, 0.002, "Alice-side excess noise (SNU)"),
    "eps_B": ("protocol", float, 0.002, "Bob-side excess noise (SNU)"),
    "beta": ("protocol", float, 0.96, "reconciliation efficiency"),
    "gain": ("protocol", float, None, "displacement gain (default: asymptotic optimum)"),
    "variable": ("sweep", str, None, "swept quantity: L (keyrate, optimize) or d, V, T_C (maxdist)"),
    "start": ("sweep", float, None, "first sweep value"),
    "stop": ("sweep", float, None, "last sweep value (inclusive)"),
    "step": ("sweep", float, None, "sweep increment"),
    "mode": ("optimize", str, "fixed-variance", "none, fixed-variance or all"),
    "families": ("optimize", str, "tmsv,0,1", "comma list of tmsv and catalysis orders"),
    "V_min": ("optimize", float, 1.0, "lower variance bound"),
    "V_max": ("optimize", float, 15.0, "upper variance bound"),
    "d_max": ("optimize", float, 5.0, "upper displacement bound"),
    "T_min": ("optimize", float, 0.01, "lower transmissivity bound"),
    "n_V": ("optimize", int, 15, "variance grid points"),
    "n_d": ("optimize", int, 11, "displacement grid points"),
    "n_T": ("optimize", int, 31, "transmissivity grid points"),
    "target_K": ("maxdist", float, 1e-5, "key rate defining the maximum distance"),
    "L_max": ("maxdist", float, 120.0, "distance scan limit in km"),
    "scan_step": ("maxdist", float, 1.0, "distance scan increment in km"),
    "bisect_tol": ("maxdist", float, 0.01, "bisection tolerance in km"),
    "N_cut": ("oracle", int, 60, "Fock cutoff per mode"),
    "tol": ("oracle", float, 1e-7, "verification tolerance"),
    "output": ("output", str, "-", "CSV destination, '-' for stdout"),
    "jobs": ("output", int, 1, "worker processes for sweep rows"),
}

_MODES = ("none", "fixed-variance", "all")


class ConfigError(CatQKDError, ValueError):
    def __init__(self, key, message):
        section = KEYS[key][0] if key in KEYS else "?"
        super().__init__(f"{section}.{key}: {message}")
        self.key = key


def _flag(key):
    return "--" + key.replace("_", "-")


def _convert(key, raw):
    typ = KEYS[key][1]
    if raw is None:
        return None
    if isinstance(raw, str) and raw.strip().lower() in ("", "none") and typ is not str:
        return None
    if isinstance(raw, str) and typ is str and not raw.strip():
        return None
    try:
        if typ is int:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        return typ(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"cannot parse {raw!r} as {typ.__name__}") from None


def load_config(path):
    """Read an INI file into a flat ``{key: value}`` dict; unknown keys are errors."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError("output", f"cannot read config {path!r}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError("output", f"malformed config {path!r}: {exc}") from None
    out = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in KEYS:
                raise ConfigError(key, f"unknown key in [{section}]")
            if KEYS[key][0] != section:
                raise ConfigError(key, f"belongs in [{KEYS[key][0]}], found in [{section}]")
            out[key] = _convert(key, raw)
    return out


@dataclass(frozen=True)
class RunConfig:
    command: str
    values: dict

    def __getattr__(self, key):
        if key == "values":
            raise AttributeError(key)
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key) from None

    @classmethod
    def from_sources(cls, command, file_values=None, flag_values=None):
        values = {k: entry[2] for k, entry in KEYS.items()}
        values.update(file_values or {})
        values.update({k: v for k, v in (flag_values or {}).items() if v is not _NONE})
        cfg = cls(command, values)
        cfg.validate()
        return cfg

    # ---- validation -------------------------------------------------
    def _require(self, key):
        if self.values[key] is None:
            raise ConfigError(key, f"required by '{self.command}'")
        return self.values[key]

    def _check(self, key, ok, message):
        v = self.values[key]
        if v is not None and not (isinstance(v, (int, float)) and math.isfinite(v) and ok(v)):
            raise ConfigError(key, f"{message}, got {v!r}")

    def validate(self):
        c = self._check
        c("V", lambda v: 1.0 <= v <= 1e6, "must be >= 1")
        c("lambda", lambda v: 0.0 <= v < 1.0, "must lie in [0, 1)")
        c("d", lambda v: v >= 0.0, "must be >= 0")
        c("T_C", lambda v: 0.0 < v <= 1.0, "must lie in (0, 1]")
        c("m_max", lambda v: 0 <= v <= M_MAX, f"must lie in [0, {M_MAX}]")
        c("m", lambda v: 0 <= v <= self.values["m_max"], f"must lie in [0, m_max={self.values['m_max']}]")
        c("L_BC", lambda v: v >= 0.0, "must be >= 0")
        c("gamma", lambda v: v > 0.0, "must be > 0")
        c("eps_A", lambda v: v >= 0.0, "must be >= 0")
        c("eps_B", lambda v: v >= 0.0, "must be >= 0")
        c("beta", lambda v: 0.0 < v <= 1.0, "must lie in (0, 1]")
        c("gain", lambda v: v > 0.0, "must be > 0")
        c("start", lambda v: True, "must be finite")
        c("stop", lambda v: True, "must be finite")
        c("step", lambda v: v > 0.0, "must be > 0")
        c("V_min", lambda v: 1.0 <= v <= 15.0, "must lie in [1, 15]")
        c("V_max", lambda v: self.values["V_min"] <= v <= 15.0, "must lie in [V_min, 15]")
        c("d_max", lambda v: 0.0 <= v <= 5.0, "must lie in [0, 5]")
        c("T_min", lambda v: 0.01 <= v <= 1.0, "must lie in [0.01, 1]")
        for key in ("n_V", "n_d", "n_T"):
            c(key, lambda v: 1 <= v <= 1000, "must lie in [1, 1000]")
        c("target_K", lambda v: v > 0.0, "must be > 0")
        c("L_max", lambda v: v > 0.0, "must be > 0")
        c("scan_step", lambda v: v > 0.0, "must be > 0")
        c("bisect_tol", lambda v: v > 0.0, "must be > 0")
        c("N_cut", lambda v: 10 <= v <= 400, "must lie in [10, 400]")
        c("tol", lambda v: v > 0.0, "must be > 0")
        c("jobs", lambda v: 1 <= v <= 256, "must lie in [1, 256]")
        if self.values["V"] is not None and self.values["lambda"] is not None:
            raise ConfigError("lambda", "give either V or lambda, not both")
        if self.values["mode"] not in _MODES:
            raise ConfigError("mode", f"must be one of {', '.join(_MODES)}, got {self.values['mode']!r}")
        self.family_list()

        cmd = self.command
        if cmd in ("state", "keyrate"):
            self.squeezing()
        if cmd in ("keyrate", "optimize"):
            self.sweep_values("L")
        if cmd == "optimize" and self.mode == "none":
            raise ConfigError("mode", "'optimize' needs fixed-variance or all")
        if cmd in ("optimize", "maxdist") and self.mode == "fixed-variance":
            self._require("V")
        if cmd == "maxdist":
            if self.mode == "none" and self.variable != "V":
                self.squeezing()
            if self.variable is not None:
                if self.mode != "none":
                    raise ConfigError("variable", "sweeps in 'maxdist' need mode = none")
                self.sweep_values(self.variable)

    def squeezing(self):
        if self.values["lambda"] is not None:
            return self.values["lambda"]
        if self.values["V"] is None:
            raise ConfigError("V", f"required by '{self.command}' (or give lambda)")
        return lambda_from_variance(self.values["V"])

    def sweep_values(self, expected):
        allowed = ("L",) if expected == "L" else ("d", "V", "T_C")
        var = self.values["variable"]
        if var is None and expected == "L":
            var = "L"
        if var not in allowed:
            raise ConfigError("variable", f"must be one of {', '.join(allowed)} for '{self.command}', got {var!r}")
        start, stop, step = (self._require(k) for k in ("start", "stop", "step"))
        if stop < start:
            raise ConfigError("stop", f"must be >= start={start}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        if n > 100000:
            raise ConfigError("step", f"sweep has {n} rows; limit is 100000")
        values = [start + i * step for i in range(n)]
        bounds = {
            "L": (self.L_BC, math.inf, "must be >= L_BC"),
            "d": (0.0, math.inf, "must be >= 0"),
            "V": (1.0, 1e6, "must be >= 1"),
            "T_C": (1e-12, 1.0, "must lie in (0, 1]"),
        }[var]
        for key, v in (("start", values[0]), ("stop", values[-1])):
            if not bounds[0] <= v <= bounds[1]:
                raise ConfigError(key, f"{var} sweep value {v:g} {bounds[2]}")
        return var, values

    def family_list(self):
        out = []
        for token in str(self.values["families"]).split(","):
            token = token.strip().lower()
            if token == "tmsv":
                out.append(("TMSV", 0, True))
                continue
            try:
                m = int(token)
            except ValueError:
                raise ConfigError("families", f"unknown family {token!r}") from None
            if not 0 <= m <= self.values["m_max"]:
                raise ConfigError("families", f"catalysis order {m} outside [0, m_max]")
            out.append((f"{m}-PC", m, False))
        if not out:
            raise ConfigError("families", "empty list")
        return out

    def protocol(self, L_AB=None):
        L_AC = 0.0 if L_AB is None else L_AB - self.L_BC
        return ProtocolParams(max(L_AC, 0.0), self.L_BC, self.gamma, self.eps_A, self.eps_B, self.beta, self.gain)

    def domain(self, tmsv=False):
        fixed = {"d": 0.0, "T_C": 1.0} if tmsv else {}
        return OptDomain(
            V=(self.V_min, self.V_max), d=(0.0, self.d_max), T_C=(self.T_min, 1.0),
            fixed=fixed, n_V=self.n_V, n_d=self.n_d, n_T=self.n_T,
        )


# ---- CSV helpers ---------------------------------------------------------

def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.9g" % float(v)


def _write_csv(path, header, rows):
    fh = sys.stdout if path == "-" else open(path, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(fh, delimiter=",", lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _map(fn, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map keeps input order, so the CSV does not depend on scheduling
        return list(pool.map(fn, items))


# ---- subcommands ---------------------------------------------------------

def cmd_state(cfg):
    p = CatalysisParams(cfg.squeezing(), cfg.d, cfg.T_C, cfg.m)
    st = moments(p)
    e = st.entries()
    header = ["m", "lambda", "V", "d", "T_C", "mean_q1", "mean_p1", "mean_q2", "mean_p2",
              "V_A_q", "V_A_p", "V_B_q", "V_B_p", "V_C_q", "V_C_p", "P"]
    row = [p.m, p.lam, p.V, p.d, p.T_C, *st.mean, e["V_A_q"], e["V_A_p"], e["V_B_q"],
           e["V_B_p"], e["V_C_q"], e["V_C_p"], st.success_prob]
    _write_csv(cfg.output, header, [row])


def _keyrate_row(args):
    cfg, L = args
    r = key_rate(CatalysisParams(cfg.squeezing(), cfg.d, cfg.T_C, cfg.m), cfg.protocol(L))
    return [L, r.I_AB, r.chi_BE, r.success_prob, r.K]


def cmd_keyrate(cfg):
    _, Ls = cfg.sweep_values("L")
    rows = _map(_keyrate_row, [(cfg, L) for L in Ls], cfg.jobs)
    _write_csv(cfg.output, ["L_km", "I_AB", "chi_BE", "P", "K"], rows)


def _optimize_row(args):
    cfg, L, (name, m, tmsv) = args
    proto = cfg.protocol(L)
    dom = cfg.domain(tmsv)
    if cfg.mode == "fixed-variance":
        res = optimize_fixed_variance(cfg.V, m, proto, dom)
    else:
        res = optimize_all(m, proto, dom)
    return [L, name, m, res.V, res.d, res.T_C, res.K]


def cmd_optimize(cfg):
    _, Ls = cfg.sweep_values("L")
    tasks = [(cfg, L, fam) for L in Ls for fam in cfg.family_list()]
    rows = _map(_optimize_row, tasks, cfg.jobs)
    _write_csv(cfg.output, ["L_km", "family", "m", "V", "d", "T_C", "K"], rows)


def _maxdist_row(args):
    cfg, (name, m, tmsv), V, d, T_C = args
    proto = cfg.protocol()
    kw = dict(domain=cfg.domain(tmsv), L_max=cfg.L_max, step=cfg.scan_step, tol=cfg.bisect_tol)
    try:
        L = max_distance(cfg.target_K, m, cfg.mode, proto, V=V, d=d, T_C=T_C, **kw)
    except NoDistanceError:
        return [name, m, V, d, T_C, cfg.target_K, float("nan")]
    L_AB = L + cfg.L_BC
    if cfg.mode != "none":
        # report the optimum reached at the distance limit
        at = proto.at_distance(L)
        res = (optimize_fixed_variance(V, m, at, kw["domain"]) if cfg.mode == "fixed-variance"
               else optimize_all(m, at, kw["domain"]))
        V, d, T_C = res.V, res.d, res.T_C
    return [name, m, V, d, T_C, cfg.target_K, L_AB]


def cmd_maxdist(cfg):
    tasks = []
    if cfg.mode == "none":
        V = cfg.V if cfg.V is not None else None
        if V is None and cfg.values["lambda"] is not None:
            V = CatalysisParams(cfg.values["lambda"]).V
        base = {"V": V, "d": cfg.d, "T_C": cfg.T_C}
        name = "TMSV" if (cfg.m == 0 and cfg.d == 0 and cfg.T_C == 1) else f"{cfg.m}-PC"
        sweep = [None]
        if cfg.variable is not None:
            var, sweep = cfg.sweep_values(cfg.variable)
        for value in sweep:
            point = dict(base)
            if value is not None:
                point[var] = value
            if point["V"] is None:
                raise ConfigError("V", "required by 'maxdist' with mode = none")
            tasks.append((cfg, (name, cfg.m, False), point["V"], point["d"], point["T_C"]))
    else:
        for fam in cfg.family_list():
            tasks.append((cfg, fam, cfg.V, 0.0, 1.0))
    rows = _map(_maxdist_row, tasks, cfg.jobs)
    _write_csv(cfg.output, ["family", "m", "V", "d", "T_C", "target_K", "L_max_km"], rows)


def cmd_verify(cfg):
    from .verify import run_verification

    report = run_verification(n_cut=cfg.N_cut, tol=cfg.tol)
    for line in report.lines():
        print(line)
    worst = report.worst()
    print(f"worst: {worst.name} delta={worst.delta:.3e}")
    return 0 if report.ok else 2


COMMANDS = {
    "state": (cmd_state, "mean, covariance and heralding probability of one state"),
    "keyrate": (cmd_keyrate, "key rate against total distance L_AB"),
    "optimize": (cmd_optimize, "optimal parameters and key rate per distance"),
    "maxdist": (cmd_maxdist, "largest distance reaching a target key rate"),
    "verify": (cmd_verify, "compare closed forms with the Fock and quadrature oracles"),
}


class _Parser(argparse.ArgumentParser):
    # usage mistakes are input-validation failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI file with [section] key = value entries")
    common.add_argument("-v", "--verbose", action="store_true")
    for key, (section, typ, default, text) in KEYS.items():
        common.add_argument(
            _flag(key), dest=key, default=_NONE, metavar=typ.__name__.upper(),
            help=f"[{section}] {text} (default: {default})",
        )
    parser = _Parser(prog="catqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_values = load_config(args.config) if args.config else {}
        flags = {k: (_convert(k, getattr(args, k)) if getattr(args, k) is not _NONE else _NONE) for k in KEYS}
        cfg = RunConfig.from_sources(args.command, file_values, flags)
        status = COMMANDS[args.command][0](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CutoffError as exc:
        print(f"integrity error: {exc} (try N_cut >= {exc.suggested_cutoff})", file=sys.stderr)
        return 2
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return 2
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
