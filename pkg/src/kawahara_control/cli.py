"""Config-driven experiment runner tying the pipeline together.

Subcommands: ``eig`` (eigenvalue/gap/collision report), ``biortho`` (family
build + defect matrix), ``control-linear``, ``control-nonlinear``, and
``verify`` (recompute every summary number from the stored artifacts).

Exit codes: 0 pass, 1 validation failure, 2 solver refusal, 3 numerical
instability.  All artifacts are written atomically (temp + rename) after the
configuration has been fully validated, so a failing run never leaves
partial artifacts; solver refusals still write the report.

Config format: INI sections mirroring the module names (``[dispersion]``,
``[problem]``, ``[initial_state]``, ``[target_state]``, ``[biortho]``,
``[nonlinear]``, ``[output]``).  The only environment override is
``KAWAHARA_CONTROL_OUT`` for the output directory.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__
from .biortho import BiorthoParams, biorthogonality_matrix, build_family
from .errors import ConditioningError, InstabilityError
from .fields import (
    ShapeProfile,
    SpectralField,
    gaussian_profile,
    l2_coeff_norm,
    read_field_csv,
    write_field_csv,
)
from .moment import (
    ControlSignal,
    ExponentialSumControl,
    SampledControl,
    assemble_reachability_problem,
    gram_matrix,
    moment_residual,
    solve_biortho_series,
    solve_min_norm,
)
from .simulate import (
    _duhamel_endpoint_identity,
    evolve_linear,
    evolve_nonlinear,
    fixed_point_control,
)
from .spectrum import (
    DispersionParams,
    EigenvalueSequence,
    collision_classes,
    eigenvalue_sequence,
    min_gap,
)

EXIT_PASS = 0
EXIT_VALIDATION = 1
EXIT_REFUSAL = 2
EXIT_INSTABILITY = 3

VERIFY_TOL = 1e-12
SUMMARY_HEADER = ("quantity", "i", "j", "re", "im")

_TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


# ----------------------------------------------------------------- utilities


def _fmt(x: float) -> str:
    """Shortest round-trip decimal form; reread bit-identically by float()."""
    return repr(float(x))


def _atomic_write_text(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_csv(path: str, header: tuple[str, ...], rows: list[tuple]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    _atomic_write_text(path, buf.getvalue())


def _summary_row(quantity: str, i, j, value: complex) -> tuple:
    v = complex(value)
    return (
        quantity,
        "" if i is None else int(i),
        "" if j is None else int(j),
        _fmt(v.real),
        _fmt(v.imag),
    )


def _read_summary(path: str) -> dict[tuple, complex]:
    out: dict[tuple, complex] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            key = (row["quantity"], row["i"], row["j"])
            out[key] = complex(float(row["re"]), float(row["im"]))
    if not out:
        raise ConfigError(f"no summary rows in {path}")
    return out


def _rows_to_dict(rows: list[tuple]) -> dict[tuple, complex]:
    return {
        (q, "" if i == "" else str(i), "" if j == "" else str(j)): complex(
            float(re), float(im)
        )
        for q, i, j, re, im in rows
    }


# --------------------------------------------------------------- config load


@dataclass
class Experiment:
    """Fully validated configuration, with every referenced object built."""

    params: DispersionParams
    seq: EigenvalueSequence
    truncation: int
    horizon: float
    solver: str
    include_zero_mode: bool
    endpoint_tolerance: float
    profile: ShapeProfile
    u0: SpectralField
    u1: SpectralField
    biortho_params: BiorthoParams
    biortho_indices: list[int]
    biortho_time_step: float
    defect_tolerance: float
    nl_time_step: float
    nl_grid_size: int
    nl_snapshots: int
    nl_tol: float
    nl_max_iterations: int
    nl_endpoint_tolerance: float
    outdir: str


def _getfloat(cfg, section: str, key: str, default: float) -> float:
    try:
        return cfg.getfloat(section, key, fallback=default)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc


def _getint(cfg, section: str, key: str, default: int) -> int:
    try:
        return cfg.getint(section, key, fallback=default)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc


def _getbool(cfg, section: str, key: str, default: bool) -> bool:
    try:
        return cfg.getboolean(section, key, fallback=default)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc


def _state_from_section(cfg, section: str, N: int) -> SpectralField:
    """Coefficient table from an INI section: ``k = re[, im]`` per line.

    Entries given only for k > 0 are mirrored to -k as conjugates so that
    real fields can be written tersely; explicit entries always win.
    """
    table: dict[int, complex] = {}
    if cfg.has_section(section):
        for key, raw in cfg.items(section):
            try:
                k = int(key)
            except ValueError as exc:
                raise ConfigError(f"[{section}] key {key!r} is not an integer") from exc
            parts = [p.strip() for p in raw.split(",")]
            try:
                re_v = float(parts[0])
                im_v = float(parts[1]) if len(parts) > 1 else 0.0
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
            table[k] = complex(re_v, im_v)
    for k, v in list(table.items()):
        if k > 0 and -k not in table:
            table[-k] = np.conj(v)
    try:
        return SpectralField.from_dict(N, table)
    except ValueError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def _load_state(cfg, section: str, file_key: str, N: int) -> SpectralField:
    path = cfg.get("problem", file_key, fallback=None)
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"[problem] {file_key}: file not found: {path}")
        field = read_field_csv(path)
        if field.max_index != N:
            raise ConfigError(
                f"[problem] {file_key}: truncation {field.max_index} != {N}"
            )
        return field
    return _state_from_section(cfg, section, N)


def load_experiment(config_path: str, out_override: str | None) -> Experiment:
    if not os.path.exists(config_path):
        raise ConfigError(f"config file not found: {config_path}")
    cfg = configparser.ConfigParser()
    try:
        with open(config_path) as fh:
            cfg.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {config_path}: {exc}") from exc

    try:
        params = DispersionParams(
            gamma=_getfloat(cfg, "dispersion", "gamma", 1.0),
            alpha=_getfloat(cfg, "dispersion", "alpha", 1.0),
            beta=_getfloat(cfg, "dispersion", "beta", 1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"[dispersion]: {exc}") from exc

    N = _getint(cfg, "problem", "truncation", 8)
    T = _getfloat(cfg, "problem", "horizon", 8.0)
    if T <= 0:
        raise ConfigError("[problem] horizon must be positive")
    try:
        seq = eigenvalue_sequence(params, N)
    except ValueError as exc:
        raise ConfigError(f"[problem] truncation: {exc}") from exc

    solver = cfg.get("problem", "solver", fallback="min_norm").strip()
    if solver not in ("min_norm", "biortho_series"):
        raise ConfigError(f"[problem] solver must be min_norm or biortho_series, got {solver!r}")
    if solver == "biortho_series" and T <= _TWO_PI:
        raise ConfigError(
            f"[problem] horizon T = {T} must exceed 2*pi for the biortho_series solver"
        )

    profile_kind = cfg.get("problem", "profile", fallback="gaussian").strip()
    if profile_kind == "gaussian":
        width = _getfloat(cfg, "problem", "profile_width", 4.0)
        try:
            profile = gaussian_profile(N, width)
        except ValueError as exc:
            raise ConfigError(f"[problem] profile: {exc}") from exc
    elif profile_kind == "file":
        path = cfg.get("problem", "profile_file", fallback=None)
        if path is None:
            raise ConfigError("[problem] profile = file requires profile_file")
        if not os.path.exists(path):
            raise ConfigError(f"[problem] profile_file not found: {path}")
        field = read_field_csv(path)
        if field.max_index != N:
            raise ConfigError(
                f"[problem] profile_file truncation {field.max_index} != {N}"
            )
        mods = np.abs(field.coeffs)
        if float(np.min(mods)) <= 0:
            raise ConfigError("[problem] profile_file has a vanishing coefficient")
        profile = ShapeProfile(field=field, min_coeff_modulus=float(np.min(mods)) * 0.5)
    else:
        raise ConfigError(f"[problem] profile must be gaussian or file, got {profile_kind!r}")

    u0 = _load_state(cfg, "initial_state", "initial_state_file", N)
    u1 = _load_state(cfg, "target_state", "target_state_file", N)

    raw_indices = cfg.get("biortho", "indices", fallback="1, 2")
    try:
        base = sorted({abs(int(tok)) for tok in raw_indices.split(",") if tok.strip()})
    except ValueError as exc:
        raise ConfigError(f"[biortho] indices: {exc}") from exc
    if not base or 0 in base:
        raise ConfigError("[biortho] indices must be nonzero integers")
    indices = sorted({s * m for m in base for s in (-1, 1)})

    try:
        bparams = BiorthoParams(
            product_truncation=_getint(cfg, "biortho", "product_truncation", 8),
            multiplier_truncation=_getint(cfg, "biortho", "multiplier_truncation", 48),
            multiplier_power=_getint(cfg, "biortho", "multiplier_power", 1),
            delta_window=_getfloat(cfg, "biortho", "delta_window", 1.0),
            kernel_halfwidth=_getfloat(cfg, "biortho", "kernel_halfwidth", 1.0),
            support_halfwidth=_getfloat(cfg, "biortho", "support_halfwidth", 3.0),
            quad_points_per_unit=_getfloat(cfg, "biortho", "quad_points_per_unit", 6.0),
            tail_tol=_getfloat(cfg, "biortho", "tail_tol", 1e-10),
        )
    except ValueError as exc:
        raise ConfigError(f"[biortho]: {exc}") from exc

    nl_grid = _getint(cfg, "nonlinear", "grid_size", 4 * N)

    outdir = cfg.get("output", "directory", fallback="out")
    outdir = os.environ.get("KAWAHARA_CONTROL_OUT", outdir)
    if out_override is not None:
        outdir = out_override

    return Experiment(
        params=params,
        seq=seq,
        truncation=N,
        horizon=T,
        solver=solver,
        include_zero_mode=_getbool(cfg, "problem", "include_zero_mode", True),
        endpoint_tolerance=_getfloat(cfg, "problem", "endpoint_tolerance", 1e-8),
        profile=profile,
        u0=u0,
        u1=u1,
        biortho_params=bparams,
        biortho_indices=indices,
        biortho_time_step=_getfloat(cfg, "biortho", "time_step", 0.005),
        defect_tolerance=_getfloat(cfg, "biortho", "defect_tolerance", 1e-3),
        nl_time_step=_getfloat(cfg, "nonlinear", "time_step", 1e-3),
        nl_grid_size=nl_grid,
        nl_snapshots=_getint(cfg, "nonlinear", "snapshots", 201),
        nl_tol=_getfloat(cfg, "nonlinear", "tol", 1e-10),
        nl_max_iterations=_getint(cfg, "nonlinear", "max_iterations", 50),
        nl_endpoint_tolerance=_getfloat(cfg, "nonlinear", "endpoint_tolerance", 1e-6),
        outdir=outdir,
    )


# ----------------------------------------------------------------- emission


def _emit(
    outdir: str,
    command: str,
    seed: int,
    summary_rows: list[tuple],
    report_lines: list[str],
    extra_csv: dict[str, tuple[tuple[str, ...], list[tuple]]],
    fields: dict[str, SpectralField],
) -> None:
    os.makedirs(outdir, exist_ok=True)
    header = [
        f"command = {command}",
        f"package_version = {__version__}",
        f"seed = {seed}",
    ]
    _atomic_write_text(
        os.path.join(outdir, "report.txt"), "\n".join(header + report_lines) + "\n"
    )
    if summary_rows:
        _atomic_write_csv(os.path.join(outdir, "summary.csv"), SUMMARY_HEADER, summary_rows)
    for name, (hdr, rows) in extra_csv.items():
        _atomic_write_csv(os.path.join(outdir, name), hdr, rows)
    for name, field in fields.items():
        # write_field_csv is not atomic; route through a temp + rename.
        tmp = os.path.join(outdir, f".tmp-{name}")
        write_field_csv(tmp, field)
        os.replace(tmp, os.path.join(outdir, name))


def _trajectory_rows(traj) -> list[tuple]:
    rows = []
    ks = np.arange(-traj.max_index, traj.max_index + 1)
    for i, t in enumerate(traj.times):
        for j, k in enumerate(ks):
            c = traj.coeffs[i, j]
            rows.append((_fmt(t), int(k), _fmt(c.real), _fmt(c.imag)))
    return rows


def _control_rows(control: ControlSignal, T: float) -> list[tuple]:
    if isinstance(control, ExponentialSumControl):
        t = np.linspace(0.0, T, 2001)
        v = control(t)
    else:
        t, v = control.t_grid, control.values
    return [(_fmt(ti), _fmt(vi)) for ti, vi in zip(t, v)]


# --------------------------------------------------------------- subcommands


def _eig_rows(exp: Experiment) -> list[tuple]:
    rows = []
    for k in range(-exp.truncation, exp.truncation + 1):
        lam = exp.seq[k]
        rows.append(_summary_row("eigenvalue", k, None, lam))
        rows.append(_summary_row("modulus", k, None, abs(lam)))
    classes = collision_classes(exp.params, exp.truncation)
    rows.append(_summary_row("min_gap", None, None, min_gap(exp.seq)))
    rows.append(_summary_row("collision_classes", None, None, float(len(classes))))
    rows.append(
        _summary_row("max_class_size", None, None, float(max(len(c) for c in classes)))
    )
    return rows


def run_eig(exp: Experiment, seed: int) -> int:
    rows = _eig_rows(exp)
    report = [
        f"truncation = {exp.truncation}",
        f"min_gap = {_fmt(min_gap(exp.seq))}",
        f"collisions = {_fmt(float(len(collision_classes(exp.params, exp.truncation))))}",
        "pass = true",
    ]
    _emit(exp.outdir, "eig", seed, rows, report, {}, {})
    return EXIT_PASS


def _family_sequence(exp: Experiment) -> EigenvalueSequence:
    """Eigenvalue table wide enough for the Weierstrass product nodes, which
    may extend past the problem truncation."""
    need = max(
        exp.truncation,
        exp.biortho_params.product_truncation,
        max(abs(m) for m in exp.biortho_indices),
    )
    return eigenvalue_sequence(exp.params, need)


def _biortho_rows(exp: Experiment) -> tuple[list[tuple], float]:
    family = build_family(
        _family_sequence(exp), exp.biortho_params, exp.biortho_indices,
        exp.biortho_time_step,
    )
    B = biorthogonality_matrix(family, _family_sequence(exp))
    idx = family.indices
    rows = []
    defect = 0.0
    for a, m in enumerate(idx):
        for b, n in enumerate(idx):
            rows.append(_summary_row("pairing", m, n, B[a, b]))
            defect = max(defect, abs(B[a, b] - (1.0 if m == n else 0.0)))
    rows.append(_summary_row("max_defect", None, None, defect))
    return rows, defect


def run_biortho(exp: Experiment, seed: int) -> int:
    if exp.horizon != exp.biortho_params.horizon:
        raise ConfigError(
            f"[problem] horizon {exp.horizon} != family support length "
            f"{exp.biortho_params.horizon} (= 2*(support_halfwidth + kernel_halfwidth))"
        )
    rows, defect = _biortho_rows(exp)
    ok = defect <= exp.defect_tolerance
    report = [
        f"indices = {' '.join(str(m) for m in exp.biortho_indices)}",
        f"max_defect = {_fmt(defect)}",
        f"defect_tolerance = {_fmt(exp.defect_tolerance)}",
        f"pass = {'true' if ok else 'false'}",
    ]
    _emit(exp.outdir, "biortho", seed, rows, report, {}, {})
    return EXIT_PASS if ok else EXIT_VALIDATION


def _solve_control(exp: Experiment) -> ControlSignal:
    problem = assemble_reachability_problem(
        exp.u0, exp.u1, None, exp.profile, exp.seq, exp.horizon,
        include_zero_mode=exp.include_zero_mode,
    )
    if exp.solver == "min_norm":
        return solve_min_norm(problem)
    family = build_family(
        _family_sequence(exp), exp.biortho_params, exp.biortho_indices,
        exp.biortho_time_step,
    )
    return solve_biortho_series(problem, family)


def _linear_summary(exp: Experiment, control: ControlSignal):
    """Summary rows recomputable from (config, states, control) alone."""
    problem = assemble_reachability_problem(
        exp.u0, exp.u1, None, exp.profile, exp.seq, exp.horizon,
        include_zero_mode=exp.include_zero_mode,
    )
    residuals = moment_residual(problem, control)
    traj = evolve_linear(exp.u0, exp.profile, control, exp.seq, exp.horizon)
    denom = l2_coeff_norm(exp.u0) or 1.0
    endpoint = float(np.linalg.norm(traj.coeffs[-1] - exp.u1.coeffs)) / denom
    rows = [_summary_row("moment_residual", k, None, residuals[k]) for k in problem.indices]
    rows.append(_summary_row("endpoint_rel_residual", None, None, endpoint))
    rows.append(_summary_row("control_l2_norm", None, None, control.l2_norm()))
    rows.append(
        _summary_row("gram_condition", None, None, float(np.linalg.cond(gram_matrix(problem))))
    )
    return rows, traj, endpoint


def run_control_linear(exp: Experiment, seed: int) -> int:
    try:
        control = _solve_control(exp)
    except ConditioningError as exc:
        _emit(exp.outdir, "control-linear", seed, [],
              [f"refusal = {exc}", "pass = false"], {}, {})
        print(f"solver refusal: {exc}", file=sys.stderr)
        return EXIT_REFUSAL
    rows, traj, endpoint = _linear_summary(exp, control)
    ok = endpoint <= exp.endpoint_tolerance
    extra = {"control.csv": (("t", "v"), _control_rows(control, exp.horizon)),
             "trajectory.csv": (("t", "k", "re", "im"), _trajectory_rows(traj))}
    if isinstance(control, ExponentialSumControl):
        coeff_rows = [
            (int(k), _fmt(c.real), _fmt(c.imag))
            for k, c in zip(
                sorted(range(-exp.truncation, exp.truncation + 1))
                if exp.include_zero_mode
                else [k for k in range(-exp.truncation, exp.truncation + 1) if k != 0],
                control.coefficients,
            )
        ]
        extra["control_coefficients.csv"] = (("k", "re", "im"), coeff_rows)
    report = [
        f"solver = {exp.solver}",
        f"endpoint_rel_residual = {_fmt(endpoint)}",
        f"endpoint_tolerance = {_fmt(exp.endpoint_tolerance)}",
        f"control_l2_norm = {_fmt(control.l2_norm())}",
        f"pass = {'true' if ok else 'false'}",
    ]
    _emit(exp.outdir, "control-linear", seed, rows, report, extra,
          {"initial_state.csv": exp.u0, "target_state.csv": exp.u1})
    return EXIT_PASS if ok else EXIT_VALIDATION


def _nonlinear_summary(exp: Experiment, control: ExponentialSumControl):
    """Summary rows recomputable from (config, states, control): re-evolve the
    full equation under the stored control and measure against the
    self-consistent reachability problem."""
    traj = evolve_nonlinear(
        exp.u0, exp.profile, control, exp.horizon, exp.nl_time_step,
        exp.nl_grid_size, params=exp.params, n_snapshots=exp.nl_snapshots,
    )
    zeta1 = _duhamel_endpoint_identity(
        traj, exp.u0, exp.profile, control, exp.seq, exp.horizon
    )
    problem = assemble_reachability_problem(
        exp.u0, exp.u1, zeta1, exp.profile, exp.seq, exp.horizon,
        include_zero_mode=exp.include_zero_mode,
    )
    residuals = moment_residual(problem, control)
    denom = l2_coeff_norm(exp.u0) or 1.0
    endpoint = float(np.linalg.norm(traj.coeffs[-1] - exp.u1.coeffs)) / denom
    rows = [_summary_row("moment_residual", k, None, residuals[k]) for k in problem.indices]
    rows.append(_summary_row("endpoint_rel_residual", None, None, endpoint))
    rows.append(_summary_row("control_l2_norm", None, None, control.l2_norm()))
    rows.append(
        _summary_row("gram_condition", None, None, float(np.linalg.cond(gram_matrix(problem))))
    )
    return rows, traj, endpoint


def run_control_nonlinear(exp: Experiment, seed: int) -> int:
    if exp.solver != "min_norm":
        raise ConfigError(
            "[problem] the nonlinear fixed-point loop supports solver = min_norm only"
        )
    try:
        control, traj, rep = fixed_point_control(
            exp.u0, exp.u1, exp.profile, exp.seq, exp.horizon,
            dt=exp.nl_time_step, grid_size=exp.nl_grid_size,
            include_zero_mode=exp.include_zero_mode, tol=exp.nl_tol,
            max_iterations=exp.nl_max_iterations, n_snapshots=exp.nl_snapshots,
        )
    except ConditioningError as exc:
        _emit(exp.outdir, "control-nonlinear", seed, [],
              [f"refusal = {exc}", "pass = false"], {}, {})
        print(f"solver refusal: {exc}", file=sys.stderr)
        return EXIT_REFUSAL
    rows, traj, endpoint = _nonlinear_summary(exp, control)
    ok = rep.converged and endpoint <= exp.nl_endpoint_tolerance
    ks = (
        list(range(-exp.truncation, exp.truncation + 1))
        if exp.include_zero_mode
        else [k for k in range(-exp.truncation, exp.truncation + 1) if k != 0]
    )
    coeff_rows = [
        (int(k), _fmt(c.real), _fmt(c.imag)) for k, c in zip(ks, control.coefficients)
    ]
    extra = {
        "control.csv": (("t", "v"), _control_rows(control, exp.horizon)),
        "trajectory.csv": (("t", "k", "re", "im"), _trajectory_rows(traj)),
        "control_coefficients.csv": (("k", "re", "im"), coeff_rows),
    }
    report = [
        f"solver = {exp.solver}",
        f"iterations = {rep.iterations}",
        f"converged = {'true' if rep.converged else 'false'}",
        "update_norms = " + " ".join(_fmt(x) for x in rep.update_norms),
        f"endpoint_rel_residual = {_fmt(endpoint)}",
        f"endpoint_tolerance = {_fmt(exp.nl_endpoint_tolerance)}",
        f"control_l2_norm = {_fmt(control.l2_norm())}",
        f"pass = {'true' if ok else 'false'}",
    ]
    _emit(exp.outdir, "control-nonlinear", seed, rows, report, extra,
          {"initial_state.csv": exp.u0, "target_state.csv": exp.u1})
    if not rep.converged:
        print("fixed-point iteration did not converge", file=sys.stderr)
        return EXIT_REFUSAL
    return EXIT_PASS if ok else EXIT_VALIDATION


# ------------------------------------------------------------------- verify


def _stored_command(outdir: str) -> str:
    path = os.path.join(outdir, "report.txt")
    if not os.path.exists(path):
        raise ConfigError(f"no report.txt in {outdir}; nothing to verify")
    with open(path) as fh:
        for line in fh:
            if line.startswith("command = "):
                return line.split("=", 1)[1].strip()
    raise ConfigError(f"report.txt in {outdir} does not name its command")


def _stored_control(exp: Experiment, outdir: str) -> ControlSignal:
    coeff_path = os.path.join(outdir, "control_coefficients.csv")
    if os.path.exists(coeff_path):
        ks, cs = [], []
        with open(coeff_path, newline="") as fh:
            for row in csv.DictReader(fh):
                ks.append(int(row["k"]))
                cs.append(complex(float(row["re"]), float(row["im"])))
        freqs = np.array([exp.seq[k] for k in ks])
        return ExponentialSumControl(
            horizon=exp.horizon, frequencies=freqs, coefficients=np.array(cs)
        )
    path = os.path.join(outdir, "control.csv")
    if not os.path.exists(path):
        raise ConfigError(f"no stored control in {outdir}")
    ts, vs = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ts.append(float(row["t"]))
            vs.append(float(row["v"]))
    return SampledControl(
        horizon=exp.horizon, t_grid=np.array(ts), values=np.array(vs)
    )


def run_verify(exp: Experiment, outdir: str) -> int:
    command = _stored_command(outdir)
    stored = _read_summary(os.path.join(outdir, "summary.csv"))
    if command == "eig":
        rows = _eig_rows(exp)
    elif command == "biortho":
        rows, _ = _biortho_rows(exp)
    elif command in ("control-linear", "control-nonlinear"):
        u0 = read_field_csv(os.path.join(outdir, "initial_state.csv"))
        u1 = read_field_csv(os.path.join(outdir, "target_state.csv"))
        if (u0.coeffs != exp.u0.coeffs).any() or (u1.coeffs != exp.u1.coeffs).any():
            print("verify: stored states differ from config states", file=sys.stderr)
            return EXIT_VALIDATION
        control = _stored_control(exp, outdir)
        if command == "control-linear":
            rows, _, _ = _linear_summary(exp, control)
        else:
            if not isinstance(control, ExponentialSumControl):
                raise ConfigError("nonlinear artifacts lack control_coefficients.csv")
            rows, _, _ = _nonlinear_summary(exp, control)
    else:
        raise ConfigError(f"unknown stored command {command!r}")

    recomputed = _rows_to_dict(rows)
    if set(recomputed) != set(stored):
        print("verify: summary row sets differ", file=sys.stderr)
        return EXIT_VALIDATION
    worst = 0.0
    for key, val in stored.items():
        err = abs(recomputed[key] - val) / max(1.0, abs(val))
        worst = max(worst, err)
    if worst > VERIFY_TOL:
        print(f"verify: worst summary mismatch {worst:.3e} > {VERIFY_TOL:.1e}",
              file=sys.stderr)
        return EXIT_VALIDATION
    print(f"verify: {len(stored)} summary numbers reproduced "
          f"(worst relative mismatch {worst:.3e})")
    return EXIT_PASS


# --------------------------------------------------------------------- main


def _parse_seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kawahara-control",
        description="Moment-method controllability experiments for the "
        "Kawahara equation on a periodic domain.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "eig": "eigenvalue, gap, and collision report",
        "biortho": "build the biorthogonal family and its defect matrix",
        "control-linear": "solve and simulate a linear control experiment",
        "control-nonlinear": "fixed-point control of the full equation",
        "verify": "recompute all summary numbers from stored artifacts",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="INI experiment config")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--seed", type=_parse_seed, default=0,
                       help="recorded RNG seed (the pipeline is deterministic)")
    args = parser.parse_args(argv)

    try:
        exp = load_experiment(args.config, args.out)
        np.random.seed(args.seed % 2**32)
        if args.command == "eig":
            return run_eig(exp, args.seed)
        if args.command == "biortho":
            return run_biortho(exp, args.seed)
        if args.command == "control-linear":
            return run_control_linear(exp, args.seed)
        if args.command == "control-nonlinear":
            return run_control_nonlinear(exp, args.seed)
        return run_verify(exp, exp.outdir)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConditioningError as exc:
        print(f"solver refusal: {exc}", file=sys.stderr)
        return EXIT_REFUSAL
    except InstabilityError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
