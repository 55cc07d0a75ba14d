"""Command-line front end: reproducible sweeps emitting plot-ready CSV files.

One subcommand per theme: `bounds` (spin-metrology sensitivities), `scaling`
(critical numbers and exponents), `condensate` (GP ground states, two-mode
overlap, loss budget), `counting` (detector-noise penalty).  Every output file
embeds the fully resolved configuration as comment lines, so a data file is
self-describing.

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import configparser
import math
import os
import sys
import warnings
from dataclasses import dataclass, field, replace

from . import counting as cnt
from . import csvio, gp, scaling, spins, thomas_fermi as tf
from .physconfig import (SI, SPECIES_PRESETS, Species, Superposition,
                         TrapGeometry, atomic_mass, species_from_mapping,
                         trap_from_lengths, trap_from_mapping)

NM = 1e-9
UM = 1e-6


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


@dataclass
class RunConfig:
    """Fully resolved run parameters (defaults <- preset <- file <- flags)."""

    species_preset: str = "rb87"
    species: Species = field(default_factory=SPECIES_PRESETS["rb87"])
    trap_d: int = 1
    trap_q: float = 2.0
    rho0: float = 1.0 * UM
    r0: float = 100.0 * UM
    grid_points: int = 512
    grid_extent_factor: float = 2.0
    n_values: list[int] = field(default_factory=lambda: [8 * 2**k for k in range(8)])
    n_over_nl: list[float] = field(default_factory=lambda: [100.0, 178.0, 316.0, 562.0, 1000.0])
    sigma_over_sqrtn: list[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0, 2.0])
    q_values: list[float] = field(default_factory=lambda: [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0])
    gamma: float = 1.0
    t: float = 1.0
    c1: float = 1.0 / math.sqrt(2.0)
    c2: float = 1.0 / math.sqrt(2.0)
    counting_n: int = 400
    trials: int = 100_000
    seed: int = 20240901
    threads: int = 1

    def trap(self) -> TrapGeometry:
        return trap_from_lengths(self.trap_d, self.trap_q, self.rho0, self.r0,
                                 self.species.mass)

    def superposition(self) -> Superposition:
        return Superposition(self.c1, self.c2)


def config_to_text(cfg: RunConfig) -> str:
    """Canonical key-value serialization; parsing it back reproduces cfg."""
    lines = ["[species]"]
    if cfg.species_preset != "inline":
        lines.append(f"preset = {cfg.species_preset}")
    else:
        sp = cfg.species
        lines += [f"mass_u = {sp.mass / atomic_mass!r}",
                  f"a11_nm = {sp.a11 / NM!r}",
                  f"a22_nm = {sp.a22 / NM!r}",
                  f"a12_nm = {sp.a12 / NM!r}",
                  f"loss12_cm3_per_s = {sp.gamma12_loss * 1e6!r}",
                  f"loss22_cm3_per_s = {sp.gamma22_loss * 1e6!r}"]
    qtext = "inf" if math.isinf(cfg.trap_q) else repr(cfg.trap_q)
    lines += ["", "[trap]",
              f"d = {cfg.trap_d}",
              f"q = {qtext}",
              f"rho0_um = {cfg.rho0 / UM!r}",
              f"r0_um = {cfg.r0 / UM!r}",
              "", "[grid]",
              f"points = {cfg.grid_points}",
              f"extent_factor = {cfg.grid_extent_factor!r}",
              "", "[sweep]",
              "n_values = " + " ".join(str(n) for n in cfg.n_values),
              "n_over_nl = " + " ".join(repr(y) for y in cfg.n_over_nl),
              "sigma_over_sqrtn = " + " ".join(repr(s) for s in cfg.sigma_over_sqrtn),
              "q_values = " + " ".join(repr(q) for q in cfg.q_values),
              f"counting_n = {cfg.counting_n}",
              f"trials = {cfg.trials}",
              "", "[protocol]",
              f"gamma = {cfg.gamma!r}",
              f"t = {cfg.t!r}",
              f"c1 = {cfg.c1!r}",
              f"c2 = {cfg.c2!r}",
              f"seed = {cfg.seed}",
              f"threads = {cfg.threads}"]
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> RunConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    cfg = RunConfig()
    try:
        if "species" in cp:
            sec = cp["species"]
            cfg.species = species_from_mapping(sec)
            cfg.species_preset = sec.get("preset", "inline").strip().lower() \
                if "preset" in sec else "inline"
        if "trap" in cp:
            sec = cp["trap"]
            trap = trap_from_mapping(sec, cfg.species.mass)
            cfg.trap_d, cfg.trap_q = trap.d, trap.q
            cfg.rho0, cfg.r0 = trap.rho0, trap.r0
        if "grid" in cp:
            sec = cp["grid"]
            cfg.grid_points = int(sec.get("points", cfg.grid_points))
            cfg.grid_extent_factor = float(sec.get("extent_factor", cfg.grid_extent_factor))
        if "sweep" in cp:
            sec = cp["sweep"]
            if "n_values" in sec:
                cfg.n_values = [int(v) for v in _float_list(sec["n_values"])]
            if "n_over_nl" in sec:
                cfg.n_over_nl = _float_list(sec["n_over_nl"])
            if "sigma_over_sqrtn" in sec:
                cfg.sigma_over_sqrtn = _float_list(sec["sigma_over_sqrtn"])
            if "q_values" in sec:
                cfg.q_values = _float_list(sec["q_values"])
            cfg.counting_n = int(sec.get("counting_n", cfg.counting_n))
            cfg.trials = int(sec.get("trials", cfg.trials))
        if "protocol" in cp:
            sec = cp["protocol"]
            cfg.gamma = float(sec.get("gamma", cfg.gamma))
            cfg.t = float(sec.get("t", cfg.t))
            cfg.c1 = float(sec.get("c1", cfg.c1))
            cfg.c2 = float(sec.get("c2", cfg.c2))
            cfg.seed = int(sec.get("seed", cfg.seed))
            cfg.threads = int(sec.get("threads", cfg.threads))
        cfg.superposition()  # validate amplitudes
        if not cfg.n_values or not cfg.n_over_nl or not cfg.q_values:
            raise ConfigError("sweep ranges must be nonempty")
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"invalid configuration value: {exc}") from exc
    return cfg


def _header(cfg: RunConfig, command: str) -> list[str]:
    lines = [f"becmetrology {command}", "resolved configuration:"]
    lines += config_to_text(cfg).rstrip("\n").split("\n")
    return lines


def _parallel_map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --- subcommands -----------------------------------------------------------

def cmd_bounds(cfg: RunConfig, out_dir: str) -> list[str]:
    header = _header(cfg, "bounds")
    qubit = spins.SpectrumBound(Lambda=0.5, lam=-0.5)
    rows = []
    for n in cfg.n_values:
        lin = spins.crb_linear(qubit, n, cfg.t)
        for result in (spins.simulate_ramsey(n, cfg.gamma, cfg.t),
                       spins.simulate_cat(n, cfg.gamma, cfg.t),
                       spins.simulate_enhanced(n, cfg.gamma, cfg.t)):
            rows.append((result.protocol, n, result.t, cfg.gamma, result.delta_gamma,
                         lin.heisenberg, lin.qnl, result.purity))
        # quadratic protocol in its short-time window gamma*t*N <= 0.1
        tq = 0.1 / (cfg.gamma * n)
        quad = spins.simulate_quadratic(n, cfg.gamma, tq)
        nl = spins.crb_nonlinear(spins.SpectrumBound(0.5, -0.5, k_body=2), n, tq)
        rows.append((quad.protocol, n, tq, cfg.gamma, quad.delta_gamma,
                     nl.crb, nl.product_state_reference, quad.purity))
    sweep_path = os.path.join(out_dir, "bounds.csv")
    csvio.write_csv(sweep_path,
                    ("protocol", "N", "t", "gamma", "delta_gamma",
                     "bound_HL", "bound_QNL", "purity"),
                    rows, header)
    # time trace of the quadratic protocol: sensitivity and entanglement witness
    n_trace = max(cfg.n_values)
    t_grid = [x * 2.0 / (cfg.gamma * n_trace) / 24 for x in range(1, 25)]
    trace = spins.product_nonlinear_protocol(n_trace, cfg.gamma, t_grid)
    trace_path = os.path.join(out_dir, "quadratic_trace.csv")
    csvio.write_csv(trace_path,
                    ("N", "t", "gamma", "delta_gamma", "purity"),
                    [(r.n_atoms, r.t, r.gamma, r.delta_gamma, r.purity)
                     for r in trace], header)
    slopes = []
    for name in ("ramsey", "cat", "enhanced", "quadratic"):
        pts = [(r[1], r[4] * r[2]) for r in rows if r[0] == name]  # (N, t*delta)
        slope = math.nan if len(pts) < 2 else \
            spins.fit_loglog_slope([p[0] for p in pts], [p[1] for p in pts])
        slopes.append((name, slope))
    slopes_path = os.path.join(out_dir, "bounds_slopes.csv")
    csvio.write_csv(slopes_path, ("protocol", "loglog_slope"), slopes, header)
    return [sweep_path, trace_path, slopes_path]


def cmd_scaling(cfg: RunConfig, out_dir: str) -> list[str]:
    header = _header(cfg, "scaling")
    fig_rows = [(q, float(x1), float(x2), float(x3), str(x1), str(x2), str(x3))
                for q, x1, x2, x3 in scaling.fig1_table(cfg.q_values)]
    fig_path = os.path.join(out_dir, "exponents.csv")
    csvio.write_csv(fig_path,
                    ("q", "xi_1d", "xi_2d", "xi_3d",
                     "xi_1d_exact", "xi_2d_exact", "xi_3d_exact"),
                    fig_rows, header)
    crit_rows = []
    for d in (1, 2, 3):
        for q in (cfg.trap_q, math.inf):
            geom = trap_from_lengths(d, q, cfg.rho0, cfg.r0, cfg.species.mass)
            crit = scaling.critical_numbers(geom, cfg.species.a11)
            crit_rows.append((d, "inf" if math.isinf(q) else q, crit.n_lower,
                              "" if crit.n_upper is None else crit.n_upper))
    crit_path = os.path.join(out_dir, "critical_numbers.csv")
    csvio.write_csv(crit_path, ("d", "q", "n_lower", "n_upper"), crit_rows, header)
    # closed-form inverse-volume estimate across all three regimes
    geom = cfg.trap()
    crit = scaling.critical_numbers(geom, cfg.species.a11)
    n_hi = 1e3 * (crit.n_upper if crit.n_upper is not None else 1e6 * crit.n_lower)
    n_grid = [math.exp(x) for x in
              _linspace(math.log(2.0), math.log(n_hi), 60)]
    eta_rows = [(n, scaling.eta_estimate(geom, cfg.species.a11, n),
                 _quiet_regime(geom, cfg.species.a11, n))
                for n in n_grid]
    eta_path = os.path.join(out_dir, "eta_estimate.csv")
    csvio.write_csv(eta_path, ("N", "eta_m3", "regime"), eta_rows, header)
    return [fig_path, crit_path, eta_path]


def _linspace(a, b, count):
    step = (b - a) / (count - 1)
    return [a + i * step for i in range(count)]


def _quiet_regime(geom, a, n):
    # the near-boundary warning is useful interactively, not per table row
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return scaling.classify_regime(geom, a, n).value


def cmd_condensate(cfg: RunConfig, out_dir: str) -> list[str]:
    header = _header(cfg, "condensate")
    if math.isinf(cfg.trap_q):
        raise ConfigError("the condensate solver needs a finite hardness "
                          "exponent; hard-wall traps are covered analytically "
                          "by the scaling command")
    if cfg.trap_d != 1:
        raise ConfigError("the condensate command runs the 1D longitudinal "
                          "two-mode protocol; set d = 1")
    geom = cfg.trap()
    species = cfg.species
    sup = cfg.superposition()
    crit = scaling.critical_numbers(geom, species.a11)
    n_list = [1.0 + y * (crit.n_lower - 1.0) for y in sorted(cfg.n_over_nl)]

    def solve(n):
        grid = gp.default_grid(geom, species, n, points=cfg.grid_points,
                               extent_factor=cfg.grid_extent_factor)
        return gp.ground_state(geom, species, n, grid)

    results = _parallel_map(solve, n_list, cfg.threads)
    eta_rows = []
    for i, (n, res) in enumerate(zip(n_list, results)):
        eta_tf_val = tf.tf_profile(geom, species, n, scaling.Regime.INTERMEDIATE).eta_N
        if 0 < i < len(n_list) - 1:
            slope = (math.log(results[i + 1].eta_n) - math.log(results[i - 1].eta_n)) / \
                    (math.log(n_list[i + 1] - 1.0) - math.log(n_list[i - 1] - 1.0))
        else:
            slope = math.nan
        eta_rows.append((n, (n - 1.0) / (crit.n_lower - 1.0), res.eta_n, eta_tf_val,
                         res.eta_n / eta_tf_val - 1.0, slope, res.mu, res.residual))
    eta_path = os.path.join(out_dir, "eta_sweep.csv")
    csvio.write_csv(eta_path,
                    ("N", "n_over_nl", "eta_n", "eta_n_tf", "rel_err",
                     "local_slope", "mu", "residual"),
                    eta_rows, header)

    # two-mode overlap against the Gaussian model at the largest swept N
    n_run = n_list[-1]
    phase = tf.phase_dynamics(geom, species, n_run, sup)
    ground = results[-1]
    t_final = 0.5 / abs(phase.omega_N)
    rate = ground.mu / SI.hbar
    steps = max(200, int(math.ceil(t_final * rate / 0.05)))
    record = gp.evolve_two_mode(ground, sup, species, geom, t_final, steps,
                                loss=False, record_every=max(1, steps // 100))
    overlap_rows = []
    for t, ov, p1, p2, n1, n2 in zip(record.times, record.overlap, record.p1,
                                     record.p2, record.norm1, record.norm2):
        model = tf.overlap_gaussian(phase, t)
        overlap_rows.append((t, ov.real, ov.imag, abs(ov), abs(model),
                             -phase.omega_N * t, p1, p2, n1, n2))
    overlap_path = os.path.join(out_dir, "overlap.csv")
    csvio.write_csv(overlap_path,
                    ("t", "overlap_re", "overlap_im", "overlap_abs",
                     "model_abs", "model_phase", "p1", "p2", "norm1", "norm2"),
                    overlap_rows, header)

    budget = gp.loss_budget(species, geom, n_run, sup)
    loss_path = os.path.join(out_dir, "loss_budget.csv")
    csvio.write_csv(loss_path,
                    ("N", "gamma_loss", "omega_N", "ratio", "inverse_ratio"),
                    [(n_run, budget.gamma, budget.omega_N, budget.ratio,
                      1.0 / budget.ratio)],
                    header)
    return [eta_path, overlap_path, loss_path]


def cmd_counting(cfg: RunConfig, out_dir: str) -> list[str]:
    header = _header(cfg, "counting")
    model = cnt.ramsey_model(cfg.t)
    n = cfg.counting_n
    gamma = 0.5 * math.pi / cfg.t  # quarter fringe: maximal slope
    prior = cnt.NumberPrior.flat(n, fraction=0.1)
    rows = []
    for i, s in enumerate(cfg.sigma_over_sqrtn):
        noise = cnt.CountingNoise(sigma=s * math.sqrt(n))
        posterior = cnt.posterior_n0(prior, n, noise) if noise.sigma > 0 \
            else cnt.NumberPrior.point(n)
        analytic = cnt.corrected_uncertainty(model, posterior, noise, gamma)
        mc = cnt.simulate_counts(model, cnt.NumberPrior.point(n), noise, gamma,
                                 cfg.trials, cfg.seed + i)
        rows.append((noise.sigma, n, gamma, analytic.delta_gamma,
                     mc.delta_gamma, mc.stderr))
    path = os.path.join(out_dir, "counting.csv")
    csvio.write_csv(path,
                    ("sigma", "N", "gamma", "delta_gamma_analytic",
                     "delta_gamma_mc", "mc_stderr"),
                    rows, header)
    return [path]


COMMANDS = {"bounds": cmd_bounds, "scaling": cmd_scaling,
            "condensate": cmd_condensate, "counting": cmd_counting}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="becmetrology",
                                     description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", metavar="PATH", help="key-value configuration file")
    parser.add_argument("--out", metavar="DIR", default=".", help="output directory")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--threads", type=int, help="parallel workers for sweeps")
    parser.add_argument("--preset", choices=sorted(SPECIES_PRESETS),
                        help="species preset override")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read configuration: {exc}") from exc
            cfg = config_from_text(text)
        else:
            cfg = RunConfig()
        if args.preset:
            cfg = replace(cfg, species_preset=args.preset,
                          species=SPECIES_PRESETS[args.preset]())
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.threads is not None:
            cfg = replace(cfg, threads=args.threads)
        out_dir = args.out
        os.makedirs(out_dir, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise ConfigError(f"output directory {out_dir} is not writable")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        written = COMMANDS[args.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except gp.ConvergenceError as exc:
        print(f"solver failed to converge: {exc}", file=sys.stderr)
        return 3
    csvio.write_json(os.path.join(out_dir, f"{args.command}_index.json"),
                     {"command": args.command, "seed": cfg.seed,
                      "outputs": [os.path.basename(p) for p in written]})
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
