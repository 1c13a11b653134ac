"""
DelaySSM — Pipeline commands.
Each command reads a validated RunConfig, runs its part of the pipeline
(chain → spectrum → SSM → ROM predictions → reference simulations) and writes
plot-ready CSV files and YAML reports into the output directory.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from src.analysis.backbone import backbone, convergence_domain
from src.analysis.branches import branch_connect
from src.analysis.frc import FrcResult, _forced_expansion, bifurcation_summary, frc_convergence, frc_periodic
from src.analysis.roots import RootStatus, limit_cycle_predict, limit_cycle_roots
from src.analysis.tori import CycleStatus, hausdorff_relative, rom_limit_cycles, torus_section
from src.chain.chain_system import (
    ChainSystem,
    build_chain,
    chain_state_from_history,
    export_matrix_market,
    history_from_chain_state,
)
from src.cli.outputs import print_status, write_csv, write_report
from src.cli.run_config import RunConfig
from src.core.config import settings
from src.core.errors import ConfigError, DelaySsmError, ExpansionFileError
from src.model.delay_system import DelaySystem, InitialHistory
from src.model.problem_config import load_delay_system, problem_family
from src.simulate.chain_solver import integrate_batch, integrate_chain
from src.simulate.dde_solver import DEFAULT_STEPS_PER_DELAY, integrate_dde
from src.simulate.postprocess import ResponseKind, SteadyState, poincare_section, steady_state
from src.simulate.rom_solver import rom_trajectory
from src.simulate.trajectory import Trajectory
from src.spectral.eigen import compute_spectrum, select_master
from src.spectral.sweeps import convergence_study, hopf_locus, sweep_leading_eigenvalue
from src.ssm.expansion import Rom, SsmExpansion, build_rom
from src.ssm.parameterization import compute_ssm, nonauto_correction
from src.ssm.reduced import lift, project_initial
from src.ssm.storage import load_expansion, save_expansion

logger = logging.getLogger(__name__)

EXPANSION_FILE = "ssm.npz"


@dataclass
class RunContext:
    config: RunConfig
    out: Path
    threads: int
    order: int
    grid_n: int | None = None  # chain N
    omega_n: int | None = None  # forcing-frequency grid
    validate: bool = False
    written: list[Path] = field(default_factory=list)

    @classmethod
    def create(
        cls,
        config: RunConfig,
        out: str | Path | None = None,
        order: int | None = None,
        grid_n: int | None = None,
        threads: int | None = None,
        validate: bool = False,
        omega_n: int | None = None,
    ) -> RunContext:
        order = config.ssm.order if order is None else order
        if order < 3 or order % 2 == 0:
            raise ConfigError(f"--order must be odd and >= 3, got {order}")
        if grid_n is not None and grid_n < 1:
            raise ConfigError(f"--grid-n must be >= 1, got {grid_n}")
        if omega_n is not None and omega_n < 2:
            raise ConfigError(f"--omega-n must be >= 2, got {omega_n}")
        return cls(
            config=config,
            out=Path(out or config.output.directory),
            threads=threads or settings.THREADS,
            order=order,
            grid_n=grid_n,
            omega_n=omega_n,
            validate=validate,
        )

    @property
    def N(self) -> int:
        return self.config.discretization.N if self.grid_n is None else self.grid_n

    def csv(self, name: str, header, rows) -> Path:
        path = write_csv(self.out / name, header, rows, self.config.output.precision)
        self.written.append(path)
        return path

    def report(self, name: str, data: dict) -> Path:
        path = write_report(self.out / name, {"run": self.config.name, "version": settings.VERSION, **data})
        self.written.append(path)
        return path


# ============================================
# Shared pipeline steps
# ============================================
def _system(ctx: RunContext) -> tuple[DelaySystem, ChainSystem]:
    sys = load_delay_system(ctx.config.problem)
    return sys, build_chain(sys, ctx.N)


def _estimate_conv_radius(ssm: SsmExpansion, rho_max: float, n_points: int = 400) -> tuple[float | None, dict]:
    orders = list(range(5, ssm.order + 1, 2))
    if not orders:
        return None, {}
    curves = {O: backbone(build_rom(ssm.truncated(O)), rho_max, n_points) for O in [3, *orders]}
    estimates = convergence_domain(curves)
    return estimates[ssm.order], estimates


def _expansion(ctx: RunContext, cs: ChainSystem, load: bool = True) -> tuple[SsmExpansion, dict]:
    """Persisted expansion if configured, otherwise a fresh normal-form computation."""
    cfg = ctx.config.ssm
    if load and cfg.expansion is not None:
        ssm = load_expansion(cfg.expansion)
        if ssm.dim != cs.dim:
            raise ExpansionFileError(
                f"{cfg.expansion} holds a chain of dimension {ssm.dim}, config builds {cs.dim}",
                path=cfg.expansion,
            )
        if ssm.order < ctx.order:
            raise ExpansionFileError(f"{cfg.expansion} has order {ssm.order} < requested {ctx.order}")
        print_status("INFO", f"loaded SSM expansion of order {ssm.order}", cfg.expansion)
        return ssm.truncated(ctx.order), {}

    spectrum = compute_spectrum(cs)
    master = select_master(spectrum)
    ssm = compute_ssm(cs, master, ctx.order, cfg.resonance_tol)
    estimates = {}
    if cfg.rho_max is not None:
        radius, estimates = _estimate_conv_radius(ssm, cfg.rho_max)
        ssm = ssm.with_conv_radius(radius)
    return ssm, estimates


def _forced_rom(ssm: SsmExpansion, cs: ChainSystem, epsilon: float, Omega_ref: float | None) -> Rom:
    """ROM carrying the modal force; the unscaled force does not depend on Ω."""
    if epsilon == 0 or Omega_ref is None or cs.system.forcing is None:
        return build_rom(ssm, epsilon=epsilon, Omega=Omega_ref)
    forced = nonauto_correction(ssm, cs.with_forcing(epsilon, Omega_ref), Omega_ref)
    return build_rom(forced, epsilon=epsilon, Omega=Omega_ref)


def _dde_dt(sys: DelaySystem, dt: float | None) -> float:
    return sys.tau_d / DEFAULT_STEPS_PER_DELAY if dt is None else dt


def _observable(ctx: RunContext, requested: int | None, n: int | None = None) -> int:
    obs = settings.OBSERVABLE_INDEX if requested is None else requested
    if n is not None and obs >= n:
        raise ConfigError(f"observable {obs} is not a physical coordinate (n={n}); simulations only see u0")
    return obs


# ============================================
# spectrum
# ============================================
def cmd_spectrum(ctx: RunContext) -> list[Path]:
    task = ctx.config.spectrum
    if task is None:
        raise ConfigError("config has no 'spectrum' block")
    sys, cs = _system(ctx)
    ctx.written.extend(export_matrix_market(cs, ctx.out))

    spectrum = compute_spectrum(cs, k=task.n_eigs, vectors=False)
    ctx.csv("spectrum.csv", ["index", "re", "im"],
            ((i, lam.real, lam.imag) for i, lam in enumerate(spectrum.eigenvalues)))
    lead = complex(spectrum.eigenvalues[0])
    report: dict = {"N": cs.N, "dim": cs.dim, "leading": lead}
    print_status("INFO", f"leading eigenvalue {lead:.6g}", f"N={cs.N}")

    if task.convergence:
        study = convergence_study(sys, task.convergence, ctx.threads)
        ctx.csv("convergence.csv", ["N", "re", "im", "error"],
                ((r.N, r.eigenvalue.real, r.eigenvalue.imag, r.error) for r in study.rows))
        report["convergence"] = {"exact": study.exact, "order": study.order}
        print_status("INFO", f"discretization order {study.order:.3f}")

    if task.hopf:
        h = task.hopf
        family = problem_family(ctx.config.problem, h.parameter)
        values = np.linspace(h.range[0], h.range[1], h.grid)
        sweep = sweep_leading_eigenvalue(family, values, cs.N, ctx.threads)
        ctx.csv("hopf_sweep.csv", [h.parameter, "re", "im"], ((p, lam.real, lam.imag) for p, lam in sweep))
        locus = hopf_locus(family, h.range, cs.N, h.tol)
        report["hopf"] = {
            "parameter": h.parameter, "value": locus.value, "bracket": locus.bracket,
            "eigenvalue": locus.eigenvalue, "evaluations": locus.evaluations,
        }
        print_status("PASS", f"Hopf point {h.parameter}* = {locus.value:.6g}", f"lambda = {locus.eigenvalue:.6g}")

    ctx.report("spectrum_report.yaml", report)
    return ctx.written


# ============================================
# ssm
# ============================================
def _rom_report(ssm: SsmExpansion) -> dict:
    lam = ssm.master.lam
    per_order = {}
    for O in range(3, ssm.order + 1, 2):
        rom = build_rom(ssm.truncated(O))
        per_order[f"O{O}"] = {"a": rom.a_coeffs, "b": rom.b_coeffs}
    top = build_rom(ssm)
    return {
        "lambda": lam,
        "gamma": ssm.gamma,
        "checks": {
            "a_linear": top.a_coeffs[1], "re_lambda": lam.real,
            "b_constant": top.b_coeffs[0], "im_lambda": lam.imag,
        },
        "rom": per_order,
    }


def cmd_ssm(ctx: RunContext) -> list[Path]:
    _, cs = _system(ctx)
    ssm, estimates = _expansion(ctx, cs, load=False)
    path = save_expansion(ssm, ctx.out / EXPANSION_FILE)
    ctx.written.append(path)

    report = _rom_report(ssm)
    if estimates:
        report["convergence_domain"] = estimates
    ctx.report("ssm_report.yaml", report)
    checks = report["checks"]
    print_status("PASS", f"SSM of order {ssm.order}",
                 f"a1={checks['a_linear']:.6g} (Re lambda), b0={checks['b_constant']:.6g} (Im lambda)")
    return ctx.written


# ============================================
# predict
# ============================================
def _predict_limit_cycle(ctx: RunContext, ssm: SsmExpansion, rom: Rom, n: int, obs: int) -> dict:
    orders = list(range(3, ssm.order + 1, 2))
    if len(orders) < 3:
        raise ConfigError(f"limit_cycle needs order >= 7 to compare three truncations, got {ssm.order}")
    classification = limit_cycle_roots({O: rom.truncated(O).a_coeffs for O in orders}, ssm.conv_radius)
    section: dict = {
        "roots_by_order": classification.roots_by_order,
        "classified": [{"rho": r.rho, "status": r.status, "reason": r.reason} for r in classification.classified],
    }
    if not classification.has_limit_cycle:
        spurious = [r for r in classification.classified if r.status == RootStatus.SPURIOUS]
        section["warning"] = "no converged nontrivial root; limit-cycle prediction withheld"
        print_status("WARN", "no converged limit-cycle root",
                     ", ".join(f"rho={r.rho:.4g} ({r.reason})" for r in spurious) or "a(rho) has no positive root")
        return section

    rho_star = classification.converged[0]
    pred = limit_cycle_predict(rom, ssm, rho_star, observable=obs)
    ctx.csv("limit_cycle.csv", ["theta", *[f"x{i + 1}" for i in range(n)]],
            ([th, *x[:n]] for th, x in zip(pred.theta, pred.orbit, strict=True)))
    section.update({"rho_star": rho_star, "frequency": pred.frequency, "period": pred.period,
                    "amplitude": pred.amplitude})
    print_status("PASS", f"limit cycle rho*={rho_star:.6g}", f"period={pred.period:.6g}, amp={pred.amplitude:.6g}")
    section["_prediction"] = pred
    return section


def _frc_rows(result: FrcResult):
    for pt in result.all_points():
        yield pt.Omega, pt.rho, pt.theta, pt.phys_amp, pt.stable, pt.bif_flag


def _predict_frc(ctx: RunContext, task, ssm: SsmExpansion, rom: Rom, cs: ChainSystem, obs: int) -> tuple[dict, FrcResult]:
    n_grid = ctx.omega_n or task.n_grid
    result = frc_periodic(rom, task.Omega_range, n_grid, ssm=ssm, cs=cs, rho_max=task.rho_max,
                          n_rho=task.n_rho, threads=ctx.threads, observable=obs)
    ctx.csv("frc.csv", ["Omega", "rho", "theta", "phys_amp", "stable", "bif_flag"], _frc_rows(result))

    branches = branch_connect(result)
    rows = []
    for b_id, branch in enumerate(branches.branches):
        rows.extend((b_id, branch.isola, branch.closed, p.Omega, p.rho, p.phys_amp, p.stable) for p in branch.points)
    ctx.csv("frc_branches.csv", ["branch", "isola", "closed", "Omega", "rho", "phys_amp", "stable"], rows)

    summary = bifurcation_summary(result)
    summary["branches"] = len(branches.branches)
    summary["isolas"] = len(branches.isolas)
    if branches.ambiguous:
        summary["ambiguous"] = branches.ambiguous
        print_status("WARN", "FRC branch assembly ambiguous", "; ".join(branches.ambiguous))
    ctx.report("bifurcations.yaml", summary)
    print_status("PASS", f"FRC eps={rom.epsilon:g}",
                 f"{len(branches.branches)} branches, {len(branches.isolas)} isolas, "
                 f"{len(result.sn_points)} SN, {len(result.hb_points)} HB")
    return summary, result


def _predict_tori(ctx: RunContext, task, ssm: SsmExpansion, rom: Rom, cs: ChainSystem, obs: int) -> tuple[dict, list]:
    results = rom_limit_cycles(
        rom, ssm, task.Omega_range, ctx.omega_n or task.n_grid, cs=cs, threads=ctx.threads,
        observable=obs, rho_max=task.rho_max, Omegas=task.torus_Omega,
    )
    rows = [row for r in results if r.torus is not None for row in r.torus]
    ctx.csv("torus.csv", ["Omega", "phase1", "phase2", "observable"], rows)
    cycles = [
        {"Omega": r.Omega, "status": r.status, "amp_band": r.amp_band, "message": r.message,
         "period": r.cycle.period if r.cycle else None, "multiplier": r.cycle.multiplier if r.cycle else None}
        for r in results
    ]
    found = sum(r.status == CycleStatus.CYCLE for r in results)
    print_status("PASS" if found else "INFO", f"ROM cycles at {found}/{len(results)} forcing frequencies")
    return {"cycles": cycles}, results


def _predict_frc_convergence(ctx: RunContext, task, ssm: SsmExpansion, rom: Rom) -> dict:
    top = ssm.order
    roms = {O: rom.truncated(O) for O in (top - 2, top)}
    conv = frc_convergence(roms, task.Omega_range, ctx.omega_n or task.n_grid, rho_max=task.rho_max)
    ctx.csv("frc_convergence.csv", ["Omega", "rel_diff"], zip(conv.Omegas, conv.rel_diff, strict=True))
    if conv.converged:
        print_status("PASS", f"FRC orders {conv.orders} agree")
    else:
        print_status("WARN", f"FRC orders {conv.orders} disagree at {len(conv.flagged)} frequencies",
                     f"Omega in [{conv.flagged.min():.4g}, {conv.flagged.max():.4g}]")
    return {"orders": conv.orders, "converged": conv.converged, "flagged": conv.flagged}


def cmd_predict(ctx: RunContext) -> list[Path]:
    task = ctx.config.predict
    if task is None:
        raise ConfigError("config has no 'predict' block")
    sys, cs = _system(ctx)
    ssm, estimates = _expansion(ctx, cs)
    obs = _observable(ctx, task.observable)
    epsilon = sys.epsilon if task.epsilon is None else task.epsilon
    if task.Omega_range:
        Omega_ref = float(np.mean(task.Omega_range))
    else:
        Omega_ref = task.torus_Omega[0] if task.torus_Omega else sys.Omega
    rom = _forced_rom(ssm, cs, epsilon, Omega_ref)
    autonomous = build_rom(ssm, epsilon=0.0)
    report: dict = {"epsilon": epsilon, "order": ssm.order}
    if estimates:
        report["convergence_domain"] = estimates

    if "backbone" in task.tasks:
        rho_max = task.rho_max or ssm.conv_radius or 1.0
        curves = {}
        for O in range(3, ssm.order + 1, 2):
            sub = ssm.truncated(O)
            curves[O] = backbone(build_rom(sub), rho_max, task.backbone_points, ssm=sub, observable=obs)
            ctx.csv(f"backbone_O{O}.csv", ["rho", "omega", "phys_amp"],
                    ((p.rho, p.omega, p.phys_amp) for p in curves[O]))
        if len(curves) >= 2:
            report["convergence_domain"] = convergence_domain(curves)

    lc_section = None
    if "limit_cycle" in task.tasks:
        lc_section = _predict_limit_cycle(ctx, ssm, autonomous, sys.n, obs)
        report["limit_cycle"] = {k: v for k, v in lc_section.items() if not k.startswith("_")}

    frc_result = None
    if "frc" in task.tasks:
        report["frc"], frc_result = _predict_frc(ctx, task, ssm, rom, cs, obs)

    torus_results = []
    if "torus" in task.tasks:
        report["torus"], torus_results = _predict_tori(ctx, task, ssm, rom, cs, obs)

    if "frc_convergence" in task.tasks:
        report["frc_convergence"] = _predict_frc_convergence(ctx, task, ssm, rom)

    if ctx.validate:
        rows = _validate(ctx, sys, cs, ssm, obs, lc_section, frc_result, torus_results)
        ctx.csv("validation.csv",
                ["check", "Omega", "quantity", "predicted", "simulated", "rel_error", "status"], rows)
        report["validation"] = {
            "checks": len(rows),
            "failed": sum(r[-1] == "FAIL" for r in rows),
        }

    ctx.report("predict_report.yaml", report)
    return ctx.written


# ============================================
# --validate: reference simulations
# ============================================
def _row(check: str, Omega, quantity: str, predicted: float, simulated: float, tol: float) -> tuple:
    err = abs(simulated - predicted) / max(abs(predicted), 1e-300)
    status = "PASS" if err <= tol else "FAIL"
    print_status(status, f"{check} {quantity}", f"predicted={predicted:.6g}, simulated={simulated:.6g}, err={err:.2%}")
    return (check, "" if Omega is None else Omega, quantity, predicted, simulated, err, status)


def _settled(
    sys: DelaySystem,
    hist: InitialHistory,
    t_end: float,
    dt: float,
    obs: int,
    extensions: int,
    traj: Trajectory | None = None,
) -> tuple[Trajectory, SteadyState]:
    """DDE run classified by steady_state; the horizon doubles while the result is inconclusive."""
    traj = integrate_dde(sys, hist, t_end, dt) if traj is None else traj
    st = steady_state(traj, obs)
    while st.kind == ResponseKind.INCONCLUSIVE and extensions > 0:
        t_end *= 2
        extensions -= 1
        logger.info(f"Steady state inconclusive ({st.message}); extending to t={t_end:.6g}",
                    extra={"props": {"t_end": t_end, "extensions_left": extensions}})
        traj = integrate_dde(sys, hist, t_end, dt)
        st = steady_state(traj, obs)
    return traj, st


def _validate(
    ctx: RunContext,
    sys: DelaySystem,
    cs: ChainSystem,
    ssm: SsmExpansion,
    obs: int,
    lc_section: dict | None,
    frc_result: FrcResult | None,
    torus_results: list,
) -> list[tuple]:
    cfg = ctx.config.predict.validate_
    n = sys.n
    obs = _observable(ctx, obs, n)
    dt = _dde_dt(sys, cfg.dt)
    rows: list[tuple] = []

    if lc_section and "_prediction" in lc_section:
        pred = lc_section["_prediction"]
        hist = history_from_chain_state(cs, pred.orbit[0])
        _, st = _settled(sys.autonomous(), hist, cfg.periods * pred.period, dt, obs, cfg.extensions)
        if st.kind == ResponseKind.PERIODIC:
            rows.append(_row("limit_cycle", None, "amplitude", pred.amplitude, st.amplitude, cfg.amplitude_tol))
            rows.append(_row("limit_cycle", None, "period", pred.period, st.periods[0], cfg.period_tol))
        else:
            print_status("FAIL", "limit_cycle", f"simulation is {st.kind.value}: {st.message}")
            rows.append(("limit_cycle", "", "kind", ResponseKind.PERIODIC, st.kind, "", "FAIL"))

    if frc_result is not None and frc_result.epsilon > 0:
        stable = [p for p in frc_result.points if p.stable]
        picks = [stable[i] for i in np.unique(np.linspace(0, len(stable) - 1, cfg.frc_samples).astype(int))] if stable else []
        runs = []
        for pt in picks:
            forced = _forced_expansion(ssm, cs, frc_result.epsilon, pt.Omega)
            z0 = lift(forced, pt.rho * np.exp(1j * pt.theta), 0.0)
            runs.append((sys.with_forcing(frc_result.epsilon, pt.Omega), history_from_chain_state(cs, z0),
                         cfg.periods * 2 * np.pi / pt.Omega))
        jobs = [partial(integrate_dde, sys_f, hist, t_end, dt) for sys_f, hist, t_end in runs]
        for pt, run, traj in zip(picks, runs, integrate_batch(jobs, ctx.threads), strict=True):
            _, st = _settled(*run, dt, obs, cfg.extensions, traj=traj)
            rows.append(_row("frc", pt.Omega, "amplitude", pt.phys_amp,
                             st.amplitude if st.amplitude is not None else 0.0, cfg.amplitude_tol))

    for res in torus_results:
        if res.cycle is None:
            continue
        Omega = res.Omega
        forced = _forced_expansion(ssm, cs, res.cycle.epsilon, Omega)
        curve = torus_section(res.cycle, forced)
        hist = history_from_chain_state(cs, curve[0])
        traj, st = _settled(sys.with_forcing(res.cycle.epsilon, Omega), hist,
                            cfg.periods * 2 * np.pi / Omega, dt, obs, cfg.extensions)
        if st.amp_band is not None and res.amp_band is not None:
            rows.append(_row("torus", Omega, "amp_min", res.amp_band[0], st.amp_band[0], 0.05))
            rows.append(_row("torus", Omega, "amp_max", res.amp_band[1], st.amp_band[1], 0.05))
        _, section = poincare_section(traj, Omega)
        if len(section) >= 3:
            dist = hausdorff_relative(section[:, :n], curve[:, :n])
            status = "PASS" if dist <= 0.05 else "FAIL"
            print_status(status, "torus Poincaré section", f"relative Hausdorff distance {dist:.2%}")
            rows.append(("torus", Omega, "hausdorff_rel", 0.0, dist, dist, status))
    return rows


# ============================================
# simulate
# ============================================
def _initial(ctx: RunContext, sys: DelaySystem, cs: ChainSystem) -> tuple[InitialHistory, np.ndarray, SsmExpansion | None]:
    h = ctx.config.simulate.history
    if h.kind == "constant":
        if len(h.value) != sys.n:
            raise ConfigError(f"simulate.history.value needs {sys.n} entries, got {len(h.value)}")
        hist = InitialHistory.constant(h.value)
        return hist, chain_state_from_history(cs, hist), None
    ssm, _ = _expansion(ctx, cs)
    z0 = lift(ssm, complex(*h.p0))
    return history_from_chain_state(cs, z0), z0, ssm


def cmd_simulate(ctx: RunContext) -> list[Path]:
    task = ctx.config.simulate
    if task is None:
        raise ConfigError("config has no 'simulate' block")
    sys, cs = _system(ctx)
    n = sys.n
    obs = _observable(ctx, task.observable, n)
    hist, z0, ssm = _initial(ctx, sys, cs)
    u0 = cs.block_slice("u", 0)

    jobs, names = [], []
    for solver in task.solvers:
        if solver == "dde":
            jobs.append(partial(integrate_dde, sys, hist, task.t_end, _dde_dt(sys, task.dt)))
        elif solver == "chain":
            jobs.append(partial(integrate_chain, cs, z0, task.t_end, task.tol, task.method, task.dt_out, u0))
        else:
            if ssm is None:
                ssm, _ = _expansion(ctx, cs)
            p0 = project_initial(ssm, hist, cs, task.projection)
            Omega = sys.Omega if sys.is_forced else None
            rom = _forced_rom(ssm, cs, sys.epsilon, Omega)
            lifted = _forced_expansion(ssm, cs, sys.epsilon, Omega) if Omega else ssm
            jobs.append(partial(_rom_physical, rom, lifted, p0, task.t_end, task.dt_out, u0))
        names.append(solver)

    try:
        trajectories = integrate_batch(jobs, ctx.threads)
    except DelaySsmError:
        print_status("FAIL", "simulation aborted")
        raise

    report: dict = {}
    for name, traj in zip(names, trajectories, strict=True):
        ctx.csv(f"trajectory_{name}.csv", ["t", *[f"x{i + 1}" for i in range(n)]],
                ([t, *x] for t, x in zip(traj.times, traj.states, strict=True)))
        st = steady_state(traj, obs)
        report[name] = {"kind": st.kind, "amplitude": st.amplitude, "amp_band": st.amp_band,
                        "periods": st.periods, "peaks": st.n_peaks, "message": st.message}
        if sys.is_forced:
            times, section = poincare_section(traj, sys.Omega)
            ctx.csv(f"poincare_{name}.csv", ["k", "t", *[f"x{i + 1}" for i in range(n)]],
                    ([k, t, *x] for k, (t, x) in enumerate(zip(times, section, strict=True))))
        print_status("PASS" if st.kind != ResponseKind.INCONCLUSIVE else "WARN",
                     f"{name}: {st.kind.value}", st.message)

    ctx.report("simulate_report.yaml", {"steady_state": report})
    return ctx.written


def _rom_physical(rom: Rom, ssm: SsmExpansion, p0: complex, t_end: float, dt_out: float | None, keep: slice) -> Trajectory:
    traj = rom_trajectory(rom, ssm, p0, t_end, dt_out)
    return Trajectory(times=traj.times, states=traj.states[:, keep], source=traj.source, reduced=traj.reduced)
