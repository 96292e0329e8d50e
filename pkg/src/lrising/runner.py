"""Experiment orchestration: configs in, tidy CSV/JSON artifacts out.

Run layout: <out>/{manifest.json, data/*.csv, fits/*.json}.  Jobs are pure
functions of the config; with workers=1 everything runs in-process and
reruns are bit-identical at the CSV level.  The manifest embeds the full
config (with defaults materialized), so a run can be reproduced from the
manifest alone.
"""

from __future__ import annotations

import csv
import json
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, expfit, fss, quench
from .circuit import compile_evolution, trotter_step_error, verify_plan
from .config import ExperimentConfig, config_from_dict
from .model import CouplingSpec, build_couplings
from .pipelines import EquilibriumConfig, equilibrium_analysis, equilibrium_collapse
from .quench import QuenchProtocol, ai_scaling, kz_fit, kz_sweep, theoretical_mu
from .spectra import Spectra


class RunError(RuntimeError):
    pass


@dataclass
class RunResult:
    out_dir: str
    manifest: dict
    failed: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failed


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _atomic_json(path, payload):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _alpha_value(model) -> float:
    return float("inf") if model.mode == "nearest-neighbor" else float(model.alpha)


def _equilibrium_config(cfg: ExperimentConfig) -> EquilibriumConfig:
    eq = cfg.equilibrium
    return EquilibriumConfig(
        mode=cfg.model.mode,
        alpha=cfg.model.alpha if cfg.model.mode == "algebraic" else None,
        j0=cfg.model.J0,
        sizes=tuple(cfg.model.sizes),
        scan_window=tuple(eq.scan_window),
        scan_step=eq.scan_step,
        grid_halfwidth=eq.grid_halfwidth,
        grid_step=eq.grid_step,
        refine_step=eq.refine_step,
        delta_g=eq.delta_g,
        collapse_window=tuple(eq.collapse_window),
    )


def _couplings(cfg: ExperimentConfig, n: int):
    model = cfg.model
    return build_couplings(
        CouplingSpec(N=n, J0=model.J0, alpha=model.alpha if model.mode == "algebraic" else None,
                     mode=model.mode)
    )


def _powerlaw_json(fit: fss.PowerlawFit) -> dict:
    return fit.to_json_dict()


# ---------------------------------------------------------------------------
# per-kind handlers: return ({csv_name: (header, rows)}, {fit_name: payload})


def _equilibrium_outputs(cfg, result, fit_prefix):
    csvs = {}
    csvs["scaling_dataset.csv"] = (fss.CSV_HEADER, [
        [N, g, name, value, err]
        for (N, g, name), (value, err) in sorted(result.dataset.rows.items())
    ])
    csvs["crossings.csv"] = (
        ["N1", "N2", "product", "g_star"],
        [[c.n1, c.n2, c.n1 * c.n2, c.g_star] for c in result.crossings],
    )
    gc = result.gc_fit
    fits = {
        f"{fit_prefix}gc.json": {
            "parameter": "g_c",
            "value": gc.g_c,
            "stderr": gc.g_c_err,
            "b": gc.b,
            "omega": gc.omega,
            "residual": gc.residual,
            "converged": gc.converged,
            "accepted": gc.accepted,
        }
    }
    if result.exponents is not None:
        payload = result.exponents.to_json_dict()
        payload["mu_theo_ai"] = result.exponents.mu_theo
        payload["mu_theo_ai_err"] = result.exponents.mu_theo_err
        payload["fits"] = {k: _powerlaw_json(v) for k, v in result.fits.items()
                           if isinstance(v, fss.PowerlawFit)}
        fits[f"{fit_prefix}exponents.json"] = payload
    return csvs, fits


def run_exponents(cfg: ExperimentConfig):
    result = equilibrium_analysis(_equilibrium_config(cfg))
    return _equilibrium_outputs(cfg, result, "")


def run_phase_diagram(cfg: ExperimentConfig):
    # one run handles one coupling law; the phase diagram aggregates g_c only
    eq_cfg = _equilibrium_config(cfg)
    from .pipelines import locate_gc

    dataset, crossings, gc_fit, _ctx = locate_gc(eq_cfg)
    csvs = {
        "scaling_dataset.csv": (fss.CSV_HEADER, [
            [N, g, name, value, err]
            for (N, g, name), (value, err) in sorted(dataset.rows.items())
        ]),
        "crossings.csv": (
            ["N1", "N2", "product", "g_star"],
            [[c.n1, c.n2, c.n1 * c.n2, c.g_star] for c in crossings],
        ),
        "phase_point.csv": (
            ["alpha", "ferro_or_af", "g_c", "g_c_err"],
            [[_alpha_value(cfg.model), cfg.model.zeta, gc_fit.g_c, gc_fit.g_c_err]],
        ),
    }
    fits = {
        "gc.json": {
            "parameter": "g_c",
            "value": gc_fit.g_c,
            "stderr": gc_fit.g_c_err,
            "b": gc_fit.b,
            "omega": gc_fit.omega,
            "converged": gc_fit.converged,
            "accepted": gc_fit.accepted,
        }
    }
    return csvs, fits


def run_collapse(cfg: ExperimentConfig):
    result = equilibrium_analysis(_equilibrium_config(cfg))
    csvs, fits = _equilibrium_outputs(cfg, result, "")
    exps = result.exponents
    scores = {}
    perturb = cfg.equilibrium.collapse_perturb
    for name, gon in (
        ("gap_sector", exps.z),
        ("m2", 2 * exps.beta_m / exps.nu),
        ("schmidt_gap", 2 * exps.beta_lambda / exps.nu),
    ):
        try:
            base = equilibrium_collapse(result, name, gon)
            worse = equilibrium_collapse(result, name, gon, perturb=perturb)
            scores[name] = {
                "gamma_over_nu": gon,
                "chi2": base.chi2,
                "chi2_perturbed": worse.chi2,
                "n_points": base.n_points,
                "n_excluded": base.n_excluded,
                "perturb": perturb,
            }
        except (ValueError, KeyError) as exc:
            scores[name] = {"error": str(exc)}
    fits["collapse.json"] = scores
    return csvs, fits


def run_quench_sweep(cfg: ExperimentConfig):
    model = cfg.model
    q = cfg.quench
    g_c = q.g_c if q.g_c is not None else 1.0
    taus = q.tau_grid()
    rows = []
    fit_payload = {}
    for n in model.sizes:
        J = _couplings(cfg, n)
        spectra = Spectra(J, "even", size_cap=max(n, 20))
        points = kz_sweep(J, q.g0, g_c, taus, model.zeta, tol=q.tolerance,
                          initial_state=q.initial_state, spectra=spectra,
                          size_cap=max(n, 20))
        for p in points:
            for quantity, getter in sorted(quench.KZ_QUANTITIES.items()):
                rows.append([
                    _alpha_value(model), model.zeta, n, p.tau_q, quantity, getter(p),
                ])
        fits_n = {}
        for quantity in ("n_do", "p_ex_tc", "e_r_tc"):
            try:
                kf = kz_fit(points, quantity, window=tuple(q.fit_window))
                entry = {
                    "mu": kf.fit.exponent,
                    "stderr": kf.fit.stderr,
                    "amplitude": kf.fit.amplitude,
                    "window": list(q.fit_window),
                    "plateau_flag": kf.plateau_flag,
                }
                fits_n[quantity] = entry
            except ValueError as exc:
                fits_n[quantity] = {"error": str(exc)}
        fit_payload[str(n)] = fits_n
    csvs = {"quench_sweep.csv": (
        ["alpha", "ferro_or_af", "N", "tau_q", "quantity", "value"], rows,
    )}
    return csvs, {"kz.json": fit_payload}


def run_ai_scaling(cfg: ExperimentConfig):
    model = cfg.model
    q = cfg.quench
    g_c = q.g_c if q.g_c is not None else 1.0
    n = max(model.sizes)
    J = _couplings(cfg, n)
    spectra = Spectra(J, "even", size_cap=max(n, 20))
    res = ai_scaling(J, q.g0, g_c, q.tau_grid(), q.theta,
                     window=tuple(q.ai_window), tol=q.tolerance,
                     spectra=spectra, initial_state=q.initial_state)
    rows = [
        [_alpha_value(model), model.zeta, n, float(t), "g_tilde", float(gt)]
        for t, gt in zip(res.taus, res.g_tilde)
    ]
    payload = {
        "mu": res.fit.exponent,
        "stderr": res.fit.stderr,
        "amplitude": res.fit.amplitude,
        "window": list(q.ai_window),
        "theta": q.theta,
        "g_c": g_c,
        "N": n,
    }
    csvs = {"ai_scaling.csv": (
        ["alpha", "ferro_or_af", "N", "tau_q", "quantity", "value"], rows,
    )}
    return csvs, {"ai.json": payload}


def run_domain_dist(cfg: ExperimentConfig):
    model = cfg.model
    q = cfg.quench
    g_c = q.g_c if q.g_c is not None else 1.0
    n = max(model.sizes)
    J = _couplings(cfg, n)
    spectra = Spectra(J, "even", size_cap=max(n, 20))
    taus = q.tau_grid()
    rows = []
    payload = {}
    for tau in taus:
        proto = QuenchProtocol(g0=q.g0, tau_q=float(tau), g_c=g_c, tol=q.tolerance,
                               initial_state=q.initial_state)
        traj = quench.evolve(J, proto, zeta=model.zeta, spectra=spectra,
                             observables=("domains",))
        dist = quench.domain_distribution(traj.final_state, model.zeta)
        for k, p in enumerate(dist.probabilities, start=1):
            rows.append([_alpha_value(model), model.zeta, n, float(tau), k, float(p)])
        payload[repr(float(tau))] = {
            "mean": dist.mean,
            "variance": dist.variance,
            "gaussian_residual": dist.gaussian_residual,
            "exponential_rate": dist.exponential_rate,
            "exponential_residual": dist.exponential_residual,
        }
    csvs = {"domain_dist.csv": (
        ["alpha", "ferro_or_af", "N", "tau_q", "n_do", "probability"], rows,
    )}
    return csvs, {"domain_fits.json": payload}


def run_compress(cfg: ExperimentConfig):
    comp = cfg.compress
    fits = {}
    rows = []
    for alpha in comp.alphas:
        fit = expfit.fit_exponential_sum(alpha=float(alpha), N=comp.N, n=comp.n_terms)
        fits[f"compress_alpha{alpha:g}.json"] = fit.to_json_dict()
        _max, profile = expfit.eval_error(fit)
        for k, e in enumerate(profile, start=1):
            rows.append([float(alpha), comp.N, comp.n_terms, k, float(e)])
    csvs = {"compress_error.csv": (["alpha", "N", "n", "k", "abs_error"], rows)}
    return csvs, fits


def run_circuit_verify(cfg: ExperimentConfig):
    circ = cfg.circuit
    model = cfg.model
    J = _couplings(cfg, circ.N)
    proto = QuenchProtocol(g0=circ.g0, tau_q=circ.tau_q, g_c=circ.g_c, tol=1e-10)
    spectra = Spectra(J, "even", size_cap=max(circ.N, 20))
    psi0 = spectra.ground_state(circ.g0).state
    rows = []
    for dt in sorted(circ.dt_list, reverse=True):
        plan = compile_evolution(J.entries, proto.g, circ.tau_q, float(dt),
                                 meta={"alpha": _alpha_value(model), "J0": model.J0})
        ver = verify_plan(plan, J.entries, proto)
        step_err = trotter_step_error(J.entries, proto.g, float(dt), psi0)
        rows.append([
            circ.N, _alpha_value(model), model.J0, circ.tau_q, float(dt),
            plan.n_steps, ver.fidelity_deficit, ver.norm_error, step_err,
        ])
    dts = np.array([r[4] for r in rows], dtype=float)
    deficits = np.array([max(r[6], 1e-300) for r in rows], dtype=float)
    norm_errs = np.array([max(r[7], 1e-300) for r in rows], dtype=float)
    step_errs = np.array([max(r[8], 1e-300) for r in rows], dtype=float)
    payload = {
        "global_deficit_slope": fss.powerlaw_fit(dts, deficits).exponent,
        "global_norm_error_slope": fss.powerlaw_fit(dts, norm_errs).exponent,
        "step_error_slope": fss.powerlaw_fit(dts, step_errs).exponent,
        "dt_list": [float(d) for d in dts],
    }
    csvs = {"circuit_scaling.csv": (
        ["N", "alpha", "J0", "tau_q", "dt", "steps", "fidelity_deficit", "norm_error", "step_error"],
        rows,
    )}
    return csvs, {"circuit.json": payload}


_HANDLERS = {
    "phase-diagram": run_phase_diagram,
    "exponents": run_exponents,
    "collapse": run_collapse,
    "quench-sweep": run_quench_sweep,
    "ai-scaling": run_ai_scaling,
    "domain-dist": run_domain_dist,
    "compress": run_compress,
    "circuit-verify": run_circuit_verify,
}


def _call_handler(kind: str, cfg_dict: dict):
    cfg = config_from_dict(cfg_dict)
    return _HANDLERS[kind](cfg)


def run(cfg: ExperimentConfig, out_dir: str | None = None) -> RunResult:
    cfg.validate()
    out = out_dir or cfg.out
    os.makedirs(os.path.join(out, "data"), exist_ok=True)
    os.makedirs(os.path.join(out, "fits"), exist_ok=True)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    t0 = time.time()
    jobs = [{"name": cfg.kind, "status": "pending"}]
    outputs = []
    failed = []
    try:
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                csvs, fits = pool.submit(_call_handler, cfg.kind, cfg.to_dict()).result()
        else:
            csvs, fits = _HANDLERS[cfg.kind](cfg)
        for name, (header, rows) in sorted(csvs.items()):
            path = os.path.join(out, "data", name)
            _write_csv(path, header, rows)
            outputs.append(os.path.join("data", name))
        for name, payload in sorted(fits.items()):
            path = os.path.join(out, "fits", name)
            _atomic_json(path, payload)
            outputs.append(os.path.join("fits", name))
        jobs[0]["status"] = "ok"
    except Exception as exc:  # job failures land in the manifest
        jobs[0]["status"] = f"failed: {exc}"
        jobs[0]["traceback"] = traceback.format_exc()
        failed.append(cfg.kind)
    jobs[0]["seconds"] = round(time.time() - t0, 3)
    manifest = {
        "tool": "lrising",
        "version": __version__,
        "kind": cfg.kind,
        "config": cfg.to_dict(),
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "jobs": jobs,
        "outputs": sorted(outputs),
    }
    _atomic_json(os.path.join(out, "manifest.json"), manifest)
    return RunResult(out, manifest, failed)


def config_from_manifest(path: str) -> ExperimentConfig:
    with open(path) as fh:
        manifest = json.load(fh)
    if "config" not in manifest:
        raise RunError(f"{path} does not look like a run manifest")
    return config_from_dict(manifest["config"])


def report(run_dir: str) -> tuple[dict, str]:
    """Summarize a completed run: one JSON payload plus a plain-text table."""
    manifest_path = os.path.join(run_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        raise RunError(f"missing manifest: {manifest_path}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    summary = {"kind": manifest.get("kind"), "run": run_dir, "fits": {}}
    fit_dir = os.path.join(run_dir, "fits")
    if os.path.isdir(fit_dir):
        for name in sorted(os.listdir(fit_dir)):
            if name.endswith(".json"):
                with open(os.path.join(fit_dir, name)) as fh:
                    summary["fits"][name] = json.load(fh)

    lines = [f"run {run_dir} (kind={summary['kind']})", "-" * 48]
    exps = summary["fits"].get("exponents.json")
    gc = summary["fits"].get("gc.json")
    if gc:
        lines.append(f"g_c       = {gc['value']:.5f} +- {gc.get('stderr', 0):.2g} "
                     f"(omega={gc.get('omega', float('nan')):.3f})")
    if exps:
        for key in ("nu", "z", "beta_m", "beta_lambda"):
            lines.append(f"{key:9s} = {exps[key]:.4f} +- {exps.get(key + '_err', 0):.2g}")
        lines.append(f"mu_theo   = {-exps['mu_theo_ai']:.4f} (AI boundary exponent)")
    ai = summary["fits"].get("ai.json")
    if ai:
        lines.append(f"mu(AI)    = {ai['mu']:.4f} +- {ai['stderr']:.2g} (theta={ai['theta']})")
    kzf = summary["fits"].get("kz.json")
    if kzf:
        for n, fits_n in sorted(kzf.items()):
            for qty, entry in sorted(fits_n.items()):
                if "mu" in entry:
                    lines.append(f"mu[{qty:8s}] N={n}: {entry['mu']:.4f} +- {entry['stderr']:.2g}")
    col = summary["fits"].get("collapse.json")
    if col:
        for name, sc in sorted(col.items()):
            if "chi2" in sc:
                lines.append(f"chi2[{name}] = {sc['chi2']:.4g} (perturbed {sc['chi2_perturbed']:.4g})")
    text = "\n".join(lines) + "\n"
    return summary, text
