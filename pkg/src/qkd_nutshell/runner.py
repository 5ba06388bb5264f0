"""Dispatch a validated config to its experiment driver.

Each runner returns ``(header, rows, summary)``: the CSV table and a JSON
friendly dict of headline numbers.  Nothing here depends on wall time or on
the worker count.
"""

from __future__ import annotations

import math

from . import attacks, protocols, qec_experiments as qx, sidechannel as sc
from .noise import scale_channel


def _corr(recs, pair, basis=None):
    try:
        c = protocols.correlation(recs, pair, basis)
    except ValueError:
        return None, None
    return c.value, c.std_err


def _protocol(cfg, parsed, workers):
    run = protocols.run_bb84 if cfg["experiment"] == "bb84" else protocols.run_bbm92
    recs = run(parsed["rounds"], parsed["attack"], parsed["channel"], parsed["p_d"], parsed["seed"])
    sifted = protocols.sift(recs)
    summary = {"rounds": len(recs), "n_sifted": len(sifted)}
    pairs = ("AB", "AE", "BE") if parsed["attack"] else ("AB",)
    for pair in pairs:
        for basis in (None, "Z", "X"):
            v, se = _corr(sifted, pair, basis)
            tag = f"C_{pair}" + (f"_{basis}" if basis else "")
            summary[tag] = v
            summary["std_err" if tag == "C_AB" else f"std_err_{tag[2:]}"] = se
    if sifted:
        summary.update(protocols.qber_abort_check(sifted))
    rows = [line.split(",") for line in protocols.records_to_csv(recs).splitlines()[1:]]
    return list(protocols.CSV_HEADER), rows, summary


def _qcl(cfg, parsed, workers):
    conf = attacks.QclConfig(parsed["alpha"], parsed["f"], parsed["shots_per_eval"],
                             parsed["max_iterations"], parsed["theta0"], parsed["seed"])
    res = attacks.qcl_optimize(conf)
    f_ab, f_ae = attacks.pccm_fidelities(res.theta)
    summary = {"theta_star": res.theta, "loss": res.loss, "evaluations": len(res.trace),
               "F_AB_exact": f_ab, "F_AE_exact": f_ae,
               "theta_loss_minimizer": attacks.exact_loss_minimizer(conf.alpha, conf.f)}
    return ["iteration", "theta", "loss", "F_AB", "F_AE"], res.to_csv_rows(), summary


def _qec422(cfg, parsed, workers):
    lam = parsed["lambda"]
    ch = parsed["channel"]
    ch = scale_channel(ch, lam) if ch is not None and lam != 1.0 else ch
    p_d = parsed["p_d"] * lam if parsed["p_d"] else None
    rows, stats = [], []
    for m in parsed["m_values"]:
        st = qx.run_422(ch, m, p_d, parsed["shots"], parsed["seed"], workers, parsed["exact"])
        stats.append(st)
        rows.append((m, st.acceptance_rate, st.flip_rate_LQ1, st.flip_rate_LQ2,
                     st.stderr_acceptance, st.stderr_flip))
    last = stats[-1]
    summary = {"lambda": lam, "acceptance": last.acceptance_rate,
               "p_L": 0.5 * (last.flip_rate_LQ1 + last.flip_rate_LQ2),
               "flip_lq1": last.flip_rate_LQ1, "flip_lq2": last.flip_rate_LQ2, "m": last.m}
    p = getattr(ch, "p", None)
    if p is not None and type(ch).__name__ == "BitFlip":
        summary["analytic"] = qx.analytic_422_bitflip(p)
        summary["physical_ref"] = qx.physical_flip_reference(p)
    return ["m", "acceptance", "flip_lq1", "flip_lq2", "stderr_acceptance", "stderr_flip"], rows, summary


def _scaling(cfg, parsed, workers):
    pts = qx.scaling_sweep(parsed["lambdas"], parsed["p"], parsed["p_d"], parsed["circuit_noise"],
                           parsed["shots"], parsed["channel_kind"], parsed["seed"], workers,
                           parsed["exact"])
    rows = [(pt.lam, pt.p_L, pt.acceptance, pt.physical_ref) for pt in pts]
    low = [pt for pt in pts if pt.lam <= 0.1 + 1e-12 and pt.p_L > 0]
    summary = {"points": len(pts)}
    if len(low) >= 4:
        summary["slope_low_lambda"] = qx.loglog_slope([pt.lam for pt in low], [pt.p_L for pt in low])
    if parsed["channel_kind"] == "bitflip":
        summary["bitflip_crossover"] = qx.bitflip_crossover()
    return ["lambda", "p_L", "acceptance", "physical_ref"], rows, summary


def _steane(cfg, parsed, workers):
    res = qx.run_steane_monitor(parsed["channel"], parsed["rounds_max"], parsed["p_d"],
                                parsed["shots"], parsed["seed"], workers, parsed["flip_rates"])
    h = res.histogram
    rows = [(s, n, r) for (s, r), n in sorted(h.by_round.items(), key=lambda kv: (kv[0][1], kv[0][0]))]
    summary = {"top3": h.top(3), "top7": h.top(7), "erasure": h.erasure, "accepted": h.accepted,
               "trivial_per_round": h.trivial_per_round, "shots": h.shots,
               "flip_rates": res.flip_rates, "accepted_per_rounds": res.accepted_per_rounds}
    return ["syndrome", "count", "round_of_detection"], rows, summary


def _sidechannel(cfg, parsed, workers):
    m = dict(parsed["model"])
    kind = m.pop("type")
    if kind == "detector":
        det = sc.DetectorModel(**m)
        grid = parsed["durations_us"]
        rows = [(t, det.p_dark(0, t), det.p_dark(1, t)) for t in grid]
        header = ["duration_us", "p_dark_input0", "p_dark_input1"]
        summary = {"agreement": [sc.agreement_probability(det, 1100.0, t) for t in grid]}
        model, params = det, {"e_exposure_us": parsed["inject"]}
    else:
        if "p_dark0" in m:
            m["p_dark0"] = tuple(m["p_dark0"])
        bias = sc.BiasModel(kind, **m)
        rows = sc.bias_curve(bias, parsed["durations_us"])
        header = ["duration_us", "p_dark_input0", "p_dark_input1"]
        summary = {}
        model, params = bias, {"duration_us": parsed["inject"]}
    if parsed["inject"] is not None:
        recs = protocols.sift(protocols.run_bb84(parsed["rounds"], master_seed=parsed["seed"]))
        aug = sc.inject_sidechannel(recs, model, params, parsed["seed"])
        summary.update(protocols.qber_abort_check(aug))
        if kind == "detector":
            summary["mutual_information"] = sc.mutual_information([r.x_B for r in aug], [r.e_leak for r in aug])
    return header, rows, summary


RUNNERS = {"bb84": _protocol, "bbm92": _protocol, "qcl": _qcl, "qec422": _qec422,
           "qec422-scaling": _scaling, "steane-monitor": _steane, "sidechannel": _sidechannel}


def run_experiment(cfg: dict, workers: int = 1):
    parsed = cfg["_parsed"]
    header, rows, summary = RUNNERS[cfg["experiment"]](cfg, parsed, workers)
    return header, rows, _clean(summary)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if hasattr(obj, "item"):
        return obj.item()
    return obj
