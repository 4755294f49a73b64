# suites.py
"""Bodies of the verification commands. Each takes a RunConfig and returns a ReportDocument."""

import logging
import math

import numpy as np
import pandas as pd

from services.acvt import (
    ContractionMetric,
    axiom_residuals,
    constant_curvature,
    pullback,
    q_map,
    random_acvt,
    random_cone_tensor,
)
from services.cone import (
    FourTuple,
    build_block_matrix,
    cone_membership,
    deform_to_boundary,
    frame_scan_min,
    isotropic_form,
    q_boundary_decomposition,
    second_variation_fd,
    second_variation_form,
    trace_inequality_value,
)
from services.errors import RicciDefinitenessError
from services.geometries import (
    DEFAULT_STENCIL,
    SphereFlow,
    WarpedFlow,
    flow_equation_residual,
    nic_report,
    provider_from_spec,
    warped_flow,
    warped_sectional_curvatures,
)
from services.odeflow import IntegratorConfig, integrate_ode
from services.reports import NONNEGATIVE, ReportDocument
from services.spacetime import (
    HarnackMode,
    SolitonMode,
    assemble_spacetime_S,
    compute_point,
    evolution_terms,
    h_evolution_check,
    hamilton_identity_residual,
    harnack_form,
    harnack_min,
    kn_perturbation,
    parallel_transport,
    residual_study,
    soliton_detect,
    time_floor,
    trace_harnack,
    trace_harnack_min,
)

logger = logging.getLogger(__name__)

ANCHOR_Q_CLOSURE = "Q of a curvature tensor is a curvature tensor"
ANCHOR_Q_IDENTITY = "sum-of-squares identity for the isotropic form of Q(S)"
ANCHOR_SECOND_VARIATION = "second variation of the isotropic form at a zero"
ANCHOR_BLOCK = "block matrix positivity at boundary tuples"
ANCHOR_CONE = "cone K of tensors with nonnegative isotropic form"
ANCHOR_ODE = "invariance of K under dS/dt = Q(S)"
ANCHOR_EVOLUTION = "evolution equation of the space-time tensor S"
ANCHOR_HAMILTON = "Hamilton's identity for M"
ANCHOR_H = "evolution of the space-time metric h"
ANCHOR_FLOW = "Ricci flow equation"
ANCHOR_HARNACK = "matrix Harnack inequality"
ANCHOR_TRACE = "trace Harnack inequality"
ANCHOR_SOLITON = "equality case: Ricci solitons"
ANCHOR_TRANSPORT = "N-set preserved by space-time parallel transport"


def _relative(value, scale):
    return float(value) / max(float(scale), 1.0)


def _provider(cfg):
    return provider_from_spec(cfg.provider)


def _mode(cfg, provider):
    if cfg.mode in (HarnackMode.ANCIENT.value, HarnackMode.WITH_1_OVER_T.value):
        return HarnackMode(cfg.mode)
    return HarnackMode.ANCIENT if provider.ancient else HarnackMode.WITH_1_OVER_T


def _random_tuple(rng, d):
    return FourTuple.from_array(rng.standard_normal((4, d))).normalized()


def _spatial_tuple(rng, d):
    rows = rng.standard_normal((4, d))
    rows[:, -1] = 0.0
    return FourTuple.from_array(rows)


def cmd_identity_suite(cfg) -> ReportDocument:
    """Algebraic identities of Q and the second-variation machinery at boundary tuples of K."""
    report = ReportDocument("identity-suite", cfg.echo())
    rng = np.random.default_rng(cfg.seed)
    rows = []

    closure, identity, variation = 0.0, 0.0, 0.0
    for d in cfg.dims:
        for _ in range(cfg.instances):
            S = random_acvt(rng, d)
            Q = q_map(S, ContractionMetric.identity(d))
            closure = max(closure, _relative(max(axiom_residuals(Q.comps).values()), Q.scale()))
            if d < 3:
                continue
            v = _random_tuple(rng, d)
            lhs, rhs = q_boundary_decomposition(S, v)
            identity = max(identity, _relative(abs(lhs - rhs), max(abs(lhs), abs(rhs))))
            w = _random_tuple(rng, d)
            exact = second_variation_form(S, v, w)
            variation = max(variation, _relative(abs(exact - second_variation_fd(S, v, w)), abs(exact)))
            rows.append({"d": d, "quantity": "q_identity_lhs", "value": lhs})
    report.add("q_closure_axioms", closure, cfg.tol("acvt"), anchor=ANCHOR_Q_CLOSURE)
    if any(d >= 3 for d in cfg.dims):
        report.add("q_isotropic_identity", identity, cfg.tol("identity"), anchor=ANCHOR_Q_IDENTITY)
        report.add("second_variation_fd", variation, cfg.tol("second_variation"), anchor=ANCHOR_SECOND_VARIATION)
    else:
        report.event("dims below 3: identity and second-variation checks skipped")

    boundary_dims = [d for d in cfg.dims if d >= 3]
    worst = {"second_variation": math.inf, "block_min_eig": math.inf, "trace_inequality": math.inf, "q_combination": math.inf}
    count = max(1, cfg.instances // max(len(boundary_dims), 1))
    for d in boundary_dims:
        for k in range(count):
            seed = cfg.seed + 1000 * d + k
            B, witness, theta = deform_to_boundary(random_cone_tensor(seed, d), seed=seed)
            scale = max(B.scale(), 1.0e-300)
            w = _spatial_tuple(rng, d)
            worst["second_variation"] = min(worst["second_variation"], second_variation_form(B, witness, w) / scale)
            bundle = build_block_matrix(B, witness)
            worst["block_min_eig"] = min(worst["block_min_eig"], bundle.min_eigenvalue() / scale)
            worst["trace_inequality"] = min(worst["trace_inequality"], trace_inequality_value(bundle) / scale**2)
            lhs, _ = q_boundary_decomposition(B, witness)
            worst["q_combination"] = min(worst["q_combination"], lhs / scale**2)
            rows.append({"d": d, "quantity": "boundary_theta", "value": theta})
    for name, value in worst.items():
        if math.isfinite(value):
            report.add(f"boundary_{name}", value, cfg.tol("nonnegativity"), NONNEGATIVE, ANCHOR_BLOCK)

    report.add_table("instances", pd.DataFrame(rows, columns=["d", "quantity", "value"]))
    return report


def cmd_cone_check(cfg) -> ReportDocument:
    """Membership of known cone tensors, GL invariance, exact non-membership certificates, frame-form agreement."""
    report = ReportDocument("cone-check", cfg.echo())
    rng = np.random.default_rng(cfg.seed)
    rows = []
    member_min, pulled_min, certificate_error, frame_min = math.inf, math.inf, 0.0, math.inf
    for d in cfg.dims:
        for k in range(cfg.instances):
            S = random_cone_tensor(cfg.seed + 100 * d + k, d)
            cert = cone_membership(S, seed=cfg.seed + k)
            member_min = min(member_min, cert.min_value / S.norm())
            L = np.eye(d) + 0.5 * rng.standard_normal((d, d))
            pulled = pullback(S, L)
            pulled_min = min(pulled_min, cone_membership(pulled, seed=cfg.seed + k).min_value / pulled.norm())
            if d >= 4 and k < 5:
                frame_min = min(frame_min, frame_scan_min(S, samples=100, seed=cfg.seed + k) / S.norm())

            generic = random_acvt(rng, d)
            generic_cert = cone_membership(generic, seed=cfg.seed + k)
            if not generic_cert.member:
                # the exported witness alone must reproduce the violation
                witness = FourTuple.from_array(generic_cert.to_dict()["argmin"])
                recomputed = isotropic_form(generic, witness)
                certificate_error = max(certificate_error, _relative(abs(recomputed - generic_cert.min_value), generic.norm()))
            rows.append({"d": d, "instance": k, "kind": "cone", "min_value": cert.min_value, "member": cert.member})
            rows.append({"d": d, "instance": k, "kind": "generic", "min_value": generic_cert.min_value, "member": generic_cert.member})

    report.add("cone_tensor_membership", member_min, cfg.tol("cone"), NONNEGATIVE, ANCHOR_CONE)
    report.add("pullback_membership", pulled_min, cfg.tol("cone"), NONNEGATIVE, ANCHOR_CONE)
    report.add("non_membership_certificate", certificate_error, cfg.tol("identity"), anchor=ANCHOR_CONE)
    if math.isfinite(frame_min):
        report.add("frame_form_nonnegative", frame_min, cfg.tol("cone"), NONNEGATIVE, ANCHOR_CONE)
    report.add_table("memberships", pd.DataFrame(rows, columns=["d", "instance", "kind", "min_value", "member"]))
    return report


def _riccati_error(step, t_end=0.1):
    S0 = constant_curvature(1.0, np.eye(3))
    traj = integrate_ode(S0, IntegratorConfig(step=step, t_end=t_end, save_every=10**6, cone_starts=1))
    return abs(traj.final.comps[0, 1, 0, 1] - 1.0 / (1.0 - 4.0 * t_end))


def cmd_ode_invariance(cfg) -> ReportDocument:
    """Riccati anchor, RK4 order and cone invariance along random trajectories."""
    report = ReportDocument("ode-invariance", cfg.echo())
    report.add("riccati_anchor", _riccati_error(1.0e-3), cfg.tol("riccati"), anchor=ANCHOR_ODE)
    ratio = _riccati_error(0.01) / _riccati_error(0.005)
    report.add("rk4_order_ratio", ratio / 16.0 - 1.0, cfg.tol("rk4_order"), anchor="fourth-order Runge-Kutta convergence")

    rows = []
    worst_min, worst_symmetry = math.inf, 0.0
    for d in cfg.dims:
        for k in range(cfg.instances):
            seed = cfg.seed + 1000 * d + k
            S0 = random_cone_tensor(seed, d)
            step = 0.01 / S0.norm()
            traj = integrate_ode(S0, IntegratorConfig(step=step, t_end=50 * step, save_every=10, cone_seed=seed))
            if traj.blew_up:
                report.event(f"blow-up guard triggered for seed {seed}, d={d}")
            worst_min = min(worst_min, traj.worst_relative_cone_min())
            for state in traj.states:
                worst_symmetry = max(worst_symmetry, _relative(max(axiom_residuals(state.comps).values()), state.scale()))
            rows.extend(
                {"seed": seed, "d": d, "time": t, "norm": s, "cone_min": m}
                for t, s, m in zip(traj.times, traj.scales, traj.cone_mins)
            )
    report.add("trajectory_cone_min", worst_min, cfg.tol("nonnegativity"), NONNEGATIVE, ANCHOR_ODE)
    report.add("trajectory_symmetry", worst_symmetry, 1.0e-8, anchor=ANCHOR_ODE)
    report.add_table("trajectories", pd.DataFrame(rows, columns=["seed", "d", "time", "norm", "cone_min"]))
    return report


def _sample_rows(x, t, quantity, value):
    row = {f"x{i}": float(c) for i, c in enumerate(np.atleast_1d(x))}
    row.update({"t": t, "quantity": quantity, "value": float(value)})
    return row


def _frame(rows):
    frame = pd.DataFrame(rows)
    if frame.empty:
        return frame
    coords = sorted((c for c in frame.columns if c.startswith("x")), key=lambda c: int(c[1:]))
    return frame[coords + ["t", "quantity", "value"]]


def _closed_form_evolution(cfg, provider, report, rows):
    floor = time_floor(provider, DEFAULT_STENCIL, cfg.t_min)
    points = [(x, t) for x, t in provider.sample_points(cfg.samples, cfg.samples) if t >= floor]
    worst = {"evolution": 0.0, "hamilton": 0.0, "lemma_h": 0.0, "lemma_grad": 0.0, "flow": 0.0}
    rng = np.random.default_rng(cfg.seed)
    for x, t in points:
        terms = evolution_terms(provider, x, t, t_min=cfg.t_min)
        worst["evolution"] = max(worst["evolution"], terms.relative())
        pt = compute_point(provider, x, t)
        ham = np.linalg.norm(hamilton_identity_residual(provider, x, t, t_min=cfg.t_min))
        worst["hamilton"] = max(worst["hamilton"], _relative(ham, np.linalg.norm(pt.M)))
        lhs, rhs, grad_lhs, grad_rhs = h_evolution_check(provider, x, t, rng.standard_normal(provider.n), t_min=cfg.t_min)
        worst["lemma_h"] = max(worst["lemma_h"], _relative(abs(lhs - rhs), rhs))
        worst["lemma_grad"] = max(worst["lemma_grad"], _relative(abs(grad_lhs - grad_rhs), grad_rhs))
        worst["flow"] = max(worst["flow"], _relative(flow_equation_residual(provider, x, t), np.max(np.abs(pt.g))))
        rows.append(_sample_rows(x, t, "evolution_relative", terms.relative()))
        rows.append(_sample_rows(x, t, "hamilton_norm", ham))

    report.add("evolution_residual", worst["evolution"], cfg.tol("evolution"), anchor=ANCHOR_EVOLUTION)
    report.add("hamilton_residual", worst["hamilton"], cfg.tol("hamilton"), anchor=ANCHOR_HAMILTON)
    report.add("h_evolution", worst["lemma_h"], cfg.tol("lemma"), anchor=ANCHOR_H)
    report.add("h_gradient", worst["lemma_grad"], cfg.tol("lemma"), anchor=ANCHOR_H)
    report.add("flow_equation", worst["flow"], cfg.tol("evolution"), anchor=ANCHOR_FLOW)

    if isinstance(provider, SphereFlow) and provider.n == 3 and provider.r0 == 1.0:
        kappa = provider.kappa(0.1)
        origin = np.zeros(3)
        pt = compute_point(provider, origin, 0.1)
        expected = (4.0 * kappa**2 + kappa / 0.1) * pt.g
        report.add("sphere_m_anchor", _relative(np.max(np.abs(pt.M - expected)), np.max(np.abs(expected))), cfg.tol("identity"), anchor=ANCHOR_HAMILTON)
        _, rhs, _, _ = h_evolution_check(provider, origin, 0.1, np.ones(3), t_min=cfg.t_min)
        report.add("sphere_h_anchor", rhs - 4.1666666666666667, 1.0e-4, anchor=ANCHOR_H)


def _refinement_pair(provider: WarpedFlow):
    grid = provider.grid
    fine = warped_flow(provider.n, "perturbed", grid.refined(), float(provider.flow.times[-1]))
    return [provider, fine]


def _warped_evolution(cfg, provider: WarpedFlow, report, rows):
    flow = provider.flow
    node = int(round(0.35 * (flow.ns - 1)))
    angles = [math.pi / 2 - 0.3 + 0.2 * k for k in range(provider.n - 1)]
    x = np.array([node * flow.dx] + angles)
    floor = time_floor(provider, DEFAULT_STENCIL, cfg.t_min)
    candidates = [k for k in range(1, flow.nt - 1) if flow.times[k] >= floor]
    if not candidates:
        report.event("warped flow too short for the resolved time floor; nothing checked")
        return
    t = float(flow.times[candidates[len(candidates) // 2]])

    pt = compute_point(provider, x, t)
    antisymmetry = np.max(np.abs(pt.P + np.swapaxes(pt.P, 0, 1)))
    report.add("p_antisymmetry", _relative(antisymmetry, np.max(np.abs(pt.P))), 1.0e-10, anchor=ANCHOR_EVOLUTION)
    rows.append(_sample_rows(x, t, "p_max", np.max(np.abs(pt.P))))

    k_rad, c_rad, k_sph, c_sph = warped_sectional_curvatures(provider, x, t)
    agreement = abs(k_rad - c_rad) / max(abs(k_rad), 1.0)
    if provider.n > 2:
        agreement = max(agreement, abs(k_sph - c_sph) / max(abs(k_sph), 1.0))
    report.add("sectional_curvature_paths", agreement, cfg.tol("grid_residual"), anchor="rotationally symmetric curvature formulas")

    terms = evolution_terms(provider, x, t, t_min=cfg.t_min)
    ham = np.linalg.norm(hamilton_identity_residual(provider, x, t, t_min=cfg.t_min))
    report.add("evolution_residual_grid", terms.relative(), cfg.tol("grid_residual"), anchor=ANCHOR_EVOLUTION)
    report.add("hamilton_residual_grid", _relative(ham, np.linalg.norm(pt.M)), cfg.tol("grid_residual"), anchor=ANCHOR_HAMILTON)
    rows.append(_sample_rows(x, t, "evolution_relative", terms.relative()))

    if provider.grid is None:
        report.event("snapshot provider: no refinement study (grid parameters unknown)")
        return
    providers = _refinement_pair(provider)
    for quantity, name in (("evolution", "evolution_rate"), ("hamilton", "hamilton_rate")):
        study = residual_study(providers, x, t, quantity, t_min=cfg.t_min)
        report.add_table(f"{quantity}_study", study)
        report.add(name, float(study["rate"].iloc[-1]) - 2.0, cfg.tol("rate"), anchor=ANCHOR_EVOLUTION)


def cmd_verify_evolution(cfg) -> ReportDocument:
    """Residuals of the space-time evolution equation, Hamilton's identity, the h identities and the flow equation."""
    report = ReportDocument("verify-evolution", cfg.echo())
    provider = _provider(cfg)
    rows = []
    if isinstance(provider, WarpedFlow):
        for message in provider.flow.events:
            report.event(message)
        _warped_evolution(cfg, provider, report, rows)
    else:
        _closed_form_evolution(cfg, provider, report, rows)
    report.add_table("samples", _frame(rows))
    return report


def _harnack_points(cfg, provider):
    if isinstance(provider, WarpedFlow):
        return provider.sample_points(cfg.samples, cfg.samples, t_min=cfg.t_min)
    return provider.sample_points(cfg.samples, cfg.samples)


def cmd_harnack_scan(cfg) -> ReportDocument:
    """Harnack forms over the provider's sample grid: minima, trace consistency and cone membership of S."""
    report = ReportDocument("harnack-scan", cfg.echo())
    provider = _provider(cfg)
    mode = _mode(cfg, provider)
    rng = np.random.default_rng(cfg.seed)
    points = _harnack_points(cfg, provider)
    if isinstance(provider, WarpedFlow):
        for cert, (x, t) in zip(nic_report(provider, points, seed=cfg.seed), points):
            if not cert.member:
                report.event(f"NIC fails at x={np.round(x, 4).tolist()}, t={t:.4g}")

    rows = []
    worst = {"matrix": math.inf, "trace": math.inf, "cone": math.inf, "consistency": 0.0, "cross": 0.0}
    for x, t in points:
        pt = compute_point(provider, x, t, mode)
        S = assemble_spacetime_S(pt)
        scale = max(S.scale(), 1.0)

        cert = cone_membership(S, starts=16, seed=cfg.seed)
        worst["cone"] = min(worst["cone"], cert.min_value / max(S.norm(), 1.0))

        value, v, w = harnack_min(pt, seed=cfg.seed)
        worst["matrix"] = min(worst["matrix"], value / scale)
        rows.append(_sample_rows(x, t, "harnack_min", value))

        try:
            trace_min, _ = trace_harnack_min(pt)
            worst["trace"] = min(worst["trace"], trace_min / scale)
            rows.append(_sample_rows(x, t, "trace_harnack_min", trace_min))
        except RicciDefinitenessError as exc:
            logger.debug("trace minimum skipped: %s", exc)

        v = rng.standard_normal(provider.n)
        w = rng.standard_normal(provider.n)
        form = harnack_form(pt, v, w)
        tilde_v = FourTuple.from_array(
            [np.append(v, 1.0), np.zeros(provider.n + 1), np.append(w, 0.0), np.zeros(provider.n + 1)]
        )
        worst["cross"] = max(worst["cross"], _relative(abs(form.value - isotropic_form(S, tilde_v)), abs(form.value)))

        basis = np.linalg.cholesky(pt.g_inv)
        traced = sum(harnack_form(pt, v, basis[:, j]).value for j in range(provider.n))
        full = trace_harnack(pt, v)
        worst["consistency"] = max(worst["consistency"], _relative(abs(traced - 0.5 * full), abs(full)))

    report.add("harnack_min", worst["matrix"], cfg.tol("harnack"), NONNEGATIVE, ANCHOR_HARNACK)
    if math.isfinite(worst["trace"]):
        report.add("trace_harnack_min", worst["trace"], cfg.tol("harnack"), NONNEGATIVE, ANCHOR_TRACE)
    report.add("spacetime_cone_membership", worst["cone"], cfg.tol("cone"), NONNEGATIVE, ANCHOR_CONE)
    report.add("isotropic_cross_check", worst["cross"], cfg.tol("identity"), anchor=ANCHOR_HARNACK)
    report.add("trace_consistency", worst["consistency"], cfg.tol("identity"), anchor=ANCHOR_TRACE)

    x0, t0 = points[0]
    pt = compute_point(provider, x0, t0, mode)
    for C in (0.0, 1.0):
        perturbed, cert, ratio = kn_perturbation(pt, C, seed=cfg.seed)
        report.add(f"kn_perturbation_C{C:g}", cert.min_value / max(perturbed.norm(), 1.0), cfg.tol("cone"), NONNEGATIVE, ANCHOR_CONE)
        rows.append(_sample_rows(x0, t0, "deviation_ratio", ratio))

    if isinstance(provider, SphereFlow) and provider.n == 3 and provider.r0 == 1.0 and mode is HarnackMode.WITH_1_OVER_T:
        value, _ = trace_harnack_min(compute_point(provider, np.zeros(3), 0.1))
        kappa = provider.kappa(0.1)
        expected = 24.0 * kappa**2 + 6.0 * kappa / 0.1
        report.add("sphere_trace_anchor", (value - expected) / expected, 1.0e-3, anchor=ANCHOR_TRACE)

    report.add_table("scan", _frame(rows))
    return report


def _random_polyline(rng, start, radius, vertices=3):
    steps = rng.uniform(-radius, radius, size=(vertices - 1, start.shape[0]))
    return np.vstack([start, start + np.cumsum(steps, axis=0)])


def cmd_soliton_detect(cfg) -> ReportDocument:
    """Soliton field V, soliton residuals and, for ancient flows, the equality case of the trace inequality."""
    report = ReportDocument("soliton-detect", cfg.echo())
    provider = _provider(cfg)
    if cfg.mode in (SolitonMode.EXPANDING.value, SolitonMode.STEADY.value):
        mode = SolitonMode(cfg.mode)
    else:
        mode = SolitonMode.STEADY if provider.ancient else SolitonMode.EXPANDING
    samples = provider.sample_points(cfg.samples, 1)
    t0 = samples[0][1]
    points = [x for x, _ in samples]

    result = soliton_detect(provider, t0, points, mode, tol=cfg.tol("soliton"))
    report.event(f"{provider.spec()} {'is' if result.is_soliton else 'is not'} a {mode.value} soliton (residual {result.residual_norm:.3e})")
    rows = [_sample_rows(x, t0, "soliton_residual", r) for x, r in zip(result.points, result.residuals)]

    field_error = 0.0
    for x, V in zip(result.points, result.V):
        pt = compute_point(provider, x, t0)
        field_error = max(field_error, _relative(np.linalg.norm(pt.dscal + 2.0 * pt.ric @ V), np.linalg.norm(pt.dscal)))
    report.add("soliton_field_equation", field_error, cfg.tol("identity"), anchor=ANCHOR_SOLITON)

    if provider.ancient and mode is SolitonMode.STEADY:
        report.add("steady_soliton_residual", result.residual_norm, cfg.tol("soliton"), anchor=ANCHOR_SOLITON)
    if isinstance(provider, SphereFlow) and mode is SolitonMode.EXPANDING:
        kappa = provider.kappa(t0)
        expected = abs(2.0 * kappa + 0.5 / t0) * math.sqrt(provider.n)
        report.add("sphere_not_expanding", _relative(abs(result.residual_norm - expected), expected), cfg.tol("evolution"), anchor=ANCHOR_SOLITON)

    if provider.ancient:
        trace_worst = 0.0
        for x, t in provider.sample_points(cfg.samples, 4):
            value, _ = trace_harnack_min(compute_point(provider, x, t, HarnackMode.ANCIENT))
            trace_worst = max(trace_worst, abs(value))
            rows.append(_sample_rows(x, t, "trace_harnack_min", value))
        report.add("ancient_trace_equality", trace_worst, cfg.tol("soliton"), anchor=ANCHOR_TRACE)

        rng = np.random.default_rng(cfg.seed)
        transport_worst = 0.0
        for _ in range(5):
            path = _random_polyline(rng, rng.uniform(-1.0, 1.0, provider.n), 1.0)
            start = compute_point(provider, path[0], t0, HarnackMode.ANCIENT)
            _, v_star = trace_harnack_min(start)
            moved = parallel_transport(provider, t0, path, np.append(v_star, 1.0), HarnackMode.ANCIENT, steps=64)
            end = compute_point(provider, path[-1], t0, HarnackMode.ANCIENT)
            value = trace_harnack(end, moved[:-1] / moved[-1])
            transport_worst = max(transport_worst, abs(value))
            rows.append(_sample_rows(path[-1], t0, "transported_trace", value))
        report.add("transport_keeps_equality", transport_worst, cfg.tol("transport"), anchor=ANCHOR_TRANSPORT)

    report.add_table("samples", _frame(rows))
    return report


COMMANDS = {
    "identity-suite": cmd_identity_suite,
    "cone-check": cmd_cone_check,
    "ode-invariance": cmd_ode_invariance,
    "verify-evolution": cmd_verify_evolution,
    "harnack-scan": cmd_harnack_scan,
    "soliton-detect": cmd_soliton_detect,
}
