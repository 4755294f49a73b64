# curvature.py
"""Autodiff geometry engine over space-time points z = (x^0, ..., x^{n-1}, t).

A provider hands in a pure function metric(z, params) -> (n, n) array. Every
curvature quantity is derived from it with forward-mode jax derivatives. The
outermost derivatives of the space-time tensors (D~S, D~^2 S, D~h, D V) go
through a pluggable partial operator: exact autodiff, or central differences
with a fixed step.

Index conventions:
    Gamma[k, i, j]      Gamma^k_ij
    R[i, j, k, l]       g_km R^m_lij, positive sectional curvature on spheres
    connection[c, a, b] D~_a e_b = connection[c, a, b] e_c, index n is tau
"""

import functools
import logging
from types import SimpleNamespace

import jax
import jax.numpy as jnp

jax.config.update("jax_enable_x64", True)

logger = logging.getLogger(__name__)

METHODS = ("autodiff", "central")


def jacobian(f):
    """Partial derivatives of f, derivative index first."""

    def derivative(z):
        return jnp.moveaxis(jax.jacfwd(f)(z), -1, 0)

    return derivative


def central_jacobian(step):
    """Same layout as jacobian, from second-order central differences."""

    def partial(f):
        def derivative(z):
            offsets = step * jnp.eye(z.shape[0], dtype=z.dtype)
            forward = jax.vmap(f)(z + offsets)
            backward = jax.vmap(f)(z - offsets)
            return (forward - backward) / (2.0 * step)

        return derivative

    return partial


def covariant(field, connection, partial):
    """D_a T_{b1..br} = d_a T - sum over slots of conn[c, a, b_slot] T[.., c, ..].

    The connection's size decides which derivative directions are kept, so the
    same helper serves the spatial Levi-Civita connection and D~.
    """

    def derivative(z):
        T = field(z)
        conn = connection(z)
        out = partial(field)(z)[: conn.shape[1]]
        for slot in range(T.ndim):
            term = jnp.tensordot(conn, T, axes=([0], [slot]))
            out = out - jnp.moveaxis(term, 1, slot + 1)
        return out

    return derivative


def spacetime_components(R, P, M, xp=jnp):
    """Components of S on R^n x R from R_ijkl, P_ijk and M_ij (tau is the last index)."""
    n = R.shape[0]
    basis = xp.eye(n + 1)
    E = basis[:n]
    u = basis[n]
    S = xp.einsum("ijkl,ia,jb,kc,ld->abcd", R, E, E, E, E)
    S = S + xp.einsum("ijk,ia,jb,c,kd->abcd", P, E, E, u, E)
    S = S - xp.einsum("ijk,ia,jb,kc,d->abcd", P, E, E, E, u)
    S = S + xp.einsum("ijk,a,kb,ic,jd->abcd", P, u, E, E, E)
    S = S - xp.einsum("ijk,ka,b,ic,jd->abcd", P, E, u, E, E)
    S = S + xp.einsum("ij,ia,b,jc,d->abcd", M, E, u, E, u)
    S = S - xp.einsum("ij,ia,b,c,jd->abcd", M, E, u, u, E)
    S = S - xp.einsum("ij,a,ib,jc,d->abcd", M, u, E, E, u)
    S = S + xp.einsum("ij,a,ib,c,jd->abcd", M, u, E, u, E)
    return S


class GeometryFields:
    """Geometric fields of one metric at fixed parameters, each a function of z.

    lam scales every 1/t coefficient: 1 for the Harnack setting on (0, T),
    0 for ancient solutions.
    """

    def __init__(self, metric, params, lam, outer=jacobian):
        self.metric = metric
        self.params = params
        self.lam = lam
        self.outer = outer

    def nabla(self, field):
        return covariant(field, self.christoffel, jacobian)

    def g(self, z):
        return self.metric(z, self.params)

    def g_inv(self, z):
        return jnp.linalg.inv(self.g(z))

    def christoffel(self, z):
        n = z.shape[0] - 1
        dg = jacobian(self.g)(z)[:n]
        lowered = jnp.einsum("ijl->lij", dg) + jnp.einsum("jil->lij", dg) - dg
        return 0.5 * jnp.einsum("kl,lij->kij", self.g_inv(z), lowered)

    def riemann(self, z):
        n = z.shape[0] - 1
        gam = self.christoffel(z)
        dgam = jacobian(self.christoffel)(z)[:n]
        rup = (
            jnp.einsum("imjl->mlij", dgam)
            - jnp.einsum("jmil->mlij", dgam)
            + jnp.einsum("mip,pjl->mlij", gam, gam)
            - jnp.einsum("mjp,pil->mlij", gam, gam)
        )
        return jnp.einsum("km,mlij->ijkl", self.g(z), rup)

    def ricci(self, z):
        return jnp.einsum("ik,ijkl->jl", self.g_inv(z), self.riemann(z))

    def scal(self, z):
        return jnp.einsum("jl,jl->", self.g_inv(z), self.ricci(z))

    def dscal(self, z):
        return jacobian(self.scal)(z)[: z.shape[0] - 1]

    def hess_scal(self, z):
        return self.nabla(self.nabla(self.scal))(z)

    def c(self, z):
        return 0.5 * self.lam / z[-1]

    def p_tensor(self, z):
        d = self.nabla(self.ricci)(z)
        return d - jnp.swapaxes(d, 0, 1)

    def m_tensor(self, z):
        g_inv = self.g_inv(z)
        ric = self.ricci(z)
        lap_ric = jnp.einsum("ab,abij->ij", g_inv, self.nabla(self.nabla(self.ricci))(z))
        ric_up = g_inv @ ric @ g_inv
        return (
            lap_ric
            - 0.5 * self.hess_scal(z)
            + 2.0 * jnp.einsum("ikjl,kl->ij", self.riemann(z), ric_up)
            - ric @ g_inv @ ric
            + self.c(z) * ric
        )

    def connection(self, z):
        n = z.shape[0] - 1
        g_inv = self.g_inv(z)
        c = self.c(z)
        mixed = -(g_inv @ self.ricci(z) + c * jnp.eye(n, dtype=z.dtype))
        conn = jnp.zeros((n + 1,) * 3, dtype=z.dtype)
        conn = conn.at[:n, :n, :n].set(self.christoffel(z))
        conn = conn.at[:n, :n, n].set(mixed)
        conn = conn.at[:n, n, :n].set(mixed)
        conn = conn.at[:n, n, n].set(-0.5 * g_inv @ self.dscal(z))
        return conn.at[n, n, n].set(-3.0 * c)

    def h(self, z):
        n = z.shape[0] - 1
        metric = jnp.zeros((n + 1, n + 1), dtype=z.dtype)
        return metric.at[:n, :n].set(self.g(z)).at[n, n].set(1.0 / z[-1] ** 2)

    def s_tensor(self, z):
        return spacetime_components(self.riemann(z), self.p_tensor(z), self.m_tensor(z))

    def ds_tensor(self, z):
        return covariant(self.s_tensor, self.connection, self.outer)(z)

    def soliton_field(self, z):
        # V solving d_i scal + 2 Ric_ij V^j = 0
        return -0.5 * jnp.linalg.solve(self.ricci(z), self.dscal(z))


def _laplacian(g_inv, second):
    n = g_inv.shape[0]
    return jnp.einsum("pq,pq...->...", g_inv, second[:n, :n])


@functools.lru_cache(maxsize=None)
def compiled(metric, method="autodiff", step=1.0e-3):
    """jit-compiled evaluators for one metric function, cached per (metric, method, step).

    Providers pass their class-level metric, so every instance of a provider
    class shares the compiled code; parameters travel as traced arguments.
    """
    if method not in METHODS:
        raise ValueError(f"unknown derivative method {method!r}")
    outer = jacobian if method == "autodiff" else central_jacobian(step)
    logger.debug("building evaluators for %s (%s)", getattr(metric, "__qualname__", metric), method)

    def fields(params, lam):
        return GeometryFields(metric, params, lam, outer)

    def point(z, params, lam):
        f = fields(params, lam)
        g_inv = f.g_inv(z)
        hess = f.hess_scal(z)
        return {
            "g": f.g(z),
            "g_inv": g_inv,
            "christoffel": f.christoffel(z),
            "riemann": f.riemann(z),
            "ricci": f.ricci(z),
            "scal": f.scal(z),
            "dscal": f.dscal(z),
            "hess_scal": hess,
            "lap_scal": jnp.einsum("ij,ij->", g_inv, hess),
            "P": f.p_tensor(z),
            "M": f.m_tensor(z),
            "connection": f.connection(z),
            "h": f.h(z),
        }

    def evolution(z, params, lam):
        f = fields(params, lam)
        n = z.shape[0] - 1
        dds = covariant(f.ds_tensor, f.connection, outer)(z)
        return {
            "S": f.s_tensor(z),
            "dt_S": f.ds_tensor(z)[n],
            "laplacian": _laplacian(f.g_inv(z), dds),
            "c": f.c(z),
            "g_inv": f.g_inv(z),
        }

    def hamilton(z, params, lam):
        f = fields(params, lam)
        g_inv = f.g_inv(z)
        ric_up = g_inv @ f.ricci(z) @ g_inv
        div_p = jnp.einsum("ma,aimj->ij", g_inv, f.nabla(f.p_tensor)(z))
        return f.m_tensor(z) + div_p - jnp.einsum("lm,iljm->ij", ric_up, f.riemann(z)) - f.c(z) * f.ricci(z)

    def h_terms(z, params, v):
        f = fields(params, 1.0)
        n = z.shape[0] - 1
        dh = covariant(f.h, f.connection, outer)
        first = dh(z)
        second = covariant(dh, f.connection, outer)(z)
        direction = jnp.concatenate([v, jnp.zeros(1, dtype=z.dtype)])
        return {
            "lhs": first[n] - _laplacian(f.g_inv(z), second) - f.h(z) / z[-1],
            "directional": jnp.einsum("a,abc->bc", direction, first),
            "h": f.h(z),
        }

    def soliton(z, params, lam):
        f = fields(params, lam)
        n = z.shape[0] - 1
        V = f.soliton_field(z)
        dV = outer(f.soliton_field)(z)[:n]
        DV = dV + jnp.einsum("jik,k->ij", f.christoffel(z), V)
        g_inv = f.g_inv(z)
        deviation = DV - f.ricci(z) @ g_inv - f.c(z) * jnp.eye(n, dtype=z.dtype)
        norm2 = jnp.einsum("ik,jl,ij,kl->", g_inv, f.g(z), deviation, deviation)
        return {"V": V, "deviation": deviation, "norm2": norm2}

    def flow(z, params):
        f = fields(params, 0.0)
        return jacobian(f.g)(z)[-1] + 2.0 * f.ricci(z)

    def connection(z, params, lam):
        return fields(params, lam).connection(z)

    return SimpleNamespace(
        point=jax.jit(point),
        evolution=jax.jit(evolution),
        hamilton=jax.jit(hamilton),
        h_terms=jax.jit(h_terms),
        soliton=jax.jit(soliton),
        flow=jax.jit(flow),
        connection=jax.jit(connection),
    )
