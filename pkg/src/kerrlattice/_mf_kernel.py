"""Inner integration loops for the two-sublattice mean-field dynamics.

Two interchangeable backends compute identical quantities:

* a numba-jitted kernel (explicit loops, no per-step allocation) — the
  default when numba imports, roughly an order of magnitude faster;
* a vectorized numpy implementation used as the cross-checked reference
  and as the fallback.

Both advance the coupled pair (rho_A, rho_B) with fixed-step classical RK4,
computing each sublattice's decoupling fields from the *other* sublattice at
every internal stage, and record per-sample observables, residuals
||rho_dot||_F, and state-invariant diagnostics.  All right-hand-side pieces
are assembled in manifestly Hermitian form, so Hermiticity is preserved
bitwise along the trajectory and the trace only drifts at round-off level.

Status codes returned by both backends:
    0 — completed;
    1 — non-finite values encountered (step size too large / blow-up);
    2 — top-Fock-level population crossed the truncation-abort threshold.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


# ---------------------------------------------------------------------------
# constant-operator bundle


def build_consts(h0: np.ndarray) -> tuple:
    """Precompute the constant matrices the kernels need.

    ``h0`` is the field-independent part of the single-sublattice
    Hamiltonian; the rest (annihilation matrix, occupation-dependent
    tunneling operator a^dag a^dag a, pair operator a a, number diagonal,
    jump-term square roots) depends only on the dimension.
    """
    d = h0.shape[0]
    a_mat = np.zeros((d, d), dtype=np.complex128)
    a2a = np.zeros((d, d), dtype=np.complex128)
    aa = np.zeros((d, d), dtype=np.complex128)
    for j in range(d):
        if j + 1 < d:
            a_mat[j, j + 1] = np.sqrt(j + 1.0)
            a2a[j + 1, j] = j * np.sqrt(j + 1.0)
        if j + 2 < d:
            aa[j, j + 2] = np.sqrt((j + 1.0) * (j + 2.0))
    n_vec = np.arange(d, dtype=np.float64)
    sq = np.sqrt(np.arange(1.0, d + 1.0))
    return (
        np.ascontiguousarray(h0, dtype=np.complex128),
        a_mat,
        a2a,
        aa,
        n_vec,
        sq,
    )


# ---------------------------------------------------------------------------
# numpy reference backend


def _fields_numpy(rho: np.ndarray, a_mat, a2a, aa_op, n_vec) -> np.ndarray:
    """Decoupling fields (<a>, <n>, <a^dag a^dag a>, <a a>) of both
    sublattices; shape (2, 4) complex, <n> stored in the real part."""
    out = np.empty((2, 4), dtype=np.complex128)
    out[:, 0] = np.einsum("ij,sji->s", a_mat, rho)
    out[:, 1] = np.einsum("i,sii->s", n_vec, rho).real
    out[:, 2] = np.einsum("ij,sji->s", a2a, rho)
    out[:, 3] = np.einsum("ij,sji->s", aa_op, rho)
    return out


def assemble_h_numpy(consts, zj, zv, t_ch, fields_other) -> np.ndarray:
    """Stacked (2, d, d) mean-field Hamiltonians, one per sublattice, given
    each sublattice's view of the *other* sublattice's fields."""
    h0, a_mat, a2a, aa_op, n_vec, _ = consts
    d = h0.shape[0]
    h = np.broadcast_to(h0, (2, d, d)).copy()
    for x in range(2):
        alpha, n_other, m3, aa_f = fields_other[x]
        n_other = n_other.real
        c = -zj * np.conj(alpha) + t_ch * m3
        h[x] += c * a_mat + np.conj(c * a_mat.T)
        h[x] += (zv * n_other) * np.diag(n_vec)
        if t_ch != 0.0:
            h[x] += t_ch * (alpha * a2a + np.conj(alpha * a2a.T))
            h[x] += (-0.5 * t_ch) * (aa_f * aa_op.conj().T + np.conj(aa_f) * aa_op)
    return h


def _rhs_numpy(rho: np.ndarray, consts, zj, zv, t_ch, kappa) -> np.ndarray:
    h0, a_mat, a2a, aa_op, n_vec, sq = consts
    d = h0.shape[0]
    fields = _fields_numpy(rho, a_mat, a2a, aa_op, n_vec)
    # sublattice X couples to the fields of sublattice 1-X
    h = assemble_h_numpy(consts, zj, zv, t_ch, fields[::-1])
    m = h @ rho
    out = -1j * (m - m.conj().transpose(0, 2, 1))
    sand = np.zeros_like(rho)
    sand[:, : d - 1, : d - 1] = (sq[: d - 1, None] * sq[None, : d - 1]) * rho[
        :, 1:, 1:
    ]
    out += kappa * sand
    out -= (0.5 * kappa) * (n_vec[None, :, None] + n_vec[None, None, :]) * rho
    return out


def evolve_numpy(
    rho,
    consts,
    zj,
    zv,
    t_ch,
    kappa,
    dt,
    n_samples,
    sample_every,
    t0,
    abort_top,
    out,
):
    """RK4 loop, numpy backend.  ``rho`` is modified in place; ``out`` is the
    dict of preallocated per-sample arrays shared with the numba backend."""
    h0, a_mat, a2a, aa_op, n_vec, sq = consts
    d = h0.shape[0]

    def rhs(r):
        return _rhs_numpy(r, consts, zj, zv, t_ch, kappa)

    # divergence shows up as inf/nan and is handled via the status code, so
    # the float warnings would only be noise
    with np.errstate(over="ignore", invalid="ignore"):
        return _loop_numpy(
            rho, rhs, consts, dt, n_samples, sample_every, t0, abort_top, out
        )


def _loop_numpy(rho, rhs, consts, dt, n_samples, sample_every, t0, abort_top, out):
    h0, a_mat, a2a, aa_op, n_vec, sq = consts
    d = h0.shape[0]
    for s in range(n_samples):
        for _ in range(sample_every):
            k1 = rhs(rho)
            k2 = rhs(rho + (0.5 * dt) * k1)
            k3 = rhs(rho + (0.5 * dt) * k2)
            k4 = rhs(rho + dt * k3)
            rho += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        fields = _fields_numpy(rho, a_mat, a2a, aa_op, n_vec)
        deriv = rhs(rho)
        out["t"][s] = t0 + (s + 1) * sample_every * dt
        out["a_A"][s] = fields[0, 0]
        out["a_B"][s] = fields[1, 0]
        out["n_A"][s] = fields[0, 1].real
        out["n_B"][s] = fields[1, 1].real
        out["res_A"][s] = np.linalg.norm(deriv[0])
        out["res_B"][s] = np.linalg.norm(deriv[1])
        tr = np.einsum("sii->s", rho).real
        out["trace_err"][s] = np.max(np.abs(tr - 1.0))
        out["herm_err"][s] = np.max(np.abs(rho - rho.conj().transpose(0, 2, 1)))
        # blow-up check must precede the eigensolve: LAPACK raises on NaNs
        if not np.isfinite(rho).all():
            out["min_eig"][s] = np.nan
            out["top_pop"][s] = np.nan
            return 1, s + 1
        ev_min = min(
            np.linalg.eigvalsh(rho[0])[0], np.linalg.eigvalsh(rho[1])[0]
        )
        out["min_eig"][s] = ev_min
        top = max(rho[0, d - 1, d - 1].real, rho[1, d - 1, d - 1].real)
        out["top_pop"][s] = top
        if abort_top > 0.0 and top >= abort_top:
            return 2, s + 1
    return 0, n_samples


# ---------------------------------------------------------------------------
# numba backend


@njit(cache=True)
def _fields_nb(rho_s, a_mat, a2a, aa_op, n_vec, out_row):
    d = rho_s.shape[0]
    alpha = 0.0 + 0.0j
    m3 = 0.0 + 0.0j
    aa_f = 0.0 + 0.0j
    occ = 0.0
    for i in range(d):
        occ += n_vec[i] * rho_s[i, i].real
        for j in range(d):
            r = rho_s[j, i]
            alpha += a_mat[i, j] * r
            m3 += a2a[i, j] * r
            aa_f += aa_op[i, j] * r
    out_row[0] = alpha
    out_row[1] = occ + 0.0j
    out_row[2] = m3
    out_row[3] = aa_f


@njit(cache=True)
def _build_h_nb(h0, a_mat, a2a, aa_op, n_vec, zj, zv, t_ch, f_row, h):
    d = h0.shape[0]
    alpha = f_row[0]
    n_other = f_row[1].real
    m3 = f_row[2]
    aa_f = f_row[3]
    c = -zj * np.conj(alpha) + t_ch * m3
    for i in range(d):
        for j in range(d):
            v = h0[i, j] + c * a_mat[i, j] + np.conj(c * a_mat[j, i])
            if t_ch != 0.0:
                v += t_ch * (alpha * a2a[i, j] + np.conj(alpha * a2a[j, i]))
                v += (-0.5 * t_ch) * (
                    aa_f * np.conj(aa_op[j, i]) + np.conj(aa_f) * aa_op[i, j]
                )
            h[i, j] = v
        h[i, i] += zv * n_other * n_vec[i]


@njit(cache=True)
def _rhs_nb(rho_s, h, sq, n_vec, kappa, m, out_s):
    d = rho_s.shape[0]
    for i in range(d):
        for j in range(d):
            acc = 0.0 + 0.0j
            for k in range(d):
                acc += h[i, k] * rho_s[k, j]
            m[i, j] = acc
    for i in range(d):
        for j in range(d):
            v = -1j * (m[i, j] - np.conj(m[j, i]))
            if i + 1 < d and j + 1 < d:
                v += kappa * sq[i] * sq[j] * rho_s[i + 1, j + 1]
            v -= 0.5 * kappa * (n_vec[i] + n_vec[j]) * rho_s[i, j]
            out_s[i, j] = v


@njit(cache=True)
def _pair_rhs_nb(rho, h0, a_mat, a2a, aa_op, n_vec, sq, zj, zv, t_ch, kappa,
                 fields, h, m, out):
    for x in range(2):
        _fields_nb(rho[1 - x], a_mat, a2a, aa_op, n_vec, fields[x])
    for x in range(2):
        _build_h_nb(h0, a_mat, a2a, aa_op, n_vec, zj, zv, t_ch, fields[x], h)
        _rhs_nb(rho[x], h, sq, n_vec, kappa, m, out[x])


@njit(cache=True)
def evolve_numba(
    rho,
    h0,
    a_mat,
    a2a,
    aa_op,
    n_vec,
    sq,
    zj,
    zv,
    t_ch,
    kappa,
    dt,
    n_samples,
    sample_every,
    t0,
    abort_top,
    out_t,
    out_aa,
    out_ab,
    out_na,
    out_nb,
    out_resa,
    out_resb,
    out_trace,
    out_herm,
    out_mineig,
    out_toppop,
):
    d = rho.shape[1]
    k1 = np.zeros((2, d, d), np.complex128)
    k2 = np.zeros((2, d, d), np.complex128)
    k3 = np.zeros((2, d, d), np.complex128)
    k4 = np.zeros((2, d, d), np.complex128)
    stage = np.zeros((2, d, d), np.complex128)
    h = np.zeros((d, d), np.complex128)
    m = np.zeros((d, d), np.complex128)
    fields = np.zeros((2, 4), np.complex128)
    tmp = np.zeros((d, d), np.complex128)

    for s in range(n_samples):
        for _ in range(sample_every):
            _pair_rhs_nb(rho, h0, a_mat, a2a, aa_op, n_vec, sq, zj, zv, t_ch,
                         kappa, fields, h, m, k1)
            for x in range(2):
                for i in range(d):
                    for j in range(d):
                        stage[x, i, j] = rho[x, i, j] + 0.5 * dt * k1[x, i, j]
            _pair_rhs_nb(stage, h0, a_mat, a2a, aa_op, n_vec, sq, zj, zv, t_ch,
                         kappa, fields, h, m, k2)
            for x in range(2):
                for i in range(d):
                    for j in range(d):
                        stage[x, i, j] = rho[x, i, j] + 0.5 * dt * k2[x, i, j]
            _pair_rhs_nb(stage, h0, a_mat, a2a, aa_op, n_vec, sq, zj, zv, t_ch,
                         kappa, fields, h, m, k3)
            for x in range(2):
                for i in range(d):
                    for j in range(d):
                        stage[x, i, j] = rho[x, i, j] + dt * k3[x, i, j]
            _pair_rhs_nb(stage, h0, a_mat, a2a, aa_op, n_vec, sq, zj, zv, t_ch,
                         kappa, fields, h, m, k4)
            sixth = dt / 6.0
            for x in range(2):
                for i in range(d):
                    for j in range(d):
                        rho[x, i, j] += sixth * (
                            k1[x, i, j]
                            + 2.0 * (k2[x, i, j] + k3[x, i, j])
                            + k4[x, i, j]
                        )
        # ---- sample ----
        for x in range(2):
            _fields_nb(rho[x], a_mat, a2a, aa_op, n_vec, fields[x])
        out_t[s] = t0 + (s + 1) * sample_every * dt
        out_aa[s] = fields[0, 0]
        out_ab[s] = fields[1, 0]
        out_na[s] = fields[0, 1].real
        out_nb[s] = fields[1, 1].real
        _pair_rhs_nb(rho, h0, a_mat, a2a, aa_op, n_vec, sq, zj, zv, t_ch,
                     kappa, fields, h, m, k1)
        ra = 0.0
        rb = 0.0
        for i in range(d):
            for j in range(d):
                ra += abs(k1[0, i, j]) ** 2
                rb += abs(k1[1, i, j]) ** 2
        out_resa[s] = np.sqrt(ra)
        out_resb[s] = np.sqrt(rb)
        terr = 0.0
        herr = 0.0
        for x in range(2):
            tr = 0.0
            for i in range(d):
                tr += rho[x, i, i].real
            if abs(tr - 1.0) > terr:
                terr = abs(tr - 1.0)
            for i in range(d):
                for j in range(d):
                    hv = abs(rho[x, i, j] - np.conj(rho[x, j, i]))
                    if hv > herr:
                        herr = hv
        out_trace[s] = terr
        out_herm[s] = herr
        # blow-up check must precede the eigensolve: LAPACK raises on NaNs
        if not (np.isfinite(terr) and np.isfinite(herr)):
            out_mineig[s] = np.nan
            out_toppop[s] = np.nan
            return 1, s + 1
        emin = 1.0e300
        for x in range(2):
            for i in range(d):
                for j in range(d):
                    tmp[i, j] = rho[x, i, j]
            ev = np.linalg.eigvalsh(tmp)
            if ev[0] < emin:
                emin = ev[0]
        out_mineig[s] = emin
        top = rho[0, d - 1, d - 1].real
        if rho[1, d - 1, d - 1].real > top:
            top = rho[1, d - 1, d - 1].real
        out_toppop[s] = top
        if abort_top > 0.0 and top >= abort_top:
            return 2, s + 1
    return 0, n_samples
