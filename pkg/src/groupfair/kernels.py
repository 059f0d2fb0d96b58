"""Exact integer kernels for the enumeration-heavy checks.

Every utility is pre-scaled to an integer (see ``Instance.scale``), so the
comparisons below are exact.  Each kernel has a numba version and a numpy
version with identical results; ``dispatch`` picks one per call.  Arrays of
``dtype=object`` (Python ints, used when int64 could overflow) always take the
numpy path.

Shapes used throughout:

* ``V``   value cube ``(N, n, n)``, ``V[t, a, b]`` = scaled ``u_a`` of agent
  ``b``'s bundle in allocation ``t``.
* ``tab`` padded group table ``(n + 1, C, n)``; row ``tab[k, g, :k]`` lists the
  members of the ``g``-th size-``k`` group in lexicographic order.
* ``cnt`` number of groups per size, ``cnt[k] = C(n, k)``.
* ``S``   group sums ``(N, C_k)`` of own-bundle utilities.
"""
import numpy as np

from groupfair._backend import use_numba

INT64_SAFE = 2**62

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None


# --------------------------------------------------------------------------
# numpy reference kernels


def _member_matrix(tab, cnt, k, n, dtype):
    m = np.zeros((cnt[k], n), dtype=dtype)
    for g in range(cnt[k]):
        m[g, tab[k, g, :k]] = 1
    return m


def gef_pair_violations_np(V1, tab, cnt, k, h, p, q):
    """Boolean ``(C_k, C_h)`` grid of violating pairs for one allocation."""
    n = V1.shape[0]
    mk = _member_matrix(tab, cnt, k, n, V1.dtype)
    mh = _member_matrix(tab, cnt, h, n, V1.dtype)
    own = mk @ np.diagonal(V1).copy()
    cross = mk @ V1 @ mh.T
    bad = (q * h) * own[:, None] < p * cross
    if k == n and h == n:
        bad[:] = False
    return bad


def gef_matrix_np(V, tab, cnt, p, q):
    N, n, _ = V.shape
    out = np.ones((N, n, n), dtype=bool)
    diag = np.diagonal(V, axis1=1, axis2=2)
    mats = [None] + [_member_matrix(tab, cnt, k, n, V.dtype) for k in range(1, n + 1)]
    for k in range(1, n + 1):
        own = diag @ mats[k].T                           # (N, Ck)
        left = mats[k] @ V                               # (N, Ck, n)
        for h in range(1, n + 1):
            if k == n and h == n:
                continue
            cross = left @ mats[h].T                     # (N, Ck, Ch)
            ok = (q * h) * own[:, :, None] >= p * cross
            out[:, k - 1, h - 1] = ok.reshape(N, -1).all(axis=1)
    return out


def first_dominator_np(S, T, p, q):
    ge = (p * S >= q * T).all(axis=1)
    gt = (p * S > q * T).any(axis=1)
    hit = np.flatnonzero(ge & gt)
    return int(hit[0]) if hit.size else -1


def gpe_holds_np(S, p, q, block=None):
    if S.dtype != object and len(S) > 1:
        # verdicts depend only on the row, so solve the distinct rows once
        U, inverse = np.unique(S, axis=0, return_inverse=True)
        if len(U) < len(S):
            return _gpe_holds_rows(U, p, q, block)[inverse.ravel()]
    return _gpe_holds_rows(S, p, q, block)


def _pareto_front(S):
    """Rows of ``S`` not dominated at alpha = 1.  A row dominating another at
    any alpha is weakly beaten by some front row, which then dominates too, so
    the front is a complete candidate set."""
    order = np.argsort(-S.sum(axis=1), kind="stable")
    front = []
    for i in order:
        row = S[i]
        if front:
            F = S[front]
            if ((F >= row).all(axis=1) & (F > row).any(axis=1)).any():
                continue
        front.append(i)
    return S[np.array(front)]


def _gpe_holds_rows(S, p, q, block):
    N, C = S.shape
    cand = p * _pareto_front(S)
    if block is None:
        block = max(1, 2_000_000 // max(1, len(cand) * C))
    holds = np.empty(N, dtype=bool)
    for lo in range(0, N, block):
        inc = q * S[lo:lo + block]                       # (B, C)
        ge = (cand[None, :, :] >= inc[:, None, :]).all(axis=2)
        gt = (cand[None, :, :] > inc[:, None, :]).any(axis=2)
        holds[lo:lo + block] = ~(ge & gt).any(axis=1)
    return holds


# --------------------------------------------------------------------------
# numba kernels

if njit is not None:

    @njit(cache=True)
    def _gef_entry_nb(V1, tab, cnt, k, h, p, q):
        # returns flat index g * C_h + j of the first violating pair, or -1
        n = V1.shape[0]
        if k == n and h == n:
            return -1
        for g in range(cnt[k]):
            own = 0
            for i in range(k):
                a = tab[k, g, i]
                own += V1[a, a]
            lhs = q * h * own
            for j in range(cnt[h]):
                cross = 0
                for i in range(k):
                    a = tab[k, g, i]
                    for r in range(h):
                        cross += V1[a, tab[h, j, r]]
                if lhs < p * cross:
                    return g * cnt[h] + j
        return -1

    @njit(cache=True)
    def gef_first_violation_nb(V1, tab, cnt, k, h, p, q):
        return _gef_entry_nb(V1, tab, cnt, k, h, p, q)

    @njit(cache=True)
    def gef_matrix_nb(V, tab, cnt, p, q):
        N, n, _ = V.shape
        out = np.ones((N, n, n), dtype=np.bool_)
        for t in range(N):
            for k in range(1, n + 1):
                for h in range(1, n + 1):
                    if _gef_entry_nb(V[t], tab, cnt, k, h, p, q) >= 0:
                        out[t, k - 1, h - 1] = False
        return out

    @njit(cache=True)
    def first_dominator_nb(S, T, p, q):
        N, C = S.shape
        for j in range(N):
            strict = False
            ok = True
            for g in range(C):
                lhs = p * S[j, g]
                rhs = q * T[g]
                if lhs < rhs:
                    ok = False
                    break
                if lhs > rhs:
                    strict = True
            if ok and strict:
                return j
        return -1

    @njit(cache=True)
    def gpe_holds_nb(S, p, q):
        N, C = S.shape
        holds = np.ones(N, dtype=np.bool_)
        for i in range(N):
            for j in range(N):
                strict = False
                ok = True
                for g in range(C):
                    lhs = p * S[j, g]
                    rhs = q * S[i, g]
                    if lhs < rhs:
                        ok = False
                        break
                    if lhs > rhs:
                        strict = True
                if ok and strict:
                    holds[i] = False
                    break
        return holds


# --------------------------------------------------------------------------
# dispatch


def _jit_ok(*arrays):
    return use_numba() and njit is not None and all(a.dtype == np.int64 for a in arrays)


def gef_first_violation(V1, tab, cnt, k, h, p, q):
    """Flat index ``g * C_h + j`` of the first violating pair, ``-1`` if none."""
    if _jit_ok(V1):
        return int(gef_first_violation_nb(V1, tab, cnt, k, h, int(p), int(q)))
    bad = gef_pair_violations_np(V1, tab, cnt, k, h, p, q)
    hit = np.flatnonzero(bad.ravel())
    return int(hit[0]) if hit.size else -1


def gef_matrix(V, tab, cnt, p, q):
    if _jit_ok(V):
        return gef_matrix_nb(V, tab, cnt, int(p), int(q))
    return gef_matrix_np(V, tab, cnt, p, q)


def first_dominator(S, T, p, q):
    if _jit_ok(S, T):
        return int(first_dominator_nb(S, T, int(p), int(q)))
    return first_dominator_np(S, T, p, q)


def gpe_holds(S, p, q):
    if _jit_ok(S):
        return gpe_holds_nb(S, int(p), int(q))
    return gpe_holds_np(S, p, q)


def widen(arr, bound):
    """Return ``arr`` as Python-int objects when ``bound`` could overflow int64."""
    if arr.dtype == np.int64 and bound >= INT64_SAFE:
        return arr.astype(object)
    return arr


def as_exact_array(values, bound):
    """int64 array if ``bound`` (a magnitude bound on every intermediate)
    stays below 2**62, else an object array of Python ints."""
    if bound < INT64_SAFE:
        return np.asarray(values, dtype=np.int64)
    return np.asarray(values, dtype=object)
